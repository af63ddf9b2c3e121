"""Exhaustive-enumeration reference implementations.

Every path from vertex 1 to vertex L of length M is generated explicitly
(interior vertices are an (M-2)-combination of the L-2 middle vertices, so
the count is C(L-2, M-2)). Exponential time; capped at small graph sizes.
These are the ground truth the DP and decode modules are tested against.
"""

import itertools

import numpy as np

from .lattice import DagLattice, TargetSequence
from .logspace import NEG_INF, logsumexp
from .dp import InfeasibleTarget, PosteriorTable, _tokens

DEFAULT_CAP = 12


class CapExceeded(ValueError):
    """Graph size above the enumeration cap; refuse rather than hang."""


def _check_cap(L, cap):
    if L > cap:
        raise CapExceeded(f"graph size {L} exceeds enumeration cap {cap}")


def enumerate_paths(graph_size, length):
    """All strictly increasing 0-based paths 0 -> graph_size-1 of the length."""
    L, M = graph_size, length
    if L == 1:
        if M == 1:
            yield (0,)
        return
    if M < 2 or M > L:
        return
    for interior in itertools.combinations(range(1, L - 1), M - 2):
        yield (0, *interior, L - 1)


def path_joint_logprob(lattice: DagLattice, tokens, path) -> float:
    """log P(Y, A | X): transition logs along edges plus emission logs."""
    logE, logP = lattice.log_transition, lattice.log_emission
    score = 0.0
    for a, b in zip(path, path[1:]):
        score += logE[a, b]
    for a, y in zip(path, tokens):
        score += logP[a, y]
    return float(score)


def enumerate_logprob(lattice: DagLattice, target, cap=DEFAULT_CAP) -> float:
    """Literal log-marginal: log-sum-exp of every path's joint log-prob."""
    _check_cap(lattice.graph_size, cap)
    y = _tokens(lattice, target)
    scores = [
        path_joint_logprob(lattice, y, p)
        for p in enumerate_paths(lattice.graph_size, y.size)
    ]
    return float(logsumexp(np.array(scores))) if scores else NEG_INF


def enumerate_posterior(lattice: DagLattice, target, cap=DEFAULT_CAP) -> PosteriorTable:
    """gamma and xi as weighted indicator averages over all paths."""
    _check_cap(lattice.graph_size, cap)
    y = _tokens(lattice, target)
    M, L = y.size, lattice.graph_size
    paths = list(enumerate_paths(L, M))
    scores = np.array([path_joint_logprob(lattice, y, p) for p in paths])
    logZ = logsumexp(scores) if paths else NEG_INF
    if logZ == NEG_INF:
        raise InfeasibleTarget(f"no length-{M} path in a {L}-vertex lattice")
    weights = np.exp(scores - logZ)
    gamma = np.zeros((M, L))
    xi = np.zeros((M - 1, L, L))
    for w, p in zip(weights, paths):
        for i, j in enumerate(p):
            gamma[i, j] += w
        for i in range(M - 1):
            xi[i, p[i], p[i + 1]] += w
    return PosteriorTable(gamma, xi)


def enumerate_expected_states(lattice: DagLattice, target, cap=DEFAULT_CAP) -> np.ndarray:
    """sum_A P(A | X, Y) * v_{a_i}, path by path."""
    _check_cap(lattice.graph_size, cap)
    if lattice.hidden_states is None:
        raise ValueError("lattice has no hidden states")
    y = _tokens(lattice, target)
    M = y.size
    paths = list(enumerate_paths(lattice.graph_size, M))
    scores = np.array([path_joint_logprob(lattice, y, p) for p in paths])
    weights = np.exp(scores - logsumexp(scores))
    z = np.zeros((M, lattice.hidden_dim))
    for w, p in zip(weights, paths):
        z += w * lattice.hidden_states[list(p)]
    return z


def greedy_tokens(lattice: DagLattice) -> np.ndarray:
    """Per-vertex argmax token, smallest id on ties."""
    return np.argmax(lattice.log_emission, axis=1)


def enumerate_argmax(lattice: DagLattice, target=None, length=None, cap=DEFAULT_CAP):
    """Exhaustive best path: (path, tokens, score).

    With a target, score is the joint log-prob of (target, path). Without
    one, tokens are the per-vertex greedy choice and `length` fixes the path
    length. Ties resolve to the lexicographically smallest path, matching
    the decoders' smallest-vertex rule.
    """
    L = lattice.graph_size
    _check_cap(L, cap)
    if target is not None:
        toks = _tokens(lattice, target)
        M = toks.size
        gt = None
    else:
        if length is None:
            raise ValueError("length is required in greedy-token mode")
        M = int(length)
        gt = greedy_tokens(lattice)
    best = None
    for p in enumerate_paths(L, M):
        ptoks = toks if gt is None else gt[list(p)]
        score = path_joint_logprob(lattice, ptoks, p)
        if score == NEG_INF:
            continue
        if best is None or score > best[2]:
            best = (p, np.asarray(ptoks), score)
    if best is None:
        raise InfeasibleTarget(f"no finite-probability length-{M} path in a {L}-vertex lattice")
    return best
