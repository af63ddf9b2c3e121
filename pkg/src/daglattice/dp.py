"""Forward-backward inference over DAG lattices.

Implements, entirely in log space:

    alpha_i(j) = P[j, y_i] * sum_{k<j} alpha_{i-1}(k) * E[k, j]
    beta_i(j)  = sum_{k>j} E[j, k] * beta_{i+1}(k) * P[k, y_{i+1}]

with alpha_1 one-hot at vertex 1 and beta_M one-hot at vertex L. The log
marginal of the target is log alpha_M(L); posteriors, expected hidden
states, and the analytic NLL gradient all derive from the two tables.
Indices are 0-based throughout this module.
"""

from dataclasses import dataclass

import numpy as np

from .lattice import DagLattice, TargetSequence
from .logspace import NEG_INF, logsumexp


class InfeasibleTarget(ValueError):
    """No strictly increasing path of length M from vertex 1 to vertex L."""


class MissingHiddenStates(ValueError):
    """Operation requires hidden states but the lattice has hidden_dim 0."""


@dataclass(frozen=True)
class ForwardTable:
    log_alpha: np.ndarray  # (M, L)

    @property
    def log_marginal(self):
        return float(self.log_alpha[-1, -1])


@dataclass(frozen=True)
class BackwardTable:
    log_beta: np.ndarray  # (M, L)


@dataclass(frozen=True)
class PosteriorTable:
    gamma: np.ndarray  # (M, L), gamma[i, j] = P(a_i = j | X, Y)
    xi: np.ndarray | None = None  # (M-1, L, L), xi[i, k, j] = P(a_i=k, a_{i+1}=j | X, Y)


@dataclass(frozen=True)
class ExpectedStates:
    z: np.ndarray  # (M, d)


def _tokens(lattice: DagLattice, target) -> np.ndarray:
    toks = target.tokens if isinstance(target, TargetSequence) else np.asarray(target, dtype=np.int64)
    if toks.ndim != 1 or toks.size < 1:
        raise ValueError("target must be a non-empty 1-D token sequence")
    if np.any(toks < 0) or np.any(toks >= lattice.vocab_size):
        raise ValueError(
            f"token id out of range [0, {lattice.vocab_size}) in target"
        )
    return toks


def forward(lattice: DagLattice, target) -> ForwardTable:
    y = _tokens(lattice, target)
    M, L = y.size, lattice.graph_size
    logE, logP = lattice.log_transition, lattice.log_emission
    la = np.full((M, L), NEG_INF)
    la[0, 0] = logP[0, y[0]]
    for i in range(1, M):
        # inner reduction over predecessors k; masked entries of E keep k < j
        la[i] = logP[:, y[i]] + logsumexp(la[i - 1][:, None] + logE, axis=0)
    return ForwardTable(la)


def backward(lattice: DagLattice, target) -> BackwardTable:
    y = _tokens(lattice, target)
    M, L = y.size, lattice.graph_size
    logE, logP = lattice.log_transition, lattice.log_emission
    lb = np.full((M, L), NEG_INF)
    lb[M - 1, L - 1] = 0.0
    for i in range(M - 2, -1, -1):
        lb[i] = logsumexp(logE + (lb[i + 1] + logP[:, y[i + 1]])[None, :], axis=1)
    return BackwardTable(lb)


def log_marginal(lattice: DagLattice, target) -> float:
    return forward(lattice, target).log_marginal


def nll(lattice: DagLattice, target) -> float:
    """Negative log-likelihood of the target; +inf when no path exists."""
    lm = log_marginal(lattice, target)
    return float("inf") if lm == NEG_INF else -lm


def posterior(lattice: DagLattice, target, with_pairwise=False) -> PosteriorTable:
    """Vertex occupancy gamma and, optionally, edge posteriors xi.

    gamma[i, j] = exp(log_alpha[i, j] + log_beta[i, j] - log_marginal).
    Raises InfeasibleTarget when the marginal is zero.
    """
    y = _tokens(lattice, target)
    ft = forward(lattice, y)
    bt = backward(lattice, y)
    logZ = ft.log_marginal
    if logZ == NEG_INF:
        raise InfeasibleTarget(
            f"target of length {y.size} has no path in a {lattice.graph_size}-vertex lattice"
        )
    gamma = np.exp(ft.log_alpha + bt.log_beta - logZ)
    xi = None
    if with_pairwise:
        M, L = y.size, lattice.graph_size
        logE, logP = lattice.log_transition, lattice.log_emission
        xi = np.empty((M - 1, L, L))
        for i in range(M - 1):
            np.exp(
                ft.log_alpha[i][:, None]
                + logE
                + (logP[:, y[i + 1]] + bt.log_beta[i + 1])[None, :]
                - logZ,
                out=xi[i],
            )
    return PosteriorTable(gamma, xi)


def expected_states(lattice: DagLattice, target) -> ExpectedStates:
    """Posterior-weighted combination of vertex hidden states, z = gamma @ V."""
    if lattice.hidden_dim == 0 or lattice.hidden_states is None:
        raise MissingHiddenStates("lattice has no hidden states (hidden_dim = 0)")
    post = posterior(lattice, target)
    return ExpectedStates(post.gamma @ lattice.hidden_states)


def nll_grad(lattice: DagLattice, target):
    """Gradient of nll wrt each free log-matrix entry (no renormalization).

    d nll / d log E[k, j] = -sum_i xi[i, k, j]
    d nll / d log P[j, v] = -sum_{i: y_i = v} gamma[i, j]

    Entries at -inf get gradient 0. Returns (grad_log_transition,
    grad_log_emission).
    """
    y = _tokens(lattice, target)
    post = posterior(lattice, y, with_pairwise=True)
    dE = -post.xi.sum(axis=0)
    dE[lattice.log_transition == NEG_INF] = 0.0
    dP = np.zeros((lattice.graph_size, lattice.vocab_size))
    for i, v in enumerate(y):
        dP[:, v] -= post.gamma[i]
    dP[lattice.log_emission == NEG_INF] = 0.0
    return dE, dP


def composite_loss(nll_value, tts_loss_value, mu):
    """Weighted sum nll_value + mu * tts_loss_value."""
    if mu < 0:
        raise ValueError("mu must be non-negative")
    return float(nll_value) + float(mu) * float(tts_loss_value)
