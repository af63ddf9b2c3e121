import math

import numpy as np
import pytest

from daglattice import build_random
from daglattice import oracle
from daglattice.oracle import (
    CapExceeded,
    enumerate_argmax,
    enumerate_logprob,
    enumerate_paths,
    enumerate_posterior,
)

from conftest import lattice_from_probs


def test_path_count_closed_form():
    for L in range(2, 13):
        for M in range(2, L + 1):
            assert sum(1 for _ in enumerate_paths(L, M)) == math.comb(L - 2, M - 2)


def test_degenerate_single_vertex_path():
    assert list(enumerate_paths(1, 1)) == [(0,)]
    assert list(enumerate_paths(1, 2)) == []
    assert list(enumerate_paths(3, 1)) == []


def test_four_vertex_length_three_paths():
    assert list(enumerate_paths(4, 3)) == [(0, 1, 3), (0, 2, 3)]


def test_single_path_logprob_is_product(single_path_lattice, single_path_target):
    assert enumerate_logprob(single_path_lattice, single_path_target) == pytest.approx(
        math.log(0.125), abs=1e-12
    )


def test_posterior_one_hot_on_single_path(single_path_lattice, single_path_target):
    post = enumerate_posterior(single_path_lattice, single_path_target)
    assert post.gamma == pytest.approx(np.eye(2), abs=1e-12)


def test_posterior_symmetric_two_path_split():
    # interior vertices 2 and 3 carry identical mass by construction
    trans = np.zeros((4, 4))
    trans[0, 1] = trans[0, 2] = 0.5
    trans[1, 3] = trans[2, 3] = 1.0
    emit = np.full((4, 2), 0.5)
    lat = lattice_from_probs(trans, emit)
    post = enumerate_posterior(lat, [0, 1, 0])
    assert post.gamma[1, 1] == pytest.approx(0.5, abs=1e-12)
    assert post.gamma[1, 2] == pytest.approx(0.5, abs=1e-12)


def test_argmax_single_path(single_path_lattice, single_path_target):
    path, _, _ = enumerate_argmax(single_path_lattice, single_path_target)
    assert path == (0, 1)


def test_argmax_greedy_token_mode():
    lat = build_random(6, 4, 0, 2)
    path, toks, score = enumerate_argmax(lat, length=3)
    assert len(path) == len(toks) == 3
    greedy = np.argmax(lat.log_emission, axis=1)
    assert np.array_equal(toks, greedy[list(path)])
    assert score == pytest.approx(oracle.path_joint_logprob(lat, toks, path), abs=1e-12)


def test_cap_enforced():
    lat = build_random(13, 3, 0, 0)
    with pytest.raises(CapExceeded):
        enumerate_logprob(lat, list(range(3)))
    # explicit larger cap lifts the limit
    assert np.isfinite(enumerate_logprob(lat, [0, 1, 2], cap=13))
