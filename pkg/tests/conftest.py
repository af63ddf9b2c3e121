import numpy as np
import pytest

from daglattice import DagLattice
from daglattice.logspace import NEG_INF


def log(p):
    return NEG_INF if p == 0 else float(np.log(p))


def lattice_from_probs(trans, emit, hidden=None):
    """Build a DagLattice from linear-probability matrices (0 -> -inf)."""
    trans = np.asarray(trans, dtype=np.float64)
    emit = np.asarray(emit, dtype=np.float64)
    with np.errstate(divide="ignore"):
        lt = np.log(trans)
        le = np.log(emit)
    d = 0 if hidden is None else np.asarray(hidden).shape[1]
    return DagLattice(trans.shape[0], emit.shape[1], d, lt, le, hidden)


@pytest.fixture
def single_path_lattice():
    """L=2, one edge with probability 1, P[1,y1=0]=0.5, P[2,y2=1]=0.25."""
    return lattice_from_probs(
        [[0.0, 1.0], [0.0, 0.0]],
        [[0.5, 0.5], [0.75, 0.25]],
    )


@pytest.fixture
def single_path_target():
    return [0, 1]  # joint probability 0.5 * 1 * 0.25 = 0.125
