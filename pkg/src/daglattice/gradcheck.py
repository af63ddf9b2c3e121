"""Central finite-difference verification of the analytic NLL gradient.

Each finite log-matrix entry is treated as a free parameter; the check
perturbs it by +/-step and compares (nll(+) - nll(-)) / (2*step) against
the closed-form gradient. Relative error uses the larger of the two
magnitudes in the denominator.
"""

import numpy as np

from . import dp
from .lattice import DagLattice
from .logspace import NEG_INF


def _perturbed_nll(lattice, target, which, idx, delta):
    lt = np.array(lattice.log_transition)
    le = np.array(lattice.log_emission)
    (lt if which == "E" else le)[idx] += delta
    pert = DagLattice(lattice.graph_size, lattice.vocab_size, lattice.hidden_dim,
                      lt, le, lattice.hidden_states)
    return dp.nll(pert, target)


def finite_difference_check(lattice, target, step=1e-6, grad_floor=1e-8):
    """Returns {"max_rel_err", "checked", "skipped"} over all finite entries.

    Entries whose analytic gradient magnitude is below grad_floor are
    skipped (relative error is meaningless near zero).
    """
    dE, dP = dp.nll_grad(lattice, target)
    max_rel = 0.0
    checked = 0
    skipped = 0
    for which, mat, grad in (("E", lattice.log_transition, dE),
                             ("P", lattice.log_emission, dP)):
        for idx in zip(*np.nonzero(mat > NEG_INF)):
            g = grad[idx]
            if abs(g) <= grad_floor:
                skipped += 1
                continue
            hi = _perturbed_nll(lattice, target, which, idx, step)
            lo = _perturbed_nll(lattice, target, which, idx, -step)
            fd = (hi - lo) / (2.0 * step)
            rel = abs(fd - g) / max(abs(fd), abs(g))
            max_rel = max(max_rel, rel)
            checked += 1
    return {"max_rel_err": max_rel, "checked": checked, "skipped": skipped}
