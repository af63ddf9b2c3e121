"""Log-space dynamic programming and parallel decoding over DAG lattices."""

from .lattice import (
    DagLattice,
    TargetSequence,
    VertexPath,
    build_random,
    load_lattice,
    load_target,
    save_lattice,
    save_target,
    validate,
)
from .dp import (
    InfeasibleTarget,
    MissingHiddenStates,
    backward,
    composite_loss,
    expected_states,
    forward,
    log_marginal,
    nll,
    nll_grad,
    posterior,
)
from .decode import (
    DecodeResult,
    GlanceAssignment,
    best_path,
    glance_assign,
    joint_viterbi,
    lookahead,
    tau_schedule,
)
from .pipeline import length_regulate, tts_losses, combined_loss

__all__ = [
    "DagLattice", "TargetSequence", "VertexPath",
    "build_random", "load_lattice", "load_target", "save_lattice", "save_target",
    "validate",
    "InfeasibleTarget", "MissingHiddenStates",
    "forward", "backward", "log_marginal", "nll", "posterior",
    "expected_states", "nll_grad", "composite_loss",
    "DecodeResult", "GlanceAssignment",
    "best_path", "lookahead", "joint_viterbi", "glance_assign", "tau_schedule",
    "length_regulate", "tts_losses", "combined_loss",
]

__version__ = "0.1.0"
