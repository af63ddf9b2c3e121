"""Duration-based length regulation and the TTS-side loss arithmetic.

This is the deterministic slice of the acoustic stage: expand per-token
states into frame sequences by integer durations, and combine L1/MSE
residuals with the lattice NLL into a single training objective.
"""

from dataclasses import dataclass

import numpy as np

from . import dp
from .lattice import DagLattice


class LengthMismatch(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class TTSLosses:
    l1: float
    dur_mse: float
    pitch_mse: float
    energy_mse: float
    total: float


@dataclass(frozen=True)
class LossBreakdown:
    nll: float
    tts_total: float
    combined: float


def length_regulate(states, durations) -> np.ndarray:
    """Repeat row i of `states` durations[i] times; zero durations drop rows."""
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    durations = np.asarray(durations, dtype=np.int64)
    if durations.ndim != 1 or states.shape[0] != durations.size:
        raise LengthMismatch(
            f"{states.shape[0]} state rows vs {durations.size} durations"
        )
    if np.any(durations < 0):
        raise ValueError("durations must be non-negative")
    return np.repeat(states, durations, axis=0)


def _pair(pred, gt, name):
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ShapeMismatch(f"{name}: pred shape {pred.shape} vs gt shape {gt.shape}")
    return pred, gt


def tts_losses(pred_mel, gt_mel, pred_dur, gt_dur, pred_pitch, gt_pitch,
               pred_energy, gt_energy) -> TTSLosses:
    """Mean L1 on mel plus mean squared error on duration/pitch/energy,
    summed with unit weights.
    """
    pm, gm = _pair(pred_mel, gt_mel, "mel")
    pd, gd = _pair(pred_dur, gt_dur, "duration")
    pp, gp = _pair(pred_pitch, gt_pitch, "pitch")
    pe, ge = _pair(pred_energy, gt_energy, "energy")
    l1 = float(np.mean(np.abs(pm - gm)))
    dur_mse = float(np.mean((pd - gd) ** 2))
    pitch_mse = float(np.mean((pp - gp) ** 2))
    energy_mse = float(np.mean((pe - ge) ** 2))
    return TTSLosses(l1, dur_mse, pitch_mse, energy_mse,
                     l1 + dur_mse + pitch_mse + energy_mse)


def combined_loss(lattice: DagLattice, target, pred_mel, gt_mel, pred_dur, gt_dur,
                  pred_pitch, gt_pitch, pred_energy, gt_energy, mu) -> LossBreakdown:
    """NLL of the target plus mu times the TTS total."""
    nll_value = dp.nll(lattice, target)
    tts = tts_losses(pred_mel, gt_mel, pred_dur, gt_dur, pred_pitch, gt_pitch,
                     pred_energy, gt_energy)
    return LossBreakdown(nll_value, tts.total,
                         dp.composite_loss(nll_value, tts.total, mu))
