"""Stochastic switching rules between the two potential levels.

Two jump models are supported:

* ``constant``: the switching rate is the bare parameter nu, independent
  of the state.  Jumps then cluster wherever the oscillator spends its
  time, i.e. near the classical turning points, which pumps energy into
  the ensemble.
* ``ground_overlap``: the rate is nu * |<ground(target)|state>|^2, so the
  packet switches preferentially when it resembles the destination
  level's ground state -- near the bottom of the well, where the
  potential-energy mismatch between the levels is smallest.

The overlap is evaluated in closed form.  For a packet with moments
(mx, mp, a = var_x, c = cov_xp) and a target ground state of position
variance b, the Gaussian integral of the product wavefunction gives

    |<ground|state>|^2 = exp(2 Re(B^2/(4A)) - mx^2/(2b)) / (2 sqrt(ab) |A|)

with A = (a+b)/(4ab) - i c/(2 hbar a) and B = -mx/(2b) + i mp/hbar.
The chirp (c != 0) and the mean momentum both suppress the overlap, so
the full complex form matters: jumps are attempted mid-oscillation,
where the packet is chirped.

At a jump the five moments are transferred unchanged; only the governing
potential switches.

Jump times are sampled by Bernoulli thinning: each step of length dt
fires with probability rate*dt.  The discretization bias is O(rate*dt),
and a hard cap rate*dt <= 0.1 keeps it auditable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, StepSizeError
from .gaussian import GaussianState, OscillatorParams

__all__ = [
    "CONSTANT",
    "GROUND_OVERLAP",
    "JUMP_MODEL_KINDS",
    "JumpModel",
    "JumpEvent",
    "ground_state",
    "ground_overlap",
    "jump_rate",
    "sample_jump",
    "MAX_STEP_PROBABILITY",
]

CONSTANT = "constant"
GROUND_OVERLAP = "ground_overlap"
JUMP_MODEL_KINDS = (CONSTANT, GROUND_OVERLAP)

# Cap on the per-step Bernoulli probability rate*dt.
MAX_STEP_PROBABILITY = 0.1


@dataclass(frozen=True)
class JumpModel:
    """Switching rule: ``kind`` selects the rate law, ``nu`` its scale."""

    kind: str
    nu: float

    def __post_init__(self):
        if self.kind not in JUMP_MODEL_KINDS:
            raise ParameterError(f"unknown jump model kind {self.kind!r}; expected one of {JUMP_MODEL_KINDS}")
        if not (self.nu >= 0 and np.isfinite(self.nu)):
            raise ParameterError(f"nu must be nonnegative and finite, got {self.nu}")


@dataclass(frozen=True)
class JumpEvent:
    """A recorded level switch: when, which direction, and where the packet centre was."""

    time: float
    from_level: int
    to_level: int
    mean_x_at_jump: float

    def __post_init__(self):
        if self.from_level not in (1, 2) or self.to_level not in (1, 2):
            raise ParameterError("levels must be 1 or 2")
        if self.from_level == self.to_level:
            raise ParameterError("a jump must change the level")


def ground_state(params: OscillatorParams) -> GaussianState:
    """Ground state of the given level: centered, var_x = hbar/(2 m w), var_p = hbar m w / 2."""
    mw = params.mass * params.omega
    return GaussianState(
        mean_x=0.0,
        mean_p=0.0,
        var_x=params.hbar / (2 * mw),
        var_p=params.hbar * mw / 2,
        cov_xp=0.0,
    )


def overlap_with_ground(mean_x, mean_p, var_x, cov_xp, target_var_x, hbar):
    """Closed-form |<ground|state>|^2; accepts scalars or same-shape arrays.

    Vectorized core shared by `ground_overlap` and the trajectory
    kernel, which evaluates it for a whole batch every step.
    """
    a = var_x
    b = target_var_x
    alpha = (a + b) / (4 * a * b)
    beta = cov_xp / (2 * hbar * a)
    abs_a_sq = alpha * alpha + beta * beta
    br = -mean_x / (2 * b)
    bi = mean_p / hbar
    re_quad = ((br * br - bi * bi) * alpha - 2 * br * bi * beta) / (4 * abs_a_sq)
    log_p = 2 * (re_quad - mean_x * mean_x / (4 * b))
    p = np.exp(log_p) / (2 * np.sqrt(a * b) * np.sqrt(abs_a_sq))
    return np.minimum(p, 1.0)


def ground_overlap(
    state: GaussianState,
    source_params: OscillatorParams,
    target_params: OscillatorParams,
) -> float:
    """Probability weight |<ground(target)|state>|^2, in [0, 1].

    The bra is the real ground-state Gaussian of the target level; the
    ket is the full complex packet, including its chirp and momentum
    phases (which only ever reduce the overlap).
    """
    if source_params.hbar != target_params.hbar or source_params.mass != target_params.mass:
        raise ParameterError("source and target levels must share mass and hbar")
    target = ground_state(target_params)
    return float(
        overlap_with_ground(
            state.mean_x, state.mean_p, state.var_x, state.cov_xp,
            target.var_x, target_params.hbar,
        )
    )


def jump_rate(
    model: JumpModel,
    state: GaussianState,
    source_params: OscillatorParams,
    target_params: OscillatorParams,
) -> float:
    """Instantaneous switching rate (per unit time); always in [0, nu]."""
    if model.kind == CONSTANT:
        return model.nu
    return model.nu * ground_overlap(state, source_params, target_params)


def sample_jump(rate: float, dt: float, rng: np.random.Generator) -> bool:
    """Bernoulli draw: jump within this step with probability rate*dt.

    Thinning of an inhomogeneous Poisson process, valid while rate*dt is
    small; the 0.1 cap signals that dt is too coarse for the requested
    rate rather than silently degrading the statistics.
    """
    if rate < 0:
        raise ParameterError(f"rate must be nonnegative, got {rate}")
    if dt <= 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    p = rate * dt
    if p > MAX_STEP_PROBABILITY:
        raise StepSizeError(
            f"rate*dt = {p:.4g} exceeds {MAX_STEP_PROBABILITY}; reduce dt or nu"
        )
    return bool(rng.random() < p)
