"""Gaussian wave packets under a fixed-frequency harmonic potential.

A pure Gaussian packet is fully determined by five real moments: the
means <x>, <p>, the central variances sigma_x^2, sigma_p^2 and the
symmetrized covariance sigma_xp = <{x,p}/2> - <x><p>.  Under
H = p^2/2m + (1/2) m w^2 x^2 the moment equations are linear with
constant coefficients, so between frequency switches the evolution is
the exact symplectic rotation

    S(dt) = [[cos(w dt),        sin(w dt)/(m w)],
             [-m w sin(w dt),   cos(w dt)      ]]

applied to the mean vector, and S Sigma S^T applied to the covariance
matrix.  No time-stepping error is incurred for any dt; this keeps
conservation checks (energy per segment, the uncertainty product)
sharp to rounding.

The covariance is a signed quantity: it sweeps through negative values
during every half period even though it starts at zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "OscillatorParams",
    "GaussianState",
    "propagate",
    "energy",
    "uncertainty_invariant",
    "wavefunction",
    "classical_turning_point",
]


@dataclass(frozen=True)
class OscillatorParams:
    """One potential level: angular frequency, mass and action scale.

    Dimensionless scaled units; the defaults m = hbar = 1 match the
    regime where the standard minimum-uncertainty packet has
    var_x = var_p = 1/2.
    """

    omega: float
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.omega > 0 and np.isfinite(self.omega)):
            raise ParameterError(f"omega must be positive and finite, got {self.omega}")
        if not (self.mass > 0 and np.isfinite(self.mass)):
            raise ParameterError(f"mass must be positive and finite, got {self.mass}")
        if not (self.hbar > 0 and np.isfinite(self.hbar)):
            raise ParameterError(f"hbar must be positive and finite, got {self.hbar}")


@dataclass(frozen=True)
class GaussianState:
    """First and second moments of a pure Gaussian wave packet.

    ``cov_xp`` is the symmetrized position-momentum covariance and may
    take either sign.  For the pure states this package generates,
    var_x * var_p - cov_xp**2 equals hbar^2/4 and stays there.
    """

    mean_x: float
    mean_p: float
    var_x: float
    var_p: float
    cov_xp: float

    def __post_init__(self):
        if not (self.var_x > 0 and np.isfinite(self.var_x)):
            raise ParameterError(f"var_x must be positive, got {self.var_x}")
        if not (self.var_p > 0 and np.isfinite(self.var_p)):
            raise ParameterError(f"var_p must be positive, got {self.var_p}")
        if not np.isfinite(self.mean_x) or not np.isfinite(self.mean_p):
            raise ParameterError("means must be finite")
        if self.var_x * self.var_p - self.cov_xp**2 <= 0:
            raise ParameterError(
                "covariance matrix must be positive definite: "
                f"var_x*var_p - cov_xp^2 = {self.var_x * self.var_p - self.cov_xp**2}"
            )

    @property
    def raw_x2(self) -> float:
        """Raw second moment <x^2>."""
        return self.var_x + self.mean_x**2

    @property
    def raw_p2(self) -> float:
        """Raw second moment <p^2>."""
        return self.var_p + self.mean_p**2

    @property
    def raw_xp(self) -> float:
        """Raw symmetrized moment <{x,p}/2>."""
        return self.cov_xp + self.mean_x * self.mean_p

    def covariance_matrix(self) -> np.ndarray:
        return np.array([[self.var_x, self.cov_xp], [self.cov_xp, self.var_p]])


def rotation_coefficients(params: OscillatorParams, dt: float):
    """Entries (a11, a12, a21, a22) of the phase-space rotation S(dt)."""
    c = np.cos(params.omega * dt)
    s = np.sin(params.omega * dt)
    mw = params.mass * params.omega
    return c, s / mw, -mw * s, c


def propagate(state: GaussianState, params: OscillatorParams, dt: float) -> GaussianState:
    """Advance a Gaussian state by dt under a fixed-frequency potential.

    Exact for any dt (positive or negative); the only error is floating
    point rounding.  Means transform by the rotation S(dt), central
    second moments by the congruence S Sigma S^T.
    """
    if not np.isfinite(dt):
        raise ParameterError(f"dt must be finite, got {dt}")
    a11, a12, a21, a22 = rotation_coefficients(params, dt)
    mx = a11 * state.mean_x + a12 * state.mean_p
    mp = a21 * state.mean_x + a22 * state.mean_p
    vx, vp, cv = state.var_x, state.var_p, state.cov_xp
    return GaussianState(
        mean_x=mx,
        mean_p=mp,
        var_x=a11 * a11 * vx + a12 * a12 * vp + 2 * a11 * a12 * cv,
        var_p=a21 * a21 * vx + a22 * a22 * vp + 2 * a21 * a22 * cv,
        cov_xp=a11 * a21 * vx + a12 * a22 * vp + (a11 * a22 + a12 * a21) * cv,
    )


def energy(state: GaussianState, params: OscillatorParams) -> float:
    """Mean energy <p^2>/2m + (1/2) m w^2 <x^2>, using raw moments."""
    return state.raw_p2 / (2 * params.mass) + 0.5 * params.mass * params.omega**2 * state.raw_x2


def uncertainty_invariant(state: GaussianState) -> float:
    """Determinant var_x*var_p - cov_xp^2 of the covariance matrix.

    Conserved exactly by `propagate` and by frequency switches; equals
    hbar^2/4 for minimum-uncertainty initial data.
    """
    return state.var_x * state.var_p - state.cov_xp**2


def wavefunction(state: GaussianState, params: OscillatorParams, x) -> np.ndarray:
    """Position-space amplitude of the packet at x (scalar or array).

    The phase carries both the mean momentum and the covariance-induced
    chirp; the time-dependent global phase is not tracked, since no
    observable in this package depends on it.
    """
    x = np.asarray(x, dtype=float)
    d = x - state.mean_x
    hb = params.hbar
    amp = (2 * np.pi * state.var_x) ** (-0.25)
    return amp * np.exp(
        -(d**2) / (4 * state.var_x)
        + 1j * (state.cov_xp * d**2 / (2 * hb * state.var_x) + state.mean_p * d / hb)
    )


def classical_turning_point(energy_value: float, params: OscillatorParams) -> float:
    """Amplitude sqrt(2 E / (m w^2)) where a classical oscillator of energy E reverses."""
    if energy_value < 0:
        raise ParameterError(f"energy must be nonnegative, got {energy_value}")
    return np.sqrt(2 * energy_value / (params.mass * params.omega**2))
