"""Phase-space and number-basis reconstructions of the ensemble state.

A single Gaussian packet has the positive Wigner function

    W(X, P) = exp(-(1/2) d^T Sigma^{-1} d) / (2 pi sqrt(det Sigma)),

with d the displacement from the means and Sigma the 2x2 covariance
matrix.  The ensemble state is an equal-weight mixture, so its Wigner
function, position density matrix and number-basis density matrix are
all plain averages of pure-state contributions; no grid transform is
ever inverted numerically.

The x-coherence observable is the (x1 - x2)^2 moment of the position
density matrix, a direct measure of how much off-diagonal structure
survives.  For one packet it collapses to a closed form in the momentum
marginal f(P) (a normal density with the packet's mean and variance):

    coherence = -2 pi hbar^2 f''(0)
              = 2 pi hbar^2 f(0) (var_p - mean_p^2) / var_p^2,

and the mixture value is the average of the per-packet values.

Number-basis matrix elements are quadratures of the oscillator
eigenfunctions against each packet's wavefunction; the eigenfunctions
come from the recurrence on the *normalized* functions, which stays
bounded where the raw Hermite polynomial recurrence overflows near
n of order 150.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ResolutionError
from .gaussian import GaussianState, OscillatorParams

__all__ = [
    "WignerGrid",
    "FockMatrix",
    "default_axis",
    "wigner_of_state",
    "ensemble_wigner",
    "state_coherence",
    "coherence_x",
    "position_density_matrix",
    "fock_density_matrix",
    "hermite_function",
    "hermite_table",
]

_COVERAGE_SIGMAS = 6.0


def default_axis(extent: float = 12.0, points: int = 241) -> np.ndarray:
    """Default reconstruction axis: symmetric, uniform, 241 points over [-12, 12]."""
    return np.linspace(-extent, extent, points)


@dataclass
class WignerGrid:
    """Wigner values on a rectangular (x, p) grid, plus bookkeeping.

    ``normalization_residual`` is |Riemann sum - 1|; ``coverage_warnings``
    is nonempty when the grid does not reach 6 sigma of the mixture and
    the normalization can therefore not be trusted.
    """

    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray
    normalization_residual: float
    coverage_warnings: tuple = ()


@dataclass
class FockMatrix:
    """Truncated density matrix in the number basis of ``basis_omega``.

    ``leakage`` = 1 - trace is the weight lost to truncation and
    quadrature; the trace and the leakage add to one by construction.
    """

    n_max: int
    values: np.ndarray
    basis_omega: float
    trace: float
    leakage: float

    def diagonal(self) -> np.ndarray:
        return np.real(np.diagonal(self.values)).copy()


def _moments_array(states) -> np.ndarray:
    """Accept a StateSnapshot, an (n, 5) array, or an iterable of GaussianState."""
    moments = getattr(states, "moments", None)
    if moments is not None:
        return np.asarray(moments, dtype=float)
    if isinstance(states, np.ndarray):
        arr = np.asarray(states, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 5:
            raise ParameterError(f"moment array must have shape (n, 5), got {arr.shape}")
        return arr
    arr = np.array(
        [[s.mean_x, s.mean_p, s.var_x, s.var_p, s.cov_xp] for s in states], dtype=float
    )
    if arr.size == 0:
        raise ParameterError("empty state collection")
    return arr


def _mixture_spread(moments):
    """Mean and standard deviation of the mixture in x and p."""
    mx, mp, vx, vp = moments[:, 0], moments[:, 1], moments[:, 2], moments[:, 3]
    mu_x, mu_p = mx.mean(), mp.mean()
    sig_x = np.sqrt(np.mean(vx + mx**2) - mu_x**2)
    sig_p = np.sqrt(np.mean(vp + mp**2) - mu_p**2)
    return mu_x, mu_p, sig_x, sig_p


def _coverage_warnings(x_axis, p_axis, moments) -> tuple:
    mu_x, mu_p, sig_x, sig_p = _mixture_spread(moments)
    warnings = []
    if x_axis[0] > mu_x - _COVERAGE_SIGMAS * sig_x or x_axis[-1] < mu_x + _COVERAGE_SIGMAS * sig_x:
        warnings.append(
            f"x axis [{x_axis[0]:.3g}, {x_axis[-1]:.3g}] covers less than "
            f"{_COVERAGE_SIGMAS:.0f} sigma of the mixture (centre {mu_x:.3g}, sigma {sig_x:.3g})"
        )
    if p_axis[0] > mu_p - _COVERAGE_SIGMAS * sig_p or p_axis[-1] < mu_p + _COVERAGE_SIGMAS * sig_p:
        warnings.append(
            f"p axis [{p_axis[0]:.3g}, {p_axis[-1]:.3g}] covers less than "
            f"{_COVERAGE_SIGMAS:.0f} sigma of the mixture (centre {mu_p:.3g}, sigma {sig_p:.3g})"
        )
    return tuple(warnings)


def _wigner_sum(moments, x_axis, p_axis, chunk: int = 64) -> np.ndarray:
    """Sum of per-state Gaussian Wigner surfaces, chunked over states."""
    total = np.zeros((x_axis.size, p_axis.size))
    dx_grid = x_axis[:, None, None]
    dp_grid = p_axis[None, :, None]
    for lo in range(0, moments.shape[0], chunk):
        part = moments[lo : lo + chunk]
        mx, mp, vx, vp, cv = (part[:, i] for i in range(5))
        det = vx * vp - cv**2
        if np.any(det <= 0):
            raise ParameterError("state with non-positive-definite covariance")
        ax = dx_grid - mx
        ap = dp_grid - mp
        quad = (vp * ax**2 - 2 * cv * ax * ap + vx * ap**2) / det
        total += np.sum(np.exp(-0.5 * quad) / (2 * np.pi * np.sqrt(det)), axis=-1)
    return total


def _grid_result(values, x_axis, p_axis, moments) -> WignerGrid:
    dx = x_axis[1] - x_axis[0]
    dp = p_axis[1] - p_axis[0]
    residual = abs(float(np.sum(values)) * dx * dp - 1.0)
    return WignerGrid(
        x_axis=x_axis,
        p_axis=p_axis,
        values=values,
        normalization_residual=residual,
        coverage_warnings=_coverage_warnings(x_axis, p_axis, moments),
    )


def wigner_of_state(
    state: GaussianState,
    params: OscillatorParams,
    x_axis=None,
    p_axis=None,
) -> WignerGrid:
    """Closed-form Gaussian Wigner function of a single packet."""
    x_axis = default_axis() if x_axis is None else np.asarray(x_axis, dtype=float)
    p_axis = default_axis() if p_axis is None else np.asarray(p_axis, dtype=float)
    moments = _moments_array([state])
    det = state.var_x * state.var_p - state.cov_xp**2
    if det < params.hbar**2 / 4 * (1 - 1e-9):
        raise ParameterError(f"covariance determinant {det} below hbar^2/4")
    return _grid_result(_wigner_sum(moments, x_axis, p_axis), x_axis, p_axis, moments)


def ensemble_wigner(states, x_axis=None, p_axis=None) -> WignerGrid:
    """Equal-weight average of the per-state Wigner functions."""
    x_axis = default_axis() if x_axis is None else np.asarray(x_axis, dtype=float)
    p_axis = default_axis() if p_axis is None else np.asarray(p_axis, dtype=float)
    moments = _moments_array(states)
    values = _wigner_sum(moments, x_axis, p_axis) / moments.shape[0]
    return _grid_result(values, x_axis, p_axis, moments)


def state_coherence(mean_p, var_p, hbar):
    """Closed-form (x1 - x2)^2 coherence moment of one packet; array friendly."""
    f0 = np.exp(-(mean_p**2) / (2 * var_p)) / np.sqrt(2 * np.pi * var_p)
    return 2 * np.pi * hbar**2 * f0 * (var_p - mean_p**2) / var_p**2


def coherence_x(states, hbar: float = 1.0) -> float:
    """Ensemble x-coherence: average of the per-packet closed form."""
    moments = _moments_array(states)
    return float(np.mean(state_coherence(moments[:, 1], moments[:, 3], hbar)))


def _wavefunction_matrix(moments, x_axis, hbar) -> np.ndarray:
    """Row k holds packet k's amplitude on x_axis."""
    mx = moments[:, 0:1]
    mp = moments[:, 1:2]
    vx = moments[:, 2:3]
    cv = moments[:, 4:5]
    d = x_axis[None, :] - mx
    amp = (2 * np.pi * vx) ** (-0.25)
    return amp * np.exp(-(d**2) / (4 * vx) + 1j * (cv * d**2 / (2 * hbar * vx) + mp * d / hbar))


def position_density_matrix(
    states,
    x1_axis,
    x2_axis,
    hbar: float = 1.0,
    chunk: int = 4096,
) -> np.ndarray:
    """rho(x1, x2) as the averaged outer product of packet amplitudes.

    Exact for a mixture of pure states, so it serves as the reference
    the grid-transform oracles are checked against.
    """
    moments = _moments_array(states)
    x1_axis = np.asarray(x1_axis, dtype=float)
    x2_axis = np.asarray(x2_axis, dtype=float)
    rho = np.zeros((x1_axis.size, x2_axis.size), dtype=complex)
    same_axes = x1_axis.shape == x2_axis.shape and np.array_equal(x1_axis, x2_axis)
    for lo in range(0, moments.shape[0], chunk):
        part = moments[lo : lo + chunk]
        v1 = _wavefunction_matrix(part, x1_axis, hbar)
        v2 = v1 if same_axes else _wavefunction_matrix(part, x2_axis, hbar)
        rho += v1.T @ np.conj(v2)
    return rho / moments.shape[0]


def _uniform_spacing(axis) -> float:
    steps = np.diff(axis)
    if axis.size < 2 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise ParameterError("quadrature axis must be uniform with at least two points")
    return float(steps[0])


def _trapezoid_weights(axis) -> np.ndarray:
    dx = _uniform_spacing(axis)
    w = np.full(axis.size, dx)
    w[0] = w[-1] = dx / 2
    return w


def hermite_table(n_max: int, x, basis: OscillatorParams) -> np.ndarray:
    """Oscillator eigenfunctions 0..n_max evaluated on x, shape (n_max+1, len(x)).

    Recurrence on the normalized functions:
        phi_{n+1} = sqrt(2/(n+1)) xi phi_n - sqrt(n/(n+1)) phi_{n-1},
    with xi the position in units of the oscillator length.  All values
    stay of order one inside the classically allowed region, so the
    recurrence is stable well past n = 200.
    """
    if n_max < 0:
        raise ParameterError(f"n_max must be nonnegative, got {n_max}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    scale = np.sqrt(basis.mass * basis.omega / basis.hbar)
    xi = x * scale
    table = np.empty((n_max + 1, x.size))
    table[0] = np.sqrt(scale) * np.pi ** (-0.25) * np.exp(-(xi**2) / 2)
    if n_max >= 1:
        table[1] = np.sqrt(2.0) * xi * table[0]
    for n in range(1, n_max):
        table[n + 1] = np.sqrt(2.0 / (n + 1)) * xi * table[n] - np.sqrt(n / (n + 1)) * table[n - 1]
    return table


def hermite_function(n: int, x, basis: OscillatorParams):
    """Normalized oscillator eigenfunction <x|n> for the given basis."""
    values = hermite_table(n, x, basis)[n]
    return values if np.ndim(x) else float(values[0])


def fock_quadrature_axis(n_max: int, basis: OscillatorParams, reach: float = 0.0) -> np.ndarray:
    """Uniform axis resolving eigenfunction n_max: 12 points per oscillation,
    extended past the n_max turning point and past ``reach``."""
    k_max = np.sqrt((2 * n_max + 1) * basis.mass * basis.omega / basis.hbar)
    turn = np.sqrt((2 * n_max + 1) * basis.hbar / (basis.mass * basis.omega))
    length = np.sqrt(basis.hbar / (basis.mass * basis.omega))
    half = max(turn + 5 * length, reach)
    dx = 2 * np.pi / (12 * k_max)
    n_points = int(np.ceil(2 * half / dx)) + 1
    return np.linspace(-half, half, n_points)


def _check_resolution(axis, n_max, basis):
    dx = _uniform_spacing(axis)
    k_max = np.sqrt((2 * n_max + 1) * basis.mass * basis.omega / basis.hbar)
    if dx > 2 * np.pi / (10 * k_max):
        raise ResolutionError(
            f"axis spacing {dx:.4g} under-resolves eigenfunction {n_max} "
            f"(needs <= {2 * np.pi / (10 * k_max):.4g} for 10 points per oscillation)"
        )


def fock_density_matrix(
    states,
    basis: OscillatorParams,
    n_max: int,
    x_axis=None,
    chunk: int = 4096,
) -> FockMatrix:
    """Density matrix <n1|rho|n2> in the number basis of ``basis``.

    Each packet's amplitudes <n|psi_k> come from one trapezoid
    quadrature row; the matrix is the averaged outer product of those
    amplitude vectors, which is the same double position quadrature as
    acting on rho(x1, x2) directly, factorized per pure state.
    """
    if n_max < 0:
        raise ParameterError(f"n_max must be nonnegative, got {n_max}")
    moments = _moments_array(states)
    if x_axis is None:
        mu_x, _, sig_x, _ = _mixture_spread(moments)
        x_axis = fock_quadrature_axis(n_max, basis, reach=abs(mu_x) + 8 * sig_x)
    else:
        x_axis = np.asarray(x_axis, dtype=float)
    _check_resolution(x_axis, n_max, basis)
    weights = _trapezoid_weights(x_axis)
    eigen = hermite_table(n_max, x_axis, basis) * weights

    values = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for lo in range(0, moments.shape[0], chunk):
        part = moments[lo : lo + chunk]
        amplitudes = _wavefunction_matrix(part, x_axis, basis.hbar) @ eigen.T
        values += amplitudes.T @ np.conj(amplitudes)
    values /= moments.shape[0]
    trace = float(np.real(np.trace(values)))
    return FockMatrix(
        n_max=n_max,
        values=values,
        basis_omega=basis.omega,
        trace=trace,
        leakage=1.0 - trace,
    )
