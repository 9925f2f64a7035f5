"""Cavity quadrature dynamics in the Laplace domain.

Solves the 2x2 system

    [ s + gamma                     delta     ] [alpha1]   [sqrt(2 gamma) alpha1_in]
    [ -(delta + xi_ba*delta)      s + gamma   ] [alpha2] = [sqrt(2 gamma) alpha2_in]
                                                           + (omega0*alpha_bar/2) (0,1)^T (h_s + h_in)

with xi_ba*delta = epsilon_q/s^2 - epsilon_gw*s, for transfer coefficients
from the four input channels (alpha1_in, alpha2_in, h_signal, h_in) to the
two intracavity quadratures.  The classical signal h_s and the quantum
fluctuation channel h_in drive the cavity identically, so their columns
are equal at every frequency.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularityError, UnsupportedConfigurationError, ValidationError
from .model import (
    DerivedCouplings,
    SystemParams,
    backaction_combination,
    is_infinite_mass,
)

IN_CHANNELS = ("alpha1_in", "alpha2_in", "h_signal", "h_in")
QUADRATURES = ("alpha1", "alpha2")


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing grid of real angular frequencies [rad/s]."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or pts.size == 0:
            raise ValidationError("grid.points must be a non-empty 1-d array")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("grid.points must all be finite")
        if not np.all(np.diff(pts) > 0):
            raise ValidationError("grid.points must be strictly increasing")

    def require_no_zero(self):
        """Reject grids containing Omega = 0 (free-mass susceptibility pole)."""
        if np.any(self.points == 0.0):
            raise ValidationError("grid contains Omega=0, which is a pole when epsilon_q != 0")

    @classmethod
    def linear(cls, lo: float, hi: float, count: int) -> "FrequencyGrid":
        return cls(np.linspace(lo, hi, count))

    @classmethod
    def logarithmic(cls, lo: float, hi: float, count: int) -> "FrequencyGrid":
        if lo <= 0:
            raise ValidationError("grid.min must be positive for log spacing")
        return cls(np.geomspace(lo, hi, count))

    def __len__(self):
        return self.points.size


@dataclass(frozen=True)
class QuadratureSolution:
    """Transfer coefficients at one Laplace point.

    ``coeffs[i, j]`` maps input channel ``IN_CHANNELS[j]`` to quadrature
    ``QUADRATURES[i]``.
    """

    s: complex
    coeffs: np.ndarray

    def coefficient(self, quadrature: str, channel: str) -> complex:
        return self.coeffs[QUADRATURES.index(quadrature), IN_CHANNELS.index(channel)]


@dataclass(frozen=True)
class ResponsePair:
    chi1: complex
    chi2: complex


def _denominator(s: complex, gamma: float, delta: float, eps_gw: float) -> complex:
    return (s + gamma) ** 2 + delta**2 - eps_gw * delta * s


def chi_responses(s: complex, params: SystemParams, couplings: DerivedCouplings) -> ResponsePair:
    """Detuned response functions chi1 = (s+gamma)/D, chi2 = delta/D.

    D = (s+gamma)^2 + delta^2 - epsilon_gw*delta*s.
    """
    d = _denominator(s, params.gamma, params.delta, couplings.epsilon_gw)
    if d == 0:
        raise SingularityError(f"response denominator vanishes at s = {s!r}")
    return ResponsePair(chi1=(s + params.gamma) / d, chi2=params.delta / d)


def effective_rates(params: SystemParams, couplings: DerivedCouplings) -> tuple[float, float]:
    """Effective damping and detuning shifted by the radiative backaction.

    gamma_eff = gamma - epsilon_gw*delta/2
    delta_eff = delta + epsilon_gw*gamma/2

    Red detuning (delta > 0) reduces the effective damping; blue detuning
    increases it.  These are the linear-order positions of the poles of
    chi1 at -gamma_eff +/- i*delta_eff.
    """
    eps = couplings.epsilon_gw
    return params.gamma - eps * params.delta / 2.0, params.delta + eps * params.gamma / 2.0


def solve_tuned(s: complex, params: SystemParams, couplings: DerivedCouplings) -> QuadratureSolution:
    """Cavity solution for the tuned configuration (delta = 0).

    alpha1 = sqrt(2 gamma)/(s+gamma) alpha1_in
    alpha2 = sqrt(2 gamma)/(s+gamma) alpha2_in
             + (eps_q/s^2 - eps_gw*s) sqrt(2 gamma)/(s+gamma)^2 alpha1_in
             + (omega0 alpha_bar/2)/(s+gamma) (h_s + h_in)

    The 1/(s+gamma) cavity filter multiplies the signal term as required by
    the matrix form of the equations of motion.
    """
    if params.delta != 0.0:
        raise ValidationError(f"solve_tuned requires delta = 0, got system.delta = {params.delta!r}")
    if s == -params.gamma:
        raise SingularityError(f"cavity pole at s = {-params.gamma!r}")
    if s == 0 and couplings.epsilon_q != 0.0:
        raise SingularityError("free-mass pole at s = 0 (epsilon_q != 0)")
    g = params.gamma
    root2g = math.sqrt(2.0 * g)
    filt = 1.0 / (s + g)
    ba = backaction_combination(s, couplings)
    sig = 0.5 * params.omega0 * params.alpha_bar * filt
    coeffs = np.array(
        [
            [root2g * filt, 0.0, 0.0, 0.0],
            [ba * root2g * filt**2, root2g * filt, sig, sig],
        ],
        dtype=complex,
    )
    return QuadratureSolution(s=s, coeffs=coeffs)


def solve_detuned(s: complex, params: SystemParams, couplings: DerivedCouplings) -> QuadratureSolution:
    """Cavity solution for the detuned configuration in the m -> inf limit.

    alpha1 = sqrt(2 gamma) [chi1 alpha1_in - chi2 alpha2_in] - (omega0 alpha_bar/2) chi2 (h_s + h_in)
    alpha2 = sqrt(2 gamma) [(1 - eps_gw*s/delta) chi2 alpha1_in + chi1 alpha2_in]
             + (omega0 alpha_bar/2) chi1 (h_s + h_in)

    Finite mass with delta != 0 has no closed form here and is rejected;
    use solve_general for exploratory work.
    """
    if params.delta == 0.0:
        raise ValidationError("solve_detuned requires delta != 0; use solve_tuned")
    if not is_infinite_mass(params.m):
        raise UnsupportedConfigurationError(
            "detuned configuration with finite mass is unsupported: "
            "set system.m to infinity or use solve_general (experimental)"
        )
    pair = chi_responses(s, params, couplings)
    chi1, chi2 = pair.chi1, pair.chi2
    g = params.gamma
    root2g = math.sqrt(2.0 * g)
    sig = 0.5 * params.omega0 * params.alpha_bar
    factor = 1.0 - couplings.epsilon_gw * s / params.delta
    coeffs = np.array(
        [
            [root2g * chi1, -root2g * chi2, -sig * chi2, -sig * chi2],
            [root2g * factor * chi2, root2g * chi1, sig * chi1, sig * chi1],
        ],
        dtype=complex,
    )
    return QuadratureSolution(s=s, coeffs=coeffs)


def cavity_matrix(s: complex, params: SystemParams, couplings: DerivedCouplings) -> np.ndarray:
    """Laplace-domain system matrix M(s) with M(s) (alpha1, alpha2)^T = drives."""
    ba = backaction_combination(s, couplings)
    return np.array(
        [
            [s + params.gamma, params.delta],
            [-(params.delta + ba), s + params.gamma],
        ],
        dtype=complex,
    )


def solve_general(s: complex, params: SystemParams, couplings: DerivedCouplings) -> QuadratureSolution:
    """Direct 2x2 solve with the full backaction at any detuning and mass.

    Experimental validation path: for finite mass and delta != 0 it
    extrapolates beyond the closed-form solution set, so the dedicated
    solvers should be preferred for production use.
    """
    m = cavity_matrix(s, params, couplings)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det == 0:
        raise SingularityError(f"system matrix singular at s = {s!r}")
    minv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=complex) / det
    root2g = math.sqrt(2.0 * params.gamma)
    sig = 0.5 * params.omega0 * params.alpha_bar
    drive = np.array(
        [
            [root2g, 0.0, 0.0, 0.0],
            [0.0, root2g, sig, sig],
        ],
        dtype=complex,
    )
    return QuadratureSolution(s=s, coeffs=minv @ drive)


def solve_at(s: complex, params: SystemParams, couplings: DerivedCouplings) -> QuadratureSolution:
    """Dispatch to the tuned or detuned solver based on the detuning."""
    if params.is_tuned:
        return solve_tuned(s, params, couplings)
    return solve_detuned(s, params, couplings)


def solve_grid(
    grid: FrequencyGrid, params: SystemParams, couplings: DerivedCouplings
) -> list[QuadratureSolution]:
    """Evaluate the appropriate solver over a real-frequency grid (s = -i Omega).

    Results depend only on the grid point, never on evaluation order.
    """
    if couplings.epsilon_q != 0.0:
        grid.require_no_zero()
    return [solve_at(-1j * w, params, couplings) for w in grid.points]


def stability_poles(params: SystemParams, couplings: DerivedCouplings) -> tuple[complex, complex]:
    """Exact roots of the detuned denominator D(s)."""
    g, d, eps = params.gamma, params.delta, couplings.epsilon_gw
    # D = s^2 + (2g - eps*d) s + (g^2 + d^2)
    b = 2.0 * g - eps * d
    disc = b * b - 4.0 * (g * g + d * d)
    root = cmath.sqrt(disc)
    return (-b + root) / 2.0, (-b - root) / 2.0
