"""Radiation-reaction picture of the backaction and its equivalence check.

In the tidal-force picture the wave field never couples to the light
directly; instead the mirror's response to radiation pressure acquires a
radiation-reaction correction,

    q(Omega) = [chi0 + delta_chi] (omega0 alpha_bar / L) alpha1(Omega),
    chi0 = -1/(m Omega^2),      delta_chi = +i (8G/15c^5) L^2 Omega.

delta_chi is independent of the mass: the inertial mass in chi0 cancels
the gravitational mass in the reaction force.  Substituting q into the
optical equations reproduces, term by term, the direct-coupling cavity
response: (omega0 alpha_bar / L)^2 chi0 = epsilon_q / s^2 and
(omega0 alpha_bar / L)^2 delta_chi = -epsilon_gw * s at s = -i Omega.
This module builds the cavity solution that way and certifies the
equivalence numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularityError, ValidationError
from .freq_response import (
    FrequencyGrid,
    QuadratureSolution,
    solve_at,
)
from .io_noise import input_output
from .model import (
    DerivedCouplings,
    PhysicalConstants,
    SystemParams,
    derive_couplings,
    is_infinite_mass,
)


@dataclass(frozen=True)
class MassSusceptibility:
    chi0: complex
    delta_chi: complex


def radiation_reaction_coefficient(m: float, L: float, consts: PhysicalConstants | None = None) -> float:
    """Coefficient of the fifth time derivative in the reaction force: (8G/15c^5) m L^2."""
    if consts is None:
        consts = PhysicalConstants()
    if is_infinite_mass(m):
        raise ValidationError("radiation_reaction_coefficient requires finite m")
    if m <= 0 or L <= 0:
        raise ValidationError("m and L must be positive")
    return 8.0 * consts.G / (15.0 * consts.c**5) * m * L**2


def mass_susceptibility(
    omega: float, m: float, L: float, consts: PhysicalConstants | None = None
) -> MassSusceptibility:
    """Free-mass response and its radiation-reaction correction at omega.

    chi0 = -1/(m Omega^2); zero in the infinite-mass limit.
    delta_chi = +i (8G/15c^5) L^2 Omega, computed in the simplified
    mass-cancelled form so it is bitwise identical for every m.
    """
    if consts is None:
        consts = PhysicalConstants()
    if omega == 0.0:
        raise SingularityError("free-mass susceptibility diverges at Omega = 0")
    chi0 = 0.0 if is_infinite_mass(m) else -1.0 / (m * omega * omega)
    delta_chi = 1j * 8.0 * consts.G / (15.0 * consts.c**5) * L**2 * omega
    return MassSusceptibility(chi0=chi0, delta_chi=delta_chi)


def newtonian_cavity_solution(
    omega: float,
    params: SystemParams,
    consts: PhysicalConstants | None = None,
    include_reaction: bool = True,
) -> QuadratureSolution:
    """Cavity transfer coefficients built from the corrected mass response.

    The optical equations with the mirror eliminated read

        (gamma - i Omega) alpha1 = -Delta alpha2 + sqrt(2 gamma) alpha1_in
        (gamma - i Omega) alpha2 = +Delta alpha1 + B(Omega) alpha1 + sqrt(2 gamma) alpha2_in

    with B = (omega0 alpha_bar / L)^2 (chi0 + delta_chi).  The wave input
    channel is absent in this picture, so the h columns are zero.
    """
    if consts is None:
        consts = PhysicalConstants()
    sus = mass_susceptibility(omega, params.m, params.L, consts)
    chi = sus.chi0 + (sus.delta_chi if include_reaction else 0.0)
    b = (params.omega0 * params.alpha_bar / params.L) ** 2 * chi
    s = -1j * omega
    m = np.array(
        [
            [s + params.gamma, params.delta],
            [-(params.delta + b), s + params.gamma],
        ],
        dtype=complex,
    )
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det == 0:
        raise SingularityError(f"optical system singular at Omega = {omega!r}")
    minv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=complex) / det
    root2g = math.sqrt(2.0 * params.gamma)
    coeffs = np.zeros((2, 4), dtype=complex)
    coeffs[:, :2] = root2g * minv
    return QuadratureSolution(s=s, coeffs=coeffs)


@dataclass(frozen=True)
class GaugeReport:
    """Per-frequency relative deviation between the two pictures."""

    omegas: np.ndarray
    deviations: np.ndarray
    max_deviation: float
    configuration: str

    def to_dict(self) -> dict:
        return {
            "configuration": self.configuration,
            "max_deviation": self.max_deviation,
            "omega": [float(w) for w in self.omegas],
            "deviation": [float(d) for d in self.deviations],
        }


def compare_gauges(
    grid: FrequencyGrid,
    params: SystemParams,
    couplings: DerivedCouplings | None = None,
    consts: PhysicalConstants | None = None,
) -> GaugeReport:
    """Compare output transfer coefficients of the two pictures over a grid.

    Only the optical 2x2 block enters: the direct-coupling picture carries
    the wave input channel explicitly while the tidal-force picture
    suppresses it, so the comparison is between backaction-dressed optical
    transfer functions.  Deviations are relative, per coefficient, maxed
    over the block.
    """
    if consts is None:
        consts = PhysicalConstants()
    if couplings is None:
        couplings = derive_couplings(params, consts)
    grid.require_no_zero()
    devs = np.empty(len(grid))
    for i, w in enumerate(grid.points):
        tt = input_output(solve_at(-1j * w, params, couplings), params).coeffs[:, :2]
        nt = input_output(newtonian_cavity_solution(w, params, consts), params).coeffs[:, :2]
        scale = np.maximum(np.maximum(np.abs(tt), np.abs(nt)), 1e-300)
        devs[i] = float(np.max(np.abs(tt - nt) / scale))
    config = "tuned" if params.is_tuned else "detuned"
    return GaugeReport(
        omegas=grid.points.copy(),
        deviations=devs,
        max_deviation=float(np.max(devs)),
        configuration=config,
    )
