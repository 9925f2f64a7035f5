"""Physical constants, system parameters, and derived coupling strengths.

Every solver in the package is built from the three values computed here:
the test-mass backaction strength ``epsilon_q``, the radiative backaction
strength ``epsilon_gw``, and the field mass normalization ``M_G``.

Conventions used throughout the package:

* Quadrature normalization ``[alpha1, alpha2] = i*hbar``.  Vacuum input
  quadratures are white with symmetrized double-sided spectral density
  ``hbar/2`` per quadrature.
* All frequency-domain work uses the one-sided Laplace transform
  ``O(s) = int_0^inf dt O(t) exp(-s t)``; real-frequency results are read
  off on the imaginary axis via ``s = -i*Omega``.
* ``m = math.inf`` is a first-class sentinel for the infinite-mass limit;
  solvers branch on it instead of accepting a huge float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import SingularityError, ValidationError

INFINITE_MASS = math.inf


def is_infinite_mass(m: float) -> bool:
    return math.isinf(m)


def s_of_omega(omega: float) -> complex:
    """Laplace variable on the imaginary axis for real angular frequency."""
    return -1j * omega


@dataclass(frozen=True)
class PhysicalConstants:
    """Fundamental constants (SI by default, overridable for test units).

    G      gravitational constant [m^3 kg^-1 s^-2]
    c      speed of light [m/s]
    hbar   reduced Planck constant [J s]
    """

    G: float = 6.67430e-11
    c: float = 299792458.0
    hbar: float = 1.054571817e-34

    def __post_init__(self):
        for name in ("G", "c", "hbar"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"constants.{name} must be finite and positive, got {value!r}")


@dataclass(frozen=True)
class SystemParams:
    """Cavity and test-mass configuration.

    omega0     cavity resonance [rad/s]
    alpha_bar  mean amplitude-quadrature value; alpha_bar**2 carries the
               units of hbar (action), so omega0*alpha_bar**2 is an energy
    gamma      cavity half-bandwidth [1/s]
    delta      detuning of the drive from resonance [rad/s], signed
    m          end-mirror mass [kg]; may be INFINITE_MASS
    L          cavity length [m]
    """

    omega0: float
    alpha_bar: float
    gamma: float
    delta: float = 0.0
    m: float = INFINITE_MASS
    L: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and self.omega0 > 0):
            raise ValidationError(f"system.omega0 must be finite and positive, got {self.omega0!r}")
        if not (math.isfinite(self.alpha_bar) and self.alpha_bar >= 0):
            raise ValidationError(f"system.alpha_bar must be finite and >= 0, got {self.alpha_bar!r}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValidationError(f"system.gamma must be finite and positive, got {self.gamma!r}")
        if not math.isfinite(self.delta):
            raise ValidationError(f"system.delta must be finite, got {self.delta!r}")
        if not (self.m > 0):
            raise ValidationError(f"system.m must be positive (math.inf allowed), got {self.m!r}")
        if math.isnan(self.m):
            raise ValidationError("system.m must not be NaN")
        if not (math.isfinite(self.L) and self.L > 0):
            raise ValidationError(f"system.L must be finite and positive, got {self.L!r}")

    @property
    def is_tuned(self) -> bool:
        return self.delta == 0.0


@dataclass(frozen=True)
class DerivedCouplings:
    """Coupling constants derived from a SystemParams/PhysicalConstants pair.

    epsilon_q   test-mass (ponderomotive) backaction strength [s^-3];
                zero in the infinite-mass limit
    epsilon_gw  radiative backaction strength [s^-1]
    M_G         field mass normalization c^2/(32 pi G)
    """

    epsilon_q: float
    epsilon_gw: float
    M_G: float


def derive_couplings(params: SystemParams, consts: PhysicalConstants | None = None) -> DerivedCouplings:
    """Compute the backaction couplings.

    epsilon_q  = (omega0*alpha_bar)^2 / (m L^2)
    epsilon_gw = (8 G / 15 c^5) (omega0*alpha_bar)^2
    M_G        = c^2 / (32 pi G)
    """
    if consts is None:
        consts = PhysicalConstants()
    drive = (params.omega0 * params.alpha_bar) ** 2
    if is_infinite_mass(params.m):
        eps_q = 0.0
    else:
        eps_q = drive / (params.m * params.L**2)
    eps_gw = 8.0 * consts.G / (15.0 * consts.c**5) * drive
    m_g = consts.c**2 / (32.0 * math.pi * consts.G)
    return DerivedCouplings(epsilon_q=eps_q, epsilon_gw=eps_gw, M_G=m_g)


def xi_backaction(s: complex, params: SystemParams, couplings: DerivedCouplings) -> complex:
    """Backaction modification of the phase-quadrature response, per unit detuning.

    Returns (1/Delta) * (epsilon_q / s^2 - epsilon_gw * s).

    The test-mass term and the radiative term enter with opposite signs.
    The relative sign is fixed by the canonical structure of the coupled
    Heisenberg equations: it is the unique choice for which the equal-time
    quadrature commutator is restored to i*hbar once the field's vacuum
    fluctuation channel is included, and for which the Newtonian-picture
    radiation-reaction susceptibility reproduces the same response.
    """
    if s == 0:
        raise SingularityError("xi_backaction has a pole at s = 0 (free-mass response)")
    if params.delta == 0.0:
        raise ValidationError(
            "system.delta is zero: xi_backaction carries a 1/delta prefactor; "
            "use the tuned solver, which works with the delta-free combination"
        )
    return (couplings.epsilon_q / s**2 - couplings.epsilon_gw * s) / params.delta


def backaction_combination(s: complex, couplings: DerivedCouplings) -> complex:
    """The delta-free combination epsilon_q/s^2 - epsilon_gw*s.

    This is xi_backaction * delta, valid also at delta = 0.
    """
    if s == 0 and couplings.epsilon_q != 0.0:
        raise SingularityError("backaction combination has a pole at s = 0 for finite mass")
    if couplings.epsilon_q == 0.0:
        return -couplings.epsilon_gw * s
    return couplings.epsilon_q / s**2 - couplings.epsilon_gw * s
