"""Output-field relations, backaction kernels, squeeze parameters, spectra.

The reflection map is alpha_out = alpha_in - sqrt(2 gamma) alpha_cav.  In
the tuned configuration the optical block reduces to

    alpha1_out = e^{2 i beta} alpha1_in
    alpha2_out = e^{2 i beta} [alpha2_in - (K_pd + i K_gw) alpha1_in]
                 - sqrt(gamma/2) omega0 alpha_bar (h_s + h_in)/(s + gamma)

with beta = arctan(Omega/gamma) + pi/2 and the two backaction kernels

    K_pd(Omega) = (1/m)(omega0 alpha_bar / L)^2 * 2 gamma / (Omega^2 (gamma^2 + Omega^2))
    K_gw(Omega) = -2 Omega gamma epsilon_gw / (gamma^2 + Omega^2).

K_gw is negative at positive frequencies: the sign follows from the same
canonical convention as the backaction term in the cavity equations, and
is what the field fluctuation channel needs in order to close the output
commutator algebra.  Vacuum optical inputs carry symmetrized spectral
density hbar/2 per quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularityError, ValidationError
from .freq_response import IN_CHANNELS, FrequencyGrid, QuadratureSolution
from .gw_field import HInputChannel
from .model import DerivedCouplings, PhysicalConstants, SystemParams, is_infinite_mass


@dataclass(frozen=True)
class OutputRelation:
    """Tuned-configuration output coefficients at one real frequency."""

    omega: float
    beta: float
    K_pd: float
    K_gw: float
    gw_noise_coeff: complex
    h_in_spectrum: float  # symmetrized spectral density of the h_in channel


@dataclass(frozen=True)
class NoiseEllipse:
    """Squeeze factor r (nepers), rotation angle theta, squeeze angle phi."""

    r: float
    theta: float
    phi: float


@dataclass(frozen=True)
class SpectrumSeries:
    grid: FrequencyGrid
    values: np.ndarray


def input_output(sol: QuadratureSolution, params: SystemParams) -> QuadratureSolution:
    """Reflection map applied to an intracavity solution.

    Optical input channels pick up the direct reflection term; the field
    channels only appear through the cavity.
    """
    root2g = math.sqrt(2.0 * params.gamma)
    out = -root2g * sol.coeffs.copy()
    out[0, IN_CHANNELS.index("alpha1_in")] += 1.0
    out[1, IN_CHANNELS.index("alpha2_in")] += 1.0
    return QuadratureSolution(s=sol.s, coeffs=out)


def backaction_kernels(
    omega: float, params: SystemParams, couplings: DerivedCouplings
) -> tuple[float, float]:
    """(K_pd, K_gw) at real frequency omega."""
    g = params.gamma
    lorentz = g * g + omega * omega
    if is_infinite_mass(params.m):
        k_pd = 0.0
    else:
        if omega == 0.0:
            raise SingularityError("K_pd diverges at Omega = 0 for finite mass")
        k_pd = (
            (params.omega0 * params.alpha_bar / params.L) ** 2
            / params.m
            * 2.0
            * g
            / (omega * omega * lorentz)
        )
    k_gw = -2.0 * omega * g * couplings.epsilon_gw / lorentz
    return k_pd, k_gw


def reflection_phase(omega: float, gamma: float) -> float:
    """beta = arctan(Omega/gamma) + pi/2."""
    return math.atan2(omega, gamma) + math.pi / 2.0


def output_relation(
    omega: float,
    params: SystemParams,
    couplings: DerivedCouplings,
    h_channel: HInputChannel | None = None,
    consts: PhysicalConstants | None = None,
) -> OutputRelation:
    """Assemble the tuned output coefficients at one frequency."""
    if params.delta != 0.0:
        raise ValidationError("output_relation applies to the tuned configuration (delta = 0)")
    if consts is None:
        consts = PhysicalConstants()
    if h_channel is None:
        h_channel = HInputChannel(params=params, consts=consts)
    k_pd, k_gw = backaction_kernels(omega, params, couplings)
    s = -1j * omega
    gw_coeff = -math.sqrt(params.gamma / 2.0) * params.omega0 * params.alpha_bar / (s + params.gamma)
    return OutputRelation(
        omega=omega,
        beta=reflection_phase(omega, params.gamma),
        K_pd=k_pd,
        K_gw=k_gw,
        gw_noise_coeff=gw_coeff,
        h_in_spectrum=h_channel.spectral_density(omega),
    )


def squeeze_params(k_pd: float) -> NoiseEllipse:
    """Noise-ellipse parameters of the ponderomotive output transformation.

    r = arcsinh(K_pd/2), theta = arctan(K_pd/2), phi = arccot(K_pd/2)/2.
    phi is the angle of the squeezed quadrature measured from alpha1.
    """
    if k_pd < 0:
        raise ValidationError(f"K_pd must be >= 0, got {k_pd!r}")
    half = 0.5 * k_pd
    return NoiseEllipse(
        r=math.asinh(half),
        theta=math.atan(half),
        phi=0.5 * (math.pi / 2.0 - math.atan(half)),
    )


def ellipse_covariance(ellipse: NoiseEllipse, hbar: float) -> np.ndarray:
    """Covariance matrix reconstructed from the noise-ellipse parameters.

    (hbar/2) R(phi) diag(e^{-2r}, e^{+2r}) R(phi)^T; the first principal
    axis (squeezed) sits at angle phi from the alpha1 axis.
    """
    c, s = math.cos(ellipse.phi), math.sin(ellipse.phi)
    rot = np.array([[c, -s], [s, c]])
    return 0.5 * hbar * rot @ np.diag([math.exp(-2 * ellipse.r), math.exp(2 * ellipse.r)]) @ rot.T


def output_covariance(rel: OutputRelation, hbar: float, include_gw: bool = False) -> np.ndarray:
    """Symmetrized 2x2 output covariance from the tuned output relation.

    With include_gw=False only the optical vacuum inputs contribute; the
    K_gw cross term is imaginary and drops from the symmetrized optical
    covariance, so the optical part depends on K_pd alone.
    """
    k = rel.K_pd
    cov = 0.5 * hbar * np.array([[1.0, -k], [-k, 1.0 + k * k + rel.K_gw**2]])
    if include_gw:
        cov[1, 1] += abs(rel.gw_noise_coeff) ** 2 * rel.h_in_spectrum
    return cov


def output_spectrum(
    relations: list[OutputRelation],
    homodyne_angle: float,
    hbar: float,
    include_gw: bool = True,
) -> SpectrumSeries:
    """Homodyne spectral density S_zeta(Omega) over a grid of output relations.

    zeta = 0 reads alpha1_out, zeta = pi/2 reads alpha2_out.  Spectra are
    double-sided and symmetrized; vacuum optical inputs contribute hbar/2
    per quadrature and the field fluctuation channel contributes
    |sin(zeta) gw_noise_coeff|^2 S_hin.
    """
    cz, sz = math.cos(homodyne_angle), math.sin(homodyne_angle)
    omegas = np.array([rel.omega for rel in relations])
    vals = np.empty(len(relations))
    for i, rel in enumerate(relations):
        c1 = cz - sz * (rel.K_pd + 1j * rel.K_gw)  # alpha1_in coefficient, modulo e^{2 i beta}
        c2 = sz
        s_opt = 0.5 * hbar * (abs(c1) ** 2 + c2 * c2)
        s_gw = (sz * abs(rel.gw_noise_coeff)) ** 2 * rel.h_in_spectrum if include_gw else 0.0
        vals[i] = s_opt + s_gw
    return SpectrumSeries(grid=FrequencyGrid(omegas), values=vals)


def alpha1_spectrum(sol: QuadratureSolution, hbar: float, h_in_spectrum: float = 0.0) -> float:
    """Symmetrized spectral density of the intracavity amplitude quadrature."""
    c = sol.coeffs[0]
    s_opt = 0.5 * hbar * (abs(c[0]) ** 2 + abs(c[1]) ** 2)
    return s_opt + abs(c[3]) ** 2 * h_in_spectrum


def qcrb_bound(omega: float, params: SystemParams, s_alpha1: float, hbar: float) -> float:
    """Minimum spectral density of the strain-estimation error.

    hbar^2 / ((omega0 alpha_bar)^2 S_alpha1(Omega)).
    """
    if s_alpha1 <= 0:
        raise ValidationError(f"S_alpha1 must be positive, got {s_alpha1!r}")
    return hbar**2 / ((params.omega0 * params.alpha_bar) ** 2 * s_alpha1)
