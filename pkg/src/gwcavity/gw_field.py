"""Polarization tensors, TT projection, mode profile, field fluctuations, radiation.

The cavity couples to the xx component of the transverse-traceless field,
weighted per wavevector by a mode profile that encodes the field's
variation over the cavity length.  This module provides:

* a deterministic polarization basis and the two TT projectors;
* the mode profile and its long-wavelength behaviour;
* the vacuum fluctuation channel of the cavity-averaged field (two-point
  commutator, closed form and quadrature routes, and symmetrized spectrum);
* the radiated field, both as the exact wavevector integral with an
  outgoing-wave pole prescription and as the far-zone closed form.

All wavevector integrals reduce, after the polarization sum, to the
angular weight

    A(kappa) = (2 pi)^-3 * Integral dOmega_k (1/2)(1 - khat_x^2)^2 W(kappa * khat_x)

with W(x) = |sin(x/2)/(x/2)|^2 the mode-profile modulus squared and
kappa = k L.  A has the closed form  A = B/(2 pi^2 kappa^2)  with

    B(kappa) = kappa Si(kappa) - 8/3 + cos kappa + sin(kappa)/kappa
               - 2 cos(kappa)/kappa^2 + 2 sin(kappa)/kappa^3.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import sici

from .errors import IntegrationFailureError, ValidationError
from .model import DerivedCouplings, PhysicalConstants, SystemParams

# a TensorField3 value is a complex (or real) 3x3 symmetric ndarray
EXX = np.zeros((3, 3))
EXX[0, 0] = 1.0


@dataclass(frozen=True)
class WaveVector:
    k: np.ndarray
    omega_k: float

    @classmethod
    def from_k(cls, k, c: float) -> "WaveVector":
        kv = np.asarray(k, dtype=float)
        return cls(k=kv, omega_k=c * float(np.linalg.norm(kv)))


@dataclass(frozen=True)
class PolarizationPair:
    tau_plus: np.ndarray
    tau_cross: np.ndarray


@dataclass(frozen=True)
class ModeProfile:
    """The xx components of the per-wavevector coupling weights."""

    j_plus: complex
    j_cross: complex


def transverse_frame(n_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal pair spanning the plane transverse to n_hat.

    Gram-Schmidt against the coordinate axis with the smallest |n_hat|
    component (lowest index on ties).
    """
    n = np.asarray(n_hat, dtype=float)
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(n)))] = 1.0
    e1 = axis - np.dot(axis, n) * n
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return e1, e2


def polarization_basis(k_hat) -> PolarizationPair:
    """Plus/cross unit tensors for propagation direction k_hat.

    tau_plus  = (e1 e1 - e2 e2)/sqrt(2)
    tau_cross = (e1 e2 + e2 e1)/sqrt(2)

    Both are symmetric, trace free, transverse to k_hat, and orthonormal
    under the double contraction tau^a : tau^b = delta_ab; their sum of
    outer squares is the TT projector.
    """
    n = np.asarray(k_hat, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0:
        raise ValidationError("polarization_basis requires a nonzero direction")
    if abs(norm - 1.0) > 1e-12:
        raise ValidationError(f"k_hat must be a unit vector, |k_hat| = {norm!r}")
    e1, e2 = transverse_frame(n)
    tau_plus = (np.outer(e1, e1) - np.outer(e2, e2)) / math.sqrt(2.0)
    tau_cross = (np.outer(e1, e2) + np.outer(e2, e1)) / math.sqrt(2.0)
    return PolarizationPair(tau_plus=tau_plus, tau_cross=tau_cross)


def long_wave_prefactor(x: float) -> complex:
    """-i (e^{ix} - 1)/x, continued through x = 0 with value 1.

    Evaluated in the cancellation-free half-angle form
    sinc(x/2) e^{i x/2}; the modulus is |sin(x/2)/(x/2)| with zeros at
    x = 2 pi n, n != 0.
    """
    if x == 0.0:
        return 1.0 + 0.0j
    half = 0.5 * x
    return math.sin(half) / half * np.exp(1j * half)


def mode_profile(wavevector: WaveVector, L: float) -> ModeProfile:
    """Coupling weights J_lambda = prefactor(k_x L) tau^lambda_xx / (2 pi)^{3/2}."""
    if L <= 0:
        raise ValidationError(f"L must be positive, got {L!r}")
    kv = wavevector.k
    knorm = np.linalg.norm(kv)
    if knorm == 0:
        raise ValidationError("mode_profile requires a nonzero wavevector")
    pref = long_wave_prefactor(float(kv[0]) * L) / (2.0 * math.pi) ** 1.5
    pair = polarization_basis(kv / knorm)
    return ModeProfile(j_plus=pref * pair.tau_plus[0, 0], j_cross=pref * pair.tau_cross[0, 0])


def tt_project_planewave(f: np.ndarray, k_hat) -> np.ndarray:
    """TT part of a symmetric tensor with respect to one plane-wave direction.

    P f P - (1/2) P Tr(P f), with P = 1 - k_hat k_hat.
    """
    n = np.asarray(k_hat, dtype=float)
    p = np.eye(3) - np.outer(n, n)
    pf = p @ f
    return p @ f @ p - 0.5 * p * np.trace(pf)


def tt_project_radial(f: np.ndarray, x_hat) -> np.ndarray:
    """TT projection for radially travelling waves; same algebra with k_hat -> x_hat."""
    return tt_project_planewave(f, x_hat)


# ---------------------------------------------------------------------------
# angular weight of the polarization-summed, profile-weighted k integrals
# ---------------------------------------------------------------------------


def angular_weight(kappa):
    """A(kappa) defined in the module docstring; closed form via Si.

    A(0) = 2/(15 pi^2); A(kappa) ~ 1/(4 pi kappa) for large kappa.
    """
    k = np.asarray(kappa, dtype=float)
    scalar = k.ndim == 0
    k = np.atleast_1d(k)
    if np.any(k < 0):
        raise ValidationError("angular_weight requires kappa >= 0")
    out = np.empty_like(k)
    small = k < 0.2
    ks = k[small]
    out[small] = (4.0 / 15.0 - ks**2 / 315.0 + ks**4 / 28350.0) / (2.0 * math.pi**2)
    kl = k[~small]
    if kl.size:
        si, _ = sici(kl)
        b = (
            kl * si
            - 8.0 / 3.0
            + np.cos(kl)
            + np.sin(kl) / kl
            - 2.0 * np.cos(kl) / kl**2
            + 2.0 * np.sin(kl) / kl**3
        )
        out[~small] = b / (2.0 * math.pi**2 * kl**2)
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# vacuum fluctuation channel of the cavity-averaged field
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HInputChannel:
    """Spectral and commutator descriptor of the input fluctuation channel.

    The channel is the free field's xx component averaged over the cavity
    axis.  Its two-point commutator is

        [h_in(t), h_in(t')] = (i hbar / M_G) * K(t' - t),

        K(u) = sum_pol Integral d^3k |J(k)|^2 sin(omega_k u)/omega_k.

    K is odd, vanishes at u = 0, and is supported on |u| <= L/c (the
    light-crossing window of the averaging region); inside the window

        K(u) = sign(u)/(4 pi c L^2) * (1/w + 2 w - w^3/3 - 8/3),  w = c|u|/L.

    The first moment Integral_0^inf u K(u) du = 1/(15 pi c^3) ties the
    channel normalization to the radiative backaction strength.
    """

    params: SystemParams
    consts: PhysicalConstants
    M_G: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "M_G", self.consts.c**2 / (32.0 * math.pi * self.consts.G))

    @property
    def support(self) -> float:
        return self.params.L / self.consts.c

    def kernel(self, u: float) -> float:
        """Closed-form K(u)."""
        c, L = self.consts.c, self.params.L
        if u == 0.0:
            return 0.0
        w = c * abs(u) / L
        if w >= 1.0:
            return 0.0
        val = (1.0 / w + 2.0 * w - w**3 / 3.0 - 8.0 / 3.0) / (4.0 * math.pi * c * L**2)
        return math.copysign(val, u)

    def kernel_quadrature(self, u: float, rtol: float = 1e-6, levels: int = 5) -> float:
        """K(u) by damped radial quadrature with Richardson extrapolation.

        Integrates rho(k) e^{-eta k} against the sin(c k u) Fourier weight
        for a decreasing ladder of ``levels`` dampings eta and extrapolates
        eta -> 0.  Independent route used to validate the closed form.
        """
        if u == 0.0:
            return 0.0
        if levels < 3:
            raise ValidationError("kernel_quadrature needs at least 3 damping levels")
        c, L = self.consts.c, self.params.L
        sign = 1.0 if u > 0 else -1.0
        uu = abs(u)

        def damped(eta):
            def amplitude(k):
                return k * angular_weight(k * L) / c * math.exp(-eta * k)

            with warnings.catch_warnings():
                warnings.simplefilter("ignore", IntegrationWarning)
                val, err = quad(
                    amplitude, 0.0, np.inf, weight="sin", wvar=c * uu,
                    limit=600, limlst=120, epsabs=1e-14,
                )
            return val, err

        vals = []
        for p in range(levels):
            v, _ = damped(L / 100.0 / 2**p)
            if not math.isfinite(v):
                raise IntegrationFailureError(
                    "fluctuation-channel kernel quadrature returned a non-finite value",
                    achieved=math.inf,
                    requested=rtol,
                )
            vals.append(v)
        # Richardson ladder in the damping; convergence is judged from the
        # change of the shallow-edge extrapolant between successive orders
        # (the library error estimates of the Fourier quadrature are not
        # trustworthy when its acceleration table stalls)
        ladder = vals[:]
        shallow_history = [ladder[0]]
        for order in range(1, levels):
            ladder = [
                (2**order * ladder[i + 1] - ladder[i]) / (2**order - 1)
                for i in range(len(ladder) - 1)
            ]
            shallow_history.append(ladder[0])
        result = ladder[0]
        scale = max(abs(result), 1e-3 / (4.0 * math.pi * c * L**2))
        achieved = abs(shallow_history[-1] - shallow_history[-2]) / scale
        if achieved > rtol:
            raise IntegrationFailureError(
                "fluctuation-channel kernel quadrature did not converge",
                achieved=achieved,
                requested=rtol,
            )
        return sign * result

    def commutator(self, t: float, t_prime: float):
        """[h_in(t), h_in(t')] as a c-number, equal to (i hbar / M_G) K(t' - t)."""
        return 1j * self.consts.hbar / self.M_G * self.kernel(t_prime - t)

    def spectral_density(self, omega: float) -> float:
        """Symmetrized double-sided vacuum spectral density of h_in.

        S(Omega) = (pi hbar |Omega| / (2 M_G c^3)) * A(|Omega| L / c);
        even in Omega, zero at Omega = 0.
        """
        w = abs(omega)
        if w == 0.0:
            return 0.0
        c = self.consts.c
        return math.pi * self.consts.hbar * w / (2.0 * self.M_G * c**3) * float(
            angular_weight(w * self.params.L / c)
        )

    def first_moment(self) -> float:
        """Integral_0^inf u K(u) du, exactly 1/(15 pi c^3)."""
        return 1.0 / (15.0 * math.pi * self.consts.c**3)


def h_input_channel(params: SystemParams, consts: PhysicalConstants | None = None) -> HInputChannel:
    if consts is None:
        consts = PhysicalConstants()
    return HInputChannel(params=params, consts=consts)


# ---------------------------------------------------------------------------
# radiated field
# ---------------------------------------------------------------------------

# half-range moments m_n(z) = (1/2) Integral_{-1}^{1} u^n e^{i z u} du


def _half_moment_series(n: int, z: float) -> complex:
    total = 0.0 + 0.0j
    term = 1.0 + 0.0j  # (iz)^p / p!
    for p in range(0, 60):
        if (p + n) % 2 == 0:
            total += term / (n + p + 1)
        term *= 1j * z / (p + 1)
        if abs(term) < 1e-18 and p > n:
            break
    return total


def half_moments(nmax: int, z: float) -> np.ndarray:
    """m_0(z) .. m_nmax(z).

    Series for small |z|, otherwise the stable forward recursion
    m_n = boundary_n(z) + (n i / z) m_{n-1}.
    """
    if abs(z) < 4.0:
        return np.array([_half_moment_series(n, z) for n in range(nmax + 1)])
    out = np.empty(nmax + 1, dtype=complex)
    eiz = np.exp(1j * z)
    out[0] = eiz.imag / z  # sin z / z
    for n in range(1, nmax + 1):
        if n % 2 == 0:
            boundary = eiz.imag / z
        else:
            boundary = -1j * eiz.real / z
        out[n] = boundary + (n * 1j / z) * out[n - 1]
    return out


def _half_moment_sincos_coeffs(nmax: int):
    """Represent m_n(z) = sum_j [C[n][j] cos z + S[n][j] sin z] / z^{j+1}.

    Exact complex coefficient tables built from the recursion; used to
    integrate the oscillatory radial tails with Fourier-weight quadrature.
    """
    cos_c = [np.zeros(nmax + 2, dtype=complex) for _ in range(nmax + 1)]
    sin_c = [np.zeros(nmax + 2, dtype=complex) for _ in range(nmax + 1)]
    sin_c[0][0] = 1.0  # m_0 = sin z / z
    for n in range(1, nmax + 1):
        if n % 2 == 0:
            sin_c[n][0] += 1.0
        else:
            cos_c[n][0] += -1j
        # + (n i / z) m_{n-1}: shift the 1/z powers up by one
        cos_c[n][1:] += n * 1j * cos_c[n - 1][:-1]
        sin_c[n][1:] += n * 1j * sin_c[n - 1][:-1]
    return cos_c, sin_c


_MOMENT_COS, _MOMENT_SIN = _half_moment_sincos_coeffs(4)


def _angular_poly_coeffs(x_hat: np.ndarray) -> np.ndarray:
    """Polynomial coefficients a[n, i, j] of the azimuthally averaged projector.

    gbar_ij(u) = (2 pi)^{-1} Integral dphi  Lam_ij(khat(u, phi)),  with
    Lam = TT-projected unit-xx tensor and khat = u x_hat + sqrt(1-u^2) e(phi),
    is a polynomial of degree <= 4 in u; returns its coefficients so that
    the plane-wave angular integral becomes a sum of half-range moments.
    """
    e1, e2 = transverse_frame(x_hat)
    nodes = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    nphi = 12
    phis = 2.0 * math.pi * np.arange(nphi) / nphi
    samples = np.zeros((5, 3, 3))
    for a, u in enumerate(nodes):
        s = math.sqrt(max(0.0, 1.0 - u * u))
        acc = np.zeros((3, 3))
        for phi in phis:
            khat = u * x_hat + s * (math.cos(phi) * e1 + math.sin(phi) * e2)
            acc += tt_project_planewave(EXX, khat)
        samples[a] = acc / nphi
    vander = np.vander(nodes, 5, increasing=True)
    return np.linalg.solve(vander, samples.reshape(5, 9)).reshape(5, 3, 3)


def _quad_checked(f, a, b, *, epsabs, what, limit=2000, **kw):
    val, err = quad(f, a, b, limit=limit, epsabs=epsabs, epsrel=1e-9, **kw)
    if err > max(10.0 * epsabs, 1e-8 * abs(val)) and err > 1e-12:
        raise IntegrationFailureError(
            f"radial quadrature failed in {what}", achieved=err, requested=epsabs
        )
    return val


def _radial_integral(n: int, k0: float, r: float, epsabs: float) -> complex:
    """Integral_0^inf k^2 m_n(k r) / (k^2 - k0^2 - i0) dk, outgoing prescription.

    Principal value on [0, 2 k0] by antisymmetric pole subtraction, the
    remaining tail by Fourier-weight quadrature of the exact sin/cos
    decomposition of m_n, plus the half-residue i pi k0 m_n(k0 r)/2.
    """

    def f(k):
        return k * k * half_moments(n, k * r)[n] / (k + k0)

    h = 1e-5 * k0
    fp_k0 = (f(k0 + h) - f(k0 - h)) / (2.0 * h)
    f_k0 = f(k0)

    def pv_integrand_re(k):
        if abs(k - k0) < 1e-7 * k0:
            return fp_k0.real
        return ((f(k) - f_k0) / (k - k0)).real

    def pv_integrand_im(k):
        if abs(k - k0) < 1e-7 * k0:
            return fp_k0.imag
        return ((f(k) - f_k0) / (k - k0)).imag

    pv = _quad_checked(pv_integrand_re, 0.0, 2.0 * k0, epsabs=epsabs, what=f"pole segment n={n}")
    pv += 1j * _quad_checked(pv_integrand_im, 0.0, 2.0 * k0, epsabs=epsabs, what=f"pole segment n={n}")

    kcut = 2.0 * k0
    tail = 0.0 + 0.0j
    for j in range(n + 2):
        ccoef = _MOMENT_COS[n][j]
        scoef = _MOMENT_SIN[n][j]

        def wgt(k, _j=j):
            return k ** (1 - _j) / ((k * k - k0 * k0) * r ** (_j + 1))

        if ccoef != 0:
            val = _quad_checked(
                wgt, kcut, np.inf, epsabs=epsabs, what=f"cos tail n={n} j={j}",
                weight="cos", wvar=r, limit=400,
            )
            tail += ccoef * val
        if scoef != 0:
            val = _quad_checked(
                wgt, kcut, np.inf, epsabs=epsabs, what=f"sin tail n={n} j={j}",
                weight="sin", wvar=r, limit=400,
            )
            tail += scoef * val

    residue = 0.5j * math.pi * k0 * half_moments(n, k0 * r)[n]
    return pv + tail + residue


def radiated_field_exact(
    omega: float,
    x,
    params: SystemParams,
    couplings: DerivedCouplings,
    consts: PhysicalConstants | None = None,
    alpha1_coeff: complex = 1.0,
    rtol: float = 1e-6,
) -> np.ndarray:
    """Radiated TT field at frequency omega and field point x, exact k integral.

    Evaluates

        h_ij(Omega, x) = (omega0 alpha_bar / 2 M_G) (2 pi)^-3
                         Integral d^3k  Lam_ij,xx(khat) e^{i k.x} / (omega_k^2 - Omega^2)

    per unit alpha1(Omega), with the outgoing-wave prescription
    omega_k^2 - (Omega + i0)^2.  The angular integral is done exactly
    (polynomial-in-u reduction against half-range moments); the radial
    integral splits into a subtracted principal value through the pole and
    Fourier-weighted tails.
    """
    if consts is None:
        consts = PhysicalConstants()
    if omega <= 0:
        raise ValidationError("radiated_field_exact requires Omega > 0")
    xv = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(xv))
    if r == 0:
        raise ValidationError("field point must be away from the origin")
    x_hat = xv / r
    k0 = omega / consts.c
    coeffs = _angular_poly_coeffs(x_hat)
    epsabs = rtol * k0 / max(k0 * r, 1.0)
    radial = np.array([_radial_integral(n, k0, r, epsabs) for n in range(5)])
    # prefactor: (omega0 alpha_bar / (2 M_G c^2)) * (2 pi)^-3 * 4 pi
    pref = params.omega0 * params.alpha_bar / (2.0 * couplings.M_G * consts.c**2)
    pref *= 4.0 * math.pi / (2.0 * math.pi) ** 3
    return alpha1_coeff * pref * np.tensordot(radial, coeffs, axes=(0, 0))


def stress_energy_source(params: SystemParams, consts: PhysicalConstants | None = None) -> np.ndarray:
    """Volume-integrated stress tensor of the optical mode, per unit alpha1(Omega).

    Only the xx component is nonzero: (omega0 alpha_bar / c^2) e_x e_x.
    """
    if consts is None:
        consts = PhysicalConstants()
    return params.omega0 * params.alpha_bar / consts.c**2 * EXX


def radiated_field_farzone(
    omega: float,
    x,
    source_integral: np.ndarray,
    consts: PhysicalConstants | None = None,
) -> np.ndarray:
    """Far-zone closed form: (4G/c^2) * TT_radial(source)/r with retarded phase.

    ``source_integral`` is the volume-integrated stress tensor at frequency
    omega (see stress_energy_source); the retarded time appears as the
    phase factor e^{i omega r / c}.
    """
    if consts is None:
        consts = PhysicalConstants()
    xv = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(xv))
    if r == 0:
        raise ValidationError("field point must be away from the origin")
    x_hat = xv / r
    phase = np.exp(1j * omega * r / consts.c)
    return 4.0 * consts.G / consts.c**2 * tt_project_radial(source_integral, x_hat) / r * phase
