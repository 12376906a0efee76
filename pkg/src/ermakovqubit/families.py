"""Closed-form catalogue of exactly solvable driving fields.

All families start from the upper level with R(0) = -i conj(g) and
[ln R]'(0) = iδ, so λ = δ and Ω0² = |g|² + δ²/4:

* ``CircularFamily``    R = -i conj(g) e^{iδt} (constant amplitude)
* ``DecayingFamily``    prescribed Ω = 0, μ² = Ω0² t² + 1
* ``OscillatingFamily`` prescribed Ω = Ω1, μ² = cos²(Ω1 t) + κ² sin²(Ω1 t)

``PinneyFamily`` is the generic constant-Ω construction with arbitrary
initial data; it goes through the quadrature-based routes instead.
"""

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import _numerics as num
from .ermakov import (
    ErmakovSolution,
    cosine_seed,
    linear_seed,
    map_initial_data,
    mu_factorization,
    pinney_mu,
    rabi_like_frequency,
    synthesized_field_spec,
)
from .errors import DegenerateFamilyError, ParameterError, SingularityError
from .factorization import FieldSpec, Factorization, OscillatorSolution
from .su2 import HamiltonianParams

DENOMINATOR_FLOOR = 1e-12


def _t(t):
    return np.asarray(t, dtype=float)


@dataclass(frozen=True)
class FamilyParams:
    g: complex
    delta: float
    Delta: float = 0.0
    Omega1: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "g", complex(self.g))
        for name in ("delta", "Delta"):
            if not np.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.Omega1 is not None and not self.Omega1 > 0:
            raise ParameterError(f"Omega1 must be positive, got {self.Omega1!r}")

    @classmethod
    def from_kappa(cls, g, delta, kappa, Delta=0.0):
        if not kappa > 0:
            raise ParameterError(f"kappa must be positive, got {kappa!r}")
        omega0 = float(np.sqrt(abs(complex(g)) ** 2 + 0.25 * delta**2))
        if omega0 == 0:
            raise DegenerateFamilyError("Ω0 = 0: kappa cannot fix Ω1")
        return cls(g, delta, Delta, omega0 / kappa)

    @property
    def Omega0(self):
        return float(np.sqrt(abs(self.g) ** 2 + 0.25 * self.delta**2))

    @property
    def kappa(self):
        if self.Omega1 is None:
            return None
        return self.Omega0 / self.Omega1

    @property
    def R0(self):
        return -1j * np.conj(self.g)


@dataclass(frozen=True)
class MagneticField:
    """Field B = B1(t) e1 + B2(t) e2 + B3 e3 acting on H = b σ·B."""

    B1: Callable
    B2: Callable
    B3: float
    b: float


def magnetic_to_qubit(field: MagneticField) -> HamiltonianParams:
    """V(t) = b[B1(t) - i B2(t)]/2 and Δ = b B3."""

    def V(t):
        t = _t(t)
        return 0.5 * field.b * (np.asarray(field.B1(t)) - 1j * np.asarray(field.B2(t)))

    return HamiltonianParams(Delta=field.b * field.B3, V=V)


def circular_magnetic_field(B0, omega, B3, b):
    """B1 = B0 cos ωt, B2 = B0 sin ωt."""
    return MagneticField(
        B1=lambda t: B0 * np.cos(omega * _t(t)),
        B2=lambda t: B0 * np.sin(omega * _t(t)),
        B3=B3,
        b=b,
    )


def eta(t, params: FamilyParams):
    """Continuous primitive of 1/μ² = 1/(cos²(Ω1 t) + κ² sin²(Ω1 t)), η(0) = 0.

    Written as (1/Ω0)[arctan(κ tan Ω1 t) + nπ] with the branch index chosen per
    half period of tan so that η is smooth across the poles of tan.
    """
    if params.Omega1 is None:
        raise ParameterError("eta needs Omega1")
    kappa = params.kappa
    if not kappa > 0:
        raise ParameterError("eta needs kappa > 0")
    return num.unwrapped_atan(kappa, params.Omega1 * _t(t)) / params.Omega0


@dataclass(frozen=True)
class Family:
    """Common interface of a solvable family. Subclasses supply the closed forms.

    ``alpha_scale`` multiplies α everywhere; it exists so verification code
    can be shown to catch a corrupted closed form.
    """

    params: FamilyParams
    alpha_scale: float = 1.0

    name = "family"

    # -- basic data -------------------------------------------------------
    @property
    def Omega0(self):
        return self.params.Omega0

    @property
    def Delta(self):
        return self.params.Delta

    @property
    def R0(self):
        return self.params.R0

    @property
    def lam(self):
        return self.params.delta

    @property
    def characteristic_period(self):
        raise NotImplementedError

    @property
    def timescale(self):
        raise NotImplementedError

    @property
    def mu_period(self):
        return None

    def corrupted(self, alpha_scale=1.01):
        return replace(self, alpha_scale=alpha_scale)

    # -- closed forms -----------------------------------------------------
    def R(self, t):
        t = _t(t)
        return self.R0 / self.mu(t) ** 2 * np.exp(1j * self.lam * self.phase(t))

    def R_prime(self, t):
        t = _t(t)
        mu = self.mu(t)
        return self.R(t) * (-2.0 * self.mu_prime(t) / mu + 1j * self.lam / mu**2)

    def V(self, t):
        t = _t(t)
        return -1j * np.exp(-1j * self.Delta * t) * np.conj(self.R(t))

    def prescribed_Omega_sq(self, t):
        raise NotImplementedError

    def mu(self, t):
        raise NotImplementedError

    def mu_prime(self, t):
        raise NotImplementedError

    def phase(self, t):
        """∫_0^t ds/μ²(s)."""
        raise NotImplementedError

    def phi(self, t):
        raise NotImplementedError

    def phi_prime(self, t):
        raise NotImplementedError

    def log_phi(self, t):
        raise NotImplementedError

    def inv_sq_integral(self, t):
        """∫_0^t ds/φ²(s)."""
        raise NotImplementedError

    def alpha(self, t):
        raise NotImplementedError

    def delta_f(self, t):
        raise NotImplementedError

    def beta(self, t):
        raise NotImplementedError

    def inversion(self, t):
        raise NotImplementedError

    def state(self, t):
        """Closed-form amplitudes (c_p, c_q) for ψ(0) = |p>."""
        t = _t(t)
        theta = self.Delta * t + self.lam * self.phase(t)
        mu = self.mu(t)
        ph = self.phi(t)
        cp = np.conj(ph) / mu * np.exp(-0.5j * theta)
        cq = self.R0 * self.inv_sq_integral(t) * ph / mu * np.exp(0.5j * theta)
        return cp, cq

    # -- derived ----------------------------------------------------------
    def factorization(self, t) -> Factorization:
        t = _t(t)
        return Factorization(
            self.alpha_scale * np.asarray(self.alpha(t), dtype=complex),
            np.asarray(self.delta_f(t), dtype=complex),
            np.asarray(self.beta(t), dtype=complex),
        )

    def propagator(self, t):
        return self.factorization(t).propagator()

    def hamiltonian_params(self) -> HamiltonianParams:
        return HamiltonianParams(self.Delta, self.V)

    def field_spec(self, analytic=True) -> FieldSpec:
        """The driving field; with ``analytic=False`` only R(t) is supplied."""
        if not analytic:
            return FieldSpec(R=self.R, Delta=self.Delta, timescale=self.timescale)
        return FieldSpec(
            R=self.R,
            Delta=self.Delta,
            R_prime=self.R_prime,
            log_ratio=lambda t: -2.0 * np.log(self.mu(t)) + 1j * self.lam * self.phase(t),
            timescale=self.timescale,
        )

    def oscillator(self, closed_form=True) -> OscillatorSolution:
        if not closed_form:
            return OscillatorSolution(self.phi, self.phi_prime, timescale=self.timescale)
        return OscillatorSolution(
            self.phi,
            self.phi_prime,
            log_phi=self.log_phi,
            inv_sq_integral=self.inv_sq_integral,
            timescale=self.timescale,
        )

    def seed(self):
        raise NotImplementedError

    def pinney_constants(self):
        raise NotImplementedError

    def ermakov(self, closed_form=True) -> ErmakovSolution:
        c1, c2 = self.pinney_constants()
        return pinney_mu(
            self.seed(),
            self.Omega0,
            c1,
            c2,
            lam=self.lam,
            mu0_prime=0.0,
            phase=self.phase if closed_form else None,
            period=self.mu_period,
            timescale=self.timescale,
            check_horizon=5 * self.characteristic_period,
        )

    def generic_factorization(self, t, closed_form=False) -> Factorization:
        """(α, Δf, β) through the μ-form route, by default with quadratures."""
        return mu_factorization(
            self.ermakov(closed_form),
            self.oscillator(closed_form),
            self.R0,
            self.Delta,
            t,
        )


def _check_denominator(den, t, what):
    small = np.abs(den) < DENOMINATOR_FLOOR
    if np.any(small):
        where = float(np.asarray(t).ravel()[np.flatnonzero(np.ravel(small))[0]])
        raise SingularityError(f"{what} vanishes at t={where:.6g} (resonant δ = 0)", location=where)


@dataclass(frozen=True)
class _HarmonicFamily(Family):
    """Shared closed forms for φ = cos(wt) - iδ/(2w) sin(wt)."""

    @property
    def omega(self):
        raise NotImplementedError

    def phi(self, t):
        x = self.omega * _t(t)
        return np.cos(x) - 0.5j * self.params.delta / self.omega * np.sin(x)

    def phi_prime(self, t):
        x = self.omega * _t(t)
        return -self.omega * np.sin(x) - 0.5j * self.params.delta * np.cos(x)

    def log_phi(self, t):
        x = self.omega * _t(t)
        ph = self.phi(t)
        _check_denominator(ph, t, "φ")
        return np.log(np.abs(ph)) + 1j * num.unwrapped_atan(-0.5 * self.params.delta / self.omega, x)

    def _denominator(self, t):
        x = self.omega * _t(t)
        den = 2 * self.omega * np.cos(x) - 1j * self.params.delta * np.sin(x)
        _check_denominator(den, t, "2Ω cos - iδ sin")
        return den

    def inv_sq_integral(self, t):
        return 2 * np.sin(self.omega * _t(t)) / self._denominator(t)

    def beta(self, t):
        t = _t(t)
        return -2j * np.conj(self.params.g) * np.sin(self.omega * t) / self._denominator(t)

    @property
    def mu_period(self):
        return np.pi / self.omega

    @property
    def characteristic_period(self):
        return np.pi / self.omega

    def seed(self):
        return cosine_seed(self.omega)

    def pinney_constants(self):
        return self.Omega0**2, 0.0


@dataclass(frozen=True)
class CircularFamily(_HarmonicFamily):
    name = "circular"

    def __post_init__(self):
        if self.Omega0 == 0:
            raise DegenerateFamilyError("circular family needs Ω0 > 0")

    @property
    def omega(self):
        return self.Omega0

    @property
    def timescale(self):
        return 1.0 / max(self.Omega0, abs(self.params.delta))

    @property
    def frequency(self):
        """Rotation frequency ω = δ + Δ of the transverse field."""
        return self.params.delta + self.Delta

    def prescribed_Omega_sq(self, t):
        return np.full(np.shape(t), self.Omega0**2)

    def R(self, t):
        return self.R0 * np.exp(1j * self.params.delta * _t(t))

    def R_prime(self, t):
        return 1j * self.params.delta * self.R(t)

    def mu(self, t):
        return np.ones(np.shape(t))

    def mu_prime(self, t):
        return np.zeros(np.shape(t))

    def phase(self, t):
        return _t(t)

    def alpha(self, t):
        t = _t(t)
        x = self.Omega0 * t
        return -2j * self.params.g * np.exp(-1j * self.frequency * t) * np.sin(x) / self._denominator(t)

    def delta_f(self, t):
        t = _t(t)
        return -2.0 * self.log_phi(t) - 1j * self.frequency * t

    def inversion(self, t):
        w0 = self.Omega0
        return abs(self.params.g) ** 2 / w0**2 * np.cos(2 * w0 * _t(t)) + self.params.delta**2 / (4 * w0**2)

    def state(self, t):
        t = _t(t)
        w0 = self.Omega0
        x = w0 * t
        cp = np.exp(-0.5j * self.frequency * t) * (np.cos(x) + 0.5j * self.params.delta / w0 * np.sin(x))
        cq = -1j * np.conj(self.params.g) / w0 * np.exp(0.5j * self.frequency * t) * np.sin(x)
        return cp, cq


@dataclass(frozen=True)
class OscillatingFamily(_HarmonicFamily):
    name = "oscillating"

    def __post_init__(self):
        if self.params.Omega1 is None or not self.params.Omega1 > 0:
            raise ParameterError("oscillating family needs Omega1 > 0")
        if self.Omega0 == 0:
            raise DegenerateFamilyError("oscillating family needs Ω0 > 0")

    @property
    def omega(self):
        return self.params.Omega1

    @property
    def kappa(self):
        return self.params.kappa

    @property
    def timescale(self):
        k = self.kappa
        return 1.0 / max(self.omega * max(k, 1.0 / k), abs(self.params.delta) * max(1.0, 1.0 / k**2))

    def prescribed_Omega_sq(self, t):
        return np.full(np.shape(t), self.omega**2)

    def mu(self, t):
        x = self.omega * _t(t)
        return np.sqrt(np.cos(x) ** 2 + self.kappa**2 * np.sin(x) ** 2)

    def mu_prime(self, t):
        x = self.omega * _t(t)
        return (self.kappa**2 - 1.0) * self.omega * np.sin(x) * np.cos(x) / self.mu(t)

    def phase(self, t):
        return eta(t, self.params)

    def alpha(self, t):
        t = _t(t)
        x = self.omega * t
        rotation = np.exp(-1j * self.Delta * t - 1j * self.params.delta * self.phase(t))
        return -2j * self.params.g * np.sin(x) * rotation / self._denominator(t)

    def delta_f(self, t):
        t = _t(t)
        return (
            np.log(self.mu(t) ** 2)
            - 2.0 * self.log_phi(t)
            - 1j * self.params.delta * self.phase(t)
            - 1j * self.Delta * t
        )

    def inversion(self, t):
        x = self.omega * _t(t)
        w1 = self.omega
        c2, s2 = np.cos(x) ** 2, np.sin(x) ** 2
        num_ = 4 * w1**2 * c2 + (self.params.delta**2 - 4 * abs(self.params.g) ** 2) * s2
        return num_ / (4 * w1**2 * (c2 + self.kappa**2 * s2))

    @property
    def P_min(self):
        d2, g2 = self.params.delta**2, 4 * abs(self.params.g) ** 2
        return (d2 - g2) / (d2 + g2)

    def minimum_times(self, n):
        """t_n = nπ/(2Ω1)."""
        return np.asarray(n, dtype=float) * np.pi / (2 * self.omega)

    @property
    def inversion_period(self):
        return np.pi / self.omega


@dataclass(frozen=True)
class DecayingFamily(Family):
    name = "decaying"

    def __post_init__(self):
        if self.Omega0 == 0:
            raise DegenerateFamilyError("decaying family needs Ω0 > 0")

    @property
    def characteristic_period(self):
        return 2 * np.pi / self.Omega0

    @property
    def timescale(self):
        return 1.0 / max(self.Omega0, abs(self.params.delta))

    def prescribed_Omega_sq(self, t):
        return np.zeros(np.shape(t))

    def mu(self, t):
        return np.sqrt(self.Omega0**2 * _t(t) ** 2 + 1.0)

    def mu_prime(self, t):
        t = _t(t)
        return self.Omega0**2 * t / self.mu(t)

    def phase(self, t):
        return np.arctan(self.Omega0 * _t(t)) / self.Omega0

    def phi(self, t):
        return 1.0 - 0.5j * self.params.delta * _t(t)

    def phi_prime(self, t):
        return np.full(np.shape(t), -0.5j * self.params.delta)

    def log_phi(self, t):
        return np.log(self.phi(t))

    def inv_sq_integral(self, t):
        return _t(t) / self.phi(t)

    def alpha(self, t):
        t = _t(t)
        d = self.params.delta
        rotation = np.exp(-1j * self.Delta * t - 1j * d * self.phase(t))
        return -2j * self.params.g * t / (2.0 - 1j * d * t) * rotation

    def beta(self, t):
        t = _t(t)
        return -2j * np.conj(self.params.g) * t / (2.0 - 1j * self.params.delta * t)

    def delta_f(self, t):
        t = _t(t)
        d = self.params.delta
        return (
            np.log(4 * self.Omega0**2 * t**2 + 4)
            - 2.0 * np.log(2.0 - 1j * d * t)
            - 1j * d * self.phase(t)
            - 1j * self.Delta * t
        )

    def inversion(self, t):
        t = _t(t)
        a = 0.25 * self.params.delta**2 - abs(self.params.g) ** 2
        return (a * t**2 + 1.0) / (self.Omega0**2 * t**2 + 1.0)

    @property
    def asymptotic_inversion(self):
        return (0.25 * self.params.delta**2 - abs(self.params.g) ** 2) / self.Omega0**2

    def seed(self):
        return linear_seed()

    def pinney_constants(self):
        return 1.0, 0.0


def circular_family(params: FamilyParams) -> CircularFamily:
    return CircularFamily(params)


def decaying_family(params: FamilyParams) -> DecayingFamily:
    return DecayingFamily(params)


def oscillating_family(params: FamilyParams) -> OscillatingFamily:
    return OscillatingFamily(params)


def pinney_constants_for(omega1, Omega0, mu0_prime):
    """(c1, c2) giving μ(0) = 1 and μ'(0) = mu0_prime for a constant frequency."""
    if omega1 > 0:
        c1 = Omega0**2 + mu0_prime**2
        return c1, mu0_prime / c1
    return 1.0, -mu0_prime


@dataclass(frozen=True)
class PinneyFamily:
    """Constant prescribed frequency Ω1 >= 0 with general R(0), R'(0).

    Everything here is built through the generic routes: Pinney μ from the
    seed, the phase integral and β by quadrature, (α, Δf, β) in μ-form.
    """

    omega1: float
    R0: complex
    R0_prime: complex
    Delta: float = 0.0
    c1: Optional[float] = None
    c2: Optional[float] = None
    alpha_scale: float = 1.0

    name = "custom-pinney"

    def __post_init__(self):
        if not self.omega1 >= 0:
            raise ParameterError("omega1 must be non-negative")
        mu0p, lam = map_initial_data(self.R0, self.R0_prime)
        omega0 = rabi_like_frequency(self.R0, lam)
        c1, c2 = pinney_constants_for(self.omega1, omega0, mu0p)
        if self.c1 is not None:
            c1 = self.c1
        if self.c2 is not None:
            c2 = self.c2
        seed = cosine_seed(self.omega1) if self.omega1 > 0 else linear_seed()
        sol = pinney_mu(
            seed,
            omega0,
            c1,
            c2,
            lam=lam,
            mu0_prime=mu0p,
            period=np.pi / self.omega1 if self.omega1 > 0 else None,
            timescale=self.timescale_for(omega0, lam),
            check_horizon=5 * self.period_for(omega0),
        )
        object.__setattr__(self, "_sol", sol)

    def timescale_for(self, omega0, lam):
        return 1.0 / max(self.omega1, omega0, abs(lam), 1e-12)

    def period_for(self, omega0):
        return np.pi / self.omega1 if self.omega1 > 0 else 2 * np.pi / omega0

    @property
    def solution(self) -> ErmakovSolution:
        return self._sol

    @property
    def lam(self):
        return self._sol.lam

    @property
    def Omega0(self):
        return self._sol.Omega0

    @property
    def characteristic_period(self):
        return self.period_for(self.Omega0)

    @property
    def timescale(self):
        return self._sol.timescale

    @property
    def mu_period(self):
        return self._sol.period

    def prescribed_Omega_sq(self, t):
        return np.full(np.shape(t), self.omega1**2)

    def mu(self, t):
        return self._sol.mu(t)

    def phase(self, t):
        return self._sol.phase_integral(t)

    def field_spec(self, analytic=True) -> FieldSpec:
        spec = synthesized_field_spec(self._sol, self.R0, self.Delta)
        if analytic:
            return spec
        return FieldSpec(R=spec.R, Delta=self.Delta, timescale=spec.timescale)

    def R(self, t):
        return self.field_spec().R(t)

    def V(self, t):
        return self.field_spec().V(t)

    def oscillator(self, closed_form=True) -> OscillatorSolution:
        w = self.omega1
        dphi0 = -0.5 * complex(self.R0_prime) / complex(self.R0)
        if w > 0:
            phi = lambda t: np.cos(w * _t(t)) + dphi0 / w * np.sin(w * _t(t))
            dphi = lambda t: -w * np.sin(w * _t(t)) + dphi0 * np.cos(w * _t(t))
        else:
            phi = lambda t: 1.0 + dphi0 * _t(t)
            dphi = lambda t: np.full(np.shape(t), dphi0)
        return OscillatorSolution(phi, dphi, timescale=self.timescale)

    def ermakov(self, closed_form=True) -> ErmakovSolution:
        return self._sol

    def factorization(self, t) -> Factorization:
        f = mu_factorization(self._sol, self.oscillator(), self.R0, self.Delta, t)
        return Factorization(self.alpha_scale * f.alpha, f.delta_f, f.beta)

    def propagator(self, t):
        return self.factorization(t).propagator()

    def hamiltonian_params(self) -> HamiltonianParams:
        return HamiltonianParams(self.Delta, self.V)

    def inversion(self, t):
        u = self.propagator(t)
        return np.abs(u[..., 0, 0]) ** 2 - np.abs(u[..., 1, 0]) ** 2

    def corrupted(self, alpha_scale=1.01):
        return replace(self, alpha_scale=alpha_scale)


def make_family(name, params: FamilyParams):
    builders = {
        "circular": circular_family,
        "decaying": decaying_family,
        "oscillating": oscillating_family,
    }
    try:
        return builders[name](params)
    except KeyError:
        raise ParameterError(f"unknown family {name!r}") from None


def inversion_from_propagator(u):
    """P = |c_p|² - |c_q|² for ψ(0) = |p>, from the first column of U."""
    return np.abs(u[..., 0, 0]) ** 2 - np.abs(u[..., 1, 0]) ** 2
