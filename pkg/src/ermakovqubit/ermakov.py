"""Inverse route: prescribe a real frequency Ω(t), build the Ermakov function μ
from a seed oscillator solution (Pinney construction) and synthesize the
driving field whose propagator is then known in closed form.

Under the convention μ(0) = 1 the field reads

    R(t) = R0 / μ²(t) · exp(i λ ∫_0^t ds/μ²(s)),    Ω0² = |R0|² + λ²/4,

and μ solves μ'' + Ω² μ = Ω0² / μ³.
"""

import threading
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _numerics as num
from .errors import InvalidPairingError, ParameterError, SingularityError, SynthesisError
from .factorization import (
    FD_STEP_SECOND,
    PAIRING_TOL,
    FieldSpec,
    Factorization,
    OscillatorSolution,
    beta_quadrature,
)

NORMALIZATION_TOL = 1e-10
ANGULAR_TOL = 1e-9
DEFAULT_MAX_P = 64


@dataclass(frozen=True)
class SeedSolution:
    """Real solution φ1 of φ'' + Ω²φ = 0 used to seed the Pinney formula.

    ``companion`` is φ2 = φ1 ∫ dt/φ1², a second solution with unit Wronskian
    φ1 φ2' - φ1' φ2 = 1. Supplying it in closed form lets φ1 have zeros; when
    omitted it is computed by quadrature from 0, which requires φ1 ≠ 0 there.
    """

    phi: Callable
    phi_prime: Callable
    Omega_sq: Callable
    companion: Optional[Callable] = None
    companion_prime: Optional[Callable] = None

    def phi2(self, t):
        if self.companion is not None:
            return self.companion(t)
        t = np.asarray(t, dtype=float)
        return self.phi(t) * num.cumulative_quad(lambda s: 1.0 / self.phi(s) ** 2, t)

    def phi2_prime(self, t):
        if self.companion_prime is not None:
            return self.companion_prime(t)
        return (1.0 + self.phi_prime(t) * self.phi2(t)) / self.phi(t)


def cosine_seed(omega1):
    """φ1 = cos(Ω1 t) for a constant frequency Ω1 > 0."""
    return SeedSolution(
        phi=lambda t: np.cos(omega1 * np.asarray(t, dtype=float)),
        phi_prime=lambda t: -omega1 * np.sin(omega1 * np.asarray(t, dtype=float)),
        Omega_sq=lambda t: np.full(np.shape(t), omega1**2),
        companion=lambda t: np.sin(omega1 * np.asarray(t, dtype=float)) / omega1,
        companion_prime=lambda t: np.cos(omega1 * np.asarray(t, dtype=float)),
    )


def linear_seed():
    """φ1 = t for Ω = 0; the companion t ∫dt/t² = -1 is constant."""
    return SeedSolution(
        phi=lambda t: np.asarray(t, dtype=float),
        phi_prime=lambda t: np.ones(np.shape(t)),
        Omega_sq=lambda t: np.zeros(np.shape(t)),
        companion=lambda t: -np.ones(np.shape(t)),
        companion_prime=lambda t: np.zeros(np.shape(t)),
    )


@dataclass(frozen=True)
class GammaSplit:
    """Real and imaginary parts of d/dt ln R in terms of μ."""

    gamma1: Callable
    gamma2: Callable


@dataclass(frozen=True)
class PeriodicitySpec:
    tau: float
    p: int

    @property
    def tau_p(self):
        return self.p * self.tau


class _PrimitiveTable:
    """∫_0^t f for t >= 0, from cached integrals over nodes spaced ``span`` apart.

    Each evaluation costs one short quadrature from the nearest node below t,
    which keeps pointwise calls (e.g. from an ODE right-hand side) cheap.
    """

    def __init__(self, f, span):
        self.f = f
        self.span = float(span)
        self.values = [0.0]
        self.lock = threading.Lock()

    def _node_value(self, k):
        with self.lock:
            while len(self.values) <= k:
                j = len(self.values)
                a, b = (j - 1) * self.span, j * self.span
                self.values.append(self.values[-1] + num.quad_segment(self.f, a, b).real)
            return self.values[k]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            return num.cumulative_quad(self.f, t)
        flat = t.ravel()
        out = np.empty(flat.size)
        for i, ti in enumerate(flat):
            k = int(ti // self.span)
            a = k * self.span
            out[i] = self._node_value(k) + num.quad_segment(self.f, a, ti).real
        return out.reshape(t.shape) if t.ndim else out[0]


@dataclass(frozen=True)
class ErmakovSolution:
    mu: Callable
    mu_prime: Callable
    lam: float
    Omega0: float
    c1: float
    c2: float
    seed: SeedSolution
    phase: Optional[Callable] = None
    period: Optional[float] = None
    timescale: float = 1.0
    mu_second_exact: Optional[Callable] = None

    def Omega_sq(self, t):
        return self.seed.Omega_sq(t)

    def __post_init__(self):
        object.__setattr__(self, "_table", _PrimitiveTable(lambda s: 1.0 / self.mu(s) ** 2, 0.25 * self.timescale))

    def phase_integral(self, t):
        """∫_0^t ds/μ²(s); closed form when available, else adaptive quadrature."""
        if self.phase is not None:
            return np.asarray(self.phase(t), dtype=float)
        return self._table(t)

    def gamma_split(self) -> GammaSplit:
        return GammaSplit(
            gamma1=lambda t: -2.0 * self.mu_prime(t) / self.mu(t),
            gamma2=lambda t: self.lam / self.mu(t) ** 2,
        )

    def mu_second(self, t, finite_difference=False):
        if self.mu_second_exact is not None and not finite_difference:
            return self.mu_second_exact(t)
        return num.derivative(self.mu, t, FD_STEP_SECOND * self.timescale, order=2)

    def residual(self, t, finite_difference=False):
        """μ'' + Ω² μ - Ω0²/μ³.

        μ'' comes from differentiating the Pinney formula (which only uses the
        oscillator equation for the seed) or, on request, from finite differences.
        """
        t = np.asarray(t, dtype=float)
        mu = self.mu(t)
        return self.mu_second(t, finite_difference) + self.Omega_sq(t) * mu - self.Omega0**2 / mu**3


def map_initial_data(R0, R0_prime):
    """(μ0', λ) from R(0) and R'(0) with μ0 = 1."""
    R0 = complex(R0)
    if R0 == 0:
        raise ParameterError("R0 must be nonzero")
    ratio = complex(R0_prime) / R0
    return -0.5 * ratio.real, ratio.imag


def rabi_like_frequency(R0, lam):
    return float(np.sqrt(abs(complex(R0)) ** 2 + 0.25 * lam**2))


def pinney_mu(
    seed: SeedSolution,
    Omega0,
    c1,
    c2,
    lam=0.0,
    mu0_prime=0.0,
    phase=None,
    period=None,
    timescale=1.0,
    check_horizon=None,
) -> ErmakovSolution:
    """μ² = Ω0² φ1²/c1 + c1 (c2 φ1 + φ2)², normalized so that μ(0) = 1.

    The constants must reproduce μ(0) = 1 and μ'(0) = ``mu0_prime``; μ² is
    also checked to stay positive on [0, ``check_horizon``].
    """
    if not c1 > 0:
        raise ParameterError(f"Pinney constant c1 must be positive, got {c1!r}")

    def mu_sq(t):
        phi1 = seed.phi(t)
        return Omega0**2 * phi1**2 / c1 + c1 * (c2 * phi1 + seed.phi2(t)) ** 2

    def mu(t):
        return np.sqrt(mu_sq(t))

    def mu_prime(t):
        phi1, dphi1 = seed.phi(t), seed.phi_prime(t)
        w = c2 * phi1 + seed.phi2(t)
        dw = c2 * dphi1 + seed.phi2_prime(t)
        return (Omega0**2 * phi1 * dphi1 / c1 + c1 * w * dw) / mu(t)

    def mu_second(t):
        # (μ²)''/2 = μ μ'' + μ'², with φ'' = -Ω² φ for both seed solutions
        phi1, dphi1 = seed.phi(t), seed.phi_prime(t)
        w = c2 * phi1 + seed.phi2(t)
        dw = c2 * dphi1 + seed.phi2_prime(t)
        w2 = seed.Omega_sq(t)
        half_dd = Omega0**2 * (dphi1**2 - w2 * phi1**2) / c1 + c1 * (dw**2 - w2 * w**2)
        m = mu(t)
        return (half_dd - mu_prime(t) ** 2) / m

    zero = np.float64(0.0)
    if abs(mu_sq(zero) - 1.0) > NORMALIZATION_TOL:
        raise SynthesisError(f"Pinney constants give μ(0)² = {mu_sq(zero)!r}, expected 1")
    if abs(mu_prime(zero) - mu0_prime) > NORMALIZATION_TOL:
        raise SynthesisError(f"Pinney constants give μ'(0) = {mu_prime(zero)!r}, expected {mu0_prime!r}")
    horizon = check_horizon if check_horizon is not None else 10.0 * timescale
    grid = np.linspace(0.0, horizon, 2001)
    values = mu_sq(grid)
    if not np.all(values > 0):
        bad = grid[np.flatnonzero(~(values > 0))[0]]
        raise SynthesisError(f"μ² is not positive at t={bad:.6g}")
    try:
        num.check_nonvanishing(mu_sq, horizon, what="μ²")
    except SingularityError as exc:
        raise SynthesisError(f"μ² touches zero near t={exc.location:.6g}") from exc
    return ErmakovSolution(
        mu=mu,
        mu_prime=mu_prime,
        lam=float(lam),
        Omega0=float(Omega0),
        c1=float(c1),
        c2=float(c2),
        seed=seed,
        phase=phase,
        period=period,
        timescale=timescale,
        mu_second_exact=mu_second,
    )


def synthesize_field(sol: ErmakovSolution, R0, t):
    """R(t) = R0/μ²(t) · exp(iλ ∫_0^t ds/μ²)."""
    t = np.asarray(t, dtype=float)
    try:
        phase = sol.phase_integral(t)
    except (ArithmeticError, ValueError) as exc:
        raise SynthesisError(f"phase quadrature failed: {exc}") from exc
    return complex(R0) / sol.mu(t) ** 2 * np.exp(1j * sol.lam * phase)


def synthesized_field_spec(sol: ErmakovSolution, R0, Delta=0.0) -> FieldSpec:
    """Wrap a synthesized field as a FieldSpec with analytic R' and ln(R/R0)."""
    R0 = complex(R0)

    def R(t):
        return synthesize_field(sol, R0, t)

    def R_prime(t):
        mu = sol.mu(t)
        return R(t) * (-2.0 * sol.mu_prime(t) / mu + 1j * sol.lam / mu**2)

    def log_ratio(t):
        return -2.0 * np.log(sol.mu(t)) + 1j * sol.lam * sol.phase_integral(t)

    return FieldSpec(R=R, Delta=Delta, R_prime=R_prime, log_ratio=log_ratio, timescale=sol.timescale)


def mu_factorization(sol: ErmakovSolution, phi: OscillatorSolution, R0, Delta, t) -> Factorization:
    """α, Δf, β written through μ, λ and the phase integral."""
    t = np.asarray(t, dtype=float)
    R0 = complex(R0)
    zero = np.float64(0.0)
    limit = (complex(phi.phi_prime(zero)) - float(sol.mu_prime(zero)) + 0.5j * sol.lam) / R0
    if abs(limit) > PAIRING_TOL:
        raise InvalidPairingError(f"α(0) limit is {limit!r}, expected 0")
    beta = beta_quadrature(phi, R0, t)
    mu = sol.mu(t)
    phase = sol.phase_integral(t)
    ph = np.asarray(phi.phi(t), dtype=complex)
    rotation = np.exp(-1j * Delta * t - 1j * sol.lam * phase)
    alpha = mu**2 / R0 * rotation * (
        np.asarray(phi.phi_prime(t), dtype=complex) / ph - sol.mu_prime(t) / mu + 0.5j * sol.lam / mu**2
    )
    delta_f = 2.0 * np.log(mu) - 2.0 * phi.log(t) - 1j * sol.lam * phase - 1j * Delta * t
    return Factorization(np.asarray(alpha), np.asarray(delta_f, dtype=complex), np.asarray(beta))


def _angular_distance(theta):
    """Distance from theta to the nearest multiple of 2π."""
    return abs(np.remainder(theta + np.pi, 2 * np.pi) - np.pi)


def period_phase(sol: ErmakovSolution):
    """λ ∫_0^τ ds/μ², the phase R picks up over one period of μ."""
    if sol.period is None:
        raise ParameterError("μ has no known period")
    return sol.lam * float(sol.phase_integral(np.float64(sol.period)))


def check_periodicity(sol: ErmakovSolution, max_p=DEFAULT_MAX_P, tol=ANGULAR_TOL):
    """Least p <= max_p with p·λ∫_0^τ ds/μ² ≡ 0 (mod 2π), or None."""
    if max_p < 1:
        raise ParameterError("max_p must be a positive integer")
    theta = period_phase(sol)
    for p in range(1, int(max_p) + 1):
        if _angular_distance(p * theta) < tol:
            return PeriodicitySpec(tau=float(sol.period), p=p)
    return None
