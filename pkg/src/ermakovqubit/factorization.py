"""Direct route: factorizing functions (α, Δf, β) from a driving field R(t)
and a solution φ of the parametric oscillator φ'' + Ω²(t) φ = 0.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import _numerics as num
from .errors import InvalidPairingError, ParameterError, SingularityError
from .su2 import HamiltonianParams, compose_propagator

# Finite-difference steps as fractions of a field's shortest time scale.
# The 9-point stencils are eighth order, which lets these be large enough
# that rounding stays well below 1e-9 even for second derivatives.
FD_STEP_FIRST = 2e-3
FD_STEP_SECOND = 2e-2
SINGULAR_FIELD = 1e-14
PAIRING_TOL = 1e-8


@dataclass(frozen=True)
class FieldSpec:
    """Driving field in rotating form, R(t) = -i e^{-iΔt} conj(V(t)).

    ``R_prime``/``R_second`` are optional analytic derivatives; finite
    differences with step proportional to ``timescale`` are used otherwise.
    ``log_ratio`` optionally gives the continuous branch of ln(R(t)/R(0)).
    """

    R: Callable
    Delta: float = 0.0
    R_prime: Optional[Callable] = None
    R_second: Optional[Callable] = None
    log_ratio: Optional[Callable] = None
    timescale: float = 1.0

    def __post_init__(self):
        if abs(self.R0) < SINGULAR_FIELD:
            raise ParameterError("R(0) must be nonzero")

    @property
    def R0(self) -> complex:
        return complex(self.R(np.float64(0.0)))

    def dR(self, t):
        if self.R_prime is not None:
            return self.R_prime(t)
        return num.derivative(self.R, t, FD_STEP_FIRST * self.timescale, order=1)

    def d2R(self, t):
        if self.R_second is not None:
            return self.R_second(t)
        return num.derivative(self.R, t, FD_STEP_SECOND * self.timescale, order=2)

    @property
    def logR_prime0(self) -> complex:
        return complex(self.dR(np.float64(0.0))) / self.R0

    def V(self, t):
        t = np.asarray(t, dtype=float)
        return -1j * np.exp(-1j * self.Delta * t) * np.conj(self.R(t))

    def hamiltonian_params(self) -> HamiltonianParams:
        return HamiltonianParams(self.Delta, self.V)

    def log_R_ratio(self, t):
        if self.log_ratio is not None:
            return self.log_ratio(t)
        r0 = self.R0
        dense = _dense_points(t, self.timescale)
        return num.continuous_log(lambda s: self.R(s) / r0, t, dense=dense, anchor_log=0.0)


@dataclass(frozen=True)
class OscillatorSolution:
    """A solution φ of φ'' + Ω² φ = 0 normalized to φ(0) = 1.

    Optional closed forms: ``log_phi`` (continuous ln φ with ln φ(0) = 0) and
    ``inv_sq_integral`` (∫_0^t ds/φ²(s)).
    """

    phi: Callable
    phi_prime: Callable
    log_phi: Optional[Callable] = None
    inv_sq_integral: Optional[Callable] = None
    timescale: float = 1.0

    def __post_init__(self):
        if abs(self.phi0 - 1.0) > 1e-12:
            raise ParameterError(f"φ(0) must be 1, got {self.phi0!r}")

    @property
    def phi0(self) -> complex:
        return complex(self.phi(np.float64(0.0)))

    def log(self, t):
        if self.log_phi is not None:
            return self.log_phi(t)
        dense = _dense_points(t, self.timescale)
        return num.continuous_log(self.phi, t, dense=dense, anchor_log=0.0)


def _dense_points(t, timescale):
    # enough samples that the phase moves well under π between neighbours
    return int(max(4001, 200 * _horizon(t) / timescale))


class Factorization(NamedTuple):
    alpha: np.ndarray
    delta_f: np.ndarray
    beta: np.ndarray

    def propagator(self):
        return compose_propagator(self.alpha, self.delta_f, self.beta)


def _log_derivative(field, t):
    r = np.asarray(field.R(t), dtype=complex)
    if np.any(np.abs(r) < SINGULAR_FIELD):
        bad = np.asarray(t).ravel()[np.flatnonzero(np.abs(r).ravel() < SINGULAR_FIELD)[0]]
        raise SingularityError("driving field vanishes", location=float(bad))
    return r, np.asarray(field.dR(t), dtype=complex) / r


def frequency_from_field(field: FieldSpec, t):
    """Ω²(t) = -¼[(ln R)']² + ½ (ln R)'' + |R|² for the given field."""
    t = np.asarray(t, dtype=float)
    r, lp = _log_derivative(field, t)
    lpp = np.asarray(field.d2R(t), dtype=complex) / r - lp**2
    return -0.25 * lp**2 + 0.5 * lpp + np.abs(r) ** 2


def _horizon(t):
    t = np.asarray(t, dtype=float)
    return float(np.max(np.abs(t))) if t.size else 0.0


def beta_quadrature(phi: OscillatorSolution, R0, t):
    """β(t) = R0 ∫_0^t ds/φ²(s)."""
    if phi.inv_sq_integral is not None:
        return R0 * np.asarray(phi.inv_sq_integral(t), dtype=complex)
    horizon = _horizon(t)
    if horizon > 0:
        num.check_nonvanishing(phi.phi, horizon, what="φ")
    return R0 * np.asarray(num.cumulative_quad(lambda s: 1.0 / phi.phi(s) ** 2, t), dtype=complex)


def check_pairing(field: FieldSpec, phi: OscillatorSolution, tol=PAIRING_TOL):
    """Enforce lim_{t->0} (1/R)[φ'/φ + R'/(2R)] = 0."""
    residual = (complex(phi.phi_prime(np.float64(0.0))) / phi.phi0 + 0.5 * field.logR_prime0) / field.R0
    if abs(residual) > tol:
        raise InvalidPairingError(f"α(0) limit is {residual!r}, expected 0")


def factorize_direct(field: FieldSpec, phi: OscillatorSolution, t) -> Factorization:
    """α, Δf, β from the field and a matching oscillator solution."""
    t = np.asarray(t, dtype=float)
    horizon = _horizon(t)
    if horizon > 0:
        num.check_nonvanishing(phi.phi, horizon, what="φ")
    check_pairing(field, phi)
    r, lp = _log_derivative(field, t)
    ph = np.asarray(phi.phi(t), dtype=complex)
    dph = np.asarray(phi.phi_prime(t), dtype=complex)
    alpha = np.exp(-1j * field.Delta * t) / r * (dph / ph + 0.5 * lp)
    delta_f = -2.0 * phi.log(t) - field.log_R_ratio(t) - 1j * field.Delta * t
    beta = beta_quadrature(phi, field.R0, t)
    return Factorization(alpha, np.asarray(delta_f, dtype=complex), np.asarray(beta, dtype=complex))
