"""Independent numerical integration of i dU/dt = H(t) U and comparison
reports against closed-form propagators.
"""

from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.integrate import solve_ivp

from . import _numerics as num
from .errors import ParameterError, StiffnessError
from .su2 import HamiltonianParams, build_hamiltonian, unitarity_defect

FIXED_RK4 = "rk4"
ADAPTIVE_RK45 = "rk45"

DEFAULT_THRESHOLDS = {
    "propagator": 1e-8,
    "unitarity": 1e-10,
    "ermakov": 1e-8,
    "schrodinger": 1e-7,
}


@dataclass(frozen=True)
class IntegrationConfig:
    t_max: float
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_step: float = np.inf
    method: str = ADAPTIVE_RK45
    first_step: float = None

    def __post_init__(self):
        if not self.t_max > 0:
            raise ParameterError("t_max must be positive")
        for name in ("abs_tol", "rel_tol"):
            value = getattr(self, name)
            if not 0 < value <= 1e-3:
                raise ParameterError(f"{name} must lie in (0, 1e-3]")
        if self.method not in (FIXED_RK4, ADAPTIVE_RK45):
            raise ParameterError(f"unknown method {self.method!r}")
        if self.method == FIXED_RK4 and not np.isfinite(self.max_step):
            raise ParameterError("fixed-step integration needs a finite max_step")


def characteristic_time(Omega0=0.0, Omega1=0.0, Delta=0.0):
    """2π / max(Ω0, Ω1, |Δ|, 1)."""
    return 2 * np.pi / max(Omega0, Omega1 or 0.0, abs(Delta), 1.0)


def _rhs(params):
    def rhs(t, y):
        h = build_hamiltonian(params, t)
        return (-1j * h @ y.reshape(2, 2)).ravel()

    return rhs


def _rk4(params, grid, max_step):
    rhs = _rhs(params)
    u = np.eye(2, dtype=complex).ravel()
    out = [u.reshape(2, 2).copy()]
    t = 0.0
    for target in grid[1:]:
        span = target - t
        n = max(1, int(np.ceil(span / max_step - 1e-12)))
        h = span / n
        for _ in range(n):
            k1 = rhs(t, u)
            k2 = rhs(t + 0.5 * h, u + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, u + 0.5 * h * k2)
            k4 = rhs(t + h, u + h * k3)
            u = u + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        t = target
        out.append(u.reshape(2, 2).copy())
    return np.array(out)


def integrate_propagator(params: HamiltonianParams, config: IntegrationConfig, t_eval=None):
    """Propagator samples U(t) on ``t_eval`` (default: 201 points on [0, t_max]).

    Returns ``(times, U)`` with U of shape (n, 2, 2). No unitarity correction is
    applied, so U†U - 1 remains a usable diagnostic.
    """
    if t_eval is None:
        t_eval = np.linspace(0.0, config.t_max, 201)
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval.ndim != 1 or t_eval.size == 0:
        raise ParameterError("t_eval must be a non-empty 1-D grid")
    if np.any(np.diff(t_eval) < 0) or t_eval[0] < 0 or t_eval[-1] > config.t_max * (1 + 1e-12):
        raise ParameterError("t_eval must be sorted within [0, t_max]")
    grid = t_eval if t_eval[0] == 0.0 else np.concatenate(([0.0], t_eval))
    if config.method == FIXED_RK4:
        u = _rk4(params, grid, config.max_step)
    else:
        first = config.first_step
        if first is None:
            first = min(characteristic_time(Delta=params.Delta) / 1000, config.t_max)
        sol = solve_ivp(
            _rhs(params),
            (0.0, config.t_max),
            np.eye(2, dtype=complex).ravel(),
            method="RK45",
            t_eval=grid,
            rtol=config.rel_tol,
            atol=config.abs_tol,
            max_step=config.max_step,
            first_step=first,
        )
        if sol.status != 0:
            stalled = float(sol.t[-1]) if sol.t.size else 0.0
            raise StiffnessError(f"integration stalled: {sol.message}", time=stalled)
        u = sol.y.T.reshape(-1, 2, 2)
    if grid is not t_eval:
        u = u[1:]
    return t_eval, u


@dataclass
class VerificationReport:
    max_unitarity_defect: float
    max_propagator_error: float
    max_ermakov_residual: float
    max_schrodinger_residual: float
    grid: List[float] = field(repr=False)
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    passed: bool = False

    def __post_init__(self):
        self.passed = self.evaluate()

    def evaluate(self):
        th = self.thresholds
        checks = (
            self.max_propagator_error < th["propagator"],
            self.max_unitarity_defect < th["unitarity"],
            self.max_ermakov_residual < th["ermakov"],
            self.max_schrodinger_residual < th["schrodinger"],
        )
        return all(checks)

    def as_dict(self):
        return {
            "max_unitarity_defect": self.max_unitarity_defect,
            "max_propagator_error": self.max_propagator_error,
            "max_ermakov_residual": self.max_ermakov_residual,
            "max_schrodinger_residual": self.max_schrodinger_residual,
            "n_grid": len(self.grid),
            "t_min": float(self.grid[0]),
            "t_max": float(self.grid[-1]),
            "thresholds": dict(self.thresholds),
            "pass": self.passed,
        }


def schrodinger_residual(family, t, step_fraction=1e-2):
    """max |i dU/dt - H U| with dU/dt from a 9-point central stencil.

    The step is ``step_fraction`` of the shortest time scale of the family
    (its field time scale or 1/|Δ|, whichever is shorter).
    """
    t = np.asarray(t, dtype=float)
    scale = min(family.timescale, 1.0 / abs(family.Delta)) if family.Delta else family.timescale
    h = step_fraction * scale
    du = np.zeros(t.shape + (2, 2), dtype=complex)
    for k, w in zip(range(-4, 5), num.central_weights(1, 4)):
        if w:
            du += w * family.propagator(t + k * h)
    du /= h
    hu = build_hamiltonian(family.hamiltonian_params(), t) @ family.propagator(t)
    return float(np.max(np.abs(1j * du - hu)))


def ermakov_residual(solution, t, finite_difference=False):
    t = np.asarray(t, dtype=float)
    return float(np.max(np.abs(solution.residual(t, finite_difference=finite_difference))))


def verify_family(family, config: IntegrationConfig, n_points=201, thresholds=None):
    """Compare a family's closed-form U(t) with the integrator on [0, t_max]."""
    th = dict(DEFAULT_THRESHOLDS)
    if thresholds:
        th.update(thresholds)
    grid = np.linspace(0.0, config.t_max, n_points)
    _, u_num = integrate_propagator(family.hamiltonian_params(), config, grid)
    u_closed = family.propagator(grid)
    prop_err = float(np.max(np.abs(u_closed - u_num)))
    unit = float(np.max(unitarity_defect(u_closed)))
    if getattr(family, "ermakov", None) is not None:
        erm = ermakov_residual(family.ermakov(), grid)
    else:
        erm = 0.0
    schr = schrodinger_residual(family, grid)
    return VerificationReport(
        max_unitarity_defect=unit,
        max_propagator_error=prop_err,
        max_ermakov_residual=erm,
        max_schrodinger_residual=schr,
        grid=grid.tolist(),
        thresholds=th,
    )


def default_config(family, periods=5.0, **overrides):
    """Adaptive config spanning ``periods`` characteristic periods of the family."""
    omega1 = getattr(family, "omega", 0.0) or 0.0
    first = characteristic_time(family.Omega0, omega1, family.Delta) / 1000
    kwargs = dict(t_max=periods * family.characteristic_period, first_step=first)
    kwargs.update(overrides)
    return IntegrationConfig(**kwargs)


__all__ = [
    "ADAPTIVE_RK45",
    "DEFAULT_THRESHOLDS",
    "FIXED_RK4",
    "IntegrationConfig",
    "VerificationReport",
    "characteristic_time",
    "default_config",
    "ermakov_residual",
    "integrate_propagator",
    "schrodinger_residual",
    "verify_family",
]
