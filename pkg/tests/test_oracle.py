import numpy as np
import pytest
from scipy.linalg import expm

from conftest import ACCEPTANCE_FAMILIES, SQRT5, circular, decaying, oscillating, period_grid
from ermakovqubit import oracle
from ermakovqubit.errors import ParameterError, StiffnessError
from ermakovqubit.oracle import (
    ADAPTIVE_RK45,
    FIXED_RK4,
    IntegrationConfig,
    characteristic_time,
    default_config,
    integrate_propagator,
    verify_family,
)
from ermakovqubit.su2 import HamiltonianParams


@pytest.mark.parametrize("method,step", [(ADAPTIVE_RK45, np.inf), (FIXED_RK4, 1e-3)])
def test_constant_real_coupling(method, step):
    g = 1.7
    t = np.linspace(0, 4, 41)
    cfg = IntegrationConfig(t_max=4.0, method=method, max_step=step)
    _, u = integrate_propagator(HamiltonianParams(0.0, lambda s: g + 0 * s), cfg, t)
    flip = np.array([[0, 1], [1, 0]])
    expected = np.cos(g * t)[:, None, None] * np.eye(2) - 1j * np.sin(g * t)[:, None, None] * flip
    assert np.max(np.abs(u - expected)) < 1e-9
    assert np.array_equal(u[0], np.eye(2))


def test_constant_hamiltonian_matrix_exponential():
    v, delta = 0.4 - 1.3j, 2.1
    h = np.array([[delta / 2, v], [np.conj(v), -delta / 2]])
    t = np.linspace(0, 6, 31)
    _, u = integrate_propagator(HamiltonianParams(delta, lambda s: v + 0 * s), IntegrationConfig(t_max=6.0), t)
    expected = np.array([expm(-1j * h * s) for s in t])
    assert np.max(np.abs(u - expected)) < 1e-8


def test_default_grid():
    t, u = integrate_propagator(HamiltonianParams(0.0, lambda s: 1.0 + 0 * s), IntegrationConfig(t_max=1.0))
    assert t.size == 201 and u.shape == (201, 2, 2)


def test_grid_validation():
    hp = HamiltonianParams(0.0, lambda s: 1.0 + 0 * s)
    cfg = IntegrationConfig(t_max=1.0)
    with pytest.raises(ParameterError):
        integrate_propagator(hp, cfg, [0.5, 0.2])
    with pytest.raises(ParameterError):
        integrate_propagator(hp, cfg, [0.0, 2.0])


def test_config_validation():
    with pytest.raises(ParameterError):
        IntegrationConfig(t_max=0.0)
    with pytest.raises(ParameterError):
        IntegrationConfig(t_max=1.0, abs_tol=1e-2)
    with pytest.raises(ParameterError):
        IntegrationConfig(t_max=1.0, rel_tol=0.0)
    with pytest.raises(ParameterError):
        IntegrationConfig(t_max=1.0, method="euler")
    with pytest.raises(ParameterError):
        IntegrationConfig(t_max=1.0, method=FIXED_RK4)


def test_characteristic_time():
    assert characteristic_time(3.0, 5.0, -7.0) == pytest.approx(2 * np.pi / 7)
    assert characteristic_time() == pytest.approx(2 * np.pi)


def test_stiffness_error_carries_time(monkeypatch):
    class Failed:
        status = -1
        message = "Required step size is less than spacing between numbers."
        t = np.array([0.0, 0.25, 0.5])

    monkeypatch.setattr(oracle, "solve_ivp", lambda *a, **k: Failed())
    with pytest.raises(StiffnessError) as exc:
        integrate_propagator(HamiltonianParams(0.0, lambda s: 1.0 + 0 * s), IntegrationConfig(t_max=1.0))
    assert exc.value.time == 0.5


def test_circular_against_integrator():
    fam = circular()
    t = period_grid(fam, n=400)
    _, u = integrate_propagator(fam.hamiltonian_params(), default_config(fam), t)
    assert np.max(np.abs(u - fam.propagator(t))) < 1e-8


def test_oscillating_against_integrator():
    fam = oscillating(SQRT5, 4.0, 0.6)
    t = np.linspace(0, 5 * np.pi / fam.omega, 400)
    _, u = integrate_propagator(fam.hamiltonian_params(), default_config(fam), t)
    assert np.max(np.abs(u - fam.propagator(t))) < 1e-8


def test_determinant_preserved(family):
    # det drift tracks the global error, about 10x the tolerances over 5 periods
    cfg = default_config(family, abs_tol=1e-11, rel_tol=1e-11)
    _, u = integrate_propagator(family.hamiltonian_params(), cfg, np.linspace(0, cfg.t_max, 200))
    assert np.max(np.abs(np.linalg.det(u) - 1)) < 1e-9


def fixed_step_errors(fam, steps, t_max):
    grid = np.linspace(0, t_max, 11)
    exact = fam.propagator(grid)
    errors = []
    for h in steps:
        cfg = IntegrationConfig(t_max=t_max, method=FIXED_RK4, max_step=h)
        _, u = integrate_propagator(fam.hamiltonian_params(), cfg, grid)
        errors.append(np.max(np.abs(u - exact)))
    return np.array(errors)


@pytest.mark.parametrize("make", [circular, oscillating, decaying])
def test_rk4_convergence(make):
    fam = make()
    h0 = 0.1 / max(fam.Omega0, getattr(fam, "omega", 0.0))
    errors = fixed_step_errors(fam, h0 / 2 ** np.arange(4), fam.characteristic_period)
    assert np.all(errors[:-1] / errors[1:] >= 8)


def test_verify_circular_passes():
    fam = circular(0.7 - 0.2j, -1.5, 0.9)
    report = verify_family(fam, default_config(fam))
    assert report.passed
    d = report.as_dict()
    assert d["pass"] and d["n_grid"] == 201
    for key in ("max_unitarity_defect", "max_propagator_error", "max_ermakov_residual", "max_schrodinger_residual"):
        assert d[key] >= 0


def test_verify_decaying_long_horizon():
    fam = decaying(0.5, 1.0)
    report = verify_family(fam, default_config(fam, t_max=20 / fam.Omega0))
    assert report.passed, report.as_dict()


@pytest.mark.parametrize("name", sorted(ACCEPTANCE_FAMILIES))
def test_verify_detects_corrupted_alpha(name):
    fam = ACCEPTANCE_FAMILIES[name]()
    report = verify_family(fam.corrupted(1.01), default_config(fam))
    assert not report.passed
    assert report.max_propagator_error > 1e-3


def test_thresholds_override():
    fam = circular()
    report = verify_family(fam, default_config(fam), thresholds={"propagator": 1e-30})
    assert not report.passed
    assert report.thresholds["unitarity"] == 1e-10


def _sweep(seed=20261019, draws=20):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < draws:
        g = rng.uniform(0.1, 10) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        delta = rng.uniform(-10, 10)
        kappa = float(np.exp(rng.uniform(np.log(0.05), np.log(20))))
        Delta = rng.uniform(-5, 5)
        if abs(delta) < 1e-6:
            continue
        out.append((g, delta, kappa, Delta))
    return out


@pytest.mark.parametrize("g,delta,kappa,Delta", _sweep())
def test_randomized_sweep(g, delta, kappa, Delta):
    for fam in (circular(g, delta, Delta), decaying(g, delta, Delta), oscillating(g, delta, kappa, Delta)):
        report = verify_family(fam, default_config(fam))
        assert report.passed, (fam.name, report.as_dict())
