import numpy as np
import pytest
from scipy.integrate import solve_ivp

from conftest import ACCEPTANCE_FAMILIES, SQRT5, circular, decaying, oscillating, period_grid
from ermakovqubit.errors import InvalidPairingError, ParameterError, SingularityError
from ermakovqubit.factorization import (
    FieldSpec,
    OscillatorSolution,
    beta_quadrature,
    factorize_direct,
    frequency_from_field,
)
from ermakovqubit.su2 import build_hamiltonian, compose_propagator, unitarity_defect


def reference_propagator(params, t_end, rtol=1e-12, atol=1e-13):
    def rhs(t, y):
        return (-1j * build_hamiltonian(params, t) @ y.reshape(2, 2)).ravel()

    sol = solve_ivp(rhs, (0, t_end), np.eye(2, dtype=complex).ravel(), method="DOP853", rtol=rtol, atol=atol)
    return sol.y[:, -1].reshape(2, 2)


def test_frequency_circular_example():
    fam = circular()
    t = np.linspace(0, 3, 50)
    assert np.allclose(frequency_from_field(fam.field_spec(), t), 9.0, atol=1e-12)
    assert np.allclose(frequency_from_field(fam.field_spec(analytic=False), t), 9.0, atol=1e-6)


def test_frequency_constant_real_field():
    spec = FieldSpec(R=lambda t: np.full(np.shape(t), 1.7 + 0j))
    assert np.allclose(frequency_from_field(spec, np.linspace(0, 2, 11)), 1.7**2)


@pytest.mark.parametrize("delta", [0.01, 1.0, 2.0])
def test_frequency_decaying_is_zero(delta):
    fam = decaying(delta=delta)
    t = period_grid(fam)
    assert np.max(np.abs(frequency_from_field(fam.field_spec(analytic=False), t))) < 1e-6


def test_frequency_singular_field():
    spec = FieldSpec(R=lambda t: np.where(np.asarray(t) > 0.5, 0.0, 1.0) + 0j)
    with pytest.raises(SingularityError):
        frequency_from_field(spec, np.array([0.0, 1.0]))
    with pytest.raises(ParameterError):
        FieldSpec(R=lambda t: 0j * np.asarray(t))


@pytest.mark.parametrize("kappa", [0.25, 0.6, 1.0, 3.1, 20.0])
@pytest.mark.parametrize("g,delta", [(SQRT5, 4.0), (0.3 + 0.8j, -2.5), (6.0, 0.5)])
def test_frequency_round_trip(g, delta, kappa):
    fam = oscillating(g, delta, kappa, Delta=1.3)
    t = period_grid(fam)
    w2 = frequency_from_field(fam.field_spec(analytic=False), t)
    assert np.max(np.abs(w2 - fam.omega**2)) < 1e-6


def test_direct_triple_against_integrator():
    fam = oscillating(SQRT5, 4.0, 0.6, Delta=1.0)
    u = reference_propagator(fam.hamiltonian_params(), 0.1)
    alpha_ref, beta_ref = u[0, 1] / u[1, 1], u[1, 0] / u[1, 1]
    delta_f_ref = -2 * np.log(u[1, 1])
    for phi in (fam.oscillator(), fam.oscillator(closed_form=False)):
        for spec in (fam.field_spec(), fam.field_spec(analytic=False)):
            f = factorize_direct(spec, phi, np.array([0.1]))
            assert abs(f.alpha[0] - alpha_ref) < 1e-8
            assert abs(f.beta[0] - beta_ref) < 1e-8
            assert abs(f.delta_f[0] - delta_f_ref) < 1e-8


def test_direct_at_origin():
    fam = oscillating()
    f = factorize_direct(fam.field_spec(), fam.oscillator(), np.array([0.0]))
    assert f.alpha[0] == 0 and f.delta_f[0] == 0 and f.beta[0] == 0


def test_direct_reproduces_circular_closed_forms():
    fam = circular(Delta=0.7)
    t = period_grid(fam)
    f = factorize_direct(fam.field_spec(), fam.oscillator(closed_form=False), t)
    assert np.max(np.abs(f.alpha - fam.alpha(t))) < 1e-9
    assert np.max(np.abs(f.beta - fam.beta(t))) < 1e-9
    assert np.max(np.abs(f.delta_f - fam.delta_f(t))) < 1e-9


def test_oscillating_beta_display():
    fam = oscillating(1.2 - 0.4j, 3.0, 0.7)
    t = np.linspace(0, 2, 40)
    w1, d, g = fam.omega, 3.0, fam.params.g
    expected = -2j * np.conj(g) * np.sin(w1 * t) / (2 * w1 * np.cos(w1 * t) - 1j * d * np.sin(w1 * t))
    generic = OscillatorSolution(fam.phi, fam.phi_prime)
    assert np.max(np.abs(beta_quadrature(generic, fam.R0, t) - expected)) < 1e-10
    assert beta_quadrature(generic, fam.R0, 0.0) == 0


def test_beta_against_trapezoid():
    rng = np.random.default_rng(11)
    t_end = 1.5
    while True:
        coef = np.concatenate(([1.0], rng.normal(size=3) + 1j * rng.normal(size=3)))
        phi = np.polynomial.Polynomial(coef)
        grid = np.linspace(0, t_end, 1_000_001)
        if np.min(np.abs(phi(grid))) > 0.2 and abs(coef[1:].imag).min() > 0.1:
            break
    osc = OscillatorSolution(lambda t: phi(np.asarray(t, float)), lambda t: phi.deriv()(np.asarray(t, float)))
    r0 = 0.4 - 1.1j
    ref = r0 * np.trapezoid(1 / phi(grid) ** 2, grid)
    assert abs(beta_quadrature(osc, r0, t_end) - ref) < 1e-9


def test_beta_pole_detected():
    osc = OscillatorSolution(lambda t: 1 - np.asarray(t, float) + 0j, lambda t: -np.ones(np.shape(t)) + 0j)
    with pytest.raises(SingularityError) as exc:
        beta_quadrature(osc, 1.0, np.array([0.5, 2.0]))
    assert abs(exc.value.location - 1.0) < 1e-3


def test_zero_of_phi_reported():
    fam = circular(g=1.0, delta=0.0)
    with pytest.raises(SingularityError) as exc:
        factorize_direct(fam.field_spec(), fam.oscillator(closed_form=False), np.linspace(0, 2, 20))
    assert abs(exc.value.location - np.pi / 2) < 1e-3


def test_invalid_pairing():
    fam = oscillating()
    wrong = OscillatorSolution(lambda t: np.cos(np.asarray(t, float)) + 0j, lambda t: -np.sin(np.asarray(t, float)) + 0j)
    with pytest.raises(InvalidPairingError):
        factorize_direct(fam.field_spec(), wrong, np.array([0.1]))


def test_phi_normalization():
    with pytest.raises(ParameterError):
        OscillatorSolution(lambda t: 2 + 0 * np.asarray(t), lambda t: 0 * np.asarray(t))


@pytest.mark.parametrize("name", sorted(ACCEPTANCE_FAMILIES))
def test_reconstruction_identity(name):
    fam = ACCEPTANCE_FAMILIES[name]()
    t = period_grid(fam, n=200)[1:]
    h = 1e-5 * fam.characteristic_period
    spec, phi = fam.field_spec(), fam.oscillator()

    def u(s):
        return factorize_direct(spec, phi, s).propagator()

    du = (u(t + h) - u(t - h)) / (2 * h)
    hu = build_hamiltonian(fam.hamiltonian_params(), t) @ u(t)
    assert np.max(np.abs(1j * du - hu)) < 1e-7


def test_unitarity_all_families(family):
    t = period_grid(family)
    assert np.max(unitarity_defect(family.propagator(t))) < 1e-10


@pytest.mark.parametrize("name", sorted(ACCEPTANCE_FAMILIES))
def test_branch_continuity(name):
    fam = ACCEPTANCE_FAMILIES[name]()
    t = np.linspace(0, 10 * fam.characteristic_period, 10_001)
    # generic logs; β from its closed form keeps the run short
    phi = OscillatorSolution(fam.phi, fam.phi_prime, inv_sq_integral=fam.inv_sq_integral)
    generic = factorize_direct(fam.field_spec(analytic=False), phi, t).delta_f
    assert np.max(np.abs(generic - fam.delta_f(t))) < 1e-8
    for df in (fam.delta_f(t), generic):
        assert np.max(np.abs(np.diff(df))) < np.pi / 2


def test_branch_continuity_winds():
    # arg φ keeps growing, so a principal-branch log would jump by 2π
    fam = oscillating(Delta=3.0)
    t = np.linspace(0, 20 * fam.characteristic_period, 20_001)
    log_phi = fam.log_phi(t)
    assert np.ptp(log_phi.imag) > 10 * np.pi
    assert np.max(np.abs(np.diff(log_phi))) < np.pi / 2
    assert np.allclose(np.exp(log_phi), fam.phi(t), atol=1e-12)
    df = fam.delta_f(t)
    assert np.allclose(compose_propagator(0, df, 0)[..., 1, 1], np.exp(-df / 2))


@pytest.mark.parametrize("name", sorted(ACCEPTANCE_FAMILIES))
def test_mu_form_agrees_with_direct(name):
    fam = ACCEPTANCE_FAMILIES[name]()
    t = period_grid(fam)
    direct = factorize_direct(fam.field_spec(), fam.oscillator(), t)
    mu_form = fam.generic_factorization(t, closed_form=True)
    for a, b in zip(direct, mu_form):
        assert np.max(np.abs(a - b)) < 1e-9
