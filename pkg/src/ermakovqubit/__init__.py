"""Exactly solvable qubit driving fields from the Ermakov equation, with
closed-form propagators and a numerical oracle to check them."""

from .ermakov import check_periodicity, map_initial_data, mu_factorization, pinney_mu, synthesize_field
from .factorization import FieldSpec, OscillatorSolution, factorize_direct, frequency_from_field
from .families import (
    CircularFamily,
    DecayingFamily,
    FamilyParams,
    OscillatingFamily,
    PinneyFamily,
    eta,
    make_family,
)
from .oracle import IntegrationConfig, integrate_propagator, verify_family
from .su2 import HamiltonianParams, QubitState, build_hamiltonian, compose_propagator, evolve_state

__version__ = "0.1.0"
