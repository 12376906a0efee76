"""Hubbard (X-operator) algebra for a qubit, the driven Hamiltonian, and the
disentangled propagator U = exp(α X^{pq}) exp(Δf J0) exp(β X^{qp}).

Basis ordering is (|p>, |q>) = (upper, lower), i.e. matrix rows 0 and 1.
Units have ħ = 1. Matrices are plain ``numpy`` arrays of shape (..., 2, 2).
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import EvaluationError, ParameterError, PropagatorRangeError

LEVELS = ("p", "q")
MAX_RE_DELTA_F = 50.0


class HubbardIndex(NamedTuple):
    row: str
    col: str

    def matrix(self):
        """The 2x2 matrix |row><col|."""
        out = np.zeros((2, 2), dtype=complex)
        out[LEVELS.index(self.row), LEVELS.index(self.col)] = 1.0
        return out

    @property
    def dagger(self):
        return HubbardIndex(self.col, self.row)


def hubbard_indices():
    """All four index pairs X^{k,l} with k, l in {p, q}."""
    return [HubbardIndex(k, l) for k in LEVELS for l in LEVELS]


def hubbard_product(a: HubbardIndex, b: HubbardIndex) -> Optional[HubbardIndex]:
    """X^{i,j} X^{k,m} = δ_{jk} X^{i,m}; ``None`` stands for the zero operator."""
    for label in (*a, *b):
        if label not in LEVELS:
            raise ParameterError(f"unknown level label {label!r}")
    if a.col != b.row:
        return None
    return HubbardIndex(a.row, b.col)


X_PP = HubbardIndex("p", "p").matrix()
X_QQ = HubbardIndex("q", "q").matrix()
X_PQ = HubbardIndex("p", "q").matrix()
X_QP = HubbardIndex("q", "p").matrix()
J0 = 0.5 * (X_PP - X_QQ)
J_PLUS = X_PQ
J_MINUS = X_QP


@dataclass(frozen=True)
class HamiltonianParams:
    """Level splitting ``Delta`` and complex driving field ``V(t)``."""

    Delta: float
    V: Callable

    def __post_init__(self):
        if not np.isfinite(self.Delta):
            raise ParameterError("Delta must be finite")


def build_hamiltonian(params: HamiltonianParams, t):
    """H(t) = (Δ/2)(X^pp - X^qq) + V X^pq + conj(V) X^qp.

    ``t`` may be a scalar or an array; the result has shape t.shape + (2, 2).
    """
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ParameterError("t must be finite")
    v = np.asarray(params.V(t), dtype=complex)
    if not np.all(np.isfinite(v)):
        raise EvaluationError("V(t) is not finite")
    v = np.broadcast_to(v, t.shape)
    h = np.zeros(t.shape + (2, 2), dtype=complex)
    h[..., 0, 0] = 0.5 * params.Delta
    h[..., 1, 1] = -0.5 * params.Delta
    h[..., 0, 1] = v
    h[..., 1, 0] = np.conj(v)
    return h


def compose_propagator(alpha, delta_f, beta):
    """Multiply out the three disentangled factors into an explicit matrix.

    Inputs broadcast; ``delta_f`` must already be on a continuous branch if the
    caller cares about Δf itself (the matrix only depends on e^{±Δf/2}).
    """
    alpha, delta_f, beta = np.broadcast_arrays(
        np.asarray(alpha, dtype=complex),
        np.asarray(delta_f, dtype=complex),
        np.asarray(beta, dtype=complex),
    )
    if np.any(np.abs(delta_f.real) > MAX_RE_DELTA_F):
        raise PropagatorRangeError(f"|Re Δf| exceeds {MAX_RE_DELTA_F}")
    plus = np.exp(0.5 * delta_f)
    minus = np.exp(-0.5 * delta_f)
    u = np.empty(alpha.shape + (2, 2), dtype=complex)
    u[..., 0, 0] = plus + alpha * beta * minus
    u[..., 0, 1] = alpha * minus
    u[..., 1, 0] = beta * minus
    u[..., 1, 1] = minus
    return u


def unitarity_defect(u):
    """max-abs entry of U†U - 1 (per matrix when batched)."""
    u = np.asarray(u)
    gram = np.conj(np.swapaxes(u, -1, -2)) @ u
    return np.max(np.abs(gram - np.eye(2)), axis=(-2, -1))


@dataclass(frozen=True)
class QubitState:
    """Amplitudes on (|p>, |q>); ``unitarity_warning`` marks a suspect propagator."""

    cp: complex
    cq: complex
    unitarity_warning: bool = False

    @classmethod
    def upper(cls):
        return cls(1.0 + 0j, 0j)

    @classmethod
    def lower(cls):
        return cls(0j, 1.0 + 0j)

    @property
    def vector(self):
        return np.array([self.cp, self.cq], dtype=complex)

    @property
    def norm(self):
        return float(np.hypot(abs(self.cp), abs(self.cq)))

    @property
    def populations(self):
        return abs(self.cp) ** 2, abs(self.cq) ** 2

    @property
    def inversion(self):
        pp, pq = self.populations
        return pp - pq


def evolve_state(u, psi0: QubitState, tol=1e-10) -> QubitState:
    """Apply a single 2x2 propagator to a normalized state."""
    if abs(psi0.norm - 1.0) > 1e-12:
        raise ParameterError(f"initial state is not normalized (norm={psi0.norm!r})")
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ParameterError("evolve_state expects a single 2x2 matrix")
    cp, cq = u @ psi0.vector
    return QubitState(complex(cp), complex(cq), bool(unitarity_defect(u) > tol))
