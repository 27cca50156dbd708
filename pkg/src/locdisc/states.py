"""Bipartite pure states and the linear algebra the rest of the package needs.

Amplitudes are stored row-major with Alice's index first, so the amplitude of
``|m>_A |n>_B`` sits at position ``m * dim_b + n``.  Every :class:`StateVector`
is normalized on construction and carries a canonical global phase (the first
amplitude with non-negligible modulus is real and non-negative), which makes
two representations of the same ray compare equal entry by entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

RANK_TOL = 1e-9
PHASE_TOL = 1e-12
NULL_TOL = 1e-12

Party = Literal["A", "B"]


class DimensionError(ValueError):
    """Raised when subsystem dimensions do not fit together."""


def _canonical(vec: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(vec)
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("cannot normalize a zero or non-finite vector")
    vec = vec / norm
    big = np.flatnonzero(np.abs(vec) > PHASE_TOL)
    if big.size:
        lead = vec[big[0]]
        vec = vec * (abs(lead) / lead)
    return vec


@dataclass(frozen=True, eq=False)
class StateVector:
    """A normalized pure state on ``C^dim_a (x) C^dim_b``.

    Inputs may be unnormalized; they are rescaled to unit norm and rotated to
    the canonical global phase.  The amplitude array is read-only.
    """

    dim_a: int
    dim_b: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if int(self.dim_a) < 1 or int(self.dim_b) < 1:
            raise DimensionError("subsystem dimensions must be positive")
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amps.size != self.dim_a * self.dim_b:
            raise DimensionError(
                f"expected {self.dim_a * self.dim_b} amplitudes, got {amps.size}"
            )
        amps = _canonical(amps)
        amps.setflags(write=False)
        object.__setattr__(self, "dim_a", int(self.dim_a))
        object.__setattr__(self, "dim_b", int(self.dim_b))
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, m: int, n: int, dim_a: int, dim_b: int) -> "StateVector":
        """The product basis state ``|m>_A |n>_B``."""
        if not (0 <= m < dim_a and 0 <= n < dim_b):
            raise DimensionError(f"|{m}{n}> does not fit in {dim_a}x{dim_b}")
        amps = np.zeros(dim_a * dim_b, dtype=complex)
        amps[m * dim_b + n] = 1.0
        return cls(dim_a, dim_b, amps)

    @classmethod
    def product(cls, alpha, beta) -> "StateVector":
        """The product state ``|alpha>|beta>``."""
        alpha = np.asarray(alpha, dtype=complex).ravel()
        beta = np.asarray(beta, dtype=complex).ravel()
        return cls(alpha.size, beta.size, np.kron(alpha, beta))

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)

    def matrix(self) -> np.ndarray:
        """Coefficient matrix ``M[m, n]`` (a fresh, writable copy)."""
        return self.amplitudes.reshape(self.dim_a, self.dim_b).copy()

    def allclose(self, other: "StateVector", atol: float = 1e-9) -> bool:
        """Equality of rays, i.e. up to global phase."""
        if self.dims != other.dims:
            return False
        return abs(abs(np.vdot(self.amplitudes, other.amplitudes)) - 1.0) < atol

    def __repr__(self):
        return f"StateVector({self.dim_a}x{self.dim_b}, {np.round(self.amplitudes, 6)!r})"


def epr() -> StateVector:
    """The two-qubit resource ``(|00> + |11>)/sqrt(2)``."""
    return StateVector(2, 2, [1, 0, 0, 1])


def to_coefficient_matrix(x: StateVector) -> np.ndarray:
    return x.matrix()


def from_coefficient_matrix(m) -> StateVector:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise DimensionError("coefficient matrix must be two-dimensional")
    return StateVector(m.shape[0], m.shape[1], m.ravel())


def tensor_product(left: StateVector, right: StateVector) -> StateVector:
    """Compose two bipartite states, grouping Alice's factors and Bob's factors.

    The result lives on ``(A_left A_right) (x) (B_left B_right)``; Alice's
    composite index is ``m_left * dim_a(right) + m_right`` and likewise for Bob.
    """
    ml, mr = left.matrix(), right.matrix()
    out = np.einsum("ij,kl->ikjl", ml, mr).reshape(
        left.dim_a * right.dim_a, left.dim_b * right.dim_b
    )
    return from_coefficient_matrix(out)


def inner_product(x: StateVector, y: StateVector) -> complex:
    """``<x|y>``, conjugate-linear in ``x``."""
    if x.dims != y.dims:
        raise DimensionError(f"dimension mismatch {x.dims} vs {y.dims}")
    return complex(np.vdot(x.amplitudes, y.amplitudes))


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """``x = sum_i coefficients[i] * alice_vectors[:, i] (x) bob_vectors[:, i]``.

    All ``min(dim_a, dim_b)`` coefficients are kept in descending order;
    ``rank`` counts those above :data:`RANK_TOL`.
    """

    coefficients: np.ndarray
    alice_vectors: np.ndarray
    bob_vectors: np.ndarray
    rank: int

    def reconstruct(self) -> np.ndarray:
        """Coefficient matrix rebuilt from the decomposition."""
        return (self.alice_vectors * self.coefficients) @ self.bob_vectors.T


def schmidt_decompose(x: StateVector) -> SchmidtDecomposition:
    u, s, vh = np.linalg.svd(x.matrix(), full_matrices=False)
    rank = int(np.count_nonzero(s > RANK_TOL))
    return SchmidtDecomposition(s, u, vh.T, rank)


def schmidt_coefficients(x: StateVector) -> np.ndarray:
    return np.linalg.svd(x.matrix(), compute_uv=False)


def apply_local_operator(
    x: StateVector, op, party: Party
) -> tuple[StateVector | None, float]:
    """Apply a local operator to one party and renormalize.

    Returns the post-measurement state and the probability ``||(op) x||^2``.
    A probability below :data:`NULL_TOL` yields ``(None, probability)``.
    """
    op = np.asarray(op, dtype=complex)
    m = x.matrix()
    if party == "A":
        if op.shape[1] != x.dim_a:
            raise DimensionError(f"operator {op.shape} does not act on Alice's dim {x.dim_a}")
        out = op @ m
    elif party == "B":
        if op.shape[1] != x.dim_b:
            raise DimensionError(f"operator {op.shape} does not act on Bob's dim {x.dim_b}")
        out = m @ op.T
    else:
        raise ValueError(f"unknown party {party!r}")
    prob = float(np.vdot(out, out).real)
    if prob < NULL_TOL:
        return None, prob
    return from_coefficient_matrix(out), prob


def local_unitary(x: StateVector, ua=None, ub=None) -> StateVector:
    """``(ua (x) ub) x``; either factor may be omitted."""
    m = x.matrix()
    if ua is not None:
        m = np.asarray(ua) @ m
    if ub is not None:
        m = m @ np.asarray(ub).T
    return from_coefficient_matrix(m)
