"""Generators for the locally indistinguishable state sets.

Every set holds ``d`` entangled states together with the product state
``|01>``.  The Fourier family uses ``omega = exp(2 pi i / d)``; the 4x4 sign
family uses real +-1 phases; the non-maximal family mixes two-level blocks
with real weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .states import DimensionError, StateVector, inner_product

ORTHO_TOL = 1e-9

FAMILY_TAGS = ("canonical-d", "hadamard-4", "nonmax", "two-qubit", "extended", "custom")

# Rows of the 4x4 sign pattern; each row is (+-1)^(linear function of the bits of j).
HADAMARD_SIGNS = np.array(
    [
        [1, 1, 1, 1],
        [1, 1, -1, -1],
        [1, -1, -1, 1],
        [1, -1, 1, -1],
    ],
    dtype=float,
)


@dataclass(frozen=True, eq=False)
class StateSet:
    """An ordered set of mutually orthogonal states with shared dimensions."""

    states: tuple[StateVector, ...]
    family_tag: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        states = tuple(self.states)
        object.__setattr__(self, "states", states)
        if len(states) < 2:
            raise ValueError("a state set needs at least two states")
        if self.family_tag not in FAMILY_TAGS:
            raise ValueError(f"unknown family tag {self.family_tag!r}")
        dims = states[0].dims
        if any(s.dims != dims for s in states):
            raise DimensionError("all states of a set must share dimensions")
        gram = self.gram()
        off = np.abs(gram - np.eye(len(states)))
        if off.max() > ORTHO_TOL:
            i, j = np.unravel_index(np.argmax(off), off.shape)
            raise ValueError(f"states {i} and {j} are not orthogonal (|<.|.>| = {off[i, j]:.3g})")

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]

    def __iter__(self):
        return iter(self.states)

    @property
    def dims(self) -> tuple[int, int]:
        return self.states[0].dims

    def gram(self) -> np.ndarray:
        amps = np.array([s.amplitudes for s in self.states])
        return amps.conj() @ amps.T


@dataclass(frozen=True)
class NonMaxParams:
    """Real weights of the non-maximal construction, all strictly inside (0, 1).

    ``(a, b)`` and ``(c, d)`` weight the two-level blocks; ``(e, f)`` and
    ``(g, h)`` mix them.  Each pair must lie on the unit circle.
    """

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    g: float
    h: float

    def __post_init__(self):
        for name, v in self.as_dict().items():
            if not (0.0 < v < 1.0):
                raise ValueError(f"parameter {name}={v} must lie strictly inside (0, 1)")
        for p, q in ("ab", "cd", "ef", "gh"):
            s = getattr(self, p) ** 2 + getattr(self, q) ** 2
            if abs(s - 1.0) > 1e-12:
                raise ValueError(f"{p}^2 + {q}^2 = {s!r}, expected 1")

    def as_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in "abcdefgh"}

    @classmethod
    def symmetric(cls) -> "NonMaxParams":
        r = 1 / math.sqrt(2)
        return cls(r, r, r, r, r, r, r, r)

    @classmethod
    def from_angles(cls, t1, t2, t3, t4) -> "NonMaxParams":
        """Pairs ``(cos t, sin t)``; every angle must lie in ``(0, pi/2)``."""
        vals = []
        for t in (t1, t2, t3, t4):
            vals += [math.cos(t), math.sin(t)]
        return cls(*vals)

    @classmethod
    def random(cls, rng: np.random.Generator, margin: float = 0.05) -> "NonMaxParams":
        ts = rng.uniform(margin, math.pi / 2 - margin, size=4)
        return cls.from_angles(*ts)


def fourier_phase(d: int) -> complex:
    return complex(np.exp(2j * np.pi / d))


def _diag_state(weights) -> StateVector:
    weights = np.asarray(weights, dtype=complex)
    return StateVector(weights.size, weights.size, np.diag(weights).ravel())


def gen_canonical_set(d: int) -> StateSet:
    """``d`` Fourier maximally entangled states followed by ``|01>``.

    Entry ``k`` (0-based, ``k < d``) is ``sum_j omega^(k j) |jj>``.
    """
    if int(d) != d or d < 2:
        raise ValueError(f"subsystem dimension must be an integer >= 2, got {d}")
    d = int(d)
    j = np.arange(d)
    states = [_diag_state(fourier_phase(d) ** (k * j)) for k in range(d)]
    states.append(StateVector.basis(0, 1, d, d))
    tag = "two-qubit" if d == 2 else "canonical-d"
    return StateSet(tuple(states), tag, {"d": d})


def gen_hadamard_set_4x4() -> StateSet:
    states = [_diag_state(row) for row in HADAMARD_SIGNS]
    states.append(StateVector.basis(0, 1, 4, 4))
    return StateSet(tuple(states), "hadamard-4", {"d": 4})


def nonmax_weights(p: NonMaxParams) -> np.ndarray:
    """Diagonal weights of the four entangled states, one row each."""
    phi = np.array(
        [
            [p.a, p.b, 0, 0],
            [p.b, -p.a, 0, 0],
            [0, 0, p.c, p.d],
            [0, 0, p.d, -p.c],
        ]
    )
    return np.array(
        [
            p.e * phi[0] + p.f * phi[2],
            p.f * phi[0] - p.e * phi[2],
            p.g * phi[1] + p.h * phi[3],
            p.h * phi[1] - p.g * phi[3],
        ]
    )


def gen_nonmax_set(p: NonMaxParams) -> StateSet:
    states = [_diag_state(w) for w in nonmax_weights(p)]
    states.append(StateVector.basis(0, 1, 4, 4))
    return StateSet(tuple(states), "nonmax", p.as_dict())


def extend_with_product(s: StateSet, ket: tuple[int, int]) -> StateSet:
    """Append the basis product state ``|m n>``; it must be orthogonal to every member."""
    m, n = ket
    new = StateVector.basis(m, n, *s.dims)
    for i, st in enumerate(s.states):
        ov = abs(inner_product(new, st))
        if ov > ORTHO_TOL:
            raise ValueError(f"|{m}{n}> overlaps state {i} (|<.|.>| = {ov:.3g})")
    params = {"base_family": s.family_tag, "base_params": dict(s.params), "ket": [m, n]}
    return StateSet(s.states + (new,), "extended", params)


def subset(s: StateSet, indices: Sequence[int]) -> StateSet:
    indices = [int(i) for i in indices]
    if len(indices) < 2:
        raise ValueError("a subset needs at least two indices")
    for i in indices:
        if not 0 <= i < len(s):
            raise IndexError(f"index {i} out of range for a set of {len(s)} states")
    params = {"parent_family": s.family_tag, "parent_params": dict(s.params), "indices": indices}
    return StateSet(tuple(s.states[i] for i in indices), "custom", params)
