"""Entanglement measures, conversion to an EPR pair, and the assisted Monte Carlo pipeline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import Protocol, run_protocol
from .families import StateSet
from .states import (
    RANK_TOL,
    StateVector,
    apply_local_operator,
    local_unitary,
    schmidt_coefficients,
    schmidt_decompose,
)
from .builders import attach_resource


def schmidt_rank(x: StateVector) -> int:
    return int(np.count_nonzero(schmidt_coefficients(x) > RANK_TOL))


def entanglement_entropy(x: StateVector) -> float:
    """Entropy of entanglement in bits (0 log 0 = 0)."""
    p = schmidt_coefficients(x) ** 2
    p = p[p > 0]
    return float(max(0.0, -(p * np.log2(p)).sum()))


def average_entanglement(s: StateSet) -> float:
    return float(np.mean([entanglement_entropy(x) for x in s.states]))


def vidal_probability(resource: StateVector) -> float:
    """Optimal LOCC probability of reaching ``(|00> + |11>)/sqrt(2)`` from one copy.

    With squared Schmidt coefficients ``l1 >= l2 >= ...`` this is
    ``min(1, 2 * (1 - l1))``.
    """
    lam = schmidt_coefficients(resource) ** 2
    if lam.size < 2:
        return 0.0
    tail = float(lam[1:].sum())
    if tail < RANK_TOL**2:
        return 0.0
    return _snap(min(1.0, 2.0 * tail))


def _snap(p: float) -> float:
    return 1.0 if abs(p - 1.0) < 1e-12 else p


@dataclass(frozen=True, eq=False)
class ConversionResult:
    probability: float
    success_kraus: np.ndarray | None = None
    failure_kraus: np.ndarray | None = None

    def apply(self, resource: StateVector):
        """``(success_state, p_success), (failure_state, p_failure)``; null branches give ``None``."""
        return (
            apply_local_operator(resource, self.success_kraus, "A"),
            apply_local_operator(resource, self.failure_kraus, "A"),
        )


def conversion_filter(resource: StateVector) -> ConversionResult:
    """Two-outcome Alice filter that turns a Schmidt-rank-2 state into a maximally entangled one.

    In Alice's Schmidt basis the success operator is ``diag(s2/s1, 1)`` and the
    failure operator ``diag(sqrt(1 - (s2/s1)^2), 0)``; outside the Schmidt span
    the success operator acts as the identity.  The failure branch leaves a
    product state.
    """
    sd = schmidt_decompose(resource)
    if sd.rank != 2:
        raise ValueError(f"explicit filter only for Schmidt rank 2 (got rank {sd.rank}); use vidal_probability")
    s1, s2 = sd.coefficients[:2]
    a = sd.alice_vectors[:, :2]
    ratio = s2 / s1
    outside = np.eye(resource.dim_a) - a @ a.conj().T
    ks = outside + a @ np.diag([ratio, 1.0]) @ a.conj().T
    kf = a @ np.diag([math.sqrt(max(0.0, 1.0 - ratio**2)), 0.0]) @ a.conj().T
    return ConversionResult(_snap(2.0 * s2**2), ks, kf)


def to_canonical_epr(x: StateVector) -> StateVector:
    """Rotate a two-qubit maximally entangled state onto ``(|00> + |11>)/sqrt(2)`` by local unitaries."""
    sd = schmidt_decompose(x)
    if x.dims != (2, 2):
        # restrict to the Schmidt span so the result is a two-qubit state
        m = sd.alice_vectors[:, :2].conj().T @ x.matrix() @ sd.bob_vectors[:, :2].conj()
        return StateVector(2, 2, m.ravel())
    return local_unitary(x, sd.alice_vectors.conj().T, sd.bob_vectors.conj().T)


@dataclass
class MonteCarloResult:
    estimate: float
    standard_error: float
    inconclusive_rate: float
    error_rate: float
    trials: int
    seed: int
    conversion_probability: float


def _branch_tables(s: StateSet, resource: StateVector, protocol: Protocol):
    probs, decodes = [], []
    lifted = attach_resource(s, resource)
    for x in lifted.states:
        branches = run_protocol(protocol, x)
        p = np.array([b.probability for b in branches])
        probs.append(np.cumsum(p / p.sum()))
        decodes.append([b.decode for b in branches])
    return probs, decodes


def trial_uniforms(seed: int, trial: int) -> np.ndarray:
    """Three uniforms for one trial, from a substream fixed by ``(seed, trial)``."""
    return np.random.default_rng([seed, trial]).random(3)


def mc_assisted_discrimination(
    s: StateSet, resource: StateVector, protocol: Protocol, trials: int, seed: int = 0
) -> MonteCarloResult:
    """Estimate conclusive success of filter-then-discriminate with a pure resource.

    Each trial draws a member uniformly, runs the conversion filter on the
    resource and, on success, samples a branch of ``protocol`` on the member
    together with the converted resource; on failure the trial is
    inconclusive.  ``protocol`` must act on ``s (x) EPR``.  Randomness for trial
    ``t`` depends only on ``(seed, t)``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    p_conv = vidal_probability(resource)
    if p_conv == 0.0:
        raise ValueError("product resource: conversion succeeds with probability 0, pipeline is vacuous")
    if schmidt_rank(resource) == 2:
        conv = conversion_filter(resource)
        (converted, _), _ = conv.apply(resource)
        p_conv = conv.probability
        converted = to_canonical_epr(converted)
    else:
        # no explicit filter beyond rank 2; the converted state is taken as the ideal EPR pair
        converted = StateVector(2, 2, [1, 0, 0, 1])
    cum, decodes = _branch_tables(s, converted, protocol)

    n = len(s)
    success = inconclusive = errors = 0
    for t in range(trials):
        u = trial_uniforms(seed, t)
        member = min(int(u[0] * n), n - 1)
        if u[1] >= p_conv:
            inconclusive += 1
            continue
        k = min(int(np.searchsorted(cum[member], u[2], side="right")), len(cum[member]) - 1)
        dec = decodes[member][k]
        if dec is None:
            inconclusive += 1
        elif dec == member:
            success += 1
        else:
            errors += 1
    est = success / trials
    return MonteCarloResult(
        est, math.sqrt(est * (1 - est) / trials), inconclusive / trials, errors / trials, trials, seed, p_conv
    )
