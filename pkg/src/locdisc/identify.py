"""Conclusive local identifiability through product witnesses.

Member ``i`` of a set can be identified conclusively by LOCC exactly when some
product state ``|alpha>|beta>`` is orthogonal to every other member and has a
nonzero overlap with member ``i``.  For a fixed Alice vector the orthogonality
conditions are linear in ``beta``: stacking the rows ``alpha^T conj(Phi_j)``
into ``M(alpha)``, an admissible ``beta`` is a kernel vector of ``M(alpha)``.

In 2x2 with two constraints ``det M(alpha)`` is a binary quadratic form whose
roots are enumerated in closed form, which settles the question.  Elsewhere
the search is numerical: Haar-random Alice vectors rank starting points, and an
alternating minimization drives them onto the locus where a kernel exists.
A negative result there is evidence, never a proof.
"""

from __future__ import annotations

import cmath
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .families import StateSet
from .states import StateVector

KERNEL_TOL = 1e-8
WITNESS_RESIDUAL = 1e-9
OVERLAP_THRESHOLD = 1e-6
COEFF_TOL = 1e-12

IDENTIFIABLE = "identifiable"
CERTIFIED = "not-identifiable-certified"
NUMERICAL = "not-identifiable-numerical"
UNDETERMINED = "undetermined"


@dataclass(frozen=True, eq=False)
class WitnessProblem:
    """Constraint data for identifying member ``target`` of a set.

    ``constraints[j]`` is ``conj(Phi_j)`` for every other member ``j`` (in set
    order); ``target_matrix`` is ``conj(Phi_target)``.
    """

    constraints: np.ndarray
    target_matrix: np.ndarray
    target: int = 0
    others: tuple = ()

    @classmethod
    def from_set(cls, s: StateSet, target: int) -> "WitnessProblem":
        if not 0 <= target < len(s):
            raise IndexError(f"target {target} out of range for a set of {len(s)} states")
        others = tuple(j for j in range(len(s)) if j != target)
        cons = np.array([s[j].matrix().conj() for j in others])
        return cls(cons, s[target].matrix().conj(), target, others)

    @property
    def dims(self) -> tuple[int, int]:
        return self.target_matrix.shape


def constraint_matrix(problem: WitnessProblem, alpha) -> np.ndarray:
    """Rows ``alpha^T conj(Phi_j)``; ``M(alpha) beta = 0`` iff ``|alpha beta>`` is orthogonal to all others."""
    alpha = np.asarray(alpha, dtype=complex)
    return np.einsum("m,jmn->jn", alpha, problem.constraints.reshape(-1, *problem.dims))


def smallest_singular_value(m: np.ndarray) -> float:
    """Smallest of the ``cols`` singular values (zero when there are fewer rows than columns)."""
    rows, cols = m.shape
    if rows < cols:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[-1])


def _kernel(m: np.ndarray, tol: float) -> np.ndarray:
    """Columns spanning the numerical kernel of ``m``."""
    rows, cols = m.shape
    if rows == 0:
        return np.eye(cols, dtype=complex)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    s = np.concatenate([s, np.zeros(cols - s.size)])
    return vh[s < tol].conj().T


def _best_in_kernel(m: np.ndarray, r: np.ndarray, tol: float):
    """Unit ``x`` in ker(m) maximizing ``|r x|``, with that maximum; ``(None, 0)`` if the kernel is empty."""
    k = _kernel(m, tol)
    if k.shape[1] == 0:
        return None, 0.0
    rk = r @ k
    n = float(np.linalg.norm(rk))
    if n < COEFF_TOL:
        return k[:, 0], 0.0
    return k @ (rk.conj() / n), n


def witness_values(problem: WitnessProblem, alpha, beta) -> tuple[float, float]:
    """``(max_j |<alpha beta|phi_j>|, |<alpha beta|phi_target>|)`` for unit ``alpha``, ``beta``."""
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    cons = constraint_matrix(problem, alpha) @ beta
    residual = float(np.abs(cons).max()) if cons.size else 0.0
    overlap = float(abs(alpha @ problem.target_matrix @ beta))
    return residual, overlap


@dataclass
class IdentifiabilityVerdict:
    status: str
    target: int
    method: str
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None
    overlap: float = 0.0
    residual: float | None = None
    max_overlap: float = 0.0
    samples: int = 0
    seed: int | None = None
    evidence: dict = field(default_factory=dict)

    @property
    def identifiable(self) -> bool:
        return self.status == IDENTIFIABLE

    def witness(self) -> StateVector | None:
        if self.alpha is None or self.beta is None:
            return None
        return StateVector.product(self.alpha, self.beta)


def _candidate(problem, alpha, tol=KERNEL_TOL):
    """Evaluate the best kernel witness through ``alpha``: (beta, residual, overlap)."""
    alpha = alpha / np.linalg.norm(alpha)
    m = constraint_matrix(problem, alpha)
    beta, _ = _best_in_kernel(m, alpha @ problem.target_matrix, tol)
    if beta is None:
        return None, np.inf, 0.0
    res, ov = witness_values(problem, alpha, beta)
    return beta, res, ov


def _identified(res, ov):
    return res < WITNESS_RESIDUAL and ov > OVERLAP_THRESHOLD


def binary_quadratic_roots(a: complex, b: complex, c: complex, tol: float = COEFF_TOL):
    """Projective roots ``(x0, x1)`` of ``a x0^2 + b x0 x1 + c x1^2``; ``None`` if the form vanishes."""
    if max(abs(a), abs(b), abs(c)) < tol:
        return None
    roots = []
    if abs(a) < tol:
        roots.append(np.array([1.0, 0.0], dtype=complex))
    # x0 = 1, x1 = s:  a + b s + c s^2 = 0
    if abs(c) >= tol:
        disc = cmath.sqrt(b * b - 4 * a * c)
        for sgn in (1, -1):
            roots.append(np.array([1.0, (-b + sgn * disc) / (2 * c)]))
    elif abs(b) >= tol:
        roots.append(np.array([1.0, -a / b]))
    # x0 = 0 is a root iff c == 0
    if abs(c) < tol:
        roots.append(np.array([0.0, 1.0], dtype=complex))
    out = []
    for r in roots:
        r = r / np.linalg.norm(r)
        if not any(abs(abs(np.vdot(r, q)) - 1) < 1e-12 for q in out):
            out.append(r)
    return out


def det_form(problem: WitnessProblem) -> tuple[complex, complex, complex]:
    """Coefficients of ``det M(alpha) = a alpha0^2 + b alpha0 alpha1 + c alpha1^2`` (2x2, two constraints)."""
    c1, c2 = problem.constraints
    a = c1[0, 0] * c2[0, 1] - c1[0, 1] * c2[0, 0]
    c = c1[1, 0] * c2[1, 1] - c1[1, 1] * c2[1, 0]
    b = c1[0, 0] * c2[1, 1] + c1[1, 0] * c2[0, 1] - c1[0, 1] * c2[1, 0] - c1[1, 1] * c2[0, 0]
    return complex(a), complex(b), complex(c)


def certify_2x2(problem: WitnessProblem) -> IdentifiabilityVerdict:
    """Exact decision for a 2x2 set of two or three states.

    With two constraints a witness needs ``det M(alpha) = 0``; the roots of
    that quadratic form are the only candidate Alice vectors, and each is
    checked with its best kernel vector.  If the form vanishes identically the
    method does not apply and the verdict is ``undetermined`` unless a witness
    turns up along a basis.

    With one constraint row ``r(alpha)`` the kernel vector ``(-r1, r0)`` is
    linear in ``alpha``, so the target overlap is a binary quadratic form; it
    vanishes identically iff it vanishes at three distinct projective points.
    """
    if problem.dims != (2, 2) or len(problem.constraints) not in (1, 2):
        raise ValueError("certify_2x2 needs a 2x2 problem with one or two constraints")
    if len(problem.constraints) == 1:
        best = 0.0
        for alpha in (np.array([1, 0]), np.array([0, 1]), np.array([1, 1]) / np.sqrt(2)):
            alpha = alpha.astype(complex)
            beta, res, ov = _candidate(problem, alpha)
            best = max(best, ov)
            if beta is not None and _identified(res, ov):
                return IdentifiabilityVerdict(IDENTIFIABLE, problem.target, "certify_2x2", alpha, beta, ov, res, ov)
        return IdentifiabilityVerdict(CERTIFIED, problem.target, "certify_2x2", max_overlap=best)
    roots = binary_quadratic_roots(*det_form(problem))
    if roots is None:
        for alpha in np.eye(2, dtype=complex):
            beta, res, ov = _candidate(problem, alpha)
            if beta is not None and _identified(res, ov):
                return IdentifiabilityVerdict(IDENTIFIABLE, problem.target, "certify_2x2", alpha, beta, ov, res, ov)
        return IdentifiabilityVerdict(UNDETERMINED, problem.target, "certify_2x2",
                                      evidence={"reason": "det M(alpha) vanishes identically"})
    best = 0.0
    for alpha in roots:
        beta, res, ov = _candidate(problem, alpha)
        if beta is None:
            continue
        best = max(best, ov)
        if _identified(res, ov):
            return IdentifiabilityVerdict(IDENTIFIABLE, problem.target, "certify_2x2", alpha, beta, ov, res, ov)
    return IdentifiabilityVerdict(CERTIFIED, problem.target, "certify_2x2", max_overlap=best,
                                  evidence={"roots": [r.tolist() for r in roots]})


@dataclass
class SearchConfig:
    samples: int = 100_000
    polish_starts: int = 32
    polish_iterations: int = 200
    seed: int = 0
    partitions: int = 1
    workers: int = 1
    batch: int = 20_000
    tradeoff: float = 1.0


def _haar_alphas(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    z = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _scan_partition(problem, rng, n, cfg: SearchConfig):
    """Score ``n`` random Alice vectors; return kernel hits and the lowest-scoring starts."""
    dim_a = problem.dims[0]
    cons = problem.constraints
    hits = []
    starts = []
    done = 0
    while done < n:
        k = min(cfg.batch, n - done)
        alphas = _haar_alphas(rng, k, dim_a)
        ms = np.einsum("sm,jmn->sjn", alphas, cons)
        rows, cols = ms.shape[1:]
        _, s, vh = np.linalg.svd(ms, full_matrices=True)
        if rows < cols:
            smin = np.zeros(k)
        else:
            smin = s[:, -1]
        bmin = vh[:, -1, :].conj()
        tgt = np.abs(np.einsum("sm,mn,sn->s", alphas, problem.target_matrix, bmin))
        score = smin**2 - cfg.tradeoff * tgt**2
        for idx in np.flatnonzero(smin < KERNEL_TOL):
            hits.append(alphas[idx])
        top = np.argsort(score, kind="stable")[: cfg.polish_starts]
        starts.extend((float(score[i]), done + int(i), alphas[i]) for i in top)
        done += k
    starts.sort(key=lambda t: (t[0], t[1]))
    return hits, starts[: cfg.polish_starts]


def _min_eigvec(q: np.ndarray) -> np.ndarray:
    return np.linalg.eigh(q)[1][:, 0]


def _alpha_rows(problem, beta):
    """Rows ``w_j^H`` with ``w_j^H alpha = alpha^T conj(Phi_j) beta``."""
    u = np.einsum("jmn,n->jm", problem.constraints, beta)
    return u, problem.target_matrix @ beta


def _project_square(problem, alpha, steps: int = 4):
    """Move ``alpha`` onto ``det M(alpha) = 0`` along a complex line.

    The line direction increases the smallest singular triplet fastest; the
    intersection is the root of the pencil ``M(alpha) + s M(w)`` closest to
    ``s = 0``.
    """
    cons = problem.constraints
    for _ in range(steps):
        m = constraint_matrix(problem, alpha)
        u, sv, vh = np.linalg.svd(m)
        if sv[-1] < 1e-14:
            break
        g = np.einsum("j,jmn,n->m", u[:, -1].conj(), cons, vh[-1].conj())
        if np.linalg.norm(g) < COEFF_TOL:
            break
        w = g.conj() / np.linalg.norm(g)
        roots = scipy.linalg.eigvals(m, -constraint_matrix(problem, w))
        roots = roots[np.isfinite(roots)]
        if roots.size == 0:
            break
        step = roots[np.argmin(np.abs(roots))]
        alpha = alpha + step * w
        alpha = alpha / np.linalg.norm(alpha)
    return alpha


def _project_sweeps(problem, alpha, iterations: int):
    """Alternating least squares at zero tradeoff, keeping the target overlap inside numerical kernels."""
    beta = None
    for _ in range(iterations):
        m = constraint_matrix(problem, alpha)
        r = alpha @ problem.target_matrix
        b, _ = _best_in_kernel(m, r, KERNEL_TOL)
        beta = b if b is not None else _min_eigvec(m.conj().T @ m)
        u, ut = _alpha_rows(problem, beta)
        a, _ = _best_in_kernel(u, ut, KERNEL_TOL)
        alpha = a if a is not None else _min_eigvec(u.conj().T @ u)
        if witness_values(problem, alpha, beta)[0] < 1e-14:
            break
    return alpha


def polish(problem: WitnessProblem, alpha, iterations: int = 200, tradeoff: float = 1.0):
    """Descend on ``sum_j |<ab|phi_j>|^2 - t |<ab|phi_target>|^2``, then land on the kernel locus.

    The descent alternates exact minimizations over ``beta`` and ``alpha``
    while ``t`` is lowered geometrically.  The end point is then moved onto
    the set of Alice vectors with a nonempty kernel (exactly, by a pencil root,
    when ``M(alpha)`` is square) and paired with its best kernel ``beta``.
    """
    alpha = np.asarray(alpha, dtype=complex)
    alpha = alpha / np.linalg.norm(alpha)
    schedule = [tradeoff * 10.0**-k for k in range(4)]
    per = max(1, iterations // len(schedule))
    for t in schedule:
        for _ in range(per):
            m = constraint_matrix(problem, alpha)
            r = alpha @ problem.target_matrix
            beta = _min_eigvec(m.conj().T @ m - t * np.outer(r.conj(), r))
            u, ut = _alpha_rows(problem, beta)
            alpha = _min_eigvec(u.conj().T @ u - t * np.outer(ut.conj(), ut))
    rows, cols = len(problem.constraints), problem.dims[1]
    if rows == cols:
        alpha = _project_square(problem, alpha)
    elif rows > cols:
        alpha = _project_sweeps(problem, alpha, iterations)
    beta, _, _ = _candidate(problem, alpha)
    if beta is None:
        m = constraint_matrix(problem, alpha)
        beta = _min_eigvec(m.conj().T @ m)
    return alpha, beta


def search_numeric(problem: WitnessProblem, config: SearchConfig | None = None, **kwargs) -> IdentifiabilityVerdict:
    """Numerical witness search.

    Alice's computational basis vectors are tried first, then
    ``config.samples`` Haar-random vectors split over ``config.partitions``
    independently seeded substreams.  The lowest-scoring samples are polished
    with :func:`polish`.  The reported ``max_overlap`` is the largest target
    overlap among candidates whose orthogonality residual is below
    :data:`KERNEL_TOL`.
    """
    cfg = replace(config or SearchConfig(), **kwargs)
    if cfg.samples < 1:
        raise ValueError("the sample budget must be positive")
    dim_a = problem.dims[0]
    best = {"ov": 0.0}
    tried = 0

    def consider(alpha, beta, res, ov, stage):
        if res < KERNEL_TOL and ov > best["ov"]:
            best.update(ov=ov)
        if _identified(res, ov):
            return IdentifiabilityVerdict(
                IDENTIFIABLE, problem.target, "search_numeric", alpha, beta, ov, res, ov,
                tried, cfg.seed, {"stage": stage},
            )
        return None

    for alpha in np.eye(dim_a, dtype=complex):
        tried += 1
        beta, res, ov = _candidate(problem, alpha)
        if beta is not None and (v := consider(alpha, beta, res, ov, "basis")):
            return v

    parts = max(1, int(cfg.partitions))
    sizes = [cfg.samples // parts + (1 if p < cfg.samples % parts else 0) for p in range(parts)]
    rngs = [np.random.default_rng(ss) for ss in np.random.SeedSequence(cfg.seed).spawn(parts)]
    jobs = [(problem, rngs[p], sizes[p], cfg) for p in range(parts)]
    if cfg.workers > 1 and parts > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            results = list(ex.map(lambda j: _scan_partition(*j), jobs))
    else:
        results = [_scan_partition(*j) for j in jobs]
    tried += cfg.samples

    hits, starts = [], []
    for p, (h, st) in enumerate(results):
        hits.extend(h)
        starts.extend((score, p, i, a) for score, i, a in st)
    starts.sort(key=lambda t: (t[0], t[1], t[2]))
    starts = starts[: cfg.polish_starts]

    for alpha in hits:
        beta, res, ov = _candidate(problem, alpha)
        if beta is not None and (v := consider(alpha, beta, res, ov, "sample")):
            return v

    converged = 0
    min_res = np.inf
    for _, _, _, a0 in starts:
        alpha, beta = polish(problem, a0, cfg.polish_iterations, cfg.tradeoff)
        res, ov = witness_values(problem, alpha, beta)
        min_res = min(min_res, res)
        converged += res < WITNESS_RESIDUAL
        if v := consider(alpha, beta, res, ov, "polish"):
            return v
        kb, kres, kov = _candidate(problem, alpha)
        if kb is not None and (v := consider(alpha, kb, kres, kov, "polish")):
            return v

    return IdentifiabilityVerdict(
        NUMERICAL, problem.target, "search_numeric", max_overlap=best["ov"], samples=tried, seed=cfg.seed,
        evidence={
            "polish_starts": len(starts),
            "polish_converged": int(converged),
            "min_residual": float(min_res),
            "partitions": parts,
            "kernel_hits": len(hits),
        },
    )


def check_set(s: StateSet, config: SearchConfig | None = None, **kwargs) -> list[IdentifiabilityVerdict]:
    """One verdict per member: exact in 2x2 three-state sets, numerical otherwise."""
    out = []
    for i in range(len(s)):
        problem = WitnessProblem.from_set(s, i)
        if s.dims == (2, 2) and len(s) <= 3:
            out.append(certify_2x2(problem))
        else:
            out.append(search_numeric(problem, config, **kwargs))
    return out


def fails_necessary_condition(verdicts) -> bool:
    """True when some member is not conclusively identifiable, so the set is not perfectly LOCC-distinguishable."""
    return any(v.status in (CERTIFIED, NUMERICAL) for v in verdicts)
