"""Entanglement-assisted discrimination protocols for the generated families.

All protocols act on ``set (x) EPR`` with the composite grouped party-wise:
Alice's local index is ``2 * j + r`` for set index ``j`` and resource index
``r`` (Bob likewise).  The shared first stage is the two-outcome split

    outcome "1":  |0,0>, |1,1>, ..., |d-1,1>
    outcome "2":  |0,1>, |1,0>, ..., |d-1,0>

performed by both parties.  The product member ``|01>`` is the only one that
produces different outcomes on the two sides.  Inside a matching context the
entangled members reduce to ``sum_j c_j |jj>`` on the relabelled basis
``j -> context_indices(d, outcome)[j]``, which the second stage resolves.

Leaf decodes are fixed by simulating the generated set through the finished
tree (see :func:`locdisc.engine.decode_by_simulation`).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import null_space

from .engine import Leaf, Measurement, Node, ProtocolTree, decode_by_simulation
from .families import (
    HADAMARD_SIGNS,
    NonMaxParams,
    StateSet,
    extend_with_product,
    gen_canonical_set,
    gen_hadamard_set_4x4,
    gen_nonmax_set,
)
from .states import DimensionError, StateVector, apply_local_operator, epr, tensor_product

OUTCOMES = ("1", "2")
COMPLEMENT = "c"


def attach_resource(s: StateSet, resource: StateVector) -> StateSet:
    """Tensor every member with ``resource``, grouping factors by party."""
    params = dict(s.params)
    params["resource"] = [resource.dim_a, resource.dim_b]
    return StateSet(tuple(tensor_product(x, resource) for x in s.states), s.family_tag, params)


def context_indices(d: int, outcome: str) -> list[int]:
    """Alice/Bob local indices spanning the first-stage outcome ``outcome``, in relabelled order."""
    if outcome == "1":
        return [0] + [2 * j + 1 for j in range(1, d)]
    return [1] + [2 * j for j in range(1, d)]


def _projector(dim: int, indices) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=complex)
    p[indices, indices] = 1.0
    return p


def split_measurement(party: str, d: int) -> Measurement:
    dim = 2 * d
    ops = [_projector(dim, context_indices(d, o)) for o in OUTCOMES]
    return Measurement(party, ops, OUTCOMES)


def basis_measurement(party: str, vectors, labels=None) -> Measurement:
    """Rank-one projectors on orthonormal ``vectors`` plus, if needed, the complement."""
    vectors = [np.asarray(v, dtype=complex) for v in vectors]
    dim = vectors[0].size
    ops = [np.outer(v, v.conj()) for v in vectors]
    labels = list(labels) if labels is not None else [str(k + 1) for k in range(len(vectors))]
    rest = np.eye(dim) - sum(ops)
    if np.abs(rest).max() > 1e-12:
        ops.append(rest)
        labels.append(COMPLEMENT)
    return Measurement(party, ops, labels)


def _embed(d: int, outcome: str, coeffs) -> np.ndarray:
    v = np.zeros(2 * d, dtype=complex)
    v[context_indices(d, outcome)] = coeffs
    return v


def fourier_measurement(party: str, d: int, outcome: str) -> Measurement:
    """Fourier basis ``xi_m = sum_j omega^(m j) |j>`` inside one context (labels "1".."d")."""
    j = np.arange(d)
    omega = np.exp(2j * np.pi / d)
    vecs = [_embed(d, outcome, omega ** (m * j) / np.sqrt(d)) for m in range(d)]
    return basis_measurement(party, vecs)


def sign_measurement(party: str, outcome: str) -> Measurement:
    """The 4x4 sign basis inside one context of the 4x4 split."""
    vecs = [_embed(4, outcome, row / 2) for row in HADAMARD_SIGNS]
    return basis_measurement(party, vecs)


def _two_stage_tree(d: int, stage_a, stage_b, name: str) -> ProtocolTree:
    """Split on both sides, then ``stage_a(oa)`` for Alice and ``stage_b(oa, ob)`` for Bob."""

    def after_split(oa, ob):
        ma = stage_a(oa)
        mb = stage_b(oa, ob)

        def bob_part():
            if mb is None:
                return Leaf()
            return Node(mb, {l: Leaf() for l in mb.labels})

        if ma is None:
            return bob_part()
        return Node(ma, {l: bob_part() for l in ma.labels})

    pa, pb = split_measurement("A", d), split_measurement("B", d)
    root = Node(pa, {oa: Node(pb, {ob: after_split(oa, ob) for ob in OUTCOMES}) for oa in OUTCOMES})
    return ProtocolTree(root, name)


def build_assisted_tree(d: int) -> ProtocolTree:
    """Protocol for the canonical ``d``-set with one EPR pair.

    Both parties measure the split and then the Fourier basis of their own
    context.  Each party's choices depend on their own outcomes only, so the
    tree is equivalent to a single local measurement per party.
    """
    if int(d) != d or d < 2:
        raise ValueError(f"d must be an integer >= 2, got {d}")
    d = int(d)
    lifted = attach_resource(gen_canonical_set(d), epr())
    tree = _two_stage_tree(
        d,
        lambda oa: fourier_measurement("A", d, oa),
        lambda oa, ob: fourier_measurement("B", d, ob),
        f"assisted-d{d}",
    )
    return decode_by_simulation(tree, lifted.states)


def build_hadamard_tree() -> ProtocolTree:
    lifted = attach_resource(gen_hadamard_set_4x4(), epr())
    tree = _two_stage_tree(
        4,
        lambda oa: sign_measurement("A", oa),
        lambda oa, ob: sign_measurement("B", ob),
        "hadamard-4",
    )
    return decode_by_simulation(tree, lifted.states)


def gram_schmidt(vectors, tol: float = 1e-10) -> list[np.ndarray]:
    """Orthonormalize in the given order, dropping vectors already in the span."""
    basis = []
    for v in vectors:
        w = np.asarray(v, dtype=complex).copy()
        for b in basis:
            w -= np.vdot(b, w) * b
        n = np.linalg.norm(w)
        if n > tol:
            basis.append(w / n)
    return basis


def build_nonmax_tree(p: NonMaxParams) -> ProtocolTree:
    """Protocol for the non-maximal 4x4 set with one EPR pair.

    After the split Alice measures the sign basis of her context.  For each of
    her outcomes the residual Bob-side vectors of the entangled members are
    mutually orthogonal; Bob measures their Gram-Schmidt basis (ordered by
    member index), which depends on Alice's outcome.
    """
    s = gen_nonmax_set(p)
    lifted = attach_resource(s, epr())
    pa, pb = split_measurement("A", 4), split_measurement("B", 4)

    def bob_basis(oa, ob, alice_op):
        h = None
        residuals = []
        for x in lifted.states[:4]:
            y, _ = apply_local_operator(x, pa.operators[pa.labels.index(oa)], "A")
            if y is None:
                continue
            y, _ = apply_local_operator(y, pb.operators[pb.labels.index(ob)], "B")
            if y is None:
                continue
            y, _ = apply_local_operator(y, alice_op, "A")
            if y is None:
                continue
            # post-state is |h>|v>; read v off the dominant left singular direction
            u, sv, vh = np.linalg.svd(y.matrix())
            if h is None:
                h = u[:, 0]
            residuals.append(h.conj() @ y.matrix())
        if not residuals:
            return None
        return basis_measurement("B", gram_schmidt(residuals))

    def alice_stage(oa):
        return sign_measurement("A", oa)

    def after_split(oa, ob):
        if oa != ob:
            return Leaf()
        ma = alice_stage(oa)
        children = {}
        for label, op in ma.items():
            mb = bob_basis(oa, ob, op) if label != "c" else None
            children[label] = Leaf() if mb is None else Node(mb, {l: Leaf() for l in mb.labels})
        return Node(ma, children)

    root = Node(pa, {oa: Node(pb, {ob: after_split(oa, ob) for ob in OUTCOMES}) for oa in OUTCOMES})
    return decode_by_simulation(ProtocolTree(root, "nonmax"), lifted.states)


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1, -1]).astype(complex)
_I2 = np.eye(2, dtype=complex)

# Bell outcome on (set qubit, resource qubit) and the Pauli that undoes it on Alice's resource qubit
BELL_CORRECTIONS = {
    "phi+": (np.array([1, 0, 0, 1]) / np.sqrt(2), _I2),
    "phi-": (np.array([1, 0, 0, -1]) / np.sqrt(2), _Z),
    "psi+": (np.array([0, 1, 1, 0]) / np.sqrt(2), _X),
    "psi-": (np.array([0, 1, -1, 0]) / np.sqrt(2), _Z @ _X),
}


def build_teleportation_tree(s: StateSet | None = None) -> ProtocolTree:
    """Teleport Bob's qubit to Alice, then let Alice measure the whole state.

    Bob measures his set qubit and resource qubit in the Bell basis, Alice
    applies the outcome's Pauli correction to her resource qubit (a
    single-outcome node), and finally measures both her qubits in an
    orthonormal basis extending ``s``.  Completion outcomes are inconclusive.
    """
    if s is None:
        s = gen_canonical_set(2)
    if s.dims != (2, 2):
        raise DimensionError(f"teleportation protocol needs a 2x2 set, got {s.dims}")
    lifted = attach_resource(s, epr())
    amps = np.array([x.amplitudes for x in s.states])
    completion = null_space(amps.conj()).T
    vecs = list(amps) + list(completion)
    labels = [str(k + 1) for k in range(len(amps))] + [f"c{k + 1}" for k in range(len(completion))]
    final = basis_measurement("A", vecs, labels)

    bell = Measurement("B", [np.outer(v, v.conj()) for v, _ in BELL_CORRECTIONS.values()], list(BELL_CORRECTIONS))
    children = {}
    for label, (_, pauli) in BELL_CORRECTIONS.items():
        corr = Measurement("A", [np.kron(_I2, pauli)], ["corr"], kind="general")
        children[label] = Node(corr, {"corr": Node(final, {l: Leaf() for l in final.labels})})
    tree = ProtocolTree(Node(bell, children), "teleportation")
    return decode_by_simulation(tree, lifted.states)


def build_extended_tree(s: StateSet | None = None) -> ProtocolTree:
    """Assisted protocol for a canonical set extended by one product state.

    The extra product state, like ``|01>``, must produce different split
    outcomes on the two sides; in those mixed contexts Bob measures his
    computational basis, which separates the two residual product states.
    """
    if s is None:
        s = extend_with_product(gen_canonical_set(3), (0, 2))
    base = s.params.get("base_family")
    if s.family_tag != "extended" or base not in ("canonical-d", "two-qubit"):
        raise ValueError("unsupported extension: expected a canonical set extended by one product state")
    d = int(s.params["base_params"]["d"])
    if len(s) != d + 2:
        raise ValueError("unsupported extension: expected exactly one added product state")
    lifted = attach_resource(s, epr())

    pa, pb = split_measurement("A", d), split_measurement("B", d)
    extra = lifted.states[-1]
    for oa, opa in pa.items():
        y, _ = apply_local_operator(extra, opa, "A")
        if y is not None and apply_local_operator(y, pb.operators[pb.labels.index(oa)], "B")[0] is not None:
            raise ValueError("unsupported extension: the added state survives a matching split context")

    comp = basis_measurement("B", np.eye(2 * d), [f"b{k}" for k in range(2 * d)])
    tree = _two_stage_tree(
        d,
        lambda oa: fourier_measurement("A", d, oa),
        lambda oa, ob: fourier_measurement("B", d, ob) if oa == ob else comp,
        f"extended-d{d}",
    )
    return decode_by_simulation(tree, lifted.states)
