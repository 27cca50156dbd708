"""Simulation of LOCC discrimination protocols.

Two protocol shapes are supported.  A :class:`ProtocolTree` is an adaptive
measurement tree: each internal node is one party's local measurement, its
children are keyed by outcome label, and leaves carry the decoded set index
(``None`` for an inconclusive leaf).  A :class:`FlatLOProtocol` fixes one
measurement per party in advance and decodes the outcome pair.

The engine only verifies protocols that are handed to it; it never searches
for one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence, Union

import numpy as np

from .families import StateSet
from .states import DimensionError, Party, StateVector, apply_local_operator

PRUNE_TOL = 1e-12
PERFECT_TOL = 1e-9
MEAS_TOL = 1e-9


class ProtocolError(ValueError):
    """Malformed protocol: missing children, non-total decoder, bad shapes."""


@dataclass(frozen=True, eq=False)
class Measurement:
    """A labelled list of local operators for one party.

    ``kind`` is ``"projective"`` or ``"general"``.  Completeness is not
    enforced here; see :func:`validate_measurement`.
    """

    party: Party
    operators: tuple
    labels: tuple = None
    kind: str = "projective"

    def __post_init__(self):
        if self.party not in ("A", "B"):
            raise ValueError(f"party must be 'A' or 'B', got {self.party!r}")
        ops = tuple(np.array(op, dtype=complex) for op in self.operators)
        if not ops:
            raise ProtocolError("a measurement needs at least one operator")
        shape = ops[0].shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ProtocolError(f"operators must be square matrices, got {shape}")
        if any(op.shape != shape for op in ops):
            raise ProtocolError("operators of one measurement must share a shape")
        for op in ops:
            op.setflags(write=False)
        labels = self.labels
        if labels is None:
            labels = tuple(str(k + 1) for k in range(len(ops)))
        labels = tuple(str(l) for l in labels)
        if len(labels) != len(ops) or len(set(labels)) != len(labels):
            raise ProtocolError("labels must be unique, one per operator")
        if self.kind not in ("projective", "general"):
            raise ValueError(f"unknown measurement kind {self.kind!r}")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def items(self):
        return zip(self.labels, self.operators)

    def same_as(self, other: "Measurement", atol: float = MEAS_TOL) -> bool:
        return (
            self.party == other.party
            and self.labels == other.labels
            and self.dim == other.dim
            and all(np.allclose(p, q, atol=atol) for p, q in zip(self.operators, other.operators))
        )


@dataclass
class MeasurementCheck:
    ok: bool
    completeness_deviation: float
    projective_deviation: float
    violations: list


def validate_measurement(m: Measurement, tol: float = MEAS_TOL) -> MeasurementCheck:
    """Check ``sum_k M_k^dag M_k = I``; for projective kind also ``M^2 = M = M^dag``."""
    total = sum(op.conj().T @ op for op in m.operators)
    comp = float(np.abs(total - np.eye(m.dim)).max())
    violations = []
    if comp > tol:
        violations.append(f"completeness: max |sum M^dag M - I| = {comp:.3g}")
    proj = 0.0
    if m.kind == "projective":
        for label, op in m.items():
            dev = max(np.abs(op @ op - op).max(), np.abs(op - op.conj().T).max())
            proj = max(proj, float(dev))
            if dev > tol:
                violations.append(f"outcome {label!r} is not an orthogonal projector ({dev:.3g})")
    return MeasurementCheck(not violations, comp, proj, violations)


@dataclass(frozen=True)
class Leaf:
    decode: int | None = None


@dataclass(frozen=True, eq=False)
class Node:
    measurement: Measurement
    children: Mapping[str, Union["Node", Leaf]]

    def __post_init__(self):
        children = dict(self.children)
        if set(children) != set(self.measurement.labels):
            missing = set(self.measurement.labels) - set(children)
            extra = set(children) - set(self.measurement.labels)
            raise ProtocolError(f"children do not match outcomes (missing {missing}, extra {extra})")
        object.__setattr__(self, "children", children)


@dataclass(frozen=True, eq=False)
class ProtocolTree:
    root: Node | Leaf
    name: str = ""

    def nodes(self) -> Iterator[Node]:
        stack = [self.root]
        while stack:
            n = stack.pop()
            if isinstance(n, Node):
                yield n
                stack.extend(n.children.values())

    def measurements(self) -> list[Measurement]:
        return [n.measurement for n in self.nodes()]

    def local_dims(self) -> tuple[int | None, int | None]:
        dims = {"A": None, "B": None}
        for m in self.measurements():
            if dims[m.party] is None:
                dims[m.party] = m.dim
            elif dims[m.party] != m.dim:
                raise ProtocolError(f"party {m.party} acts on inconsistent dimensions")
        return dims["A"], dims["B"]

    def depth(self) -> int:
        def rec(n):
            if isinstance(n, Leaf):
                return 0
            return 1 + max(rec(c) for c in n.children.values())

        return rec(self.root)


@dataclass(frozen=True, eq=False)
class FlatLOProtocol:
    """One fixed measurement per party and a decoder on outcome-label pairs."""

    alice: Measurement
    bob: Measurement
    decoder: Mapping[tuple[str, str], int | None]
    name: str = ""

    def __post_init__(self):
        if self.alice.party != "A" or self.bob.party != "B":
            raise ProtocolError("alice/bob measurements are assigned to the wrong party")
        decoder = {(str(a), str(b)): v for (a, b), v in dict(self.decoder).items()}
        missing = [(a, b) for a in self.alice.labels for b in self.bob.labels if (a, b) not in decoder]
        if missing:
            raise ProtocolError(f"decoder is not total; missing outcome pairs {missing[:5]}")
        object.__setattr__(self, "decoder", decoder)

    def local_dims(self) -> tuple[int, int]:
        return self.alice.dim, self.bob.dim


Protocol = Union[ProtocolTree, FlatLOProtocol]


@dataclass(frozen=True)
class Branch:
    transcript: tuple
    probability: float
    decode: int | None


def _check_dims(p: Protocol, x: StateVector):
    da, db = p.local_dims()
    if (da is not None and da != x.dim_a) or (db is not None and db != x.dim_b):
        raise DimensionError(f"protocol acts on {da}x{db} but the input is {x.dim_a}x{x.dim_b}")


def run_tree(p: ProtocolTree, x: StateVector) -> list[Branch]:
    """Enumerate every branch with probability at least :data:`PRUNE_TOL`."""
    _check_dims(p, x)
    out = []

    def rec(node, state, prob, transcript):
        if isinstance(node, Leaf):
            out.append(Branch(transcript, prob, node.decode))
            return
        m = node.measurement
        for label, op in m.items():
            post, q = apply_local_operator(state, op, m.party)
            if post is None or prob * q < PRUNE_TOL:
                continue
            rec(node.children[label], post, prob * q, transcript + ((m.party, label),))

    rec(p.root, x, 1.0, ())
    return out


def run_flat(p: FlatLOProtocol, x: StateVector) -> list[Branch]:
    """Outcome-pair distribution of the product measurement, with decodes."""
    _check_dims(p, x)
    m = x.matrix()
    out = []
    for la, opa in p.alice.items():
        ma = opa @ m
        for lb, opb in p.bob.items():
            amp = ma @ opb.T
            prob = float(np.vdot(amp, amp).real)
            if prob < PRUNE_TOL:
                continue
            out.append(Branch((("A", la), ("B", lb)), prob, p.decoder[(la, lb)]))
    return out


def run_protocol(p: Protocol, x: StateVector) -> list[Branch]:
    if isinstance(p, FlatLOProtocol):
        return run_flat(p, x)
    return run_tree(p, x)


@dataclass
class InputReport:
    index: int
    branches: list
    success_probability: float
    conclusive_probability: float
    error_probability: float
    total_probability: float


@dataclass
class DiscriminationReport:
    inputs: list
    perfect: bool
    error: bool
    protocol_name: str = ""
    set_family: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def success_probabilities(self) -> np.ndarray:
        return np.array([r.success_probability for r in self.inputs])

    @property
    def conclusive_probabilities(self) -> np.ndarray:
        return np.array([r.conclusive_probability for r in self.inputs])


def verify_perfect_discrimination(p: Protocol, s: StateSet) -> DiscriminationReport:
    """Simulate every member of ``s`` and decide whether ``p`` discriminates them perfectly.

    ``perfect`` holds when each input decodes to its own index with total
    probability 1 (within :data:`PERFECT_TOL`) and no branch decodes a wrong
    index with probability above the same tolerance.
    """
    inputs = []
    for i, x in enumerate(s.states):
        branches = run_protocol(p, x)
        total = sum(b.probability for b in branches)
        ok = sum(b.probability for b in branches if b.decode == i)
        concl = sum(b.probability for b in branches if b.decode is not None)
        err = sum(b.probability for b in branches if b.decode is not None and b.decode != i)
        inputs.append(InputReport(i, branches, ok, concl, err, total))
    error = any(
        b.probability > PERFECT_TOL
        for r in inputs
        for b in r.branches
        if b.decode is not None and b.decode != r.index
    )
    perfect = not error and all(abs(r.success_probability - 1.0) <= PERFECT_TOL for r in inputs)
    return DiscriminationReport(inputs, perfect, error, getattr(p, "name", ""), s.family_tag)


def map_leaves(tree: ProtocolTree, fn, name: str | None = None) -> ProtocolTree:
    """Rebuild ``tree`` with ``fn(transcript, leaf) -> Leaf`` applied to every leaf."""

    def rec(node, transcript):
        if isinstance(node, Leaf):
            return fn(transcript, node)
        m = node.measurement
        return Node(m, {l: rec(c, transcript + ((m.party, l),)) for l, c in node.children.items()})

    return ProtocolTree(rec(tree.root, ()), tree.name if name is None else name)


def decode_by_simulation(tree: ProtocolTree, states: Sequence[StateVector]) -> ProtocolTree:
    """Assign each leaf the unique input that reaches it.

    Leaves reached by no input, or by more than one, become inconclusive; a
    protocol that merges inputs therefore fails verification instead of
    silently guessing.
    """
    reach: dict[tuple, set] = {}
    for i, x in enumerate(states):
        for b in run_tree(tree, x):
            reach.setdefault(b.transcript, set()).add(i)

    def assign(transcript, leaf):
        hits = reach.get(transcript, set())
        return Leaf(next(iter(hits)) if len(hits) == 1 else None)

    return map_leaves(tree, assign)


def restrict_protocol(p: Protocol, indices: Sequence[int]) -> Protocol:
    """Re-index decodes onto a subset: old index ``indices[k]`` becomes ``k``.

    Decodes pointing outside the subset become inconclusive.
    """
    remap = {old: new for new, old in enumerate(indices)}
    if isinstance(p, FlatLOProtocol):
        dec = {k: remap.get(v) if v is not None else None for k, v in p.decoder.items()}
        return FlatLOProtocol(p.alice, p.bob, dec, p.name)
    return map_leaves(p, lambda t, leaf: Leaf(remap.get(leaf.decode) if leaf.decode is not None else None))


@dataclass
class Adaptivity:
    kind: str  # "LO-flattenable" or "requires-CC"
    flat: FlatLOProtocol | None
    reason: str = ""

    @property
    def flattenable(self) -> bool:
        return self.kind == "LO-flattenable"


def _history_label(h: tuple) -> str:
    return ".".join(h) if h else "id"


def classify_adaptivity(tree: ProtocolTree) -> Adaptivity:
    """Decide whether every measurement choice depends only on the chooser's own outcomes.

    When it does, Alice's and Bob's operations commute and each party's
    sequence of measurements composes into a single local measurement; the
    equivalent :class:`FlatLOProtocol` is returned alongside the verdict.
    """
    strategy = {"A": {}, "B": {}}
    terminal = {"A": set(), "B": set()}
    decoder = {}

    def cc(reason):
        return Adaptivity("requires-CC", None, reason)

    stack = [(tree.root, (), ())]
    while stack:
        node, ha, hb = stack.pop()
        if isinstance(node, Leaf):
            terminal["A"].add(ha)
            terminal["B"].add(hb)
            decoder[(ha, hb)] = node.decode
            continue
        m = node.measurement
        h = ha if m.party == "A" else hb
        seen = strategy[m.party].get(h)
        if seen is None:
            strategy[m.party][h] = m
        elif not seen.same_as(m):
            return cc(f"party {m.party} measures differently after own outcomes {h} "
                      "depending on the other party's outcomes")
        for label, child in node.children.items():
            if m.party == "A":
                stack.append((child, ha + (label,), hb))
            else:
                stack.append((child, ha, hb + (label,)))

    for party in "AB":
        both = terminal[party] & set(strategy[party])
        if both:
            return cc(f"party {party} stops in some branches but measures in others "
                      f"after own outcomes {sorted(both)[0]}")

    dims = tree.local_dims()
    flat_ms = {}
    kept = {}
    for k, party in enumerate("AB"):
        dim = dims[k] or 1
        labels, ops = [], []
        for h in sorted(terminal[party]):
            op = np.eye(dim, dtype=complex)
            for j in range(len(h)):
                m = strategy[party][h[:j]]
                op = m.operators[m.labels.index(h[j])] @ op
            if np.abs(op).max() < PRUNE_TOL:
                continue
            labels.append(_history_label(h))
            ops.append(op)
        kept[party] = {_history_label(h): h for h in terminal[party]}
        meas = Measurement(party, ops, labels, "general")
        if validate_measurement(Measurement(party, ops, labels, "projective")).ok:
            meas = Measurement(party, ops, labels, "projective")
        flat_ms[party] = meas

    flat_decoder = {}
    for la in flat_ms["A"].labels:
        for lb in flat_ms["B"].labels:
            key = (kept["A"][la], kept["B"][lb])
            if key not in decoder:
                return cc(f"outcome pair {key} has no leaf")
            flat_decoder[(la, lb)] = decoder[key]
    flat = FlatLOProtocol(flat_ms["A"], flat_ms["B"], flat_decoder, f"{tree.name} (flattened)".strip())
    return Adaptivity("LO-flattenable", flat, "")


def flat_transcript(transcript: tuple) -> tuple:
    """Map a tree transcript onto the outcome pair of the flattened protocol."""
    ha = tuple(l for p, l in transcript if p == "A")
    hb = tuple(l for p, l in transcript if p == "B")
    return (("A", _history_label(ha)), ("B", _history_label(hb)))
