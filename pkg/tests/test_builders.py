import math

import numpy as np
import pytest

from conftest import random_state
from locdisc.builders import (
    attach_resource,
    build_assisted_tree,
    build_extended_tree,
    build_hadamard_tree,
    build_nonmax_tree,
    build_teleportation_tree,
    context_indices,
    gram_schmidt,
)
from locdisc.engine import (
    Leaf,
    classify_adaptivity,
    restrict_protocol,
    run_tree,
    validate_measurement,
    verify_perfect_discrimination,
)
from locdisc.families import (
    NonMaxParams,
    StateSet,
    extend_with_product,
    gen_canonical_set,
    gen_hadamard_set_4x4,
    gen_nonmax_set,
    subset,
)
from locdisc.jsonio import fixture_names, load_fixture
from locdisc.states import DimensionError, StateVector, epr, local_unitary, schmidt_decompose

R = 1 / math.sqrt(2)


def leaves(node, transcript=()):
    if isinstance(node, Leaf):
        yield transcript, node.decode
        return
    m = node.measurement
    for label, child in node.children.items():
        yield from leaves(child, transcript + ((m.party, label),))


def same_tree(a, b):
    if isinstance(a, Leaf) or isinstance(b, Leaf):
        return isinstance(a, Leaf) and isinstance(b, Leaf) and a.decode == b.decode
    if not a.measurement.same_as(b.measurement, atol=1e-12):
        return False
    return all(same_tree(a.children[l], b.children[l]) for l in a.measurement.labels)


class TestResource:
    def test_lifted_qutrit_set(self):
        s = attach_resource(gen_canonical_set(3), epr())
        assert s.dims == (6, 6)
        np.testing.assert_allclose(s.gram(), np.eye(4), atol=1e-12)

    def test_product_ancilla_keeps_schmidt_data(self):
        s = gen_canonical_set(3)
        lifted = attach_resource(s, StateVector.basis(0, 0, 2, 2))
        for x, y in zip(s, lifted):
            np.testing.assert_allclose(
                schmidt_decompose(y).coefficients[:3], schmidt_decompose(x).coefficients, atol=1e-12
            )

    def test_hadamard_dims(self):
        assert attach_resource(gen_hadamard_set_4x4(), epr()).dims == (8, 8)

    def test_context_relabelling(self):
        # bold 0, 1, 2 after outcome "1" are |00>, |11>, |21> in (set, resource) notation
        assert context_indices(3, "1") == [0, 3, 5]
        assert context_indices(3, "2") == [1, 2, 4]


class TestAssisted:
    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_fourier_decode_closed_form(self, d):
        # in a matching context, outcomes a and b on the Fourier basis single out member (a + b) mod d
        tree = build_assisted_tree(d)
        for transcript, dec in leaves(tree.root):
            labels = [l for _, l in transcript]
            split_a, split_b, a, b = labels
            if split_a != split_b:
                expected = d if "c" not in (a, b) else None
            elif "c" in (a, b):
                expected = None
            else:
                expected = (int(a) - 1 + int(b) - 1) % d
            if expected is None:
                continue  # complement and product-in-complement leaves are never reached
            assert dec == expected, transcript

    def test_product_member_lands_in_mixed_contexts(self):
        s = attach_resource(gen_canonical_set(3), epr())
        for b in run_tree(build_assisted_tree(3), s[3]):
            assert b.transcript[0][1] != b.transcript[1][1]

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_flattenable(self, d):
        a = classify_adaptivity(build_assisted_tree(d))
        assert a.flattenable
        lifted = attach_resource(gen_canonical_set(d), epr())
        assert verify_perfect_discrimination(a.flat, lifted).perfect

    def test_remark_subset(self):
        s = subset(gen_canonical_set(3), [0, 1, 3])
        p = restrict_protocol(build_assisted_tree(3), [0, 1, 3])
        assert verify_perfect_discrimination(p, attach_resource(s, epr())).perfect

    @pytest.mark.parametrize("d", [1, 0])
    def test_bad_d(self, d):
        with pytest.raises(ValueError):
            build_assisted_tree(d)


class TestHadamard:
    def test_perfect_and_flattenable(self):
        tree = build_hadamard_tree()
        lifted = attach_resource(gen_hadamard_set_4x4(), epr())
        r = verify_perfect_discrimination(tree, lifted)
        assert r.perfect
        assert r.inputs[4].success_probability == pytest.approx(1, abs=1e-12)
        assert classify_adaptivity(tree).flattenable


class TestNonMax:
    def test_worked_point(self):
        p = NonMaxParams(math.sqrt(0.8), math.sqrt(0.2), R, R, R, R, R, R)
        tree = build_nonmax_tree(p)
        assert verify_perfect_discrimination(tree, attach_resource(gen_nonmax_set(p), epr())).perfect
        assert classify_adaptivity(tree).kind == "requires-CC"

    def test_bob_bases_depend_on_alice(self):
        tree = build_nonmax_tree(NonMaxParams.from_angles(0.3, 0.9, 0.5, 1.1))
        ctx = tree.root.children["1"].children["1"]
        bobs = [c.measurement for c in ctx.children.values() if not isinstance(c, Leaf)]
        assert len(bobs) >= 2
        assert not all(bobs[0].same_as(m) for m in bobs[1:])


class TestTeleportation:
    def test_perfect(self):
        tree = build_teleportation_tree()
        assert verify_perfect_discrimination(tree, attach_resource(gen_canonical_set(2), epr())).perfect
        assert classify_adaptivity(tree).kind == "requires-CC"

    def test_outside_span_is_inconclusive(self):
        tree = build_teleportation_tree()
        x = StateVector.basis(1, 0, 2, 2)
        from locdisc.states import tensor_product

        branches = run_tree(tree, tensor_product(x, epr()))
        assert sum(b.probability for b in branches if b.decode is None) == pytest.approx(1, abs=1e-9)

    def test_any_two_qubit_set(self, rng):
        # random orthonormal pair: still discriminated
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        s = StateSet(tuple(StateVector(2, 2, q[:, k]) for k in range(2)))
        assert verify_perfect_discrimination(build_teleportation_tree(s), attach_resource(s, epr())).perfect

    def test_rejects_qutrits(self):
        with pytest.raises(DimensionError):
            build_teleportation_tree(gen_canonical_set(3))


class TestExtended:
    def test_members(self):
        s = extend_with_product(gen_canonical_set(3), (0, 2))
        lifted = attach_resource(s, epr())
        r = verify_perfect_discrimination(build_extended_tree(s), lifted)
        assert r.perfect
        assert r.inputs[4].success_probability == pytest.approx(1, abs=1e-12)
        assert r.inputs[3].success_probability == pytest.approx(1, abs=1e-12)

    def test_unsupported(self):
        with pytest.raises(ValueError):
            build_extended_tree(gen_canonical_set(3))
        with pytest.raises(ValueError):
            # |12> survives the matching context "1"/"1"
            build_extended_tree(extend_with_product(gen_canonical_set(3), (1, 2)))


def all_trees():
    return [
        build_assisted_tree(2),
        build_assisted_tree(3),
        build_assisted_tree(4),
        build_hadamard_tree(),
        build_nonmax_tree(NonMaxParams.symmetric()),
        build_nonmax_tree(NonMaxParams.from_angles(0.2, 0.7, 1.2, 0.4)),
        build_teleportation_tree(),
        build_extended_tree(),
    ]


def test_every_measurement_valid():
    for tree in all_trees():
        for m in tree.measurements():
            chk = validate_measurement(m)
            assert chk.ok, (tree.name, chk.violations)


@pytest.mark.parametrize("name", ["assisted-d2", "assisted-d3", "assisted-d4", "hadamard-d4",
                                  "teleportation-d2", "extended-d3", "nonmax-d4-symmetric"])
def test_fixture_matches_fresh_build(name):
    fresh = {
        "assisted-d2": lambda: build_assisted_tree(2),
        "assisted-d3": lambda: build_assisted_tree(3),
        "assisted-d4": lambda: build_assisted_tree(4),
        "hadamard-d4": build_hadamard_tree,
        "teleportation-d2": build_teleportation_tree,
        "extended-d3": build_extended_tree,
        "nonmax-d4-symmetric": lambda: build_nonmax_tree(NonMaxParams.symmetric()),
    }[name]()
    assert name in fixture_names()
    assert same_tree(load_fixture(name).root, fresh.root)


def test_gram_schmidt_order_and_drop(rng):
    v = [rng.standard_normal(4) + 0j for _ in range(3)]
    basis = gram_schmidt(v + [v[0] + v[1]])
    assert len(basis) == 3
    np.testing.assert_allclose(basis[0], v[0] / np.linalg.norm(v[0]))
    g = np.array(basis)
    np.testing.assert_allclose(g.conj() @ g.T, np.eye(3), atol=1e-12)
