import numpy as np
import pytest

from conftest import random_state, random_unitary
from locdisc.builders import attach_resource, build_assisted_tree, build_nonmax_tree
from locdisc.engine import (
    FlatLOProtocol,
    Leaf,
    Measurement,
    Node,
    ProtocolError,
    ProtocolTree,
    classify_adaptivity,
    flat_transcript,
    run_flat,
    run_tree,
    validate_measurement,
    verify_perfect_discrimination,
)
from locdisc.families import NonMaxParams, gen_canonical_set
from locdisc.states import DimensionError, StateVector, epr, tensor_product

PI1 = np.diag([1, 0, 0, 1, 0, 1]).astype(complex)  # |00>, |11>, |21> on Alice's 6-dim space
PI2 = np.eye(6) - PI1


@pytest.fixture(scope="module")
def tree3():
    return build_assisted_tree(3)


@pytest.fixture(scope="module")
def lifted3():
    return attach_resource(gen_canonical_set(3), epr())


class TestValidateMeasurement:
    def test_split(self):
        chk = validate_measurement(Measurement("A", [PI1, PI2]))
        assert chk.ok and chk.completeness_deviation < 1e-15

    def test_identity(self):
        assert validate_measurement(Measurement("B", [np.eye(4)])).ok

    def test_missing_outcome(self):
        chk = validate_measurement(Measurement("A", [PI1]))
        assert not chk.ok
        assert chk.completeness_deviation == pytest.approx(1)
        assert "completeness" in chk.violations[0]

    def test_non_projector(self):
        k = np.diag([np.sqrt(0.5), 1.0])
        m = Measurement("A", [k, np.diag([np.sqrt(0.5), 0.0])])
        assert not validate_measurement(m).ok
        assert validate_measurement(Measurement("A", m.operators, kind="general")).ok

    def test_random_povms_complete(self, rng):
        for _ in range(20):
            u = random_unitary(rng, 5)
            ops = [np.outer(u[:, k], u[:, k].conj()) for k in range(5)]
            assert validate_measurement(Measurement("A", ops)).ok


class TestStructure:
    def test_children_must_cover(self):
        with pytest.raises(ProtocolError):
            Node(Measurement("A", [PI1, PI2]), {"1": Leaf(0)})

    def test_label_count(self):
        with pytest.raises(ProtocolError):
            Measurement("A", [PI1, PI2], ["x"])

    def test_decoder_must_be_total(self):
        m = Measurement("A", [PI1, PI2])
        b = Measurement("B", [PI1, PI2])
        with pytest.raises(ProtocolError):
            FlatLOProtocol(m, b, {("1", "1"): 0, ("1", "2"): 1, ("2", "1"): None})


class TestRunTree:
    def test_product_member(self, tree3, lifted3):
        branches = run_tree(tree3, lifted3[3])
        assert sum(b.probability for b in branches) == pytest.approx(1)
        assert all(b.decode == 3 for b in branches)
        splits = {b.transcript[:2] for b in branches}
        assert splits == {(("A", "1"), ("B", "2")), (("A", "2"), ("B", "1"))}

    def test_first_member(self, tree3, lifted3):
        branches = run_tree(tree3, lifted3[0])
        assert sum(b.probability for b in branches if b.decode == 0) == pytest.approx(1, abs=1e-12)

    def test_zero_branches_pruned(self, tree3, lifted3):
        # 2 mixed split contexts x 3 x 3 Fourier outcomes; complement and matching contexts carry no mass
        branches = run_tree(tree3, lifted3[3])
        assert len(branches) == 18 and all(b.probability > 1e-12 for b in branches)
        assert not any(("A", "c") in b.transcript or ("B", "c") in b.transcript for b in branches)

    def test_dimension_mismatch(self, tree3):
        with pytest.raises(DimensionError):
            run_tree(tree3, gen_canonical_set(3)[0])

    def test_verify_dimension_mismatch(self, tree3):
        with pytest.raises(DimensionError):
            verify_perfect_discrimination(tree3, gen_canonical_set(3))

    def test_probabilities_sum_to_one(self, tree3, rng):
        for _ in range(20):
            x = random_state(rng, 6, 6)
            assert sum(b.probability for b in run_tree(tree3, x)) == pytest.approx(1, abs=1e-9)


def _flat_dist(branches):
    return {b.transcript: (b.probability, b.decode) for b in branches}


class TestFlatten:
    def test_single_measurement_tree(self):
        m = Measurement("A", [PI1, PI2])
        tree = ProtocolTree(Node(m, {"1": Leaf(0), "2": Leaf(1)}))
        a = classify_adaptivity(tree)
        assert a.flattenable and a.flat.bob.labels == ("id",)

    def test_assisted_is_flattenable(self, tree3):
        a = classify_adaptivity(tree3)
        assert a.flattenable
        assert len(a.flat.alice.labels) == 6 and a.flat.alice.kind == "projective"

    def test_nonmax_requires_cc(self):
        assert classify_adaptivity(build_nonmax_tree(NonMaxParams.symmetric())).kind == "requires-CC"

    def test_flat_matches_tree(self, tree3, lifted3, rng):
        flat = classify_adaptivity(tree3).flat
        inputs = list(lifted3.states) + [random_state(rng, 6, 6) for _ in range(5)]
        for x in inputs:
            want = {}
            for b in run_tree(tree3, x):
                key = flat_transcript(b.transcript)
                p, dec = want.get(key, (0.0, b.decode))
                want[key] = (p + b.probability, dec)
            got = _flat_dist(run_flat(flat, x))
            assert set(got) == set(want)
            for key, (p, dec) in want.items():
                assert got[key][0] == pytest.approx(p, abs=1e-9)
                assert got[key][1] == dec

    def test_flat_decodes_fourier_member(self, tree3, lifted3):
        flat = classify_adaptivity(tree3).flat
        for i in (1, 3):
            branches = run_flat(flat, lifted3[i])
            assert sum(b.probability for b in branches if b.decode == i) == pytest.approx(1, abs=1e-12)


class TestReport:
    def test_perfect_implies_conclusive(self, tree3, lifted3):
        r = verify_perfect_discrimination(tree3, lifted3)
        assert r.perfect and not r.error
        np.testing.assert_allclose(r.conclusive_probabilities, 1, atol=1e-9)

    def test_unnormalized_inputs(self, tree3, lifted3):
        for x in lifted3.states:
            y = StateVector(6, 6, 3.7 * np.exp(1.3j) * x.amplitudes)
            a, b = run_tree(tree3, x), run_tree(tree3, y)
            assert [t.transcript for t in a] == [t.transcript for t in b]
            np.testing.assert_allclose([t.probability for t in a], [t.probability for t in b], atol=1e-15)

    def test_wrong_protocol_flags_error(self, lifted3):
        # swap two decodes: the protocol now mis-identifies members 0 and 1
        tree = build_assisted_tree(3)
        from locdisc.engine import map_leaves

        swapped = map_leaves(tree, lambda t, l: Leaf({0: 1, 1: 0}.get(l.decode, l.decode)))
        r = verify_perfect_discrimination(swapped, lifted3)
        assert r.error and not r.perfect
        assert r.inputs[0].error_probability == pytest.approx(1)

    def test_no_resource_leaves_inputs_merged(self):
        # a trivial tree on the bare qutrit set cannot separate anything
        m = Measurement("A", [np.eye(3)])
        tree = ProtocolTree(Node(m, {"1": Leaf(None)}))
        r = verify_perfect_discrimination(tree, gen_canonical_set(3))
        assert not r.perfect and not r.error
        np.testing.assert_allclose(r.conclusive_probabilities, 0)


def test_tensor_then_run_matches_attach(tree3):
    s = gen_canonical_set(3)
    for i, x in enumerate(s.states):
        b1 = run_tree(tree3, tensor_product(x, epr()))
        assert sum(b.probability for b in b1 if b.decode == i) == pytest.approx(1, abs=1e-12)
