import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metric_forge import (
    DistanceMatrix,
    InvalidParameterError,
    MalformedInputError,
    PointSet,
    check_point_axioms,
    gen_baction,
    gen_random_b_metric,
    is_metric,
    minimal_relaxation_constant,
    relaxation_witness,
    verify_b_metric,
    verify_theta_metric,
)

from oracles import brute_relaxation_constant, brute_triangle_violations


@st.composite
def symmetric_samples(draw, max_n=8, lo=0.1, hi=10.0):
    n = draw(st.integers(min_value=1, max_value=max_n))
    vals = draw(st.lists(st.floats(lo, hi), min_size=n * n, max_size=n * n))
    a = np.array(vals).reshape(n, n)
    a = np.triu(a, 1)
    return DistanceMatrix(a + a.T)


def test_point_set_rejects_duplicates():
    with pytest.raises(MalformedInputError):
        PointSet(("a", "b", "a"))
    assert PointSet.range(3).n == 3


@pytest.mark.parametrize(
    "bad",
    [np.zeros((2, 3)), [[0.0, np.nan], [np.nan, 0.0]], [[0.0, np.inf], [1.0, 0.0]], [[0.0, -1.0], [-1.0, 0.0]]],
)
def test_malformed_tables(bad):
    with pytest.raises(MalformedInputError):
        DistanceMatrix(bad)


def test_size_cap(monkeypatch):
    monkeypatch.setenv("METRIC_FORGE_MAX_N", "3")
    DistanceMatrix(np.zeros((3, 3)))
    with pytest.raises(MalformedInputError):
        DistanceMatrix(np.zeros((4, 4)))


def test_point_axioms_pass(unit_triangle):
    assert check_point_axioms(unit_triangle).passed


def test_symmetry_violation():
    rep = check_point_axioms(DistanceMatrix([[0, 1, 1], [2, 0, 1], [1, 1, 0]]))
    assert not rep.passed
    (v,) = rep.violations
    assert (v.axiom, v.witness, v.left, v.right) == ("symmetry", (0, 1), 1.0, 2.0)


def test_identity_violation():
    rep = check_point_axioms(DistanceMatrix([[0.5, 1], [1, 0]]))
    assert [(v.axiom, v.witness) for v in rep.violations] == [("identity", (0, 0))]


def test_positivity_violation():
    rep = check_point_axioms(DistanceMatrix([[0, 0, 1], [0, 0, 1], [1, 1, 0]]))
    assert rep.counts == {"positivity": 2}


class TestMinimalConstant:
    def test_single_point(self):
        assert minimal_relaxation_constant(DistanceMatrix([[0.0]])) == 0.0
        assert minimal_relaxation_constant(DistanceMatrix([])) == 0.0

    def test_unit_triangle(self, unit_triangle):
        # 27 ordered triples; degenerate y = x gives 1, proper ones 1/2.
        assert brute_relaxation_constant(unit_triangle.d.tolist()) == 1.0
        assert minimal_relaxation_constant(unit_triangle) == 1.0

    def test_squared_line(self, squared_line):
        S, witness = relaxation_witness(squared_line)
        assert S == brute_relaxation_constant(squared_line.d.tolist()) == 2.0
        assert witness in {(0, 1, 2), (2, 1, 0)}

    @settings(max_examples=60, deadline=None)
    @given(symmetric_samples())
    def test_matches_brute_force(self, D):
        assert minimal_relaxation_constant(D) == brute_relaxation_constant(D.d.tolist())
        if D.n >= 2:
            assert minimal_relaxation_constant(D) >= 1.0


class TestVerifyB:
    def test_unit_triangle_metric(self, unit_triangle):
        assert verify_b_metric(unit_triangle, 1.0).passed

    def test_squared_line_fails_below_two(self, squared_line):
        rep = verify_b_metric(squared_line, 1.9)
        assert not rep.passed
        v = rep.violations[0]
        assert v.witness == (0, 1, 2)
        assert v.left == 4.0 and v.right == pytest.approx(3.8)

    def test_passes_at_minimal_constant(self, squared_line):
        assert verify_b_metric(squared_line, minimal_relaxation_constant(squared_line)).passed

    def test_large_magnitudes_pass_at_minimum(self):
        D = gen_random_b_metric(15, 3, 2.0).d * 1e9
        D = DistanceMatrix(D)
        assert verify_b_metric(D, minimal_relaxation_constant(D)).passed

    @pytest.mark.parametrize("S", [0.0, -1.0, float("nan")])
    def test_invalid_S(self, squared_line, S):
        with pytest.raises(InvalidParameterError):
            verify_b_metric(squared_line, S)

    def test_includes_point_axioms(self):
        D = DistanceMatrix([[0, 1, 1], [2, 0, 1], [1, 1, 0]])
        assert "symmetry" in verify_b_metric(D, 10.0).axioms_failed()

    def test_witness_truncation_keeps_counts(self):
        D = gen_random_b_metric(20, 0, 3.0)
        full = verify_b_metric(D, 1.0)
        cut = verify_b_metric(D, 1.0, max_witnesses=3)
        assert full.n_violations == cut.n_violations > 3
        assert len(cut.violations) == 3

    @settings(max_examples=40, deadline=None)
    @given(symmetric_samples(), st.floats(0.5, 3.0), st.floats(0.0, 2.0))
    def test_monotone_in_S(self, D, S1, extra):
        if verify_b_metric(D, S1).passed:
            assert verify_b_metric(D, S1 + extra).passed

    @settings(max_examples=40, deadline=None)
    @given(symmetric_samples(max_n=10))
    def test_threshold_characterisation(self, D):
        if D.n < 2:
            return
        S_min = minimal_relaxation_constant(D)
        assert verify_b_metric(D, S_min).passed
        assert verify_b_metric(D, S_min * 1.01).passed
        # Entries lie in [0.1, 10], so a 1e-6 relative cut exceeds tol_abs.
        assert not verify_b_metric(D, S_min * (1 - 1e-6)).passed

    @settings(max_examples=40, deadline=None)
    @given(symmetric_samples(), st.floats(0.5, 2.0))
    def test_witnesses_replay(self, D, S):
        for v in verify_b_metric(D, S).violations:
            x, y, z = v.witness
            assert abs(D.d[x, z] - v.left) <= 1e-12
            assert abs(S * (D.d[x, y] + D.d[y, z]) - v.right) <= 1e-12
            assert v.left > v.right

    def test_violations_match_brute_force(self):
        D = gen_random_b_metric(9, 11, 2.5)
        S = 1.2
        expected = brute_triangle_violations(D.d.tolist(), lambda a, b: S * (a + b))
        got = sorted(v.witness for v in verify_b_metric(D, S).violations)
        assert got == sorted(expected)


class TestVerifyTheta:
    def test_metric_with_additive(self, unit_triangle):
        assert verify_theta_metric(unit_triangle, gen_baction("additive")).passed

    def test_squared_line_with_squared_sum(self, squared_line):
        assert verify_theta_metric(squared_line, gen_baction("squared-sum")).passed

    def test_squared_line_with_additive(self, squared_line):
        rep = verify_theta_metric(squared_line, gen_baction("additive"))
        assert {v.witness for v in rep.violations} == {(0, 1, 2), (2, 1, 0)}
        v = rep.violations[0]
        assert (v.left, v.right) == (4.0, 2.0)

    @settings(max_examples=50, deadline=None)
    @given(symmetric_samples())
    def test_additive_iff_metric(self, D):
        direct = not brute_triangle_violations(D.d.tolist(), lambda a, b: a + b)
        assert verify_theta_metric(D, gen_baction("additive")).passed == direct
        assert is_metric(D) == direct

    def test_evaluation_error_propagates(self, unit_triangle):
        from metric_forge import BAction, EvaluationError

        broken = BAction(lambda s, t: s - t - 5, 10.0, "broken")
        with pytest.raises(EvaluationError):
            verify_theta_metric(unit_triangle, broken)
