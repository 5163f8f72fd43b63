"""Acceptance gate: one test per criterion, summarised at the end of the pytest run."""

import math
import time

import numpy as np
import pytest

from metric_forge import (
    DistanceMatrix,
    b_metric_modulus,
    chain_metric,
    check_baction_axioms,
    default_epsilon_grid,
    equivalence_check,
    gen_baction,
    gen_power_line,
    gen_random_b_metric,
    metrize_b,
    minimal_relaxation_constant,
    modulus_b_metric,
    origin_continuity_delta,
    simple_path_minimum,
    theta_modulus,
    verify_b_metric,
    verify_theta_metric,
    verify_uniform_regularity,
    write_matrix_csv,
)
from metric_forge.cli import main

from oracles import brute_relaxation_constant, brute_simple_paths, dense_quarter_disk_sup


def _exact_triangle_holds(m, tol=1e-9):
    # m[x, z] <= m[x, y] + m[y, z] for all x, y, z at once
    return bool(np.all(m[:, None, :] <= m[:, :, None] + m[None, :, :] + tol))


def test_criterion_1_b_modulus_soundness():
    """1. eps/(2S) modulus: zero uniform-regularity violations on >= 100 b-metric instances in < 10 s"""
    rng = np.random.default_rng(20240601)
    start = time.perf_counter()
    instances = triples = violations = 0
    for k in range(120):
        q = (1.5, 2.0, 3.0)[k % 3]
        n = int(rng.integers(5, 51))
        D = gen_random_b_metric(n, int(rng.integers(0, 2**31)), q)
        S = 2 ** (q - 1)
        assert verify_b_metric(D, S).passed
        grid = default_epsilon_grid(D)
        assert len(grid) == 16
        rep = verify_uniform_regularity(D, b_metric_modulus(S, grid), grid)
        instances += 1
        triples += rep.checked
        violations += rep.n_violations
    elapsed = time.perf_counter() - start
    assert instances >= 100
    assert triples >= 10**5
    assert violations == 0
    assert elapsed < 10.0


@pytest.mark.parametrize(
    "name,q", [("additive", 1.0), ("additive-product", 1.0), ("squared-sum", 2.0)]
)
def test_criterion_2_theta_modulus_soundness(name, q):
    """2. delta/sqrt(2) modulus: zero violations for additive, additive-product, squared-sum; additive within 5% of eps/2"""
    theta = gen_baction(name)
    for seed in range(6):
        D = gen_random_b_metric(30, seed, q)
        assert verify_theta_metric(D, theta).passed
        grid = default_epsilon_grid(D)
        mod = theta_modulus(theta, grid)
        rep = verify_uniform_regularity(D, mod, grid)
        assert rep.n_violations == 0
        if name == "additive":
            for eps, phi in mod.table:
                assert abs(phi - modulus_b_metric(1.0, eps)) <= 0.05 * modulus_b_metric(1.0, eps)


def test_criterion_3_continuity_certificates():
    """3. delta(eps) within 5% of eps/sqrt(2) (additive) and of 0.58579 (additive-product, eps=1)"""
    additive = gen_baction("additive")
    for eps in (0.1, 1.0, 10.0):
        delta = origin_continuity_delta(additive, eps).delta
        assert abs(delta - eps / math.sqrt(2)) <= 0.05 * eps / math.sqrt(2)

    product = gen_baction("additive-product")
    delta = origin_continuity_delta(product, 1.0).delta
    assert abs(delta - 0.58579) <= 0.05 * 0.58579
    # Independent dense polar-grid oracle: sup < 1 at delta, >= 1 five percent further out.
    assert dense_quarter_disk_sup(product, delta) < 1.0
    assert dense_quarter_disk_sup(product, 1.05 * delta) >= 1.0


def test_criterion_4_chain_metric_oracle():
    """4. chain_metric equals exhaustive simple-path minimum (n <= 8, 1e-12); idempotent and monotone on 1000 pairs"""
    rng = np.random.default_rng(7)
    for k in range(40):
        n = 1 + k % 8
        D = gen_random_b_metric(n, int(rng.integers(0, 2**31)), float(rng.choice([1.0, 2.0, 3.0])))
        got = chain_metric(D).d
        np.testing.assert_allclose(got, simple_path_minimum(D), rtol=0, atol=1e-12)
        if n <= 6:
            np.testing.assert_allclose(got, brute_simple_paths(D.d.tolist()), rtol=0, atol=1e-12)

    for _ in range(1000):
        n = int(rng.integers(2, 12))
        a = np.triu(rng.uniform(0.01, 3.0, (n, n)), 1)
        C1 = DistanceMatrix(a + a.T)
        bump = np.triu(rng.uniform(0.0, 1.0, (n, n)), 1)
        C2 = DistanceMatrix(C1.d + bump + bump.T)
        out1, out2 = chain_metric(C1), chain_metric(C2)
        assert np.all(out1.d <= out2.d + 1e-12)
        np.testing.assert_allclose(chain_metric(out1).d, out1.d, rtol=0, atol=1e-12)


def test_criterion_5_metrization_certificate():
    """5. q=2 line samples give p=0.5, distortion 1; random q=2 (n<=100) pass equivalence with distortion <= 4"""
    rng = np.random.default_rng(11)
    for n in (3, 4, 7, 12):
        xs = np.sort(rng.uniform(-10, 10, n))
        D, S = gen_power_line(xs, 2)
        R = metrize_b(D, S)
        assert R.p == 0.5
        assert abs(R.distortion_max - 1.0) <= 1e-9
        assert _exact_triangle_holds(R.metric.d)

    for n in (2, 10, 25, 50, 75, 100):
        D = gen_random_b_metric(n, int(rng.integers(0, 2**31)), 2.0)
        R = metrize_b(D, 2.0)
        assert R.distortion_max <= 4.0
        assert equivalence_check(D, R).passed
        assert _exact_triangle_holds(R.metric.d)


def test_criterion_6_negative_examples():
    """6. max fails (ii), shifted fails (i), (x-y)^2 with S=1.9 fails with (4, 3.8); each in < 1 s"""
    start = time.perf_counter()
    rep = check_baction_axioms(gen_baction("max"))
    assert time.perf_counter() - start < 1.0
    assert "ii" in rep.axioms_failed()
    theta = gen_baction("max")
    v = next(v for v in rep.violations if v.axiom == "ii")
    (a, b), (c, d) = v.witness
    assert theta(a, b) == v.left >= v.right == theta(c, d)

    start = time.perf_counter()
    rep = check_baction_axioms(gen_baction("shifted"))
    assert time.perf_counter() - start < 1.0
    assert "i" in rep.axioms_failed()
    assert any(v.witness == ((0.0, 0.0),) and v.left == 1.0 for v in rep.violations)

    start = time.perf_counter()
    D, _ = gen_power_line([0, 1, 2], 2)
    rep = verify_b_metric(D, 1.9)
    assert time.perf_counter() - start < 1.0
    hit = [v for v in rep.violations if v.witness == (0, 1, 2)]
    assert hit and hit[0].left == 4.0 and abs(hit[0].right - 3.8) <= 1e-12


def test_criterion_7_minimal_constant():
    """7. minimal_relaxation_constant equals brute force exactly for n <= 20 and is >= 1 for n >= 2"""
    rng = np.random.default_rng(3)
    for n in range(1, 21):
        for kind in range(3):
            if kind == 0:
                D = gen_random_b_metric(n, int(rng.integers(0, 2**31)), float(rng.uniform(1, 4)))
            else:
                a = np.triu(rng.uniform(0.01, 10.0, (n, n)) ** (1 + kind), 1)
                D = DistanceMatrix(a + a.T)
            S = minimal_relaxation_constant(D)
            assert S == brute_relaxation_constant(D.d.tolist())
            if n >= 2:
                assert S >= 1.0
            else:
                assert S == 0.0


def test_criterion_8_performance(tmp_path, capsys):
    """8. CLI metrize n=500 in < 5 s, validate n=500 in < 2 s"""
    path = tmp_path / "big.csv"
    write_matrix_csv(gen_random_b_metric(500, 42, 2.0), path)

    start = time.perf_counter()
    code = main(["validate", str(path), "--mode", "b", "--S", "2", "--out", str(tmp_path / "v.json")])
    validate_s = time.perf_counter() - start
    assert code == 0

    start = time.perf_counter()
    code = main(["metrize", str(path), "--mode", "b", "--S", "2", "--out", str(tmp_path / "m.json")])
    metrize_s = time.perf_counter() - start
    assert code == 0
    capsys.readouterr()
    print(f"validate n=500: {validate_s:.2f} s, metrize n=500: {metrize_s:.2f} s")
    assert validate_s < 2.0
    assert metrize_s < 5.0
