"""Acceptance gate: one pass/fail line per criterion, stated tolerances.

Each test prints a single summary line even under captured output so a
plain pytest run shows the scoreboard; the assertions carry the same
bounds. Monte Carlo checks run at fixed seeds.
"""
import json
import time

import numpy as np
import pytest

import oracles
from wasserstat import (
    Counts,
    CostMatrix,
    Measure,
    alt_limit_value,
    ci_two_sample_alt,
    convergence_study,
    derivative_bootstrap,
    directional_derivative,
    duality_gap,
    ks_distance,
    limit_sample,
    line_limit_sample,
    max_dual_alt,
    max_dual_null,
    mofn_bootstrap,
    naive_bootstrap,
    solve_ot,
    tree_cost,
    tree_limit_sample,
    wasserstein,
)
from wasserstat import test_two_sample_null as null_test
from wasserstat.cli import main as cli_main
from wasserstat.trees import Tree

TWO_POINT = CostMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]), exponent=1.0, metric_flag=True)
LINE3 = CostMatrix(
    np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]]),
    exponent=1.0,
    metric_flag=True,
)


def report(capsys, tag, ok, detail):
    with capsys.disabled():
        print(f"\n[{tag}] {'PASS' if ok else 'FAIL'}: {detail}")


def random_instance(rng, n, allow_zero=True):
    r = oracles.random_measure(rng, n)
    s = oracles.random_measure(rng, n)
    if allow_zero and n > 1 and rng.random() < 0.3:
        i = int(rng.integers(0, n))
        r[i] = 0.0
        r /= r.sum()
    return r, s


def random_tree(rng, n):
    parent = np.zeros(n, dtype=np.int64)
    for i in range(1, n):
        parent[i] = rng.integers(0, i)
    weight = rng.uniform(0.2, 2.0, size=n)
    weight[0] = 0.0
    return Tree(tuple(f"n{i}" for i in range(n)), parent, weight)


def test_c01_exact_transport_matches_vertex_enumeration(capsys):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    max_diff = 0.0
    max_gap = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 5))
        entries = oracles.random_cost(rng, n)
        cm = CostMatrix(entries, exponent=1.0)
        r_arr, s_arr = random_instance(rng, n)
        r, s = Measure(r_arr), Measure(s_arr)
        sol = solve_ot(r, s, cm)
        want = oracles.vertex_minimum(r_arr, s_arr, entries)
        max_diff = max(max_diff, abs(sol.value_pp - want))
        max_gap = max(max_gap, duality_gap(sol, r, s, cm))
    elapsed = time.perf_counter() - start
    ok = max_diff <= 1e-8 and max_gap <= 1e-9 and elapsed < 30
    report(
        capsys,
        "c01 exact transport",
        ok,
        f"500 instances N<=4, max |value - vertex enum| {max_diff:.2e}, "
        f"max duality gap {max_gap:.2e}, {elapsed:.1f}s (< 30s)",
    )
    assert max_diff <= 1e-8
    assert max_gap <= 1e-9
    assert elapsed < 30


def test_c02_dual_max_routes_agree(capsys):
    rng = np.random.default_rng(202)
    start = time.perf_counter()
    max_diff = 0.0
    for i in range(200):
        n = int(rng.integers(2, 9))
        if i % 2:
            entries = oracles.random_cost(rng, n)
        else:
            entries = oracles.random_metric_cost(rng, n, p=float(rng.choice([1.0, 2.0])))
        g = oracles.random_balanced(rng, n)
        got = max_dual_null(g, CostMatrix(entries, exponent=1.0))
        want = oracles.dual_polytope_max(g, entries)
        max_diff = max(max_diff, abs(got - want))
    elapsed = time.perf_counter() - start
    ok = max_diff <= 1e-8 and elapsed < 30
    report(
        capsys,
        "c02 dual maximum",
        ok,
        f"200 instances N<=8, transport route vs dense LP, "
        f"max |diff| {max_diff:.2e}, {elapsed:.1f}s (< 30s)",
    )
    assert max_diff <= 1e-8
    assert elapsed < 30


def test_c03_derivative_matches_finite_difference(capsys):
    rng = np.random.default_rng(303)
    max_diff = 0.0
    for i in range(100):
        n = int(rng.integers(2, 7))
        p = 1.0 if i % 2 else 2.0
        entries = oracles.random_metric_cost(rng, n, p=p)
        cm = CostMatrix(entries, exponent=p)
        r = Measure(oracles.random_measure(rng, n, floor=0.05))
        s = Measure(oracles.random_measure(rng, n, floor=0.05))
        h1 = oracles.random_balanced(rng, n)
        h2 = oracles.random_balanced(rng, n)
        got = directional_derivative(r, s, cm, h1, h2)
        want = oracles.fd_derivative(r.mass, s.mass, entries, h1, h2, t=1e-5)
        max_diff = max(max_diff, abs(got - want))
    ok = max_diff <= 1e-3
    report(
        capsys,
        "c03 derivative",
        ok,
        f"100 instances N<=6, p in {{1,2}}, finite difference at t=1e-5, "
        f"max |diff| {max_diff:.2e} (<= 1e-3)",
    )
    assert max_diff <= 1e-3


def test_c04_tree_sampler_matches_general(capsys):
    rng = np.random.default_rng(404)
    start = time.perf_counter()
    worst = 0.0
    for i in range(20):
        n = int(rng.integers(2, 16))
        t = random_tree(rng, n)
        r = Measure(oracles.random_measure(rng, n, floor=0.01))
        p = 1.0 if i % 2 else 2.0
        closed = tree_limit_sample(t, r, p, 20000, seed=1000 + i).draws
        general = limit_sample(
            "one-sample-null", r, None, tree_cost(t, p), p, 20000, seed=2000 + i
        ).draws
        worst = max(worst, ks_distance(closed, general))
    elapsed = time.perf_counter() - start
    ok = worst <= 0.02 and elapsed < 300
    report(
        capsys,
        "c04 tree sampler",
        ok,
        f"20 random trees N<=15, 2e4 draws each route, "
        f"max KS {worst:.4f} (<= 0.02), {elapsed:.1f}s (< 300s)",
    )
    assert worst <= 0.02
    assert elapsed < 300


def test_c05_line_sampler_matches_chain_tree(capsys):
    rng = np.random.default_rng(505)
    worst = 0.0
    for i in range(10):
        n = int(rng.integers(2, 7))
        pts = np.sort(rng.uniform(0.0, 4.0, size=n))
        while n > 1 and np.diff(pts).min() < 0.05:
            pts = np.sort(rng.uniform(0.0, 4.0, size=n))
        r = Measure(oracles.random_measure(rng, n, floor=0.02))
        line = line_limit_sample(pts, r, 20000, seed=3000 + i).draws
        parent = np.maximum(np.arange(n) - 1, 0)
        chain = Tree(
            tuple(f"x{j}" for j in range(n)),
            parent,
            np.concatenate([[0.0], np.diff(pts)]),
        )
        closed = tree_limit_sample(chain, r, 2.0, 20000, seed=4000 + i).draws
        worst = max(worst, ks_distance(line, closed))
    ok = worst <= 0.02
    report(
        capsys,
        "c05 line sampler",
        ok,
        f"10 line instances N<=6 vs chain trees, max KS {worst:.4f} (<= 0.02)",
    )
    assert worst <= 0.02


def test_c06_alt_value_matches_face_lp(capsys):
    rng = np.random.default_rng(606)
    max_diff = 0.0
    for i in range(10):
        n = int(rng.integers(2, 6))
        entries = oracles.random_metric_cost(rng, n, p=1.0)
        p = float((1.0, 2.0, 3.0)[i % 3])
        cm = CostMatrix(entries**p, exponent=p)
        r = Measure(oracles.random_measure(rng, n, floor=0.03))
        s = Measure(oracles.random_measure(rng, n, floor=0.03))
        w = wasserstein(r, s, cm)
        if w <= 1e-6:
            continue
        lam = float(rng.uniform(0.1, 0.9))
        wpp = w**p
        prefactor = (1.0 / p) * wpp ** ((1.0 - p) / p)
        for _ in range(100):
            g = oracles.random_balanced(rng, n, scale=0.5)
            h = oracles.random_balanced(rng, n, scale=0.5)
            got = alt_limit_value(g, h, r, s, cm, lam, p)
            want = prefactor * max_dual_alt(g, h, r, s, cm, lam)
            max_diff = max(max_diff, abs(got - want))
    ok = max_diff <= 1e-6
    report(
        capsys,
        "c06 alternative value",
        ok,
        f"10 instances x 100 directions, scalarized route vs face LP, "
        f"max |diff| {max_diff:.2e} (<= 1e-6)",
    )
    assert max_diff <= 1e-6


def test_c07_grid_convergence(capsys):
    start = time.perf_counter()
    rows = convergence_study(3, 1.0, [10, 100, 1000, 5000], n_measures=5, M=20000, seed=0, p=2.0)
    elapsed = time.perf_counter() - start
    ks = [row.ks for row in rows]
    decreasing = all(a > b for a, b in zip(ks, ks[1:]))
    ok = decreasing and ks[-1] <= 0.05 and elapsed < 600
    report(
        capsys,
        "c07 grid convergence",
        ok,
        f"3x3 grid, n in (10,100,1000,5000): KS {[round(v, 4) for v in ks]}, "
        f"strictly decreasing {decreasing}, final <= 0.05, {elapsed:.1f}s (< 600s)",
    )
    assert decreasing
    assert ks[-1] <= 0.05
    assert elapsed < 600


def test_c08_bootstrap_consistency_contrast(capsys):
    # one plausible realization of two size-5000 null samples; exactly
    # balanced counts would hide the naive scheme's folding defect
    x = Counts(np.array([2503, 2497]))
    y = Counts(np.array([2500, 2500]))
    mo = mofn_bootstrap(x, y, TWO_POINT, 1.0, 2000, seed=3)
    de = derivative_bootstrap(x, y, TWO_POINT, 1.0, 2000, seed=3)
    na = naive_bootstrap(x, y, TWO_POINT, 1.0, 2000, seed=3)
    assert mo.k == 293
    ks_mo = oracles.ks_to_half_normal(mo.values, 0.5)
    ks_de = oracles.ks_to_half_normal(de.values, 0.5)
    ks_na = oracles.ks_to_half_normal(na.values, 0.5)
    ok = ks_mo <= 0.05 and ks_de <= 0.05 and ks_na >= 2.0 * ks_de
    report(
        capsys,
        "c08 bootstrap contrast",
        ok,
        f"n=m=5000 two-point null, B=2000: m-of-n KS {ks_mo:.4f} (<= 0.05), "
        f"derivative KS {ks_de:.4f} (<= 0.05), naive KS {ks_na:.4f} "
        f"(>= 2x derivative = {2 * ks_de:.4f})",
    )
    assert ks_mo <= 0.05
    assert ks_de <= 0.05
    assert ks_na >= 2.0 * ks_de


def test_c09_test_size_and_ci_coverage(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(909)
    reps = 500

    rejections = 0
    for i in range(reps):
        x = Counts(rng.multinomial(1000, [0.5, 0.5]))
        y = Counts(rng.multinomial(1000, [0.5, 0.5]))
        rep = null_test(x, y, TWO_POINT, 1.0, M=2000, seed=i)
        rejections += rep.p_value <= 0.05
    size = rejections / reps

    r_true = np.array([0.5, 0.3, 0.2])
    s_true = np.array([0.2, 0.3, 0.5])
    w_true = wasserstein(Measure(r_true), Measure(s_true), LINE3, p=1.0)
    covered = 0
    for i in range(reps):
        x = Counts(rng.multinomial(2000, r_true))
        y = Counts(rng.multinomial(2000, s_true))
        ci = ci_two_sample_alt(x, y, LINE3, 1.0, level=0.95, M=2000, seed=i)
        covered += ci.lower <= w_true <= ci.upper
    coverage = covered / reps
    elapsed = time.perf_counter() - start

    ok = 0.03 <= size <= 0.08 and coverage >= 0.90 and elapsed < 900
    report(
        capsys,
        "c09 calibration",
        ok,
        f"size {size:.3f} in [0.03, 0.08] (500 reps, n=m=1000); "
        f"95% CI coverage {coverage:.3f} >= 0.90 (500 reps, n=m=2000); "
        f"{elapsed:.1f}s (< 900s)",
    )
    assert 0.03 <= size <= 0.08
    assert coverage >= 0.90
    assert elapsed < 900


def test_c10_cli_determinism(capsys, tmp_path):
    def put(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    cost = put("cost.csv", ",a,b,c\na,0,1,2\nb,1,0,1\nc,2,1,0\n")
    r = put("r.csv", "id,mass\na,0.5\nb,0.3\nc,0.2\n")
    s = put("s.csv", "id,mass\na,0.2\nb,0.3\nc,0.5\n")
    tree = put("tree.csv", "child,parent,weight\nb,a,1.0\nc,b,1.0\nd,b,0.5\n")
    tree_r = put("tree_r.csv", "id,mass\na,0.4\nb,0.2\nc,0.2\nd,0.2\n")
    x = put("x.csv", "id,count\na,30\nb,40\nc,30\n")
    y = put("y.csv", "id,count\na,25\nb,45\nc,30\n")

    commands = {
        "dist": ["dist", "--cost", cost, "--r", r, "--s", s, "-p", "1"],
        "limit": ["limit", "--regime", "two-sample-alt", "--cost", cost, "--r", r,
                  "--s", s, "--lam", "0.4", "-p", "2", "-M", "400", "--seed", "3"],
        "tree-limit": ["tree-limit", "--tree", tree, "--r", tree_r, "-p", "2",
                       "-M", "400", "--seed", "4"],
        "test": ["test", "--cost", cost, "--x", x, "--y", y, "-p", "1",
                 "-M", "400", "--seed", "5"],
        "ci": ["ci", "--cost", cost, "--x", x, "--y", y, "-p", "1", "-M", "400",
               "--seed", "6", "--level", "0.9"],
        "bootstrap": ["bootstrap", "--scheme", "m-of-n", "--cost", cost, "--x", x,
                      "--y", y, "-p", "1", "-B", "200", "--seed", "7"],
        "convergence": ["convergence", "--grid-size", "2", "--n-list", "10,50",
                        "--measures", "2", "-M", "300", "--seed", "8"],
    }

    stable = []
    for name, argv in commands.items():
        outputs = []
        for run, workers in enumerate(("1", "4", "1")):
            out = str(tmp_path / f"{name}.{run}.out")
            code = cli_main(argv + ["--workers", workers, "--output", out])
            assert code == 0, f"{name} exited {code}"
            blob = open(out, "rb").read()
            try:
                blob += open(out + ".meta.json", "rb").read()
            except OSError:
                pass
            outputs.append(blob)
        same = outputs[0] == outputs[1] == outputs[2]
        stable.append(same)
        assert same, f"{name} output varies across reruns/worker counts"
    ok = all(stable)
    report(
        capsys,
        "c10 determinism",
        ok,
        f"all {len(commands)} subcommands byte-identical across reruns "
        f"and worker counts 1 vs 4",
    )
    assert ok


def test_scoreboard_footer(capsys):
    # runs last: a blank line so the scoreboard reads cleanly in -q output
    with capsys.disabled():
        print()
