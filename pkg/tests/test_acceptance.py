"""Acceptance suite: one test per checked condition, one PASS/FAIL line each.

Criteria
--------
1. covariance bound chain on 10,000 random samples, < 10 s
2. oriented bound equals the brute-force permutation extremum (n <= 7)
3. range, dominance over Pearson, equality cases
4. monotone simulation benchmark on the default grid, < 10 min
5. NIST StRD benchmark, < 5 s
6. non-monotone stress benchmark
7. convergence in n
8. byte-identical ``bench`` output across thread counts

The expensive grids (4 and 6) run once per session through module fixtures.
The summary of every line is repeated at the end of the pytest run.
"""
from __future__ import annotations

import itertools
import math
import time

import numpy as np
import pytest

from sharpcorr.cli import main as cli_main
from sharpcorr.measures import MeasureId, pearson, rearrangement_correlation
from sharpcorr.nist import load_datasets, nist_benchmark
from sharpcorr.sampling import _cov, oriented_rearranged_covariance, sample_covariance, sample_variance
from sharpcorr.scenarios import Scenario, scenario_registry
from sharpcorr.simulate import SimConfig, run_grid, simulate_pair
from sharpcorr.accuracy import build_report

RESULTS: list[str] = []

RS, RHO, R, TAU = MeasureId.REARRANGEMENT, MeasureId.SPEARMAN, MeasureId.PEARSON, MeasureId.KENDALL
XI, DCOR, HSIC = MeasureId.XI, MeasureId.DCOR, MeasureId.HSIC


def verdict(criterion: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _draw(rng: np.random.Generator, kind: str, n: int) -> np.ndarray:
    if kind == "uniform":
        return rng.uniform(-1, 1, n)
    if kind == "normal":
        return rng.normal(0, 1, n)
    return rng.standard_t(1.5, n)  # heavy tails, infinite variance


def _random_pairs(count: int, seed: int, n_range=(2, 200)):
    rng = np.random.default_rng(seed)
    kinds = ("uniform", "normal", "heavy")
    out = []
    while len(out) < count:
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        x = _draw(rng, kinds[rng.integers(3)], n) * rng.uniform(0.1, 10) + rng.normal(0, 5)
        y = _draw(rng, kinds[rng.integers(3)], n) * rng.uniform(0.1, 10) + rng.normal(0, 5)
        if rng.random() < 0.2:
            y = y + rng.uniform(-3, 3) * x  # some dependence, both signs
        if rng.random() < 0.1:
            y = np.round(y)  # ties
        if np.ptp(x) > 0 and np.ptp(y) > 0:
            out.append((x, y))
    return out


# -- 1 -----------------------------------------------------------------------


def test_c1_inequality_chain():
    tol = 1e-12
    started = time.perf_counter()
    pairs = _random_pairs(10_000, seed=1)
    broken = 0
    for x, y in pairs:
        s_xy = abs(sample_covariance(x, y))
        s_bound = abs(oriented_rearranged_covariance(x, y))
        vx, vy = sample_variance(x), sample_variance(y)
        gap = x.mean() - y.mean()
        chain = [s_xy, s_bound, math.sqrt(vx * vy), 0.5 * (vx + vy), 0.5 * (vx + vy + gap * gap)]
        if any(a > b + tol * abs(b) for a, b in zip(chain, chain[1:])):
            broken += 1
    elapsed = time.perf_counter() - started
    verdict("1", broken == 0 and elapsed < 10.0,
            f"bound chain violated on {broken}/10000 samples, {elapsed:.2f} s (limit 10 s)")


# -- 2 -----------------------------------------------------------------------


def test_c2_permutation_oracle():
    rng = np.random.default_rng(2)
    bitwise = close = wrong = 0
    for _ in range(1000):
        n = int(rng.integers(2, 8))
        x = rng.normal(size=n)
        y = rng.normal(size=n) if rng.random() < 0.8 else rng.integers(0, 3, n).astype(float)
        if np.ptp(y) == 0:
            y[0] += 1.0
        got = oriented_rearranged_covariance(x, y)
        # every pairing of the two samples, with x in ascending order so that
        # the winning pairing is summed in the same order as the bound
        xs = np.sort(x)
        covs = [_cov(xs, y[list(p)]) for p in itertools.permutations(range(n))]
        best = max(covs) if sample_covariance(x, y) >= 0 else min(covs)
        if got == best:
            bitwise += 1
        elif abs(got - best) <= 1e-12 * abs(best):
            close += 1
        else:
            wrong += 1
    verdict("2", wrong == 0,
            f"1000 samples n<=7: {bitwise} bitwise equal, {close} within 1e-12, {wrong} mismatched")


# -- 3 -----------------------------------------------------------------------


def test_c3_range_and_dominance():
    over = under = 0
    for x, y in _random_pairs(5000, seed=3, n_range=(2, 100)):
        rs = rearrangement_correlation(x, y)
        over += abs(rs) > 1.0
        under += abs(rs) < abs(pearson(x, y))
    verdict("3a", over == 0 and under == 0,
            f"|r#| > 1 on {over}, |r#| < |r| on {under} of 5000 random samples")


def test_c3_monotone_equality():
    worst, names = 0.0, []
    for s in scenario_registry("monotone"):
        p = simulate_pair(s, 512, 1.0, 3)
        dev = 1.0 - abs(rearrangement_correlation(p.x, p.y))
        worst = max(worst, dev)
        if dev > 1e-12:
            names.append(s.name)
    verdict("3b", not names,
            f"noiseless n=512 on 50 monotone scenarios: max |1 - |r#|| = {worst:.1e}, failing {names}")


def test_c3_linear_reverts_to_pearson():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        a = rng.uniform(0.1, 10) * rng.choice([-1, 1])
        b = rng.normal(0, 10)
        x = rng.normal(size=64)
        y = a * x + b
        worst = max(worst, abs(rearrangement_correlation(x, y) - pearson(x, y)))
    verdict("3c", worst <= 1e-12, f"100 random (a, b): max |r# - r| = {worst:.1e}")


# -- 4 -----------------------------------------------------------------------


@pytest.fixture(scope="module")
def monotone_bench():
    started = time.perf_counter()
    table = run_grid(SimConfig(), scenario_registry("monotone"))
    elapsed = time.perf_counter() - started
    return build_report(table), elapsed, len(table)


def _mae_line(report, *ids):
    return ", ".join(f"{m.value} {report.mae_by_measure[m]:.4f}" for m in ids)


def test_c4_runtime(monotone_bench):
    _, elapsed, records = monotone_bench
    verdict("4 runtime", elapsed < 600 and records == 94_500,
            f"{records} records in {elapsed:.0f} s (limit 600 s)")


def test_c4_rearrangement_mae(monotone_bench):
    report = monotone_bench[0]
    v = report.mae_by_measure[RS]
    verdict("4 MAE(r#)", abs(v - 0.060) <= 0.03, f"MAE(r#) = {v:.4f}, expected 0.060 +- 0.03")


def test_c4_spearman_mae(monotone_bench):
    report = monotone_bench[0]
    v = report.mae_by_measure[RHO]
    verdict("4 MAE(rho)", abs(v - 0.102) <= 0.03, f"MAE(rho) = {v:.4f}, expected 0.102 +- 0.03")


def test_c4_strict_order(monotone_bench):
    report = monotone_bench[0]
    m = report.mae_by_measure
    verdict("4 order", m[RS] < m[RHO] < m[R],
            f"need MAE(r#) < MAE(rho) < MAE(r): {m[RS]:.6f}, {m[RHO]:.6f}, {m[R]:.6f}")


def test_c4_rearrangement_first(monotone_bench):
    report = monotone_bench[0]
    verdict("4 rank", report.ranking[0] is RS,
            "ranking " + " > ".join(m.value for m in report.ranking))


def test_c4_xi_hsic_below(monotone_bench):
    report = monotone_bench[0]
    top = max(report.rank_of(m) for m in (R, RHO, DCOR))
    ok = report.rank_of(XI) > top and report.rank_of(HSIC) > top
    verdict("4 xi/hsic", ok,
            f"rank of xi {report.rank_of(XI)}, hsic {report.rank_of(HSIC)}; r, rho, dcor within top {top} "
            f"({_mae_line(report, XI, HSIC)})")


# -- 5 -----------------------------------------------------------------------


def test_c5_nist():
    started = time.perf_counter()
    datasets, problems = load_datasets()
    report = nist_benchmark(datasets, list(MeasureId))
    elapsed = time.perf_counter() - started
    v = report.mae_by_measure[RS]
    ok = (not problems and len(datasets) == 5 and v <= 0.02 and report.ranking[:2] == [RS, RHO]
          and elapsed < 5.0)
    verdict("5", ok,
            f"MAE(r#) = {v:.5f} (limit 0.02), ranking starts "
            f"{' > '.join(m.value for m in report.ranking[:3])}, {elapsed:.2f} s (limit 5 s)")


# -- 6 -----------------------------------------------------------------------


@pytest.fixture(scope="module")
def non_monotone_bench():
    return build_report(run_grid(SimConfig(), scenario_registry("non_monotone")))


def test_c6_rearrangement_mae(non_monotone_bench):
    v = non_monotone_bench.mae_by_measure[RS]
    verdict("6 MAE(r#)", 0.3 <= v <= 0.5, f"MAE(r#) = {v:.4f}, expected in [0.3, 0.5]")


def test_c6_placement(non_monotone_bench):
    rep = non_monotone_bench
    k = rep.rank_of(RS)
    ok = all(rep.rank_of(m) < k for m in (XI, DCOR)) and all(rep.rank_of(m) > k for m in (RHO, R, TAU))
    verdict("6 rank", ok, "ranking " + " > ".join(m.value for m in rep.ranking))


# -- 7 -----------------------------------------------------------------------


def test_c7_convergence():
    cubic = Scenario("cubic", "x**3", 0.0, 1.0)
    sizes = (10, 100, 1000)
    exact = [rearrangement_correlation(*_xy(simulate_pair(cubic, n, 1.0, 7))) for n in sizes]
    spread = []
    for n in sizes:
        vals = [rearrangement_correlation(*_xy(simulate_pair(cubic, n, 0.75, seed))) for seed in range(200)]
        spread.append(float(np.std(vals, ddof=1)))
    ok = all(v == 1.0 for v in exact) and spread[0] > spread[1] > spread[2]
    verdict("7", ok,
            f"noiseless r# at n=10/100/1000: {exact}; sd over 200 seeds at R=0.75: "
            + ", ".join(f"{s:.4f}" for s in spread))


def _xy(p):
    return p.x, p.y


# -- 8 -----------------------------------------------------------------------


def test_c8_determinism(tmp_path, capsys):
    args = ["bench", "--family", "monotone", "--n", "64", "--reps", "2", "--r-grid", "0:1:0.25", "--seed", "42"]
    runs = {}
    for label, threads in (("t1", 1), ("t1-again", 1), ("t4", 4), ("t8", 8)):
        out = tmp_path / label
        assert cli_main(args + ["--threads", str(threads), "--out", str(out)]) == 0
        runs[label] = {f: (out / f).read_bytes() for f in ("scores.csv", "report.csv", "scores.json", "report.json")}
    capsys.readouterr()
    differing = sorted({f for r in runs.values() for f in r if r[f] != runs["t1"][f]})
    verdict("8", not differing,
            f"bench outputs across threads 1, 1, 4, 8: {'identical' if not differing else 'differ in ' + str(differing)}")
