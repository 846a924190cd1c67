"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (add ``-s`` to see only the lines).
"""
import math
import time

import numpy as np
import pytest
from scipy import stats

from parity_sampler import lattice, suite
from parity_sampler.corpus import named_graph
from parity_sampler.lattice import BETA_C, P_C, build_box, dual_beta, face_statistics, sample_even_lattice


@pytest.fixture
def report(capsys):
    def _report(num: int, name: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[criterion {num}] {'PASS' if ok else 'FAIL'} {name}: {detail}")
    return _report


def test_criterion_1_exact_identities(report):
    t0 = time.perf_counter()
    recs = suite.exact_identity_suite()
    wall = time.perf_counter() - t0
    worst = {}
    for r in recs:
        worst[r["check"]] = max(worst.get(r["check"], 0.0), r["deviation"])
    graphs = {r["graph"] for r in recs}
    ok = (max(worst.values()) < 1e-12 and wall < 60 and len(graphs) == 8
          and set(worst) == {"high-temp", "cyclic", "converse", "forward"})
    detail = ", ".join(f"{k} max dev {v:.2e}" for k, v in sorted(worst.items()))
    report(1, "exact identity suite", ok, f"{len(recs)} items on {len(graphs)} graphs, {detail}, {wall:.1f}s")
    assert ok


def test_criterion_2_sampler_distribution(report):
    g = named_graph("k4")
    lines, ok = [], True
    for i, p in enumerate((0.1, 0.3, 0.5, 0.7, 0.9)):
        rec = suite.sampler_suite(g, p, 100_000, seed=200 + i, backend="cftp", name="k4")
        good = rec["tv"] < 0.01 and rec["pvalue"] > 1e-4 and rec["odd_samples"] == 0
        ok &= good
        lines.append(f"p={p} tv={rec['tv']:.4f} chi2 p={rec['pvalue']:.3g}")
    report(2, "K4 full pipeline, N=1e5 per p", ok, "; ".join(lines))
    assert ok


def test_criterion_3_cftp_exactness(report):
    cases = [("path-3", 0.5), ("cycle-4", 0.4), ("cycle-4", 0.8)]
    lines, ok = [], True
    for i, (name, r) in enumerate(cases):
        rec = suite.cftp_suite(named_graph(name), r, [0, 2], 100_000, seed=300 + i, name=name)
        good = rec["tv"] < 0.01 and rec["failed"] == 0 and rec["coalesced"] == 100_000
        ok &= good
        lines.append(f"{name} W={{0,2}} r={r} tv={rec['tv']:.4f} coalesced={rec['coalesced']}/100000 "
                     f"depths={rec['depth_histogram']}")
    report(3, "conditioned CFTP, N=1e5", ok, "; ".join(lines))
    assert ok


def test_criterion_4_bracket_soundness(report):
    recs = suite.bracket_suite(trajectories=1000, seed=4)
    graphs = {r["graph"] for r in recs}
    small = {name for name, g in suite.corpus_graphs().items() if g.n_edges <= 6}
    sandwiches = sum(r["sandwiches"] for r in recs)
    violations = sum(r["violations"] for r in recs)
    mismatch = sum(r["singleton_mismatch"] for r in recs)
    ok = graphs == small and violations == 0 and mismatch == 0 and sandwiches > 0
    report(4, "bracket soundness", ok,
           f"{len(recs)} (graph, W) cases on {sorted(graphs)}, {sandwiches} distinct sandwiches, "
           f"{violations} violations, {mismatch} singleton mismatches")
    assert ok


def test_criterion_5_constants(report):
    dev = abs(dual_beta(1 / (2 + math.sqrt(2))) - 0.5 * math.log(1 + math.sqrt(2)))
    ok = dev < 1e-12 and f"{P_C:.9f}" == "0.292893219" and abs(BETA_C - 0.4406867935) < 1e-10
    report(5, "constants", ok, f"p_c={P_C!r} beta_c={BETA_C!r} |dual_beta(p_c)-beta_c|={dev:.1e}")
    assert ok


def test_criterion_6_rhombus_crossing(report):
    lines, ok = [], True
    for i, beta in enumerate((0.0, 0.2)):
        est = lattice.rhombus_crossing(8, beta, 10_000, np.random.default_rng(600 + i))
        good = abs(est.estimate - 0.5) < 0.02
        ok &= good
        lines.append(f"beta={beta} estimate={est.estimate:.4f} (se {est.stderr:.4f})")
    report(6, "triangular rhombus n=8, N=1e4", ok, "; ".join(lines))
    assert ok


def test_criterion_7_phase_qualitative(report):
    box = build_box(8, 8, wired=True)
    area = box.n_cells

    def largest(p, seed, reps=50):
        rng = np.random.default_rng(seed)
        return np.array([face_statistics(box, sample_even_lattice(box, p, rng)).largest_face_area / area
                         for _ in range(reps)])

    low, high = largest(0.05, 700), largest(0.45, 701)
    test = stats.mannwhitneyu(low, high, alternative="greater")
    paired = float(np.mean(low > high))

    grid = [0.05, 0.15, 0.25, 0.35, 0.45]
    means, ses = [], []
    for i, p in enumerate(grid):
        rng = np.random.default_rng(710 + i)
        d = np.array([len(sample_even_lattice(box, p, rng)) / box.graph.n_edges for _ in range(50)])
        means.append(d.mean())
        ses.append(d.std(ddof=1) / math.sqrt(len(d)))
    steps = [(b - a, 3 * math.hypot(sa, sb)) for a, b, sa, sb in zip(means, means[1:], ses, ses[1:])]
    monotone = all(diff > -band for diff, band in steps)
    ok = test.pvalue < 0.01 and monotone
    report(7, "16x16 wired box, N=50", ok,
           f"largest-face fraction mean {low.mean():.3f} (p=0.05) vs {high.mean():.3f} (p=0.45), "
           f"Mann-Whitney one-sided p={test.pvalue:.2e}, paired exceedance {paired:.2f}; "
           f"density means {[round(float(m), 4) for m in means]} monotone={monotone}")
    assert ok
