"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s`.  The heavy scans are
shared through session fixtures; several criteria consume the CLI's own
CSV/summary artifacts so the whole pipeline is exercised end to end.
The fixed thresholds for the heteroclinic scenario are backed by the
committed pilot record in tests/data/heteroclinic_pilot.txt.
"""

import math
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np
import pytest

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

import optstate as o
from optstate import reports
from optstate.basins import ClassifyParams
from optstate.measures import geometric_schedule, mixture_hull_distance, point_masses
from optstate.potentials import check_subadditivity, lemma_sub_check, truncate


def report(num, ok, detail):
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {num}: {detail}", flush=True)
    assert ok, f"criterion {num}: {detail}"


def _load_summary(path):
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _run_cli(args, out_dir):
    res = subprocess.run(
        [sys.executable, "-m", "optstate.cli", *args, "--out", str(out_dir)],
        capture_output=True, text=True,
    )
    assert res.returncode == 0, res.stderr
    return out_dir


# ---------------------------------------------------------------------------
# shared heavy fixtures


@pytest.fixture(scope="session")
def builtin_potentials(doubling_basic, doubling_prop43):
    """The built-in potentials plus the truncation of each, with the
    system each one lives on."""
    entries = []
    for scn in (doubling_basic, doubling_prop43):
        for name, phi in scn.potentials.items():
            entries.append((name, phi, scn.system))
    entries += [(f"trunc:{name}", truncate(phi), system)
                for name, phi, system in list(entries)]
    return entries


@pytest.fixture(scope="session")
def prop43_scan_dirs(tmp_path_factory):
    """Criterion-4 scan through the CLI, run at workers 1 and 4."""
    base = tmp_path_factory.mktemp("prop43-scan")
    dirs = {}
    for workers in (1, 4):
        out = base / f"w{workers}"
        out.mkdir()
        _run_cli(["scan-growth", "--scenario", "doubling-prop43",
                  "--potential", "prop43", "--grid", "10000",
                  "--n", "100000", "--workers", str(workers)], out)
        dirs[workers] = out
    return dirs


@pytest.fixture(scope="session")
def observability_dirs(tmp_path_factory):
    """Criterion-9 observability scans through the CLI at workers 1 and 4."""
    base = tmp_path_factory.mktemp("observability")
    dirs = {}
    for tag, mu, eps in (("lebesgue", "lebesgue", "0.2,0.05"),
                         ("dirac0", "dirac:0", "0.2,0.01")):
        for workers in (1, 4):
            out = base / f"{tag}-w{workers}"
            out.mkdir()
            _run_cli(["observability", "--scenario", "doubling-basic",
                      "--mu", mu, "--epsilon", eps, "--grid", "2500",
                      "--n", "100000", "--workers", str(workers)], out)
            dirs[(tag, workers)] = out
    return dirs


def _heteroclinic_cell_stats(scn, workers):
    """Per-cell (spread, hull distance, visit fraction, largest rate) on the
    interior barycentric grid, horizon 1e5."""
    system = scn.system
    space = system.space
    metric = o.default_metric(space)
    bary = np.array([1 / 3, 1 / 3, 1 / 3])
    cells = space.grid(20, exclude=[(bary, 0.05)])
    sched = geometric_schedule(100_000)
    verts = [scn.measures[f"dirac:e{i}"] for i in (1, 2, 3)]
    phi = scn.potentials["birkhoff:g-vertices"]
    K = scn.attractors["boundary"]

    def one(c):
        est = o.limit_set_estimate(system, c, sched, metric,
                                   cluster_tol=0.0125, keep_measures=False)
        hull = max(mixture_hull_distance(metric, f, verts)
                   for f in est.representative_features)
        mil = o.milnor_fraction(system, c, K, 0.05, 100_000)
        largest = o.growth_report(phi, system, c, 100_000).largest
        return est.spread, hull, mil, largest

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, cells))
    else:
        rows = [one(c) for c in cells]
    return cells, rows


@pytest.fixture(scope="session")
def heteroclinic_stats(heteroclinic, tmp_path_factory):
    """Criteria 7/8 cell sweep, run at workers 1 and 4 and written to CSV +
    summary through the reporting layer (the worker-invariance evidence
    for criterion 10)."""
    base = tmp_path_factory.mktemp("heteroclinic-scan")
    outputs = {}
    for workers in (1, 4):
        cells, rows = _heteroclinic_cell_stats(heteroclinic, workers)
        spreads, hulls, milnors, largests = map(np.array, zip(*rows))
        out = base / f"w{workers}"
        out.mkdir()
        reports.write_csv(
            out / "heteroclinic-scan.csv",
            ["x1", "x2", "x3", "spread", "hull_distance", "milnor_fraction",
             "largest_rate"],
            ([float(c[0]), float(c[1]), float(c[2]), float(s), float(h),
              float(m), float(g)]
             for c, (s, h, m, g) in zip(cells, rows)),
        )
        reports.write_summary(out / "heteroclinic-scan_summary.txt", [
            ("result", [
                ("cells", len(cells)),
                ("fraction_spread_ge_0p02", float((spreads >= 0.02).mean())),
                ("fraction_hull_le_0p1", float((hulls <= 0.1).mean())),
                ("fraction_milnor_ge_0p95", float((milnors >= 0.95).mean())),
                ("fraction_largest_le_m0p5", float((largests <= -0.5).mean())),
            ]),
        ])
        outputs[workers] = (out, spreads, hulls, milnors, largests)
    return outputs


# ---------------------------------------------------------------------------
# criteria


def test_criterion_1_subadditivity_suite(builtin_potentials):
    t0 = time.time()
    worst = {}
    for name, phi, system in builtin_potentials:
        rep = check_subadditivity(phi, system, sample_count=1000, n_max=1000,
                                  seed=42)
        worst[name] = rep.max_violation
        assert rep.passed, f"{name}: violation {rep.max_violation:.3g}"
    elapsed = time.time() - t0
    ok = max(worst.values()) <= 1e-9 and elapsed <= 60
    report(1, ok, f"{len(worst)} potentials, max violation "
                  f"{max(worst.values()):.2e}, {elapsed:.1f}s (<= 60s)")


def test_criterion_2_lemma_sub_suite(builtin_potentials):
    t0 = time.time()
    rng = np.random.default_rng(42)
    worst = -math.inf
    for name, phi, system in builtin_potentials:
        pts = [system.space.random_point(rng) for _ in range(100)]
        for l in (1, 2, 5, 10):
            rep = lemma_sub_check(phi, system, l, pts, n_list=(10, 100, 1000))
            worst = max(worst, rep.max_violation)
            assert rep.passed, f"{name} l={l}: violation {rep.max_violation:.3g}"
    elapsed = time.time() - t0
    ok = worst <= 1e-6 and elapsed <= 120
    report(2, ok, f"max violation {worst:.2e} over l in {{1,2,5,10}}, "
                  f"{elapsed:.1f}s (<= 120s)")


def test_criterion_3_exact_growth_rates(doubling_basic):
    rep = o.growth_report(doubling_basic.potentials["cocycle:diag-const"],
                          doubling_basic.system, 0.37, 1000)
    d1 = max(abs(rep.largest - math.log(0.5)), abs(rep.smallest - math.log(0.5)))
    rep2 = o.growth_report(doubling_basic.potentials["cocycle:rot-scaled"],
                           doubling_basic.system, 0.37, 1000)
    d2 = max(abs(rep2.largest + 1.0), abs(rep2.smallest + 1.0))
    ok = d1 <= 1e-9 and rep.optimal and d2 <= 1e-12
    report(3, ok, f"diag cocycle off ln(1/2) by {d1:.2e} (<= 1e-9), "
                  f"scaled rotation off -1 by {d2:.2e} (<= 1e-12)")


def test_criterion_4_negative_smallest_rates_scan(prop43_scan_dirs,
                                                  doubling_prop43):
    summary = _load_summary(prop43_scan_dirs[4] / "scan-growth_summary.txt")
    res = summary["result"]
    quad = o.integrate(doubling_prop43.measures["lebesgue"],
                       doubling_prop43.g_functions["prop43"])
    frac = res["fraction_smallest_negative"]
    gap = abs(res["mean_largest_rate"] - quad)
    ok = quad < 0 and frac >= 0.99 and gap <= 0.02
    report(4, ok, f"fraction(smallest<0) = {frac} (>= 0.99), mean largest "
                  f"within {gap:.2e} of quadrature {quad:.5f} (<= 0.02)")


def test_criterion_5_strong_basin_point(doubling_prop43):
    mu = doubling_prop43.measures["dirac:0"]
    params = ClassifyParams(horizon=100_000)
    strong = []
    for eps in (0.2, 0.05):
        res = o.classify_point(doubling_prop43.system, 0.0, mu, eps, params)
        strong.append(res.in_strong)
    rep = o.growth_report(doubling_prop43.potentials["prop43"],
                          doubling_prop43.system, 0.0, 100_000)
    ok = all(strong) and rep.largest == -1.0
    report(5, ok, f"x=0 in_strong at eps 0.2/0.05: {strong}, largest rate "
                  f"at 0 is {rep.largest} (exactly -1)")


def test_criterion_6_negation_duality(doubling_prop43):
    phi = doubling_prop43.potentials["prop43"]
    neg = doubling_prop43.potentials["prop43-neg"]
    system = doubling_prop43.system
    rng = np.random.default_rng(42)
    exact = True
    for _ in range(100):
        x = float(rng.random())
        a = o.growth_report(phi, system, x, 1000)
        b = o.growth_report(neg, system, x, 1000)
        exact = exact and (a.smallest == -b.largest) and (a.largest == -b.smallest)
    on_orbit = [o.growth_report(phi, system, x, 1000).largest
                for x in (Fraction(1, 3), Fraction(2, 3))]
    ok = exact and all(v == 1.0 for v in on_orbit)
    report(6, ok, f"duality exact on 100 points: {exact}; largest rate on "
                  f"the +1 orbit: {on_orbit} (exactly +1)")


def test_criterion_7_heteroclinic_phenomenology(heteroclinic_stats):
    _, spreads, hulls, milnors, _ = heteroclinic_stats[4]
    fa = float((spreads >= 0.02).mean())
    fb = float((hulls <= 0.1).mean())
    fc = float((milnors >= 0.95).mean())
    ok = fa >= 0.9 and fb >= 0.9 and fc >= 0.9
    report(7, ok, f"(a) spread>=0.02 on {fa:.3f} (>= 0.9); (b) cluster "
                  f"measures within 0.1 of vertex hull on {fb:.3f} (>= 0.9); "
                  f"(c) visit fraction>=0.95 on {fc:.3f} (>= 0.9)")


def test_criterion_8_negative_rates_on_basin(heteroclinic_stats):
    _, _, _, _, largests = heteroclinic_stats[4]
    frac = float((largests <= -0.5).mean())
    ok = frac >= 0.9
    report(8, ok, f"largest rate <= -0.5 on {frac:.3f} of the grid (>= 0.9)")


def test_criterion_9_metric_and_measure_kernels(doubling_basic,
                                                observability_dirs):
    space = doubling_basic.system.space
    metric = o.default_metric(space)
    rng = np.random.default_rng(42)

    def random_measure():
        k = int(rng.integers(1, 5))
        pts = [float(p) for p in rng.random(k)]
        w = rng.random(k)
        return point_masses(space, pts, list(w / w.sum()), merge=False)

    tri_worst = -math.inf
    for _ in range(1000):
        a, b, c = random_measure(), random_measure(), random_measure()
        tri_worst = max(tri_worst,
                        metric.distance(a, c) - metric.distance(a, b)
                        - metric.distance(b, c))
    axioms_ok = tri_worst <= 1e-12

    # update identity at the representation level: the (n+1)-measure is the
    # n-measure's points plus the next orbit point, all at weight 1/(n+1)
    recursion_ok = True
    system = doubling_basic.system
    for _ in range(3):
        x = float(rng.random())
        prev = o.empirical_measure(system, x, 1)
        for n in range(1, 1001):
            cur = o.empirical_measure(system, x, n + 1)
            recursion_ok = (recursion_ok
                            and np.array_equal(cur.points[:n], prev.points)
                            and cur.points[n] == system.step_fn(prev.points[n - 1])
                            and np.all(cur.weights == 1.0 / (n + 1)))
            if not recursion_ok:
                break
            prev = cur

    leb = _load_summary(observability_dirs[("lebesgue", 4)]
                        / "observability_summary.txt")["result"]
    dir0 = _load_summary(observability_dirs[("dirac0", 4)]
                         / "observability_summary.txt")["result"]
    sep_ok = (all(f > 0 for f in leb["weak_fractions"])
              and all(f > 0 for f in leb["strong_fractions"])
              and dir0["weak_fractions"][-1] <= 0.01)
    ok = axioms_ok and recursion_ok and sep_ok
    report(9, ok, f"triangle violation {tri_worst:.2e} (<= 1e-12); empirical "
                  f"recursion exact: {recursion_ok}; lebesgue fractions "
                  f"{leb['weak_fractions']} all > 0, dirac0 fraction at "
                  f"eps=0.01 is {dir0['weak_fractions'][-1]} (<= 0.01)")


def test_criterion_10_worker_determinism(prop43_scan_dirs, observability_dirs,
                                         heteroclinic_stats):
    pairs = [
        (prop43_scan_dirs[1] / "scan-growth.csv",
         prop43_scan_dirs[4] / "scan-growth.csv"),
        (prop43_scan_dirs[1] / "scan-growth_summary.txt",
         prop43_scan_dirs[4] / "scan-growth_summary.txt"),
        (heteroclinic_stats[1][0] / "heteroclinic-scan.csv",
         heteroclinic_stats[4][0] / "heteroclinic-scan.csv"),
        (heteroclinic_stats[1][0] / "heteroclinic-scan_summary.txt",
         heteroclinic_stats[4][0] / "heteroclinic-scan_summary.txt"),
    ]
    for tag in ("lebesgue", "dirac0"):
        pairs.append((observability_dirs[(tag, 1)] / "observability.csv",
                      observability_dirs[(tag, 4)] / "observability.csv"))
        pairs.append((observability_dirs[(tag, 1)] / "observability_summary.txt",
                      observability_dirs[(tag, 4)] / "observability_summary.txt"))
    mismatches = [str(a.name) for a, b in pairs
                  if a.read_bytes() != b.read_bytes()]
    ok = not mismatches
    report(10, ok, f"{len(pairs)} artifact pairs byte-identical across "
                   f"workers 1 vs 4" + (f"; mismatches: {mismatches}" if mismatches else ""))
