import numpy as np
import pytest

import optstate as o
from optstate.basins import AttractorSpec, BasinQuery, ClassifyParams


def test_classify_fixed_point_strong():
    sys_ = o.doubling()
    mu = o.measure_from_spec("dirac:0", sys_.space)
    for eps in (0.2, 0.05):
        res = o.classify_point(sys_, 0.0, mu, eps, ClassifyParams(horizon=1000))
        assert res.in_strong and res.in_weak
        assert not res.indeterminate


def test_classify_strong_implies_weak():
    scn = o.build_scenario("doubling-basic")
    mu = scn.measures["lebesgue"]
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = scn.system.space.random_rational(rng)
        res = o.classify_point(scn.system, x, mu, 0.1, ClassifyParams(horizon=5000))
        if res.in_strong:
            assert res.in_weak


def test_classify_periodic_measure_not_weakly_reached_from_zero():
    sys_ = o.doubling()
    mu = o.measure_from_spec("orbit:1/3,2", sys_.space, sys_)
    res = o.classify_point(sys_, 0.0, mu, 0.01, ClassifyParams(horizon=1000))
    assert not res.in_weak


def test_classify_rotation_lebesgue_strong():
    scn = o.build_scenario("rotation-unique-ergodic")
    mu = scn.measures["lebesgue"]
    res = o.classify_point(scn.system, 0.416, mu, 0.05, ClassifyParams(horizon=100_000))
    assert res.in_strong


def test_classify_monotone_in_epsilon():
    scn = o.build_scenario("doubling-basic")
    mu = scn.measures["lebesgue"]
    x = scn.system.space.random_rational(np.random.default_rng(4))
    params = ClassifyParams(horizon=5000, cluster_tol=0.01)
    small = o.classify_point(scn.system, x, mu, 0.02, params)
    large = o.classify_point(scn.system, x, mu, 0.2, params)
    if small.in_weak:
        assert large.in_weak
    if small.in_strong:
        assert large.in_strong


def test_milnor_whole_space_sample():
    sys_ = o.doubling()
    K = AttractorSpec(sys_.space, np.linspace(0, 1, 101))
    assert o.milnor_fraction(sys_, 0.37, K, 0.1, 1000) == 1.0


def test_milnor_halving_to_origin():
    sys_ = o.interval_halving()
    K = AttractorSpec(sys_.space, np.array([0.0]))
    est = o.milnor_fraction(sys_, 0.97, K, 0.1, 1000)
    assert est >= 0.99


def test_milnor_monotone_in_epsilon():
    sys_ = o.interval_halving()
    K = AttractorSpec(sys_.space, np.array([0.0]))
    a = o.milnor_fraction(sys_, 0.97, K, 0.02, 1000)
    b = o.milnor_fraction(sys_, 0.97, K, 0.1, 1000)
    assert b >= a


def test_milnor_validates_inputs():
    sys_ = o.interval_halving()
    K = AttractorSpec(sys_.space, np.array([0.0]))
    with pytest.raises(ValueError):
        o.milnor_fraction(sys_, 0.5, K, -0.1, 1000)
    with pytest.raises(ValueError):
        o.milnor_fraction(sys_, 0.5, K, 0.1, 100)


def test_grid_scan_always_true_at_eps_one():
    scn = o.build_scenario("doubling-basic")
    q = BasinQuery(mode="weak", epsilon=1.0, mu=scn.measures["lebesgue"], horizon=500)
    res = o.grid_scan(scn.system, q, 50)
    assert res.lebesgue_fraction == 1.0


def test_grid_scan_worker_invariance():
    scn = o.build_scenario("doubling-basic")
    q = BasinQuery(mode="weak", epsilon=0.1, mu=scn.measures["lebesgue"], horizon=2000)
    a = o.grid_scan(scn.system, q, 60, workers=1)
    b = o.grid_scan(scn.system, q, 60, workers=4)
    assert a.lebesgue_fraction == b.lebesgue_fraction
    for ra, rb in zip(a.records, b.records):
        assert ra.verdict == rb.verdict
        assert ra.values == rb.values


def test_grid_scan_validates_query():
    scn = o.build_scenario("doubling-basic")
    with pytest.raises(ValueError):
        BasinQuery(mode="weak", epsilon=-1.0, mu=scn.measures["lebesgue"])
    with pytest.raises(ValueError):
        BasinQuery(mode="milnor", epsilon=0.1)  # no attractor
    with pytest.raises(ValueError):
        BasinQuery(mode="weird", epsilon=0.1, mu=scn.measures["lebesgue"])
    q = BasinQuery(mode="weak", epsilon=0.1, mu=scn.measures["lebesgue"])
    with pytest.raises(ValueError):
        o.grid_scan(scn.system, q, 1)


def test_jitter_on_excluded_point():
    from optstate.basins import _jitter_centers
    from fractions import Fraction

    space = o.doubling().space
    centers = [Fraction(1, 4), Fraction(3, 4)]
    out = _jitter_centers(space, centers, 2, [0.25])
    assert float(out[0]) == 0.5  # shifted by half a cell
    assert out[1] == Fraction(3, 4)


def test_observability_separates_lebesgue_from_dirac():
    # grid 625 keeps the odd part of the cell denominator large, so only
    # one cell center is dyadic (the only orbits that sink to 0)
    scn = o.build_scenario("doubling-basic")
    params = ClassifyParams(horizon=10_000)
    rep = o.observability_check(scn.system, scn.measures["lebesgue"],
                                [0.2, 0.05], 625, params)
    assert rep.observable
    assert all(f > 0 for f in rep.strong_fractions)
    rep0 = o.observability_check(scn.system, scn.measures["dirac:0"],
                                 [0.2, 0.01], 625, params)
    assert rep0.weak_fractions[-1] <= 0.01


def test_observability_fraction_monotone_in_eps():
    scn = o.build_scenario("doubling-basic")
    rep = o.observability_check(scn.system, scn.measures["lebesgue"],
                                [0.2, 0.1, 0.05], 100,
                                ClassifyParams(horizon=5000))
    assert rep.weak_fractions == sorted(rep.weak_fractions, reverse=True)
    assert rep.strong_fractions == sorted(rep.strong_fractions, reverse=True)


def test_observability_validates_eps_list():
    scn = o.build_scenario("doubling-basic")
    with pytest.raises(ValueError):
        o.observability_check(scn.system, scn.measures["lebesgue"], [], 100)
    with pytest.raises(ValueError):
        o.observability_check(scn.system, scn.measures["lebesgue"], [0.05, 0.2], 100)


def test_optimal_scan_constant_cocycle_all_optimal():
    scn = o.build_scenario("doubling-basic")
    res = o.optimal_point_scan(scn.system, scn.potentials["cocycle:diag-const"],
                               50, 500)
    assert res.fraction_optimal == 1.0


def test_optimal_scan_positive_birkhoff_none_optimal():
    from optstate.potentials import birkhoff_potential

    sys_ = o.doubling()
    phi = birkhoff_potential(lambda p: np.ones(np.asarray(p).reshape(-1).shape),
                             label="birkhoff:one")
    res = o.optimal_point_scan(sys_, phi, 50, 500)
    assert res.fraction_optimal == 0.0
    assert res.fraction_smallest_negative == 0.0


def test_optimal_scan_consistency():
    scn = o.build_scenario("doubling-prop43")
    res = o.optimal_point_scan(scn.system, scn.potentials["prop43"], 100, 2000)
    for r in res.records:
        if not r.verdict.startswith("error"):
            assert r.values["smallest"] <= r.values["largest"]
    assert res.fraction_optimal <= res.fraction_smallest_negative


def test_theorem_style_strong_cells_have_negative_rate():
    # doubling + additive potential with negative space average: cells
    # strongly attracted to Lebesgue at eps = 0.05 should be optimal
    scn = o.build_scenario("doubling-prop43")
    mu = scn.measures["lebesgue"]
    phi = scn.potentials["prop43"]
    q = BasinQuery(mode="strong", epsilon=0.05, mu=mu, horizon=20_000)
    scan = o.grid_scan(scn.system, q, 100)
    growth = o.optimal_point_scan(scn.system, phi, 100, 20_000)
    strong_and_optimal = strong_total = 0
    for rb, rg in zip(scan.records, growth.records):
        if rb.verdict == "in":
            strong_total += 1
            if rg.values["largest"] < 0:
                strong_and_optimal += 1
    assert strong_total > 0
    assert strong_and_optimal / strong_total >= 0.99
