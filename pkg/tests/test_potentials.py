import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

import optstate as o
from optstate.errors import PotentialSpecError, SingularCollapseWarning
from optstate.potentials import (
    TabulatedPotential,
    birkhoff_potential,
    check_subadditivity,
    cocycle_potential,
    lemma_sub_check,
    operator_norm,
    truncate,
)

LN_HALF = math.log(0.5)


def g_const(c):
    return lambda pts: np.full(np.asarray(pts, dtype=float).reshape(-1).shape, c)


def test_birkhoff_constant_g():
    sys_ = o.doubling()
    phi = birkhoff_potential(g_const(-0.7))
    for n in (1, 10, 137):
        assert phi.evaluate(sys_, 0.3, n) == pytest.approx(-0.7 * n, abs=1e-12)


def test_birkhoff_cos_at_fixed_point():
    sys_ = o.doubling()
    phi = birkhoff_potential(lambda p: np.cos(2 * np.pi * np.asarray(p)))
    assert phi.evaluate(sys_, 0.0, 3) == 3.0


def test_phi_zero_is_zero():
    sys_ = o.doubling()
    scn = o.build_scenario("doubling-basic")
    for phi in scn.potentials.values():
        assert phi.evaluate(sys_, 0.41, 0) == 0.0


def test_birkhoff_seven():
    sys_ = o.doubling()
    phi = birkhoff_potential(g_const(1.0))
    assert phi.evaluate(sys_, 0.9, 7) == 7.0


def test_cocycle_constant_diagonal():
    scn = o.build_scenario("doubling-basic")
    phi = scn.potentials["cocycle:diag-const"]
    val = phi.evaluate(scn.system, 0.3, 10)
    assert val == pytest.approx(10 * LN_HALF, abs=1e-12)


def test_cocycle_scaled_rotation_exact_decay():
    scn = o.build_scenario("doubling-basic")
    phi = scn.potentials["cocycle:rot-scaled"]
    for n in (1, 10, 100):
        assert phi.evaluate(scn.system, 0.37, n) == pytest.approx(-float(n), abs=1e-12)


def test_cocycle_diag_cos_lyapunov_exponent():
    # top exponent = max(mean of -1 + 0.5 cos(2 pi x), -2) = -1 for
    # Lebesgue-typical points; checked against the Birkhoff-sum oracle
    scn = o.build_scenario("doubling-basic")
    sys_ = scn.system
    phi = scn.potentials["cocycle:diag-cos"]
    x = Fraction(271828, 999983)
    rep = o.growth_report(phi, sys_, x, 100_000)
    g = lambda p: -1.0 + 0.5 * np.cos(2 * np.pi * np.asarray(p))
    oracle = birkhoff_potential(g).evaluate(sys_, x, 100_000) / 100_000
    assert oracle == pytest.approx(-1.0, abs=0.01)
    assert rep.largest == pytest.approx(max(oracle, -2.0), abs=0.02)


def test_cocycle_renormalization_invariance():
    from optstate.potentials import CocyclePotential
    from optstate.scenarios import _mats_diag_cos

    sys_ = o.doubling()
    p1 = CocyclePotential(_mats_diag_cos, 2, vectorized=True, renorm_every=1)
    p50 = CocyclePotential(_mats_diag_cos, 2, vectorized=True, renorm_every=50)
    for n in (7, 200, 999):
        a = p1.evaluate(sys_, 0.123, n)
        b = p50.evaluate(sys_, 0.123, n)
        assert a == pytest.approx(b, abs=1e-9)


def test_cocycle_collapse_warns():
    sys_ = o.doubling()
    phi = cocycle_potential(lambda x: np.zeros((2, 2)), 2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        with pytest.raises(SingularCollapseWarning):
            phi.evaluate(sys_, 0.3, 5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert phi.evaluate(sys_, 0.3, 5) == -math.inf


def test_truncation_examples():
    sys_ = o.doubling()
    steep = truncate(birkhoff_potential(g_const(-2.0)))
    shallow = truncate(birkhoff_potential(g_const(-0.5)))
    for n in (1, 5, 50):
        assert steep.evaluate(sys_, 0.2, n) == -float(n)
        assert shallow.evaluate(sys_, 0.2, n) == -0.5 * n


def test_truncation_ordering_invariants():
    sys_ = o.doubling()
    scn = o.build_scenario("doubling-basic")
    phi = scn.potentials["cocycle:diag-const"]
    psi = truncate(phi)
    rng = np.random.default_rng(5)
    for _ in range(50):
        x = float(rng.random())
        n = int(rng.integers(1, 200))
        a = phi.evaluate(sys_, x, n)
        b = psi.evaluate(sys_, x, n)
        assert b >= a
        assert b >= -float(n)
        assert b / n >= -1.0


def test_truncated_cocycle_subadditive():
    scn = o.build_scenario("doubling-basic")
    psi = truncate(scn.potentials["cocycle:diag-const"])
    rep = check_subadditivity(psi, scn.system, sample_count=1000, n_max=100, seed=2)
    assert rep.passed


def test_check_subadditivity_additive_is_equality():
    sys_ = o.doubling()
    phi = birkhoff_potential(lambda p: np.cos(2 * np.pi * np.asarray(p)))
    rep = check_subadditivity(phi, sys_, sample_count=500, n_max=500, seed=3)
    assert rep.passed
    assert rep.max_violation <= 1e-9
    assert rep.min_defect >= -1e-9


def test_check_subadditivity_flags_broken_potential():
    sys_ = o.doubling()
    broken = TabulatedPotential(lambda n: float(n), label="n-squared")
    rep = check_subadditivity(broken, sys_, sample_count=100, n_max=50, seed=4)
    assert not rep.passed
    assert rep.max_violation > 0


def test_negation_only_for_additive_kinds():
    scn = o.build_scenario("doubling-basic")
    with pytest.raises(PotentialSpecError):
        scn.potentials["cocycle:diag-const"].negate()
    neg = scn.potentials["birkhoff:cos"].negate()
    assert neg.evaluate(scn.system, 0.0, 3) == -3.0


def test_lemma_sub_additive_slack_is_c():
    # for additive potentials with l = 1 the block sum telescopes to
    # phi_n, so the bound holds with slack exactly C
    sys_ = o.doubling()
    phi = birkhoff_potential(lambda p: np.cos(2 * np.pi * np.asarray(p)))
    rng = np.random.default_rng(6)
    pts = [float(p) for p in rng.random(20)]
    rep = lemma_sub_check(phi, sys_, 1, pts, n_list=(10, 100, 500))
    assert rep.passed
    assert rep.max_violation == pytest.approx(-rep.c, abs=1e-9)


def test_lemma_sub_constant_rate():
    sys_ = o.doubling()
    phi = TabulatedPotential(lambda n: -0.3, label="const-rate")
    rep = lemma_sub_check(phi, sys_, 4, [0.1, 0.5], n_list=(10, 100))
    assert rep.passed
    assert rep.c == pytest.approx(4 * 0.3 * 8, abs=1e-12)  # C1 = |phi_{2l}| = 0.3*8


def test_lemma_sub_cocycle():
    scn = o.build_scenario("doubling-basic")
    rng = np.random.default_rng(7)
    pts = [float(p) for p in rng.random(30)]
    rep = lemma_sub_check(scn.potentials["cocycle:diag-const"], scn.system, 5,
                          pts, n_list=(10, 100, 1000))
    assert rep.passed


def test_growth_report_exact_rates():
    scn = o.build_scenario("doubling-basic")
    rep = o.growth_report(scn.potentials["cocycle:diag-const"], scn.system, 0.61, 1000)
    assert rep.largest == pytest.approx(LN_HALF, abs=1e-9)
    assert rep.smallest == pytest.approx(LN_HALF, abs=1e-9)
    assert rep.optimal


def test_growth_report_positive_birkhoff():
    sys_ = o.doubling()
    phi = birkhoff_potential(g_const(1.0))
    rep = o.growth_report(phi, sys_, 0.3, 500)
    assert rep.largest == 1.0 and rep.smallest == 1.0
    assert not rep.optimal


def test_growth_report_validates_horizon():
    sys_ = o.doubling()
    phi = birkhoff_potential(g_const(1.0))
    with pytest.raises(ValueError):
        o.growth_report(phi, sys_, 0.3, 100)


def test_growth_additive_matches_birkhoff_mean():
    sys_ = o.doubling()
    phi = birkhoff_potential(lambda p: np.cos(2 * np.pi * np.asarray(p)))
    x = Fraction(12345, 999983)
    N = 20_000
    rep = o.growth_report(phi, sys_, x, N)
    mean = phi.evaluate(sys_, x, N) / N
    spread = max(rep.rates[-5:]) - min(rep.rates[-5:])
    assert rep.smallest - 2 * abs(spread) - 1e-12 <= mean <= rep.largest + 2 * abs(spread) + 1e-12


def test_negation_duality_at_estimator_level():
    scn = o.build_scenario("doubling-prop43")
    phi = scn.potentials["prop43"]
    neg = scn.potentials["prop43-neg"]
    rng = np.random.default_rng(8)
    for _ in range(20):
        x = float(rng.random())
        a = o.growth_report(phi, scn.system, x, 1000)
        b = o.growth_report(neg, scn.system, x, 1000)
        assert a.smallest == -b.largest
        assert a.largest == -b.smallest


def test_operator_norm_power_iteration_matches_svd():
    rng = np.random.default_rng(9)
    for _ in range(20):
        M = rng.normal(size=(5, 5))
        assert operator_norm(M) == pytest.approx(
            float(np.linalg.svd(M, compute_uv=False)[0]), rel=1e-10
        )


def test_series_finite_for_builtins():
    scn = o.build_scenario("doubling-basic")
    for phi in scn.potentials.values():
        vals = phi.series(scn.system, 0.77, [1, 10, 100])
        assert np.all(np.isfinite(vals))
