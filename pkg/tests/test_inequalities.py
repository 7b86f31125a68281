"""Inequality checkers: two-point/K-point dominance, convexity, dual bounds."""

import math

import numpy as np
import pytest

from frflow import (
    FGenerator,
    FRFlowError,
    InequalityReport,
    convexity_check,
    convexity_h,
    default_two_point_grids,
    divergence,
    dual_alpha_recipe,
    dual_chi2_check,
    dual_chi2_lhs,
    dual_conjugate_check,
    dual_delta_f,
    dual_pointwise_check,
    gdc_check,
    gdc_sampled_check,
    get_generator,
    grad_norm_sq,
    kl,
    kpoint_check,
    lemma_gdc_neighborhood_check,
    make_two_point,
    sample_random_pair,
    scan_two_point,
    strong_convexity_check,
    strong_delta_f,
    sufficient_alpha_s,
    support_reduction_probe,
    two_point_ratio,
)

P2 = get_generator("power:-2")
KL = kl()


class TestReportType:
    def test_consistency_enforced(self):
        with pytest.raises(FRFlowError):
            InequalityReport(
                inequality_id="x", generator="kl", alpha_tested=None, samples=1,
                min_ratio=1.0, argmin_witness={}, violations=(), passed=False)

    def test_json_dict_shape(self):
        rep = scan_two_point(KL, np.array([0.5]), np.array([2.0]))
        d = rep.to_json_dict()
        assert d["passed"] is True
        assert d["violations"] == []
        assert isinstance(d["min_ratio"], float)
        assert d["skipped"] == 0


class TestTwoPointRatio:
    def test_kl_anchor(self):
        np.testing.assert_allclose(
            two_point_ratio(KL, math.exp(-5.0), math.e), 0.15707988936137177, rtol=1e-12)

    def test_limit_is_twice_curvature(self):
        for name in ("kl", "chi2", "power:-2", "power:0"):
            g = get_generator(name)
            r = two_point_ratio(g, 1.0 - 1e-6, 1.0 + 1e-6)
            np.testing.assert_allclose(r, 2.0 * g.fpp(1.0), rtol=1e-3)

    def test_kl_ratio_decreasing_in_m(self):
        vals = [two_point_ratio(KL, math.exp(-M), math.e) for M in (5, 10, 15, 20)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[-1] <= 1e-6

    def test_p2_far_corner_limit(self):
        # x -> 1, y -> inf approaches 1 for the 1/x^2 curvature family
        np.testing.assert_allclose(
            two_point_ratio(P2, 1.0 - 1e-8, 1e8), 1.0, rtol=1e-3)

    def test_ordering_enforced(self):
        with pytest.raises(ValueError):
            two_point_ratio(KL, 1.5, 2.0)
        with pytest.raises(ValueError):
            two_point_ratio(KL, 0.5, 0.9)

    def test_slope_invariance(self):
        raw = get_generator("power:1")
        from frflow import normalize_slope

        norm = normalize_slope(raw)
        np.testing.assert_allclose(
            two_point_ratio(raw, 0.3, 2.5), two_point_ratio(norm, 0.3, 2.5), rtol=1e-12)


class TestScan:
    def test_default_grid_shape(self):
        xg, yg = default_two_point_grids()
        assert xg.size == 1600 and yg.size == 1600
        assert xg.min() == pytest.approx(1e-4) and xg.max() < 1.0
        assert yg.min() > 1.0 and yg.max() == pytest.approx(1e4)

    def test_p2_scan_frozen(self):
        rep = scan_two_point(P2, *default_two_point_grids())
        assert rep.passed
        np.testing.assert_allclose(rep.min_ratio, 1.0037059332467007, rtol=1e-10)
        np.testing.assert_allclose(rep.argmin_witness["x"], 0.9942600739529568, rtol=1e-10)
        np.testing.assert_allclose(rep.argmin_witness["y"], 10000.0, rtol=1e-12)

    def test_kl_scan_frozen_min(self):
        rep = scan_two_point(KL, *default_two_point_grids())
        np.testing.assert_allclose(rep.min_ratio, 0.003684133703686217, rtol=1e-10)

    def test_alpha_thresholding(self):
        ok = scan_two_point(KL, *default_two_point_grids(), alpha=0.003)
        assert ok.passed and ok.alpha_tested == 0.003
        bad = scan_two_point(KL, *default_two_point_grids(), alpha=0.01)
        assert not bad.passed
        assert 0 < len(bad.violations) <= 10
        # violations record both sides of the tested inequality lhs >= alpha*denom
        cfg, lhs, rhs = bad.violations[0]
        assert lhs < rhs
        np.testing.assert_allclose(
            two_point_ratio(KL, cfg["x"], cfg["y"]) / 0.01, lhs / rhs, rtol=1e-10)

    def test_witness_reevaluates(self):
        rep = scan_two_point(P2, *default_two_point_grids())
        w = rep.argmin_witness
        np.testing.assert_allclose(
            two_point_ratio(P2, w["x"], w["y"]), rep.min_ratio, rtol=1e-10)


class TestKPoint:
    def test_kl_frozen_min(self):
        rep = kpoint_check(KL, K=5, samples=20000, alpha=1e-6, seed=0)
        assert rep.passed and rep.skipped == 0
        np.testing.assert_allclose(rep.min_ratio, 0.08518868315178439, rtol=1e-9)

    def test_kl_fails_at_half(self):
        rep = kpoint_check(KL, K=5, samples=20000, alpha=0.5, seed=0)
        assert not rep.passed
        assert len(rep.violations) == 10  # capped at the worst ten

    def test_p2_passes_at_one(self):
        rep = kpoint_check(P2, K=6, samples=20000, alpha=1.0, seed=0)
        assert rep.passed
        np.testing.assert_allclose(rep.min_ratio, 1.272169981907195, rtol=1e-9)

    def test_two_point_pair_reduces_to_scan_ratio(self):
        # a K=2 configuration keyed by (x1, x2) reproduces two_point_ratio
        pair = make_two_point(2.0, 0.4)
        lhs = grad_norm_sq(KL, pair)
        rhs = float(np.sum(pair.weights * pair.rho_star * KL.f(pair.x)))
        np.testing.assert_allclose(
            lhs / rhs, two_point_ratio(KL, 0.4, 2.0), rtol=1e-12)

    def test_deterministic_in_seed(self):
        a = kpoint_check(P2, K=4, samples=5000, alpha=0.5, seed=3)
        b = kpoint_check(P2, K=4, samples=5000, alpha=0.5, seed=3)
        assert a.min_ratio == b.min_ratio


class TestSupportReduction:
    def test_p2_probe(self):
        rep = support_reduction_probe(P2, K=4, samples=20000, seed=1)
        assert rep.passed
        c = rep.constants
        np.testing.assert_allclose(c["kpoint_min"], 1.0966496894204287, rtol=1e-9)
        np.testing.assert_allclose(c["three_point_min"], 1.000000000000005, rtol=1e-9)
        assert c["kpoint_min"] >= c["three_point_min"] - 1e-6 * max(1.0, c["three_point_min"])

    def test_requires_k_at_least_four(self):
        with pytest.raises(ValueError):
            support_reduction_probe(P2, K=3, samples=100, seed=0)


class TestGdcCheck:
    def test_labeled_pair_witness(self):
        pair = make_two_point(math.e, math.exp(-10.0))
        rep = gdc_check(KL, [("two-point:e:e^-10", pair)], alpha=0.01)
        assert not rep.passed
        cfg, lhs, rhs = rep.violations[0]
        assert cfg["label"] == "two-point:e:e^-10"
        assert lhs < rhs  # grad-norm side fell below alpha * divergence
        np.testing.assert_allclose(lhs, grad_norm_sq(KL, pair), rtol=1e-12)
        np.testing.assert_allclose(rhs, 0.01 * divergence(KL, pair), rtol=1e-12)

    def test_sampled_check_merges_adversarial(self):
        extra = [("hard", make_two_point(math.e, math.exp(-10.0)))]
        rep = gdc_sampled_check(KL, K=4, samples=2000, alpha=0.01, seed=0, extra_pairs=extra)
        assert not rep.passed
        labels = {cfg.get("label") for cfg, _, _ in rep.violations}
        assert "hard" in labels

    def test_p2_sampled_passes(self):
        rep = gdc_sampled_check(P2, K=4, samples=2000, alpha=0.5, seed=0)
        assert rep.passed and rep.inequality_id == "gdc"


class TestSufficientAlpha:
    def test_frozen_values(self):
        np.testing.assert_allclose(sufficient_alpha_s(KL), 1e-4, rtol=1e-12)
        np.testing.assert_allclose(sufficient_alpha_s(get_generator("chi2")), 2e-8, rtol=1e-12)
        np.testing.assert_allclose(sufficient_alpha_s(P2), 1.0, rtol=1e-12)
        np.testing.assert_allclose(sufficient_alpha_s(get_generator("reverse-kl")), 1.0, rtol=1e-12)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            sufficient_alpha_s(KL, grid=np.array([0.5, 2.0]))


class TestConvexity:
    def test_h_values(self):
        np.testing.assert_allclose(convexity_h(KL, math.exp(-3.0)), -1.0, rtol=1e-13)
        np.testing.assert_allclose(convexity_h(P2, 0.5), 3.0, rtol=1e-13)
        np.testing.assert_allclose(convexity_h(get_generator("chi2"), 0.25), -0.5, rtol=1e-13)
        np.testing.assert_allclose(convexity_h(get_generator("reverse-kl"), 4.0), 1.25, rtol=1e-13)

    def test_h_slope_shift_invariant(self):
        from frflow import normalize_slope

        raw = get_generator("power:0.5")
        xs = np.geomspace(0.1, 9.0, 11)
        np.testing.assert_allclose(
            convexity_h(raw, xs), convexity_h(normalize_slope(raw), xs), rtol=1e-12)

    def test_check_outcomes(self):
        assert convexity_check(P2).passed
        assert convexity_check(get_generator("reverse-kl")).passed
        assert not convexity_check(KL).passed
        assert not convexity_check(get_generator("chi2")).passed

    def test_kl_witness_location(self):
        rep = convexity_check(KL)
        cfg, lhs, _ = rep.violations[0]
        assert cfg["x"] < math.exp(-2.0)  # h = 2 + ln x turns negative below e^-2
        assert lhs < 0


class TestStrongConvexity:
    def test_delta_frozen(self):
        np.testing.assert_allclose(strong_delta_f(P2), math.sqrt(2.0) - 1.0, atol=2e-6)
        np.testing.assert_allclose(strong_delta_f(KL), 1.0, atol=2e-6)
        np.testing.assert_allclose(strong_delta_f(get_generator("chi2")), 1.0, atol=2e-6)

    def test_p2_passes(self):
        rep = strong_convexity_check(P2)
        assert rep.passed
        np.testing.assert_allclose(rep.constants["delta_f"], 0.4142131805419922, rtol=1e-12)
        np.testing.assert_allclose(rep.constants["alpha_f"], 0.2071065902709961, rtol=1e-12)
        np.testing.assert_allclose(rep.min_ratio, 0.5001099723755957, rtol=1e-9)
        # recipe: alpha_f = min{f''(1), delta_f f''(1)/2}
        np.testing.assert_allclose(
            rep.constants["alpha_f"],
            min(P2.fpp(1.0), rep.constants["delta_f"] * P2.fpp(1.0) / 2.0),
            rtol=1e-12,
        )

    def test_kl_fails(self):
        rep = strong_convexity_check(KL, samples=2000)
        assert not rep.passed
        assert len(rep.violations) == 10


class TestDualChi2:
    def test_recipe_frozen(self):
        np.testing.assert_allclose(dual_delta_f(KL), 0.2499, atol=1e-8)
        np.testing.assert_allclose(dual_delta_f(get_generator("reverse-kl")),
                                   0.1464458003997803, rtol=1e-9)
        d, a = dual_alpha_recipe(KL)
        np.testing.assert_allclose(a, 0.004996800256061448, rtol=1e-10)
        d2, a2 = dual_alpha_recipe(get_generator("chi2"))
        np.testing.assert_allclose(a2, 0.009993600512122896, rtol=1e-10)
        fpp1 = KL.fpp(1.0)
        alpha_prime = fpp1 * d / (2.0 * (1.0 + 2.0 * d) * (1.0 + d))
        expected = 0.5 * min(1.0, alpha_prime, d * d * fpp1 / (4.0 * (1.0 + d) ** 2))
        np.testing.assert_allclose(a, expected, rtol=1e-12)

    def test_mu_form_equals_direct_form(self):
        rng = np.random.default_rng(11)
        for name in ("kl", "reverse-kl", "chi2"):
            g = get_generator(name)
            for _ in range(20):
                pair = sample_random_pair(int(rng.integers(2, 9)), seed=int(rng.integers(1e6)))
                lhs_mu, lhs_direct, mu2 = dual_chi2_lhs(g, pair)
                assert abs(lhs_mu - lhs_direct) <= 1e-10 * max(1.0, abs(lhs_mu))
                assert mu2 > 0

    def test_check_passes_for_all_three(self):
        for name in ("kl", "reverse-kl", "chi2"):
            rep = dual_chi2_check(get_generator(name), samples=300, seed=0,
                                  pointwise_samples=20000)
            assert rep.passed, name
            assert rep.min_ratio >= 1.0
            assert rep.constants["pointwise_min_margin"] >= -1e-12

    def test_pointwise_lemma(self):
        rep = dual_pointwise_check(KL, samples=50000, seed=1)
        assert rep.passed

    def test_degenerate_curvature_rejected(self):
        flat = FGenerator(name="flat", eval_f=lambda x: 0.0 * x,
                          eval_fp=lambda x: 0.0 * x, eval_fpp=lambda x: 0.0 * x)
        with pytest.raises(ValueError):
            dual_chi2_check(flat, samples=10, seed=0, pointwise_samples=10)


class TestDualConjugate:
    def test_equality_indices(self):
        for p in (-1.0, -2.0):
            rep = dual_conjugate_check(p, samples=100, seed=0)
            assert rep.passed
            assert rep.constants["max_equality_gap"] <= 1e-10

    def test_interior_index_uses_half_factor(self):
        rep = dual_conjugate_check(-1.5, samples=1000, seed=0)
        assert rep.passed
        assert rep.constants["factor"] == 0.5
        np.testing.assert_allclose(rep.min_ratio, 1.3577198109207418, rtol=1e-9)

    def test_outer_indices_use_unit_factor(self):
        for p in (-3.0, 0.0, 1.0):
            rep = dual_conjugate_check(p, samples=300, seed=0)
            assert rep.passed, p
            assert rep.constants["factor"] == 1.0
            assert rep.min_ratio >= 1.0

    def test_equality_value_is_sum_of_divergences(self):
        # for p = -1 the tested LHS collapses onto D_f + D_fbar exactly
        from frflow import conjugate, power_family

        g = power_family(-1.0)
        gb = conjugate(g)
        pair = sample_random_pair(6, seed=21)
        lhs = divergence(g, pair) + divergence(gb, pair)
        assert lhs > 0.0


class TestLemmaNeighborhood:
    def test_gates_on_failed_prerequisite(self):
        rep = lemma_gdc_neighborhood_check(KL, alpha_from_scan=1e-12)
        assert rep.passed
        assert rep.constants["gated"] is True

    def test_p2_runs_at_widest_delta(self):
        rep = lemma_gdc_neighborhood_check(P2, alpha_from_scan=1.0)
        assert rep.passed
        assert rep.constants["gated"] is False
        assert rep.constants["delta"] == 0.5
        np.testing.assert_allclose(rep.constants["alpha_delta"], 0.8297929127263635, rtol=1e-9)
