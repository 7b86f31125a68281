"""Closed-form counterexample values against quadrature and budget claims."""

import math

import numpy as np
import pytest

from frflow import (
    FRFlowError,
    divergence,
    gaussian_grid_pair,
    gaussian_hessian_H,
    gaussian_hessian_result,
    gaussian_kl_closed,
    gaussian_negativity_threshold,
    gdc_gaussian_result,
    gdc_ratio_gaussian,
    gdc_ratio_twovalue,
    gdc_twovalue_result,
    grad_norm_sq,
    hessian_H_moments,
    kl,
    make_two_point,
    twovalue_G,
    twovalue_hessian,
    twovalue_hessian_result,
    twovalue_kl,
)
from frflow.counterexamples import CounterexampleResult

E5 = math.exp(-5.0)


class TestGaussianHessian:
    def test_anchor_value_exact(self):
        # (sigma^2/2)((sigma^2-1)^2 + 3 sigma^2 mu^2 - mu^2) at (3, 1/4) = -3/128
        np.testing.assert_allclose(gaussian_hessian_H(3.0, 0.25), -3.0 / 128.0, atol=1e-15)

    def test_zero_at_target(self):
        assert gaussian_hessian_H(0.0, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_quadrature_agreement(self):
        for mu2 in (0.25, 1.0, 3.0):
            for s2 in (0.25, 0.5, 1.5):
                res = gaussian_hessian_result(mu2, s2)
                rel = abs(res.quadrature_value - res.closed_form_value) / max(
                    1.0, abs(res.closed_form_value))
                assert rel < 1e-6

    def test_negativity_threshold(self):
        # at sigma2 = 1/4 the critical mu2 is (3/4)^2 / (1/4) = 9/4
        np.testing.assert_allclose(gaussian_negativity_threshold(0.25), 2.25, rtol=1e-14)
        assert gaussian_hessian_H(2.25 + 1e-6, 0.25) < 0 < gaussian_hessian_H(2.25 - 1e-6, 0.25)
        assert gaussian_negativity_threshold(0.5) == math.inf

    def test_sign_grid(self):
        mu2s = np.linspace(0.05, 6.0, 50)
        s2s = np.linspace(0.05, 2.0, 50)
        for m in mu2s:
            for s in s2s:
                neg = gaussian_hessian_H(m, s) < 0
                predicted = s < 1.0 / 3.0 and m > gaussian_negativity_threshold(s)
                assert neg == predicted

    def test_kl_closed(self):
        np.testing.assert_allclose(
            gaussian_kl_closed(3.0, 0.25),
            0.5 * (0.25 + 3.0 - 1.0 - math.log(0.25)),
            rtol=1e-15,
        )

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            gaussian_hessian_H(1.0, 0.0)
        with pytest.raises(ValueError):
            gaussian_hessian_H(-1.0, 0.5)


class TestTwoValueHessian:
    def test_anchor_value(self):
        # independent 40-digit evaluation of the closed form
        np.testing.assert_allclose(
            twovalue_hessian(math.e, E5), -0.3021903386704896, rtol=1e-13)

    def test_moment_route_identical(self):
        for x1, x2 in ((math.e, E5), (1.5, 0.25), (4.0, 0.1)):
            pair = make_two_point(x1, x2)
            np.testing.assert_allclose(
                twovalue_hessian(x1, x2), hessian_H_moments(pair), rtol=1e-12)

    def test_vanishes_as_x1_to_one(self):
        assert abs(twovalue_hessian(1.0 + 1e-9, 0.5)) < 1e-7

    def test_negative_over_paper_regime(self):
        for eps in (0.1, 1.0):
            for M in (5.0, 8.0, 12.0):
                assert twovalue_hessian(math.exp(eps), math.exp(-M)) < 0.0

    def test_kl_budget(self):
        for eps in (0.1, 1.0):
            for M in (5.0, 8.0, 12.0):
                assert twovalue_kl(math.exp(eps), math.exp(-M)) <= eps + 1e-12

    def test_ordering_required(self):
        with pytest.raises(ValueError):
            twovalue_hessian(0.5, 1.5)

    def test_builder_cross_check(self):
        res = twovalue_hessian_result(1.0, 5.0)
        assert res.negative
        np.testing.assert_allclose(res.closed_form_value, res.quadrature_value, rtol=1e-10)
        assert res.kl_budget <= 1.0


class TestGdcRatios:
    def test_gaussian_anchor(self):
        ratio, klv = gdc_ratio_gaussian(10.0)
        np.testing.assert_allclose(ratio, 0.028761, atol=1e-5)
        assert ratio <= 3.0 / 100.0
        np.testing.assert_allclose(klv, 0.5 * (0.01 + 100.0 - 1.0 + math.log(100.0)), rtol=1e-12)

    def test_gaussian_bound_sweep(self):
        for M in (1.5, 2.0, 5.0, 20.0, 100.0):
            ratio, _ = gdc_ratio_gaussian(M)
            assert ratio <= 3.0 / M**2 * (1.0 + 1e-9)

    def test_gaussian_requires_m_above_one(self):
        with pytest.raises(ValueError):
            gdc_ratio_gaussian(1.0)

    def test_gaussian_quadrature_agreement(self):
        res = gdc_gaussian_result(10.0)
        rel = abs(res.quadrature_value - res.closed_form_value) / res.closed_form_value
        assert rel < 1e-6
        np.testing.assert_allclose(res.closed_form_value, 0.02876123249762321, rtol=1e-12)

    def test_twovalue_kl_stays_in_budget(self):
        for eps_prime in (0.1, 0.5, 1.0):
            for M in (5.0, 21.0, 30.0):
                _, klv = gdc_ratio_twovalue(eps_prime, M)
                assert klv <= eps_prime * (1.0 + 1e-12)

    def test_twovalue_ratio_equals_two_point_scan_value(self):
        # the K=2 gradient-dominance ratio reduces to the same closed form
        from frflow import two_point_ratio

        for eps_prime, M in ((1.0, 5.0), (0.5, 8.0)):
            ratio, _ = gdc_ratio_twovalue(eps_prime, M)
            np.testing.assert_allclose(
                ratio,
                two_point_ratio(kl(), math.exp(-M), math.exp(eps_prime)),
                rtol=1e-12,
            )

    def test_twovalue_vanishing_ratio(self):
        ratio20, _ = gdc_ratio_twovalue(1.0, 20.0)
        np.testing.assert_allclose(ratio20, 5.745778480324878e-07, rtol=1e-12)
        res = gdc_twovalue_result(1.0, 20.0)
        np.testing.assert_allclose(res.quadrature_value, res.closed_form_value, rtol=1e-8)

    def test_twovalue_G_matches_grad_norm(self):
        x1, x2 = 1.5, 0.2
        pair = make_two_point(x1, x2)
        np.testing.assert_allclose(twovalue_G(x1, x2), grad_norm_sq(kl(), pair), rtol=1e-12)
        np.testing.assert_allclose(twovalue_kl(x1, x2), divergence(kl(), pair), rtol=1e-12)


class TestResultType:
    def test_cross_tolerance_enforced(self):
        with pytest.raises(FRFlowError):
            CounterexampleResult(
                construction="gaussian", parameters={"mu2": 1.0},
                closed_form_value=1.0, quadrature_value=1.01,
                kl_budget=0.0, negative=False,
            )

    def test_json_dict(self):
        res = gaussian_hessian_result(3.0, 0.25)
        d = res.to_json_dict()
        assert d["construction"] == "gaussian"
        assert d["negative"] is True
        np.testing.assert_allclose(d["closed_form_value"], -0.0234375, atol=1e-15)
        assert set(d) >= {"construction", "parameters", "closed_form_value",
                          "quadrature_value", "kl_budget", "negative"}
