import math

import numpy as np
import pytest

from curvehedge import (
    CashFlow,
    CurveShift,
    ForwardCurve,
    MethodSpec,
    clamp_functional,
    clamp_variation,
    dollar_duration,
    extrapolate,
    method_variation,
    method_variation_pv,
    method_variation_report,
    numeric_variation,
    present_value,
    second_order_pv,
    sw_variation_coefficient,
    variation_discount,
    variation_pv,
)
from curvehedge.errors import DomainError, EvaluationError
from curvehedge.variation import EPS_SCHEDULE

from conftest import random_curve, random_lump_flow, random_shift

UFR = 0.042
TAU = 10.0
KAPPA = 20.0


def all_specs():
    return [
        MethodSpec("M1", tau=TAU, ufr=UFR),
        MethodSpec("M2", tau=TAU),
        MethodSpec("M3", tau=TAU, ufr=UFR),
        MethodSpec("M4", tau=TAU),
        MethodSpec("M5_SFSA", tau=TAU, kappa=KAPPA, ufr=UFR),
        MethodSpec("M6_SW_continuous", tau=TAU, ufr=UFR, alpha=0.2),
    ]


class TestNumericVariation:
    def test_discount_factor_direction(self, flat3):
        """The numeric variation of D(t) recovers -t Dz(t) D(t)."""
        rng = np.random.default_rng(61)
        t = 17.0
        for _ in range(5):
            shift = random_shift(rng)
            report = numeric_variation(lambda c: c.discount_factor(t), flat3, shift)
            expected = variation_discount(flat3, shift, t)
            assert report.numeric == pytest.approx(expected, abs=1e-7)

    def test_linear_functional_is_exact(self, flat3):
        shift = CurveShift.parallel(0.01)
        report = numeric_variation(lambda c: c.zero_yield(25.0), flat3, shift)
        np.testing.assert_allclose(report.quotients, 0.01, rtol=1e-10)
        assert report.numeric == pytest.approx(0.01, rel=1e-12)

    def test_constant_shift_pv(self, flat3):
        flow = CashFlow(lumps=((12.0, 1.0), (40.0, 0.5)))
        c = 0.0007
        report = numeric_variation(
            lambda cur: present_value(cur, flow), flat3, CurveShift.parallel(c)
        )
        expected = -c * dollar_duration(flat3, flow)
        assert report.numeric == pytest.approx(expected, rel=1e-7)

    def test_non_finite_functional_raises(self, flat3):
        def bad(curve):
            return math.inf if curve.zero_yield(50.0) > 0.03 else 1.0

        with pytest.raises(EvaluationError) as info:
            numeric_variation(bad, flat3, CurveShift.parallel(0.01))
        assert info.value.eps is not None  # names the failing step

    def test_report_json_fields(self, flat3):
        report = numeric_variation(
            lambda c: c.discount_factor(5.0), flat3, CurveShift.parallel(0.01), analytic=0.0
        )
        data = report.to_json()
        assert set(data) == {"analytic", "numeric", "residual", "eps_schedule"}
        assert data["eps_schedule"] == list(EPS_SCHEDULE)


class TestClosedFormVariations:
    def test_zero_shift(self, flat3):
        zero = CurveShift.parallel(0.0)
        assert variation_discount(flat3, zero, 10.0) == 0.0
        assert variation_pv(flat3, zero, CashFlow.single_payment(10.0)) == 0.0

    def test_dv01_of_ten_year_flow(self):
        curve = ForwardCurve.flat(0.0)
        shift = CurveShift.parallel(0.0001)
        value = variation_pv(curve, shift, CashFlow.single_payment(10.0))
        assert value == pytest.approx(-0.001, rel=1e-14)

    def test_matches_numeric_oracle(self):
        rng = np.random.default_rng(67)
        for _ in range(10):
            curve = random_curve(rng)
            shift = random_shift(rng)
            flow = random_lump_flow(rng, 0.0, 150.0)
            analytic = variation_pv(curve, shift, flow)
            report = numeric_variation(lambda c: present_value(c, flow), curve, shift)
            assert report.numeric == pytest.approx(analytic, rel=1e-7, abs=1e-9)


class TestMethodVariation:
    def test_m1_is_insensitive(self, flat3):
        rng = np.random.default_rng(71)
        spec = MethodSpec("M1", tau=TAU, ufr=UFR)
        for _ in range(5):
            shift = random_shift(rng)
            assert method_variation(spec, flat3, shift, 30.0) == 0.0

    def test_m2_carries_the_last_yield_shift(self, flat3):
        shift = CurveShift.from_forward_values([0.0, 10.0, 200.0], [0.01, 0.03, 0.0])
        spec = MethodSpec("M2", tau=TAU)
        expected = shift.delta_z(TAU)
        for t in (15.0, 70.0):
            assert method_variation(spec, flat3, shift, t) == expected

    def test_m3_scaling_example(self, flat3):
        spec = MethodSpec("M3", tau=TAU, ufr=UFR)
        assert method_variation(spec, flat3, CurveShift.parallel(1.0), 20.0) == pytest.approx(
            0.5, abs=1e-15
        )

    def test_m4_mixed_exposure(self, flat3):
        shift = CurveShift.from_forward_values([0.0, 10.0, 200.0], [0.0, 0.02, 0.02])
        spec = MethodSpec("M4", tau=TAU)
        t = 40.0
        expected = (TAU / t) * shift.delta_z(TAU) + (1 - TAU / t) * 0.02
        assert method_variation(spec, flat3, shift, t) == pytest.approx(expected, rel=1e-13)

    def test_m5_unit_shift_closed_forms(self, flat3):
        """Parallel unit shift: quadratic inside the blend, (kappa+tau)/2t beyond."""
        spec = MethodSpec("M5_SFSA", tau=TAU, kappa=KAPPA, ufr=UFR)
        unit = CurveShift.parallel(1.0)
        for t in (12.0, 16.0, 20.0):
            expected = (KAPPA**2 - TAU**2 - (KAPPA - t) ** 2) / (2 * t * (KAPPA - TAU))
            assert method_variation(spec, flat3, unit, t) == pytest.approx(expected, rel=1e-13)
        for t in (25.0, 100.0):
            expected = (KAPPA + TAU) / (2 * t)
            assert method_variation(spec, flat3, unit, t) == pytest.approx(expected, rel=1e-13)

    def test_identity_region(self, flat3):
        rng = np.random.default_rng(73)
        shift = random_shift(rng)
        for spec in all_specs():
            assert method_variation(spec, flat3, shift, 7.0) == pytest.approx(
                shift.delta_z(7.0), rel=1e-14
            )

    def test_m6_small_speed_limit(self, flat3):
        """As the reversion speed vanishes, c(t) -> (1 - tau/t) / (1 + (ufr - f_tau)(t - tau))."""
        f_tau = 0.03
        for t in (15.0, 30.0, 60.0):
            c = sw_variation_coefficient(t, TAU, 1e-6, UFR, f_tau)
            limit = (1 - TAU / t) / (1 + (UFR - f_tau) * (t - TAU))
            assert abs(c - limit) < 1e-5

    def test_homogeneity(self, flat3):
        """Positive homogeneity of degree one, for every method and the clamp."""
        rng = np.random.default_rng(79)
        shift = random_shift(rng)
        lam = 2.5
        for spec in all_specs():
            for t in (15.0, 25.0, 90.0):
                one = method_variation(spec, flat3, shift, t)
                scaled = method_variation(spec, flat3, shift.scaled(lam), t)
                assert scaled == pytest.approx(lam * one, rel=1e-12, abs=1e-18)
        v1 = clamp_variation(flat3, shift, 0.03, 50.0)
        v2 = clamp_variation(flat3, shift.scaled(lam), 0.03, 50.0)
        assert v2 == pytest.approx(lam * v1, rel=1e-12, abs=1e-18)

    def test_discrete_sw_rejected(self, flat3):
        spec = MethodSpec("M6_SW_discrete", tau=TAU, ufr=UFR, alpha=0.1)
        with pytest.raises(DomainError):
            method_variation(spec, flat3, CurveShift.parallel(1.0), 20.0)

    def test_m6_defective_region_rejected(self):
        """No variation where the Smith-Wilson discount factor has gone negative."""
        from curvehedge.errors import DefectiveCurveError

        alpha = 0.1
        steep = ForwardCurve.from_forwards([0.0, 10.0], [0.03, UFR + alpha + 0.01])
        spec = MethodSpec("M6_SW_continuous", tau=TAU, ufr=UFR, alpha=alpha)
        assert extrapolate(steep, spec).is_defective
        shift = CurveShift.parallel(0.01)
        # fine where the blending factor is still positive
        assert np.isfinite(method_variation(spec, steep, shift, 15.0))
        with pytest.raises(DefectiveCurveError):
            method_variation(spec, steep, shift, 150.0)

    def test_oracle_agreement_with_offset(self, flat3):
        """The offset relocates the expansion point; analytic tracks that."""
        ts = np.arange(0.0, 200.5, 0.5)
        shift = CurveShift.from_forward_values(
            ts,
            0.006 * np.exp(-0.5 * ((ts - 8.0) / 4.0) ** 2)
            - 0.004 * np.exp(-0.5 * ((ts - 16.0) / 6.0) ** 2),
        )
        flow = CashFlow(lumps=((18.0, 1.0), (45.0, 0.7)))
        for kind_spec in (
            MethodSpec("M3", tau=TAU, ufr=UFR, offset=0.002),
            MethodSpec("M5_SFSA", tau=TAU, kappa=KAPPA, ufr=UFR, offset=0.002),
            MethodSpec("M6_SW_continuous", tau=TAU, ufr=UFR, alpha=0.2, offset=0.002),
        ):
            report = method_variation_report(kind_spec, flat3, shift, flow)
            scale = max(abs(report.analytic), abs(report.numeric), 1e-8)
            assert report.residual / scale < 1e-6, kind_spec.kind


class TestMethodVariationReport:
    def test_m1_zero_both_ways(self, flat3):
        spec = MethodSpec("M1", tau=TAU, ufr=UFR)
        flow = CashFlow.single_payment(30.0)
        report = method_variation_report(spec, flat3, CurveShift.parallel(0.01), flow)
        assert report.analytic == 0.0
        assert abs(report.numeric) < 1e-12
        assert report.residual < 1e-12

    def test_m2_single_lump(self, flat3):
        spec = MethodSpec("M2", tau=TAU)
        sigma = 30.0
        flow = CashFlow.single_payment(sigma)
        unit = CurveShift.parallel(1.0)
        curve = extrapolate(flat3, spec)
        report = method_variation_report(spec, flat3, unit, flow)
        expected = -sigma * curve.discount_factor(sigma)
        assert report.analytic == pytest.approx(expected, rel=1e-13)
        assert report.residual <= 1e-6 * abs(expected)

    def test_oracle_agreement_randomized(self, flat3):
        """Analytic and numeric first variations agree across methods and shifts."""
        rng = np.random.default_rng(83)
        specs = all_specs()
        curves = [flat3] + [random_curve(rng, low=0.0, high=0.05) for _ in range(3)]
        checked = 0
        for i in range(200):
            spec = specs[i % len(specs)]
            curve = curves[i % len(curves)]
            shift = random_shift(rng)
            flow = random_lump_flow(rng, TAU + 2.0, 150.0)
            pv = present_value(extrapolate(curve, spec), flow)
            report = method_variation_report(spec, curve, shift, flow)
            # floor the scale so variations that are numerically zero
            # (shift mass far from the liability) don't fail on noise
            scale = max(abs(report.analytic), abs(report.numeric), 1e-6 * (1.0 + pv))
            assert report.residual / scale < 1e-6, (spec.kind, i)
            checked += 1
        assert checked == 200

    def test_remainder_decay(self, flat3):
        """|F[z + e Dz] - F[z] - e dF| / e shrinks along the halving schedule."""
        rng = np.random.default_rng(89)
        spec = MethodSpec("M5_SFSA", tau=TAU, kappa=KAPPA, ufr=UFR)
        flow = random_lump_flow(rng, KAPPA, 120.0)
        # a bump centered inside the blend window keeps the remainder well
        # above roundoff so its decay is visible
        ts = np.arange(0.0, 200.5, 0.5)
        shift = CurveShift.from_forward_values(
            ts, 0.008 * np.exp(-0.5 * ((ts - 15.0) / 4.0) ** 2)
        )
        analytic = method_variation_pv(spec, flat3, shift, flow)
        f0 = present_value(extrapolate(flat3, spec), flow)
        ratios = []
        for eps in EPS_SCHEDULE:
            value = present_value(extrapolate(flat3.shifted(shift, eps), spec), flow)
            ratios.append(abs(value - f0 - eps * analytic) / eps)
        tail = ratios[-4:]
        assert all(a > b for a, b in zip(tail, tail[1:])), ratios


class TestClamp:
    def test_case_table(self):
        at = ForwardCurve.flat(0.03)       # z(t) = c exactly
        below = ForwardCurve.flat(0.02)
        above = ForwardCurve.flat(0.05)
        c, t = 0.03, 20.0
        down = CurveShift.parallel(-0.01)
        up = CurveShift.parallel(0.01)
        assert clamp_variation(below, up, c, t) == 0.0
        assert clamp_variation(at, down, c, t) == 0.0
        assert clamp_variation(at, up, c, t) == 0.01
        assert clamp_variation(above, down, c, t) == -0.01
        assert clamp_variation(above, up, c, t) == 0.01

    def test_numeric_agreement_at_kink(self):
        at = ForwardCurve.flat(0.03)
        c, t = 0.03, 20.0
        functional = clamp_functional(c, t)
        for dz in (0.01, -0.01):
            report = numeric_variation(functional, at, CurveShift.parallel(dz))
            assert report.numeric == pytest.approx(
                clamp_variation(at, CurveShift.parallel(dz), c, t), abs=1e-8
            )

    def test_nonadditivity_witness(self):
        """At the kink the up and down variations do not cancel."""
        at = ForwardCurve.flat(0.03)
        c, t = 0.03, 20.0
        up = CurveShift.parallel(0.01)
        assert clamp_variation(at, up, c, t) + clamp_variation(at, up.negated(), c, t) == 0.01
        report = numeric_variation(
            clamp_functional(c, t), at, up, check_additivity=True
        )
        assert report.additivity_defect == pytest.approx(0.01, abs=1e-8)


class TestSecondOrder:
    def test_m2_parallel_unit(self, flat3):
        spec = MethodSpec("M2", tau=TAU)
        sigma = 30.0
        curve = extrapolate(flat3, spec)
        value = second_order_pv(spec, flat3, CurveShift.parallel(1.0), CashFlow.single_payment(sigma))
        assert value == pytest.approx(sigma**2 * curve.discount_factor(sigma), rel=1e-12)

    def test_zero_shift(self, flat3):
        spec = MethodSpec("M3", tau=TAU, ufr=UFR)
        value = second_order_pv(spec, flat3, CurveShift.parallel(0.0), CashFlow.single_payment(30.0))
        assert value == 0.0

    def test_against_numeric_second_difference(self, flat3):
        """Chain-rule formula vs direct second differencing of the composite value."""
        rng = np.random.default_rng(97)
        ts = np.arange(0.0, 200.5, 0.5)
        for spec in (
            MethodSpec("M5_SFSA", tau=TAU, kappa=KAPPA, ufr=UFR),
            MethodSpec("M6_SW_continuous", tau=TAU, ufr=UFR, alpha=0.2),
            MethodSpec("M2", tau=TAU),
        ):
            # a fixed bump near tau keeps the second variation well away from
            # zero; the random part makes the shift genuinely non-parallel
            values = 0.008 * np.exp(-0.5 * ((ts - 12.0) / 5.0) ** 2)
            for _ in range(3):
                values = values + rng.uniform(-0.004, 0.004) * np.exp(
                    -0.5 * ((ts - rng.uniform(0, 120)) / rng.uniform(3, 20)) ** 2
                )
            shift = CurveShift.from_forward_values(ts, values)
            flow = random_lump_flow(rng, TAU + 2.0, 100.0)
            analytic = second_order_pv(spec, flat3, shift, flow)
            report = numeric_variation(
                lambda c: present_value(extrapolate(c, spec), flow), flat3, shift, order=2
            )
            scale = max(abs(analytic), abs(report.numeric), 1e-10)
            # for the Smith-Wilson curve both sides are numeric (its d2zbar
            # is itself oracle-derived), so the mutual bound doubles
            bound = 2e-5 if spec.kind == "M6_SW_continuous" else 1e-5
            assert abs(analytic - report.numeric) / scale < bound, spec.kind
