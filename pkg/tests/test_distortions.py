"""Distortion validation, shape classification, duals, and inverses."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochorder import funcalc
from stochorder.distortions import (
    Distortion,
    DistortionValidationError,
    classify,
    co_inverse,
    compose_on_survival,
    dual,
    dualpower,
    from_expression,
    identity,
    inverse,
    parse_distortion_spec,
    power,
    validate,
)

from helpers import GRID63, GRID65, max_abs_diff


class TestValidate:
    def test_accepts_expression_text(self):
        h = validate("p^2", label="square")
        assert h(0.5) == 0.25
        assert h.label == "square"

    def test_accepts_callable(self):
        h = validate(lambda p: p ** 3, label="cube")
        assert h(0.5) == 0.125

    @pytest.mark.parametrize("text", [
        "p/2",          # h(1) != 1
        "1.5*p",        # exceeds 1
        "p^2 - 1/10",   # negative at 0
        "1 - p",        # decreasing
    ])
    def test_rejections(self, text):
        with pytest.raises(DistortionValidationError):
            validate(text, label=text)

    def test_rejecting_message_names_a_witness(self):
        try:
            validate("1 - p", label="reversed")
        except DistortionValidationError as ex:
            assert "reversed" in str(ex)
        else:  # pragma: no cover
            pytest.fail("expected rejection")


class TestBuiltins:
    def test_identity_values(self):
        h = identity()
        assert all(h(p) == p for p in GRID65)

    def test_power_values_and_inverse(self):
        h = power(2.0)
        assert h(0.5) == 0.25
        assert h.inverse_fn(0.25) == pytest.approx(0.5, abs=1e-15)
        assert h.co_inverse_fn(0.75) == pytest.approx(0.5, abs=1e-15)

    def test_dualpower_values_and_inverse(self):
        h = dualpower(2.0)
        assert h(0.5) == pytest.approx(0.75, abs=1e-15)
        assert h.inverse_fn(0.75) == pytest.approx(0.5, abs=1e-15)

    def test_power_requires_positive_exponent(self):
        with pytest.raises((DistortionValidationError, ValueError)):
            power(-1.0)

    def test_builtin_closed_inverses_match_bisection(self):
        h = power(2.5)
        for p in (0.1, 0.5, 0.9):
            assert h.co_inverse_fn(p) == pytest.approx(
                1.0 - h.inverse_fn(1.0 - p), abs=1e-14)
            assert co_inverse(h, p) == pytest.approx(
                h.co_inverse_fn(p), abs=1e-12)


class TestDual:
    def test_dual_of_power_is_dual_power(self):
        assert max_abs_diff(dual(power(2.0)).fn, dualpower(2.0).fn,
                            GRID65) < 1e-15

    @given(k=st.floats(0.4, 4.0))
    def test_dual_is_an_involution(self, k):
        h = power(k)
        hh = dual(dual(h))
        assert max_abs_diff(hh.fn, h.fn, GRID65) < 1e-12

    def test_dual_swaps_star_and_antistar(self):
        report = classify(dual(power(3.0)))
        assert report.antistarshaped and not report.starshaped


class TestInverse:
    def test_bisection_inverse_on_expression(self):
        h = from_expression("p^2")
        assert inverse(h, 0.49) == pytest.approx(0.7, abs=1e-9)

    def test_co_inverse_is_complement_of_inverse(self):
        h = from_expression("p^2")
        for p in (0.2, 0.5, 0.8):
            assert co_inverse(h, p) == pytest.approx(
                1.0 - inverse(h, 1.0 - p), abs=1e-9)


class TestCompose:
    def test_powers_compose_to_power_of_product(self):
        h = compose_on_survival(power(2.0), power(3.0))
        assert max_abs_diff(h.fn, power(6.0).fn, GRID65) < 1e-13

    def test_identity_is_neutral(self):
        h = compose_on_survival(identity(), power(2.0))
        assert max_abs_diff(h.fn, power(2.0).fn, GRID65) < 1e-15


class TestClassify:
    def test_identity_has_every_flag(self):
        report = classify(identity())
        assert all(report.flags().values())

    def test_convex_power(self):
        report = classify(power(2.0))
        assert report.convex and not report.concave
        assert report.starshaped and not report.antistarshaped
        assert report.strictly_increasing
        # its dual 1-(1-p)^2 is concave, hence antistarshaped
        assert report.dual_antistarshaped

    def test_concave_dual_power(self):
        report = classify(dualpower(2.0))
        assert report.concave and not report.convex
        assert report.antistarshaped and not report.starshaped
        # its dual p^2 is starshaped, not antistarshaped
        assert not report.dual_antistarshaped

    def test_starshaped_without_convexity(self, named_distortions):
        report = classify(named_distortions["star_kink"])
        assert report.starshaped and not report.convex

    def test_antistarshaped_without_concavity(self, named_distortions):
        report = classify(named_distortions["antistar_kink"])
        assert report.antistarshaped and not report.concave

    def test_catalog_flag_implications(self, named_distortions):
        for name, h in named_distortions.items():
            flags = classify(h).flags()
            if flags["convex"]:
                assert flags["starshaped"], name
            if flags["concave"]:
                assert flags["antistarshaped"], name
            if flags["starshaped"] and flags["antistarshaped"]:
                assert name == "identity", name

    def test_catalog_entries_are_strictly_increasing(self, named_distortions):
        for name, h in named_distortions.items():
            assert classify(h).strictly_increasing, name

    def test_system_entries_show_expected_shapes(self, named_distortions):
        bridge = classify(named_distortions["sys_five_comp_bridge"])
        assert bridge.starshaped and not bridge.antistarshaped
        three = classify(named_distortions["sys_three_of_four"])
        assert three.antistarshaped and not three.starshaped
        series = classify(named_distortions["sys_series_with_parallel_pair"])
        assert not series.starshaped and not series.antistarshaped
        assert series.dual_antistarshaped and series.strictly_increasing


class TestSpecs:
    def test_power_spec(self):
        h = parse_distortion_spec("power:2")
        assert max_abs_diff(h.fn, power(2.0).fn, GRID65) < 1e-15

    def test_dualpower_spec(self):
        h = parse_distortion_spec("dualpower:1.5")
        assert max_abs_diff(h.fn, dualpower(1.5).fn, GRID63) < 1e-15

    def test_prefixed_expression_spec(self):
        h = parse_distortion_spec("h: 0.5*p + 0.5*p^3")
        assert h(0.5) == pytest.approx(0.3125, abs=1e-15)

    def test_bare_expression_spec(self):
        h = parse_distortion_spec("p^2")
        assert h(0.5) == 0.25

    def test_identity_spec(self):
        assert parse_distortion_spec("identity")(0.3) == 0.3

    def test_bad_exponent_rejected(self):
        with pytest.raises((DistortionValidationError, funcalc.ExprError)):
            parse_distortion_spec("power:zero")

    def test_invalid_expression_rejected(self):
        with pytest.raises(DistortionValidationError):
            parse_distortion_spec("p/2")

    def test_shape_report_is_frozen(self):
        h = power(2.0)
        assert isinstance(h, Distortion)
        report = classify(h)
        with pytest.raises(Exception):
            report.convex = False  # type: ignore[misc]
