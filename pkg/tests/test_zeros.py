"""Tube geometry, zero refinement, rectangle counts, growth fits.

The two-term tube data is checked against hand enumerations of the character
supports (chi12 for ETA24, chi_{-4} for ETA8_CUBED, the 5 mod 24 progression
for ETA8_FIFTH); windings are cross-checked against the predicted seed
lattice, and the count asymptotics against their closed-form coefficients.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistlab.errors import ConvergenceError, DomainError, StripConditionError
from twistlab.twist import TwistContext
from twistlab.zeros import (
    count_zeros_rectangle,
    growth_probe,
    nontrivial_zero_count,
    off_tube_minimum,
    predicted_trivial_zeros,
    refine_zero,
    rvm_linear_coefficient,
    rvm_prediction,
    seed_spacing,
    tube_data,
    tube_zero_count,
)


def ctx(name: str, alpha) -> TwistContext:
    return TwistContext.for_preset(name, Fraction(alpha))


class TestTubeData:
    def test_eta24_exact(self):
        td = tube_data(ctx("ETA24", "1/12"))
        assert (td.nu_plus, td.nu_minus) == (1, -5)
        assert td.m_plus == Fraction(2) and td.m_minus == Fraction(4)
        assert abs(td.rho_plus - math.sqrt(2)) < 1e-15
        assert abs(td.rho_minus - 2.0) < 1e-15
        assert abs(td.theta_plus - math.pi) < 1e-15
        assert abs(td.theta_minus - 1.5 * math.pi) < 1e-15
        assert abs(td.slope + math.log(2) / math.pi) < 1e-15
        assert abs(td.intercept - 3 * math.log(2) / (4 * math.pi)) < 1e-15

    def test_band_minimizer(self):
        # nu_alpha = 5: the nearest supported root above -5 is the negative
        # root -1, not the positive root +1
        td = tube_data(ctx("ETA24", "5/12"))
        assert (td.nu_plus, td.nu_minus) == (-1, -7)
        assert td.m_plus == 4 and td.m_minus == 2

    def test_cubed_real_axis(self):
        # equidistant roots on both sides: the line degenerates to the axis
        td = tube_data(ctx("ETA8_CUBED", "1/4"))
        assert (td.nu_plus, td.nu_minus) == (1, -3)
        assert td.m_plus == 2 and td.m_minus == 2
        assert td.slope == 0.0
        assert abs(td.intercept) < 1e-15
        assert td.theta_plus == 0.0
        assert abs(td.theta_minus - 1.5 * math.pi) < 1e-15

    def test_fifth_irrational_roots(self):
        td = tube_data(ctx("ETA8_FIFTH", "1/24"))
        assert td.n_plus == td.n_minus == 5
        assert abs(td.m_plus - (math.sqrt(5) + 0.5)) < 1e-14
        assert abs(td.m_minus - (math.sqrt(5) - 0.5)) < 1e-14
        assert td.slope > 0

    def test_spectral_crossing_jump(self):
        # minimizers change discontinuously as nu_alpha crosses a supported
        # root; m_pm stay exact rationals on integer roots
        lo = tube_data(ctx("ETA24", Fraction(4999, 12000)))
        hi = tube_data(ctx("ETA24", Fraction(5001, 12000)))
        assert (lo.nu_plus, lo.nu_minus) == (-1, -5)
        assert (hi.nu_plus, hi.nu_minus) == (-5, -7)
        assert lo.m_minus == Fraction(1, 1000)
        assert hi.m_plus == Fraction(1, 1000)

    @settings(max_examples=25, deadline=None)
    @given(num=st.integers(min_value=1, max_value=71))
    def test_sides_and_line(self, num):
        tc = ctx("ETA24", Fraction(num, 72))
        td = tube_data(tc)
        na = float(tc.nu_alpha)
        assert td.nu_plus > -na > td.nu_minus
        assert float(td.m_plus) > 0 and float(td.m_minus) > 0
        assert td.rho_plus > 0 and td.rho_minus > 0
        s = complex(-7.0, td.line_t(-7.0))
        assert td.distance(s) < 1e-12


class TestSeeds:
    def test_cubed_negative_integer_lattice(self):
        # slope 0, unit spacing: seeds at -3/4 - k exactly, on the axis
        seeds = predicted_trivial_zeros(ctx("ETA8_CUBED", "1/4"), 8.0)
        assert len(seeds) == 8
        for j, z in enumerate(seeds):
            assert abs(z.real - (-0.75 - j)) < 1e-12
            assert abs(z.imag) < 1e-12

    def test_even_spacing_on_line(self):
        tc = ctx("ETA24", "1/12")
        td = tube_data(tc)
        seeds = predicted_trivial_zeros(tc, 12.0)
        gaps = [a.real - b.real for a, b in zip(seeds, seeds[1:])]
        for g in gaps:
            assert abs(g - seed_spacing(td)) < 1e-12
        for z in seeds:
            assert td.distance(z) < 1e-12

    def test_argument_balance(self):
        # each seed puts the two dominating terms in exact antiphase
        tc = ctx("ETA24", "7/12")
        td = tube_data(tc)
        ell = math.log(float(td.m_plus) / float(td.m_minus))
        for z in predicted_trivial_zeros(tc, 10.0):
            val = (2.0 * math.pi * z.real + 2.0 * ell * z.imag
                   + td.theta_plus - td.theta_minus)
            assert abs((val / math.pi) % 2.0 - 1.0) < 1e-9

    def test_window_guard(self):
        with pytest.raises(DomainError):
            predicted_trivial_zeros(ctx("ETA24", "1/12"), -2.0)


class TestRefinement:
    def test_eta24_window(self):
        recs = tube_zero_count(ctx("ETA24", "1/12"), 10.0, sigma0=5.0)
        assert len(recs) in (10, 11)
        assert all(r.kind == "trivial" for r in recs)
        assert max(r.distance_to_line for r in recs) < 0.05
        assert max(r.residual for r in recs) < 1e-10

    def test_fifth_refines_off_axis(self):
        tc = ctx("ETA8_FIFTH", "1/24")
        seeds = predicted_trivial_zeros(tc, 9.0)
        r = refine_zero(tc, seeds[-1])
        assert r.kind == "trivial"
        assert r.distance_to_line < 0.05
        assert r.residual < 1e-10

    def test_perturbed_seed_is_never_echoed(self):
        # a bad seed must either land on a genuine zero or raise; the exact
        # outcome depends on the basin, so accept both
        tc = ctx("ETA24", "1/12")
        seed = predicted_trivial_zeros(tc, 10.0)[-1] + 0.4
        try:
            r = refine_zero(tc, seed, sigma_edge=0.5)
        except ConvergenceError:
            return
        assert abs(r.location - seed) > 1e-3
        assert r.residual < 1e-10

    def test_off_tube_margin(self):
        # normalized |F| bounded well away from zero off the tube
        m = off_tube_minimum(ctx("ETA24", "1/12"), -20.0, -5.0)
        assert m > 0.3


class TestWinding:
    def test_empty_far_right_box(self):
        assert count_zeros_rectangle(ctx("ETA24", "1/12"),
                                     2.2, 3.0, 5.0, 8.0) == 0

    def test_pole_winds_negative(self):
        assert count_zeros_rectangle(ctx("ETA24", "1/12"),
                                     0.7, 0.8, -0.05, 0.05) == -1

    def test_single_zero_box(self):
        assert count_zeros_rectangle(ctx("ETA24", "1/12"),
                                     -1.45, -0.85, 0.25, 0.6) == 1

    def test_matches_seed_lattice_deep(self):
        # independent count of the far-left window: argument principle
        # against the predicted lattice
        tc = ctx("ETA24", "1/12")
        seeds = [z for z in predicted_trivial_zeros(tc, 25.0)
                 if -20.2 < z.real < -10.2 and 2.0 < z.imag < 5.0]
        w = count_zeros_rectangle(tc, -20.2, -10.2, 2.0, 5.0)
        assert w == len(seeds) == 10

    def test_degenerate_rectangle(self):
        with pytest.raises(DomainError):
            count_zeros_rectangle(ctx("ETA24", "1/12"), 1.0, 1.0, 0.0, 1.0)


class TestCounts:
    def test_linear_coefficient_closed_form(self):
        # N = 576, first support 1, m+ m- = 8
        got = rvm_linear_coefficient(ctx("ETA24", "1/12"))
        want = math.log(576 / (8 * (2 * math.pi * math.e) ** 2)) / math.pi
        assert abs(got - want) < 1e-14
        assert abs(got + 0.4455) < 1e-3

    def test_prediction_value(self):
        p = rvm_prediction(ctx("ETA24", "1/12"), 30.0)
        assert abs(p - 51.598) < 1e-2
        with pytest.raises(DomainError):
            rvm_prediction(ctx("ETA24", "1/12"), 2.0)

    def test_count_at_t15(self):
        # frozen winding: main terms 19.2 plus the six shallow tube zeros
        # and O(1) boundary effects
        tc = ctx("ETA24", "1/12")
        n = nontrivial_zero_count(tc, 15.0)
        assert n == 26
        dev = abs(n - rvm_prediction(tc, 15.0))
        assert dev < 3.0 * math.log(15.0)


class TestGrowth:
    TS = tuple(float(t) for t in np.geomspace(20.0, 200.0, 12))

    def test_left_line_cubic(self):
        up, dn = growth_probe(ctx("ETA24", "1/12"), -1.0, self.TS)
        assert abs(up - 3.0) < 0.15
        assert abs(dn - 3.0) < 0.15

    def test_right_line_flat(self):
        up, dn = growth_probe(ctx("ETA24", "1/12"), 2.0, self.TS)
        assert abs(up) < 0.1
        assert abs(dn) < 0.1

    def test_guards(self):
        tc = ctx("ETA24", "1/12")
        with pytest.raises(StripConditionError):
            growth_probe(tc, 0.5, self.TS)
        with pytest.raises(DomainError):
            growth_probe(tc, -1.0, (20.0, 30.0, 40.0, 50.0))
        with pytest.raises(DomainError):
            growth_probe(tc, -1.0, (20.0, 40.0, 80.0, 300.0))
