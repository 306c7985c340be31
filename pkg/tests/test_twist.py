"""Twisted series, reflected continuation, and residue extraction.

The lacunary presets admit a hand oracle: on square support the twist phase
e(-alpha sqrt(n)) collapses to a root of unity at n = nu^2, so partial sums
over nu with a hardcoded character table give reference values that never
touch the coefficient machinery under test.  Everything else is cross-route:
direct against stratified summation, smoothed against reflected-smoothed,
float64 against the extended-precision reflected series.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistlab.errors import DomainError, StripConditionError
from twistlab.etaq import build_preset
from twistlab.twist import (
    F_X_twist,
    F_pm_ell,
    F_star_ell,
    F_twist_continued,
    F_twist_series,
    TwistContext,
    a_ladder,
    basic_formula_rhs,
    cf_from_residue,
    fe_rhs,
    residue_circle,
    residue_kappa,
    s_ell,
    sigma_X,
    spectral_alphas,
    twist_abscissa,
)
from twistlab.twist import _fe_rhs_mp

PRESETS = ("ETA24", "ETA8_CUBED", "ETA8_FIFTH")

CHI12 = {1: 1, 5: -1, 7: -1, 11: 1}
CHI4 = {1: 1, 3: -1}

# spot frequencies: one spectral and one off-spectrum twist per square form,
# and a support frequency for the progression form (whose spectrum is empty)
ALPHAS = {
    "ETA24": (Fraction(1, 12), Fraction(3, 10)),
    "ETA8_CUBED": (Fraction(1, 4), Fraction(1, 3)),
    "ETA8_FIFTH": (Fraction(1, 24), Fraction(1, 12)),
}


def ctx(name: str, alpha) -> TwistContext:
    return TwistContext.for_preset(name, Fraction(alpha))


def rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def falling(x: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for v in range(k):
        out *= x + v
    return out


class TestLadder:
    def test_small_tables(self):
        assert a_ladder(0) == (1,)
        assert a_ladder(1) == (1, 1)
        assert a_ladder(2) == (1, 3, 3)
        assert a_ladder(3) == (1, 6, 15, 15)

    @pytest.mark.parametrize("hstar", range(7))
    def test_rewrites_odd_shift_product(self, hstar):
        # evaluate both sides of the change of basis at h*+2 rational points;
        # degree h* polynomials agreeing there are identical
        coeffs = a_ladder(hstar)
        assert coeffs[0] == 1
        for x in [Fraction(j, 3) for j in range(-2, 2 * hstar + 2)]:
            lhs = Fraction(1)
            for j in range(1, hstar + 1):
                lhs *= x + 2 * j - 1
            rhs = sum(c * falling(x, hstar - ell)
                      for ell, c in enumerate(coeffs))
            assert lhs == rhs

    def test_top_weight_is_double_factorial(self):
        for hstar in range(1, 9):
            df = math.prod(range(1, 2 * hstar, 2))
            assert a_ladder(hstar)[-1] == df

    def test_negative_length_rejected(self):
        with pytest.raises(DomainError):
            a_ladder(-1)

    def test_pole_ladder(self):
        assert s_ell(0) == Fraction(3, 4)
        assert s_ell(1) == Fraction(1, 4)
        assert float(s_ell(2)) == -0.25


class TestContext:
    def test_exact_spectrum_membership(self):
        assert ctx("ETA24", "1/12").in_spectrum
        assert ctx("ETA24", "5/12").in_spectrum
        assert not ctx("ETA24", "1/6").in_spectrum   # n_alpha = 4, a(4) = 0
        assert not ctx("ETA24", "3/10").in_spectrum  # n_alpha not integral
        assert ctx("ETA8_CUBED", "1/4").in_spectrum
        assert not ctx("ETA8_FIFTH", "1/24").in_spectrum
        assert not ctx("ETA8_FIFTH", "5/12").in_spectrum

    def test_exact_frequency_data(self):
        tc = ctx("ETA24", "1/12")
        assert tc.n_alpha == 1 and tc.nu_alpha == 1
        tc = ctx("ETA24", "3/10")
        assert tc.n_alpha == Fraction(324, 25)
        assert tc.nu_alpha == Fraction(18, 5)
        tc = ctx("ETA8_CUBED", "5/4")
        assert tc.n_alpha == 25 and tc.nu_alpha == 5

    def test_spectral_alphas(self):
        assert spectral_alphas(build_preset("ETA24"), 4) == [
            Fraction(1, 12), Fraction(5, 12), Fraction(7, 12),
            Fraction(11, 12)]
        assert spectral_alphas(build_preset("ETA8_CUBED"), 3) == [
            Fraction(1, 4), Fraction(3, 4), Fraction(5, 4)]
        assert spectral_alphas(build_preset("ETA8_FIFTH"), 1) == []

    def test_rejects_bad_alpha(self):
        with pytest.raises(DomainError):
            ctx("ETA24", "-1/12")
        with pytest.raises(DomainError):
            ctx("ETA24", 0)

    def test_z_X_structure(self):
        tc = ctx("ETA24", "1/12")
        z = tc.z_X(1, 50.0)
        assert z.real == 1.0
        assert z.imag == -tc.Q / 100.0
        with pytest.raises(DomainError):
            tc.z_X(0, 50.0)
        with pytest.raises(DomainError):
            tc.z_X(1, 1.0)

    def test_c_star_phase_table(self):
        tc = ctx("ETA8_CUBED", "3/4")  # nu_alpha = 3
        mu = tc.mu
        for nu in (1, 5, 7):
            expect = -cmath.exp(1j * math.pi * mu) * tc.a_star(nu * nu)
            assert abs(tc.c_star(nu, 0) - expect) < 1e-15
        for nu in (-1,):  # inside the finite band
            expect = cmath.exp(1j * math.pi * (0.5 - mu)) * tc.a_star(1)
            assert abs(tc.c_star(nu, 0) - expect) < 1e-15
            expect1 = cmath.exp(1j * math.pi * (1.5 - mu)) * tc.a_star(1)
            assert abs(tc.c_star(nu, 1) - expect1) < 1e-15
        for nu in (-5, -7):
            expect = cmath.exp(-1j * math.pi * mu) * tc.a_star(nu * nu)
            assert abs(tc.c_star(nu, 0) - expect) < 1e-15
        with pytest.raises(DomainError):
            tc.c_star(0, 0)
        with pytest.raises(DomainError):
            tc.c_star(-3, 0)

    @settings(max_examples=40, deadline=None)
    @given(nu=st.integers(min_value=-60, max_value=60).filter(lambda v: v),
           ell=st.integers(min_value=0, max_value=1))
    def test_c_star_modulus(self, nu, ell):
        tc = ctx("ETA8_FIFTH", "1/24")  # nu_alpha = 1/2: band is empty
        ell = min(ell, tc.h_star)
        assert abs(abs(tc.c_star(nu, ell)) - abs(tc.a_star(nu * nu))) < 1e-15


class TestTwistSeries:
    def test_eta24_against_nu_sum(self):
        # F(2, 1/12) = sum chi12(nu) nu^{-7/2} e^{-2 pi i nu / 12}
        acc = mp.mpc(0)
        with mp.workdps(40):
            for v in range(1, 20001):
                c = CHI12.get(v % 12, 0)
                if c:
                    acc += c * mp.power(v, mp.mpf("-3.5")) \
                        * mp.expjpi(mp.mpf(-2 * v) / 12)
        oracle = complex(acc)
        got = F_twist_series(ctx("ETA24", "1/12"), 2.0)
        assert abs(got.value - oracle) <= got.error + 1e-11

    def test_cubed_against_nu_sum(self):
        # the quarter twist makes the sum purely imaginary
        acc = mp.mpc(0)
        with mp.workdps(40):
            for v in range(1, 20001, 2):
                acc += CHI4[v % 4] * mp.power(v, mp.mpf("-3.5")) \
                    * mp.expjpi(mp.mpf(-2 * v) / 4)
        oracle = complex(acc)
        assert abs(oracle.real) < 1e-25
        got = F_twist_series(ctx("ETA8_CUBED", "1/4"), 2.0)
        assert abs(got.value - oracle) <= got.error + 1e-11
        assert abs(got.value.real) < 1e-11

    def test_below_abscissa_rejected(self):
        tc = ctx("ETA24", "1/12")
        with pytest.raises(StripConditionError):
            F_twist_series(tc, 0.9 + 4.0j)

    @settings(max_examples=15, deadline=None)
    @given(sigma=st.floats(min_value=1.4, max_value=2.5),
           t=st.floats(min_value=-6.0, max_value=6.0))
    def test_frequency_reflection(self, sigma, t):
        # on square support the phase lives on integers nu, so conjugation
        # maps the twist at alpha to the twist at 1 - alpha
        s = complex(sigma, t)
        up = F_twist_series(ctx("ETA24", "5/12"), s, tol=1e-9)
        dn = F_twist_series(ctx("ETA24", "7/12"), s.conjugate(), tol=1e-9)
        assert abs(dn.value - up.value.conjugate()) <= up.error + dn.error


class TestShiftedSeries:
    @pytest.mark.parametrize("name,alpha,s,sign,ell", [
        ("ETA24", "1/12", 1.6 + 2.0j, +1, 0),
        ("ETA24", "1/12", 1.6 + 2.0j, -1, 0),
        ("ETA8_CUBED", "1/4", 1.4 - 1.0j, +1, 0),
        ("ETA8_FIFTH", "1/24", 2.6 + 2.0j, -1, 1),
    ])
    def test_direct_vs_stratified(self, name, alpha, s, sign, ell):
        # the two summation routes share no code past the coefficient source
        tc = ctx(name, alpha)
        d = F_pm_ell(tc, s, ell, sign, tol=1e-10, mode="direct")
        st_ = F_pm_ell(tc, s, ell, sign, tol=1e-10, mode="stratified")
        assert d.method == "direct" and st_.method == "stratified"
        assert rel(d.value, st_.value) < 1e-8

    def test_stratified_error_stays_honest_at_large_shift(self):
        # at nu_alpha = 3 the rebracketing weights grow like 3^r and float64
        # accuracy is lost; the reported error must still cover the deviation
        # from the trustworthy direct sum
        tc = ctx("ETA8_CUBED", "3/4")
        d = F_pm_ell(tc, 1.4 - 1.0j, 0, +1, tol=1e-10, mode="direct")
        st_ = F_pm_ell(tc, 1.4 - 1.0j, 0, +1, tol=1e-10, mode="stratified")
        assert abs(d.value - st_.value) <= d.error + st_.error

    def test_direct_needs_abscissa(self):
        tc = ctx("ETA24", "1/12")
        with pytest.raises(StripConditionError):
            F_pm_ell(tc, 0.8 + 1.0j, 0, +1, mode="direct")
        assert twist_abscissa(tc.form) == 1.05
        assert twist_abscissa(build_preset("ETA8_FIFTH")) == 1.3

    def test_stratified_reaches_left(self):
        # entire continuation: finite value and a certified error bound well
        # inside the divergence region of the direct sum
        tc = ctx("ETA8_CUBED", "1/4")
        out = F_pm_ell(tc, -1.0 + 1.0j, 0, +1, tol=1e-9, mode="stratified")
        assert math.isfinite(abs(out.value))
        assert out.error < 1e-6 * max(1.0, abs(out.value))

    def test_ell_sign_validation(self):
        tc = ctx("ETA24", "1/12")
        with pytest.raises(DomainError):
            F_pm_ell(tc, 1.5, 1, +1)
        with pytest.raises(DomainError):
            F_pm_ell(tc, 1.5, 0, 2)

    def test_star_combination(self):
        # F*_l must equal the phase-weighted sum of its two halves
        tc = ctx("ETA24", "7/12")
        s = 1.3 + 0.8j
        plus = F_pm_ell(tc, s, 0, +1, tol=1e-10)
        minus = F_pm_ell(tc, s, 0, -1, tol=1e-10)
        combo = (cmath.exp(-1j * math.pi * s) * plus.value
                 + cmath.exp(1j * math.pi * s) * minus.value)
        star = F_star_ell(tc, s, 0, tol=1e-10)
        assert rel(star.value, combo) < 1e-12


class TestSmoothedStrip:
    # the smoothed sum F_X and its reflected-smoothed rewriting evaluate the
    # same function through disjoint pipelines (float64 cutoff summation
    # against stratified log-domain series); agreement is the identity check
    POINTS = [
        ("ETA24", "1/12", -0.5 + 0.7j, 50.0),
        ("ETA24", "3/10", -0.7 + 0.3j, 50.0),
        ("ETA8_CUBED", "1/4", -0.6 - 1.1j, 50.0),
        ("ETA8_FIFTH", "1/24", -0.45 + 0.9j, 60.0),
    ]

    @pytest.mark.parametrize("name,alpha,s,X", POINTS)
    def test_reflected_matches_direct(self, name, alpha, s, X):
        tc = ctx(name, alpha)
        lhs = F_X_twist(tc, s, X, tol=1e-10)
        rhs = basic_formula_rhs(tc, s, X, tol=1e-10)
        assert rel(lhs.value, rhs.value) < 1e-9

    def test_strip_guard(self):
        tc = ctx("ETA24", "1/12")
        for bad in (-0.2 + 1.0j, -1.1, 0.5):
            with pytest.raises(StripConditionError):
                basic_formula_rhs(tc, bad, 50.0)
        with pytest.raises(DomainError):
            F_X_twist(tc, -0.5, 0.5)

    @settings(max_examples=10, deadline=None)
    @given(sigma=st.floats(min_value=0.2, max_value=1.5),
           t=st.floats(min_value=-5.0, max_value=5.0))
    def test_smoothed_frequency_reflection(self, sigma, t):
        s = complex(sigma, t)
        up = F_X_twist(ctx("ETA8_CUBED", "1/3"), s, 30.0, tol=1e-9)
        dn = F_X_twist(ctx("ETA8_CUBED", "2/3"), s.conjugate(), 30.0,
                       tol=1e-9)
        assert abs(dn.value - up.value.conjugate()) <= up.error + dn.error

    def test_sigma_X_scaling(self):
        # single-pole forms scale exactly by (X'/X)^{2(s_0 - s)}
        tc = ctx("ETA8_CUBED", "1/4")
        s = -0.7 + 0.4j
        ratio = sigma_X(tc, s, 120.0) / sigma_X(tc, s, 60.0)
        assert abs(ratio - 2.0 ** (2.0 * (0.75 - s))) < 1e-12

    def test_sigma_X_off_spectrum_vanishes(self):
        assert sigma_X(ctx("ETA24", "3/10"), -0.7 + 0.4j, 80.0) == 0
        assert sigma_X(ctx("ETA8_FIFTH", "1/24"), -0.7, 80.0) == 0


class TestContinuation:
    @pytest.mark.parametrize("name,alpha", [
        ("ETA24", "1/12"), ("ETA8_CUBED", "1/4")])
    def test_overlap_with_series(self, name, alpha):
        # extrapolated continuation against plain summation where both apply
        tc = ctx(name, alpha)
        a = F_twist_continued(tc, 1.8 + 1.0j)
        b = F_twist_series(tc, 1.8 + 1.0j)
        assert a.method == "extrapolated"
        assert rel(a.value, b.value) < 1e-9

    @pytest.mark.parametrize("name,alpha,s", [
        ("ETA24", "1/12", -0.5 + 0.7j),
        ("ETA24", "3/10", -0.45 + 1.2j),
        ("ETA8_CUBED", "1/4", -0.5 + 0.7j),
    ])
    def test_matches_reflected_series(self, name, alpha, s):
        # the two continuations approach s from opposite half-planes
        tc = ctx(name, alpha)
        lhs = F_twist_continued(tc, s, tol=1e-8)
        rhs = fe_rhs(tc, s, tol=1e-9)
        assert abs(lhs.value - rhs.value) < 1e-6 * max(1.0, abs(rhs.value))

    @pytest.mark.parametrize("name,alpha,s", [
        ("ETA24", "1/12", -0.5 + 0.5j),
        ("ETA8_CUBED", "1/4", -0.9 + 2.0j),
    ])
    def test_reflected_against_extended_precision(self, name, alpha, s):
        tc = ctx(name, alpha)
        a = fe_rhs(tc, s, tol=1e-9)
        b = _fe_rhs_mp(tc, s, abs_tol=1e-10)
        assert rel(a.value, complex(b.value)) < 1e-10


class TestResidues:
    def test_kappa_vanishes_off_spectrum(self):
        assert residue_kappa(ctx("ETA24", "3/10"), 0) == 0
        assert residue_kappa(ctx("ETA8_FIFTH", "1/24"), 0) == 0
        assert residue_kappa(ctx("ETA8_FIFTH", "1/24"), 1) == 0

    def test_ell_range_guard(self):
        with pytest.raises(DomainError):
            residue_kappa(ctx("ETA24", "1/12"), 1)
        with pytest.raises(DomainError):
            cf_from_residue(ctx("ETA24", "3/10"), 0, 1.0)

    @pytest.mark.parametrize("name", ["ETA24", "ETA8_CUBED"])
    def test_normalized_residue_is_alpha_free(self, name):
        # kappa_l(alpha) with the explicit alpha factors stripped must not
        # depend on which spectral frequency produced it
        cs = [cf_from_residue(ctx(name, a), 0, residue_kappa(ctx(name, a), 0))
              for a in spectral_alphas(build_preset(name), 3)]
        spread = max(abs(c - cs[0]) for c in cs)
        assert spread < 1e-15 * abs(cs[0])

    def test_cauchy_circle_recovers_kappa(self):
        # one contour extraction from the reflected series; the closed form
        # never enters the integrand
        tc = ctx("ETA8_CUBED", "1/4")
        got = residue_circle(tc, 0, radius=1e-3, points=8, tol=1e-7)
        kap = residue_kappa(tc, 0)
        assert rel(got.value, kap) < 1e-8

    def test_circle_averages_out_off_spectrum(self):
        tc = ctx("ETA8_CUBED", "1/3")
        got = residue_circle(tc, 0, radius=1e-3, points=8, tol=1e-7)
        assert abs(got.value) < 1e-8
