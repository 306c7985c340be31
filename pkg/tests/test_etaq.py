"""Expansion engine and preset form tests.

The closed forms for the two lacunary presets are the independent oracle for
the product engine; the fifth power is pinned by frozen anchors computed along
two separate routes and by its proven coefficient bound.
"""

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistlab.errors import DomainError, StripConditionError
from twistlab.etaq import (
    EtaQuotient,
    build_preset,
    chi12,
    eta_expansion,
    multiply_exact,
    write_coefficients_csv,
)
from twistlab.etaq import _fft_convolve, _invert_euler_u, _schoolbook

# frozen: first u-coefficients of the fifth power of the pentagonal series,
# confirmed by an independent pure-python schoolbook run
FIFTH_U_HEAD = [1, -5, 5, 10, -15, -6, -5, 25, 15, -20, 9, -45, -5, 25, 20]

# frozen: classical partition numbers
PARTITIONS = {10: 42, 50: 204226, 100: 190569292}


def naive_product(a, b, m):
    out = [0] * (m + 1)
    for i, ai in enumerate(a[: m + 1]):
        if ai:
            for j, bj in enumerate(b[: m + 1 - i]):
                out[i + j] += ai * bj
    return out


# ---------------------------------------------------------------------------
# pentagonal series
# ---------------------------------------------------------------------------

class TestEtaExpansion:
    def test_unscaled_head(self):
        e = eta_expansion(1, 10)
        assert e.coefficients.tolist() == [1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0]
        assert e.prefactor24 == 1
        assert e.truncation == 10

    def test_scaled_support(self):
        e = eta_expansion(24, 500)
        nz = np.nonzero(e.coefficients)[0]
        assert np.all(nz % 24 == 0)
        base = eta_expansion(1, 500 // 24)
        assert e.coefficients[nz].tolist() == \
            [base.coefficient(j // 24) for j in nz.tolist()]

    def test_bad_arguments(self):
        with pytest.raises(DomainError):
            eta_expansion(0, 10)
        with pytest.raises(DomainError):
            eta_expansion(1, 0)

    def test_coefficient_out_of_range(self):
        e = eta_expansion(1, 10)
        with pytest.raises(DomainError):
            e.coefficient(11)

    def test_cube_matches_classical_identity(self):
        cube = eta_expansion(8, 100) ** 3
        assert cube.prefactor24 == 24
        got = {n: cube.full_coefficient(n) for n in range(1, 50)}
        want = {n: 0 for n in range(1, 50)}
        for nu in (1, 3, 5, 7):
            want[nu * nu] = (-1) ** ((nu - 1) // 2) * nu
        assert got == want


# ---------------------------------------------------------------------------
# exact products
# ---------------------------------------------------------------------------

class TestMultiplyExact:
    def test_fft_path_agrees_with_direct(self):
        rng = np.random.default_rng(7)
        a = rng.integers(-50, 50, size=6000).astype(np.int64)
        b = rng.integers(-50, 50, size=6000).astype(np.int64)
        m = 9000
        res = _fft_convolve(a, b, m)
        assert res is not None
        ref = np.convolve(a, b)[: m + 1]
        assert np.array_equal(res, ref)

    def test_big_values_fall_back_exactly(self):
        big = 1 << 45
        a = [big, -big + 3, 7]
        b = [big - 1, 2, -big]
        got = multiply_exact(a, b, 4)
        assert got.tolist() == naive_product(a, b, 4)

    def test_sparse_scatter_path(self):
        rng = np.random.default_rng(11)
        sparse = np.zeros(3000, dtype=np.int64)
        idx = rng.choice(3000, size=20, replace=False)
        sparse[idx] = rng.choice([-1, 1], size=20)
        dense = rng.integers(-(1 << 40), 1 << 40, size=3000).astype(np.int64)
        m = 4000
        got = multiply_exact(sparse, dense, m)
        ref = naive_product([int(v) for v in sparse],
                            [int(v) for v in dense], m)
        assert got.tolist() == ref

    @given(st.lists(st.integers(-40, 40), min_size=1, max_size=25),
           st.lists(st.integers(-40, 40), min_size=1, max_size=25),
           st.integers(1, 40))
    @settings(max_examples=150, deadline=None)
    def test_matches_schoolbook(self, a, b, m):
        got = multiply_exact(a, b, m)
        assert got.tolist() == naive_product(a, b, m)

    @given(st.lists(st.integers(-9, 9), min_size=1, max_size=15),
           st.lists(st.integers(-9, 9), min_size=1, max_size=15))
    @settings(max_examples=60, deadline=None)
    def test_commutative(self, a, b):
        m = 20
        assert multiply_exact(a, b, m).tolist() == \
            multiply_exact(b, a, m).tolist()

    def test_qexpansion_truncates_to_smaller(self):
        a = eta_expansion(1, 30)
        b = eta_expansion(1, 12)
        prod = a * b
        assert prod.truncation == 12
        assert prod.prefactor24 == 2


# ---------------------------------------------------------------------------
# quotients, inversion
# ---------------------------------------------------------------------------

class TestEtaQuotient:
    @pytest.mark.parametrize("factors", [
        (),
        ((24, 0),),
        ((0, 1),),
        ((24, 2),),          # even exponent sum: integral weight
        ((24, -1), (24, 2)),  # sum 1 odd but lead 24/24 would be fine; scale dup ok
    ])
    def test_invalid_quotients(self, factors):
        if factors == ((24, -1), (24, 2)):
            # this one is actually valid: weight 1/2, lead 1
            q = EtaQuotient(factors)
            assert q.leading_exponent == 1
            return
        with pytest.raises(DomainError):
            EtaQuotient(factors)

    def test_fractional_lead_rejected(self):
        with pytest.raises(DomainError):
            EtaQuotient(((8, 5),))

    def test_negative_lead_rejected(self):
        with pytest.raises(DomainError):
            EtaQuotient(((24, 3), (48, -2), (24, 1), (24, -1)))

    def test_partition_numbers(self):
        inv = _invert_euler_u(1, 100)
        for n, p in PARTITIONS.items():
            assert inv[n] == p

    def test_identity_times_inverse(self):
        m = 120
        fwd = [int(v) for v in eta_expansion(1, m).coefficients]
        inv = _invert_euler_u(1, m)
        prod = naive_product(fwd, inv, m)
        assert prod[0] == 1 and not any(prod[1:])

    def test_mixed_quotient_two_routes(self):
        # eta(48z)^3 / eta(24z)^2: weight 1/2, leading exponent 4
        q = EtaQuotient(((48, 3), (24, -2)))
        assert q.weight == 0.5
        assert q.leading_exponent == 4
        assert q.stride == 24
        mu = 60
        exp = q.expansion(24 * mu)
        got = [exp.coefficient(24 * j) for j in range(mu + 1)]
        # reference: numerator series divided by denominator series, exactly
        num = [0] * (mu + 1)
        for e, s in [(0, 1)] + [(j * (3 * j - 1) // 2, (-1) ** j)
                                for j in range(1, 12)] + \
                    [(j * (3 * j + 1) // 2, (-1) ** j) for j in range(1, 12)]:
            if 2 * e <= mu:
                num[2 * e] = s
        num = naive_product(naive_product(num, num, mu), num, mu)
        den = [int(v) for v in eta_expansion(1, mu).coefficients]
        den = naive_product(den, den, mu)
        ref = [0] * (mu + 1)
        for j in range(mu + 1):
            acc = num[j]
            for i in range(1, j + 1):
                acc -= den[i] * ref[j - i]
            ref[j] = acc
        assert got == ref
        # off-grid coefficients vanish
        off = np.ones(len(exp.coefficients), dtype=bool)
        off[::24] = False
        assert not np.any(exp.coefficients[off])


# ---------------------------------------------------------------------------
# presets against closed forms
# ---------------------------------------------------------------------------

M_FULL = 10 ** 6


class TestPresets:
    def test_eta24_engine_vs_closed_form(self):
        exp = build_preset("ETA24").eta.expansion(M_FULL)
        got = np.asarray(exp.coefficients)
        want = np.zeros(M_FULL + 1, dtype=np.int64)
        for nu in range(1, math.isqrt(M_FULL + 1) + 1):
            if chi12(nu):
                want[nu * nu - 1] = chi12(nu)
        assert np.array_equal(got, want)

    def test_cubed_engine_vs_closed_form(self):
        exp = build_preset("ETA8_CUBED").eta.expansion(M_FULL)
        got = np.asarray(exp.coefficients)
        want = np.zeros(M_FULL + 1, dtype=np.int64)
        for nu in range(1, math.isqrt(M_FULL + 1) + 1, 2):
            want[nu * nu - 1] = (-1) ** ((nu - 1) // 2) * nu
        assert np.array_equal(got, want)

    def test_fifth_frozen_anchors(self):
        form = build_preset("ETA8_FIFTH")
        got = [form.fourier(5 + 24 * j) for j in range(len(FIFTH_U_HEAD))]
        assert got == FIFTH_U_HEAD

    def test_fifth_small_truncation_two_routes(self):
        mu = 90
        pent = [int(v) for v in eta_expansion(1, mu).coefficients]
        ref = pent
        for _ in range(4):
            ref = naive_product(ref, pent, mu)
        exp = EtaQuotient(((24, 5),)).expansion(24 * mu)
        assert [exp.coefficient(24 * j) for j in range(mu + 1)] == ref[: mu + 1]

    def test_fifth_bound_margin(self):
        form = build_preset("ETA8_FIFTH")
        n, c = form.support(M_FULL)
        ratio = np.abs(c).astype(np.float64) / n.astype(np.float64)
        # observed global max is 0.2; the frozen bound 0.5 n keeps 2.5x slack
        assert float(ratio.max()) <= 0.25
        assert np.all(np.abs(c) <= 0.5 * n)

    def test_fourier_off_support(self):
        form = build_preset("ETA8_FIFTH")
        assert form.fourier(6) == 0
        assert form.fourier(24) == 0
        assert form.fourier(29 * 29) == 0  # squares are never 5 mod 24
        lac = build_preset("ETA24")
        assert lac.fourier(2) == 0
        assert lac.fourier(9) == 0  # 3 | nu
        assert lac.fourier(0) == 0

    def test_unknown_preset(self):
        with pytest.raises(DomainError):
            build_preset("ETA12")

    def test_registry_caches(self):
        assert build_preset("ETA24") is build_preset("ETA24")


# ---------------------------------------------------------------------------
# form contract
# ---------------------------------------------------------------------------

class TestFormContract:
    @pytest.mark.parametrize("name,k,level", [
        ("ETA24", 1, 576), ("ETA8_CUBED", 3, 64), ("ETA8_FIFTH", 5, 576)])
    def test_constants(self, name, k, level):
        form = build_preset(name)
        assert form.k == k and form.N == level
        assert form.kappa == k / 2
        assert form.omega == pytest.approx(
            complex(math.cos(math.pi * k / 4), -math.sin(math.pi * k / 4)))
        assert form.omega * form.dual_phase == pytest.approx(1.0)
        assert abs(form.dual_phase) == pytest.approx(1.0)

    @pytest.mark.parametrize("name", ["ETA24", "ETA8_CUBED", "ETA8_FIFTH"])
    def test_dual_fourier_is_phase_times_fourier(self, name):
        form = build_preset(name)
        n, _ = form.support(2000)
        for ni in n.tolist()[:20]:
            assert form.dual_fourier(ni) == pytest.approx(
                form.dual_phase * form.fourier(ni))

    @pytest.mark.parametrize("name", ["ETA24", "ETA8_CUBED", "ETA8_FIFTH"])
    def test_a_bound_on_support(self, name):
        form = build_preset(name)
        n, a = form.support_normalized(10 ** 5)
        assert np.all(np.abs(a) <= form.a_bound_amp * n ** 0.25 * (1 + 1e-12))

    @pytest.mark.parametrize("name", ["ETA24", "ETA8_CUBED"])
    def test_lacunary_a_is_root_nu(self, name):
        form = build_preset(name)
        n, a = form.support_normalized(10 ** 4)
        assert np.allclose(np.abs(a), n ** 0.25, rtol=1e-13)

    @given(st.integers(1, 10 ** 6))
    @settings(max_examples=80, deadline=None)
    def test_normalization_roundtrip(self, n):
        form = build_preset("ETA8_CUBED")
        c = form.fourier(n)
        a = form.normalized(n)
        assert a * float(n) ** ((form.k - 2) / 4.0) == pytest.approx(
            c, abs=1e-9, rel=1e-12)

    @pytest.mark.parametrize("name,sigma", [
        ("ETA24", 1.5), ("ETA8_CUBED", 2.0), ("ETA8_FIFTH", 2.9)])
    def test_tail_bound_dominates_partial_sums(self, name, sigma):
        form = build_preset(name)
        n_min = 500
        bound = form.normalized_tail_bound(n_min, sigma)
        n, a = form.support_normalized(10 ** 6)
        keep = n >= n_min
        partial = float(np.sum(np.abs(a[keep]) * n[keep] ** (-sigma)))
        assert partial <= bound

    def test_tail_bound_strip_guards(self):
        with pytest.raises(StripConditionError):
            build_preset("ETA24").normalized_tail_bound(10, 0.7)
        with pytest.raises(StripConditionError):
            build_preset("ETA8_FIFTH").normalized_tail_bound(10, 1.2)

    def test_lazy_growth_consistent(self):
        form = build_preset("ETA8_FIFTH")
        n_query = 5 + 24 * 70000  # beyond the default table
        fresh = EtaQuotient(((24, 5),)).expansion(24 * 70001)
        assert form.fourier(n_query) == fresh.coefficient(24 * 70000)

    def test_sizing_cap(self):
        form = build_preset("ETA8_FIFTH")
        with pytest.raises(DomainError):
            form.fourier(5 + 24 * (1 << 28))

    def test_csv_dump(self):
        form = build_preset("ETA24")
        buf = io.StringIO()
        rows = write_coefficients_csv(form, 200, buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "n,c,a"
        assert len(lines) == rows + 1
        first = lines[1].split(",")
        assert first[0] == "1" and first[1] == "1"
        assert float(first[2]) == pytest.approx(1.0)
        # n=25: chi12(5) = -1, a = -sqrt(5)
        row25 = [ln for ln in lines if ln.startswith("25,")][0].split(",")
        assert row25[1] == "-1"
        assert float(row25[2]) == pytest.approx(-math.sqrt(5.0))
