"""Degree-two L-series of the half-integral presets, direct and completed.

The normalized series F(s) = sum a(n) n^{-s} converges only to the right of a
per-form abscissa; everywhere else evaluation goes through the completed
function

    Lambda(s') = sum_n c(n) x_n^{-s'} Gamma(s', x_n)
               + omega sum_n c*(n) x_n^{s'-kappa} Gamma(kappa - s', x_n),

with x_n = 2 pi n / sqrt(N) and s' = s + (k-2)/4.  Both sums are cut off with
a certified incomplete-gamma tail bound, so every returned value carries an
error estimate that dominates the truncation.  F(s) is then
Lambda(s') Q^{-s'} / Gamma(s'); the reciprocal gamma is entire, so trivial
zeros come out as honest zeros instead of pole errors.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import ConvergenceError, StripConditionError
from .etaq import HalfIntegralForm, build_preset
from .logcomplex import LogComplex, log_sum
from .special import lngamma, log_sin_pi, principal_power, recip_gamma, upper_gamma

__all__ = [
    "ComplexEval",
    "LSeriesEvaluator",
    "anchor_abscissa",
    "direct_lambda",
    "completed_lambda",
    "completed_lambda_dual",
    "completed_lambda_parts",
    "functional_equation_sides",
    "functional_equation_residual",
    "reflection_form_sides",
    "reflection_form_residual",
    "ladder_form_sides",
    "ladder_form_residual",
]

_TWO_PI = 2.0 * math.pi

# beyond this |Re| the x^{-w} Gamma(w, x) summands themselves leave float range
_RE_CAP = 120.0

# relative rounding allowance per accumulated term (float64 plus the gamma
# routines' own tolerance)
_ROUND_REL = 3e-13

# precision ceiling for the cancellation-rescue path
_MAX_DPS = 90


@dataclass(frozen=True)
class ComplexEval:
    """A computed value with a certified error bound and a method tag."""

    value: complex
    error: float
    method: str


# ---------------------------------------------------------------------------
# completed-function sums
# ---------------------------------------------------------------------------

def _one_sided_raw(form: HalfIntegralForm, w: complex, dual: bool,
                   tol: float, abs_tail: float | None = None,
                   ) -> tuple[complex, float, float, int]:
    """sum_n coeff(n) x_n^{-w} Gamma(w, x_n) over the support, certified.

    coeff is the dual Fourier data when ``dual``, else the plain c(n).  The
    tail past n0 is bounded by |coeff(n)| <= C n^q together with
    |Gamma(w, x)| <= Gamma(Re w, x) <= 2 x^{Re w - 1} e^{-x} once
    x >= 2 max(Re w, 1); consecutive integers then contract the bound by
    rho = e^{-2 pi / sqrt N + q/n} < 1, giving a geometric tail even though
    the actual support is sparser.  The cutoff is pushed until the tail is
    below ``abs_tail`` when given, else below tol relative to the term scale.
    Returns (sum, tail bound, sum of term moduli, cutoff n).
    """
    w = complex(w)
    a = w.real
    if abs(a) > _RE_CAP:
        raise ConvergenceError(
            f"completed sum at Re = {a:.1f}: summands exceed float range "
            f"beyond |Re| = {_RE_CAP:.0f}")
    step = _TWO_PI / math.sqrt(form.N)
    camp, cexp = form.c_bound_amp, form.c_bound_exp
    x_floor = max(2.0 * max(a, 1.0), 12.0)

    n_hi = max(64, int(x_floor / step) + 1)
    while True:
        ns, cs = form.support(n_hi)
        total = 0.0 + 0.0j
        absacc = 0.0
        for n, c in zip(ns.tolist(), cs.tolist()):
            coeff = form.dual_phase * c if dual else complex(c)
            x = step * n
            term = coeff * cmath.exp(-w * math.log(x)) * upper_gamma(w, x)
            total += term
            absacc += abs(term)
        n_next = n_hi + 1
        x_next = step * n_next
        if x_next > x_floor:
            per_term = 2.0 * camp * n_next ** cexp * math.exp(-x_next) / x_next
            rho = math.exp(-step + cexp / n_next)
            if rho < 1.0:
                tail = per_term / (1.0 - rho)
                goal = abs_tail if abs_tail is not None \
                    else 0.25 * tol * max(1.0, absacc)
                if tail <= goal:
                    return total, tail, absacc, n_hi
        if n_hi >= (1 << 22):
            raise ConvergenceError(
                f"completed-sum tail failed to certify by n = {n_hi}")
        n_hi *= 2


def _one_sided_sum(form: HalfIntegralForm, w: complex, dual: bool,
                   tol: float) -> tuple[complex, float]:
    total, tail, absacc, _ = _one_sided_raw(form, w, dual, tol)
    return total, tail + absacc * _ROUND_REL


def _mp_side(form: HalfIntegralForm, w, dual: bool, n_cut: int):
    """One side of the completed sum in the active mpmath precision."""
    rtn = mp.sqrt(form.N)
    eps = mp.expjpi(mp.mpf(form.k) / 4)
    ns, cs = form.support(n_cut)
    total = mp.mpc(0)
    for n, c in zip(ns.tolist(), cs.tolist()):
        x = 2 * mp.pi * n / rtn
        coeff = eps * c if dual else mp.mpf(c)
        total += coeff * mp.power(x, -w) * mp.gammainc(w, x)
    return total


def _lambda_mp(form: HalfIntegralForm, sprime: complex, dual: bool, tol: float,
               n1: int, n2: int, tails: float, absacc: float,
               lam_f64: complex) -> tuple[complex, float]:
    """Recompute Lambda(s') in adaptive precision.

    High in the t-direction Lambda is of order e^{-pi|t|/2} while the two
    incomplete-gamma sums stay O(1), so float64 loses about
    log10(absacc/|Lambda|) digits to cancellation.  The truncation indices
    and tail bounds carry over from the float pass unchanged.
    """
    scale = max(abs(lam_f64), absacc * 1e-15, 1e-300)
    lost = math.log10(max(absacc, 1e-300) / scale)
    dps = min(_MAX_DPS, 25 + max(0, int(lost)))
    w1 = mp.mpc(sprime)
    w2 = mp.mpc(form.kappa) - w1
    while True:
        with mp.workdps(dps):
            head = _mp_side(form, w1, dual, n1)
            rest = _mp_side(form, w2, not dual, n2)
            sign = 1 if dual else -1
            phase = mp.expjpi(sign * mp.mpf(form.k) / 4)
            lam = complex(head + phase * rest)
        err = tails + absacc * 10.0 ** (3 - dps)
        if err <= tol * abs(lam) or dps >= _MAX_DPS:
            return lam, err
        dps = min(_MAX_DPS, dps + 15)


def _lambda_with_error(form: HalfIntegralForm, sprime: complex, dual: bool,
                       tol: float) -> tuple[complex, float]:
    """Completed Lambda of the form (or its dual) at s', with error bound.

    Two rescue stages when |Lambda| sits far below the term scale (tall
    points): first the truncation is deepened to an absolute tail target of
    tol |Lambda|, then the cancellation itself is absorbed by recomputing in
    higher precision.
    """
    sprime = complex(sprime)
    phase = form.omega.conjugate() if dual else form.omega
    abs_tail = None
    for _ in range(4):
        head, t1, a1, n1 = _one_sided_raw(form, sprime, dual, tol, abs_tail)
        rest, t2, a2, n2 = _one_sided_raw(form, form.kappa - sprime, not dual,
                                          tol, abs_tail)
        lam = head + phase * rest
        absacc = a1 + a2
        need = 0.25 * tol * abs(lam)
        floor = max(absacc, 1.0) * 1e-30
        if t1 + t2 <= 2.0 * max(need, floor) or abs_tail is not None \
                and abs_tail <= max(need, floor):
            break
        abs_tail = max(need, floor, 1e-300)
    err = t1 + t2 + absacc * _ROUND_REL
    if err > tol * abs(lam):
        return _lambda_mp(form, sprime, dual, tol, n1, n2, t1 + t2, absacc, lam)
    return lam, err


def completed_lambda(form: HalfIntegralForm, sprime: complex,
                     tol: float = 1e-12) -> complex:
    """Lambda(s') = Q^{s'} Gamma(s') L(s'), entire in s'."""
    return _lambda_with_error(form, sprime, False, tol)[0]


def completed_lambda_dual(form: HalfIntegralForm, sprime: complex,
                          tol: float = 1e-12) -> complex:
    """The dual form's completed function at s'."""
    return _lambda_with_error(form, sprime, True, tol)[0]


def completed_lambda_parts(form: HalfIntegralForm, sprime: complex,
                           tol: float = 1e-12) -> tuple[complex, complex]:
    """(head, dual_term) with Lambda(s') = head + omega * dual_term."""
    sprime = complex(sprime)
    head, _ = _one_sided_sum(form, sprime, False, tol)
    dual_term, _ = _one_sided_sum(form, form.kappa - sprime, True, tol)
    return head, dual_term


def anchor_abscissa(form: HalfIntegralForm) -> float:
    """A real s' where the plain Dirichlet series for Lambda is cheap and
    certified; used to pin the absolute normalization of the completed sums."""
    return (form.k - 2) / 4.0 + (2.75 if form.square_support else 3.5)


def direct_lambda(form: HalfIntegralForm, sigma: float,
                  tol: float = 1e-12) -> complex:
    """Lambda(sigma) by direct summation, Q^sigma Gamma(sigma) sum c(n) n^{-sigma}.

    Only for real sigma comfortably inside absolute convergence (use
    ``anchor_abscissa``); the completed representation is checked against this.
    """
    sigma = float(sigma)
    shifted = sigma - (form.k - 2) / 4.0
    n_hi = 4096
    while True:
        ns, avals = form.support_normalized(n_hi)
        partial = float(np.sum(avals * ns ** (-shifted))) if len(ns) else 0.0
        bound = form.normalized_tail_bound(n_hi + 1, shifted)
        if bound <= tol * max(abs(partial), 1.0):
            break
        if n_hi >= (1 << 26):
            raise ConvergenceError(
                f"direct Lambda at sigma = {sigma}: tail {bound:.2e} not "
                f"within {tol:.2e} by n = {n_hi}")
        n_hi *= 4
    q = math.sqrt(form.N) / _TWO_PI
    return complex((q ** sigma) * math.gamma(sigma) * partial)


# ---------------------------------------------------------------------------
# the evaluator
# ---------------------------------------------------------------------------

@dataclass
class LSeriesEvaluator:
    """F(s) = sum a(n) n^{-s} and its completion, for one preset form.

    ``F_direct`` works for Re s >= safe_abscissa and certifies its tail from
    the coefficient bound; ``F_complete`` works everywhere.  On the overlap
    the two agree (that agreement is itself one of the module's invariants).
    The starred variants evaluate the dual form.
    """

    form: HalfIntegralForm
    safe_abscissa: float | None = None
    max_terms: int = 1 << 26

    def __post_init__(self) -> None:
        if self.safe_abscissa is None:
            # squares: sum over nu converges like nu^{1/2 - 2 sigma}; the
            # stride-progression preset only like n^{1/4 - sigma}, so its
            # certified window starts much further right
            self.safe_abscissa = 0.9 if self.form.square_support else 2.6

    @property
    def Q(self) -> float:
        return math.sqrt(self.form.N) / _TWO_PI

    @property
    def mu(self) -> float:
        return self.form.mu

    @property
    def mu_star(self) -> float:
        return self.form.mu_star

    @classmethod
    def for_preset(cls, name: str) -> "LSeriesEvaluator":
        return cls(build_preset(name))

    # -- direct series ------------------------------------------------------

    def _support_count(self, n_hi: int) -> int:
        """Upper estimate of nonzero terms up to n_hi (truncation budget)."""
        if self.form.square_support:
            return math.isqrt(n_hi)
        return n_hi // self.form.eta.stride + 1

    def _direct_value(self, s: complex, tol: float) -> tuple[complex, float]:
        sigma = s.real
        amp = self.form.a_bound_amp
        if amp == 0.0:
            return 0.0 + 0.0j, 0.0
        # invert the tail bound to pick the cutoff, budgeted by support size
        n_hi = 4096
        while (self.form.normalized_tail_bound(n_hi + 1, sigma) > 0.25 * tol
               and self._support_count(n_hi) < self.max_terms):
            n_hi *= 4
        total = 0.0 + 0.0j
        absacc = 0.0
        chunk = 1 << 22  # support terms per window
        lo = 1
        while lo <= n_hi:
            if self.form.square_support:
                v_hi = math.isqrt(lo - 1) + chunk
                hi = min(n_hi, v_hi * v_hi)
            else:
                hi = min(n_hi, lo + chunk * self.form.eta.stride - 1)
            ns, avals = self.form.support_normalized(hi, lo)
            if len(ns):
                powers = np.exp(-s * np.log(ns))
                total += complex(np.sum(avals * powers))
                absacc += float(np.sum(np.abs(avals) * ns ** (-sigma)))
            lo = hi + 1
        err = self.form.normalized_tail_bound(n_hi + 1, sigma) + absacc * 1e-13
        return total, err

    def F_direct(self, s: complex, tol: float = 1e-12) -> ComplexEval:
        s = complex(s)
        if s.real < self.safe_abscissa:
            raise StripConditionError(
                f"direct series needs Re s >= {self.safe_abscissa} "
                f"(got {s.real}); use F_complete")
        value, err = self._direct_value(s, tol)
        return ComplexEval(value, err, "direct")

    def Fstar_direct(self, s: complex, tol: float = 1e-12) -> ComplexEval:
        base = self.F_direct(s, tol)
        return ComplexEval(self.form.dual_phase * base.value, base.error,
                           "direct-dual")

    # -- completed representation ------------------------------------------

    def _complete(self, s: complex, dual: bool, tol: float) -> ComplexEval:
        s = complex(s)
        sprime = s + (self.form.k - 2) / 4.0
        lam, lam_err = _lambda_with_error(self.form, sprime, dual, tol)
        pref = principal_power(self.Q, -sprime) * recip_gamma(sprime)
        value = (LogComplex.from_complex(lam) * pref).to_complex()
        scale = math.exp(min(pref.log_modulus, 700.0)) if not pref.is_zero() else 0.0
        err = lam_err * scale + abs(value) * _ROUND_REL
        return ComplexEval(value, err, "completed-dual" if dual else "completed")

    def F_complete(self, s: complex, tol: float = 1e-12) -> ComplexEval:
        return self._complete(s, False, tol)

    def Fstar_complete(self, s: complex, tol: float = 1e-12) -> ComplexEval:
        return self._complete(s, True, tol)

    # -- dispatch -----------------------------------------------------------

    def F_auto(self, s: complex, tol: float = 1e-12) -> ComplexEval:
        s = complex(s)
        if s.real >= self.safe_abscissa + 0.5:
            return self.F_direct(s, tol)
        return self.F_complete(s, tol)


# ---------------------------------------------------------------------------
# identity residuals
# ---------------------------------------------------------------------------

def functional_equation_sides(ev: LSeriesEvaluator, s: complex,
                              tol: float = 1e-12) -> tuple[complex, complex]:
    """Both sides of Q^s Gamma(s + mu) F(s) = omega Q^{1-s} Gamma(1-s+mu) F*(1-s).

    Both sides are the completed Lambda at reflected arguments, so this checks
    the plumbing of the symmetric representation rather than new mathematics.
    """
    form = ev.form
    sprime = complex(s) + form.mu
    lhs = completed_lambda(form, sprime, tol)
    rhs = form.omega * completed_lambda_dual(form, form.kappa - sprime, tol)
    return lhs, rhs


def functional_equation_residual(ev: LSeriesEvaluator, s: complex,
                                 tol: float = 1e-12) -> float:
    lhs, rhs = functional_equation_sides(ev, s, tol)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def reflection_form_sides(ev: LSeriesEvaluator, s: complex,
                          tol: float = 1e-12) -> tuple[complex, complex]:
    """Both sides of the reflected functional equation

        F(s) = (omega Q^{1-2s} / pi) Gamma(1-s+mu*) Gamma(1-s-mu*)
               sin(pi(s+mu)) F*(1-s),

    which exercises the gamma reflection step for real."""
    form = ev.form
    s = complex(s)
    lhs = ev.F_complete(s, tol).value
    fstar = ev.Fstar_complete(1.0 - s, tol).value
    rhs = (LogComplex.from_complex(form.omega / math.pi)
           * principal_power(ev.Q, 1.0 - 2.0 * s)
           * lngamma(1.0 - s + form.mu_star)
           * lngamma(1.0 - s - form.mu_star)
           * log_sin_pi(s + form.mu)
           * LogComplex.from_complex(fstar)).to_complex()
    return lhs, rhs


def reflection_form_residual(ev: LSeriesEvaluator, s: complex,
                             tol: float = 1e-12) -> float:
    lhs, rhs = reflection_form_sides(ev, s, tol)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def ladder_form_sides(ev: LSeriesEvaluator, s: complex,
                      ladder: tuple[int, ...],
                      tol: float = 1e-12) -> tuple[complex, complex]:
    """Both sides of the duplication rewrite

        F(s) = (2 omega / sqrt(2 pi)) (Q/2)^{1-2s}
               [sum_l a_l Gamma(2(1-s) - 1/2 - l)] sin(pi(s+mu)) F*(1-s),

    where ``ladder`` holds the integer weights a_0..a_{h*}."""
    form = ev.form
    s = complex(s)
    lhs = ev.F_complete(s, tol).value
    fstar = ev.Fstar_complete(1.0 - s, tol).value
    terms = [LogComplex.from_complex(complex(a_l))
             * lngamma(2.0 * (1.0 - s) - 0.5 - ell)
             for ell, a_l in enumerate(ladder)]
    bracket = log_sum(terms)
    rhs = (LogComplex.from_complex(2.0 * form.omega / math.sqrt(_TWO_PI))
           * principal_power(ev.Q / 2.0, 1.0 - 2.0 * s)
           * bracket
           * log_sin_pi(s + form.mu)
           * LogComplex.from_complex(fstar)).to_complex()
    return lhs, rhs


def ladder_form_residual(ev: LSeriesEvaluator, s: complex,
                         ladder: tuple[int, ...],
                         tol: float = 1e-12) -> float:
    lhs, rhs = ladder_form_sides(ev, s, ladder, tol)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
