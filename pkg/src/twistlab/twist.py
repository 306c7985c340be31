"""Exponentially twisted series F(s, alpha) = sum a(n) n^{-s} e(-alpha sqrt n).

The module provides four independent evaluation routes and the closed-form
objects tying them together:

* ``F_twist_series``: the plain series, right half-plane only;
* ``F_X_twist``: the e^{-sqrt(n)/X}-smoothed series, entire in s;
* ``F_twist_continued``: smoothed values extrapolated in 1/X after removing
  the known singular part ``sigma_X``, continuing the twist anywhere;
* ``fe_rhs``: the reflected-series representation built from the shifted
  generalized Dirichlet series F+-_ell and a gamma ladder.

Agreement of these routes, plus the residue closed form ``residue_kappa``,
is what the test-suite and the CLI verify.  All sums carry certified tail
bounds from the form's coefficient bound; evaluations report honest error
estimates via ComplexEval.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath as mp
import numpy as np

from .errors import DomainError, PoleProximityError, StripConditionError
from .etaq import HalfIntegralForm, build_preset
from .lfun import ComplexEval, LSeriesEvaluator, _mp_side
from .logcomplex import LogComplex
from .special import lngamma, principal_power, upper_gamma

__all__ = [
    "ComplexEval",
    "TwistContext",
    "a_ladder",
    "s_ell",
    "twist_abscissa",
    "spectral_alphas",
    "F_pm_ell",
    "F_star_ell",
    "fe_rhs",
    "residue_kappa",
    "cf_from_residue",
    "residue_circle",
    "F_twist_series",
    "F_X_twist",
    "basic_formula_rhs",
    "sigma_X",
    "F_twist_continued",
]

_TWO_PI = 2.0 * math.pi
_PI_LD = np.arccos(np.longdouble(-1.0))

# smoothing-strip half-width: the reflected representation of the smoothed
# series is asserted on -2*delta < sigma < -delta
_DELTA = 0.4

_CHUNK = 1 << 22


# ---------------------------------------------------------------------------
# exact combinatorial layer
# ---------------------------------------------------------------------------

def _poly_mul(p: list[Fraction], q: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


@lru_cache(maxsize=None)
def a_ladder(hstar: int) -> tuple[Fraction, ...]:
    """Weights a_0..a_{h*} rewriting the odd-shift product in the falling basis:

        prod_{1<=j<=h*} (X + 2j - 1) = sum_l a_l prod_{0<=v<=h*-1-l} (X + v).

    The change of basis is unitriangular, so the solution is exact (and in
    fact integral); a_0 = 1 always.
    """
    if hstar < 0:
        raise DomainError("ladder length must be nonnegative")
    lhs = [Fraction(1)]
    for j in range(1, hstar + 1):
        lhs = _poly_mul(lhs, [Fraction(2 * j - 1), Fraction(1)])
    basis = []
    for ell in range(hstar + 1):
        b = [Fraction(1)]
        for v in range(hstar - ell):
            b = _poly_mul(b, [Fraction(v), Fraction(1)])
        basis.append(b)
    rem = lhs + [Fraction(0)] * (hstar + 1 - len(lhs))
    out = [Fraction(0)] * (hstar + 1)
    for ell in range(hstar + 1):
        deg = hstar - ell
        out[ell] = rem[deg]  # basis polynomials are monic
        for i, b in enumerate(basis[ell]):
            rem[i] -= out[ell] * b
    if any(c != 0 for c in rem):
        raise ArithmeticError("ladder system did not close; non-monic basis?")
    return tuple(out)


def s_ell(ell: int) -> Fraction:
    """The pole ladder 3/4 - ell/2."""
    return Fraction(3, 4) - Fraction(ell, 2)


def twist_abscissa(form: HalfIntegralForm) -> float:
    """Abscissa beyond which the twisted series are summed directly."""
    return 1.05 if form.square_support else 1.3


# ---------------------------------------------------------------------------
# context
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwistContext:
    """A form together with one twist frequency alpha, in exact arithmetic.

    n_alpha = N alpha^2 / 4 and nu_alpha = sqrt(n_alpha) = alpha sqrt(N)/2 are
    kept as Fractions (the preset conductors are perfect squares, so nu_alpha
    is rational); membership of alpha in the twist spectrum is decided exactly
    and never through floats.
    """

    form: HalfIntegralForm
    alpha: Fraction
    d: int = 2
    n_alpha: Fraction = field(init=False)
    nu_alpha: Fraction = field(init=False)
    in_spectrum: bool = field(init=False)
    ladder: tuple[Fraction, ...] = field(init=False)
    evaluator: LSeriesEvaluator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        alpha = Fraction(self.alpha)
        if alpha <= 0:
            raise DomainError("twist frequency alpha must be positive")
        root = math.isqrt(self.form.N)
        if root * root != self.form.N:
            raise DomainError(
                "conductor is not a perfect square; exact spectrum "
                "arithmetic unavailable")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "n_alpha", Fraction(self.form.N) * alpha * alpha / 4)
        object.__setattr__(self, "nu_alpha", alpha * root / 2)
        spectral = (self.n_alpha.denominator == 1
                    and self.form.fourier(int(self.n_alpha)) != 0)
        object.__setattr__(self, "in_spectrum", spectral)
        object.__setattr__(self, "ladder", a_ladder(self.form.h_star))
        object.__setattr__(self, "evaluator", LSeriesEvaluator(self.form))

    @classmethod
    def for_preset(cls, name: str, alpha) -> "TwistContext":
        return cls(build_preset(name), Fraction(alpha))

    # -- delegated structure constants --------------------------------------

    @property
    def h(self) -> int:
        return self.form.h

    @property
    def h_star(self) -> int:
        return self.form.h_star

    @property
    def mu(self) -> float:
        return self.form.mu

    @property
    def mu_star(self) -> float:
        return self.form.mu_star

    @property
    def q(self) -> int:
        return self.form.N

    @property
    def ladder_floats(self) -> tuple[float, ...]:
        return tuple(float(a) for a in self.ladder)

    @property
    def Q(self) -> float:
        return math.sqrt(self.form.N) / _TWO_PI

    # -- pointwise exact objects --------------------------------------------

    def a_star(self, n: int) -> complex:
        """Dual normalized coefficient a*(n)."""
        return self.form.dual_phase * self.form.normalized(n)

    def z_X(self, n: int, X: float) -> complex:
        """(nu_alpha - i Q/(2X)) / sqrt(n); real part is exactly 1 at n_alpha."""
        if n < 1:
            raise DomainError("z_X needs n >= 1")
        if X <= 1:
            raise DomainError("smoothing scale X must exceed 1")
        rt = math.sqrt(n)
        return complex(float(self.nu_alpha) / rt, -self.Q / (2.0 * X * rt))

    def c_star(self, nu: int, ell: int) -> complex:
        """Phase-twisted coefficient of the shifted series at signed root nu."""
        if nu == 0:
            raise DomainError("nu is a signed square root, nonzero")
        if Fraction(nu) == -self.nu_alpha:
            raise DomainError("nu = -nu_alpha is excluded from both series")
        astar = self.a_star(nu * nu)
        mu = self.mu
        if nu >= 1:
            return -cmath.exp(1j * math.pi * mu) * astar
        if Fraction(nu) > -self.nu_alpha:
            return cmath.exp(1j * math.pi * (0.5 + ell - mu)) * astar
        return cmath.exp(-1j * math.pi * mu) * astar


def spectral_alphas(form: HalfIntegralForm, count: int) -> list[Fraction]:
    """The first ``count`` twist frequencies with n_alpha in the support.

    alpha = nu / (sqrt(N)/2) for support squares nu^2; forms whose support
    contains no perfect squares have an empty spectrum.
    """
    root = math.isqrt(form.N)
    if root * root != form.N:
        raise DomainError("conductor is not a perfect square")
    out: list[Fraction] = []
    nu = 0
    while len(out) < count and nu < 10_000:
        nu += 1
        if form.fourier(nu * nu) != 0:
            out.append(Fraction(2 * nu, root))
    return out


# ---------------------------------------------------------------------------
# the shifted-series core
#
# Everything reflected reduces to sums of the shape
#     sum_{n >= n_min, support} a*(n) n^{-w} (1 + zeta n^{-1/2})^{rho(w, ell)}
# with rho = -2w + 1/2 + ell; zeta is +-nu_alpha for the one-sided series and
# nu_alpha - iQ/(2X) for the smoothed representation.
# ---------------------------------------------------------------------------

def _rho(w: complex, ell: int) -> complex:
    return -2.0 * w + 0.5 + ell


def _support_windows(form: HalfIntegralForm, lo: int, hi: int):
    """Yield (n, a*) float/complex arrays over support windows of bounded size."""
    pos = lo
    while pos <= hi:
        if form.square_support:
            v_hi = math.isqrt(max(pos - 1, 0)) + _CHUNK
            top = min(hi, v_hi * v_hi)
        else:
            top = min(hi, pos + _CHUNK * form.eta.stride - 1)
        ns, avals = form.support_normalized(top, pos)
        if len(ns):
            yield ns, form.dual_phase * avals.astype(np.complex128)
        pos = top + 1


def _direct_budget(form: HalfIntegralForm) -> int:
    """Largest n the direct route may touch.  Square-support coefficients come
    from a closed form (cost ~ sqrt n); progression forms pay for an exact
    series table of length n / stride, so their ceiling is much lower."""
    return (1 << 49) if form.square_support else 96_000_000


def _core_direct(tc: TwistContext, w: complex, ell: int, zeta: complex,
                 n_min: int, abs_tol: float) -> tuple[complex, float]:
    """Direct certified evaluation of the core sum; needs Re w past the
    absolute-convergence abscissa.  The tail bound is the plain-coefficient
    bound times a correction for the (1 + zeta/sqrt n)^rho factor; the cutoff
    is located by scalar doubling on the bound before any array work."""
    rho = _rho(w, ell)
    sigma = w.real
    form = tc.form
    az = abs(zeta)
    budget = _direct_budget(form)
    n_hi = max(int(16.0 * az * az) + 1, n_min, 4096)
    while True:
        q0 = az / math.sqrt(n_hi + 1)
        corr = ((1.0 - q0) ** min(rho.real, 0.0)
                * (1.0 + q0) ** max(rho.real, 0.0)
                * math.exp(abs(rho.imag) * 1.1 * q0))
        bound = corr * form.normalized_tail_bound(n_hi + 1, sigma)
        if bound <= abs_tol or n_hi >= budget:
            break
        n_hi = min(2 * n_hi, budget)
    total = 0.0 + 0.0j
    absacc = 0.0
    for ns, astar in _support_windows(form, n_min, n_hi):
        base = 1.0 + zeta / np.sqrt(ns)
        terms = astar * np.exp(-w * np.log(ns) + rho * np.log(base))
        total += complex(np.sum(terms))
        absacc += float(np.sum(np.abs(terms)))
    return total, bound + absacc * 1e-14


def _core_stratified(tc: TwistContext, w: complex, ell: int, zeta: complex,
                     n_min: int, abs_tol: float,
                     r_cap: int = 200) -> tuple[complex, float]:
    """Entire continuation of the core sum.

    Head below H = 2 ceil(K^2) + 1 with K = (1 + |rho|)|zeta| is summed as a
    finite generalized Dirichlet polynomial; the tail is expanded binomially,
    each power of zeta n^{-1/2} resumming to a shifted full series minus the
    matching head polynomial:

        sum_{n>=H} a*(n) n^{-w} (1+zeta/sqrt n)^rho
            = sum_{r<=R} C(rho, r) zeta^r [F*(w + r/2) - D_H(w + r/2)] + rem,

    |rem| <= K^{R+1}/(1 - K/sqrt H) * tail(H, Re w + (R+1)/2) <= ~2^{-R/2}.
    The subtraction F* - D_H cancels; the error term tracks |C(rho,r) zeta^r|
    against it, so the reported error is honest even when zeta is large.
    """
    rho = _rho(w, ell)
    az = abs(zeta)
    kay = (1.0 + abs(rho)) * az
    H = max(2 * math.ceil(kay * kay) + 1, n_min + 1, 16)
    ev = tc.evaluator
    form = tc.form

    # head polynomial over [n_min, H)
    head = 0.0 + 0.0j
    head_abs = 0.0
    ns, avals = form.support_normalized(H - 1, n_min)
    if len(ns):
        astar = form.dual_phase * avals.astype(np.complex128)
        base = 1.0 + zeta / np.sqrt(ns)
        terms = astar * np.exp(-w * np.log(ns) + rho * np.log(base))
        head = complex(np.sum(terms))
        head_abs = float(np.sum(np.abs(terms)))

    # shifted-series tail; D arrays over the full support below H
    ns_d, avals_d = form.support_normalized(H - 1, 1)
    astar_d = form.dual_phase * avals_d.astype(np.complex128)
    log_d = np.log(ns_d) if len(ns_d) else None

    fac = 1.0 / (1.0 - min(kay / math.sqrt(H), 0.75))
    total = head
    err = head_abs * 1e-15
    c_r = LogComplex.one()
    r = 0
    rem = math.inf
    while True:
        w_r = w + 0.5 * r
        fst = ev.Fstar_complete(w_r, 1e-12)
        if log_d is not None:
            d_vals = astar_d * np.exp(-w_r * log_d)
            d_r = complex(np.sum(d_vals))
            d_abs = float(np.sum(np.abs(d_vals)))
        else:
            d_r, d_abs = 0.0 + 0.0j, 0.0
        bracket = fst.value - d_r
        total += (c_r * LogComplex.from_complex(bracket)).to_complex()
        crabs = math.exp(min(c_r.log_modulus, 700.0))
        err += crabs * (fst.error + (abs(fst.value) + d_abs) * 2e-16)
        # remainder bound for stopping
        sig_next = w.real + 0.5 * (r + 1)
        try:
            rem = fac * kay ** (r + 1) * form.normalized_tail_bound(H, sig_next)
        except StripConditionError:
            rem = math.inf
        if rem <= abs_tol / 4.0 or r >= r_cap or w_r.real > 110.0:
            break
        r += 1
        c_r = c_r * LogComplex.from_complex((rho - r + 1.0) / r * zeta)
    return total, err + (0.0 if rem == math.inf else rem)


def _core_auto(tc: TwistContext, w: complex, ell: int, zeta: complex,
               n_min: int, abs_tol: float) -> tuple[complex, float, str]:
    sigma = w.real
    form = tc.form
    if sigma >= twist_abscissa(form) + 0.25 and form.square_support:
        # invert the tail bound: is direct summation affordable?
        need = (abs_tol * (2.0 * sigma - 1.5)) ** (1.0 / (1.5 - 2.0 * sigma)) \
            if sigma > 0.76 else math.inf
        if need < 25_000_000:
            value, err = _core_direct(tc, w, ell, zeta, n_min, abs_tol)
            return value, err, "direct"
    value, err = _core_stratified(tc, w, ell, zeta, n_min, abs_tol)
    return value, err, "stratified"


# ---------------------------------------------------------------------------
# the one-sided shifted series
# ---------------------------------------------------------------------------

def _resolve_mode(tc: TwistContext, w: complex, ell: int, zeta: complex,
                  n_min: int, abs_tol: float, mode: str):
    if mode == "direct":
        sigma = w.real
        if sigma < twist_abscissa(tc.form):
            raise StripConditionError(
                f"direct twisted summation needs Re s >= "
                f"{twist_abscissa(tc.form)} (got {sigma})")
        value, err = _core_direct(tc, w, ell, zeta, n_min, abs_tol)
        return value, err, "direct"
    if mode == "stratified":
        value, err = _core_stratified(tc, w, ell, zeta, n_min, abs_tol)
        return value, err, "stratified"
    return _core_auto(tc, w, ell, zeta, n_min, abs_tol)


def F_pm_ell(tc: TwistContext, s: complex, ell: int, sign: int,
             tol: float = 1e-9, mode: str = "auto") -> ComplexEval:
    """One of the two shifted generalized Dirichlet series at level ell.

    sign +1 sums the signed roots nu > -nu_alpha (all positive nu plus the
    finite band of negatives above -nu_alpha); sign -1 sums nu < -nu_alpha.
    Direct mode needs Re s past the twist abscissa; stratified mode is entire.
    """
    if not 0 <= ell <= tc.h_star:
        raise DomainError(f"ell must lie in 0..{tc.h_star}")
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    s = complex(s)
    mu = tc.mu
    nual = float(tc.nu_alpha)
    if sign == 1:
        value, err, how = _resolve_mode(tc, s, ell, +nual, 1, tol / 4.0, mode)
        value *= -cmath.exp(1j * math.pi * mu)
        # the finite band -nu_alpha < nu <= -1
        band_phase = cmath.exp(1j * math.pi * (0.5 + ell - mu))
        m = 1
        while Fraction(m) < tc.nu_alpha:
            n = m * m
            if tc.form.fourier(n):
                gap = float(tc.nu_alpha - m)
                term = (principal_power(gap, -(2.0 * s - 0.5 - ell))
                        * LogComplex.from_complex(
                            band_phase * tc.a_star(n) * m ** -(0.5 + ell))
                        ).to_complex()
                value += term
                err += abs(term) * 1e-15
            m += 1
        return ComplexEval(value, err, how)
    n_start = int(tc.n_alpha) + 1 if tc.n_alpha.denominator == 1 \
        else math.floor(tc.n_alpha) + 1
    value, err, how = _resolve_mode(tc, s, ell, -nual, n_start, tol / 4.0, mode)
    return ComplexEval(cmath.exp(-1j * math.pi * mu) * value, err, how)


def F_star_ell(tc: TwistContext, s: complex, ell: int,
               tol: float = 1e-9, mode: str = "auto") -> ComplexEval:
    """e^{-i pi s} F+_ell + e^{i pi s} F-_ell, combined in log form so the
    e^{pi |t|} factors cannot overflow silently."""
    s = complex(s)
    plus = F_pm_ell(tc, s, ell, +1, tol, mode)
    minus = F_pm_ell(tc, s, ell, -1, tol, mode)
    e_plus = LogComplex.exp(-1j * math.pi * s)
    e_minus = LogComplex.exp(1j * math.pi * s)
    value = ((e_plus * LogComplex.from_complex(plus.value)).to_complex()
             + (e_minus * LogComplex.from_complex(minus.value)).to_complex())
    err = (math.exp(min(e_plus.log_modulus, 700.0)) * plus.error
           + math.exp(min(e_minus.log_modulus, 700.0)) * minus.error)
    return ComplexEval(value, err, plus.method)


# ---------------------------------------------------------------------------
# reflected representation and residues
# ---------------------------------------------------------------------------

def _log_abs(x: LogComplex) -> float:
    return math.exp(min(x.log_modulus, 700.0))


def fe_rhs(tc: TwistContext, s: complex, tol: float = 1e-8,
           mode: str = "auto") -> ComplexEval:
    """The reflected series for the twist:

        (omega / (i sqrt(2 pi))) (sqrt N / 4 pi)^{1-2s}
            sum_l a_l Gamma(2(1-s) - 1/2 - l) F*_l(1-s).

    The gamma ladder descends from a single lngamma call through the linear
    factors P_l = prod_{j=l}^{h*-1} (2(1-s) - 3/2 - j).
    """
    s = complex(s)
    w = 1.0 - s
    xi0 = 2.0 * w - 0.5
    g_top = lngamma(xi0 - tc.h_star)
    pref = (LogComplex.from_complex(tc.form.omega / (1j * math.sqrt(_TWO_PI)))
            * principal_power(math.sqrt(tc.form.N) / (4.0 * math.pi),
                              1.0 - 2.0 * s))
    total = 0.0 + 0.0j
    err = 0.0
    for ell, a_l in enumerate(tc.ladder_floats):
        p_ell = 1.0 + 0.0j
        for j in range(ell, tc.h_star):
            p_ell *= xi0 - 1.0 - j
        factor = pref * g_top * LogComplex.from_complex(a_l * p_ell)
        fst = F_star_ell(tc, w, ell, tol, mode)
        total += (factor * LogComplex.from_complex(fst.value)).to_complex()
        err += _log_abs(factor) * fst.error
    return ComplexEval(total, err + abs(total) * 1e-13, "reflected")


def residue_kappa(tc: TwistContext, ell: int) -> complex:
    """Closed-form residue of the twist at s_ell; zero off the spectrum."""
    if not 0 <= ell <= tc.h_star:
        raise DomainError(f"ell must lie in 0..{tc.h_star}")
    if not tc.in_spectrum:
        return 0.0 + 0.0j
    sl = float(s_ell(ell))
    na = float(tc.n_alpha)
    astar = tc.a_star(int(tc.n_alpha))
    return (1j * tc.form.omega * tc.ladder_floats[ell]
            / (2.0 * math.sqrt(_TWO_PI))
            * astar / na ** (1.0 - sl)
            * (math.sqrt(tc.form.N) / (4.0 * math.pi)) ** (1.0 - 2.0 * sl)
            * cmath.exp(-1j * math.pi * (sl + tc.mu)))


def cf_from_residue(tc: TwistContext, ell: int, residue: complex) -> complex:
    """Strip the alpha-dependent factor a*(n_alpha) n_alpha^{s_ell - 1} off a
    measured residue; what remains is the same constant for every spectral
    alpha of the form."""
    if not tc.in_spectrum:
        raise DomainError("no residue normalization off the spectrum")
    sl = float(s_ell(ell))
    astar = tc.a_star(int(tc.n_alpha))
    return residue * float(tc.n_alpha) ** (1.0 - sl) / astar


# ---------------------------------------------------------------------------
# extended-precision reflected series (residue extraction near s_ell)
# ---------------------------------------------------------------------------

def _fstar_mp(form: HalfIntegralForm, w) -> mp.mpc:
    """F*(w) through the completed two-sided representation, in the active
    mpmath precision.  Truncation is set so e^{-x_n} undershoots the working
    precision with margin."""
    dps = mp.mp.dps
    n_cut = int(math.sqrt(form.N) * (dps * 2.303 + 40.0) / _TWO_PI) + 1
    wp = mp.mpc(w) + mp.mpf(form.k - 2) / 4
    head = _mp_side(form, wp, True, n_cut)
    rest = _mp_side(form, mp.mpf(form.k) / 2 - wp, False, n_cut)
    lam = head + mp.expjpi(mp.mpf(form.k) / 4) * rest
    q_mp = mp.sqrt(form.N) / (2 * mp.pi)
    return lam * mp.power(q_mp, -wp) / mp.gamma(wp)


def _core_stratified_mp(tc: TwistContext, w, ell: int, zeta, n_min: int,
                        abs_tol: float):
    """The stratified core sum in the active mpmath precision.

    Mirrors ``_core_stratified`` term for term.  The binomial weights reach
    |C(rho,r) zeta^r| ~ zeta^R before the remainder bound releases the loop,
    and each bracket F*(w + r/2) - D_H(w + r/2) cancels to roughly that
    reciprocal; the caller picks the working precision so the product stays
    below the target.  Returns (value, remainder, max |C(rho,r) zeta^r|).
    """
    rho = -2 * w + mp.mpf(1) / 2 + ell
    az = abs(zeta)
    kay = (1 + abs(rho)) * az
    H = max(2 * math.ceil(float(kay) ** 2) + 1, n_min + 1, 16)
    form = tc.form
    eps_mp = mp.expjpi(mp.mpf(form.k) / 4)
    norm_exp = -mp.mpf(form.k - 2) / 4
    ns_all, cs_all = form.support(H - 1)
    pool = [(int(n), eps_mp * int(c) * mp.power(int(n), norm_exp))
            for n, c in zip(ns_all.tolist(), cs_all.tolist())]
    total = mp.mpc(0)
    for n, astar in pool:
        if n >= n_min:
            base = 1 + zeta / mp.sqrt(n)
            total += astar * mp.power(n, -w) * mp.power(base, rho)
    fac = 1.0 / (1.0 - min(float(kay) / math.sqrt(H), 0.75))
    c_r = mp.mpc(1)
    crabs_max = 1.0
    r = 0
    while True:
        w_r = w + mp.mpf(r) / 2
        bracket = _fstar_mp(form, w_r)
        for n, astar in pool:
            bracket -= astar * mp.power(n, -w_r)
        total += c_r * bracket
        sig_next = float(w.real) + 0.5 * (r + 1)
        try:
            rem = fac * float(kay) ** (r + 1) \
                * form.normalized_tail_bound(H, sig_next)
        except StripConditionError:
            rem = math.inf
        if rem <= abs_tol / 4.0 or r >= 200:
            break
        r += 1
        c_r = c_r * (rho - r + 1) / r * zeta
        crabs_max = max(crabs_max, float(abs(c_r)))
    return total, rem, crabs_max


def _fe_rhs_mp(tc: TwistContext, s: complex,
               abs_tol: float = 1e-6) -> ComplexEval:
    """The reflected series in adaptive extended precision.

    Near s_ell the binomial exponent rho(1-s, ell) is nearly integral, the
    stratified brackets cancel against weights growing like nu_alpha^R, and
    float64 keeps only 16 - R log10(nu_alpha) digits; this route buys the
    digits instead.  Intended for small circles about the poles; elsewhere
    the float route is faster and sufficient.
    """
    s = complex(s)
    w_f = 1.0 - s
    form = tc.form
    az = float(tc.nu_alpha)
    # plan the loop depth and precision in float
    rho0 = abs(-2.0 * w_f + 0.5) + tc.h_star
    kay = (1.0 + rho0) * max(az, 1e-3)
    H = max(2 * math.ceil(kay * kay) + 1, 16)
    fac = 1.0 / (1.0 - min(kay / math.sqrt(H), 0.75))
    gscale = max(_log_abs(lngamma(2.0 * w_f - 0.5 - ell))
                 * float(abs(tc.ladder[ell]))
                 for ell in range(tc.h_star + 1))
    gscale *= _log_abs(principal_power(math.sqrt(form.N) / (4.0 * math.pi),
                                       1.0 - 2.0 * s)) / math.sqrt(_TWO_PI)
    core_tol = abs_tol / (4.0 * gscale * (tc.h_star + 1))
    depth = 0
    lc = 0.0
    for r in range(1, 201):
        depth = r
        try:
            rem = fac * kay ** (r + 1) \
                * form.normalized_tail_bound(H, w_f.real + 0.5 * (r + 1))
        except StripConditionError:
            rem = math.inf
        lc += math.log10(max(1.0, (rho0 + r) / r * max(az, 1e-3)))
        if rem <= core_tol / 4.0:
            break
    dps = max(30, int(lc - math.log10(core_tol)) + 8)
    with mp.workdps(dps):
        s_mp = mp.mpc(s)
        w = 1 - s_mp
        k = form.k
        mu_mp = mp.mpf(k - 2) / 4
        nual = mp.mpf(tc.nu_alpha.numerator) / tc.nu_alpha.denominator
        eps_mp = mp.expjpi(mp.mpf(k) / 4)
        xi0 = 2 * w - mp.mpf(1) / 2
        pref = (mp.expjpi(-mp.mpf(k) / 4) / (1j * mp.sqrt(2 * mp.pi))
                * mp.power(mp.sqrt(form.N) / (4 * mp.pi), 1 - 2 * s_mp))
        if tc.n_alpha.denominator == 1:
            n_start = int(tc.n_alpha) + 1
        else:
            n_start = math.floor(tc.n_alpha) + 1
        total = mp.mpc(0)
        rem_acc = 0.0
        crabs_acc = 1.0
        for ell in range(tc.h_star + 1):
            a_l = tc.ladder[ell]
            plus, rem_p, cr_p = _core_stratified_mp(
                tc, w, ell, nual, 1, core_tol)
            plus = -mp.expjpi(mu_mp) * plus
            m = 1
            while Fraction(m) < tc.nu_alpha:
                n = m * m
                if form.fourier(n):
                    astar = eps_mp * form.fourier(n) \
                        * mp.power(n, -mp.mpf(k - 2) / 4)
                    plus += (mp.expjpi(mp.mpf(1) / 2 + ell - mu_mp) * astar
                             * mp.power(m, -(mp.mpf(1) / 2 + ell))
                             * mp.power(nual - m, -(xi0 - ell)))
                m += 1
            minus, rem_m, cr_m = _core_stratified_mp(
                tc, w, ell, -nual, n_start, core_tol)
            minus = mp.expjpi(-mu_mp) * minus
            fstar_l = mp.expjpi(-w) * plus + mp.expjpi(w) * minus
            total += (pref * mp.mpf(a_l.numerator) / a_l.denominator
                      * mp.gamma(xi0 - ell) * fstar_l)
            rem_acc += rem_p + rem_m
            crabs_acc = max(crabs_acc, cr_p, cr_m)
        value = complex(total)
    tall = math.exp(math.pi * abs(s.imag))
    err = gscale * tall * (rem_acc + crabs_acc * 10.0 ** (1 - dps))
    return ComplexEval(value, err, "reflected-mp")


def residue_circle(tc: TwistContext, ell: int = 0, radius: float = 1e-3,
                   points: int = 8, tol: float = 1e-7) -> ComplexEval:
    """Residue of the twist at s_ell by a trapezoid Cauchy integral over
    |s - s_ell| = radius, evaluated through the extended-precision reflected
    series.  Off the spectrum the same average estimates the (vanishing)
    residue of an analytic function, so its size certifies entirety."""
    if not 0 <= ell <= tc.h_star:
        raise DomainError(f"ell must lie in 0..{tc.h_star}")
    s0 = float(s_ell(ell))
    kap_scale = max(abs(residue_kappa(tc, ell)), 1e-2)
    point_tol = 0.25 * tol * kap_scale / radius
    acc = 0.0 + 0.0j
    err = 0.0
    fmax = 0.0
    for j in range(points):
        z = cmath.exp(2j * math.pi * j / points)
        f = _fe_rhs_mp(tc, s0 + radius * z, point_tol)
        acc += f.value * (radius * z)
        err += f.error * radius
        fmax = max(fmax, abs(f.value))
    return ComplexEval(acc / points, err / points + fmax * radius ** points,
                       "cauchy-circle")


def sigma_X(tc: TwistContext, s: complex, X: float) -> complex:
    """The singular part of the smoothed twist: sum_l 2 kappa_l
    Gamma(2(s_l - s)) X^{2(s_l - s)}; identically zero off the spectrum."""
    s = complex(s)
    total = 0.0 + 0.0j
    for ell in range(tc.h_star + 1):
        kap = residue_kappa(tc, ell)
        if kap == 0:
            continue
        arg = 2.0 * (float(s_ell(ell)) - s)
        term = (LogComplex.from_complex(2.0 * kap) * lngamma(arg)
                * principal_power(float(X), arg))
        total += term.to_complex()
    return total


def _sigma_X_mpc(tc: TwistContext, s: complex, X: float):
    """sigma_X in the active mpmath precision (spectral context assumed)."""
    form = tc.form
    na = int(tc.n_alpha)
    c_na = form.fourier(na)
    s_mp = mp.mpc(s)
    k = form.k
    mu_mp = mp.mpf(k - 2) / 4
    omega_mp = mp.expjpi(-mp.mpf(k) / 4)
    eps_mp = mp.expjpi(mp.mpf(k) / 4)
    astar_na = eps_mp * c_na * mp.power(na, -mp.mpf(k - 2) / 4)
    root_n = mp.sqrt(form.N)
    total = mp.mpc(0)
    for ell in range(tc.h_star + 1):
        if c_na == 0:
            break
        a_l = tc.ladder[ell]
        sl = mp.mpf(3) / 4 - mp.mpf(ell) / 2
        kap = (1j * omega_mp * mp.mpf(a_l.numerator) / a_l.denominator
               / (2 * mp.sqrt(2 * mp.pi))
               * astar_na * mp.power(na, sl - 1)
               * mp.power(root_n / (4 * mp.pi), 1 - 2 * sl)
               * mp.expjpi(-(sl + mu_mp)))
        arg = 2 * (sl - s_mp)
        arg_f = complex(s)
        arg_f = 2.0 * (0.75 - 0.5 * ell - arg_f)
        near = round(arg_f.real)
        if near <= 0 and abs(arg_f - near) < 1e-9:
            raise PoleProximityError(
                f"singular part has a gamma pole at s = s_{ell} + r/2 "
                f"(requested s = {s})")
        total += 2 * kap * mp.gamma(arg) * mp.power(X, arg)
    return total


def _sigma_X_mp(tc: TwistContext, s: complex, X: float) -> complex:
    """sigma_X to ~40 digits.  At deep sigma and large X the singular part
    reaches ~1e11 while the continued value is O(1), so the float64 relative
    error of the gamma ladder would leak an absolute ~1e-4 into G = F_X -
    sigma_X; these few exact-input gamma evaluations remove that."""
    if not tc.in_spectrum:
        return 0.0 + 0.0j
    with mp.workdps(40):
        return complex(_sigma_X_mpc(tc, s, X))


def _sigma_X_ld(tc: TwistContext, s: complex, X: float):
    """(re, im) of sigma_X as longdouble scalars via hi/lo splitting, for
    subtraction from the extended-precision smoothed sums."""
    zero = np.longdouble(0.0)
    if not tc.in_spectrum:
        return zero, zero
    with mp.workdps(40):
        tot = _sigma_X_mpc(tc, s, X)
        rh = float(tot.real)
        rl = float(tot.real - rh)
        ih = float(tot.imag)
        il = float(tot.imag - ih)
    return (np.longdouble(rh) + np.longdouble(rl),
            np.longdouble(ih) + np.longdouble(il))


# ---------------------------------------------------------------------------
# the twisted series itself: direct, smoothed, continued
# ---------------------------------------------------------------------------

def F_twist_series(tc: TwistContext, s: complex,
                   tol: float = 1e-10) -> ComplexEval:
    """sum a(n) e(-alpha sqrt n) n^{-s}, right of the twist abscissa only."""
    s = complex(s)
    sigma = s.real
    form = tc.form
    if sigma < twist_abscissa(form):
        raise StripConditionError(
            f"twisted series needs Re s >= {twist_abscissa(form)} "
            f"(got {sigma}); use F_twist_continued")
    alpha_f = float(tc.alpha)
    budget = _direct_budget(form)
    n_hi = 4096
    while (form.normalized_tail_bound(n_hi + 1, sigma) > 0.25 * tol
           and n_hi < budget):
        n_hi = min(4 * n_hi, budget)
    total = 0.0 + 0.0j
    absacc = 0.0
    lo = 1
    while lo <= n_hi:
        if form.square_support:
            v_hi = math.isqrt(lo - 1) + _CHUNK
            hi = min(n_hi, v_hi * v_hi)
        else:
            hi = min(n_hi, lo + _CHUNK * form.eta.stride - 1)
        ns, avals = form.support_normalized(hi, lo)
        if len(ns):
            rt = np.sqrt(ns)
            total += complex(np.sum(
                avals * np.exp(-s * np.log(ns) - 2j * np.pi * alpha_f * rt)))
            absacc += float(np.sum(np.abs(avals) * ns ** (-sigma)))
        lo = hi + 1
    phase_round = _TWO_PI * alpha_f * math.sqrt(n_hi) * 1.2e-16
    err = (form.normalized_tail_bound(n_hi + 1, sigma)
           + absacc * (phase_round + 1e-14))
    return ComplexEval(total, err, "series")


def _f_x_parts(tc: TwistContext, s: complex, X: float, tol: float,
               abs_tail: float | None):
    """Accumulate the smoothed twist in extended precision.

    Returns (re, im, tail, absacc, round_rel) with re/im as longdouble
    scalars, so a caller about to cancel the large singular part can
    subtract before any float64 downcast.  The whole pipeline sticks to
    real longdouble exp/cos/sin: on square support sqrt n runs through
    integers and the twisting phase is the exact rational rotation
    (p nu mod q)/q; otherwise the angle is reduced mod 1 in extended
    precision before the trig.
    """
    if X <= 1:
        raise DomainError("smoothing scale X must exceed 1")
    s = complex(s)
    sigma = s.real
    t_im = s.imag
    form = tc.form
    amp = form.a_bound_amp
    alpha_f = float(tc.alpha)
    a_exp = 2.5 - 2.0 * sigma
    mono = 2.0 * X * max(0.25 - sigma, 0.0) + 2.0 * X
    exact_phase = form.square_support and tc.alpha.denominator <= 10 ** 11
    p_red = tc.alpha.numerator % tc.alpha.denominator
    q_den = tc.alpha.denominator
    inv_x = np.longdouble(1.0) / np.longdouble(X)
    two_pi_ld = 2.0 * _PI_LD
    tot_re = np.longdouble(0.0)
    tot_im = np.longdouble(0.0)
    absacc = 0.0
    lo = 1
    hi = max(int(mono * mono), 4096)
    while True:
        ns, avals = form.support_normalized(hi, lo)
        if len(ns):
            lnn = np.log(ns.astype(np.longdouble))
            if exact_phase:
                nu = np.rint(np.sqrt(ns.astype(np.float64))).astype(np.int64)
                rt_l = nu.astype(np.longdouble)
                frac = ((p_red * nu) % q_den).astype(np.longdouble) \
                    / np.longdouble(q_den)
            else:
                rt_l = np.sqrt(ns.astype(np.longdouble))
                frac = np.mod(np.longdouble(tc.alpha.numerator) * rt_l
                              / np.longdouble(tc.alpha.denominator),
                              np.longdouble(1.0))
            mag = avals.astype(np.longdouble) \
                * np.exp((-sigma) * lnn - rt_l * inv_x)
            ang = (-t_im) * lnn - two_pi_ld * frac
            tot_re += (mag * np.cos(ang)).sum()
            tot_im += (mag * np.sin(ang)).sum()
            absacc += float(np.abs(mag).sum())
        v = math.sqrt(hi) / X
        tail = 2.0 * amp * X ** a_exp * abs(upper_gamma(complex(a_exp), v))
        target = abs_tail if abs_tail is not None \
            else 0.25 * tol * max(1.0, absacc)
        if tail <= target or hi >= _direct_budget(form):
            break
        lo = hi + 1
        hi *= 2
    round_rel = 5e-18 if exact_phase \
        else _TWO_PI * alpha_f * math.sqrt(hi) * 1.1e-19 + 5e-18
    return tot_re, tot_im, tail, absacc, round_rel


def F_X_twist(tc: TwistContext, s: complex, X: float,
              tol: float = 1e-10,
              abs_tail: float | None = None) -> ComplexEval:
    """The smoothed twist sum a(n) e(-alpha sqrt n) e^{-sqrt n / X} n^{-s}.

    Entire in s.  Tail certified by the integral comparison
    sum_{n>M} n^{1/4-sigma} e^{-sqrt n/X} <= 2 X^{5/2-2 sigma}
    Gamma(5/2-2 sigma, sqrt M / X), valid once the summand is decreasing.
    ``abs_tail`` makes the target absolute; without it the truncation stops
    relative to the accumulated absolute mass, which is far too lax when the
    caller is about to cancel that mass down to an O(1) remainder.
    """
    tre, tim, tail, absacc, round_rel = _f_x_parts(tc, s, X, tol, abs_tail)
    value = float(tre) + 1j * float(tim)
    err = tail + absacc * round_rel + abs(value) * 1.2e-16
    return ComplexEval(value, err, "smoothed")


def basic_formula_rhs(tc: TwistContext, s: complex, X: float,
                      tol: float = 1e-9) -> ComplexEval:
    """Reflected representation of the smoothed twist inside the strip:

        (omega/(i sqrt(2 pi))) (Q/2)^{1-2s} sum_l a_l Gamma(2(1-s)-1/2-l)
          sum_n (a*(n)/n^{1-s}) { e^{i pi (s+mu)} (1+z_X(n))^{2(s-s_l)}
                                - e^{-i pi (s+mu)} (1-z_X(n))^{2(s-s_l)} }.

    Asserted only on -2 delta < sigma < -delta; the case analysis near
    n = n_alpha is deliberately left to the principal branch of the powers.
    """
    s = complex(s)
    if not -2.0 * _DELTA < s.real < -_DELTA:
        raise StripConditionError(
            f"smoothed reflection asserted only for "
            f"{-2 * _DELTA} < Re s < {-_DELTA} (got {s.real})")
    if X <= 1:
        raise DomainError("smoothing scale X must exceed 1")
    w = 1.0 - s
    zeta = complex(float(tc.nu_alpha), -tc.Q / (2.0 * X))
    xi0 = 2.0 * w - 0.5
    g_top = lngamma(xi0 - tc.h_star)
    pref = (LogComplex.from_complex(tc.form.omega / (1j * math.sqrt(_TWO_PI)))
            * principal_power(tc.Q / 2.0, 1.0 - 2.0 * s))
    e_plus = LogComplex.exp(1j * math.pi * (s + tc.mu))
    e_minus = LogComplex.exp(-1j * math.pi * (s + tc.mu))
    total = 0.0 + 0.0j
    err = 0.0
    for ell, a_l in enumerate(tc.ladder_floats):
        p_ell = 1.0 + 0.0j
        for j in range(ell, tc.h_star):
            p_ell *= xi0 - 1.0 - j
        factor = pref * g_top * LogComplex.from_complex(a_l * p_ell)
        s_plus, err_p, _ = _core_auto(tc, w, ell, zeta, 1, tol / 8.0)
        s_minus, err_m, _ = _core_auto(tc, w, ell, -zeta, 1, tol / 8.0)
        inner = ((e_plus * LogComplex.from_complex(s_plus)).to_complex()
                 - (e_minus * LogComplex.from_complex(s_minus)).to_complex())
        inner_err = (_log_abs(e_plus) * err_p + _log_abs(e_minus) * err_m)
        total += (factor * LogComplex.from_complex(inner)).to_complex()
        err += _log_abs(factor) * inner_err
    return ComplexEval(total, err + abs(total) * 1e-13, "reflected-smoothed")


def _default_grid(form: HalfIntegralForm, sigma: float,
                  t: float = 0.0) -> tuple[float, ...]:
    """Extrapolation nodes per band of Re s.

    Deep to the left the smoothed sums carry absolute mass ~ X^{5/2-2 sigma}
    against an O(|F|) answer, so the largest usable X is set by the
    term-level rounding floor; the extended-precision pipeline keeps that
    floor near absacc * 5e-18 and X = 800 stays clean on square support.
    Progression support pays for an exact series table, whose budget caps
    the certified tails well below that, so its nodes retreat; far left the
    1/X series coefficients also grow like |2(1-s)| per order, and at large
    |t| the small-X nodes sit outside the asymptotic regime entirely while
    |F| ~ e^{pi |t|} makes the large-X rounding harmless, hence the split
    on t.
    """
    if form.square_support:
        if sigma >= -0.25:
            return (50.0, 100.0, 200.0, 400.0, 800.0, 1600.0)
        if sigma >= -0.75:
            return (50.0, 71.0, 100.0, 141.0, 200.0, 283.0, 400.0)
        if abs(t) >= 5.0:
            return (71.0, 100.0, 141.0, 200.0, 283.0, 400.0)
        return (50.0, 71.0, 100.0, 141.0, 200.0, 283.0)
    if sigma >= -0.25:
        return (50.0, 100.0, 200.0, 400.0)
    if sigma >= -0.75:
        return (50.0, 71.0, 100.0, 141.0, 200.0, 283.0, 400.0)
    if abs(t) >= 5.0:
        return (50.0, 71.0, 100.0, 141.0, 200.0, 283.0, 400.0)
    return (20.0, 28.0, 40.0, 57.0, 80.0, 113.0, 160.0)


def F_twist_continued(tc: TwistContext, s: complex, tol: float = 1e-8,
                      x_grid: tuple[float, ...] | None = None) -> ComplexEval:
    """The twist anywhere: smoothed values minus the singular part,
    extrapolated to X = infinity.

    G(X) = F_X - sigma_X expands in integer powers of 1/X, so polynomial
    (Neville) extrapolation in u = 1/X over a geometric grid removes the
    smoothing bias to high order.  A cheap pilot evaluation at the smallest
    node sets the O(|F|) scale so every node can be truncated to an absolute
    target; the Neville diagonal is then scanned for the column of smallest
    successive change, which rides the asymptotic series down to its floor
    and no further.
    """
    s = complex(s)
    if x_grid is None:
        x_grid = _default_grid(tc.form, s.real, s.imag)
    u = [1.0 / x for x in x_grid]
    x0 = min(x_grid)

    def node(x: float, abs_tail: float) -> tuple[complex, float]:
        # subtract the singular part while still in extended precision:
        # F_X alone can be ~1e13 where G = F_X - sigma_X is O(1)
        tre, tim, tail, absacc, rrel = _f_x_parts(tc, s, x, tol, abs_tail)
        sre, sim = _sigma_X_ld(tc, s, x)
        g = float(tre - sre) + 1j * float(tim - sim)
        return g, tail + absacc * rrel

    g0, _ = node(x0, 1.0)
    abs_tail = 0.0125 * tol * max(1.0, abs(g0))
    vals = []
    point_err = 0.0
    for x in x_grid:
        g, g_err = node(x, abs_tail)
        vals.append(g)
        point_err = max(point_err, g_err)
    m = len(vals)
    p = list(vals)
    col0 = [p[0]]
    for k in range(1, m):
        for i in range(m - k):
            p[i] = (u[i + k] * p[i] - u[i] * p[i + 1]) / (u[i + k] - u[i])
        col0.append(p[0])
    best_j, best_d = m - 1, math.inf
    for j in range(1, m):
        d = abs(col0[j] - col0[j - 1])
        if d <= best_d:
            best_j, best_d = j, d
    err = best_d + 8.0 * point_err
    return ComplexEval(col0[best_j], err, "extrapolated")
