"""Zero geometry of the twisted series.

Deep in the left half-plane the reflected representation is dominated by the
two shifted-series terms whose frequencies sit closest to nu_alpha, one from
each side.  Their interference concentrates the zeros along an explicit line;
``tube_data`` computes the line's two-term data exactly, ``predicted_trivial_
zeros`` solves the resulting lattice, and ``refine_zero`` polishes each seed
with Newton steps on ``fe_rhs``.  Rectangle counts go through an adaptive
argument-principle walk, and ``growth_probe`` fits polynomial growth
exponents on vertical lines.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConvergenceError, DomainError, StripConditionError
from .special import lngamma
from .twist import (
    F_twist_continued,
    F_twist_series,
    TwistContext,
    fe_rhs,
    s_ell,
    twist_abscissa,
)

__all__ = [
    "TubeData",
    "ZeroRecord",
    "tube_data",
    "seed_spacing",
    "predicted_trivial_zeros",
    "refine_zero",
    "tube_zero_count",
    "off_tube_minimum",
    "count_zeros_rectangle",
    "nontrivial_zero_count",
    "rvm_prediction",
    "rvm_linear_coefficient",
    "growth_probe",
]

_TWO_PI = 2.0 * math.pi
_PHASE_CAP = 0.5 * math.pi

# support enumeration cap for the tube minimizers
_N_CAP = 10_000_000


# ---------------------------------------------------------------------------
# the two-term tube
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TubeData:
    """Nearest supported signed roots on either side of -nu_alpha.

    nu_plus = +-sqrt(n_plus) minimizes |nu + nu_alpha| over supported signed
    roots nu > -nu_alpha, nu_minus over nu < -nu_alpha; m_pm = |nu_pm +
    nu_alpha| are exact Fractions whenever the minimizing roots are integers
    (always so on square support).  cstar_pm = sqrt(m_pm) c*_0(nu_pm^2) /
    |nu_pm|^{1/2} = rho_pm e^{i theta_pm} weight the two dominating reflected
    terms, and

        t = slope * sigma + intercept,
        slope = log(m_+/m_-) / pi,
        intercept = log(rho_+ m_-^2 / (rho_- m_+^2)) / (2 pi)

    is the line the far-left zeros cluster around.
    """

    n_plus: int
    n_minus: int
    nu_plus: float
    nu_minus: float
    m_plus: Fraction | float
    m_minus: Fraction | float
    cstar_plus: complex
    cstar_minus: complex
    rho_plus: float
    rho_minus: float
    theta_plus: float
    theta_minus: float
    slope: float
    intercept: float

    def line_t(self, sigma: float) -> float:
        return self.slope * sigma + self.intercept

    def distance(self, s: complex) -> float:
        """Euclidean distance from s to the line."""
        return (abs(s.imag - self.line_t(s.real))
                / math.hypot(1.0, self.slope))


def _cstar_at_root(tc: TwistContext, n: int, sign: int, ell: int = 0
                   ) -> complex:
    """c*_ell at the signed root sign * sqrt(n), integer root or not."""
    r = math.isqrt(n)
    if r * r == n:
        return tc.c_star(sign * r, ell)
    astar = tc.a_star(n)
    mu = tc.mu
    if sign > 0:
        return -cmath.exp(1j * math.pi * mu) * astar
    if Fraction(n) < tc.n_alpha:  # -sqrt(n) lies inside the finite band
        return cmath.exp(1j * math.pi * (0.5 + ell - mu)) * astar
    return cmath.exp(-1j * math.pi * mu) * astar


def _first_supported(tc: TwistContext, n_min: int) -> int | None:
    lo = max(1, n_min)
    while lo <= _N_CAP:
        hi = min(_N_CAP, lo + 65_536)
        ns, _ = tc.form.support(hi, lo)
        if len(ns):
            return int(ns[0])
        lo = hi + 1
    return None


def tube_data(tc: TwistContext) -> TubeData:
    """Minimize |nu + nu_alpha| on each side of -nu_alpha over the support.

    Only three candidates can win: the smallest supported n taken with the
    positive root, the largest supported n below n_alpha taken with the
    negative root (the band), and the smallest supported n above n_alpha
    with the negative root.
    """
    na = tc.n_alpha
    first = _first_supported(tc, 1)
    after = _first_supported(tc, math.floor(na) + 1)
    if first is None or after is None:
        raise ConvergenceError(
            f"support exhausted below {_N_CAP} while locating the tube "
            f"minimizers")
    if Fraction(after) == na:
        after = _first_supported(tc, after + 1)
        if after is None:
            raise ConvergenceError(
                f"support exhausted below {_N_CAP} past n_alpha")
    band = None
    if na > 1:
        ns, _ = tc.form.support(math.ceil(na) - 1)
        ns = [int(n) for n in ns if Fraction(int(n)) < na]
        if ns:
            band = ns[-1]

    def exact_m(n: int, sign: int) -> Fraction | float:
        r = math.isqrt(n)
        if r * r == n:
            return abs(sign * r + tc.nu_alpha)
        return abs(sign * math.sqrt(n) + float(tc.nu_alpha))

    plus_n, plus_sign = first, 1
    if band is not None and exact_m(band, -1) < exact_m(first, 1):
        plus_n, plus_sign = band, -1
    m_plus = exact_m(plus_n, plus_sign)
    m_minus = exact_m(after, -1)
    nu_plus = plus_sign * math.sqrt(plus_n)
    nu_minus = -math.sqrt(after)
    cs = []
    for n, sign, m in ((plus_n, plus_sign, m_plus), (after, -1, m_minus)):
        c = (math.sqrt(m) * _cstar_at_root(tc, n, sign)
             / float(n) ** 0.25)
        cs.append(c)
    rho_p, rho_m = abs(cs[0]), abs(cs[1])

    def canonical(c: complex) -> float:
        th = cmath.phase(c) % _TWO_PI
        return 0.0 if th >= _TWO_PI - 1e-12 else th

    th_p, th_m = canonical(cs[0]), canonical(cs[1])
    slope = math.log(float(m_plus) / float(m_minus)) / math.pi
    intercept = math.log(rho_p * float(m_minus) ** 2
                         / (rho_m * float(m_plus) ** 2)) / _TWO_PI
    return TubeData(plus_n, after, nu_plus, nu_minus, m_plus, m_minus,
                    cs[0], cs[1], rho_p, rho_m, th_p, th_m, slope, intercept)


def seed_spacing(td: TubeData) -> float:
    """Horizontal gap between consecutive predicted zeros; its reciprocal is
    the density of the linear count in the window width."""
    ell = math.log(float(td.m_plus) / float(td.m_minus))
    return math.pi ** 2 / (math.pi ** 2 + ell ** 2)


def predicted_trivial_zeros(tc: TwistContext, R: float,
                            sigma_min: float = 0.0) -> list[complex]:
    """Two-term zeros with sigma in [-R, -sigma_min], one per integer k.

    The modulus balance pins s to the tube line; the argument balance

        2 pi sigma + 2 log(m_+/m_-) t + theta_+ - theta_- = (2k+1) pi

    is a transversal line per k, so each k gives exactly one intersection.
    """
    if R <= 0:
        raise DomainError("window depth R must be positive")
    td = tube_data(tc)
    ell = math.log(float(td.m_plus) / float(td.m_minus))
    dth = td.theta_plus - td.theta_minus
    denom = 2.0 * (math.pi ** 2 + ell ** 2)

    # sigma_k = pi ((2k+1) pi - dth - 2 ell intercept) / denom, inverted to
    # bracket the admissible k range
    def k_at(sig: float) -> float:
        return (sig * denom / math.pi + dth
                + 2.0 * ell * td.intercept) / (2.0 * math.pi) - 0.5

    out: list[complex] = []
    k_lo = math.ceil(k_at(-R) - 1e-12)
    k_hi = math.floor(k_at(-sigma_min) + 1e-12)
    for k in range(k_lo, k_hi + 1):
        sig = math.pi * ((2 * k + 1) * math.pi - dth
                         - 2.0 * ell * td.intercept) / denom
        out.append(complex(sig, td.line_t(sig)))
    out.sort(key=lambda z: -z.real)
    return out


# ---------------------------------------------------------------------------
# refinement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroRecord:
    location: complex
    residual: float          # |F| relative to the local two-term envelope
    kind: str                # trivial | nontrivial | unclassified
    seed: complex
    distance_to_line: float


def _log_envelope(td: TubeData, s: complex) -> float:
    """log of the larger of the two dominating reflected terms at s,
    including the gamma factor and principal prefactor moduli."""
    w = 1.0 - s
    t = s.imag
    g = lngamma(2.0 * w - 0.5).log_modulus
    plus = -math.pi * t + math.log(td.rho_plus) \
        - 2.0 * w.real * math.log(float(td.m_plus))
    minus = math.pi * t + math.log(td.rho_minus) \
        - 2.0 * w.real * math.log(float(td.m_minus))
    return g + max(plus, minus) - 0.5 * math.log(_TWO_PI)


def normalized_residual(tc: TwistContext, s: complex,
                        td: TubeData | None = None,
                        tol: float = 1e-10) -> float:
    """|F(s)| divided by the two-term envelope; O(1) away from zeros."""
    if td is None:
        td = tube_data(tc)
    val = fe_rhs(tc, s, tol=tol).value
    env = _log_envelope(td, s)
    # the envelope omits the |(sqrt N / 4 pi)^{1-2s}| prefactor on purpose:
    # it cancels in ratios along the tube and only biases the scale
    pref = (1.0 - 2.0 * s.real) * math.log(
        math.sqrt(tc.form.N) / (4.0 * math.pi))
    if val == 0:
        return 0.0
    return math.exp(math.log(abs(val)) - env - pref)


def refine_zero(tc: TwistContext, seed: complex, tol: float = 1e-8,
                line_eps: float = 0.05, sigma_edge: float = 5.0,
                max_iter: int = 30) -> ZeroRecord:
    """Newton iteration on fe_rhs from ``seed``; the step F/F' is scale-free
    so the huge gamma moduli far left never enter the stopping rule."""
    td = tube_data(tc)
    z = complex(seed)
    ftol = min(1e-10, tol)
    for _ in range(max_iter):
        h = 1e-6 * (1.0 + abs(z))
        f0 = fe_rhs(tc, z, tol=ftol).value
        fp = fe_rhs(tc, z + h, tol=ftol).value
        fm = fe_rhs(tc, z - h, tol=ftol).value
        df = (fp - fm) / (2.0 * h)
        if df == 0 or not math.isfinite(abs(df)):
            raise ConvergenceError(f"flat derivative at {z}")
        step = f0 / df
        z -= step
        if abs(step) < 5e-11 * (1.0 + abs(z)):
            break
    else:
        raise ConvergenceError(
            f"no convergence from seed {seed} after {max_iter} steps")
    if abs(z - seed) > 1.0:
        raise ConvergenceError(
            f"runaway refinement: seed {seed} drifted to {z}")
    res = normalized_residual(tc, z, td, tol=ftol)
    if res > tol:
        raise ConvergenceError(
            f"stalled at residual {res:.3e} > {tol} from seed {seed}")
    dist = td.distance(z)
    if dist < line_eps and z.real < -sigma_edge:
        kind = "trivial"
    elif z.real >= -sigma_edge:
        kind = "nontrivial"
    else:
        kind = "unclassified"
    return ZeroRecord(z, res, kind, complex(seed), dist)


def tube_zero_count(tc: TwistContext, R: float, sigma0: float = 5.0,
                    tol: float = 1e-8) -> list[ZeroRecord]:
    """Refine every predicted seed with sigma in [-sigma0 - R, -sigma0).

    Raises on seed collision (two seeds landing on one zero), which would
    invalidate the linear count.
    """
    seeds = [z for z in predicted_trivial_zeros(tc, sigma0 + R)
             if z.real < -sigma0]
    records = [refine_zero(tc, z, tol=tol, sigma_edge=sigma0) for z in seeds]
    locs = sorted(r.location.real for r in records)
    for a, b in zip(locs, locs[1:]):
        if abs(a - b) < 1e-6:
            raise ConvergenceError(
                f"seed collision: two refinements at sigma = {a:.9f}")
    return records


def off_tube_minimum(tc: TwistContext, sigma_lo: float, sigma_hi: float,
                     eps: float = 0.3,
                     offsets: tuple[float, ...] = (0.3, 0.55, 0.9, 1.5),
                     n_sigma: int = 26) -> float:
    """min of the normalized |F| over a mesh at distance >= eps off the line.

    A strictly positive return certifies a zero-free margin around the tube
    on the sampled window.
    """
    td = tube_data(tc)
    if min(offsets) < eps:
        raise DomainError("offsets must keep distance >= eps from the line")
    lift = math.hypot(1.0, td.slope)
    best = math.inf
    for sig in np.linspace(sigma_lo, sigma_hi, n_sigma):
        base = td.line_t(float(sig))
        for off in offsets:
            for sgn in (1.0, -1.0):
                s = complex(float(sig), base + sgn * off * lift)
                best = min(best, normalized_residual(tc, s, td))
    return best


# ---------------------------------------------------------------------------
# rectangle counts by argument tracking
# ---------------------------------------------------------------------------

def _rect_evaluator(tc: TwistContext, tol: float):
    absc = twist_abscissa(tc.form)
    cache: dict[complex, complex] = {}

    def f(s: complex) -> complex:
        v = cache.get(s)
        if v is None:
            if s.real >= absc + 0.25:
                v = F_twist_series(tc, s, tol=tol).value
            elif s.real <= -0.3:
                v = fe_rhs(tc, s, tol=tol).value
            else:
                v = F_twist_continued(tc, s, tol=min(tol, 1e-8)).value
            if v == 0 or not math.isfinite(abs(v)):
                raise ConvergenceError(
                    f"boundary point {s} sits on (or numerically at) a zero")
            cache[s] = v
        return v

    return f


def _arg_along(f, za: complex, zb: complex, fa: complex, fb: complex,
               depth: int) -> float:
    d = cmath.phase(fb / fa)
    if abs(d) <= _PHASE_CAP:
        return d
    if depth <= 0:
        raise ConvergenceError(
            f"phase step floor reached between {za} and {zb}")
    zm = 0.5 * (za + zb)
    fm = f(zm)
    return (_arg_along(f, za, zm, fa, fm, depth - 1)
            + _arg_along(f, zm, zb, fm, fb, depth - 1))


def _walk_edge(f, za: complex, zb: complex, depth: int,
               step: float = 0.25) -> float:
    n = max(2, int(abs(zb - za) / step) + 1)
    pts = [za + (zb - za) * (j / n) for j in range(n + 1)]
    vals = [f(z) for z in pts]
    return sum(_arg_along(f, pts[j], pts[j + 1], vals[j], vals[j + 1], depth)
               for j in range(n))


def count_zeros_rectangle(tc: TwistContext, sigma_left: float,
                          sigma_right: float, t_low: float, t_high: float,
                          tol: float = 1e-6, depth: int = 14) -> int:
    """Winding number of the twist around the rectangle boundary.

    Counts zeros minus poles inside.  The boundary is retried with small
    incommensurate nudges when the phase tracker bottoms out near a zero.
    """
    if sigma_left >= sigma_right or t_low >= t_high:
        raise DomainError("empty rectangle")
    nudges = ((0.0, 0.0, 0.0, 0.0),
              (-4.7e-3, 3.1e-3, -2.9e-3, 3.7e-3),
              (-9.4e-3, 6.2e-3, -5.8e-3, 7.4e-3))
    last: Exception | None = None
    for dl, dr, db, dt in nudges:
        f = _rect_evaluator(tc, tol)
        a = complex(sigma_left + dl, t_low + db)
        b = complex(sigma_right + dr, t_low + db)
        c = complex(sigma_right + dr, t_high + dt)
        d = complex(sigma_left + dl, t_high + dt)
        try:
            total = (_walk_edge(f, a, b, depth) + _walk_edge(f, b, c, depth)
                     + _walk_edge(f, c, d, depth)
                     + _walk_edge(f, d, a, depth))
        except ConvergenceError as exc:
            last = exc
            continue
        turns = total / _TWO_PI
        n = round(turns)
        if abs(turns - n) > 0.2:
            raise ConvergenceError(
                f"non-integral winding {turns:.4f} on "
                f"[{sigma_left}, {sigma_right}] x [{t_low}, {t_high}]")
        return int(n)
    raise ConvergenceError(f"rectangle nudging exhausted: {last}")


def nontrivial_zero_count(tc: TwistContext, T: float,
                          sigma_edge: float = 5.0,
                          sigma_right: float | None = None,
                          tol: float = 1e-6) -> int:
    """Zeros in the central strip with |Im| <= T.

    The left boundary is placed midway between two consecutive predicted
    far-left zeros nearest -sigma_edge, so the tube lattice never sits on
    the contour; pole windings for spectral alpha are added back.
    """
    if T <= 0:
        raise DomainError("T must be positive")
    seeds = predicted_trivial_zeros(tc, sigma_edge + 3.0)
    sig = sorted(z.real for z in seeds)
    mids = [0.5 * (a + b) for a, b in zip(sig, sig[1:])]
    if mids:
        sigma_left = min(mids, key=lambda m: abs(m + sigma_edge))
    else:
        sigma_left = -sigma_edge
    if sigma_right is None:
        sigma_right = max(2.0, twist_abscissa(tc.form) + 0.7)
    w = count_zeros_rectangle(tc, sigma_left, sigma_right, -T, T, tol=tol)
    poles = 0
    if tc.in_spectrum:
        poles = sum(1 for ell in range(tc.h_star + 1)
                    if sigma_left < float(s_ell(ell)) < sigma_right)
    return w + poles


# ---------------------------------------------------------------------------
# asymptotic count and growth
# ---------------------------------------------------------------------------

def _n_bar(tc: TwistContext) -> int:
    ns, _ = tc.form.support(10_000)
    if len(ns) == 0:
        raise DomainError("form has empty support")
    return int(ns[0])


def rvm_linear_coefficient(tc: TwistContext) -> float:
    """Coefficient of T in the zero-count main terms."""
    td = tube_data(tc)
    return math.log(tc.form.N / (_n_bar(tc) * float(td.m_plus)
                                 * float(td.m_minus)
                                 * (_TWO_PI * math.e) ** 2)) / math.pi


def rvm_prediction(tc: TwistContext, T: float) -> float:
    """(2/pi) T log T + c T with c from the conductor, the first supported
    index, and the tube gaps m_pm; no lower-order term."""
    if T <= math.e:
        raise DomainError("count asymptotics need T > e")
    return (2.0 / math.pi) * T * math.log(T) + rvm_linear_coefficient(tc) * T


def growth_probe(tc: TwistContext, sigma: float,
                 t_list: tuple[float, ...] | list[float]
                 ) -> tuple[float, float]:
    """Least-squares exponents of |F(sigma + it)| in |t|, one per sign of t.

    Left of the critical strip the reflected series is the evaluator; right
    of the twist abscissa the plain series is.  The middle strip is not
    accepted: pointwise extrapolation noise there would corrupt the fit.
    """
    ts = sorted(float(t) for t in t_list)
    if len(ts) < 4 or min(ts) <= 0:
        raise DomainError("need at least 4 positive |t| samples")
    if max(ts) / min(ts) < 8.0:
        raise DomainError("t samples must span close to a decade")
    if math.pi * max(ts) > 690.0:
        raise DomainError("|t| too large for float-range evaluation")
    absc = twist_abscissa(tc.form)
    if sigma > 0.0 and sigma < absc + 0.25:
        raise StripConditionError(
            f"growth probe needs sigma <= 0 or sigma >= {absc + 0.25}")
    out = []
    for sign in (1.0, -1.0):
        logs = []
        for t in ts:
            s = complex(sigma, sign * t)
            if sigma <= 0.0:
                v = fe_rhs(tc, s, tol=1e-8).value
            else:
                v = F_twist_series(tc, s, tol=1e-10).value
            logs.append(math.log(abs(v)))
        fit = np.polyfit(np.log(ts), np.array(logs), 1)
        out.append(float(fit[0]))
    return out[0], out[1]
