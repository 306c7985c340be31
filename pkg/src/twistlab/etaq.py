"""Exact integer q-expansions of eta quotients and the built-in test forms.

Everything upstream of floating-point evaluation lives here: pentagonal-number
series for the eta factors, certified-exact truncated products, and the preset
half-integral-weight cusp forms together with their Fourier coefficient
providers, dual phases and proven coefficient bounds.

A product of coefficient arrays is accepted only when the path that produced
it proves the result exact: direct int64 convolution under an L1*max bound,
real FFT with an a-priori rounding certificate, sparse +-1 scatter, or plain
big-integer schoolbook as the always-correct fallback.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError, StripConditionError

__all__ = [
    "EtaQuotient",
    "QExpansion",
    "HalfIntegralForm",
    "eta_expansion",
    "build_preset",
    "dual_phase_check",
    "chi12",
    "multiply_exact",
    "write_coefficients_csv",
    "PRESET_NAMES",
]

_INT64_CAP = float(1 << 62)
_FLOAT_EXACT_CAP = float(1 << 52)
# above this many int64 entries a lazily grown coefficient table refuses to
# extend further; callers asking for more have a sizing problem upstream
_U_LENGTH_CAP = 1 << 27


# ---------------------------------------------------------------------------
# pentagonal series and exact products
# ---------------------------------------------------------------------------

def _pentagonal_signs(limit: int) -> Iterator[tuple[int, int]]:
    """Yield (exponent, sign) pairs of prod(1-u^m) = sum (-1)^j u^{j(3j-1)/2}."""
    yield 0, 1
    j = 1
    while j * (3 * j - 1) // 2 <= limit:
        s = -1 if j % 2 else 1
        yield j * (3 * j - 1) // 2, s
        e2 = j * (3 * j + 1) // 2
        if e2 <= limit:
            yield e2, s
        j += 1


def _euler_factor_u(stride: int, m: int) -> np.ndarray:
    """Coefficients of prod(1 - u^{stride*j}) up to u^m."""
    arr = np.zeros(m + 1, dtype=np.int64)
    for e, s in _pentagonal_signs(m // stride):
        arr[stride * e] = s
    return arr


def _invert_euler_u(stride: int, m: int) -> list[int]:
    """Coefficients of prod(1 - u^{stride*j})^{-1} as exact big integers.

    Solved by the sparse pentagonal recurrence; for stride 1 these are the
    partition numbers, which overflow int64 quickly, hence Python ints.
    """
    pent = [(stride * e, s) for e, s in _pentagonal_signs(m // stride) if e > 0]
    b = [0] * (m + 1)
    b[0] = 1
    for j in range(1, m + 1):
        tot = 0
        for e, s in pent:
            if e > j:
                break
            tot -= s * b[j - e]
        b[j] = tot
    return b


def _fit(arr: np.ndarray, m: int) -> np.ndarray:
    if len(arr) == m + 1:
        return arr
    if len(arr) > m + 1:
        return arr[: m + 1]
    out = np.zeros(m + 1, dtype=arr.dtype)
    out[: len(arr)] = arr
    return out


def _canon(x: Sequence[int] | np.ndarray, m: int) -> tuple[object, bool]:
    """Normalize input to (int64 array, False) or (list of python ints, True)."""
    if isinstance(x, np.ndarray) and x.dtype != object:
        return x[: m + 1].astype(np.int64, copy=False), False
    vals = [int(v) for v in list(x)[: m + 1]]
    if all(-(1 << 62) < v < (1 << 62) for v in vals):
        return np.array(vals, dtype=np.int64), False
    return vals, True


def _schoolbook(a: Sequence[int], b: Sequence[int], m: int) -> list[int]:
    out = [0] * (m + 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b[: m + 1 - i]):
                if bj:
                    out[i + j] += ai * bj
    return out


def _fft_convolve(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray | None:
    """Float FFT product, returned only when provably exact after rounding."""
    n = len(a) + len(b) - 1
    size = 1 << (n - 1).bit_length()
    na = math.sqrt(float(np.dot(a.astype(np.float64), a.astype(np.float64))))
    nb = math.sqrt(float(np.dot(b.astype(np.float64), b.astype(np.float64))))
    apriori = 2.0 ** -53 * (3.0 * math.log2(size) + 16.0) * na * nb
    if apriori >= 0.25:
        return None
    fa = np.fft.rfft(a.astype(np.float64), size)
    fb = np.fft.rfft(b.astype(np.float64), size)
    raw = np.fft.irfft(fa * fb, size)[: m + 1]
    rounded = np.rint(raw)
    if float(np.max(np.abs(raw - rounded), initial=0.0)) >= 0.25:
        return None
    if float(np.max(np.abs(rounded), initial=0.0)) >= _FLOAT_EXACT_CAP:
        return None
    return _fit(rounded.astype(np.int64), m)


def _scatter(sparse: np.ndarray, dense: np.ndarray, m: int) -> np.ndarray:
    out = np.zeros(m + 1, dtype=np.int64)
    for e in np.nonzero(sparse)[0]:
        if e > m:
            break
        hi = min(m - e, len(dense) - 1)
        out[e : e + hi + 1] += sparse[e] * dense[: hi + 1]
    return out


def _pack(values: list[int]) -> np.ndarray:
    if all(-(1 << 62) < v < (1 << 62) for v in values):
        return np.array(values, dtype=np.int64)
    arr = np.empty(len(values), dtype=object)
    arr[:] = values
    return arr


def multiply_exact(a: Sequence[int] | np.ndarray, b: Sequence[int] | np.ndarray,
                   m: int) -> np.ndarray:
    """Coefficients of the product a*b truncated at degree m, exactly.

    The cheapest certified path wins; when no floating or int64 certificate
    holds the product falls back to schoolbook over Python integers, which is
    slow but cannot be wrong.
    """
    aa, a_big = _canon(a, m)
    bb, b_big = _canon(b, m)
    if not (a_big or b_big):
        amax = float(np.max(np.abs(aa), initial=0))
        bmax = float(np.max(np.abs(bb), initial=0))
        if amax == 0.0 or bmax == 0.0:
            return np.zeros(m + 1, dtype=np.int64)
        l1a = float(np.sum(np.abs(aa)))
        l1b = float(np.sum(np.abs(bb)))
        cert = min(l1a * bmax, l1b * amax) * (1.0 + 1e-9)
        if cert < _INT64_CAP:
            if len(aa) * len(bb) <= (1 << 24):
                return _fit(np.convolve(aa, bb), m)
            res = _fft_convolve(aa, bb, m)
            if res is not None:
                return res
            for x, y in ((aa, bb), (bb, aa)):
                nnz = int(np.count_nonzero(x))
                if float(np.max(np.abs(x))) == 1.0 and nnz * len(y) <= (1 << 31):
                    return _scatter(x, y, m)
        aa, bb = [int(v) for v in aa], [int(v) for v in bb]
    return _pack(_schoolbook(aa, bb, m))


def _power_trunc(base, exponent: int, m: int):
    """base**exponent truncated at degree m by square-and-multiply."""
    result = None
    sq = base
    e = exponent
    while e:
        if e & 1:
            result = sq if result is None else multiply_exact(result, sq, m)
        e >>= 1
        if e:
            sq = multiply_exact(sq, sq, m)
    return result


# ---------------------------------------------------------------------------
# q-expansions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QExpansion:
    """Truncated integer power series with a fractional leading power of q.

    ``coefficients[i]`` holds the coefficient of q^i in the series part;
    the overall object represents q^{prefactor24/24} * series.
    """

    coefficients: np.ndarray
    truncation: int
    prefactor24: int = 0

    def coefficient(self, i: int) -> int:
        if not 0 <= i <= self.truncation:
            raise DomainError(
                f"series index {i} outside truncation {self.truncation}; "
                "rebuild with a larger truncation")
        return int(self.coefficients[i])

    def full_coefficient(self, n: int) -> int:
        """Coefficient of q^n including the prefactor (which must be integral)."""
        if self.prefactor24 % 24:
            raise DomainError("fractional leading exponent; no integral q-grid")
        shift = self.prefactor24 // 24
        if n < shift:
            return 0
        return self.coefficient(n - shift)

    def __mul__(self, other: "QExpansion") -> "QExpansion":
        m = min(self.truncation, other.truncation)
        coeffs = multiply_exact(self.coefficients, other.coefficients, m)
        return QExpansion(coeffs, m, self.prefactor24 + other.prefactor24)

    def __pow__(self, exponent: int) -> "QExpansion":
        if not (isinstance(exponent, int) and exponent >= 1):
            raise DomainError("only positive integer powers are defined")
        coeffs = _power_trunc(self.coefficients, exponent, self.truncation)
        if not isinstance(coeffs, np.ndarray):
            coeffs = _pack(list(coeffs))
        return QExpansion(coeffs, self.truncation, self.prefactor24 * exponent)


def eta_expansion(scale: int, m: int) -> QExpansion:
    """q-expansion of eta(scale*z): q^{scale/24} * prod(1 - q^{scale*j})."""
    if scale < 1 or m < 1:
        raise DomainError("scale and truncation must be positive")
    return QExpansion(_euler_factor_u(scale, m), m, scale)


@dataclass(frozen=True)
class EtaQuotient:
    """Product of eta(scale*z)^exponent factors with cusp-form normalization.

    The total weight sum(exponents)/2 must be a positive half-integer with odd
    numerator and the leading exponent sum(scale*exponent)/24 a positive
    integer, which is what the built-in forms need.
    """

    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        fac = tuple((int(s), int(r)) for s, r in self.factors)
        object.__setattr__(self, "factors", fac)
        if not fac:
            raise DomainError("an eta quotient needs at least one factor")
        for s, r in fac:
            if s < 1:
                raise DomainError(f"eta argument scale {s} must be positive")
            if r == 0:
                raise DomainError("zero exponents are not factors")
        if sum(r for _, r in fac) % 2 == 0 or sum(r for _, r in fac) < 0:
            raise DomainError(
                "total weight must be a positive half-integer with odd numerator")
        lead = sum(s * r for s, r in fac)
        if lead <= 0 or lead % 24:
            raise DomainError(
                f"leading exponent {lead}/24 must be a positive integer")

    @property
    def weight(self) -> Fraction:
        return Fraction(sum(r for _, r in self.factors), 2)

    @property
    def leading_exponent(self) -> int:
        return sum(s * r for s, r in self.factors) // 24

    @property
    def stride(self) -> int:
        g = 0
        for s, _ in self.factors:
            g = math.gcd(g, s)
        return g

    def _u_series(self, m_u: int):
        """Series part on the u = q^stride grid, exact integers."""
        g = self.stride
        acc = np.zeros(m_u + 1, dtype=np.int64)
        acc[0] = 1
        for scale, r in self.factors:
            t = scale // g
            if r > 0:
                pw = _power_trunc(_euler_factor_u(t, m_u), r, m_u)
            else:
                pw = _power_trunc(_invert_euler_u(t, m_u), -r, m_u)
            acc = multiply_exact(acc, pw, m_u)
        return acc

    def expansion(self, m: int) -> QExpansion:
        """q-expansion up to q^m past the prefactor."""
        if m < 1:
            raise DomainError("truncation must be positive")
        g = self.stride
        series_u = self._u_series(m // g)
        dtype = np.int64 if isinstance(series_u, np.ndarray) and \
            series_u.dtype != object else object
        out = np.zeros(m + 1, dtype=dtype)
        out[:: g][: len(series_u)] = series_u
        return QExpansion(out, m, sum(s * r for s, r in self.factors))


# ---------------------------------------------------------------------------
# coefficient sources
# ---------------------------------------------------------------------------

def chi12(nu: int) -> int:
    """The real character mod 12: +1 at +-1, -1 at +-5, else 0."""
    r = nu % 12
    if r in (1, 11):
        return 1
    if r in (5, 7):
        return -1
    return 0


def _chi12_vec(nu: np.ndarray) -> np.ndarray:
    r = nu % 12
    out = np.zeros(nu.shape, dtype=np.int64)
    out[(r == 1) | (r == 11)] = 1
    out[(r == 5) | (r == 7)] = -1
    return out


def _odd_sign_nu_vec(nu: np.ndarray) -> np.ndarray:
    out = np.zeros(nu.shape, dtype=np.int64)
    odd = nu % 2 == 1
    out[odd] = np.where((nu[odd] - 1) // 2 % 2 == 0, nu[odd], -nu[odd])
    return out


class _SquareSource:
    """Coefficients supported on perfect squares, c(nu^2) given by a map on nu."""

    def __init__(self, nu_values: Callable[[np.ndarray], np.ndarray]):
        self._nu_values = nu_values

    def fourier(self, n: int) -> int:
        if n < 1:
            return 0
        nu = math.isqrt(n)
        if nu * nu != n:
            return 0
        return int(self._nu_values(np.array([nu], dtype=np.int64))[0])

    def support(self, n_max: int, n_min: int = 1) -> tuple[np.ndarray, np.ndarray]:
        vmax = math.isqrt(max(n_max, 0))
        vmin = math.isqrt(max(n_min - 1, 0)) + 1
        nu = np.arange(vmin, vmax + 1, dtype=np.int64)
        c = self._nu_values(nu)
        keep = c != 0
        return (nu[keep]) ** 2, c[keep]


class _EngineSource:
    """Coefficients from the exact expansion engine, grown on demand.

    The u-array is rebuilt at double size when a query runs past it and the
    reference swapped atomically, so concurrent readers only ever see a
    complete table.
    """

    def __init__(self, eta: EtaQuotient, n_default: int = 10 ** 6):
        self._eta = eta
        self._modulus = eta.stride
        self._residue = eta.leading_exponent
        self._u = None
        self._ensure_u(self._u_index(n_default))

    def _u_index(self, n: int) -> int:
        return max(0, (n - self._residue) // self._modulus)

    def _ensure_u(self, j: int) -> None:
        if self._u is not None and j < len(self._u):
            return
        target = j + 1
        if self._u is not None:
            target = max(target, 2 * len(self._u))
        if target > _U_LENGTH_CAP:
            raise DomainError(
                f"coefficient table would need {target} entries "
                f"(cap {_U_LENGTH_CAP}); requested index is a sizing error")
        self._u = self._eta._u_series(target - 1)

    def ensure(self, n_max: int) -> None:
        self._ensure_u(self._u_index(n_max))

    def fourier(self, n: int) -> int:
        if n < self._residue or (n - self._residue) % self._modulus:
            return 0
        j = (n - self._residue) // self._modulus
        self._ensure_u(j)
        return int(self._u[j])

    def support(self, n_max: int, n_min: int = 1) -> tuple[np.ndarray, np.ndarray]:
        self.ensure(n_max)
        jmax = self._u_index(n_max)
        if n_max < self._residue:
            jmax = -1
        jmin = 0
        if n_min > self._residue:
            jmin = -((self._residue - n_min) // self._modulus)
        window = self._u[jmin: jmax + 1]
        j = np.nonzero(window)[0]
        return self._residue + self._modulus * (jmin + j), window[j]


# ---------------------------------------------------------------------------
# the preset forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HalfIntegralForm:
    """A weight-k/2 cusp form presented through its exact Fourier data.

    ``fourier(n)`` returns the exact integer c(n); the analytically normalized
    a(n) = c(n) * n^{-(kappa-1)/2} is what the series evaluators consume.
    The dual form is the same coefficient data times ``dual_phase``.
    """

    name: str
    k: int
    N: int
    eta: EtaQuotient
    dual_phase: complex
    # |c(n)| <= c_bound_amp * n^c_bound_exp on the support
    c_bound_amp: float
    c_bound_exp: float
    # |a(n)| <= a_bound_amp * n^{1/4} on the support
    a_bound_amp: float
    square_support: bool
    source: object = field(repr=False)

    @property
    def kappa(self) -> float:
        return self.k / 2.0

    @property
    def omega(self) -> complex:
        return cmath.exp(-1j * math.pi * self.k / 4.0)

    # weight-derived structure constants: k = 2h + 1, the gamma-ladder length
    # is h* = max(0, h-1), and the sine-phase parameter mu = (2h-1)/4 equals
    # the normalization shift (k-2)/4 (negative exactly when h = 0)
    @property
    def h(self) -> int:
        return (self.k - 1) // 2

    @property
    def h_star(self) -> int:
        return max(0, self.h - 1)

    @property
    def mu(self) -> float:
        return (2 * self.h - 1) / 4.0

    @property
    def mu_star(self) -> float:
        return (2 * self.h_star + 1) / 4.0

    def fourier(self, n: int) -> int:
        return self.source.fourier(n)

    def dual_fourier(self, n: int) -> complex:
        return self.dual_phase * self.source.fourier(n)

    def coeff_bound(self, n: int) -> float:
        return self.c_bound_amp * float(n) ** self.c_bound_exp

    def normalized(self, n: int) -> float:
        """a(n) = c(n) * n^{-(k-2)/4} as a float."""
        return self.fourier(n) * float(n) ** (-(self.k - 2) / 4.0)

    def ensure_coefficients(self, n_max: int) -> None:
        ensure = getattr(self.source, "ensure", None)
        if ensure is not None:
            ensure(n_max)

    def support(self, n_max: int, n_min: int = 1) -> tuple[np.ndarray, np.ndarray]:
        """(n, c(n)) over the nonzero support in [n_min, n_max], exact integers."""
        return self.source.support(n_max, n_min)

    def support_normalized(self, n_max: int, n_min: int = 1) -> tuple[np.ndarray, np.ndarray]:
        """(n, a(n)) as float arrays over the nonzero support in [n_min, n_max]."""
        n, c = self.support(n_max, n_min)
        nf = n.astype(np.float64)
        return nf, c.astype(np.float64) * nf ** (-(self.k - 2) / 4.0)

    def normalized_tail_bound(self, n_min: float, sigma: float) -> float:
        """Certified upper bound for sum_{n >= n_min} |a(n)| n^{-sigma}.

        Uses |a(n)| <= A n^{1/4} and the support structure: squares are
        summed over nu with an integral comparison, a progression with step
        equal to the expansion stride likewise.
        """
        n0 = max(float(n_min), 1.0)
        amp = self.a_bound_amp
        if self.square_support:
            if sigma <= 0.75:
                raise StripConditionError(
                    f"tail of sum nu^(1/2-2*sigma) needs sigma > 3/4, "
                    f"got {sigma}")
            nu0 = math.ceil(math.sqrt(n0) - 1e-12)
            return amp * (nu0 ** (0.5 - 2 * sigma)
                          + nu0 ** (1.5 - 2 * sigma) / (2 * sigma - 1.5))
        if sigma <= 1.25:
            raise StripConditionError(
                f"tail of sum n^(1/4-sigma) over a progression needs "
                f"sigma > 5/4, got {sigma}")
        step = self.eta.stride
        return amp * (n0 ** (0.25 - sigma)
                      + n0 ** (1.25 - sigma) / (step * (sigma - 1.25)))


PRESET_NAMES = ("ETA24", "ETA8_CUBED", "ETA8_FIFTH")

_FORM_CACHE: dict[str, HalfIntegralForm] = {}


def build_preset(name: str) -> HalfIntegralForm:
    """Construct one of the built-in test forms by registry name.

    ETA24        eta(24z): k=1, N=576, c(nu^2) = chi12(nu).
    ETA8_CUBED   eta(8z)^3: k=3, N=64, c(nu^2) = (-1)^((nu-1)/2) nu, nu odd.
    ETA8_FIFTH   fifth power of eta at scale 24 (k=5, N=576); the scale-8
                 variant has a fractional leading exponent, so the integral
                 realization eta(24z)^5 with support n = 5 mod 24 is used.
    """
    if name in _FORM_CACHE:
        return _FORM_CACHE[name]
    if name == "ETA24":
        eta = EtaQuotient(((24, 1),))
        form = HalfIntegralForm(
            name=name, k=1, N=576, eta=eta,
            dual_phase=cmath.exp(1j * math.pi / 4.0),
            c_bound_amp=1.0, c_bound_exp=0.5, a_bound_amp=1.0,
            square_support=True, source=_SquareSource(_chi12_vec))
    elif name == "ETA8_CUBED":
        eta = EtaQuotient(((8, 3),))
        form = HalfIntegralForm(
            name=name, k=3, N=64, eta=eta,
            dual_phase=cmath.exp(3j * math.pi / 4.0),
            c_bound_amp=1.0, c_bound_exp=0.5, a_bound_amp=1.0,
            square_support=True, source=_SquareSource(_odd_sign_nu_vec))
    elif name == "ETA8_FIFTH":
        eta = EtaQuotient(((24, 5),))
        form = HalfIntegralForm(
            name=name, k=5, N=576, eta=eta,
            dual_phase=cmath.exp(5j * math.pi / 4.0),
            c_bound_amp=0.5, c_bound_exp=1.0, a_bound_amp=0.5,
            square_support=False, source=_EngineSource(eta))
    else:
        raise DomainError(
            f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
    _FORM_CACHE[name] = form
    return form


def dual_phase_check(form: HalfIntegralForm,
                     s_samples: Iterable[complex],
                     tol: float = 1e-12) -> float:
    """Largest residual certifying the dual phase and level of a form.

    Two families of residuals are combined.  At each sample s the reflection
    identity Lambda(s) = omega * Lambda_dual(kappa - s) is evaluated with the
    completed two-sided evaluator on both sides.  In addition the completed
    evaluator is anchored against the plain Dirichlet series at an abscissa
    where the direct tail certifies below tol; that residual is normalized by
    the magnitude of the phase-carrying term, so a wrong dual phase of
    modulus one shows up at its full phase distance (the intended negative
    control), not damped by the dominant term.
    """
    from . import lfun

    worst = 0.0
    for s in s_samples:
        lhs = lfun.completed_lambda(form, complex(s), tol=tol)
        rhs = form.omega * lfun.completed_lambda_dual(
            form, form.kappa - complex(s), tol=tol)
        scale = max(abs(lhs), abs(rhs), 1.0)
        worst = max(worst, abs(lhs - rhs) / scale)

    sigma_a = lfun.anchor_abscissa(form)
    direct = lfun.direct_lambda(form, sigma_a, tol=tol)
    head, dual_term = lfun.completed_lambda_parts(form, complex(sigma_a),
                                                  tol=tol)
    carrier = max(abs(dual_term), 1e-300)
    worst = max(worst, abs((head + form.omega * dual_term) - direct) / carrier)
    return worst


def write_coefficients_csv(form: HalfIntegralForm, n_max: int, fh) -> int:
    """Dump the nonzero support up to n_max as rows (n, c(n), a(n)).

    Returns the number of data rows written.  ``a(n)`` is the shortest
    round-tripping decimal of the float value.
    """
    n, c = form.support(n_max)
    _, a = form.support_normalized(n_max)
    writer = csv.writer(fh)
    writer.writerow(["n", "c", "a"])
    for ni, ci, ai in zip(n.tolist(), c.tolist(), a.tolist()):
        writer.writerow([ni, ci, repr(ai)])
    return len(n)
