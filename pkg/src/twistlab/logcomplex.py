"""Log-domain complex arithmetic.

A nonzero complex number z is stored as (log|z|, phase) with the phase kept
*unreduced*: multiplying e^{i pi s} factors at t = Im s = -200 must not wrap
the phase mod 2 pi, or winding information and relative error control are
lost.  Zero is representable as log_modulus = -inf.

Values whose magnitude overflows or underflows float64 (|log z| up to ~1e8)
stay usable; conversion back to a native complex only happens at the edges.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

__all__ = ["LogComplex", "log_sum"]


@dataclass(frozen=True)
class LogComplex:
    """Complex value e^{log_modulus + i*phase} with unreduced phase."""

    log_modulus: float
    phase: float

    @staticmethod
    def from_complex(z: complex) -> "LogComplex":
        z = complex(z)
        if z == 0:
            return LogComplex(-math.inf, 0.0)
        return LogComplex(math.log(abs(z)), math.atan2(z.imag, z.real))

    @staticmethod
    def zero() -> "LogComplex":
        return LogComplex(-math.inf, 0.0)

    @staticmethod
    def one() -> "LogComplex":
        return LogComplex(0.0, 0.0)

    @staticmethod
    def exp(w: complex) -> "LogComplex":
        """e^w for complex w, exactly representable at any scale."""
        w = complex(w)
        return LogComplex(w.real, w.imag)

    def is_zero(self) -> bool:
        return self.log_modulus == -math.inf

    def to_complex(self) -> complex:
        """Native complex; overflows to complex infinity beyond ~e^709."""
        if self.is_zero():
            return 0.0 + 0.0j
        if self.log_modulus > 709.0:
            return cmath.rect(math.inf, math.remainder(self.phase, 2.0 * math.pi))
        return cmath.exp(complex(self.log_modulus, self.phase))

    @property
    def abs(self) -> float:
        return math.exp(self.log_modulus) if not self.is_zero() else 0.0

    def __mul__(self, other) -> "LogComplex":
        other = _coerce(other)
        if self.is_zero() or other.is_zero():
            return LogComplex.zero()
        return LogComplex(self.log_modulus + other.log_modulus, self.phase + other.phase)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogComplex":
        other = _coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by log-domain zero")
        if self.is_zero():
            return LogComplex.zero()
        return LogComplex(self.log_modulus - other.log_modulus, self.phase - other.phase)

    def __rtruediv__(self, other) -> "LogComplex":
        return _coerce(other).__truediv__(self)

    def __neg__(self) -> "LogComplex":
        if self.is_zero():
            return self
        return LogComplex(self.log_modulus, self.phase + math.pi)

    def __pow__(self, w) -> "LogComplex":
        """Raise to a real or complex power using the *stored* phase.

        (e^{a+ib})^w = e^{w(a+ib)}; no branch cut is consulted, the unreduced
        phase is what gets scaled.  For principal-branch powers of native
        complex numbers use special.principal_power instead.
        """
        if self.is_zero():
            wr = complex(w).real
            if wr > 0:
                return LogComplex.zero()
            raise ZeroDivisionError("0**w with Re w <= 0")
        w = complex(w)
        return LogComplex(
            w.real * self.log_modulus - w.imag * self.phase,
            w.imag * self.log_modulus + w.real * self.phase,
        )

    def __add__(self, other) -> "LogComplex":
        """Sum via the dominant term: a + b = a * (1 + b/a), |a| >= |b|."""
        other = _coerce(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        big, small = (self, other) if self.log_modulus >= other.log_modulus else (other, self)
        ratio = small / big
        # ratio has log_modulus <= 0; safe to go native.
        bump = 1.0 + ratio.to_complex()
        if bump == 0:
            return LogComplex.zero()
        return big * LogComplex.from_complex(bump)

    __radd__ = __add__

    def __sub__(self, other) -> "LogComplex":
        return self.__add__(-_coerce(other))

    def __rsub__(self, other) -> "LogComplex":
        return _coerce(other).__add__(-self)


def _coerce(x) -> LogComplex:
    if isinstance(x, LogComplex):
        return x
    return LogComplex.from_complex(x)


def log_sum(terms) -> LogComplex:
    """Sum an iterable of LogComplex with scaling by the largest modulus.

    More accurate than folding __add__ when many comparable terms cancel:
    all terms are rescaled by the common maximum and accumulated natively.
    """
    terms = [_coerce(t) for t in terms]
    terms = [t for t in terms if not t.is_zero()]
    if not terms:
        return LogComplex.zero()
    m = max(t.log_modulus for t in terms)
    acc = 0.0 + 0.0j
    for t in terms:
        acc += cmath.exp(complex(t.log_modulus - m, t.phase))
    if acc == 0:
        return LogComplex.zero()
    return LogComplex(m + math.log(abs(acc)), math.atan2(acc.imag, acc.real))
