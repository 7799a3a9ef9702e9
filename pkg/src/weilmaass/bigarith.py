"""Arbitrary-precision real and complex arithmetic used throughout the package.

Numbers are python-flint ``arb`` / ``acb`` values.  The ball radius that arb
carries is ignored: every public routine returns a midpoint (radius zero), so
the objects behave like ordinary multiprecision floats with nearest rounding.
Error control happens analytically at the algorithm layer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import flint
from flint import acb, arb

BigReal = arb
BigComplex = acb

RealLike = Union[int, float, str, Fraction, arb]

GUARD_BITS = 32
MIN_DIGITS = 20


class PrecisionError(ArithmeticError):
    """Raised for non-finite results or precision faults."""


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision for one computation.

    ``bits`` is the full mantissa length used by flint, guard bits included.
    The context is also a re-entrant context manager that installs ``bits``
    as flint's working precision.
    """

    bits: int
    guard_bits: int = GUARD_BITS

    def __post_init__(self):
        if self.bits < 64:
            raise ValueError(f"precision must be at least 64 bits, got {self.bits}")
        if self.guard_bits < 0:
            raise ValueError("guard_bits must be non-negative")

    @property
    def digits(self) -> int:
        """Decimal digits promised to the caller (guard bits excluded)."""
        return int((self.bits - self.guard_bits) * math.log10(2))

    @property
    def eps(self) -> float:
        return 2.0 ** (-(self.bits - self.guard_bits))

    def __enter__(self):
        _PREC_STACK.append(flint.ctx.prec)
        flint.ctx.prec = self.bits
        return self

    def __exit__(self, *exc):
        flint.ctx.prec = _PREC_STACK.pop()
        return False

    def check_same(self, other: "PrecisionContext") -> None:
        if other != self:
            raise ValueError(
                f"mixed precision contexts: {self.bits} bits vs {other.bits} bits")

    def to_json(self) -> dict:
        return {"bits": self.bits, "guard_bits": self.guard_bits}

    @classmethod
    def from_json(cls, d: dict) -> "PrecisionContext":
        return cls(int(d["bits"]), int(d.get("guard_bits", GUARD_BITS)))


_PREC_STACK: list[int] = []


def make_context(decimal_digits: int, guard_bits: int = GUARD_BITS) -> PrecisionContext:
    """Context carrying at least ``decimal_digits`` significant digits."""
    if int(decimal_digits) != decimal_digits or decimal_digits < MIN_DIGITS:
        raise ValueError(
            f"decimal_digits must be an integer >= {MIN_DIGITS}, got {decimal_digits}")
    bits = math.ceil(decimal_digits * math.log2(10)) + guard_bits
    return PrecisionContext(bits, guard_bits)


def check_finite(x):
    if isinstance(x, acb):
        ok = x.real.is_finite() and x.imag.is_finite()
    else:
        ok = x.is_finite()
    if not ok:
        raise PrecisionError(f"non-finite value produced: {x}")
    return x


def big_real(x: RealLike) -> arb:
    """Convert an exact or decimal input to arb at the current precision."""
    if isinstance(x, arb):
        return x.mid()
    if isinstance(x, Fraction):
        return (arb(x.numerator) / x.denominator).mid()
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            return big_real(Fraction(s))
        return arb(s).mid()
    return arb(x)


def parse_rational_or_decimal(s) -> Union[Fraction, arb]:
    """Inputs of the form ``p/q`` stay exact, anything else becomes arb."""
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    if isinstance(s, str) and "/" in s:
        return Fraction(s.strip())
    return big_real(s)


def unit_circle_exp(frac, ctx: PrecisionContext | None = None) -> acb:
    """Return e(frac) = exp(2 pi i frac).

    Exact rationals are reduced modulo 1 before evaluation, which keeps large
    phases accurate.
    """
    if ctx is not None:
        with ctx:
            return unit_circle_exp(frac)
    if isinstance(frac, (int, Fraction)):
        f = Fraction(frac) % 1
        if f == 0:
            return acb(1)
        t = (arb(2 * f.numerator) / f.denominator).mid()
    else:
        t = 2 * big_real(frac)
    return check_finite(acb(t).exp_pi_i().mid())


def principal_power_halfint(w, k, ctx: PrecisionContext | None = None) -> acb:
    """exp(k * Log w) with the principal logarithm, arg in (-pi, pi]."""
    if ctx is not None:
        with ctx:
            return principal_power_halfint(w, k)
    w = acb(w).mid()
    if w.is_zero():
        raise ValueError("principal power of zero")
    k = Fraction(k)
    if k == 0:
        return acb(1)
    if k.denominator == 1 and abs(k.numerator) <= 64:
        r = w ** int(k.numerator)
        return check_finite(r.mid())
    # w on the negative real axis: flint's log returns arg = +pi for an exact
    # zero imaginary part, as required.
    lw = w.log().mid()
    return check_finite((lw * (arb(k.numerator) / k.denominator)).mid().exp().mid())


# ---------------------------------------------------------------------------
# decimal string interchange


def to_decimal(x, ctx: PrecisionContext) -> str:
    """Format an arb midpoint as a decimal string that parses back bit-exactly."""
    x = arb(x).mid()
    if x.is_zero():
        return "0"
    check_finite(x)
    n = math.ceil(ctx.bits * math.log10(2)) + 1
    with ctx:
        for extra in range(0, 12, 3):
            s = x.str(n + extra, radius=False)
            if arb(s).mid() == x:
                return s
    return _exact_decimal(x)


def _exact_decimal(x: arb) -> str:
    man, exp = x.man_exp()
    man, exp = int(man), int(exp)
    if exp >= 0:
        return str(man << exp)
    sign = "-" if man < 0 else ""
    digits = str(abs(man) * 5 ** (-exp))
    scale = -exp
    if len(digits) <= scale:
        digits = "0" * (scale - len(digits) + 1) + digits
    return f"{sign}{digits[:-scale]}.{digits[-scale:]}"


def from_decimal(s: str, ctx: PrecisionContext) -> arb:
    with ctx:
        return big_real(s)


def complex_to_pair(z: acb, ctx: PrecisionContext) -> tuple[str, str]:
    return to_decimal(z.real, ctx), to_decimal(z.imag, ctx)


def complex_from_pair(re: str, im: str, ctx: PrecisionContext) -> acb:
    with ctx:
        return acb(big_real(re), big_real(im))


def to_float(x) -> float:
    """Nearest double; underflows to 0 and overflows to inf like float()."""
    if isinstance(x, acb):
        x = abs(x)
    return float(arb(x).mid())


def log10_abs(x) -> float:
    """log10|x| computed without leaving arbitrary precision (x != 0)."""
    if isinstance(x, acb):
        x = abs(x)
    x = abs(arb(x).mid())
    if x.is_zero():
        return -math.inf
    return float((x.log() / arb(10).log()).mid())
