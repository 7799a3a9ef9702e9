"""Incomplete gamma function, the W-kernel and truncation estimates.

The non-holomorphic part of a weight k form carries the factor
Gamma(1 - k, 4 pi |n| v / 4N).  For half-integral k this reduces to
Gamma(1/2, x) = sqrt(pi) erfc(sqrt(x)) via the recurrence
Gamma(a + 1, x) = a Gamma(a, x) + x^a e^{-x}.
"""
from __future__ import annotations

import math
from fractions import Fraction

import flint
from flint import arb

from .bigarith import PrecisionContext, PrecisionError, big_real, check_finite

Weight = Fraction

LN10 = math.log(10.0)
Y0 = math.sqrt(3.0) / 2


def as_weight(k) -> Fraction:
    """Parse a weight (int, Fraction or string like "1/2", "-3/2")."""
    k = Fraction(k) if not isinstance(k, str) else Fraction(k.strip())
    if k.denominator not in (1, 2):
        raise ValueError(f"weight must be integral or half-integral, got {k}")
    return k


# ---------------------------------------------------------------------------
# erfc and Gamma(a, x)


def _adaptive(fn, wp: int, max_extra: int = 4096) -> arb:
    """Evaluate fn() (a ball) with rising precision until its relative radius
    is below 2^-wp; return the midpoint rounded to wp bits."""
    old = flint.ctx.prec
    extra = 16
    try:
        while True:
            flint.ctx.prec = wp + extra
            val = fn()
            if not val.is_finite():
                raise PrecisionError("non-finite special function value")
            if val.is_zero() or val.rad() <= abs(val.mid()) * arb(2) ** (-wp - 2):
                break
            if extra >= max_extra:
                raise PrecisionError("special function did not reach working precision")
            extra *= 2
        out = val.mid()
    finally:
        flint.ctx.prec = old
    return +out


def erfc_big(x, ctx: PrecisionContext | None = None) -> arb:
    """Complementary error function at the working precision."""
    if ctx is not None:
        with ctx:
            return erfc_big(x)
    x = big_real(x)
    check_finite(x)
    if x.is_zero():
        return arb(1)
    return _adaptive(lambda: x.erfc(), flint.ctx.prec).mid()


def upper_gamma_halfint(a, x, ctx: PrecisionContext | None = None) -> arb:
    """Gamma(a, x) for half-odd-integer a.

    Starts from Gamma(1/2, x) = sqrt(pi) erfc(sqrt(x)) and walks to a with
    Gamma(b+1, x) = b Gamma(b, x) + x^b e^{-x} (downward by its inversion).
    """
    if ctx is not None:
        with ctx:
            return upper_gamma_halfint(a, x)
    a = Fraction(a)
    if a.denominator != 2:
        raise ValueError(f"a must be a half-odd integer, got {a}")
    x = big_real(x)
    check_finite(x)
    if x < 0:
        raise ValueError("upper incomplete gamma needs x >= 0")
    half = Fraction(1, 2)
    if x.is_zero():
        if a <= 0:
            raise ValueError(f"Gamma({a}, 0) diverges")
        g = arb.pi().sqrt()
        b = half
        while b < a:
            g = g * (arb(b.numerator) / b.denominator)
            b += 1
        return g.mid()

    def run():
        g = arb.pi().sqrt() * x.sqrt().erfc()
        logx = x.log()
        b = half
        while b < a:
            bb = arb(b.numerator) / b.denominator
            g = bb * g + (bb * logx - x).exp()
            b += 1
        while b > a:
            bm1 = b - 1
            bb = arb(bm1.numerator) / bm1.denominator
            g = (g - (bb * logx - x).exp()) / bb
            b = bm1
        return g

    return check_finite(_adaptive(run, flint.ctx.prec))


def upper_gamma(a: Fraction, x) -> arb:
    """Gamma(a, x) for x > 0 and a integral or half-integral."""
    a = Fraction(a)
    if a.denominator == 2:
        return upper_gamma_halfint(a, x)
    if a.denominator != 1:
        raise ValueError(f"unsupported order {a}")
    x = big_real(x)
    if not x > 0:
        raise ValueError("upper incomplete gamma needs x > 0")
    aa = arb(a.numerator)
    return check_finite(_adaptive(lambda: x.gamma_upper(aa), flint.ctx.prec))


# ---------------------------------------------------------------------------
# W-kernel


def w_kernel(k, v, ctx: PrecisionContext | None = None) -> arb:
    """W(v) = e^{-2 pi v} for v > 0 and e^{-2 pi v} Gamma(1-k, 4 pi |v|) for v < 0."""
    if ctx is not None:
        with ctx:
            return w_kernel(k, v)
    v = big_real(v)
    if v.is_zero():
        raise ValueError("W(0) is undefined; index n = 0 never uses W")
    two_pi_v = (2 * arb.pi() * v).mid()
    if v > 0:
        return (-two_pi_v).exp().mid()
    k = as_weight(k)
    g = upper_gamma(1 - k, (-2 * two_pi_v).mid())
    return check_finite(((-two_pi_v).exp() * g).mid())


def holomorphic_w(v) -> arb:
    """e^{-2 pi v}; used for principal parts and in holomorphic mode."""
    return (-2 * arb.pi() * big_real(v)).exp().mid()


def kernel_constant(k) -> float:
    """Constant c_k in |W(v)| <= c_k e^{-2 pi |v|} (4 pi |v|)^{-k} for v < 0.

    For k >= 0, Gamma(a, x) <= x^{a-1} e^{-x} whenever a = 1 - k <= 1, so
    c_k = 1.  For k < 0 the bound carries an additive Gamma(1-k) term, see
    :func:`w_kernel_bound`.
    """
    k = as_weight(k)
    if k >= 0:
        return 1.0
    return 2.0 ** max(0.0, float(-k) - 1.0)


def w_kernel_bound(k, v, ctx: PrecisionContext | None = None) -> arb:
    """Upper bound for |W(v)| of the shape c_k e^{-2 pi |v|} (4 pi |v|)^{-k}.

    For k < 0 (a = 1 - k > 1) the estimate
    Gamma(a, x) <= 2^{max(0, a-2)} e^{-x} (x^{a-1} + Gamma(a))
    is used; it has the same large-|v| shape and stays valid as v -> 0.
    """
    if ctx is not None:
        with ctx:
            return w_kernel_bound(k, v)
    k = as_weight(k)
    v = big_real(v)
    if v.is_zero():
        raise ValueError("bound undefined at v = 0")
    av = abs(v)
    decay = (-2 * arb.pi() * av).exp()
    if v > 0:
        return (arb(kernel_constant(k)) * decay).mid()
    x = 4 * arb.pi() * av
    kk = arb(k.numerator) / k.denominator
    shape = (-kk * x.log()).exp()
    if k >= 0:
        return (decay * shape).mid()
    a = 1 - kk
    return (arb(kernel_constant(k)) * decay * (shape + a.gamma())).mid()


def _log_w_bound(k: Fraction, v: float) -> float:
    """log of w_kernel_bound in double precision (v != 0)."""
    av = abs(v)
    if v > 0:
        return math.log(kernel_constant(k)) - 2 * math.pi * av
    x = 4 * math.pi * av
    s = -float(k) * math.log(x)
    if k >= 0:
        return -2 * math.pi * av + s
    g = math.lgamma(1 - float(k))
    hi, lo = max(s, g), min(s, g)
    return math.log(kernel_constant(k)) - 2 * math.pi * av + hi + math.log1p(math.exp(lo - hi))


def _logsumexp_tail(logterm, n0: int) -> float:
    """log sum_{n >= n0} exp(logterm(n)) for a tail that eventually decays."""
    best = -math.inf
    total = 0.0
    n = n0
    prev = None
    while True:
        t = logterm(n)
        if t > best:
            total = total * math.exp(best - t) + 1.0 if best > -math.inf else 1.0
            best = t
        else:
            total += math.exp(t - best)
        if prev is not None and t < prev and t < best - 45.0:
            break
        prev = t
        n += 1
        if n - n0 > 10_000_000:
            raise ArithmeticError("truncation tail does not decay")
    return best + math.log(total)


def truncation_tail_log(N: int, k, K: int, Y: float, M: int, harmonic: bool = True) -> float:
    """log of the modeled truncation tail beyond |n| = 4N*M."""
    k = as_weight(k)
    four_n = 4 * N
    C = math.sqrt(K) / four_n
    n0 = four_n * M + 1

    def plus(n):
        return 4 * math.pi * C * math.sqrt(n) - 2 * math.pi * n * Y / four_n

    tail = _logsumexp_tail(plus, n0)
    if harmonic:
        def minus(n):
            return 0.5 * float(k) * math.log(n) + _log_w_bound(k, -n * Y / four_n)

        t2 = _logsumexp_tail(minus, n0)
        hi, lo = max(tail, t2), min(tail, t2)
        tail = hi + math.log1p(math.exp(lo - hi))
    return tail


def truncation_M0(N: int, k, K: int, Y, eps, harmonic: bool = True,
                  safety: float = 1.2) -> int:
    """Truncation point M0 (in units of q) for target accuracy eps at height Y.

    The coefficient growth is modeled as exp(4 pi C sqrt(n)) with
    C = sqrt(K) / 4N, and |n|^{k/2} on the non-holomorphic side.  The smallest
    M whose modeled tail is below eps is multiplied by ``safety`` and rounded up.
    """
    Y = float(arb(big_real(Y)).mid()) if not isinstance(Y, (int, float)) else float(Y)
    if not 0 < Y < Y0:
        raise ValueError(f"Y must lie in (0, sqrt(3)/2), got {Y}")
    log_eps = _log_of(eps)
    if N < 1 or K < 0:
        raise ValueError("need N >= 1 and K >= 0")
    lo, hi = 1, 1
    while truncation_tail_log(N, k, K, Y, hi, harmonic) >= log_eps:
        lo, hi = hi, hi * 2
        if hi > 1 << 24:
            raise ArithmeticError("no truncation point found")
    if truncation_tail_log(N, k, K, Y, 1, harmonic) < log_eps:
        m = 1
    else:
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if truncation_tail_log(N, k, K, Y, mid, harmonic) < log_eps:
                hi = mid
            else:
                lo = mid
        m = hi
    return max(1, math.ceil(safety * m - 1e-12))


def _log_of(eps) -> float:
    if isinstance(eps, (int, float)):
        if eps <= 0:
            raise ValueError("eps must be positive")
        return math.log(eps)
    e = big_real(eps) if not isinstance(eps, arb) else eps
    if not e > 0:
        raise ValueError("eps must be positive")
    return float(e.log().mid())
