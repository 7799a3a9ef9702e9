"""Reduction of points in the upper half-plane to the standard fundamental domain."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import flint
from flint import acb, arb

from .bigarith import PrecisionContext, PrecisionError, check_finite, principal_power_halfint
from .weilrep import MetaplecticElement, canonical_lift


@dataclass(frozen=True)
class PullbackResult:
    """z = map . z_star with z_star in the closed fundamental domain."""

    z_star: acb
    map: MetaplecticElement


def _mobius(m: tuple, z: acb) -> acb:
    a, b, c, d = m
    return ((a * z + b) / (c * z + d)).mid()


def pullback(z, ctx: PrecisionContext | None = None) -> PullbackResult:
    """Pull z back into F = {|Re z| <= 1/2, |z| >= 1}.

    Translations bring Re z into [-1/2, 1/2) and z -> -1/z is applied while
    |z| < 1.  Points on the boundary (up to a tolerance of 2^(-digits/2)
    relative to the working precision) count as inside.  The final z_star
    is recomputed from the original z with the exact accumulated matrix.
    """
    if ctx is not None:
        with ctx:
            return pullback(z, None)
    z0 = acb(z).mid()
    check_finite(z0)
    if not z0.imag > 0:
        raise ValueError("pullback needs Im z > 0")
    bits = flint.ctx.prec
    tol = arb(2) ** (-(bits // 2))
    half = arb(1) / 2
    y0 = float(z0.imag.mid())
    limit = 10 * (int(bits * math.log10(2)) + abs(int(math.log2(y0))) + 1)
    # W accumulates the word with z_star = W z
    W = (1, 0, 0, 1)
    w = z0
    for _ in range(limit):
        x = w.real.mid()
        n = int((x + half).floor().unique_fmpz())
        if n != 0 and abs(x) > half + tol:
            w = (w - n).mid()
            W = (W[0] - n * W[2], W[1] - n * W[3], W[2], W[3])
        r2 = (w.real * w.real + w.imag * w.imag).mid()
        if r2 < 1 - tol:
            w = (-1 / w).mid()
            W = (-W[2], -W[3], W[0], W[1])
            continue
        break
    else:
        raise PrecisionError(f"pullback did not converge for z = {z0}")
    z_star = _mobius(W, z0)
    a, b, c, d = W
    Tm = canonical_lift((d, -b, -c, a))
    return PullbackResult(z_star, Tm)


def in_closed_domain(z, tol=None) -> bool:
    z = acb(z).mid()
    if tol is None:
        tol = arb(2) ** (-(flint.ctx.prec // 2))
    x = abs(z.real.mid())
    r2 = (z.real * z.real + z.imag * z.imag).mid()
    return bool(x <= arb(1) / 2 + tol) and bool(r2 >= 1 - 2 * tol)


def automorphy_j2k(map: MetaplecticElement, z_star, k, ctx: PrecisionContext | None = None) -> acb:
    """phi(z_star)^{2k} for phi = sign * sqrt(c z + d), i.e. sign^{2k} (c z + d)^k."""
    if ctx is not None:
        with ctx:
            return automorphy_j2k(map, z_star, k)
    k = Fraction(k)
    z = acb(z_star).mid()
    if not z.imag > 0:
        raise ValueError("automorphy factor needs Im z > 0")
    w = (map.c * z + map.d).mid()
    val = principal_power_halfint(w, k)
    two_k = 2 * k
    if map.sign == -1 and two_k.denominator == 1 and int(two_k) % 2 == 1:
        val = -val
    return check_finite(val)
