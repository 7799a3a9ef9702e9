"""Metaplectic group elements and the Weil representation of (Z, N x^2).

An element is a pair (M, sign) standing for (M, sign * sqrt(c tau + d)) with
the principal square root.  The representation is evaluated exactly through
a word in the generators T = ((1,1),(0,1), 1) and S = ((0,-1),(1,0), sqrt(tau)):

    rho(T) e_h = e(h^2 / 4N) e_h
    rho(S) e_h = (2iN)^{-1/2} sum_h' e(-h h' / 2N) e_h'
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import flint
from flint import acb, acb_mat, arb

from .bigarith import PrecisionContext, unit_circle_exp


@dataclass(frozen=True)
class MetaplecticElement:
    a: int
    b: int
    c: int
    d: int
    sign: int = 1

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self.matrix} is not 1")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def matrix(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def j(self, tau) -> acb:
        """Principal sqrt(c tau + d)."""
        w = (self.c * acb(tau) + self.d).mid()
        return w.sqrt().mid()

    def phi(self, tau) -> acb:
        return (self.sign * self.j(tau)).mid()

    def act(self, tau) -> acb:
        tau = acb(tau)
        return ((self.a * tau + self.b) / (self.c * tau + self.d)).mid()

    def inverse_matrix(self) -> tuple:
        return (self.d, -self.b, -self.c, self.a)

    def __mul__(self, other: "MetaplecticElement") -> "MetaplecticElement":
        return mp_compose(self, other)


T = MetaplecticElement(1, 1, 0, 1, 1)
S = MetaplecticElement(0, -1, 1, 0, 1)
IDENTITY = MetaplecticElement(1, 0, 0, 1, 1)
MINUS_ONE = MetaplecticElement(1, 0, 0, 1, -1)


def canonical_lift(m) -> MetaplecticElement:
    """(M, +sqrt(c tau + d)) for an SL2(Z) matrix given as ((a,b),(c,d)) or (a,b,c,d)."""
    if len(m) == 2:
        (a, b), (c, d) = m
    else:
        a, b, c, d = m
    return MetaplecticElement(int(a), int(b), int(c), int(d), 1)


def _matmul(A: tuple, B: tuple) -> tuple:
    a, b, c, d = A
    e, f, g, h = B
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def mp_compose(A: MetaplecticElement, B: MetaplecticElement) -> MetaplecticElement:
    """Group law (M, phi)(M', phi') = (M M', phi(M' tau) phi'(tau)).

    The resulting sign is read off numerically at tau = 2i, where both
    phi_A(B tau) phi_B(tau) and j_AB(tau) are far from zero.
    """
    M = _matmul(A.matrix, B.matrix)
    size = max(abs(x) for x in A.matrix + B.matrix + M) + 2
    old = flint.ctx.prec
    flint.ctx.prec = 64 + 4 * size.bit_length()
    try:
        tau = acb(0, 2)
        lhs = A.phi(B.act(tau)) * B.phi(tau)
        rhs = MetaplecticElement(*M, 1).j(tau)
        ratio = (lhs / rhs).mid()
        sign = 1 if float(ratio.real.mid()) > 0 else -1
        if abs(abs(float(ratio.real.mid())) - 1) > 1e-6:
            raise ArithmeticError("metaplectic cocycle not +-1; precision fault")
    finally:
        flint.ctx.prec = old
    return MetaplecticElement(*M, sign)


def word_decomposition(elt: MetaplecticElement) -> list:
    """Generator word for elt: a list of ("T", q) and ("S", 1) tokens.

    Euclidean reduction of the bottom row: M = T^q S M' with q the nearest
    integer to a/c.  The lifts of the tokens multiply to (M, s); when s
    differs from elt.sign the word is extended by S^4 = (I, -1).
    """
    a, b, c, d = elt.matrix
    word = []
    while c != 0:
        q = round(Fraction(a, c))
        if q:
            word.append(("T", q))
        word.append(("S", 1))
        a, b, c, d = c, d, -(a - q * c), -(b - q * d)
    if a == 1:
        if b:
            word.append(("T", b))
    else:
        word += [("S", 1), ("S", 1)]
        if b:
            word.append(("T", -b))
    prod = IDENTITY
    for tok, p in word:
        prod = mp_compose(prod, MetaplecticElement(1, p, 0, 1, 1) if tok == "T" else S)
    if prod.matrix != elt.matrix:
        raise AssertionError("word decomposition failed")
    if prod.sign != elt.sign:
        word += [("S", 1)] * 4
    return word


@dataclass(frozen=True)
class RepMatrix:
    """rho(M) (or its conjugate) as a 2N x 2N matrix indexed by (h, h')."""

    entries: acb_mat
    N: int
    conjugated: bool

    def entry(self, h: int, hp: int) -> acb:
        n2 = 2 * self.N
        return self.entries[h % n2, hp % n2]

    def tolist(self) -> list:
        return self.entries.tolist()

    def apply(self, vec) -> list:
        v = acb_mat([[x] for x in vec])
        return (self.entries * v).mid().entries()


def _rho_T_diag(N: int, q: int, conjugated: bool) -> list:
    s = -1 if conjugated else 1
    return [unit_circle_exp(Fraction(s * q * h * h, 4 * N)) for h in range(2 * N)]


def _rho_S(N: int, conjugated: bool) -> acb_mat:
    n2 = 2 * N
    s = -1 if conjugated else 1
    # (2iN)^{-1/2} = e^{-i pi/4} / sqrt(2N) on the principal branch
    pref = (unit_circle_exp(Fraction(-s, 8)) / arb(n2).sqrt()).mid()
    rows = [[(pref * unit_circle_exp(Fraction(-s * h * hp, n2))).mid() for hp in range(n2)]
            for h in range(n2)]
    # rows index the image vector, so entry (h, h') is the coefficient of e_h in rho(S) e_h'
    return acb_mat(rows)


_CACHE: dict = {}
_CACHE_LOCK = threading.Lock()


def rho_evaluate(elt: MetaplecticElement, N: int, conjugated: bool = False,
                 ctx: PrecisionContext | None = None) -> RepMatrix:
    """rho(elt) for the Weil representation of level N (conjugated: rho-bar)."""
    if ctx is not None:
        with ctx:
            return rho_evaluate(elt, N, conjugated)
    key = (elt, int(N), bool(conjugated), flint.ctx.prec)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    n2 = 2 * N
    Smat = _rho_S(N, conjugated)
    R = None
    for tok, p in word_decomposition(elt):
        if tok == "T":
            diag = _rho_T_diag(N, p, conjugated)
            if R is None:
                R = acb_mat([[diag[i] if i == j else acb(0) for j in range(n2)]
                             for i in range(n2)])
            else:
                rows = R.tolist()
                R = acb_mat([[(row[j] * diag[j]).mid() for j in range(n2)] for row in rows])
        else:
            R = Smat if R is None else (R * Smat).mid()
    if R is None:
        R = acb_mat([[acb(1) if i == j else acb(0) for j in range(n2)] for i in range(n2)])
    out = RepMatrix(R.mid(), int(N), bool(conjugated))
    with _CACHE_LOCK:
        return _CACHE.setdefault(key, out)


def clear_cache() -> None:
    with _CACHE_LOCK:
        _CACHE.clear()


def rho_T(N: int, conjugated: bool = False) -> RepMatrix:
    return rho_evaluate(T, N, conjugated)


def rho_S(N: int, conjugated: bool = False) -> RepMatrix:
    return rho_evaluate(S, N, conjugated)
