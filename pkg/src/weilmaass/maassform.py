"""Expansions of vector-valued harmonic weak Maass forms.

Component h of a form f for rho (or rho-bar) of level N reads

    f_h(tau) = sum_{n <= 0} a(n, h) q^{n/4N}
             + sum_{n != 0} c(n, h) W(n v / 4N) e_{4N}(n u),

with tau = u + iv and e_{4N}(x) = e(x / 4N).  Coefficients vanish unless
n = sigma h^2 (mod 4N), where sigma = +1 for rho and -1 for rho-bar.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from flint import acb, arb

from .bigarith import (PrecisionContext, complex_from_pair, complex_to_pair, from_decimal,
                       to_decimal, unit_circle_exp)
from .specialfun import as_weight, holomorphic_w, w_kernel

HARMONIC = "harmonic"
HOLOMORPHIC = "holomorphic"


class CongruenceError(ValueError):
    """An index (n, h) violating n = sigma h^2 (mod 4N)."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, math.isqrt(n) + 1))


@dataclass(frozen=True)
class HarmonicParams:
    N: int
    k: Fraction
    conjugated: bool
    mode: str = HARMONIC

    def __post_init__(self):
        object.__setattr__(self, "k", as_weight(self.k))
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if self.mode not in (HARMONIC, HOLOMORPHIC):
            raise ValueError(f"mode must be {HARMONIC!r} or {HOLOMORPHIC!r}, got {self.mode!r}")
        if self.mode == HARMONIC:
            if self.k > 1:
                raise ValueError(f"harmonic mode needs k <= 1, got {self.k}")
            if not (self.k == Fraction(1, 2) or self.k < 0):
                raise ValueError(f"harmonic mode needs k = 1/2 or k < 0, got {self.k}")

    @property
    def sigma(self) -> int:
        return -1 if self.conjugated else 1

    @property
    def four_n(self) -> int:
        return 4 * self.N

    @property
    def harmonic(self) -> bool:
        return self.mode == HARMONIC

    def admissible(self, n: int, h: int) -> bool:
        return (n - self.sigma * h * h) % self.four_n == 0

    def advisories(self) -> list[str]:
        out = []
        if self.harmonic and self.k == Fraction(1, 2) and not _is_prime(self.N):
            out.append(f"N = {self.N} is not prime: the solution for weight 1/2 "
                       "need not be unique")
        return out

    def to_json(self) -> dict:
        return {"N": self.N, "weight": str(self.k),
                "rep": "rho_bar" if self.conjugated else "rho", "mode": self.mode}

    @classmethod
    def from_json(cls, d: dict) -> "HarmonicParams":
        rep = d.get("rep", "rho")
        if rep not in ("rho", "rho_bar"):
            raise ValueError(f"rep must be 'rho' or 'rho_bar', got {rep!r}")
        return cls(int(d["N"]), as_weight(str(d.get("weight", "1/2"))), rep == "rho_bar",
                   d.get("mode", HARMONIC))


@dataclass
class PrincipalPart:
    """Prescribed coefficients a(n, h), n <= 0."""

    params: HarmonicParams
    terms: dict

    def __post_init__(self):
        clean = {}
        n2 = 2 * self.params.N
        for (n, h), val in self.terms.items():
            n, h = int(n), int(h) % n2
            val = acb(val).mid()
            if n > 0:
                raise CongruenceError(f"principal part index n = {n} must be <= 0")
            if not self.params.admissible(n, h):
                if val.is_zero():
                    continue
                raise CongruenceError(
                    f"principal part term (n={n}, h={h}) violates "
                    f"n = {self.params.sigma}*h^2 mod {self.params.four_n}")
            clean[(n, h)] = (clean.get((n, h), acb(0)) + val).mid()
        if not any(not v.is_zero() for v in clean.values()):
            raise ValueError("principal part has no nonzero term")
        self.terms = dict(sorted(clean.items(), key=lambda t: (t[0][1], t[0][0])))

    @property
    def K(self) -> int:
        return max(-n for (n, _h) in self.terms)

    def get(self, n: int, h: int) -> acb:
        return self.terms.get((n, h % (2 * self.params.N)), acb(0))

    def to_json(self, ctx: PrecisionContext) -> list:
        out = []
        for (n, h), v in self.terms.items():
            re, im = complex_to_pair(v, ctx)
            out.append({"n": n, "h": h, "re": re, "im": im})
        return out

    @classmethod
    def from_json(cls, params: HarmonicParams, items: Iterable[dict], ctx: PrecisionContext):
        terms = {}
        with ctx:
            for it in items:
                re = _parse_number(it.get("re", 0))
                im = _parse_number(it.get("im", 0))
                key = (int(it["n"]), int(it["h"]))
                terms[key] = terms.get(key, acb(0)) + acb(re, im)
            return cls(params, terms)


def _parse_number(x) -> arb:
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return (arb(x.numerator) / x.denominator).mid()
    if isinstance(x, float):
        return arb(repr(x)).mid()
    s = str(x).strip()
    if "/" in s:
        f = Fraction(s)
        return (arb(f.numerator) / f.denominator).mid()
    return arb(s).mid()


# ---------------------------------------------------------------------------
# index sets


@dataclass(frozen=True)
class CoeffIndexSet:
    """Ordered unknowns (n, h), sorted by (h, n)."""

    indices: tuple
    M0: int

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def position(self) -> dict:
        return {ix: i for i, ix in enumerate(self.indices)}

    def by_component(self) -> dict:
        out = {}
        for n, h in self.indices:
            out.setdefault(h, []).append(n)
        return out


def build_index_set(params: HarmonicParams, M0: int) -> CoeffIndexSet:
    """All (n, h) with 0 < |n| <= 4N M0 in the residue class of h (n > 0 only
    in holomorphic mode)."""
    if int(M0) != M0 or M0 < 1:
        raise ValueError(f"M0 must be a positive integer, got {M0}")
    four_n = params.four_n
    bound = four_n * M0
    out = []
    for h in range(2 * params.N):
        r = (params.sigma * h * h) % four_n
        lo = 1 if not params.harmonic else -bound
        first = lo + ((r - lo) % four_n)
        for n in range(first, bound + 1, four_n):
            if n != 0:
                out.append((n, h))
    return CoeffIndexSet(tuple(out), int(M0))


# ---------------------------------------------------------------------------
# discriminant labels


def delta_to_index(params: HarmonicParams, Delta: int) -> tuple[int, int]:
    """Table label Delta -> (n, h) with n = sigma Delta and h the smallest
    r in [0, 2N) with r^2 = Delta (mod 4N)."""
    Delta = int(Delta)
    four_n = params.four_n
    for r in range(2 * params.N):
        if (r * r - Delta) % four_n == 0:
            return params.sigma * Delta, r
    raise ValueError(f"discriminant not represented: {Delta} is not a square modulo {four_n}")


def index_to_delta(params: HarmonicParams, n: int, h: int) -> int:
    if not params.admissible(n, h):
        raise CongruenceError(f"(n={n}, h={h}) violates the residue congruence")
    return params.sigma * n


def delta_index_map(params: HarmonicParams, value, direction: str = "to_index"):
    """Translate between discriminant labels and (n, h) indices."""
    if direction == "to_index":
        return delta_to_index(params, value)
    if direction == "to_delta":
        n, h = value
        return index_to_delta(params, n, h)
    raise ValueError(f"unknown direction {direction!r}")


# ---------------------------------------------------------------------------
# coefficient tables


@dataclass
class Entry:
    value: acb
    err_bound: arb
    phase: int


@dataclass
class CoefficientTable:
    params: HarmonicParams
    principal: PrincipalPart
    ctx: PrecisionContext
    entries: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for key, ent in self.entries.items():
            self._check(key, ent)

    def _check(self, key, ent: Entry):
        n, h = key
        if not self.params.admissible(n, h):
            raise CongruenceError(f"(n={n}, h={h}) violates the residue congruence")
        if not ent.err_bound > 0:
            raise ValueError(f"err_bound must be positive at {key}")
        if ent.phase not in (1, 2):
            raise ValueError("phase must be 1 or 2")

    def set(self, n: int, h: int, value, err_bound, phase: int) -> None:
        key = (int(n), int(h) % (2 * self.params.N))
        ent = Entry(acb(value).mid(), arb(err_bound).mid(), int(phase))
        self._check(key, ent)
        self.entries[key] = ent

    def value(self, n: int, h: int) -> acb:
        return self.entries[(n, h % (2 * self.params.N))].value

    def at_delta(self, Delta: int) -> Entry:
        return self.entries[delta_to_index(self.params, Delta)]

    def sorted_keys(self) -> list:
        return sorted(self.entries, key=lambda t: (t[1], t[0]))

    def to_json(self) -> dict:
        rows = []
        for (n, h) in self.sorted_keys():
            e = self.entries[(n, h)]
            re, im = complex_to_pair(e.value, self.ctx)
            rows.append({"n": n, "h": h, "re": re, "im": im,
                         "err_bound": to_decimal(e.err_bound, self.ctx), "phase": e.phase})
        return {"params": self.params.to_json(), "precision": self.ctx.to_json(),
                "principal_part": self.principal.to_json(self.ctx),
                "meta": self.meta, "entries": rows}

    @classmethod
    def from_json(cls, d: dict) -> "CoefficientTable":
        params = HarmonicParams.from_json(d["params"])
        ctx = PrecisionContext.from_json(d["precision"])
        principal = PrincipalPart.from_json(params, d["principal_part"], ctx)
        entries = {}
        for r in d["entries"]:
            entries[(int(r["n"]), int(r["h"]))] = Entry(
                complex_from_pair(r["re"], r["im"], ctx), from_decimal(r["err_bound"], ctx),
                int(r["phase"]))
        return cls(params, principal, ctx, entries, dict(d.get("meta", {})))


# ---------------------------------------------------------------------------
# evaluation


def kernel(params: HarmonicParams, n: int, v) -> arb:
    """W(n v / 4N), or the plain exponential in holomorphic mode."""
    x = (arb(n) * v / params.four_n).mid()
    if n > 0 or not params.harmonic:
        return holomorphic_w(x)
    return w_kernel(params.k, x)


def evaluate_truncated(table: CoefficientTable, tau, ctx: PrecisionContext | None = None) -> list:
    """The truncated series hat f_h(tau), h = 0 .. 2N-1."""
    ctx = ctx or table.ctx
    params = table.params
    with ctx:
        tau = acb(tau).mid()
        u, v = tau.real.mid(), tau.imag.mid()
        if not v > 0:
            raise ValueError("evaluation needs Im tau > 0")
        out = [acb(0)] * (2 * params.N)
        for (n, h), a in table.principal.terms.items():
            term = a * holomorphic_w((arb(n) * v / params.four_n).mid()) * _phase(n, u, params)
            out[h] += term
        for (n, h), e in table.entries.items():
            out[h] += e.value * kernel(params, n, v) * _phase(n, u, params)
        return [z.mid() for z in out]


def _phase(n: int, u, params: HarmonicParams) -> acb:
    """e_{4N}(n u) = e(n u / 4N)."""
    if isinstance(u, (int, Fraction)):
        return unit_circle_exp(Fraction(n) * Fraction(u) / params.four_n)
    return unit_circle_exp((arb(n) * u / params.four_n).mid())


def pairing(principal: PrincipalPart, cusp_coeffs: dict, ctx: PrecisionContext | None = None) -> acb:
    """sum_h sum_{n <= 0} a(n, h) b(-n, h) over the principal part."""
    total = acb(0)
    missing = []
    for (n, h), a in principal.terms.items():
        if a.is_zero():
            continue
        key = (-n, h)
        if key not in cusp_coeffs:
            missing.append(key)
            continue
        total += a * acb(cusp_coeffs[key])
    if missing:
        raise KeyError(f"missing cusp form coefficients at {missing}")
    return total.mid()


def warn_advisories(params: HarmonicParams) -> None:
    for msg in params.advisories():
        warnings.warn(msg, stacklevel=2)
