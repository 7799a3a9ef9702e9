"""Phase 1 (linear system on a horocycle) and phase 2 (direct inversion).

Sample points z_m = x_m + iY, x_m = (1 - 2m)/4Q for m = 1-Q .. Q, are pulled
back to z_m* in the fundamental domain, z_m = T_m z_m*.  The transformation
law f(T tau) = phi_T(tau)^{2k} rho(T) f(tau) expresses f_h(z_m) through the
truncated expansion at z_m*, where it converges fast.  Finite Fourier
inversion on the horocycle then gives one equation per unknown (n, h).
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

from flint import acb, acb_mat, arb

from .bigarith import PrecisionContext, PrecisionError, big_real, to_float, unit_circle_exp
from .fundom import automorphy_j2k, pullback
from .linalg import SingularSystemError, inv_norm_estimate, lu_factor
from .maassform import (CoeffIndexSet, CoefficientTable, HarmonicParams, PrincipalPart,
                        build_index_set, kernel)
from .specialfun import Y0, holomorphic_w, truncation_M0
from .weilrep import rho_evaluate

log = logging.getLogger(__name__)

DEFAULT_Y = Fraction(1, 2)
PHASE2_Y_CAP = 0.8 * Y0


def default_Q(M0: int) -> int:
    return M0 + max(10, math.ceil(M0 / 5))


@dataclass
class SolveJob:
    params: HarmonicParams
    principal: PrincipalPart
    eps: arb
    Y: arb
    Q: int
    M0: int
    ctx: PrecisionContext

    def __post_init__(self):
        with self.ctx:
            self.eps = big_real(self.eps)
            self.Y = big_real(self.Y)
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not (self.Y > 0 and float(self.Y) < Y0):
            raise ValueError(f"Y must lie in (0, sqrt(3)/2), got {float(self.Y)}")
        if int(self.M0) != self.M0 or self.M0 < 1:
            raise ValueError(f"M0 must be a positive integer, got {self.M0}")
        if int(self.Q) != self.Q or self.Q <= self.M0:
            raise ValueError(f"Q must exceed M0 (Q={self.Q}, M0={self.M0})")

    @classmethod
    def create(cls, params, principal, eps, Y=DEFAULT_Y, ctx=None, M0=0, Q=0):
        """Fill in M0 = truncation_M0(Y, eps) and the default Q when given as 0."""
        if ctx is None:
            raise ValueError("a precision context is required")
        with ctx:
            Yb = big_real(Y)
        if not M0:
            M0 = truncation_M0(params.N, params.k, principal.K, float(Yb), eps,
                               harmonic=params.harmonic)
        if not Q:
            Q = default_Q(M0)
        return cls(params, principal, eps, Yb, int(Q), int(M0), ctx)

    def with_Y(self, Y) -> "SolveJob":
        return SolveJob(self.params, self.principal, self.eps, Y, self.Q, self.M0, self.ctx)


@dataclass
class LinearSystem:
    V: list
    Wvec: list
    index: CoeffIndexSet


@dataclass
class ErrorReport:
    residual_bound: arb
    inv_norm: arb
    coeff_bound: arb
    pivot_growth: float = 0.0
    amplifications: dict = field(default_factory=dict)
    empirical: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"residual_bound": _fmt(self.residual_bound), "inv_norm": _fmt(self.inv_norm),
                "coeff_bound": _fmt(self.coeff_bound), "pivot_growth": self.pivot_growth,
                "empirical": self.empirical}


def _fmt(x: arb) -> str:
    return arb(x).mid().str(8, radius=False)


# ---------------------------------------------------------------------------
# sampling


def horocycle_abscissae(Q: int) -> list[Fraction]:
    return [Fraction(1 - 2 * m, 4 * Q) for m in range(1 - Q, Q + 1)]


def horocycle_points(Y, Q: int, ctx: PrecisionContext | None = None) -> list[acb]:
    """z_m = x_m + iY for m = 1-Q .. Q."""
    if Q < 1:
        raise ValueError("Q must be positive")

    def build():
        y = big_real(Y)
        if not y > 0:
            raise ValueError("Y must be positive")
        return [acb((arb(x.numerator) / x.denominator).mid(), y) for x in horocycle_abscissae(Q)]

    if ctx is not None:
        with ctx:
            return build()
    return build()


@dataclass
class _Sample:
    x: Fraction
    z_star: acb
    J: acb
    R: list


def _samples(params: HarmonicParams, Y: arb, Q: int) -> list[_Sample]:
    out = []
    for x, z in zip(horocycle_abscissae(Q), horocycle_points(Y, Q)):
        pb = pullback(z)
        J = automorphy_j2k(pb.map, pb.z_star, params.k)
        R = rho_evaluate(pb.map, params.N, params.conjugated).tolist()
        out.append(_Sample(x, pb.z_star, J, R))
    return out


class _RootTable:
    """e(j / order) for integer j, exactly reduced."""

    def __init__(self, order: int):
        self.order = order
        self._cache = {}

    def __call__(self, j: int) -> acb:
        j %= self.order
        v = self._cache.get(j)
        if v is None:
            v = unit_circle_exp(Fraction(j, self.order))
            self._cache[j] = v
        return v


def _horocycle_phases(ns, Q: int, N: int) -> list[list[acb]]:
    """E[i][m] = e_{4N}(-n_i x_m) = e(-n_i (1 - 2m) / 16NQ)."""
    table = _RootTable(16 * N * Q)
    ms = range(1 - Q, Q + 1)
    return [[table(-n * (1 - 2 * m)) for m in ms] for n in ns]


def _expansion_row(params: HarmonicParams, z_star: acb, cols, wcache: dict) -> list[acb]:
    """W(l y*/4N) e_{4N}(l x*) for the listed (l, h') columns."""
    x, y = z_star.real.mid(), z_star.imag.mid()
    four_n = params.four_n
    row = []
    for l, _hp in cols:
        w = wcache.get(l)
        if w is None:
            w = kernel(params, l, y)
            wcache[l] = w
        row.append((w * unit_circle_exp((arb(l) * x / four_n).mid())).mid())
    return row


def _principal_at(principal: PrincipalPart, params: HarmonicParams, z_star: acb) -> list[acb]:
    x, y = z_star.real.mid(), z_star.imag.mid()
    out = [acb(0)] * (2 * params.N)
    for (l, hp), a in principal.terms.items():
        e = holomorphic_w((arb(l) * y / params.four_n).mid())
        out[hp] += a * e * unit_circle_exp((arb(l) * x / params.four_n).mid())
    return [v.mid() for v in out]


# ---------------------------------------------------------------------------
# phase 1


def assemble_system(job: SolveJob) -> LinearSystem:
    """V = Vtilde - diag(W(nY/4N)) and Wvec = Wtilde - a(n,h) e^{-2 pi n Y/4N}.

    Block row h of Vtilde is E_h G_h with E_h[n, m] = e_{4N}(-n x_m) and
    G_h[m, (h', l)] = J_m rho_{hh'}(T_m) W(l y_m*/4N) e_{4N}(l x_m*) / 2Q.
    """
    params, ctx = job.params, job.ctx
    index = build_index_set(params, job.M0)
    cols = list(index)
    n2 = 2 * params.N
    with ctx:
        samples = _samples(params, job.Y, job.Q)
        inv2q = (arb(1) / (2 * job.Q)).mid()
        F = []
        Pm = []
        for s in samples:
            F.append(_expansion_row(params, s.z_star, cols, {}))
            Pm.append(_principal_at(job.principal, params, s.z_star))
        col_h = [hp for _l, hp in cols]
        comps = index.by_component()
        V, Wvec = [], []
        for h in range(n2):
            ns = comps.get(h, [])
            if not ns:
                continue
            E = acb_mat(_horocycle_phases(ns, job.Q, params.N))
            G, g = [], []
            for m, s in enumerate(samples):
                coef = [(s.J * s.R[h][hp] * inv2q).mid() for hp in range(n2)]
                Fm = F[m]
                G.append([(coef[col_h[c]] * Fm[c]).mid() for c in range(len(cols))])
                g.append([sum((coef[hp] * Pm[m][hp] for hp in range(n2)), acb(0)).mid()])
            block = (E * acb_mat(G)).mid().tolist()
            wt = (E * acb_mat(g)).mid().entries()
            for i, n in enumerate(ns):
                row = list(block[i])
                pos = len(V)
                row[pos] = (row[pos] - kernel(params, n, job.Y)).mid()
                V.append(row)
                a = job.principal.get(n, h)
                wi = wt[i]
                if not a.is_zero():
                    wi = wi - a * holomorphic_w((arb(n) * job.Y / params.four_n).mid())
                Wvec.append(acb(wi).mid())
    return LinearSystem(V, Wvec, index)


def lu_solve(system: LinearSystem, ctx: PrecisionContext):
    """Solve V D = -W; returns (D, factorization)."""
    lu = lu_factor(system.V, ctx)
    with ctx:
        D = lu.solve([(-w).mid() for w in system.Wvec])
    return D, lu


def residual_bound(job: SolveJob) -> arb:
    """2 eps Y^{-2k}."""
    with job.ctx:
        k = job.params.k
        yk = (job.Y.log() * (-2 * arb(k.numerator) / k.denominator)).exp()
        return (2 * job.eps * yk).mid()


def solve_phase1(job: SolveJob):
    """Assemble, solve and certify; returns (CoefficientTable, ErrorReport)."""
    t0 = time.time()
    system = assemble_system(job)
    t1 = time.time()
    log.info("assembled %d x %d system in %.1fs", len(system.V), len(system.V), t1 - t0)
    try:
        D, lu = lu_solve(system, job.ctx)
    except SingularSystemError as exc:
        n, h = system.index.indices[exc.column] if exc.column is not None else (None, None)
        raise SingularSystemError(
            f"{exc} (unknown n={n}, h={h}); the principal part does not determine "
            "a unique form at these parameters", column=exc.column) from exc
    t2 = time.time()
    inv_norm = inv_norm_estimate(lu)
    t3 = time.time()
    log.info("LU %.1fs, norm estimate %.1fs", t2 - t1, t3 - t2)
    with job.ctx:
        rb = residual_bound(job)
        inv = arb(repr(inv_norm)).mid()
        cb = (rb * inv).mid()
    report = ErrorReport(rb, inv, cb, lu.pivot_growth)
    table = CoefficientTable(job.params, job.principal, job.ctx, {}, {})
    for (n, h), v in zip(system.index, D):
        table.set(n, h, v, cb, 1)
    table.meta.update({
        "Y": _fmt_full(job.Y, job.ctx), "Q": job.Q, "M0": job.M0,
        "eps": _fmt_full(job.eps, job.ctx), "precision_bits": job.ctx.bits,
        "inv_norm": _fmt(inv), "residual_bound": _fmt(rb), "coeff_bound": _fmt(cb),
        "pivot_growth": lu.pivot_growth, "size": len(D),
        "seconds": {"assemble": round(t1 - t0, 2), "lu": round(t2 - t1, 2),
                    "norm": round(t3 - t2, 2)},
    })
    return table, report


def _fmt_full(x, ctx) -> str:
    from .bigarith import to_decimal
    return to_decimal(x, ctx)


# ---------------------------------------------------------------------------
# phase 2


def phase2_height(N: int, n: int, digit_loss_budget: int) -> float:
    """Y_n = min(0.8 sqrt(3)/2, 4N budget ln10 / (2 pi |n|))."""
    return min(PHASE2_Y_CAP, 4 * N * digit_loss_budget * math.log(10) / (2 * math.pi * abs(n)))


def _phase2_batches(targets, N: int, budget: int):
    """Group targets by |n| into stretches with |n|_max <= 1.5 |n|_min."""
    by_abs = sorted(targets, key=lambda t: (abs(t[0]), t[1], t[0]))
    batches, cur = [], []
    for t in by_abs:
        if cur and abs(t[0]) > 1.5 * abs(cur[0][0]):
            batches.append(cur)
            cur = []
        cur.append(t)
    if cur:
        batches.append(cur)
    return batches


def phase2_targets(params: HarmonicParams, n_from: int, n_to: int) -> list:
    if n_from > n_to:
        raise ValueError(f"empty range: from {n_from} > to {n_to}")
    out = []
    for n in range(n_from, n_to + 1):
        if n == 0 or (n < 0 and not params.harmonic):
            continue
        for h in range(2 * params.N):
            if params.admissible(n, h):
                out.append((n, h))
    return out


def extend_phase2(table: CoefficientTable, n_range=None, digit_loss_budget: int = 10,
                  targets=None, eps=None, ctx: PrecisionContext | None = None):
    """Coefficients at arbitrary (n, h) from a phase-1 table.

    For a stretch of targets one height Y is chosen so that
    W(n Y/4N)^{-1} <= 10^budget, Q > truncation_M0(Y) and Q > |n|/4N.
    Each f_h(z_m) is rebuilt from the table at z_m* and the Fourier
    coefficient is read off directly.  Entries get err_bound eps / W and
    phase 2.  Returns a new table (input entries kept) and the amplifications.
    """
    ctx = ctx or table.ctx
    params = table.params
    if targets is None:
        if n_range is None:
            raise ValueError("give n_range or targets")
        targets = phase2_targets(params, int(n_range[0]), int(n_range[1]))
    targets = [(int(n), int(h) % (2 * params.N)) for n, h in targets]
    for n, h in targets:
        if n == 0 or not params.admissible(n, h):
            raise ValueError(f"target (n={n}, h={h}) violates the residue congruence")
    budget = int(digit_loss_budget)
    if budget < 1:
        raise ValueError("digit_loss_budget must be positive")
    if budget >= ctx.digits - 2:
        raise PrecisionError(
            f"digit_loss_budget {budget} leaves no correct digits at {ctx.digits} digits; "
            "rerun phase 1 at higher precision")
    if eps is None:
        eps = table.meta.get("eps", "1e-20")
    base = {k: e for k, e in table.entries.items() if e.phase == 1}
    out = CoefficientTable(params, table.principal, ctx, dict(table.entries), dict(table.meta))
    amps = {}
    with ctx:
        eps_b = big_real(eps)
        for batch in _phase2_batches(targets, params.N, budget):
            nmax = max(abs(n) for n, _h in batch)
            Yf = phase2_height(params.N, nmax, budget)
            if Yf < 1e-3:
                raise PrecisionError(
                    f"no admissible height for |n| = {nmax} within a budget of {budget} digits; "
                    "rerun phase 1 at higher precision")
            Y = big_real(repr(Yf))
            M = truncation_M0(params.N, params.k, table.principal.K, Yf, eps_b,
                              harmonic=params.harmonic)
            Q = max(M + max(10, math.ceil(M / 5)), nmax // params.four_n + 10)
            vals = _phase2_batch(table, base, batch, Y, Q)
            for (n, h), c in vals.items():
                w = kernel(params, n, Y)
                amp = (1 / w).mid()
                amps[(n, h)] = to_float(amp)
                out.set(n, h, c, (eps_b * amp).mid(), 2)
    out.meta.setdefault("phase2", []).append(
        {"targets": len(targets), "digit_loss_budget": budget})
    return out, amps


def _phase2_batch(table: CoefficientTable, base: dict, batch, Y: arb, Q: int) -> dict:
    params = table.params
    n2 = 2 * params.N
    samples = _samples(params, Y, Q)
    cols = sorted(base, key=lambda t: (t[1], t[0]))
    coeffs = [base[c].value for c in cols]
    col_h = [hp for _l, hp in cols]
    inv2q = (arb(1) / (2 * Q)).mid()
    # f_hat_{h'}(z_m*) for every m and h'
    fvals = []
    for s in samples:
        row = _expansion_row(params, s.z_star, cols, {})
        acc = _principal_at(table.principal, params, s.z_star)
        for c, v in enumerate(row):
            acc[col_h[c]] += coeffs[c] * v
        fvals.append([a.mid() for a in acc])
    # g_h(m) = J_m sum_h' rho_{hh'}(T_m) f_hat_{h'}(z_m*) / 2Q
    g = []
    for m, s in enumerate(samples):
        g.append([(s.J * sum((s.R[h][hp] * fvals[m][hp] for hp in range(n2)), acb(0))
                   * inv2q).mid() for h in range(n2)])
    out = {}
    by_h = {}
    for n, h in batch:
        by_h.setdefault(h, []).append(n)
    for h, ns in by_h.items():
        E = acb_mat(_horocycle_phases(ns, Q, params.N))
        col = acb_mat([[g[m][h]] for m in range(len(samples))])
        sums = (E * col).mid().entries()
        for n, sv in zip(ns, sums):
            a = table.principal.get(n, h)
            if not a.is_zero():
                sv = sv - a * holomorphic_w((arb(n) * Y / params.four_n).mid())
            out[(n, h)] = (sv / kernel(params, n, Y)).mid()
    return out
