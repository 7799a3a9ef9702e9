"""A-posteriori accuracy checks on computed coefficient tables."""
from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass, field

from flint import acb, arb

from .bigarith import to_float
from .fundom import automorphy_j2k
from .maassform import CoefficientTable, delta_to_index, evaluate_truncated, index_to_delta
from .solver import SolveJob, solve_phase1
from .weilrep import MetaplecticElement, rho_evaluate

VANISHING_THRESHOLD = 1e-10


@dataclass
class CheckReport:
    name: str
    passed: bool
    measured: float = 0.0
    threshold: float = 0.0
    details: list = field(default_factory=list)
    note: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "measured": self.measured,
                "threshold": self.threshold, "note": self.note, "details": self.details}


def _abs(z) -> float:
    return to_float(abs(acb(z)))


# ---------------------------------------------------------------------------
# Y-independence


def compare_tables(t1: CoefficientTable, t2: CoefficientTable, threshold: float,
                   name: str = "y_independence", n_max: int | None = None) -> CheckReport:
    """Max |difference| over the common entries with |n| <= n_max (all if None).

    The maximum over every common entry is kept in the note either way.
    """
    common = sorted(set(t1.entries) & set(t2.entries), key=lambda t: (t[1], t[0]))
    worst, where, full = 0.0, None, 0.0
    for key in common:
        d = _abs(t1.entries[key].value - t2.entries[key].value)
        full = max(full, d)
        if n_max is not None and abs(key[0]) > n_max:
            continue
        if where is None or d > worst:
            worst, where = d, key
    passed = where is not None and worst <= threshold
    details = [] if passed or where is None else [
        {"n": where[0], "h": where[1], "discrepancy": worst}]
    scope = "all entries" if n_max is None else f"|n| <= {n_max}"
    note = (f"{scope}: max discrepancy at (n, h) = {where}; over all common entries {full:.2e}"
            if where else "no common entries")
    return CheckReport(name, passed, worst, threshold, details, note)


def trusted_n_max(table: CoefficientTable) -> int:
    """4N * floor(M0 / 2): the lower half of the truncation range.

    Near |n| = 4N M0 a coefficient is only fixed to about eps e^{2 pi |n| Y / 4N}
    by the linear system, so comparisons there say nothing about the method.
    """
    return table.params.four_n * (int(table.meta.get("M0", 2)) // 2)


def y_independence(job: SolveJob, Y1, Y2, threshold: float | None = None,
                   tables=None, n_max: int | None = -1) -> CheckReport:
    """Solve at two heights and compare; default threshold 10^(-digits/2).

    ``n_max = -1`` selects :func:`trusted_n_max`; ``None`` compares everything.
    """
    if threshold is None:
        threshold = 10.0 ** (-job.ctx.digits / 2)
    if tables is None:
        t1, _ = solve_phase1(job.with_Y(Y1))
        t2 = t1 if str(Y1) == str(Y2) else solve_phase1(job.with_Y(Y2))[0]
    else:
        t1, t2 = tables
    if n_max == -1:
        n_max = job.params.four_n * (job.M0 // 2)
    return compare_tables(t1, t2, threshold, n_max=n_max)


# ---------------------------------------------------------------------------
# c^- ratios and integers


def nearest_integer(x: float | arb) -> tuple[int, float]:
    """Nearest integer with ties to even, and the distance."""
    xr = arb(x).mid() if not isinstance(x, float) else arb(repr(x))
    fl = int(xr.floor().unique_fmpz())
    frac = to_float((xr - fl).mid())
    if frac > 0.5 or (frac == 0.5 and fl % 2 == 1):
        fl += 1
    return fl, abs(to_float((xr - fl).mid()))


def cminus_ratio_report(table: CoefficientTable, normalizer, tol: float = 1e-8,
                        expected: dict | None = None) -> CheckReport:
    """sqrt|Delta| c^-(Delta) / (sqrt|Delta0| c^-(Delta0)) for the stored c^- entries.

    ``normalizer`` is a discriminant label (int) or an index (n, h).
    """
    params = table.params
    if isinstance(normalizer, tuple):
        n0, h0 = normalizer
        d0 = index_to_delta(params, n0, h0)
    else:
        d0 = int(normalizer)
        n0, h0 = delta_to_index(params, d0)
    with table.ctx:
        c0 = table.value(n0, h0)
        if c0.is_zero() or _abs(c0) == 0.0:
            raise ValueError("normalizing coefficient is zero")
        den = (arb(abs(d0)).sqrt() * c0).mid()
        rows, worst = [], 0.0
        deltas = expected.keys() if expected is not None else sorted(
            {index_to_delta(params, n, h) for (n, h) in table.entries if n < 0}, key=abs)
        for d in deltas:
            n, h = delta_to_index(params, d)
            if (n, h) not in table.entries:
                continue
            r = (arb(abs(d)).sqrt() * table.value(n, h) / den).mid()
            k, dist = nearest_integer(r.real)
            dist = math.hypot(dist, to_float(r.imag))
            row = {"Delta": d, "ratio": to_float(r.real), "nearest": k, "distance": dist}
            if expected is not None:
                row["expected"] = expected[d]
                dist = math.hypot(to_float(r.real - expected[d]), to_float(r.imag))
                row["error"] = dist
            worst = max(worst, dist)
            rows.append(row)
    return CheckReport("cminus_ratio", worst <= tol and bool(rows), worst, tol, rows,
                       f"normalized by Delta = {d0}")


def integer_proximity(table: CoefficientTable, indices, threshold: float | None = None) -> CheckReport:
    """Nearest integers and distances; flags 'algebraic candidate' entries.

    An entry is a candidate when its distance to the nearest integer is below
    min(err_bound, 10^(-digits/3)).  Exact ties (distance 1/2) never qualify.
    """
    cap = 10.0 ** (-table.ctx.digits / 3) if threshold is None else threshold
    rows = []
    for n, h in indices:
        e = table.entries[(n, h % (2 * table.params.N))]
        k, dist = nearest_integer(e.value.real)
        dist = math.hypot(dist, to_float(e.value.imag))
        lim = min(to_float(e.err_bound), cap)
        rows.append({"n": n, "h": h, "Delta": index_to_delta(table.params, n, h),
                     "nearest": k, "distance": dist,
                     "candidate": bool(dist < lim and dist != 0.5)})
    return CheckReport("integer_proximity", True, 0.0, cap, rows)


# ---------------------------------------------------------------------------
# automorphy


def automorphy_residual(table: CoefficientTable, samples, Y=None, eps=None) -> CheckReport:
    """||f(A tau) - phi_A(tau)^{2k} rho(A) f(tau)||^2 against 2 eps Y^{-2k}."""
    params, ctx = table.params, table.ctx
    with ctx:
        Yb = arb(str(Y if Y is not None else table.meta.get("Y", "0.5"))).mid()
        epsb = arb(str(eps if eps is not None else table.meta.get("eps", "1e-20"))).mid()
        k = params.k
        bound = to_float(2 * epsb * (Yb.log() * (-2 * arb(k.numerator) / k.denominator)).exp())
        rows, worst, ok = [], 0.0, True
        for tau, A in samples:
            if not isinstance(A, MetaplecticElement):
                A = MetaplecticElement(*A, 1)
            tau = acb(tau).mid()
            Atau = A.act(tau)
            if not (tau.imag >= Yb and Atau.imag >= Yb):
                raise ValueError(f"sample {tau} with {A.matrix} violates the height bound")
            lhs = evaluate_truncated(table, Atau)
            f = evaluate_truncated(table, tau)
            J = automorphy_j2k(A, tau, k)
            rhs = rho_evaluate(A, params.N, params.conjugated).apply(f)
            r2 = sum(_abs(l - J * r) ** 2 for l, r in zip(lhs, rhs))
            worst = max(worst, r2)
            ok = ok and r2 <= bound
            rows.append({"tau": [to_float(tau.real), to_float(tau.imag)],
                         "A": list(A.matrix), "residual2": r2})
    return CheckReport("automorphy_residual", ok, worst, bound, rows)


def random_automorphy_samples(count: int, Y: float = 0.5, seed: int = 0):
    """(tau, A) pairs with Im tau >= Y and Im A tau >= Y, A non-trivial.

    A = (a, ad - 1; 1, d) sends tau = -d + delta + iy to a point of height
    y / (delta^2 + y^2), which stays above Y when delta^2 + y^2 <= y / Y.
    """
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        y = rng.uniform(Y, 1 / Y)
        room = y / Y - y * y
        if room <= 0:
            continue
        delta = rng.uniform(-1, 1) * math.sqrt(room) * 0.95
        d = rng.randint(-3, 3)
        a = rng.randint(-3, 3)
        A = MetaplecticElement(a, a * d - 1, 1, d, 1)
        tau = acb(repr(-d + delta), repr(y))
        out.append((tau, A))
    return out


# ---------------------------------------------------------------------------
# L-value records


@dataclass(frozen=True)
class LValueRecord:
    Delta: int
    value: str
    source: str

    def vanishes(self, threshold: float = VANISHING_THRESHOLD) -> bool:
        return abs(float(self.value)) < threshold


def load_lvalues(path) -> list[LValueRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["Delta", "value", "source"]:
            raise ValueError(f"{path}: expected header Delta,value,source")
        out = []
        for row in reader:
            float(row["value"])
            out.append(LValueRecord(int(row["Delta"]), row["value"].strip(), row["source"].strip()))
    return out


def lvalue_dichotomy(table: CoefficientTable, records, threshold: float = VANISHING_THRESHOLD,
                     integer_threshold: float | None = None) -> CheckReport:
    """Compare 'vanishing L-value' against 'coefficient is an integer candidate'.

    Passes when the flagged set equals the vanishing set among records whose
    discriminant is present in the table.
    """
    idx = []
    for r in records:
        try:
            key = delta_to_index(table.params, r.Delta)
        except ValueError:
            continue
        if key in table.entries:
            idx.append((r, key))
    prox = integer_proximity(table, [k for _r, k in idx], integer_threshold)
    rows = []
    for (r, _key), p in zip(idx, prox.details):
        rows.append({"Delta": r.Delta, "lvalue": r.value, "vanishing": r.vanishes(threshold),
                     "candidate": p["candidate"], "nearest": p["nearest"], "distance": p["distance"]})
    vanish = {r["Delta"] for r in rows if r["vanishing"]}
    flagged = {r["Delta"] for r in rows if r["candidate"]}
    return CheckReport("lvalue_dichotomy", vanish == flagged and bool(rows), float(len(flagged)),
                       threshold, rows,
                       f"vanishing={sorted(vanish)} flagged={sorted(flagged)}")
