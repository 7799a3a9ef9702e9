"""Command line driver: phase1, phase2, check and tables subcommands.

Exit status is 0 on success, 2 for invalid input and 3 for numerical
failures (singular systems, precision faults).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import harness
from .bigarith import PrecisionError, make_context, to_decimal
from .maassform import (CoefficientTable, HarmonicParams, PrincipalPart, delta_to_index,
                        index_to_delta, warn_advisories)
from .solver import SolveJob, extend_phase2, solve_phase1

log = logging.getLogger("weilmaass")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class JobConfig:
    path: Path
    params: HarmonicParams
    principal: PrincipalPart
    job: SolveJob
    phase2: dict = field(default_factory=dict)
    lvalues_csv: Path | None = None
    checks: dict = field(default_factory=dict)
    output_dir: Path | None = None

    @property
    def stem(self) -> str:
        return self.path.stem

    def out_dir(self, override=None) -> Path:
        if override:
            return Path(override)
        if self.output_dir is not None:
            return self.output_dir
        return Path("runs") / self.stem

    @classmethod
    def load(cls, path) -> "JobConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})")
        return cls.from_dict(raw, path)

    @classmethod
    def from_dict(cls, raw: dict, path: Path) -> "JobConfig":
        known = {"N", "weight", "rep", "mode", "principal_part", "eps", "Y", "Q", "M0",
                 "precision_digits", "phase2", "lvalues_csv", "checks", "output_dir",
                 "description"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("N", "principal_part", "eps"):
            if key not in raw:
                raise ConfigError(f"missing config key {key!r}")
        try:
            params = HarmonicParams.from_json(raw)
            ctx = make_context(int(raw.get("precision_digits", 28)))
            principal = PrincipalPart.from_json(params, raw["principal_part"], ctx)
            job = SolveJob.create(params, principal, str(raw["eps"]), str(raw.get("Y", "0.5")),
                                  ctx, M0=int(raw.get("M0", 0)), Q=int(raw.get("Q", 0)))
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        phase2 = dict(raw.get("phase2", {}))
        if phase2:
            if not set(phase2) <= {"from", "to", "digit_loss_budget"}:
                raise ConfigError(f"unknown phase2 keys: {sorted(set(phase2))}")
            if "from" in phase2 and "to" in phase2 and int(phase2["from"]) > int(phase2["to"]):
                raise ConfigError("phase2.from must not exceed phase2.to")
            if int(phase2.get("digit_loss_budget", 10)) < 1:
                raise ConfigError("phase2.digit_loss_budget must be positive")
        lv = raw.get("lvalues_csv")
        lv = (path.parent / lv) if lv else None
        out = raw.get("output_dir")
        return cls(path, params, principal, job, phase2, lv, dict(raw.get("checks", {})),
                   (path.parent / out) if out else None)


# ---------------------------------------------------------------------------
# persistence


def table_path(out: Path) -> Path:
    return out / "table.json"


def save_table(table: CoefficientTable, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    table_path(out).write_text(json.dumps(table.to_json(), indent=1))
    with open(out / "coefficients.csv", "w", newline="") as fh:
        write_coefficients_csv(table, fh)


def load_table(out: Path) -> CoefficientTable:
    p = table_path(out)
    if not p.exists():
        raise ConfigError(f"no persisted table at {p}; run phase1 first")
    return CoefficientTable.from_json(json.loads(p.read_text()))


def write_coefficients_csv(table: CoefficientTable, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "h", "Delta", "re", "im", "err_bound", "phase"])
    for n, h in table.sorted_keys():
        e = table.entries[(n, h)]
        w.writerow([n, h, index_to_delta(table.params, n, h), to_decimal(e.value.real, table.ctx),
                    to_decimal(e.value.imag, table.ctx), e.err_bound.mid().str(6, radius=False),
                    e.phase])


def _merge_report(out: Path, update: dict) -> dict:
    p = out / "report.json"
    data = json.loads(p.read_text()) if p.exists() else {}
    data.update(update)
    out.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(data, indent=1))
    return data


# ---------------------------------------------------------------------------
# subcommands


def cmd_phase1(cfg: JobConfig, args) -> int:
    warn_advisories(cfg.params)
    job = cfg.job
    log.info("phase 1: N=%d k=%s %s, M0=%d Q=%d |D|~%d, %d bits", cfg.params.N, cfg.params.k,
             "rho_bar" if cfg.params.conjugated else "rho", job.M0, job.Q,
             4 * cfg.params.N * job.M0, job.ctx.bits)
    table, report = solve_phase1(job)
    out = cfg.out_dir(args.out)
    save_table(table, out)
    _merge_report(out, {"config": str(cfg.path), "M0": job.M0, "Q": job.Q,
                        **report.to_json(), "checks": {}})
    print(f"phase1: {len(table.entries)} coefficients, coeff_bound "
          f"{report.to_json()['coeff_bound']} -> {out}")
    return EXIT_OK


def cmd_phase2(cfg: JobConfig, args) -> int:
    out = cfg.out_dir(args.out)
    table = load_table(out)
    lo = args.from_ if args.from_ is not None else cfg.phase2.get("from")
    hi = args.to if args.to is not None else cfg.phase2.get("to")
    if lo is None or hi is None:
        raise ConfigError("phase2 needs --from and --to (or phase2.from/to in the config)")
    lo, hi = int(lo), int(hi)
    if lo > hi:
        raise ConfigError(f"--from {lo} exceeds --to {hi}")
    budget = args.budget or int(cfg.phase2.get("digit_loss_budget", 10))
    t0 = time.time()
    new, amps = extend_phase2(table, (lo, hi), budget, eps=str(table.meta.get("eps")))
    save_table(new, out)
    worst = max(amps.values()) if amps else 0.0
    _merge_report(out, {"phase2_last": {"from": lo, "to": hi, "digit_loss_budget": budget,
                                        "count": len(amps), "max_amplification": worst,
                                        "seconds": round(time.time() - t0, 1)}})
    print(f"phase2: {len(amps)} coefficients for {lo} <= n <= {hi} -> {out}")
    return EXIT_OK


def cmd_check(cfg: JobConfig, args) -> int:
    out = cfg.out_dir(args.out)
    table = load_table(out)
    checks = cfg.checks
    results = {}
    # samples must sit where the truncated series is accurate; by default
    # that is the solve height
    Y = str(checks.get("automorphy_Y", table.meta.get("Y", "0.5")))
    samples = harness.random_automorphy_samples(int(checks.get("automorphy_samples", 20)),
                                                float(Y), seed=int(checks.get("seed", 0)))
    results["automorphy_residual"] = harness.automorphy_residual(table, samples, Y=Y)
    if "cminus_normalizer" in checks and cfg.params.harmonic:
        results["cminus_ratio"] = harness.cminus_ratio_report(
            table, int(checks["cminus_normalizer"]), float(checks.get("cminus_tol", 1e-8)))
    if "y_alt" in checks:
        job2 = cfg.job.with_Y(str(checks["y_alt"]))
        other, _ = solve_phase1(job2)
        results["y_independence"] = harness.compare_tables(
            table, other, float(checks.get("y_threshold", 10.0 ** (-table.ctx.digits / 2))),
            n_max=int(checks.get("y_compare_n_max", harness.trusted_n_max(table))))
    phase2_keys = [k for k, e in table.entries.items() if e.phase == 2 and k[0] > 0]
    if phase2_keys:
        results["integer_proximity"] = harness.integer_proximity(table, sorted(phase2_keys))
    if cfg.lvalues_csv is not None:
        recs = harness.load_lvalues(cfg.lvalues_csv)
        results["lvalue_dichotomy"] = harness.lvalue_dichotomy(
            table, recs, float(checks.get("vanishing_threshold", harness.VANISHING_THRESHOLD)))
    summary = {k: r.to_json() for k, r in results.items()}
    _merge_report(out, {"checks": summary})
    ok = True
    for name, r in results.items():
        print(f"{name}: {'pass' if r.passed else 'FAIL'} (measured {r.measured:.3e}, "
              f"threshold {r.threshold:.3e}) {r.note}")
        ok = ok and r.passed
    return EXIT_OK if ok or not args.strict else EXIT_NUMERIC


def table_rows(table: CoefficientTable, lvalues=None, lo=None, hi=None) -> list[dict]:
    """Rows Delta, c(Delta), optional L-value and nearest-integer distance, sorted by Delta.

    Only holomorphic coefficients stored at their canonical label are listed.
    """
    lv = {r.Delta: r.value for r in (lvalues or [])}
    rows = []
    for (n, h), e in table.entries.items():
        if n <= 0:
            continue
        d = index_to_delta(table.params, n, h)
        if delta_to_index(table.params, d) != (n, h):
            continue
        if lo is not None and abs(d) < lo or hi is not None and abs(d) > hi:
            continue
        k, dist = harness.nearest_integer(e.value.real)
        rows.append({"Delta": d, "c_plus": e.value.real.mid().str(table.ctx.digits, radius=False),
                     "lvalue": lv.get(d, ""), "nearest_int_distance": f"{dist:.2e}",
                     "phase": e.phase})
    rows.sort(key=lambda r: (abs(r["Delta"]), r["Delta"]))
    return rows


def cmd_tables(cfg: JobConfig, args) -> int:
    out = cfg.out_dir(args.out)
    table = load_table(out)
    recs = harness.load_lvalues(cfg.lvalues_csv) if cfg.lvalues_csv is not None else None
    rows = table_rows(table, recs, args.from_, args.to)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["Delta", "c_plus", "lvalue", "nearest_int_distance",
                                        "phase"], lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    text = buf.getvalue()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weilmaass", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="job configuration (JSON)")
        sp.add_argument("--out", help="output directory (default: runs/<config name>)")

    common(sub.add_parser("phase1", help="solve the linear system and persist the table"))
    sp = sub.add_parser("phase2", help="extend a persisted table")
    common(sp)
    sp.add_argument("--from", dest="from_", type=int)
    sp.add_argument("--to", type=int)
    sp.add_argument("--budget", type=int, help="digit loss budget")
    sp = sub.add_parser("check", help="run the a-posteriori checks")
    common(sp)
    sp.add_argument("--strict", action="store_true", help="exit 3 if a check fails")
    sp = sub.add_parser("tables", help="print coefficient tables as CSV")
    common(sp)
    sp.add_argument("--from", dest="from_", type=int, help="smallest |Delta|")
    sp.add_argument("--to", type=int, help="largest |Delta|")
    sp.add_argument("-o", "--output", help="write to a file instead of stdout")
    return p


COMMANDS = {"phase1": cmd_phase1, "phase2": cmd_phase2, "check": cmd_check, "tables": cmd_tables}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s")
    try:
        cfg = JobConfig.load(args.config)
        return COMMANDS[args.command](cfg, args)
    except (PrecisionError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
