"""Command-line front end.

Exit codes: 0 on success, 1 when a check fails (decode mismatch, failed
verification or audit), 2 on bad usage or an invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Optional, Sequence

from . import audit
from .errors import ConfigInvalid, PSDMMError
from .exponents import LITERATURE_R_STAR, Variant, baseline_thresholds, make_plan, verify_plan
from .simulator import ExperimentConfig, run_experiment, tradeoff_csv, tradeoff_curve

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

THRESHOLD_COLUMNS = ["p", "m", "n", "r_star", "kim_lee", "aliasgari", "yu", "replicated",
                     "mds", "mds_large_field", "improvement_pct"]
DEFAULT_CT_RC = 11


class UsageError(Exception):
    pass


def _scheme(text: str) -> Variant:
    try:
        return Variant.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _triple(text: str) -> tuple[int, int, int]:
    try:
        p, m, n = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected P,M,N, got {text!r}") from None
    return p, m, n


def _table(rows: list[dict], columns: Sequence[str]) -> str:
    cells = [[("-" if row.get(c) is None else str(row.get(c))) for c in columns] for row in rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells]
    return "\n".join(lines)


def _csv(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, output: Optional[str]):
    if output:
        with open(output, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


# run

def _run_config(args) -> ExperimentConfig:
    base = {}
    if args.config:
        try:
            with open(args.config) as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(base, dict):
            raise UsageError("config file must hold a JSON object")
    for key in ("scheme", "t", "s", "r", "p", "m", "n", "L", "N", "theta", "stragglers", "q",
                "seed", "straggler_seed"):
        value = getattr(args, key)
        if value is not None:
            base[key] = value
    if "seed" not in base and os.environ.get("PSDMM_SEED"):
        try:
            base["seed"] = int(os.environ["PSDMM_SEED"])
        except ValueError:
            raise UsageError(f"PSDMM_SEED must be an integer, got {os.environ['PSDMM_SEED']!r}") from None
    try:
        return ExperimentConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(str(exc)) from None


def cmd_run(args) -> int:
    config = _run_config(args)
    result = run_experiment(config)
    if args.format == "table":
        c = result.costs
        rows = [{"scheme": config.scheme.value, "match": result.match, "R_c": c.recovery_threshold,
                 "servers_used": c.servers_used, "upload": c.upload, "download": c.download,
                 "storage": c.storage_per_server, "dropped": result.dropped_servers}]
        _emit(_table(rows, list(rows[0])), args.output)
    else:
        _emit(result.to_json(include_matrices=not args.no_matrices,
                             include_transcript=args.transcript), args.output)
    return EXIT_OK if result.match else EXIT_FAIL


# thresholds

def _read_r_star(path: str) -> dict[tuple[int, int, int], int]:
    table = {}
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"p", "m", "n", "r_star"} <= set(reader.fieldnames):
                raise UsageError(f"{path}: header must contain p,m,n,r_star")
            for line, row in enumerate(reader, start=2):
                try:
                    key = (int(row["p"]), int(row["m"]), int(row["n"]))
                    table[key] = int(row["r_star"])
                except (TypeError, ValueError):
                    raise UsageError(f"{path}:{line}: malformed row {row}") from None
                if min(key) < 1 or table[key] < 1:
                    raise UsageError(f"{path}:{line}: values must be positive")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    return table


def cmd_thresholds(args) -> int:
    r_star = dict(LITERATURE_R_STAR) if args.literature else {}
    if args.r_star_file:
        r_star.update(_read_r_star(args.r_star_file))
    triples = list(args.pmn or [])
    if args.p or args.m or args.n:
        triples.append((args.p or 1, args.m or 1, args.n or 1))
    if not triples:
        triples = sorted(r_star) or [(1, 1, 1)]
    if args.r_star is not None:
        if len(triples) != 1:
            raise UsageError("--r-star applies to a single (p, m, n)")
        r_star[triples[0]] = args.r_star
    rows = [baseline_thresholds(*t, r_star=r_star.get(t)).to_dict() for t in triples]
    if args.format == "json":
        text = json.dumps(rows, indent=2)
    elif args.format == "csv":
        text = _csv(rows, THRESHOLD_COLUMNS).rstrip("\n")
    else:
        text = _table(rows, THRESHOLD_COLUMNS)
    _emit(text, args.output)
    return EXIT_OK


# tradeoff

def _default_grid(scheme: str, rc: int):
    if scheme == "chang-tandon":
        return [(m, rc) for m in range(1, rc)]
    return [(p, m, n) for p in range(1, 4) for m in range(1, 4) for n in range(1, 4)]


def cmd_tradeoff(args) -> int:
    scheme = args.scheme.strip().lower()
    if scheme != "chang-tandon" and scheme not in ("new", "replicated"):
        try:
            Variant.parse(scheme)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if args.grid:
        try:
            grid = [tuple(int(v) for v in item.split(",")) for item in args.grid.split(";")]
        except ValueError:
            raise UsageError(f"bad grid {args.grid!r}") from None
        width = 2 if scheme == "chang-tandon" else 3
        if any(len(g) != width or min(g) < 1 for g in grid):
            raise UsageError(f"grid entries for {scheme} need {width} positive integers")
    else:
        grid = _default_grid(scheme, args.rc)
    rows = tradeoff_curve(scheme, args.L, grid)
    text = json.dumps(rows, indent=2) if args.format == "json" else tradeoff_csv(rows).rstrip("\n")
    _emit(text, args.output)
    return EXIT_OK


# verify

def _parse_perturbation(text: str, plan) -> tuple[str, tuple[int, ...], int]:
    """``KIND:I,J=VALUE`` or ``default`` (alpha[0][0] pushed onto gamma)."""
    if text == "default":
        return "alpha", (0, 0), plan.gamma
    try:
        target, value = text.split("=")
        kind, _, index = target.partition(":")
        idx = tuple(int(v) for v in index.split(",")) if index else ()
        return kind.strip(), idx, int(value)
    except ValueError:
        raise UsageError(f"bad perturbation {text!r}; use KIND:I,J=VALUE") from None


def _grid_text(name: str, grid) -> str:
    return f"{name}:\n" + "\n".join("  " + " ".join(f"{v:>4}" for v in row) for row in grid)


def cmd_verify(args) -> int:
    try:
        plan = make_plan(args.variant, args.p, args.m, args.n)
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from None
    if args.perturb:
        kind, idx, value = _parse_perturbation(args.perturb, plan)
        try:
            plan = plan.with_exponent(kind, idx, value)
        except (ValueError, IndexError, KeyError) as exc:
            raise UsageError(f"cannot apply perturbation: {exc}") from None
    report = verify_plan(plan)
    if args.format == "json":
        _emit(json.dumps({"plan": plan.to_dict(), "report": report.to_dict()}, indent=2), args.output)
    else:
        parts = [
            f"variant {plan.variant.value}  (p, m, n) = ({plan.p}, {plan.m}, {plan.n})",
            _grid_text("alpha", plan.alpha),
            _grid_text("beta", plan.beta),
            f"gamma: {plan.gamma}",
            f"useful U: {list(plan.useful)}",
            f"interference I: {list(plan.interference)}",
            f"degree: {plan.degree}  recovery threshold: {plan.recovery_threshold}  "
            f"distinct terms: {plan.distinct_terms}",
            f"row collapse: {report.row_collapse}  disjoint U/I: {report.disjoint}  "
            f"threshold: {report.threshold}",
        ]
        parts += [f"note: {note}" for note in report.notes]
        parts.append("PASS" if report.passed else "FAIL")
        _emit("\n".join(parts), args.output)
    return EXIT_OK if report.passed else EXIT_FAIL


# audit

def cmd_audit(args) -> int:
    seed0 = args.seed if args.seed is not None else int(os.environ.get("PSDMM_SEED", 0))
    reports, expect = [], []
    for scheme in args.scheme:
        for seed in range(seed0, seed0 + args.seeds):
            common = dict(samples=args.samples, q_small=args.q, seed=seed)
            reports.append(audit.share_uniformity_test(scheme, **common))
            reports.append(audit.query_indistinguishability_test(scheme, **common))
            expect += [True, True]
            if args.controls:
                reports.append(audit.share_uniformity_test(scheme, mask=False, **common))
                reports.append(audit.query_indistinguishability_test(scheme, skew=True, **common))
                expect += [False, False]
    ok = all(r.passed == e for r, e in zip(reports, expect))
    if args.format == "json":
        _emit(json.dumps({"ok": ok, "reports": [r.to_dict() for r in reports]}, indent=2), args.output)
    else:
        rows = [dict(r.to_dict(), expected="pass" if e else "fail",
                     verdict="ok" if r.passed == e else "UNEXPECTED")
                for r, e in zip(reports, expect)]
        for row in rows:
            row["statistic"] = f"{row['statistic']:.4g}"
            row["p_value"] = None if row["p_value"] is None else f"{row['p_value']:.4g}"
        cols = ["scheme", "test_name", "sample_count", "statistic", "p_value", "threshold",
                "passed", "expected", "verdict"]
        _emit(_table(rows, cols), args.output)
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psdmm", description=__doc__.splitlines()[0],
                                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats, default):
        p.add_argument("--format", choices=formats, default=default)
        p.add_argument("-o", "--output", help="write to this file instead of stdout")

    defaults = ExperimentConfig()
    run = sub.add_parser("run", help="run one experiment end to end",
                         formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    run.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
    run.add_argument("--scheme", type=_scheme,
                     help=f"replicated | mds (alias mds5) | mds-large-field (alias mds6) "
                          f"[{defaults.scheme.value}]")
    for flag, help_text in (("t", "rows of A"), ("s", "cols of A / rows of B"), ("r", "cols of B"),
                            ("p", "inner partition"), ("m", "row partition of A"),
                            ("n", "column partition of B")):
        run.add_argument(f"-{flag}", type=int, help=f"{help_text} [{getattr(defaults, flag)}]")
    run.add_argument("-L", "--L", dest="L", type=int, help=f"library size [{defaults.L}]")
    run.add_argument("-N", "--N", dest="N", type=int, help=f"number of servers [{defaults.N}]")
    run.add_argument("--theta", type=int, help=f"desired library index [{defaults.theta}]")
    run.add_argument("--stragglers", type=int, help=f"servers that never answer [{defaults.stragglers}]")
    run.add_argument("--q", type=int, help="prime modulus [2**61 - 1]")
    run.add_argument("--seed", type=int, help="experiment seed [$PSDMM_SEED, else 0]")
    run.add_argument("--straggler-seed", dest="straggler_seed", type=int,
                     help="separate seed for the straggler choice [--seed]")
    run.add_argument("--no-matrices", action="store_true", help="omit the decoded matrix from JSON")
    run.add_argument("--transcript", action="store_true", help="include the protocol transcript")
    common(run, ["json", "table"], "json")
    run.set_defaults(func=cmd_run)

    thr = sub.add_parser("thresholds", help="recovery thresholds against the baselines",
                         formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    thr.add_argument("-p", type=int)
    thr.add_argument("-m", type=int)
    thr.add_argument("-n", type=int)
    thr.add_argument("--pmn", type=_triple, action="append", help="P,M,N (repeatable)")
    thr.add_argument("--r-star", dest="r_star", type=int, help="bilinear complexity for one (p, m, n)")
    thr.add_argument("--r-star-file", dest="r_star_file", help="CSV with columns p,m,n,r_star")
    thr.add_argument("--literature", action="store_true",
                     help="use the built-in table of published bilinear complexities")
    common(thr, ["table", "json", "csv"], "table")
    thr.set_defaults(func=cmd_thresholds)

    tr = sub.add_parser("tradeoff", help="normalized upload/download curves (CSV)",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    tr.add_argument("--scheme", default="new",
                    help="new | replicated | mds | mds-large-field | chang-tandon")
    tr.add_argument("-L", "--L", dest="L", type=int, default=2)
    tr.add_argument("--grid", help="';'-separated P,M,N triples (or M,RC pairs for chang-tandon); "
                                   "default [1,3]^3 or m = 1..RC-1")
    tr.add_argument("--rc", type=int, default=DEFAULT_CT_RC, help="R_c for the default chang-tandon grid")
    common(tr, ["csv", "json"], "csv")
    tr.set_defaults(func=cmd_tradeoff)

    ver = sub.add_parser("verify", help="check an exponent plan",
                         formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    ver.add_argument("--variant", type=_scheme, default=Variant.REPLICATED)
    ver.add_argument("-p", type=int, default=2)
    ver.add_argument("-m", type=int, default=2)
    ver.add_argument("-n", type=int, default=2)
    ver.add_argument("--perturb", nargs="?", const="default",
                     help="change one exponent before checking: KIND:I,J=VALUE with KIND in "
                          "alpha|beta|gamma; bare flag moves alpha[0][0] onto gamma")
    common(ver, ["table", "json"], "table")
    ver.set_defaults(func=cmd_verify)

    aud = sub.add_parser("audit", help="statistical privacy and security audits",
                         formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    aud.add_argument("--scheme", type=_scheme, action="append",
                     help="repeatable; default both replicated and mds")
    aud.add_argument("--samples", type=int, default=audit.DEFAULT_SAMPLES,
                     help="runs per test; the TV threshold assumes about 1e5")
    aud.add_argument("--q", type=int, default=audit.DEFAULT_Q)
    aud.add_argument("--seed", type=int, help="first seed [$PSDMM_SEED, else 0]")
    aud.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    aud.add_argument("--controls", action="store_true", help="also run the negative controls")
    common(aud, ["table", "json"], "table")
    aud.set_defaults(func=cmd_audit)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "audit" and not args.scheme:
        args.scheme = [Variant.REPLICATED, Variant.MDS]
    try:
        return args.func(args)
    except (ConfigInvalid, UsageError) as exc:
        print(f"psdmm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PSDMMError as exc:
        print(f"psdmm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
