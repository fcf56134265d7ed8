"""Command-line front end.

Exit codes: 0 success, 1 audit or bound failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import rng
from .audit import (
    BOUND_LABELS,
    acceptance_probabilities,
    audit_truthfulness,
    expected_payments,
    meets_bound,
    monte_carlo,
)
from .knapsack import OracleSizeError, fractional_opt, integral_opt, oracle_limit
from .mechanisms import MechanismKind, run
from .model import (
    Instance,
    InstanceError,
    gen_lower_bound,
    gen_random,
    normalize,
    parse_bundle,
    random_suite,
    serialize_instance,
    to_scalar,
    validate_bids,
)
from .pruning import EmptyPruneError, prune

KINDS = [k.value for k in MechanismKind]


class UsageError(Exception):
    pass


def fmt_decimal(x: Fraction, digits: int) -> str:
    """Round-half-even decimal rendering of an exact rational."""
    scaled = round(x * 10 ** digits)
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    if digits == 0:
        return f"{sign}{scaled}"
    whole, frac = divmod(scaled, 10 ** digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def _read_instance(path: str) -> tuple[Instance, dict | None]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc
    inst, bids = parse_bundle(text)
    return normalize(inst), bids


def _read_bids(path: str, inst: Instance) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed bids JSON: {exc}") from exc
    if isinstance(doc, dict):
        doc = doc.get("bids")
    if not isinstance(doc, list):
        raise InstanceError("bids file must hold a JSON array (or an object with 'bids')")
    if len(doc) == len(inst):
        return validate_bids(inst, dict(zip(inst.ids, (to_scalar(b) for b in doc))))
    raise InstanceError(f"expected {len(inst)} bids, got {len(doc)}")


def _emit(text: str, path: str | None):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> int:
    if args.lower_bound:
        inst, _ = gen_lower_bound(args.epsilon, args.budget)
        text = serialize_instance(inst)
    else:
        if args.random is None:
            raise UsageError("gen needs --random N or --lower-bound")
        inst = gen_random(args.random, args.seed, value_range=tuple(args.value_range),
                          cost_range=tuple(args.cost_range or ("0", args.budget)),
                          budget=args.budget, denominator=args.denominator)
        text = serialize_instance(inst)
    _emit(text, args.output)
    return 0


def cmd_solve(args) -> int:
    inst, _ = _read_instance(args.instance)
    frac = fractional_opt(inst)
    print(f"fopt = {frac.fopt}")
    print("x = " + " ".join(f"{i}:{x}" for i, x in frac.allocation.items()))
    try:
        sol = integral_opt(inst)
    except OracleSizeError as exc:
        print(f"opt = n/a ({exc})")
    else:
        print(f"opt = {sol.opt}")
        print("chosen = " + " ".join(map(str, sol.chosen)))
    return 0


def cmd_prune(args) -> int:
    inst, bundled = _read_instance(args.instance)
    bids = _read_bids(args.bids, inst) if args.bids else (bundled or inst.costs)
    try:
        p = prune(inst.values, bids, inst.budget)
    except EmptyPruneError as exc:
        print(f"S = {{}} ({exc})")
        return 0
    print(f"r = {p.r}")
    print("S = " + " ".join(map(str, p.kept)))
    print(f"i* = {p.star}")
    print("T = " + " ".join(map(str, p.rest)))
    print(f"v(S) = {p.v_kept}")
    print(f"v(T) = {p.v_rest}")
    print("discarded = " + " ".join(map(str, p.discarded)))
    return 0


def cmd_run(args) -> int:
    kind = MechanismKind.parse(args.mechanism)
    inst, bundled = _read_instance(args.instance)
    bids = _read_bids(args.bids, inst) if args.bids else (bundled or inst.costs)
    out = run(kind, inst, bids, args.seed)
    fopt = fractional_opt(inst).fopt
    print("winners = " + " ".join(map(str, out.winners)))
    print("payments = " + " ".join(f"{i}:{x}" for i, x in out.payments.items()))
    print(f"alg = {out.value}")
    print(f"budget_used = {out.total_payment}")
    alg = out.value
    if kind is MechanismKind.RANDOMIZED:
        try:
            p = prune(inst.values, bids, inst.budget)
            alg = acceptance_probabilities(p, bids, inst.budget).expected_value
        except EmptyPruneError:
            alg = Fraction(0)
        print(f"expected_alg = {alg}")
    print(f"fopt = {fopt}")
    print(f"ratio_fopt = {fopt / alg if alg else 'inf'}")
    return 0


def _parse_agents(text: str, inst: Instance) -> list[int]:
    if text == "all":
        return list(inst.ids)
    try:
        agents = [int(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise UsageError(f"--agents must be 'all' or a comma list of ids, got {text!r}")
    unknown = set(agents) - set(inst.ids)
    if unknown:
        raise UsageError(f"unknown agents {sorted(unknown)}")
    return agents


def _parse_seeds(text: str) -> list[int]:
    parts = [s for s in text.split(",") if s.strip()]
    try:
        if len(parts) == 1:
            return list(range(int(parts[0])))
        return [int(s) for s in parts]
    except ValueError:
        raise UsageError(f"--seeds must be a count or a comma list, got {text!r}")


def cmd_audit(args) -> int:
    kind = MechanismKind.parse(args.mechanism)
    inst, _ = _read_instance(args.instance)
    agents = _parse_agents(args.agents, inst)
    seeds = _parse_seeds(args.seeds)
    per_agent = {}
    passed = True
    total_points = 0
    for a in agents:
        rep = audit_truthfulness(kind, inst, a, seeds=seeds)
        per_agent[str(a)] = rep.to_dict()
        passed &= rep.passed
        total_points += rep.checked_points
    doc = {"mechanism": kind.value, "passed": passed, "checked_points": total_points,
           "agents": per_agent}
    text = json.dumps(doc, indent=2) + "\n"
    if args.output:
        _emit(text, args.output)
    print(f"{'PASS' if passed else 'FAIL'} {kind.value}: {len(agents)} agents, "
          f"{len(seeds) if kind is MechanismKind.RANDOMIZED else 1} seed(s), "
          f"{total_points} checked points")
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# bench

BASE_COLUMNS = ["instance", "kind", "n", "fopt", "opt", "alg", "ratio_fopt",
                "ratio_opt", "budget_used", "bound", "within_bound", "seed", "error"]
MC_COLUMNS = ["mc_alg", "mc_ratio_fopt", "mc_value_se"]


def _ratio_str(fopt, alg):
    return "inf" if alg == 0 else str(fopt / alg)


def bench_rows(named: list[tuple[str, Instance]], kinds, seed: int, mc_trials: int,
               limit: int) -> tuple[list[dict], dict]:
    rows = []
    worst: dict[str, Fraction | None] = {k.value: None for k in kinds}
    for idx, (name, inst) in enumerate(named):
        row_seed = rng.derive_seed(seed & rng.MASK64, idx)
        fopt = fractional_opt(inst).fopt
        opt = None
        if len(inst) <= limit:
            opt = integral_opt(inst, limit).opt
        for kind in kinds:
            row = {c: "" for c in BASE_COLUMNS}
            row.update(instance=name, kind=kind.value, n=str(len(inst)), fopt=str(fopt),
                       opt="" if opt is None else str(opt), seed=str(row_seed),
                       bound=BOUND_LABELS[kind])
            try:
                if kind is MechanismKind.RANDOMIZED:
                    p = prune(inst.values, inst.costs, inst.budget)
                    alg = acceptance_probabilities(p, inst.costs, inst.budget).expected_value
                    used = sum(expected_payments(p, inst.costs, inst.budget).values(),
                               Fraction(0))
                else:
                    out = run(kind, inst, seed=row_seed)
                    alg, used = out.value, out.total_payment
                row.update(alg=str(alg), ratio_fopt=_ratio_str(fopt, alg),
                           budget_used=str(used),
                           within_bound=str(meets_bound(kind, fopt, alg)).lower())
                if opt is not None:
                    row["ratio_opt"] = _ratio_str(opt, alg)
                if alg and (worst[kind.value] is None or fopt / alg > worst[kind.value]):
                    worst[kind.value] = fopt / alg
                if mc_trials:
                    mc = monte_carlo(kind, inst, mc_trials, row_seed)
                    row.update(mc_alg=str(mc.value), mc_ratio_fopt=_ratio_str(fopt, mc.value),
                               mc_value_se=repr(mc.value_se))
            except (ValueError, ArithmeticError) as exc:
                row["error"] = f"{type(exc).__name__}: {exc}"
                row["within_bound"] = "false"
            rows.append(row)
    return rows, worst


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed config JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    return doc


def cmd_bench(args) -> int:
    cfg = _load_config(args.config)

    def pick(name, default):
        val = getattr(args, name)
        return cfg.get(name, default) if val is None else val

    count = int(pick("random", 0))
    n_min = int(pick("n_min", 1))
    n_max = int(pick("n_max", 10))
    seed = int(pick("seed", 0))
    denominator = int(pick("denominator", 1000))
    mc_trials = int(pick("mc_trials", 0))
    fmt = pick("format", "csv")
    decimal = pick("decimal", None)
    output = pick("output", None)
    kinds = [MechanismKind.parse(k) for k in (pick("kinds", None) or KINDS)]
    files = list(args.instances or cfg.get("instances", []))
    if not kinds:
        raise UsageError("select at least one mechanism kind")
    if fmt not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    if mc_trials < 0 or count < 0:
        raise UsageError("counts must be nonnegative")

    named = [(Path(f).stem, _read_instance(f)[0]) for f in files]
    if count:
        suite = random_suite(count, seed, n_max=n_max, n_min=n_min, denominator=denominator)
        named += [(f"random-{k}", inst) for k, inst in enumerate(suite)]

    rows, worst = bench_rows(named, kinds, seed, mc_trials, oracle_limit())
    columns = BASE_COLUMNS + (MC_COLUMNS if mc_trials else [])
    if decimal is not None:
        digits = int(decimal)
        columns = columns + ["ratio_fopt_decimal"]
        for row in rows:
            r = row["ratio_fopt"]
            row["ratio_fopt_decimal"] = fmt_decimal(Fraction(r), digits) if r not in ("", "inf") else r
    summary = {k: ("" if v is None else str(v)) for k, v in worst.items()}
    ok = all(row["within_bound"] == "true" for row in rows)

    if fmt == "json":
        doc = {"columns": columns,
               "rows": [{c: row.get(c, "") for c in columns} for row in rows],
               "summary": {"max_ratio_fopt": summary, "all_within_bound": ok}}
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([row.get(c, "") for c in columns])
        for kind, val in summary.items():
            w.writerow(["summary", kind, "max_ratio_fopt", val])
        w.writerow(["summary", "all", "all_within_bound", str(ok).lower()])
        text = buf.getvalue()
    _emit(text, output)
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pruneprice",
                                 description="Budget-feasible procurement mechanisms.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance")
    mode = g.add_mutually_exclusive_group(required=True)
    mode.add_argument("--random", type=int, metavar="N", help="N random items")
    mode.add_argument("--lower-bound", action="store_true",
                      help="three-item tight instance for deterministic mechanisms")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--budget", default="1")
    g.add_argument("--epsilon", default="1/100")
    g.add_argument("--denominator", type=int, default=1000)
    g.add_argument("--value-range", nargs=2, default=["1/1000", "1"], metavar=("LO", "HI"))
    g.add_argument("--cost-range", nargs=2, default=None, metavar=("LO", "HI"))
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="fractional and exact knapsack optima")
    s.add_argument("--instance", required=True)
    s.set_defaults(func=cmd_solve)

    p = sub.add_parser("prune", help="run the pruning stage")
    p.add_argument("--instance", required=True)
    p.add_argument("--bids")
    p.set_defaults(func=cmd_prune)

    r = sub.add_parser("run", help="run one mechanism")
    r.add_argument("--mechanism", required=True, choices=KINDS)
    r.add_argument("--instance", required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--bids")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("audit", help="truthfulness, IR and budget audit")
    a.add_argument("--mechanism", required=True, choices=KINDS)
    a.add_argument("--instance", required=True)
    a.add_argument("--agents", default="all")
    a.add_argument("--seeds", default="16", help="count, or comma list of seeds")
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_audit)

    b = sub.add_parser("bench", help="approximation-ratio sweep")
    b.add_argument("--config")
    b.add_argument("--instances", nargs="*")
    b.add_argument("--random", type=int, help="number of random instances")
    b.add_argument("--n-min", dest="n_min", type=int)
    b.add_argument("--n-max", dest="n_max", type=int)
    b.add_argument("--seed", type=int)
    b.add_argument("--denominator", type=int)
    b.add_argument("--kinds", nargs="+", choices=KINDS)
    b.add_argument("--mc-trials", dest="mc_trials", type=int)
    b.add_argument("--format", choices=["csv", "json"])
    b.add_argument("--decimal", type=int, metavar="K")
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        # InstanceError and OracleSizeError are ValueErrors
        print(f"pruneprice {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
