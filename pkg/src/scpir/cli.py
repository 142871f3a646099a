"""Command-line experiment runner: ``scpir place | retrieve | audit``.

Exit codes: 0 success, 1 audit or decode failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import kernels
from .model import MessageLibrary, StorageProfile, as_rational
from .placement import (
    PlacementError,
    build_placement,
    fill_iterative,
    fp_violation,
    split_storage_details,
    validate_plan,
)
from .scheme import PLACEMENTS, SizingError, build_scheme, make_plan
from .simnet import audit_decode, audit_privacy, audit_storage, provision, retrieve

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


def frac(x: Fraction) -> str:
    return str(x)


def read_config(path: str) -> dict:
    """Parse a ``key=value`` config file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lower().replace("-", "_")] = value
    return out


CONFIG_KEYS = {"mu", "uniform", "n", "k", "l", "seed", "placement", "theta", "t", "seeds", "sample", "threshold"}


def merge_config(args: argparse.Namespace) -> argparse.Namespace:
    if not args.config:
        return args
    cfg = read_config(args.config)
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    for key, value in cfg.items():
        attr = "L" if key == "l" else key
        if getattr(args, attr, None) is None:
            setattr(args, attr, value)
    return args


def profile_from_args(args) -> StorageProfile:
    try:
        if args.mu is not None and args.uniform is not None:
            raise InputError("give either --mu or --uniform, not both")
        if args.mu is not None:
            return StorageProfile(p for p in str(args.mu).split(",") if p.strip())
        if args.uniform is not None:
            if args.n is None:
                raise InputError("--uniform needs --n")
            return StorageProfile.uniform(int(args.n), as_rational(str(args.uniform)))
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    raise InputError("no storage profile: pass --mu or --uniform/--n (or a config file)")


def _int(value, name, default=None):
    if value is None:
        return default
    try:
        return int(value)
    except ValueError as exc:
        raise InputError(f"{name} must be an integer, got {value!r}") from exc


def emit_json(path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def write_segments_csv(path, segments) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["segment_index", "alpha_num", "alpha_den", "dbset"])
        for f, seg in enumerate(segments, start=1):
            w.writerow([f, seg.alpha.numerator, seg.alpha.denominator, ";".join(map(str, seg.dbset))])


def write_trace_csv(path, trace) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "t_prime", "n_prime", "e", "kind"])
        for it in trace:
            w.writerow([it.index, frac(it.t_prime), it.n_prime, it.e, it.kind.value])


def print_segments(segments) -> None:
    print(f"{'f':>3}  {'alpha':>10}  dbset")
    for f, seg in enumerate(segments, start=1):
        print(f"{f:>3}  {frac(seg.alpha):>10}  {{{', '.join(map(str, seg.dbset))}}}")


def print_trace(trace) -> None:
    print(f"{'iter':>4}  {'t_prime':>10}  {'N_prime':>7}  {'e':>3}  {'alpha':>10}  kind   dbset")
    for it in trace:
        print(
            f"{it.index:>4}  {frac(it.t_prime):>10}  {it.n_prime:>7}  {it.e:>3}  "
            f"{frac(it.alpha):>10}  {it.kind.value:<5}  {{{', '.join(map(str, it.dbset))}}}"
        )


def _trace_json(trace):
    return [
        {
            "iteration": it.index,
            "t_prime": frac(it.t_prime),
            "n_prime": it.n_prime,
            "e": it.e,
            "alpha": frac(it.alpha),
            "dbset": list(it.dbset),
            "kind": it.kind.value,
        }
        for it in trace
    ]


def _segments_json(segments):
    return [{"alpha": frac(s.alpha), "dbset": list(s.dbset)} for s in segments]


def cmd_place(args) -> int:
    profile = profile_from_args(args)
    tau = _int(args.t, "--t")
    if tau is not None and tau != profile.t:
        return _place_fill_problem(args, list(profile.mu), tau)

    payload = {"mu": [frac(m) for m in profile.mu], "t": frac(profile.t)}
    print(f"N = {profile.N}, t = {frac(profile.t)}")
    placement = args.placement or "auto"
    if placement == "auto":
        result = build_placement(profile)
        plan = result.plan
        if not profile.integer_t:
            split = split_storage_details(profile)
            print(f"split ratio r = {frac(split.r)}")
            print("mu_floor = [" + ", ".join(map(frac, split.mu_floor)) + "]")
            print("mu_ceil  = [" + ", ".join(map(frac, split.mu_ceil)) + "]")
            payload["split"] = {
                "r": frac(split.r),
                "mu_floor": [frac(x) for x in split.mu_floor],
                "mu_ceil": [frac(x) for x in split.mu_ceil],
            }
        for tau_i, trace in result.phases:
            print(f"\ntrace (groups of {tau_i}):")
            print_trace(trace)
        payload["trace"] = [{"tau": tau_i, "iterations": _trace_json(tr)} for tau_i, tr in result.phases]
        trace_all = result.trace
    else:
        plan = make_plan(profile, placement)
        trace_all = []
    print("\nsegments:")
    print_segments(plan.segments)
    report = validate_plan(plan, profile)
    verdict = "valid" if report.valid else "INVALID"
    fill = ", exact fill" if report.exact_fill else ""
    print(f"\nvalidation: {verdict}{fill}")
    for v in report.violations:
        print(f"  - {v}")
    payload["segments"] = _segments_json(plan.segments)
    payload["validation"] = {"valid": report.valid, "exact_fill": report.exact_fill, "violations": report.violations}
    if args.json:
        emit_json(args.json, payload)
    if args.csv:
        write_segments_csv(args.csv, plan.segments)
    if args.trace_csv:
        write_trace_csv(args.trace_csv, trace_all)
    return EXIT_OK if report.valid else EXIT_FAIL


def _place_fill_problem(args, m, tau) -> int:
    reason = fp_violation(m, tau)
    if reason is not None:
        print(f"infeasible: no filling with groups of {tau} exists: {reason}", file=sys.stderr)
        if args.json:
            emit_json(args.json, {"m": [frac(x) for x in m], "tau": tau, "feasible": False, "reason": reason})
        return EXIT_INPUT
    segments, trace = fill_iterative(m, tau)
    print(f"filling problem with groups of {tau}, total {frac(sum(m, Fraction(0)))}")
    print_trace(trace)
    print("\nsegments:")
    print_segments(segments)
    if args.json:
        emit_json(
            args.json,
            {"m": [frac(x) for x in m], "tau": tau, "feasible": True,
             "segments": _segments_json(segments), "trace": _trace_json(trace)},
        )
    if args.csv:
        write_segments_csv(args.csv, segments)
    if args.trace_csv:
        write_trace_csv(args.trace_csv, trace)
    return EXIT_OK


def _scheme_from_args(args, break_symmetry=False):
    profile = profile_from_args(args)
    K = _int(args.k, "--k", 2)
    L = _int(args.L, "--L")
    return build_scheme(profile, K, L, placement=args.placement or "auto", break_symmetry=break_symmetry)


def cmd_retrieve(args) -> int:
    scheme = _scheme_from_args(args)
    seed = _int(args.seed, "--seed", 0)
    theta = _int(args.theta, "--theta", 1)
    library = MessageLibrary.random(scheme.K, scheme.L, seed)
    nodes = provision(scheme, library)
    tr = retrieve(scheme, nodes, theta, seed)
    ok = bool((tr.decoded == library.message(theta)).all())
    achieving = tr.rate == scheme.capacity
    print(f"theta = {theta}, K = {scheme.K}, L = {scheme.L}, F = {scheme.plan.F}")
    print(f"D = {tr.d_total_bits}")
    print(f"R = {frac(tr.rate)} ({float(tr.rate):.6f})")
    print(f"capacity = {frac(scheme.capacity)} ({float(scheme.capacity):.6f})")
    print(f"capacity-achieving: {'yes' if achieving else 'no'}")
    print(f"decoded correctly: {'yes' if ok else 'no'}")
    print("per-DB bits: " + " ".join(map(str, tr.per_db_bits)))
    if args.json:
        payload = tr.to_dict()
        payload.update(
            capacity=frac(scheme.capacity),
            predicted_rate=frac(scheme.predicted_rate),
            capacity_achieving=achieving,
            decoded_ok=ok,
        )
        emit_json(args.json, payload)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_audit(args) -> int:
    scheme = _scheme_from_args(args, break_symmetry=args.break_symmetry)
    seed = _int(args.seed, "--seed", 0)
    library = MessageLibrary.random(scheme.K, scheme.L, seed)
    reports = [audit_storage(scheme, provision(scheme, library))]
    n_seeds = _int(args.seeds, "--seeds", 10)
    reports.append(audit_decode(scheme, library, range(seed, seed + n_seeds)))
    if args.enumerate:
        reports.append(audit_privacy(scheme, "enumerate"))
    else:
        trials = _int(args.sample, "--sample", 10**4)
        threshold = float(args.threshold) if args.threshold is not None else 0.01
        reports.append(audit_privacy(scheme, "sample", trials=trials, seed=seed, threshold=threshold))
    for rep in reports:
        print(f"{rep.name:<8} {'pass' if rep.verdict else 'FAIL'}")
        for line in rep.details:
            print(f"         {line}")
        if rep.tv_distance is not None:
            print(f"         max TV distance {rep.tv_distance:.6f}")
    ok = all(r.verdict for r in reports)
    if args.json:
        emit_json(args.json, {"verdict": "pass" if ok else "fail", "audits": [r.to_dict() for r in reports]})
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file; flags override it")
    common.add_argument("--mu", help="comma-separated storage fractions, e.g. 0.1,1/5,0.25")
    common.add_argument("--uniform", help="uniform storage fraction for every database")
    common.add_argument("--n", help="number of databases (with --uniform)")
    common.add_argument("--k", help="number of messages (default 2)")
    common.add_argument("--L", help="message length in bits (default: minimum valid)")
    common.add_argument("--seed", help="master seed (default 0)")
    common.add_argument("--placement", choices=PLACEMENTS, help="placement construction (default auto)")
    common.add_argument("--json", help="write a JSON report to this path ('-' for stdout)")

    parser = argparse.ArgumentParser(prog="scpir", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s (kernels: {kernels.BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("place", parents=[common], help="compute a storage placement")
    p.add_argument("--t", help="solve the filling problem with groups of this size")
    p.add_argument("--csv", help="write segments as CSV")
    p.add_argument("--trace-csv", help="write the iteration trace as CSV")
    p.set_defaults(func=cmd_place)

    r = sub.add_parser("retrieve", parents=[common], help="run one private retrieval")
    r.add_argument("--theta", help="desired message index, 1-based (default 1)")
    r.set_defaults(func=cmd_retrieve)

    a = sub.add_parser("audit", parents=[common], help="run storage, decode and privacy audits")
    mode = a.add_mutually_exclusive_group()
    mode.add_argument("--enumerate", action="store_true", help="exact privacy audit by enumeration")
    mode.add_argument("--sample", help="privacy audit trials per message (default 10000)")
    a.add_argument("--threshold", help="total-variation threshold for sampling (default 0.01)")
    a.add_argument("--seeds", help="number of seeds for the decode audit (default 10)")
    a.add_argument("--break-symmetry", action="store_true", help="negative control: drop undesired singletons")
    a.set_defaults(func=cmd_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for attr in ("t", "theta", "csv", "trace_csv", "sample", "threshold", "seeds"):
        if not hasattr(args, attr):
            setattr(args, attr, None)
    try:
        args = merge_config(args)
        return args.func(args)
    except (InputError, PlacementError, SizingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
