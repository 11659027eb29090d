"""Command-line front end.

Commands: gap | worst-case | robust | welfare | split-verify | certify-scheme
| verify | list-instances. Exit codes: 0 success, 1 verification failures,
2 validation error, 3 size-cap exceeded. Output is JSON (canonical) or a
flattened CSV projection, byte-identical across runs for a fixed config and
seed. CORRGAP_THREADS caps parallelism inside verify.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from .core import Instance, SizeCapError, ValidationError, function_from_json
from .cost_sharing import certify, incremental_scheme
from .distributions import independent_expectation_mc
from .gap import correlation_gap
from .instances import REGISTRY, WelfareCase, build_builtin, verification_report
from .robust import DecisionSpace, approximation_ratio
from .split import verify_split_properties
from .welfare import welfare_report
from .worst_case import LP_TOL, CERT_TOL, verify_certificate, worst_case_lp

EXIT_OK = 0
EXIT_FACT_FAILURES = 1
EXIT_VALIDATION = 2
EXIT_SIZE_CAP = 3


def _add_source_args(sub: argparse.ArgumentParser):
    sub.add_argument("--instance", metavar="PATH", help="instance JSON file")
    sub.add_argument("--builtin", metavar="NAME", help="built-in instance name")
    sub.add_argument("--n", type=int, help="size parameter for builtins that take one")
    sub.add_argument("--k", type=int, help="block/player count for builtins that take one")
    sub.add_argument("--seed", type=int, help="seed for seeded builtins or Monte Carlo")


def _add_output_args(sub: argparse.ArgumentParser):
    sub.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    sub.add_argument("--format", choices=("json", "csv"), default="json")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrgap",
        description="worst-case-over-correlations expectations, gaps, and verifications",
    )
    parser.add_argument(
        "--list-instances", action="store_true", help="list built-in instances and exit"
    )
    subs = parser.add_subparsers(dest="command")

    gap = subs.add_parser("gap", help="correlation gap of an instance")
    _add_source_args(gap)
    _add_output_args(gap)
    gap.add_argument("--samples", type=int, help="Monte Carlo the independent leg (needs --seed)")
    gap.add_argument("--eta", type=float, help="declared summability constant for the bound")
    gap.add_argument("--beta", type=float, help="declared budget-balance constant for the bound")
    gap.add_argument("--tol-lp", type=float, default=LP_TOL)

    wc = subs.add_parser("worst-case", help="worst-case distribution LP with dual certificate")
    _add_source_args(wc)
    _add_output_args(wc)
    wc.add_argument("--tol-lp", type=float, default=LP_TOL)
    wc.add_argument("--tol-check", type=float, default=CERT_TOL)

    robust = subs.add_parser("robust", help="robust vs independent decisions over a space")
    _add_source_args(robust)
    _add_output_args(robust)

    welfare = subs.add_parser("welfare", help="exact welfare optimum, bound, and rounding value")
    _add_source_args(welfare)
    _add_output_args(welfare)

    split = subs.add_parser("split-verify", help="check the split-invariance properties")
    _add_source_args(split)
    _add_output_args(split)
    split.add_argument(
        "--counts", metavar="C1,C2,...", help="copies per element (default: 2 for every element)"
    )

    cert = subs.add_parser("certify-scheme", help="certify the incremental scheme on an instance")
    _add_source_args(cert)
    _add_output_args(cert)
    cert.add_argument("--tol-check", type=float, default=1e-9)

    verify = subs.add_parser("verify", help="run the full reproduction suite")
    verify.add_argument("--all", action="store_true", help="run everything (the default)")
    verify.add_argument("--scale", type=int, default=1, help="trial-count multiplier")
    _add_output_args(verify)

    subs.add_parser("list-instances", help="list built-in instances")
    return parser


def _load_json_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON in {path}: {exc}") from None


def _load_source(args) -> object:
    if bool(args.instance) == bool(args.builtin):
        raise ValidationError("exactly one of --instance or --builtin is required")
    if args.builtin:
        builtin = REGISTRY.get(args.builtin)
        overrides = {}
        for key in ("n", "k", "seed"):
            value = getattr(args, key, None)
            if value is None:
                continue
            if key == "seed" and builtin is not None and "seed" not in builtin.defaults:
                continue  # --seed then belongs to Monte Carlo, not the builtin
            overrides[key] = value
        return build_builtin(args.builtin, **overrides)
    data = _load_json_file(args.instance)
    if not isinstance(data, dict):
        raise ValidationError("instance JSON must be an object")
    if "decisions" in data:
        return DecisionSpace.from_json(data)
    if "players" in data:
        try:
            return WelfareCase(function_from_json(data["function"]), int(data["players"]))
        except KeyError as exc:
            raise ValidationError(f"welfare JSON missing field: {exc}") from None
    return Instance.from_json(data)


def _as_instance(source: object) -> Instance:
    if isinstance(source, Instance):
        return source
    if isinstance(source, WelfareCase):
        return source.instance()
    raise ValidationError("this command needs a single instance, not a decision space")


def _as_space(source: object) -> DecisionSpace:
    if isinstance(source, DecisionSpace):
        return source
    raise ValidationError("this command needs a decision space (a list of decisions)")


def _flatten(payload: object, prefix: str = "") -> list[tuple[str, object]]:
    if isinstance(payload, dict):
        out = []
        for key in payload:
            out.extend(_flatten(payload[key], f"{prefix}{key}." if prefix else f"{key}."))
        return [(name.rstrip("."), value) for name, value in out]
    if isinstance(payload, list):
        if all(isinstance(v, (int, float, str, bool, type(None))) for v in payload):
            return [(prefix.rstrip("."), ";".join("" if v is None else str(v) for v in payload))]
        return []  # nested tables are JSON-only
    return [(prefix.rstrip("."), payload)]


def _to_csv(payload: dict) -> str:
    if "facts" in payload:  # verification report: one row per fact
        lines = ["name,expected,got,tol,passed"]
        for fact in payload["facts"]:
            lines.append(
                ",".join(
                    "" if fact[key] is None else str(fact[key])
                    for key in ("name", "expected", "got", "tol", "passed")
                )
            )
        tail = [f"total,{payload['total']}", f"failed,{payload['failed']}"]
        return "\n".join(lines + tail) + "\n"
    cells = _flatten(payload)
    header = ",".join(name for name, _ in cells)
    row = ",".join("" if v is None else str(v) for _, v in cells)
    return header + "\n" + row + "\n"


def _emit(payload: dict, args) -> None:
    if args.format == "csv":
        text = _to_csv(payload)
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _cmd_gap(args) -> int:
    inst = _as_instance(_load_source(args))
    report = correlation_gap(inst, eta=args.eta, beta=args.beta, lp_tol=args.tol_lp)
    payload = report.to_json()
    if args.samples is not None:
        if args.seed is None:
            raise ValidationError("--samples requires --seed for reproducibility")
        mc = independent_expectation_mc(inst.function, inst.marginals, args.samples, args.seed)
        payload["independent_mc"] = mc.to_json()
    _emit(payload, args)
    return EXIT_OK


def _cmd_worst_case(args) -> int:
    inst = _as_instance(_load_source(args))
    result = worst_case_lp(inst, tol=args.tol_lp)
    payload = result.to_json()
    payload["certified"] = verify_certificate(inst, result, tol=args.tol_check)
    _emit(payload, args)
    return EXIT_OK


def _cmd_robust(args) -> int:
    space = _as_space(_load_source(args))
    _emit(approximation_ratio(space).to_json(), args)
    return EXIT_OK


def _cmd_welfare(args) -> int:
    source = _load_source(args)
    if isinstance(source, WelfareCase):
        function, players = source.function, source.players
        if args.k is not None and args.builtin is None:
            players = args.k
    else:
        function = _as_instance(source).function
        if args.k is None:
            raise ValidationError("welfare on a plain instance needs --k players")
        players = args.k
    _emit(welfare_report(function, players).to_json(), args)
    return EXIT_OK


def _cmd_split_verify(args) -> int:
    inst = _as_instance(_load_source(args))
    if args.counts:
        try:
            counts = [int(c) for c in args.counts.split(",")]
        except ValueError:
            raise ValidationError(f"cannot parse --counts {args.counts!r}") from None
    else:
        counts = [2] * inst.n
    _emit(verify_split_properties(inst, counts).to_json(), args)
    return EXIT_OK


def _cmd_certify_scheme(args) -> int:
    inst = _as_instance(_load_source(args))
    result = certify(incremental_scheme(inst.function), inst.function, tol=args.tol_check)
    _emit(result.to_json(), args)
    return EXIT_OK


def _cmd_verify(args) -> int:
    threads = max(1, int(os.environ.get("CORRGAP_THREADS", "1")))
    report = verification_report(scale=args.scale, threads=threads)
    _emit(report, args)
    return EXIT_OK if report["passed"] else EXIT_FACT_FAILURES


def _cmd_list_instances(args=None) -> int:
    for name in sorted(REGISTRY):
        builtin = REGISTRY[name]
        params = ", ".join(f"{k}={v}" for k, v in builtin.defaults.items()) or "-"
        sys.stdout.write(f"{name:20s} [{builtin.kind:8s}] ({params}) {builtin.summary}\n")
    return EXIT_OK


_HANDLERS = {
    "gap": _cmd_gap,
    "worst-case": _cmd_worst_case,
    "robust": _cmd_robust,
    "welfare": _cmd_welfare,
    "split-verify": _cmd_split_verify,
    "certify-scheme": _cmd_certify_scheme,
    "verify": _cmd_verify,
    "list-instances": _cmd_list_instances,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.list_instances or args.command == "list-instances":
        return _cmd_list_instances()
    if args.command is None:
        parser.print_help()
        return EXIT_VALIDATION
    try:
        return _HANDLERS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SizeCapError as exc:
        print(f"size cap: {exc}", file=sys.stderr)
        return EXIT_SIZE_CAP


if __name__ == "__main__":
    sys.exit(main())
