"""Command-line surface: generate fragments, run condition checkers, report
fibers and down-set statistics, query the pair order, and drive
reconstruction round trips.

Output conventions: primary output is JSON (or DOT text) on stdout, or in the
file named by -o; runs are deterministic given inputs and seed.  Exit codes:
0 ok (and recovered, for round trips), 1 violation or not recovered, 2 usage,
3 parse or validation failure.  Condition surveys over a finite window (P5,
J3 witnesses, the battery) are reported but never fail the run by themselves;
only fragment-level checks (dimension, updegree thresholds, finite meets) do.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .conditions import (check_j1, check_j2, check_j4, check_p1_to_p4,
                         survey_j3, survey_p5, witness_battery)
from .core import PosetFragment, bits_of, validate
from .models import (FragmentFormatError, GeneratorParams,
                     affine_plane_fragment, cusp_fragment, dumps_fragment,
                     load_fragment, random_fragment)
from .reconstruction import (ReconstructionError, StrIso, build_rho,
                             round_trip, verify_factorization)
from .structure import (enumerate_fiber, finite_node, str_leq, str_member,
                        mu_statistic, w_max)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_PARSE = 3


class CliError(Exception):
    """Input problem (bad file, bad label, bad node syntax); exits 3."""


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_json(obj: dict, out: Optional[str]) -> None:
    _emit(json.dumps(obj, indent=2) + "\n", out)


def _load(path: str) -> PosetFragment:
    try:
        return load_fragment(path)
    except FileNotFoundError:
        raise CliError(f"{path}: no such file")
    except FragmentFormatError as exc:
        raise CliError(f"{path}: {exc}")


def _labels(text: str) -> list[str]:
    parts = [p.strip() for p in text.split(",")]
    if any(not p for p in parts):
        raise CliError(f"empty label in {text!r}")
    return parts


def _h1_mask(fragment: PosetFragment, text: str) -> int:
    mask = 0
    for label in _labels(text):
        try:
            mask |= 1 << fragment.resolve_h1_label(label)
        except KeyError as exc:
            raise CliError(str(exc.args[0]))
    return mask


def _h2_mask(fragment: PosetFragment, text: str) -> int:
    mask = 0
    for label in _labels(text):
        try:
            mask |= 1 << fragment.resolve_h2_label(label)
        except KeyError as exc:
            raise CliError(str(exc.args[0]))
    return mask


def parse_node(fragment: PosetFragment, text: str):
    """Node syntax is 'a,b|d,e': curve labels, a bar, point labels."""
    if text.count("|") != 1:
        raise CliError(f"node must look like 'a,b|d,e', got {text!r}")
    left, right = text.split("|")
    node = finite_node(_h1_mask(fragment, left), _h2_mask(fragment, right))
    if not str_member(fragment, node):
        raise CliError(f"{text!r} is not a member pair "
                       "(needs a curve below every listed point)")
    return node


def fragment_to_dot(fragment: PosetFragment) -> str:
    """Hasse diagram of the fragment itself (covers only)."""
    lines = ["digraph fragment {", "  rankdir=BT;", '  "Min";']
    for i in range(fragment.n1):
        lines.append(f'  "{fragment.h1_labels[i]}";')
    for j in range(fragment.n2):
        lines.append(f'  "{fragment.h2_labels[j]}";')
    for i in range(fragment.n1):
        lines.append(f'  "Min" -> "{fragment.h1_labels[i]}";')
    for i in range(fragment.n1):
        for j in bits_of(fragment.up[i]):
            lines.append(f'  "{fragment.h1_labels[i]}" -> '
                         f'"{fragment.h2_labels[j]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- verbs --------------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.model == "cusp":
        fragment = cusp_fragment()
    elif args.model == "affine":
        try:
            fragment = affine_plane_fragment(args.p, args.d)
        except ValueError as exc:
            raise CliError(str(exc))
    else:
        fields = {}
        if args.config is not None:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    fields.update(json.load(fh))
            except (OSError, json.JSONDecodeError) as exc:
                raise CliError(f"{args.config}: {exc}")
        for name in ("n1", "n2", "min_updeg", "planted_pairs_per_point",
                     "generic_curves", "pairwise_cap", "seed"):
            flag = getattr(args, name)
            if flag is not None:
                fields[name] = flag
        if "n1" not in fields or "n2" not in fields:
            raise CliError("random model needs --n1 and --n2 "
                           "(or a config file providing them)")
        try:
            fragment = random_fragment(GeneratorParams(**fields))
        except (TypeError, ValueError) as exc:
            raise CliError(str(exc))
    _emit(dumps_fragment(fragment), args.output)
    return EXIT_OK


def cmd_check(args) -> int:
    fragment = _load(args.fragment)
    structural = validate(fragment)
    reports = [check_j1(fragment), check_j2(fragment, args.k),
               check_j4(fragment, args.j4_tmax)]
    reports.extend(check_p1_to_p4(fragment, args.k))
    j3 = survey_j3(fragment, args.j3_cap)
    p5 = survey_p5(fragment, args.smax, args.tmax)
    battery = witness_battery(fragment, k=args.k, fmax=2,
                              j4_tmax=args.j4_tmax)
    # P4 reports a bound rather than a verdict; it never fails the run.
    required = [r for r in reports if r.condition != "P4"]
    ok = structural.ok and all(r.holds for r in required)
    _emit_json({"version": 1, "ok": ok,
                "structure": structural.to_json(),
                "conditions": [r.to_json() for r in reports],
                "j3_survey": j3.to_json(),
                "p5_survey": p5.to_json(),
                "battery": battery.to_json()}, args.output)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_fiber(args) -> int:
    fragment = _load(args.fragment)
    b_mask = _h2_mask(fragment, args.b)
    support = (fragment.all_h1_mask if args.support is None
               else _h1_mask(fragment, args.support))
    amax = support.bit_count() if args.amax is None else args.amax
    try:
        view = enumerate_fiber(fragment, b_mask, support, amax)
    except ValueError as exc:
        raise CliError(str(exc))
    if args.dot:
        _emit(view.to_dot(include_via=not args.no_via), args.output)
    else:
        _emit_json(view.to_json(), args.output)
    return EXIT_OK


def cmd_mu(args) -> int:
    fragment = _load(args.fragment)
    try:
        x = fragment.resolve_h1_label(args.x)
        m = fragment.resolve_h2_label(args.m)
    except KeyError as exc:
        raise CliError(str(exc.args[0]))
    mu, ge4 = mu_statistic(fragment, x, m, args.amax)
    value = "infinity" if mu == float("inf") else mu
    _emit_json({"version": 1, "x": args.x, "m": args.m,
                "amax": args.amax, "mu": value, "ge4": ge4}, args.output)
    return EXIT_OK


def cmd_str_leq(args) -> int:
    fragment = _load(args.fragment)
    lower = parse_node(fragment, args.lhs)
    upper = parse_node(fragment, args.rhs)
    holds = str_leq(fragment, lower, upper)
    witness = None
    if holds and lower != upper:
        witness = [fragment.h1_labels[i]
                   for i in bits_of(w_max(fragment, upper.a_mask,
                                          upper.b_mask))]
    _emit_json({"version": 1, "lhs": args.lhs, "rhs": args.rhs,
                "holds": holds, "witness": witness}, args.output)
    return EXIT_OK if holds else EXIT_VIOLATION


def cmd_reconstruct(args) -> int:
    fragment_x = _load(args.fragment_x)
    fragment_y = _load(args.fragment_y)
    try:
        with open(args.map, encoding="utf-8") as fh:
            phi = StrIso.from_json(fragment_x, fragment_y, json.load(fh))
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        raise CliError(f"{args.map}: {exc}")
    problems = phi.validate(order_check=False)
    if problems:
        raise CliError(f"{args.map}: " + "; ".join(problems[:5]))
    phi.reset_probes()
    try:
        rho, trace = build_rho(phi, size_cap=args.k_cap,
                               prefer_rays=not args.psi_only)
    except ReconstructionError as exc:
        _emit_json({"version": 1, "recovered": False, "error": str(exc),
                    "conflicts": list(exc.trace.conflicts),
                    "probes": phi.probes,
                    "trace": exc.trace.to_json()}, args.output)
        return EXIT_VIOLATION
    report = verify_factorization(phi, rho)
    _emit_json({"version": 1, "recovered": report.clean,
                "rho1": {fragment_x.h1_labels[i]: fragment_y.h1_labels[y]
                         for i, y in enumerate(rho.h1_map)},
                "rho2": {fragment_x.h2_labels[j]: fragment_y.h2_labels[n]
                         for j, n in enumerate(rho.h2_map)},
                "probes": phi.probes,
                "factorization": report.to_json(),
                "trace": trace.to_json()}, args.output)
    return EXIT_OK if report.clean else EXIT_VIOLATION


def cmd_roundtrip(args) -> int:
    fragment = _load(args.fragment)
    battery = witness_battery(fragment)
    if not battery.passed and not args.allow_weak_battery:
        _emit_json({"version": 1, "recovered": False, "refused": True,
                    "conflicts": [], "probes": 0,
                    "battery": battery.to_json()}, args.output)
        return EXIT_VIOLATION
    result = round_trip(fragment, args.seed, psi_only=not args.with_rays,
                        k_cap=args.k_cap, corrupt=args.corrupt)
    _emit_json(result.to_json(), args.output)
    return EXIT_OK if result.recovered else EXIT_VIOLATION


def cmd_dot(args) -> int:
    fragment = _load(args.fragment)
    _emit(fragment_to_dot(fragment), args.output)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strposet",
        description="Two-tier poset fragments and their pair orders.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen", help="generate a fragment file")
    p.add_argument("--model", choices=("random", "affine", "cusp"),
                   required=True)
    p.add_argument("-p", type=int, default=2, help="field size (affine)")
    p.add_argument("-d", type=int, default=1, help="max degree (affine)")
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.add_argument("--min-updeg", dest="min_updeg", type=int)
    p.add_argument("--planted", dest="planted_pairs_per_point", type=int)
    p.add_argument("--generic", dest="generic_curves", type=int)
    p.add_argument("--pairwise-cap", dest="pairwise_cap", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="JSON file with generator params")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check", help="run condition checkers")
    p.add_argument("fragment")
    p.add_argument("--k", type=int, default=2, help="updegree threshold")
    p.add_argument("--smax", type=int, default=1)
    p.add_argument("--tmax", type=int, default=1)
    p.add_argument("--j3-cap", dest="j3_cap", type=int, default=4)
    p.add_argument("--j4-tmax", dest="j4_tmax", type=int, default=2)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fiber", help="enumerate a fiber of the pair order")
    p.add_argument("fragment")
    p.add_argument("--b", required=True, help="point labels, e.g. d,e")
    p.add_argument("--support", help="curve labels to draw A from")
    p.add_argument("--amax", type=int, help="largest |A| to enumerate")
    p.add_argument("--dot", action="store_true", help="emit DOT covers")
    p.add_argument("--no-via", action="store_true",
                   help="drop witness labels from DOT edges")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fiber)

    p = sub.add_parser("mu", help="smallest positive-height down-set size")
    p.add_argument("fragment")
    p.add_argument("--x", required=True, help="curve label")
    p.add_argument("--m", required=True, help="point label")
    p.add_argument("--amax", type=int, default=4)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_mu)

    p = sub.add_parser("str-leq", help="compare two nodes of the pair order")
    p.add_argument("fragment")
    p.add_argument("--lhs", required=True, help="node, e.g. a|d,e")
    p.add_argument("--rhs", required=True, help="node, e.g. a,b|d,e")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_str_leq)

    p = sub.add_parser("reconstruct",
                       help="rebuild a fragment map from a node map file")
    p.add_argument("fragment_x")
    p.add_argument("fragment_y")
    p.add_argument("--map", required=True, help="node map JSON")
    p.add_argument("--k-cap", dest="k_cap", type=int, default=3)
    p.add_argument("--psi-only", action="store_true",
                   help="ignore ray nodes even if the map covers them")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("roundtrip",
                       help="hidden relabeling, induced map, reconstruction")
    p.add_argument("fragment")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k-cap", dest="k_cap", type=int, default=3)
    p.add_argument("--with-rays", action="store_true",
                   help="include ray nodes in the induced map")
    p.add_argument("--corrupt", action="store_true",
                   help="damage the induced map to exercise conflicts")
    p.add_argument("--allow-weak-battery", action="store_true",
                   help="proceed even if the witness battery fails")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("dot", help="fragment Hasse diagram as DOT text")
    p.add_argument("fragment")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_dot)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
