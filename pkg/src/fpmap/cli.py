"""Command line surface: thin subcommands over the library operations.

Exit codes are a contract: 0 all checks passed (or the requested output was
produced), 1 violations or negative mathematical findings, 2 malformed
input or config, 3 an enumeration cap was exceeded. Reports are canonical
JSON (sorted keys, two-space indent, rationals as "num/den" strings), byte
stable for a fixed config.
"""

import argparse
import json
import os
import sys
from dataclasses import replace

from . import jsonio
from .duality import is_map, product_coarser_check, topology_from_config, von_neumann_kernel
from .errors import (
    CapExceededError,
    ExhaustedError,
    InputError,
    InternalDisagreementError,
    InvalidNormError,
    NormBoundFailedError,
    NotInSpanError,
)
from .extraction import (
    boolean_counterexample,
    extract_independent_family,
    independence_modulus,
    norm_sorted_span,
    select_null_subsequence,
)
from .fpcore import set_prime_cap
from .norms import norm_from_config, validate_axioms
from .pipeline import STAGE_KEYS, RunConfig, run_pipeline
from .reduction import (
    check_member_word_bound,
    check_pair_domination,
    reduce_from_config,
    reduced_basis_from_json,
    verify_reduced_properties,
)

EXIT_PASS = 0
EXIT_VIOLATIONS = 1
EXIT_INPUT = 2
EXIT_CAP = 3


def _load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _emit(doc: dict, out: str | None) -> None:
    text = jsonio.canonical_dumps(doc)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _env_int(name: str) -> int | None:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{name} must be an integer, got {raw!r}") from None
    if value < 1:
        raise InputError(f"{name} must be positive, got {value}")
    return value


def _env_caps() -> tuple[int | None, int | None]:
    """Read cap overrides from the environment; returns (enum, matching)."""
    prime_cap = _env_int("FPMAP_PRIME_CAP")
    if prime_cap is not None:
        set_prime_cap(prime_cap)
    return _env_int("FPMAP_ENUM_CAP"), _env_int("FPMAP_MATCHING_CAP")


def _norm_config_with_env(path: str, matching_env: int | None) -> dict:
    cfg = _load_json(path)
    if matching_env is not None and isinstance(cfg, dict) \
            and cfg.get("kind") == "graev_boolean":
        cfg["matching_cap"] = matching_env
    return cfg


def cmd_validate_norm(args) -> int:
    enum_cap, matching_cap = _env_caps()
    cfg = _norm_config_with_env(args.config, matching_cap)
    norm = norm_from_config(cfg, cap=enum_cap)
    report = validate_axioms(norm, cap=enum_cap, threads=args.threads)
    _emit(report.to_json_dict(), args.out)
    return EXIT_PASS if report.ok else EXIT_VIOLATIONS


def cmd_reduce(args) -> int:
    enum_cap, matching_cap = _env_caps()
    cfg = _norm_config_with_env(args.config, matching_cap)
    norm, reduced = reduce_from_config(cfg, cap=enum_cap, threads=args.threads)
    _emit({"norm": cfg, "reduced": reduced.to_json_dict()}, args.out)
    return EXIT_PASS


def _parse_limits(tokens) -> dict:
    limits = {}
    for token in tokens or []:
        key, sep, value = token.partition("=")
        if not sep or key != "n":
            raise InputError(f"unknown limit {token!r}; expected n=<int>")
        try:
            limits["n"] = int(value)
        except ValueError:
            raise InputError(f"limit n must be an integer, got {value!r}") from None
    return limits


def _norm_and_reduced(args, enum_cap, matching_cap):
    if args.reduced:
        doc = _load_json(args.reduced)
        jsonio.require_keys(doc, ["norm", "reduced"], [], what="reduce output")
        cfg = doc["norm"]
        if matching_cap is not None and isinstance(cfg, dict) \
                and cfg.get("kind") == "graev_boolean":
            cfg["matching_cap"] = matching_cap
        norm = norm_from_config(cfg, cap=enum_cap)
        validate_axioms(norm, cap=enum_cap, threads=args.threads)
        return norm, reduced_basis_from_json(doc["reduced"])
    if not args.config:
        raise InputError("pass --config or --reduced")
    cfg = _norm_config_with_env(args.config, matching_cap)
    return reduce_from_config(cfg, cap=enum_cap, threads=args.threads)


def cmd_verify(args) -> int:
    enum_cap, matching_cap = _env_caps()
    norm, reduced = _norm_and_reduced(args, enum_cap, matching_cap)
    limits = _parse_limits(args.limits)
    max_tuple = limits.get("n", 4)
    docs = {"properties": None, "member_word_bound": None, "pair_domination": None}
    bad = False
    if args.lemma in ("props", "all"):
        report = verify_reduced_properties(reduced, norm, max_tuple=max_tuple,
                                           cap=enum_cap)
        docs["properties"] = report.to_json_dict()
        bad = bad or not report.ok
    if args.lemma in ("1", "all"):
        report = check_member_word_bound(reduced, norm, max_tuple=max_tuple,
                                         cap=enum_cap)
        docs["member_word_bound"] = report.to_json_dict()
        bad = bad or not report.ok
    if args.lemma in ("2", "all"):
        report = check_pair_domination(reduced, norm)
        docs["pair_domination"] = report.to_json_dict()
        bad = bad or not report.ok
    _emit(docs, args.out)
    return EXIT_VIOLATIONS if bad else EXIT_PASS


def cmd_extract(args) -> int:
    enum_cap, matching_cap = _env_caps()
    cfg = _norm_config_with_env(args.config, matching_cap)
    norm, reduced = reduce_from_config(cfg, cap=enum_cap, threads=args.threads)
    seq = select_null_subsequence(norm_sorted_span(norm, cap=enum_cap),
                                  norm, reduced, args.length)
    family = extract_independent_family(seq, reduced, norm)
    _emit({"selection": seq.to_json_dict(), "family": family.to_json_dict()},
          args.out)
    return EXIT_PASS


def cmd_modulus(args) -> int:
    enum_cap, matching_cap = _env_caps()
    cfg = _norm_config_with_env(args.config, matching_cap)
    norm, reduced = reduce_from_config(cfg, cap=enum_cap, threads=args.threads)
    seq = select_null_subsequence(norm_sorted_span(norm, cap=enum_cap),
                                  norm, reduced, args.m)
    family = extract_independent_family(seq, reduced, norm)
    report = independence_modulus(family, norm, args.l, args.m, cap=enum_cap)
    _emit(report.to_json_dict(), args.out)
    return EXIT_PASS if report.ok else EXIT_VIOLATIONS


def cmd_duality(args) -> int:
    enum_cap, matching_cap = _env_caps()
    doc = _load_json(args.spec)
    if args.check == "coarser":
        cfg = RunConfig.from_json_dict(doc)
        if args.prime is not None and cfg.prime.p != args.prime:
            raise InputError(f"--prime {args.prime} does not match the config's {cfg.prime.p}")
        if args.dim is not None and cfg.dim != args.dim:
            raise InputError(f"--dim {args.dim} does not match the config's {cfg.dim}")
        if enum_cap is not None:
            cfg = replace(cfg, enum_cap=enum_cap)
        if matching_cap is not None:
            cfg = replace(cfg, matching_cap=matching_cap)
        norm = cfg.build_norm()
        validate_axioms(norm, cap=cfg.enum_cap, threads=args.threads)
        from .fpcore import OrderedBasis
        from .reduction import reduce_basis
        reduced = reduce_basis(OrderedBasis.standard(cfg.prime, cfg.dim), norm,
                               cap=cfg.enum_cap)
        seq = select_null_subsequence(norm_sorted_span(norm, cap=cfg.enum_cap),
                                      norm, reduced, cfg.m)
        family = extract_independent_family(seq, reduced, norm)
        report = product_coarser_check(family, norm, cfg.m, cap=cfg.enum_cap)
        _emit(report.to_json_dict(), args.out)
        return EXIT_PASS if report.ok else EXIT_VIOLATIONS
    spec = topology_from_config(doc, cap=enum_cap)
    if args.prime is not None and spec.prime.p != args.prime:
        raise InputError(f"--prime {args.prime} does not match the spec's {spec.prime.p}")
    if args.dim is not None and spec.dim != args.dim:
        raise InputError(f"--dim {args.dim} does not match the spec's {spec.dim}")
    if args.check == "kernel":
        basis = von_neumann_kernel(spec, cap=enum_cap)
        _emit({
            "prime": spec.prime.p,
            "dim": spec.dim,
            "kernel_basis": [jsonio.element_to_pairs(g) for g in basis],
        }, args.out)
        return EXIT_PASS
    report = is_map(spec, cap=enum_cap)
    _emit(report.to_json_dict(), args.out)
    return EXIT_PASS


def cmd_demo_boolean(args) -> int:
    report = boolean_counterexample(args.points, search_depth=args.depth)
    _emit(report.to_json_dict(), args.out)
    return EXIT_PASS


def cmd_run(args) -> int:
    doc = _load_json(args.config)
    enum_cap, matching_cap = _env_caps()
    if (enum_cap is not None or matching_cap is not None) and isinstance(doc, dict):
        caps = dict(doc.get("caps", {}))
        if enum_cap is not None:
            caps["enum"] = enum_cap
        if matching_cap is not None:
            caps["matching"] = matching_cap
        doc["caps"] = caps
    cfg = RunConfig.from_json_dict(doc)
    if args.threads is not None:
        cfg = replace(cfg, threads=args.threads)
    if args.out is not None:
        cfg = replace(cfg, out=args.out)
    report = run_pipeline(cfg)
    text = report.to_canonical_json(include_timings=args.include_timings)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for stage in STAGE_KEYS:
        if stage in report.timings:
            print(f"timing {stage}: {report.timings[stage]:.3f}s", file=sys.stderr)
    return EXIT_PASS if report.ok else EXIT_VIOLATIONS


def _violation_lines(violations, limit=10):
    lines = [f"    {v}" for v in violations[:limit]]
    if len(violations) > limit:
        lines.append(f"    ... and {len(violations) - limit} more")
    return lines


def render_report(doc: dict) -> str:
    """Human-readable view of a RunReport JSON document."""
    lines = [f"verdict: {doc.get('verdict', '?')}"]
    cfg = doc.get("config", {})
    norm_kind = cfg.get("norm", {}).get("kind", "?")
    lines.append(f"config: prime={cfg.get('prime', '?')} dim={cfg.get('dim', '?')} "
                 f"norm={norm_kind} limits={cfg.get('limits', {})}")
    if doc.get("error"):
        err = doc["error"]
        lines.append(f"stopped at stage {err.get('stage')}: {err.get('message')}")
    stages = doc.get("stages", {})

    ax = stages.get("axioms")
    if ax is None:
        lines.append("axioms: (not run)")
    else:
        lines.append(f"axioms: {ax['elements_checked']} elements, "
                     f"{ax['pairs_checked']} pairs, {len(ax['violations'])} violations")
        lines.extend(_violation_lines(ax["violations"]))

    red = stages.get("reduction")
    if red is None:
        lines.append("reduction: (not run)")
    else:
        steps = red["steps"]
        lines.append(f"reduction: {len(steps)} steps")
        lines.append("    n  coeffs                norm          ties  runner-up gap")
        for s in steps:
            gap = s["runner_up_gap"] if s["runner_up_gap"] is not None else "-"
            lines.append(f"    {s['index']:<2} {str(s['coeffs']):<21} "
                         f"{s['norm']:<13} {s['tie_count']:<5} {gap}")

    for key, label in (("properties", "properties"),
                       ("member_word_bound", "member word bound"),
                       ("pair_domination", "pair domination")):
        rep = stages.get(key)
        if rep is None:
            lines.append(f"{label}: (not run)")
            continue
        extra = ""
        if rep.get("max_ratio") is not None:
            extra = f", max ratio {rep['max_ratio']}"
        if rep.get("ratios_by_k"):
            by_k = ", ".join(f"k={k}: {v}" for k, v in sorted(
                rep["ratios_by_k"].items(), key=lambda kv: int(kv[0])))
            extra += f" ({by_k})"
        lines.append(f"{label}: checked {rep['checked']}, "
                     f"{len(rep['violations'])} violations{extra}")
        lines.extend(_violation_lines(rep["violations"]))

    sel = stages.get("selection")
    if sel is None:
        lines.append("selection: (not run)")
    else:
        lines.append(f"selection: maxes {sel['maxes']}, norms {sel['norms']}")

    fam = stages.get("family")
    if fam is None:
        lines.append("family: (not run)")
    else:
        lines.append(f"family: indices {fam['indices']}, norms {fam['norms']}")

    mod = stages.get("modulus")
    if mod is None:
        lines.append("modulus: (not run)")
    else:
        lines.append(f"modulus: l={mod['l']} m={mod['m']} eps={mod['eps']} "
                     f"delta={mod['delta']}, {mod['combos_checked']} combos, "
                     f"{mod['splits_checked']} splits, "
                     f"{len(mod['violations'])} violations")
        lines.extend(_violation_lines(mod["violations"]))

    coarser = stages.get("coarser")
    if coarser is None:
        lines.append("coarser: (not run)")
    else:
        lines.append(f"coarser: {coarser['combos_checked']} combos, "
                     f"{len(coarser['violations'])} violations")
        last = coarser["tables"].get(str(coarser["m"]), {})
        for F, v in last.items():
            lines.append(f"    delta F={{{F}}}: {v}")
        lines.extend(_violation_lines(coarser["violations"]))

    if doc.get("timings"):
        for stage, t in doc["timings"].items():
            lines.append(f"timing {stage}: {t:.3f}s")
    return "\n".join(lines) + "\n"


def cmd_report(args) -> int:
    doc = _load_json(args.input)
    sys.stdout.write(render_report(doc))
    return EXIT_PASS if doc.get("verdict") == "pass" else EXIT_VIOLATIONS


def _add_common(sub, *, config=True, threads=True):
    if config:
        sub.add_argument("--config", required=True, help="path to a norm config JSON")
    if threads:
        sub.add_argument("--threads", type=int, default=1,
                         help="worker threads for the axiom validator")
    sub.add_argument("--out", help="write the JSON report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpmap",
        description="Finite-truncation norms, basis reduction, and "
                    "almost-periodicity checks over F_p.")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("validate-norm", help="run the axiom validator on a norm")
    _add_common(sub)
    sub.set_defaults(func=cmd_validate_norm)

    sub = subs.add_parser("reduce", help="reduce the standard basis under a norm")
    _add_common(sub)
    sub.set_defaults(func=cmd_reduce)

    sub = subs.add_parser("verify", help="run the reduction checkers")
    sub.add_argument("--config", help="path to a norm config JSON")
    sub.add_argument("--reduced", help="path to a reduce output JSON")
    sub.add_argument("--lemma", choices=("props", "1", "2", "all"), default="all")
    sub.add_argument("--limits", action="append", metavar="n=INT",
                     help="checker limits, e.g. n=4 for the tuple size")
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--out")
    sub.set_defaults(func=cmd_verify)

    sub = subs.add_parser("extract", help="select a null subsequence and extract "
                                          "the independent family")
    _add_common(sub)
    sub.add_argument("--length", type=int, required=True,
                     help="requested subsequence length")
    sub.set_defaults(func=cmd_extract)

    sub = subs.add_parser("modulus", help="full chain ending in the independence modulus")
    _add_common(sub)
    sub.add_argument("--l", type=int, required=True, dest="l")
    sub.add_argument("--m", type=int, required=True, dest="m")
    sub.set_defaults(func=cmd_modulus)

    sub = subs.add_parser("duality", help="character continuity and separation checks")
    sub.add_argument("--spec", required=True,
                     help="topology config (map/kernel) or run config (coarser)")
    sub.add_argument("--check", choices=("map", "kernel", "coarser"), default="map")
    sub.add_argument("--prime", type=int, help="cross-check the spec's prime")
    sub.add_argument("--dim", type=int, help="cross-check the spec's dimension")
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--out")
    sub.set_defaults(func=cmd_duality)

    sub = subs.add_parser("demo-boolean", help="the convergent-sequence counterexample")
    sub.add_argument("--points", type=int, default=100)
    sub.add_argument("--depth", type=int, default=3,
                     help="certificate grid depth")
    sub.add_argument("--out")
    sub.set_defaults(func=cmd_demo_boolean)

    sub = subs.add_parser("report", help="render a run report as text")
    sub.add_argument("input", help="path to a RunReport JSON file")
    sub.set_defaults(func=cmd_report)

    sub = subs.add_parser("run", help="execute the full pipeline from a run config")
    sub.add_argument("--config", required=True, help="path to a run config JSON")
    sub.add_argument("--threads", type=int, default=None)
    sub.add_argument("--out", default=None)
    sub.add_argument("--include-timings", action="store_true",
                     help="embed wall-clock timings (breaks byte stability)")
    sub.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, NotInSpanError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ExhaustedError, NormBoundFailedError, InternalDisagreementError,
            InvalidNormError) as exc:
        print(f"finding: {exc}", file=sys.stderr)
        return EXIT_VIOLATIONS


if __name__ == "__main__":
    sys.exit(main())
