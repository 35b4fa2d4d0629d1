"""End-to-end experiment runs: config in, deterministic report out.

A run walks the whole chain on one norm: axiom validation, basis reduction,
the reduction checkers, null-subsequence selection over the norm-sorted
span, family extraction, the independence modulus, and the product-topology
tables. Violations reported by any stage are collected into the report and
decide the verdict; they never abort the run. Only malformed input aborts.

Reports serialize canonically: fixed key set, explicit nulls for stages
that did not run, rationals as "num/den" strings, and no wall-clock data
unless explicitly asked for (timings are the one nondeterministic field,
so the canonical byte stream excludes them).
"""

from dataclasses import dataclass
from time import perf_counter

from . import jsonio
from .duality import product_coarser_check
from .errors import (
    CapExceededError,
    ExhaustedError,
    InputError,
    NormBoundFailedError,
)
from .extraction import (
    extract_independent_family,
    independence_modulus,
    norm_sorted_span,
    select_null_subsequence,
)
from .fpcore import DEFAULT_ENUM_CAP, OrderedBasis, Prime, as_prime
from .norms import norm_from_config, validate_axioms
from .reduction import (
    check_member_word_bound,
    check_pair_domination,
    reduce_basis,
    verify_reduced_properties,
)

STAGE_KEYS = (
    "axioms",
    "reduction",
    "properties",
    "member_word_bound",
    "pair_domination",
    "selection",
    "family",
    "modulus",
    "coarser",
)


@dataclass(frozen=True)
class RunConfig:
    """Parsed and validated run description.

    prime and dim are stated twice on purpose (top level and inside the norm
    descriptor); the cross-check catches config editing mistakes early.
    """

    prime: Prime
    dim: int
    norm_cfg: dict
    max_tuple: int
    l: int
    m: int
    enum_cap: int
    matching_cap: int | None
    threads: int
    out: str | None
    raw: dict

    @classmethod
    def from_json_dict(cls, cfg: dict) -> "RunConfig":
        jsonio.require_keys(cfg, ["prime", "dim", "norm"],
                            ["limits", "caps", "threads", "out"],
                            what="run config")
        prime = as_prime(cfg["prime"])
        dim = cfg["dim"]
        if not isinstance(dim, int) or dim < 1:
            raise InputError(f"dim must be a positive integer, got {dim!r}")
        limits = jsonio.require_keys(cfg.get("limits", {}), [],
                                     ["max_tuple", "l", "m"], what="limits")
        max_tuple = limits.get("max_tuple", 4)
        l = limits.get("l", 1)
        m = limits.get("m", min(dim, 5))
        if not (isinstance(l, int) and isinstance(m, int) and 1 <= l <= m <= dim):
            raise InputError(f"limits need 1 <= l <= m <= dim, got l={l!r}, m={m!r}")
        if not isinstance(max_tuple, int) or max_tuple < 1:
            raise InputError(f"max_tuple must be a positive integer, got {max_tuple!r}")
        caps = jsonio.require_keys(cfg.get("caps", {}), [],
                                   ["enum", "matching"], what="caps")
        enum_cap = caps.get("enum", DEFAULT_ENUM_CAP)
        matching_cap = caps.get("matching")
        if not isinstance(enum_cap, int) or enum_cap < 1:
            raise InputError(f"enum cap must be a positive integer, got {enum_cap!r}")
        if matching_cap is not None and (not isinstance(matching_cap, int)
                                         or matching_cap < 1):
            raise InputError(f"matching cap must be a positive integer, got {matching_cap!r}")
        threads = cfg.get("threads", 1)
        if not isinstance(threads, int) or threads < 1:
            raise InputError(f"threads must be a positive integer, got {threads!r}")
        out = cfg.get("out")
        if out is not None and not isinstance(out, str):
            raise InputError(f"out must be a path string, got {out!r}")
        if not isinstance(cfg["norm"], dict):
            raise InputError("norm descriptor must be a JSON object")
        return cls(prime, dim, dict(cfg["norm"]), max_tuple, l, m,
                   enum_cap, matching_cap, threads, out, cfg)

    def build_norm(self):
        norm_cfg = dict(self.norm_cfg)
        if self.matching_cap is not None and norm_cfg.get("kind") == "graev_boolean":
            norm_cfg.setdefault("matching_cap", self.matching_cap)
        norm = norm_from_config(norm_cfg, cap=self.enum_cap)
        if norm.prime != self.prime:
            raise InputError(
                f"config prime {self.prime.p} does not match the norm's {norm.prime.p}")
        if norm.dim != self.dim:
            raise InputError(
                f"config dim {self.dim} does not match the norm's {norm.dim}")
        return norm


@dataclass(frozen=True)
class RunReport:
    """One run's outcome: config echo, per-stage documents, verdict.

    stages always carries every stage key; a stage that did not run is an
    explicit null. error describes the first aborting finding (exhaustion or
    a failed norm bound), if any. timings are measured but excluded from
    canonical bytes; pass include_timings=True to embed them.
    """

    config_echo: dict
    stages: dict
    verdict: str
    error: dict | None
    timings: dict

    @property
    def ok(self) -> bool:
        return self.verdict == "pass"

    def to_json_dict(self, *, include_timings: bool = False) -> dict:
        return {
            "config": self.config_echo,
            "stages": {k: self.stages[k] for k in STAGE_KEYS},
            "verdict": self.verdict,
            "error": self.error,
            "timings": dict(self.timings) if include_timings else None,
        }

    def to_canonical_json(self, *, include_timings: bool = False) -> str:
        return jsonio.canonical_dumps(self.to_json_dict(include_timings=include_timings))


def run_pipeline(cfg: RunConfig) -> RunReport:
    """Execute every stage in order and assemble the report.

    Axiom failure, selection exhaustion, and a failed member norm bound stop
    the chain (later stages stay null, verdict "fail") but still produce a
    complete report. Checker violations only flip the verdict.
    """
    stages: dict = {k: None for k in STAGE_KEYS}
    timings: dict = {}
    error = None
    # threads and out change how the run executes, never what it computes,
    # so they stay out of the echo to keep reports byte-identical across
    # execution settings.
    echo = {k: v for k, v in cfg.raw.items() if k not in ("threads", "out")}
    cap = cfg.enum_cap

    def run_stage(name, fn):
        t0 = perf_counter()
        try:
            result = fn()
        except CapExceededError as exc:
            raise CapExceededError(f"stage {name}: {exc}") from exc
        finally:
            timings[name] = perf_counter() - t0
        return result

    norm = cfg.build_norm()
    axioms = run_stage("axioms", lambda: validate_axioms(
        norm, cap=cap, threads=cfg.threads))
    stages["axioms"] = axioms.to_json_dict()
    bad = not axioms.ok

    if not bad:
        reduced = run_stage("reduction", lambda: reduce_basis(
            OrderedBasis.standard(cfg.prime, cfg.dim), norm, cap=cap))
        stages["reduction"] = reduced.to_json_dict()
        props = run_stage("properties", lambda: verify_reduced_properties(
            reduced, norm, cap=cap))
        stages["properties"] = props.to_json_dict()
        words = run_stage("member_word_bound", lambda: check_member_word_bound(
            reduced, norm, max_tuple=cfg.max_tuple, cap=cap))
        stages["member_word_bound"] = words.to_json_dict()
        pairs = run_stage("pair_domination", lambda: check_pair_domination(
            reduced, norm))
        stages["pair_domination"] = pairs.to_json_dict()
        bad = not (props.ok and words.ok and pairs.ok)

        try:
            seq = run_stage("selection", lambda: select_null_subsequence(
                norm_sorted_span(norm, cap=cap), norm, reduced, cfg.m))
            stages["selection"] = seq.to_json_dict()
            family = run_stage("family", lambda: extract_independent_family(
                seq, reduced, norm))
            stages["family"] = family.to_json_dict()
        except ExhaustedError as exc:
            error = {
                "stage": "selection",
                "kind": "exhausted",
                "message": str(exc),
                "achievable_length": exc.achievable_length,
                "failed_slot": exc.failed_slot,
                "constraint": exc.constraint,
            }
            bad = True
        except NormBoundFailedError as exc:
            error = {"stage": "family", "kind": "norm-bound", "message": str(exc)}
            bad = True
        else:
            modulus = run_stage("modulus", lambda: independence_modulus(
                family, norm, cfg.l, cfg.m, cap=cap))
            stages["modulus"] = modulus.to_json_dict()
            coarser = run_stage("coarser", lambda: product_coarser_check(
                family, norm, cfg.m, cap=cap))
            stages["coarser"] = coarser.to_json_dict()
            bad = bad or not (modulus.ok and coarser.ok)

    return RunReport(
        config_echo=echo,
        stages=stages,
        verdict="fail" if bad else "pass",
        error=error,
        timings=timings,
    )


def run_from_json_dict(cfg: dict) -> RunReport:
    return run_pipeline(RunConfig.from_json_dict(cfg))
