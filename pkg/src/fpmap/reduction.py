"""Greedy norm-minimizing basis reduction and its exhaustive checkers.

reduce_basis rewrites an ordered basis so that each element is a minimum-norm
combination introducing the next original vector. The checkers then confirm,
by enumeration, the inequalities that make the reduced basis useful: the top
term of any word is never larger than the word (max-term-minimality), members
of a word are controlled by a (2p)^k factor (member-word-bound), and later
basis elements are dominated by mixed pairs (pair-domination).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from . import jsonio
from .errors import CapExceededError, InputError, InvalidNormError
from .fpcore import (
    DEFAULT_ENUM_CAP,
    GroupElement,
    OrderedBasis,
    as_prime,
    rank,
)
from .norms import Norm, norm_from_config


@dataclass(frozen=True)
class ReductionStep:
    """Record of one argmin choice: which combination became reduced element n.

    ``coeffs`` has length n; its last entry (the coefficient of the incoming
    original vector) is nonzero. ``tie_count`` is how many candidates achieved
    the minimum; ``runner_up_gap`` is the distance to the next distinct norm
    value, None when every candidate ties.
    """

    index: int
    coeffs: tuple[int, ...]
    element: GroupElement
    norm_value: Fraction
    tie_count: int
    runner_up_gap: Fraction | None

    def __post_init__(self):
        if not isinstance(self.index, int) or self.index < 1:
            raise InputError(f"step index must be a positive integer, got {self.index!r}")
        if len(self.coeffs) != self.index:
            raise InputError(
                f"step {self.index} must record {self.index} coefficients, "
                f"got {len(self.coeffs)}")
        if self.coeffs[-1] % self.element.prime.p == 0:
            raise InputError(f"step {self.index}: incoming coefficient must be nonzero")

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "coeffs": list(self.coeffs),
            "element": jsonio.element_to_pairs(self.element),
            "norm": jsonio.frac_to_str(self.norm_value),
            "tie_count": self.tie_count,
            "runner_up_gap": (None if self.runner_up_gap is None
                              else jsonio.frac_to_str(self.runner_up_gap)),
        }


@dataclass(frozen=True)
class ReducedBasis:
    """The reduced basis together with the original and the per-step records.

    Prefix spans agree: span(reduced[:n]) = span(original[:n]) for every n.
    """

    original: OrderedBasis
    reduced: OrderedBasis
    steps: tuple[ReductionStep, ...]

    def __post_init__(self):
        if len(self.original) != len(self.reduced) or len(self.steps) != len(self.reduced):
            raise InputError("original, reduced, and steps must have equal length")
        if self.original.prime != self.reduced.prime:
            raise InputError("original and reduced bases use different primes")
        for n, step in enumerate(self.steps, start=1):
            if step.index != n:
                raise InputError(f"step {n} carries index {step.index}")
            if step.element != self.reduced[n - 1]:
                raise InputError(f"step {n} element does not match the reduced basis")
        for n in range(1, len(self.reduced) + 1):
            joined = list(self.reduced.elems[:n]) + list(self.original.elems[:n])
            if rank(joined, self.original.prime) != n:
                raise InputError(f"prefix spans of length {n} differ")

    @property
    def prime(self):
        return self.original.prime

    def __len__(self):
        return len(self.reduced)

    def to_json_dict(self) -> dict:
        return {
            "prime": self.prime.p,
            "original": [jsonio.element_to_pairs(g) for g in self.original],
            "reduced": [jsonio.element_to_pairs(g) for g in self.reduced],
            "steps": [s.to_json_dict() for s in self.steps],
        }


def reduced_basis_from_json(doc: dict) -> ReducedBasis:
    jsonio.require_keys(doc, ["prime", "original", "reduced", "steps"],
                        what="reduced basis document")
    p = doc["prime"]
    prime = as_prime(p)
    original = OrderedBasis(
        prime, tuple(jsonio.element_from_pairs(p, pairs)
                     for pairs in jsonio.require_list(doc["original"], what="original")))
    reduced = OrderedBasis(
        prime, tuple(jsonio.element_from_pairs(p, pairs)
                     for pairs in jsonio.require_list(doc["reduced"], what="reduced")))
    steps = []
    for s in jsonio.require_list(doc["steps"], what="steps"):
        jsonio.require_keys(s, ["index", "coeffs", "element", "norm",
                                "tie_count", "runner_up_gap"], what="reduction step")
        steps.append(ReductionStep(
            index=s["index"],
            coeffs=tuple(jsonio.require_list(s["coeffs"], what="step coeffs")),
            element=jsonio.element_from_pairs(p, s["element"]),
            norm_value=jsonio.frac_from_str(s["norm"]),
            tie_count=s["tie_count"],
            runner_up_gap=(None if s["runner_up_gap"] is None
                           else jsonio.frac_from_str(s["runner_up_gap"])),
        ))
    return ReducedBasis(original, reduced, tuple(steps))


def _require_validated(norm: Norm) -> None:
    if norm.axiom_report is None:
        raise InvalidNormError("run validate_axioms on the norm first")
    if not norm.axiom_report.ok:
        raise InvalidNormError("the norm failed axiom validation; see its axiom_report")


def reduce_basis(basis: OrderedBasis, norm: Norm, *, cap: int | None = None) -> ReducedBasis:
    """Rewrite the basis so element n is a minimum-norm combination over slot n.

    Element n is the argmin of the norm over all combinations of the first
    n-1 reduced elements plus a nonzero multiple of original element n; ties
    resolve to the lexicographically smallest coefficient vector, so the
    output is fully deterministic. The nonzero multiple matters even in
    slot 1: the axioms allow N(2g) < N(g) once p > 3, and the later word
    floors need whichever multiple is cheapest.
    """
    _require_validated(norm)
    p = basis.prime.p
    if norm.prime != basis.prime:
        raise InputError(f"mismatched primes: {basis.prime.p} vs {norm.prime.p}")
    d = len(basis)
    cap = DEFAULT_ENUM_CAP if cap is None else cap
    if p ** d * (p - 1) > cap:
        raise CapExceededError(
            f"reduction would evaluate up to {p ** d * (p - 1)} candidates, above cap {cap}")

    reduced: list[GroupElement] = []
    steps = []
    for n in range(d):
        incoming = basis[n]
        best_val = None
        best_coeffs = None
        best_elem = None
        tie_count = 0
        runner_up = None
        for prefix in itertools.product(range(p), repeat=n):
            partial = GroupElement.zero(basis.prime)
            for j, lam in enumerate(prefix):
                if lam:
                    partial = partial + reduced[j].smul(lam)
            for lam_new in range(1, p):
                candidate = partial + incoming.smul(lam_new)
                val = norm.eval(candidate)
                if best_val is None or val < best_val:
                    if best_val is not None:
                        runner_up = best_val if runner_up is None else min(runner_up, best_val)
                    best_val = val
                    best_coeffs = prefix + (lam_new,)
                    best_elem = candidate
                    tie_count = 1
                elif val == best_val:
                    tie_count += 1
                else:
                    runner_up = val if runner_up is None else min(runner_up, val)
        steps.append(ReductionStep(
            index=n + 1,
            coeffs=best_coeffs,
            element=best_elem,
            norm_value=best_val,
            tie_count=tie_count,
            runner_up_gap=None if runner_up is None else runner_up - best_val,
        ))
        reduced.append(best_elem)
    return ReducedBasis(
        original=basis,
        reduced=OrderedBasis(basis.prime, tuple(reduced)),
        steps=tuple(steps),
    )


@dataclass(frozen=True)
class LemmaReport:
    """Outcome of one exhaustive inequality check.

    ``max_ratio`` is the largest observed left/right quotient (tightness
    data); ``ratios_by_k`` breaks it down per separation depth where the
    inequality is depth-graded.
    """

    inequality: str
    domain: str
    checked: int
    violations: tuple[dict, ...]
    max_ratio: Fraction | None
    ratios_by_k: dict[int, Fraction] | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict:
        return {
            "inequality": self.inequality,
            "domain": self.domain,
            "checked": self.checked,
            "ok": self.ok,
            "violations": list(self.violations),
            "max_ratio": None if self.max_ratio is None else jsonio.frac_to_str(self.max_ratio),
            "ratios_by_k": (None if self.ratios_by_k is None else
                            {str(k): jsonio.frac_to_str(v)
                             for k, v in sorted(self.ratios_by_k.items())}),
        }


def verify_reduced_properties(reduced: ReducedBasis, norm: Norm, *,
                              max_tuple: int | None = None,
                              cap: int | None = None) -> LemmaReport:
    """Exhaustive check that every word is at least as large as its top term.

    Also re-checks the structural facts: prefix spans match the original
    basis, and the reduced elements are independent. The word scan quantifies
    over coefficient vectors whose top coefficient is nonzero; a zero top
    coefficient is the same statement for a shorter tuple.
    """
    _require_validated(norm)
    p = reduced.prime.p
    d = len(reduced)
    cap = DEFAULT_ENUM_CAP if cap is None else cap
    if p ** d > cap:
        raise CapExceededError(f"word scan needs {p ** d} evaluations, above cap {cap}")
    violations: list[dict] = []

    for n in range(1, d + 1):
        joined = list(reduced.reduced.elems[:n]) + list(reduced.original.elems[:n])
        r = rank(joined, reduced.prime)
        if r != n:
            violations.append({"check": "prefix-span-equality", "n": n, "rank": r})
    r = rank(reduced.reduced.elems, reduced.prime)
    if r != d:
        violations.append({"check": "independence", "rank": r, "size": d})

    elems = reduced.reduced.elems
    top_values = [norm.eval(g) for g in elems]
    checked = 0
    max_ratio = None
    for coeffs in itertools.product(range(p), repeat=d):
        support = [j for j, lam in enumerate(coeffs) if lam]
        if not support:
            continue
        if max_tuple is not None and len(support) > max_tuple:
            continue
        top = support[-1]
        w = GroupElement.zero(reduced.prime)
        for j in support:
            w = w + elems[j].smul(coeffs[j])
        vw = norm.eval(w)
        vt = top_values[top]
        checked += 1
        if vw > 0:
            ratio = vt / vw
            if max_ratio is None or ratio > max_ratio:
                max_ratio = ratio
        if vt > vw:
            violations.append({
                "check": "max-term-minimality",
                "coeffs": list(coeffs),
                "w": jsonio.element_to_pairs(w),
                "top_index": top + 1,
                "value_top": jsonio.frac_to_str(vt),
                "value_w": jsonio.frac_to_str(vw),
            })
    tuple_note = ("all tuple sizes" if max_tuple is None
                  else f"tuple sizes up to {max_tuple}")
    return LemmaReport(
        inequality="max-term-minimality",
        domain=(f"all nonzero coefficient vectors over F_{p}^{d} ({tuple_note}); "
                "the top coefficient is nonzero by construction, a zero top "
                "coefficient restates the check for a shorter tuple"),
        checked=checked,
        violations=tuple(violations),
        max_ratio=max_ratio,
    )


def check_member_word_bound(reduced: ReducedBasis, norm: Norm, *,
                            max_tuple: int = 6, cap: int | None = None) -> LemmaReport:
    """Members of a word are bounded:
    eval(mu * top-k-th term) <= min(mu, p-mu) * (2p)^k * eval(w).

    Quantifies over all words with up to ``max_tuple`` distinct reduced
    indices and all-nonzero coefficients, all separation depths k, and all
    scalars mu. The min(mu, p-mu) factor is the scalar slack: mu copies of
    an element cost at most mu triangle steps (or p-mu via negation), and
    for p > 3 a middle scalar genuinely needs it. Reports the worst observed
    slack-normalized ratio per k.
    """
    _require_validated(norm)
    p = reduced.prime.p
    d = len(reduced)
    count_est = sum(
        _n_choose_k(d, n) * (p - 1) ** n * n * p for n in range(1, min(d, max_tuple) + 1))
    cap = DEFAULT_ENUM_CAP if cap is None else cap
    if count_est > cap:
        raise CapExceededError(f"bound scan needs ~{count_est} evaluations, above cap {cap}")

    elems = reduced.reduced.elems
    scalar_values = [[norm.eval(g.smul(mu)) for mu in range(p)] for g in elems]
    violations: list[dict] = []
    ratios_by_k: dict[int, Fraction] = {}
    checked = 0
    for n in range(1, min(d, max_tuple) + 1):
        for indices in itertools.combinations(range(d), n):
            for coeffs in itertools.product(range(1, p), repeat=n):
                w = GroupElement.zero(reduced.prime)
                for j, lam in zip(indices, coeffs):
                    w = w + elems[j].smul(lam)
                vw = norm.eval(w)
                for k in range(n):
                    target = indices[n - 1 - k]
                    base_bound = (2 * p) ** k * vw
                    for mu in range(p):
                        slack = max(1, min(mu, p - mu))
                        bound = slack * base_bound
                        vt = scalar_values[target][mu]
                        checked += 1
                        if vw > 0:
                            ratio = vt / (slack * vw)
                            if k not in ratios_by_k or ratio > ratios_by_k[k]:
                                ratios_by_k[k] = ratio
                        if vt > bound:
                            violations.append({
                                "check": "member-word-bound",
                                "indices": [j + 1 for j in indices],
                                "coeffs": list(coeffs),
                                "k": k,
                                "mu": mu,
                                "value_term": jsonio.frac_to_str(vt),
                                "value_w": jsonio.frac_to_str(vw),
                                "bound": jsonio.frac_to_str(bound),
                            })
    return LemmaReport(
        inequality="member-word-bound",
        domain=(f"words over up to {min(d, max_tuple)} distinct reduced indices with "
                f"all-nonzero coefficients; k = 0..n-1; mu over F_{p}"),
        checked=checked,
        violations=tuple(violations),
        max_ratio=max(ratios_by_k.values()) if ratios_by_k else None,
        ratios_by_k=ratios_by_k,
    )


def check_pair_domination(reduced: ReducedBasis, norm: Norm) -> LemmaReport:
    """For indices n' < n'': eval(e'_{n''}) <= eval(e'_{n'} + (p-1) e'_{n''})."""
    _require_validated(norm)
    p = reduced.prime.p
    d = len(reduced)
    elems = reduced.reduced.elems
    violations: list[dict] = []
    max_ratio = None
    checked = 0
    for a in range(d):
        for b in range(a + 1, d):
            combo = elems[a] + elems[b].smul(p - 1)
            vc = norm.eval(combo)
            vb = norm.eval(elems[b])
            checked += 1
            if vc > 0:
                ratio = vb / vc
                if max_ratio is None or ratio > max_ratio:
                    max_ratio = ratio
            if vb > vc:
                violations.append({
                    "check": "pair-domination",
                    "n_prime": a + 1,
                    "n_dprime": b + 1,
                    "value_later": jsonio.frac_to_str(vb),
                    "value_combo": jsonio.frac_to_str(vc),
                })
    return LemmaReport(
        inequality="pair-domination",
        domain=f"all index pairs n' < n'' in 1..{d}",
        checked=checked,
        violations=tuple(violations),
        max_ratio=max_ratio,
    )


def _n_choose_k(n: int, k: int) -> int:
    return math.comb(n, k)


def reduce_from_config(cfg: dict, *, cap: int | None = None,
                       threads: int = 1) -> tuple[Norm, ReducedBasis]:
    """Convenience used by the CLI: build, validate, and reduce in one call."""
    from .norms import validate_axioms

    norm = norm_from_config(cfg, cap=cap)
    validate_axioms(norm, cap=cap, threads=threads)
    basis = OrderedBasis.standard(norm.prime, norm.dim)
    return norm, reduce_basis(basis, norm, cap=cap)
