"""Null-subsequence selection and quantitative independence certificates.

Finite truncations have no genuine sequences converging to zero, so the
pipeline works with a stand-in: candidates ordered by norm. From such a list,
select_null_subsequence picks the earliest subsequence whose term norms drop
below the thresholds 1/(4p)^n while the top reduced-basis position strictly
increases. The extracted family of reduced-basis elements then gets an
explicit epsilon/delta modulus: small words force small members.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from . import jsonio
from .errors import (
    CapExceededError,
    ExhaustedError,
    InputError,
    NormBoundFailedError,
)
from .fpcore import (
    DEFAULT_ENUM_CAP,
    GroupElement,
    Truncation,
    is_independent,
    solve_in_span,
)
from .norms import GraevBooleanNorm, Norm, PointedMetricSpace
from .reduction import ReducedBasis


def threshold(p: int, n: int) -> Fraction:
    """The n-th admission threshold 1/(4p)^n."""
    return Fraction(1, (4 * p) ** n)


def reduced_max_position(g: GroupElement, reduced: ReducedBasis) -> int:
    """Largest position with a nonzero coefficient in the reduced-basis expansion.

    Zero for the zero element. Raises NotInSpan via decompose when g lies
    outside the truncation span.
    """
    coeffs = solve_in_span(g, reduced.reduced.elems)
    if coeffs is None:
        raise InputError(f"{g!r} is not in the span of the reduced basis")
    top = 0
    for j, lam in enumerate(coeffs, start=1):
        if lam:
            top = j
    return top


@dataclass(frozen=True)
class NullSequence:
    """A finite stand-in for a sequence converging to zero.

    Term n (1-based) has norm strictly below 1/(4p)^n, and the top reduced
    position strictly increases, which also forces the terms to be pairwise
    distinct.
    """

    prime_p: int
    terms: tuple[GroupElement, ...]
    norms: tuple[Fraction, ...]
    maxes: tuple[int, ...]

    def __post_init__(self):
        if not (len(self.terms) == len(self.norms) == len(self.maxes)):
            raise InputError("terms, norms, and maxes must have equal length")
        last = 0
        for n, (g, v, m) in enumerate(zip(self.terms, self.norms, self.maxes), start=1):
            if g.is_zero():
                raise InputError(f"term {n} is zero; terms must be nonzero")
            if m <= last:
                raise InputError(f"top positions must strictly increase (term {n})")
            if v >= threshold(self.prime_p, n):
                raise InputError(
                    f"term {n} has norm {v}, not below 1/(4p)^{n} = "
                    f"{threshold(self.prime_p, n)}")
            last = m

    def __len__(self):
        return len(self.terms)

    def to_json_dict(self) -> dict:
        return {
            "prime": self.prime_p,
            "terms": [jsonio.element_to_pairs(g) for g in self.terms],
            "norms": [jsonio.frac_to_str(v) for v in self.norms],
            "maxes": list(self.maxes),
            "thresholds": [jsonio.frac_to_str(threshold(self.prime_p, n))
                           for n in range(1, len(self.terms) + 1)],
        }


def norm_sorted_span(norm: Norm, *, cap: int | None = None) -> list[GroupElement]:
    """The whole truncation ordered by (norm value, rank): the canonical
    finite stand-in for a sequence converging to zero."""
    tr = Truncation(norm.prime, norm.dim, cap=cap)
    ranked = sorted(range(tr.size), key=lambda r: (norm.eval(tr.element_of(r)), r))
    return [tr.element_of(r) for r in ranked]


def select_null_subsequence(seq, norm: Norm, reduced: ReducedBasis,
                            length: int) -> NullSequence:
    """Earliest subsequence meeting the thresholds with strictly rising maxes.

    "Earliest" is lexicographic on the chosen index tuple: the first slot
    takes the lowest usable position from which the remaining slots can still
    be filled, then the second, and so on. When no qualifying subsequence of
    the requested length exists anywhere in seq, raises Exhausted carrying
    the longest achievable length and the constraint that blocks the next
    slot ("threshold" when no candidate is small enough, "max-progression"
    when small candidates exist but never with a rising top position).
    """
    if length < 0:
        raise InputError(f"requested length must be nonnegative, got {length}")
    p = norm.prime.p
    candidates = list(seq)
    if length == 0:
        return NullSequence(p, (), (), ())
    norms = [norm.eval(g) for g in candidates]
    maxes = [reduced_max_position(g, reduced) for g in candidates]
    thresholds = [threshold(p, n) for n in range(1, length + 1)]
    N = len(candidates)

    # feas[s][i]: slots s..length-1 can be filled starting by taking index i.
    # suffix_best[s][i]: largest top position among feasible starts at >= i,
    # which is what the previous slot needs to know to continue the chain.
    feas = [[False] * N for _ in range(length)]
    suffix_best = [[0] * (N + 1) for _ in range(length)]
    for s in range(length - 1, -1, -1):
        for i in range(N - 1, -1, -1):
            ok_here = maxes[i] >= 1 and norms[i] < thresholds[s]
            if ok_here and s < length - 1:
                ok_here = suffix_best[s + 1][i + 1] > maxes[i]
            feas[s][i] = ok_here
            suffix_best[s][i] = max(suffix_best[s][i + 1], maxes[i] if ok_here else 0)

    if not any(feas[0]):
        achievable = _achievable_length(norms, maxes, p, length)
        failed = achievable + 1
        t = threshold(p, failed)
        if not any(m >= 1 and v < t for v, m in zip(norms, maxes)):
            constraint = "threshold"
        else:
            constraint = "max-progression"
        raise ExhaustedError(
            f"no qualifying subsequence of length {length}; "
            f"achievable length is {achievable}, slot {failed} blocked by "
            f"the {constraint} constraint",
            achievable_length=achievable, failed_slot=failed, constraint=constraint)

    chosen: list[int] = []
    last_max = 0
    pos = 0
    for s in range(length):
        i = pos
        while True:
            good = feas[s][i] and maxes[i] > last_max
            if good and s < length - 1:
                good = suffix_best[s + 1][i + 1] > maxes[i]
            if good:
                break
            i += 1
        chosen.append(i)
        last_max = maxes[i]
        pos = i + 1
    return NullSequence(
        p,
        tuple(candidates[i] for i in chosen),
        tuple(norms[i] for i in chosen),
        tuple(maxes[i] for i in chosen),
    )


def _achievable_length(norms, maxes, p: int, limit: int) -> int:
    """Longest feasible subsequence length, capped at limit."""
    N = len(norms)
    for slots in range(limit, 0, -1):
        first_row = [False] * N
        prev_suffix = [0] * (N + 1)
        for s in range(slots - 1, -1, -1):
            suffix = [0] * (N + 1)
            for i in range(N - 1, -1, -1):
                good = maxes[i] >= 1 and norms[i] < threshold(p, s + 1)
                if good and s < slots - 1:
                    good = prev_suffix[i + 1] > maxes[i]
                if s == 0:
                    first_row[i] = good
                suffix[i] = max(suffix[i + 1], maxes[i] if good else 0)
            prev_suffix = suffix
        if any(first_row):
            return slots
    return 0


@dataclass(frozen=True)
class IndependentFamily:
    """Reduced-basis elements indexed by the maxes of a null sequence.

    source is the selected sequence the family came from; families built
    directly (for comparison experiments) may leave it as None.
    """

    members: tuple[GroupElement, ...]
    indices: tuple[int, ...]
    norms: tuple[Fraction, ...]
    source: NullSequence | None

    def __len__(self):
        return len(self.members)

    def to_json_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "members": [jsonio.element_to_pairs(g) for g in self.members],
            "norms": [jsonio.frac_to_str(v) for v in self.norms],
            "source": None if self.source is None else self.source.to_json_dict(),
        }


def extract_independent_family(seq: NullSequence, reduced: ReducedBasis,
                               norm: Norm) -> IndependentFamily:
    """Map term n to the reduced element at its top position.

    The members inherit the thresholds: eval(member n) <= eval(term n) <
    1/(4p)^n, the first inequality being max-term-minimality. A failure of
    that bound cannot come from valid inputs, so it raises NormBoundFailed.
    """
    p = norm.prime.p
    if seq.prime_p != p:
        raise InputError(f"mismatched primes: {seq.prime_p} vs {p}")
    members = []
    norms = []
    for n, k in enumerate(seq.maxes, start=1):
        if k > len(reduced):
            raise InputError(f"term {n} has top position {k}, beyond the basis")
        a = reduced.reduced[k - 1]
        v = norm.eval(a)
        if v >= threshold(p, n):
            raise NormBoundFailedError(
                f"member {n} (reduced element {k}) has norm {v}, not below "
                f"1/(4p)^{n}; the reduction or the norm is inconsistent")
        members.append(a)
        norms.append(v)
    fam = IndependentFamily(tuple(members), tuple(seq.maxes), tuple(norms), seq)
    if not is_independent(fam.members, norm.prime):
        raise NormBoundFailedError("extracted members are not independent")
    return fam


@dataclass(frozen=True)
class ModulusReport:
    """Outcome of the quantitative independence check on an extracted family."""

    prime_p: int
    l: int
    m: int
    eps: Fraction
    delta: Fraction
    combos_checked: int
    small_norm_combos: int
    splits_checked: int
    violations: tuple[dict, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict:
        return {
            "prime": self.prime_p,
            "l": self.l,
            "m": self.m,
            "eps": jsonio.frac_to_str(self.eps),
            "delta": jsonio.frac_to_str(self.delta),
            "combos_checked": self.combos_checked,
            "small_norm_combos": self.small_norm_combos,
            "splits_checked": self.splits_checked,
            "ok": self.ok,
            "violations": list(self.violations),
        }


def independence_modulus(family: IndependentFamily, norm: Norm, l: int, m: int,
                         *, cap: int | None = None) -> ModulusReport:
    """Check that norm-small words have norm-small members, quantitatively.

    With delta = 1/(4p)^l and eps = 1/2^(l-1): every nonzero word w over the
    first m members with eval(w) < delta must use only members of norm < eps.
    Additionally, for every split point s in l..m-1, the negated tail of any
    word is bounded by p times the summed tail member norms, and that sum
    stays below 1/(4p)^s.
    """
    p = norm.prime.p
    if not 1 <= l:
        raise InputError(f"l must be at least 1, got {l}")
    if not 1 <= m <= len(family):
        raise InputError(f"m must be in 1..{len(family)}, got {m}")
    cap = DEFAULT_ENUM_CAP if cap is None else cap
    if p ** m > cap:
        raise CapExceededError(f"modulus scan needs {p ** m} words, above cap {cap}")
    eps = Fraction(1, 2 ** (l - 1))
    delta = threshold(p, l)
    members = family.members[:m]
    member_norms = [norm.eval(a) for a in members]
    violations: list[dict] = []
    combos = 0
    small = 0
    for coeffs in itertools.product(range(p), repeat=m):
        support = [i for i, lam in enumerate(coeffs) if lam]
        if not support:
            continue
        w = GroupElement.zero(norm.prime)
        for i in support:
            w = w + members[i].smul(coeffs[i])
        vw = norm.eval(w)
        combos += 1
        if vw < delta:
            small += 1
            for i in support:
                if member_norms[i] >= eps:
                    violations.append({
                        "check": "modulus",
                        "coeffs": list(coeffs),
                        "w": jsonio.element_to_pairs(w),
                        "member_index": i + 1,
                        "value_w": jsonio.frac_to_str(vw),
                        "value_member": jsonio.frac_to_str(member_norms[i]),
                        "eps": jsonio.frac_to_str(eps),
                        "delta": jsonio.frac_to_str(delta),
                    })
    splits = 0
    for s in range(l, m):
        tail_budget = p * sum(member_norms[s:m], Fraction(0))
        splits += 1
        if tail_budget >= threshold(p, s):
            violations.append({
                "check": "split-sum",
                "split": s,
                "tail_budget": jsonio.frac_to_str(tail_budget),
                "bound": jsonio.frac_to_str(threshold(p, s)),
            })
        for coeffs in itertools.product(range(p), repeat=m - s):
            support = [i for i, lam in enumerate(coeffs) if lam]
            if not support:
                continue
            tail = GroupElement.zero(norm.prime)
            for i in support:
                tail = tail + members[s + i].smul(coeffs[i])
            neg_tail = tail.smul(p - 1)
            v = norm.eval(neg_tail)
            if v > tail_budget:
                violations.append({
                    "check": "split-combo",
                    "split": s,
                    "coeffs": list(coeffs),
                    "tail": jsonio.element_to_pairs(tail),
                    "value_negated_tail": jsonio.frac_to_str(v),
                    "tail_budget": jsonio.frac_to_str(tail_budget),
                })
    return ModulusReport(
        prime_p=p, l=l, m=m, eps=eps, delta=delta,
        combos_checked=combos, small_norm_combos=small, splits_checked=splits,
        violations=tuple(violations),
    )


@dataclass(frozen=True)
class CertificateResult:
    """Largest working grid delta for an epsilon, or a concrete counterexample."""

    eps: Fraction
    grid: tuple[Fraction, ...]
    delta: Fraction | None
    min_bad_value: Fraction | None
    witness: dict | None
    combos_checked: int

    @property
    def is_counterexample(self) -> bool:
        return self.delta is None

    def to_json_dict(self) -> dict:
        return {
            "eps": jsonio.frac_to_str(self.eps),
            "grid": [jsonio.frac_to_str(x) for x in self.grid],
            "delta": None if self.delta is None else jsonio.frac_to_str(self.delta),
            "min_bad_value": (None if self.min_bad_value is None
                              else jsonio.frac_to_str(self.min_bad_value)),
            "witness": self.witness,
            "counterexample": self.is_counterexample,
            "combos_checked": self.combos_checked,
        }


def epsilon_delta_certificate(xs, norm: Norm, eps, *, exponents=None,
                              search_depth: int = 3, max_terms: int | None = None,
                              cap: int | None = None) -> CertificateResult:
    """Direct check of the small-word-forces-small-terms definition.

    A combination is "bad" when one of its used terms k_i * x_i already has
    norm >= eps; delta works iff every bad combination has norm >= delta.
    Returns the largest grid value 1/(4p)^j (j = 1..search_depth) below the
    smallest bad-combination norm, or the witness of the smallest bad
    combination when even the finest grid value fails.

    With ``exponents`` fixed, only that single combination is examined;
    otherwise all exponent vectors with at most ``max_terms`` nonzero entries
    are enumerated.
    """
    xs = list(xs)
    eps = Fraction(eps)
    if eps <= 0:
        raise InputError(f"eps must be positive, got {eps}")
    if search_depth < 1:
        raise InputError(f"search_depth must be at least 1, got {search_depth}")
    p = norm.prime.p
    n = len(xs)
    for x in xs:
        if x.prime != norm.prime:
            raise InputError(f"mismatched primes: {x.prime.p} vs {p}")
    grid = tuple(threshold(p, j) for j in range(1, search_depth + 1))

    if exponents is not None:
        exponents = [k % p for k in exponents]
        if len(exponents) != n:
            raise InputError(f"need {n} exponents, got {len(exponents)}")
        combos = [tuple(exponents)]
    else:
        limit = n if max_terms is None else min(max_terms, n)
        est = sum(math.comb(n, t) * (p - 1) ** t for t in range(1, limit + 1))
        capv = DEFAULT_ENUM_CAP if cap is None else cap
        if est > capv:
            raise CapExceededError(
                f"certificate scan needs ~{est} combinations, above cap {capv}")
        combos = _exponent_vectors(n, p, limit)

    min_bad = None
    witness = None
    checked = 0
    for vec in combos:
        support = [i for i, k in enumerate(vec) if k]
        if not support:
            continue
        checked += 1
        bad_term = None
        for i in support:
            if norm.eval(xs[i].smul(vec[i])) >= eps:
                bad_term = i
                break
        if bad_term is None:
            continue
        w = GroupElement.zero(norm.prime)
        for i in support:
            w = w + xs[i].smul(vec[i])
        vw = norm.eval(w)
        if min_bad is None or vw < min_bad:
            min_bad = vw
            witness = {
                "exponents": list(vec),
                "w": jsonio.element_to_pairs(w),
                "term_index": bad_term + 1,
                "value_w": jsonio.frac_to_str(vw),
                "value_term": jsonio.frac_to_str(norm.eval(xs[bad_term].smul(vec[bad_term]))),
            }
    if min_bad is None:
        return CertificateResult(eps, grid, grid[0], None, None, checked)
    for g in grid:
        if g <= min_bad:
            return CertificateResult(eps, grid, g, min_bad, witness, checked)
    return CertificateResult(eps, grid, None, min_bad, witness, checked)


def _exponent_vectors(n: int, p: int, max_terms: int):
    for t in range(1, max_terms + 1):
        for idxs in itertools.combinations(range(n), t):
            for vals in itertools.product(range(1, p), repeat=t):
                vec = [0] * n
                for j, v in zip(idxs, vals):
                    vec[j] = v
                yield tuple(vec)


@dataclass(frozen=True)
class BooleanWitnessReport:
    """Shrinking pair norms against bounded singleton norms on a line space."""

    n_points: int
    entries: tuple[dict, ...]
    certificate: CertificateResult

    def to_json_dict(self) -> dict:
        return {
            "n_points": self.n_points,
            "entries": list(self.entries),
            "certificate": self.certificate.to_json_dict(),
        }


def convergent_line_space(n_points: int) -> PointedMetricSpace:
    """Basepoint 0, the point x = 1, and y_n = 1 + 1/n for n = 1..n_points."""
    if n_points < 2:
        raise InputError(f"need at least 2 points, got {n_points}")
    pts = [Fraction(0), Fraction(1)] + [1 + Fraction(1, k) for k in range(1, n_points + 1)]
    rows = [[abs(a - b) for b in pts] for a in pts]
    return PointedMetricSpace(rows)


def boolean_counterexample(n_points: int, *, search_depth: int = 3) -> BooleanWitnessReport:
    """The convergent-sequence obstruction: pairs {x, y_n} get arbitrarily small.

    Every single generator keeps norm >= 1, yet the two-element subsets
    {x, y_n} have norm 1/n, so no delta can force both members of a small
    word below eps = 1/2. The certificate run makes that failure explicit.
    """
    space = convergent_line_space(n_points)
    norm = GraevBooleanNorm(space)
    x = GroupElement.unit(2, 1)
    entries = []
    for k in range(1, n_points + 1):
        y = GroupElement.unit(2, k + 1)
        pair = x + y
        v_pair = norm.eval(pair)
        v_x = norm.eval(x)
        entries.append({
            "n": k,
            "pair": jsonio.element_to_pairs(pair),
            "value_pair": jsonio.frac_to_str(v_pair),
            "value_x": jsonio.frac_to_str(v_x),
            "ratio": jsonio.frac_to_str(v_x / v_pair),
        })
    xs = [GroupElement.unit(2, i) for i in range(1, n_points + 2)]
    cert = epsilon_delta_certificate(xs, norm, Fraction(1, 2),
                                     search_depth=search_depth, max_terms=2)
    return BooleanWitnessReport(n_points, tuple(entries), cert)
