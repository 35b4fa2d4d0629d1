"""Norm families on truncated groups of prime exponent.

All values are exact rationals (fractions.Fraction); no floating point enters
any comparison. Hot paths (pair enumeration for the triangle inequality,
shortest-path completion of a cost) run on integer numerators over a common
denominator when that is safe, which is the same arithmetic exactly.

A norm here satisfies
  (1) N(g) = 0 iff g = 0,
  (2) N(-g) = N(g),
  (3) N(g + h) <= N(g) + N(h),
and validate_axioms checks all three exhaustively on the truncated domain.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import jsonio
from .errors import CapExceededError, InputError
from .fpcore import (
    DEFAULT_ENUM_CAP,
    DEFAULT_MATCHING_CAP,
    GroupElement,
    Prime,
    Truncation,
    as_prime,
)

# Guards for the integer fast path: common denominator and scaled numerators
# must stay far from int64 overflow (sums of two values, path sums of size^1).
_MAX_COMMON_DEN = 1 << 44
_MAX_SCALED_NUM = 1 << 52


def _as_fraction(value, what: str) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    raise InputError(f"{what} must be an exact rational (Fraction or int), got {value!r}")


def _common_denominator(values: Iterable[Fraction]) -> int | None:
    """lcm of denominators, or None when it grows past the fast-path guard."""
    lcm = 1
    for v in values:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
        if lcm > _MAX_COMMON_DEN:
            return None
    return lcm


class PointedMetricSpace:
    """A finite metric space with a basepoint, distances exact rationals.

    Ingested matrices are repaired deterministically: the diagonal is forced
    to zero, each pair is symmetrized by the smaller directed entry, then the
    matrix is closed under shortest paths so the triangle inequality holds.
    Distinct points at repaired distance zero are rejected.
    """

    def __init__(self, matrix: Sequence[Sequence], basepoint: int = 0):
        n = len(matrix)
        if n < 1:
            raise InputError("metric space needs at least one point")
        if not isinstance(basepoint, int) or isinstance(basepoint, bool) or not 0 <= basepoint < n:
            raise InputError(f"basepoint {basepoint!r} out of range for {n} points")
        rows = []
        for r in matrix:
            if len(r) != n:
                raise InputError("distance matrix must be square")
            rows.append([_as_fraction(x, "distance") for x in r])
        for i in range(n):
            for j in range(n):
                if rows[i][j] < 0:
                    raise InputError(f"negative distance at ({i}, {j})")
        for i in range(n):
            rows[i][i] = Fraction(0)
            for j in range(i + 1, n):
                d = min(rows[i][j], rows[j][i])
                rows[i][j] = rows[j][i] = d
        rows = self._closure(rows)
        for i in range(n):
            for j in range(n):
                if i != j and rows[i][j] == 0:
                    raise InputError(f"points {i} and {j} are distinct but at distance 0")
        self.n_points = n
        self.basepoint = basepoint
        self._dist = tuple(tuple(r) for r in rows)

    @staticmethod
    def _closure(rows: list[list[Fraction]]) -> list[list[Fraction]]:
        n = len(rows)
        # Python integers cannot overflow, so the numerator path is safe for
        # any denominator that is merely large; bail out only when the common
        # denominator is so incompatible that scaled numerators get huge.
        den = 1
        for r in rows:
            for x in r:
                den = den * x.denominator // math.gcd(den, x.denominator)
                if den > 1 << 512:
                    den = None
                    break
            if den is None:
                break
        if den is not None:
            # Floyd-Warshall on integer numerators (exact, and much faster).
            m = [[int(x * den) for x in r] for r in rows]
            for k in range(n):
                mk = m[k]
                for i in range(n):
                    mik = m[i][k]
                    mi = m[i]
                    for j in range(n):
                        alt = mik + mk[j]
                        if alt < mi[j]:
                            mi[j] = alt
            return [[Fraction(x, den) for x in r] for r in m]
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    alt = rows[i][k] + rows[k][j]
                    if alt < rows[i][j]:
                        rows[i][j] = alt
        return rows

    def dist(self, i: int, j: int) -> Fraction:
        return self._dist[i][j]

    @property
    def nonbase(self) -> tuple[int, ...]:
        """Point indices other than the basepoint, in natural order."""
        return tuple(i for i in range(self.n_points) if i != self.basepoint)

    def to_json_dict(self) -> dict:
        return {
            "basepoint": self.basepoint,
            "dist": [[jsonio.frac_to_str(x) for x in row] for row in self._dist],
        }


def graev_norm(space: PointedMetricSpace, points: Iterable[int],
               *, matching_cap: int | None = None) -> Fraction:
    """Minimum total cost of covering ``points`` by pairs and singletons.

    A pair {x, y} costs dist(x, y); a singleton {x} costs dist(x, basepoint).
    Computed by a memoized dynamic program over subsets; the recursion fixes
    the lowest remaining point and either pairs it or leaves it alone.
    """
    pts = sorted(set(points))
    for x in pts:
        if not isinstance(x, int) or isinstance(x, bool) or not 0 <= x < space.n_points:
            raise InputError(f"point index {x!r} out of range")
        if x == space.basepoint:
            raise InputError("the basepoint cannot appear in a norm argument")
    cap = DEFAULT_MATCHING_CAP if matching_cap is None else matching_cap
    if len(pts) > cap:
        raise CapExceededError(f"{len(pts)} points exceed the matching cap {cap}")
    base = space.basepoint
    memo: dict[int, Fraction] = {0: Fraction(0)}

    def best(mask: int) -> Fraction:
        got = memo.get(mask)
        if got is not None:
            return got
        low = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << low)
        value = space.dist(pts[low], base) + best(rest)
        m = rest
        while m:
            j = (m & -m).bit_length() - 1
            m &= m - 1
            alt = space.dist(pts[low], pts[j]) + best(rest & ~(1 << j))
            if alt < value:
                value = alt
        memo[mask] = value
        return value

    return best((1 << len(pts)) - 1)


class CostFunction:
    """A symmetric positive cost on the nonzero elements of a truncation."""

    def __init__(self, p, dim: int, values_by_rank: Sequence[Fraction | None],
                 *, cap: int | None = None):
        self.prime = as_prime(p)
        self.truncation = Truncation(self.prime, dim, cap=cap)
        self.dim = dim
        size = self.truncation.size
        if len(values_by_rank) != size:
            raise InputError(f"cost table must have {size} entries, got {len(values_by_rank)}")
        vals: list[Fraction | None] = [None] * size
        for r in range(1, size):
            v = values_by_rank[r]
            if v is None:
                raise InputError(f"cost missing for element of rank {r}")
            v = _as_fraction(v, "cost value")
            if v <= 0:
                raise InputError(f"cost values must be positive, got {v} at rank {r}")
            vals[r] = v
        for r in range(1, size):
            nr = self.truncation.neg_rank(r)
            if vals[r] != vals[nr]:
                raise InputError(f"cost must satisfy c(g) = c(-g); differs at rank {r}")
        self._vals = vals

    @classmethod
    def from_pairs(cls, p, dim: int, pairs: Iterable[tuple[GroupElement, Fraction]],
                   *, cap: int | None = None) -> "CostFunction":
        prime = as_prime(p)
        tr = Truncation(prime, dim, cap=cap)
        vals: list[Fraction | None] = [None] * tr.size
        for g, v in pairs:
            r = tr.rank_of(g)
            if r == 0:
                raise InputError("the zero element takes no cost entry")
            v = _as_fraction(v, "cost value")
            if vals[r] is not None and vals[r] != v:
                raise InputError(f"conflicting cost entries for {g!r}")
            vals[r] = v
        return cls(prime, dim, vals, cap=cap)

    def value_of_rank(self, r: int) -> Fraction:
        if r == 0:
            raise InputError("the zero element has no cost")
        return self._vals[r]

    def value(self, g: GroupElement) -> Fraction:
        return self.value_of_rank(self.truncation.rank_of(g))

    def to_entries(self) -> list[dict]:
        tr = self.truncation
        return [
            {"element": jsonio.element_to_pairs(tr.element_of(r)),
             "value": jsonio.frac_to_str(self._vals[r])}
            for r in range(1, tr.size)
        ]


def random_cost(seed: int, p, dim: int, low, high, *, steps: int = 60,
                cap: int | None = None) -> CostFunction:
    """Deterministic pseudorandom cost with values on a grid in [low, high].

    Values are low + (high-low) * k/steps for k drawn by random.Random(seed),
    so every value of one cost shares a denominator. Negation symmetry holds
    because the pair {g, -g} is assigned from a single draw.
    """
    low = _as_fraction(low, "low")
    high = _as_fraction(high, "high")
    if not 0 < low <= high:
        raise InputError(f"need 0 < low <= high, got {low} and {high}")
    if steps < 1:
        raise InputError("steps must be positive")
    prime = as_prime(p)
    tr = Truncation(prime, dim, cap=cap)
    rng = Random(seed)
    span = high - low
    vals: list[Fraction | None] = [None] * tr.size
    for r in range(1, tr.size):
        if vals[r] is not None:
            continue
        v = low + span * Fraction(rng.randrange(steps + 1), steps)
        vals[r] = v
        vals[tr.neg_rank(r)] = v
    return CostFunction(prime, dim, vals, cap=cap)


def graded_cost(seed: int, p, dim: int, *, steps: int = 60,
                cap: int | None = None) -> CostFunction:
    """Pseudorandom cost whose completion sorts the span by leading index.

    All values sit in [K/2, K) for K = 1/(4p)^dim, so every two-step path
    costs at least K and the completed norm equals the cost itself. Within
    that window, elements whose largest nonzero index is k draw from the
    k-th of dim disjoint sub-bands, in increasing order. The completed norm
    therefore lists the whole span in leading-index order, which guarantees
    a chain of strictly increasing leading indices of any length up to dim,
    with every value already below 1/(4p)^dim.
    """
    if steps < 1:
        raise InputError("steps must be positive")
    prime = as_prime(p)
    tr = Truncation(prime, dim, cap=cap)
    K = Fraction(1, (4 * prime.p) ** dim)
    width = K / (2 * dim)
    rng = Random(seed)
    vals: list[Fraction | None] = [None] * tr.size
    for r in range(1, tr.size):
        if vals[r] is not None:
            continue
        k = tr.element_of(r).max_index
        band_low = K / 2 + (k - 1) * width
        v = band_low + width * Fraction(rng.randrange(steps), steps)
        vals[r] = v
        vals[tr.neg_rank(r)] = v
    return CostFunction(prime, dim, vals, cap=cap)


def random_metric_space(seed: int, n_points: int, low, high, *, basepoint: int = 0,
                        steps: int = 60) -> PointedMetricSpace:
    """Seeded random metric space; raw entries land in [low, high] before repair."""
    low = _as_fraction(low, "low")
    high = _as_fraction(high, "high")
    if not 0 < low <= high:
        raise InputError(f"need 0 < low <= high, got {low} and {high}")
    if n_points < 1:
        raise InputError("need at least one point")
    rng = Random(seed)
    span = high - low
    rows = [[Fraction(0)] * n_points for _ in range(n_points)]
    for i in range(n_points):
        for j in range(i + 1, n_points):
            rows[i][j] = rows[j][i] = low + span * Fraction(rng.randrange(steps + 1), steps)
    return PointedMetricSpace(rows, basepoint=basepoint)


class Norm:
    """Base class; concrete families implement _eval on the truncated domain."""

    kind = "abstract"

    def __init__(self, p, dim: int):
        self.prime = as_prime(p)
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise InputError(f"dimension must be a positive integer, got {dim!r}")
        self.dim = dim
        self._axiom_report: AxiomReport | None = None

    @property
    def is_validated(self) -> bool:
        return self._axiom_report is not None and self._axiom_report.ok

    @property
    def axiom_report(self) -> "AxiomReport | None":
        return self._axiom_report

    def eval(self, g: GroupElement) -> Fraction:
        if g.prime != self.prime:
            raise InputError(f"mismatched primes: {g.prime.p} vs {self.prime.p}")
        if g.max_index > self.dim:
            raise InputError(
                f"index {g.max_index} outside the norm's truncation (dim {self.dim})")
        return self._eval(g)

    def _eval(self, g: GroupElement) -> Fraction:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


class TableNorm(Norm):
    """Explicit lookup table covering every nonzero element of the truncation."""

    kind = "table"

    def __init__(self, p, dim: int, entries: Iterable[tuple[GroupElement, Fraction]],
                 *, cap: int | None = None):
        super().__init__(p, dim)
        self._tr = Truncation(self.prime, dim, cap=cap)
        vals: list[Fraction | None] = [None] * self._tr.size
        for g, v in entries:
            r = self._tr.rank_of(g)
            v = _as_fraction(v, "table value")
            if v < 0:
                raise InputError(f"table values cannot be negative, got {v}")
            if vals[r] is not None and vals[r] != v:
                raise InputError(f"conflicting table entries for {g!r}")
            vals[r] = v
        missing = [r for r in range(1, self._tr.size) if vals[r] is None]
        if missing:
            raise InputError(
                f"table must cover every nonzero element of the truncation; "
                f"{len(missing)} entries missing (first: rank {missing[0]})")
        if vals[0] is None:
            vals[0] = Fraction(0)
        self._vals = vals

    def _eval(self, g: GroupElement) -> Fraction:
        return self._vals[self._tr.rank_of(g)]

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "prime": self.prime.p,
            "dim": self.dim,
            "entries": [
                {"element": jsonio.element_to_pairs(self._tr.element_of(r)),
                 "value": jsonio.frac_to_str(self._vals[r])}
                for r in range(self._tr.size)
            ],
        }


class UltrametricProductNorm(Norm):
    """max of per-index weights over the support; weights default to 1/i.

    Satisfies the strong inequality N(g+h) <= max(N(g), N(h)) for any positive
    weights, since the support of a sum is contained in the union of supports.
    """

    kind = "ultrametric"

    def __init__(self, p, dim: int, weights: Sequence[Fraction] | None = None):
        super().__init__(p, dim)
        if weights is None:
            ws = tuple(Fraction(1, i) for i in range(1, dim + 1))
        else:
            ws = tuple(_as_fraction(w, "weight") for w in weights)
            if len(ws) != dim:
                raise InputError(f"need {dim} weights, got {len(ws)}")
            if any(w <= 0 for w in ws):
                raise InputError("weights must be positive")
        self.weights = ws

    def _eval(self, g: GroupElement) -> Fraction:
        if g.is_zero():
            return Fraction(0)
        return max(self.weights[i - 1] for i in g.support)

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "prime": self.prime.p,
            "dim": self.dim,
            "weights": [jsonio.frac_to_str(w) for w in self.weights],
        }


class CostCompletionNorm(Norm):
    """Largest norm below a cost: minimum over decompositions of the summed cost.

    Equivalently the single-source shortest-path distance from 0 in the
    complete Cayley graph whose edge {u, v} weighs c(u - v). The whole value
    table is computed once at construction; evaluation is a lookup.
    """

    kind = "cost_completion"

    def __init__(self, cost: CostFunction, *, descriptor: dict | None = None):
        super().__init__(cost.prime, cost.dim)
        self.cost = cost
        self._tr = cost.truncation
        self._vals = _shortest_path_values(self._tr, cost)
        self._descriptor = descriptor

    def _eval(self, g: GroupElement) -> Fraction:
        return self._vals[self._tr.rank_of(g)]

    def describe(self) -> dict:
        out = {"kind": self.kind, "prime": self.prime.p, "dim": self.dim}
        if self._descriptor is not None:
            out.update(self._descriptor)
        else:
            out["costs"] = self.cost.to_entries()
        return out


def _shortest_path_values(tr: Truncation, cost: CostFunction) -> list[Fraction]:
    size = tr.size
    raw = [None] + [cost.value_of_rank(r) for r in range(1, size)]
    den = _common_denominator(v for v in raw[1:])
    if den is not None and all(v.numerator * (den // v.denominator) <= _MAX_SCALED_NUM
                               for v in raw[1:]):
        return _dijkstra_int(tr, raw, den)
    return _dijkstra_frac(tr, raw)


def _dijkstra_int(tr: Truncation, raw: list[Fraction | None], den: int) -> list[Fraction]:
    size = tr.size
    inf = np.int64(1) << np.int64(61)
    w = np.empty(size, dtype=np.int64)
    w[0] = inf  # self-loops never relax anything
    for r in range(1, size):
        v = raw[r]
        w[r] = v.numerator * (den // v.denominator)
    dist = np.full(size, inf, dtype=np.int64)
    dist[0] = 0
    done = np.zeros(size, dtype=bool)
    for _ in range(size):
        masked = np.where(done, inf, dist)
        u = int(masked.argmin())
        if masked[u] >= inf:
            break
        done[u] = True
        cand = dist[u] + w[tr.sub_rank_row(u)]
        np.minimum(dist, cand, out=dist)
    return [Fraction(int(dist[r]), den) for r in range(size)]


def _dijkstra_frac(tr: Truncation, raw: list[Fraction | None]) -> list[Fraction]:
    size = tr.size
    dist: list[Fraction | None] = [None] * size
    dist[0] = Fraction(0)
    done = [False] * size
    heap: list[tuple[Fraction, int]] = [(Fraction(0), 0)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        row = tr.sub_rank_row(u)
        for v in range(size):
            if v == u or done[v]:
                continue
            nd = d + raw[int(row[v])]
            if dist[v] is None or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return [d if d is not None else Fraction(0) for d in dist]


class GraevBooleanNorm(Norm):
    """Graev-style norm on the Boolean group of a pointed metric space.

    Elements are finite subsets of the non-basepoint points (prime 2, one
    group index per point in natural order); the value of a subset is its
    minimum pair/singleton cover cost. No dense table is built, so the space
    may be large; each evaluation is capped by the matching cap.
    """

    kind = "graev_boolean"

    def __init__(self, space: PointedMetricSpace, *, matching_cap: int | None = None):
        if space.n_points < 2:
            raise InputError("need at least one non-basepoint point")
        super().__init__(2, space.n_points - 1)
        self.space = space
        self.matching_cap = DEFAULT_MATCHING_CAP if matching_cap is None else matching_cap
        self._points = space.nonbase
        self._memo: dict[tuple[int, ...], Fraction] = {}

    def point_of_index(self, i: int) -> int:
        """Metric-space point index carried by group index i."""
        return self._points[i - 1]

    def _eval(self, g: GroupElement) -> Fraction:
        key = g.support
        got = self._memo.get(key)
        if got is None:
            pts = [self._points[i - 1] for i in key]
            got = graev_norm(self.space, pts, matching_cap=self.matching_cap)
            self._memo[key] = got
        return got

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "prime": 2,
            "dim": self.dim,
            "matching_cap": self.matching_cap,
            "space": self.space.to_json_dict(),
        }


@dataclass(frozen=True)
class AxiomReport:
    """Exhaustive axiom check over a truncated domain; full violation list."""

    kind: str
    prime: int
    dim: int
    elements_checked: int
    pairs_checked: int
    violations: tuple[dict, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "prime": self.prime,
            "dim": self.dim,
            "elements_checked": self.elements_checked,
            "pairs_checked": self.pairs_checked,
            "ok": self.ok,
            "violations": list(self.violations),
        }


def validate_axioms(norm: Norm, *, cap: int | None = None, threads: int = 1) -> AxiomReport:
    """Check axioms (1)-(3) on the whole truncation; cache the result on the norm.

    Axiom (3) runs over all unordered pairs. The report is cached on the norm
    object so downstream operations can require a clean validation.
    """
    cap = DEFAULT_ENUM_CAP if cap is None else cap
    tr = Truncation(norm.prime, norm.dim, cap=cap)
    size = tr.size
    elems = tr.elements()
    vals = [norm.eval(g) for g in elems]
    violations: list[dict] = []

    ser = [None] * size  # element serializations, built lazily

    def pairs_of(r: int):
        if ser[r] is None:
            ser[r] = jsonio.element_to_pairs(elems[r])
        return ser[r]

    if vals[0] != 0:
        violations.append({"axiom": 1, "element": pairs_of(0),
                           "value": jsonio.frac_to_str(vals[0])})
    for r in range(1, size):
        if vals[r] <= 0:
            violations.append({"axiom": 1, "element": pairs_of(r),
                               "value": jsonio.frac_to_str(vals[r])})

    neg = tr.neg_perm
    for r in range(size):
        nr = int(neg[r])
        if nr < r:
            continue
        if vals[r] != vals[nr]:
            violations.append({
                "axiom": 2,
                "element": pairs_of(r),
                "value": jsonio.frac_to_str(vals[r]),
                "negated_value": jsonio.frac_to_str(vals[nr]),
            })

    den = _common_denominator(vals)
    use_int = den is not None and all(
        v.numerator * (den // v.denominator) <= _MAX_SCALED_NUM for v in vals)

    def triangle_violation(g: int, h: int, s: int) -> dict:
        return {
            "axiom": 3,
            "g": pairs_of(g),
            "h": pairs_of(h),
            "sum": pairs_of(s),
            "value_g": jsonio.frac_to_str(vals[g]),
            "value_h": jsonio.frac_to_str(vals[h]),
            "value_sum": jsonio.frac_to_str(vals[s]),
        }

    if use_int:
        int_vals = np.array([v.numerator * (den // v.denominator) for v in vals],
                            dtype=np.int64)

    def triangle_chunk(span: range) -> list[dict]:
        found: list[dict] = []
        if use_int:
            for g in span:
                idx = tr.add_rank_row(g)[g:]
                bad = int_vals[idx] > int_vals[g] + int_vals[g:]
                for off in np.nonzero(bad)[0]:
                    h = g + int(off)
                    found.append(triangle_violation(g, h, int(idx[int(off)])))
        else:
            for g in span:
                idx = tr.add_rank_row(g)
                vg = vals[g]
                for h in range(g, size):
                    s = int(idx[h])
                    if vals[s] > vg + vals[h]:
                        found.append(triangle_violation(g, h, s))
        return found

    if threads > 1 and size > 64:
        bounds = [size * t // threads for t in range(threads + 1)]
        chunks = [range(bounds[t], bounds[t + 1]) for t in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(triangle_chunk, chunks):
                violations.extend(part)
    else:
        violations.extend(triangle_chunk(range(size)))

    report = AxiomReport(
        kind=norm.kind,
        prime=norm.prime.p,
        dim=norm.dim,
        elements_checked=size,
        pairs_checked=size * (size + 1) // 2,
        violations=tuple(violations),
    )
    norm._axiom_report = report
    return report


def norm_from_config(cfg: Mapping, *, cap: int | None = None) -> Norm:
    """Build a norm from a JSON config document (strict keys, 'num/den' rationals)."""
    if not isinstance(cfg, dict):
        raise InputError(f"norm config must be a JSON object, got {type(cfg).__name__}")
    jsonio.require_keys(cfg, ["kind"],
                        ["prime", "dim", "weights", "entries", "seed", "low", "high",
                         "steps", "graded", "costs", "space", "matching_cap"],
                        what="norm config")
    kind = cfg["kind"]
    if kind == "ultrametric":
        jsonio.require_keys(cfg, ["kind", "prime", "dim"], ["weights"],
                            what="ultrametric config")
        weights = cfg.get("weights")
        if weights is not None:
            weights = [jsonio.frac_from_str(w)
                       for w in jsonio.require_list(weights, what="weights")]
        return UltrametricProductNorm(cfg["prime"], cfg["dim"], weights)
    if kind == "table":
        jsonio.require_keys(cfg, ["kind", "prime", "dim", "entries"], [],
                            what="table config")
        p = cfg["prime"]
        entries = []
        for e in jsonio.require_list(cfg["entries"], what="entries"):
            jsonio.require_keys(e, ["element", "value"], [], what="table entry")
            entries.append((jsonio.element_from_pairs(p, e["element"]),
                            jsonio.frac_from_str(e["value"])))
        return TableNorm(p, cfg["dim"], entries, cap=cap)
    if kind == "cost_completion":
        if "costs" in cfg:
            jsonio.require_keys(cfg, ["kind", "prime", "dim", "costs"], [],
                                what="cost_completion config")
            p = cfg["prime"]
            pairs = []
            for e in jsonio.require_list(cfg["costs"], what="costs"):
                jsonio.require_keys(e, ["element", "value"], [], what="cost entry")
                pairs.append((jsonio.element_from_pairs(p, e["element"]),
                              jsonio.frac_from_str(e["value"])))
            cost = CostFunction.from_pairs(p, cfg["dim"], pairs, cap=cap)
            return CostCompletionNorm(cost)
        jsonio.require_keys(cfg, ["kind", "prime", "dim", "seed"],
                            ["low", "high", "steps", "graded"],
                            what="cost_completion config")
        steps = cfg.get("steps", 60)
        if cfg.get("graded", False):
            if "low" in cfg or "high" in cfg:
                raise InputError("graded cost_completion configs fix their own value range")
            cost = graded_cost(cfg["seed"], cfg["prime"], cfg["dim"], steps=steps, cap=cap)
            descriptor = {"seed": cfg["seed"], "graded": True, "steps": steps}
            return CostCompletionNorm(cost, descriptor=descriptor)
        if "low" not in cfg or "high" not in cfg:
            raise InputError("seeded cost_completion configs need low and high")
        cost = random_cost(cfg["seed"], cfg["prime"], cfg["dim"],
                           jsonio.frac_from_str(cfg["low"]),
                           jsonio.frac_from_str(cfg["high"]), steps=steps, cap=cap)
        descriptor = {
            "seed": cfg["seed"],
            "low": jsonio.frac_to_str(jsonio.frac_from_str(cfg["low"])),
            "high": jsonio.frac_to_str(jsonio.frac_from_str(cfg["high"])),
            "steps": steps,
        }
        return CostCompletionNorm(cost, descriptor=descriptor)
    if kind == "graev_boolean":
        jsonio.require_keys(cfg, ["kind", "space"], ["prime", "dim", "matching_cap"],
                            what="graev_boolean config")
        if cfg.get("prime", 2) != 2:
            raise InputError("graev_boolean norms require prime 2")
        sp = cfg["space"]
        jsonio.require_keys(sp, ["basepoint", "dist"], [], what="metric space")
        matrix = [[jsonio.frac_from_str(x)
                   for x in jsonio.require_list(row, what="dist row")]
                  for row in jsonio.require_list(sp["dist"], what="dist")]
        space = PointedMetricSpace(matrix, basepoint=sp["basepoint"])
        norm = GraevBooleanNorm(space, matching_cap=cfg.get("matching_cap"))
        if "dim" in cfg and cfg["dim"] != norm.dim:
            raise InputError(f"space has {norm.dim} non-basepoint points, config says {cfg['dim']}")
        return norm
    raise InputError(f"unknown norm kind {kind!r}")
