"""Sparse linear algebra over F_p for groups of prime exponent.

Group elements are finitely supported coefficient vectors indexed by positive
integers; addition is componentwise mod p, so the group is a vector space over
F_p and "basis" means linear independence. Everything here is exact integer
arithmetic with deterministic tie-breaking (leftmost column, lowest row pivot).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import CapExceededError, InputError, NotInSpanError

DEFAULT_PRIME_CAP = 97
DEFAULT_ENUM_CAP = 10_000_000
DEFAULT_MATCHING_CAP = 12

_prime_cap = DEFAULT_PRIME_CAP


def set_prime_cap(cap: int) -> None:
    """Raise or lower the largest admissible prime (process-wide)."""
    global _prime_cap
    if not isinstance(cap, int) or cap < 2:
        raise InputError(f"prime cap must be an integer >= 2, got {cap!r}")
    _prime_cap = cap


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


@dataclass(frozen=True, order=True)
class Prime:
    """A validated prime modulus."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or isinstance(self.p, bool):
            raise InputError(f"prime must be an integer, got {self.p!r}")
        if self.p < 2 or self.p > _prime_cap:
            raise InputError(f"prime must lie in [2, {_prime_cap}], got {self.p}")
        if not _is_prime(self.p):
            raise InputError(f"{self.p} is not prime")


def as_prime(p) -> Prime:
    return p if isinstance(p, Prime) else Prime(p)


@dataclass(frozen=True)
class GroupElement:
    """A finitely supported coefficient vector over F_p.

    ``items`` holds (index, coefficient) pairs sorted by strictly increasing
    index, with coefficients reduced to 1..p-1 (zero coefficients dropped).
    Index 0 is reserved and rejected. Instances are immutable and hashable.
    """

    prime: Prime
    items: tuple[tuple[int, int], ...]

    def __post_init__(self):
        p = self.prime.p
        last = 0
        for idx, c in self.items:
            if not isinstance(idx, int) or isinstance(idx, bool) or idx < 1:
                raise InputError(f"indices must be positive integers, got {idx!r}")
            if idx <= last:
                raise InputError("items must be sorted by strictly increasing index")
            if not isinstance(c, int) or isinstance(c, bool) or not 1 <= c <= p - 1:
                raise InputError(f"coefficient {c!r} at index {idx} is not reduced mod {p}")
            last = idx

    @classmethod
    def make(cls, p, coeffs=()) -> "GroupElement":
        """Build an element from any index->coefficient mapping or pair iterable."""
        prime = as_prime(p)
        pairs = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[int, int] = {}
        for idx, c in pairs:
            if not isinstance(idx, int) or isinstance(idx, bool) or idx < 1:
                raise InputError(f"indices must be positive integers, got {idx!r}")
            if not isinstance(c, int) or isinstance(c, bool):
                raise InputError(f"coefficient at index {idx} must be an integer, got {c!r}")
            acc[idx] = (acc.get(idx, 0) + c) % prime.p
        items = tuple(sorted((i, c) for i, c in acc.items() if c))
        return cls(prime, items)

    @classmethod
    def zero(cls, p) -> "GroupElement":
        return cls(as_prime(p), ())

    @classmethod
    def unit(cls, p, index: int, coeff: int = 1) -> "GroupElement":
        return cls.make(p, [(index, coeff)])

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.items)

    @property
    def max_index(self) -> int:
        """Largest index carrying a nonzero coefficient; 0 for the zero element."""
        return self.items[-1][0] if self.items else 0

    def coeff(self, index: int) -> int:
        for i, c in self.items:
            if i == index:
                return c
            if i > index:
                break
        return 0

    def is_zero(self) -> bool:
        return not self.items

    def __add__(self, other: "GroupElement") -> "GroupElement":
        _same_prime(self, other)
        p = self.prime.p
        out = []
        a, b = self.items, other.items
        i = j = 0
        while i < len(a) and j < len(b):
            ia, ca = a[i]
            ib, cb = b[j]
            if ia < ib:
                out.append((ia, ca))
                i += 1
            elif ib < ia:
                out.append((ib, cb))
                j += 1
            else:
                c = (ca + cb) % p
                if c:
                    out.append((ia, c))
                i += 1
                j += 1
        out.extend(a[i:])
        out.extend(b[j:])
        return GroupElement(self.prime, tuple(out))

    def __neg__(self) -> "GroupElement":
        p = self.prime.p
        return GroupElement(self.prime, tuple((i, p - c) for i, c in self.items))

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        return self + (-other)

    def smul(self, k: int) -> "GroupElement":
        """Scalar multiple k*g with k reduced mod p."""
        k %= self.prime.p
        if k == 0:
            return GroupElement(self.prime, ())
        if k == 1:
            return self
        p = self.prime.p
        return GroupElement(self.prime, tuple((i, (c * k) % p) for i, c in self.items))

    def __rmul__(self, k: int) -> "GroupElement":
        if not isinstance(k, int) or isinstance(k, bool):
            return NotImplemented
        return self.smul(k)

    def __repr__(self):
        if not self.items:
            return "0"
        return " + ".join(f"e{i}" if c == 1 else f"{c}*e{i}" for i, c in self.items)


def _same_prime(x: GroupElement, y: GroupElement) -> None:
    if x.prime != y.prime:
        raise InputError(f"mismatched primes: {x.prime.p} vs {y.prime.p}")


def add(x: GroupElement, y: GroupElement) -> GroupElement:
    return x + y


def negate(x: GroupElement) -> GroupElement:
    return -x


def smul(k: int, x: GroupElement) -> GroupElement:
    return x.smul(k)


def _rref(rows: list[list[int]], p: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row-echelon form over F_p, in place.

    Pivot rule: scan columns left to right, take the lowest-numbered remaining
    row with a nonzero entry. Returns (rows, pivot_columns).
    """
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, nrows) if rows[i][c] % p), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [(x * inv) % p for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return rows, pivots


def _element_rows(elems: Sequence[GroupElement], indices: Sequence[int]) -> list[list[int]]:
    col = {idx: j for j, idx in enumerate(indices)}
    rows = []
    for g in elems:
        row = [0] * len(indices)
        for i, c in g.items:
            row[col[i]] = c
        rows.append(row)
    return rows


def rank(elems: Iterable[GroupElement], p=None) -> int:
    """Rank of the set of elements as vectors over F_p."""
    elems = tuple(elems)
    if not elems:
        return 0
    prime = as_prime(p) if p is not None else elems[0].prime
    for g in elems:
        if g.prime != prime:
            raise InputError(f"mismatched primes: {g.prime.p} vs {prime.p}")
    indices = sorted({i for g in elems for i in g.support})
    rows = _element_rows(elems, indices)
    _, pivots = _rref(rows, prime.p)
    return len(pivots)


def solve_in_span(g: GroupElement, elems: Sequence[GroupElement]) -> tuple[int, ...] | None:
    """One coefficient vector with g = sum(coeffs[j] * elems[j]), or None.

    Works for dependent spanning sets too (free coefficients are set to 0);
    for an independent set the solution is the unique one.
    """
    elems = tuple(elems)
    for e in elems:
        _same_prime(g, e)
    p = g.prime.p
    span_indices = sorted({i for e in elems for i in e.support})
    if any(i not in set(span_indices) for i in g.support):
        return None
    col = {idx: r for r, idx in enumerate(span_indices)}
    nrows = len(span_indices)
    ncols = len(elems)
    aug = [[0] * (ncols + 1) for _ in range(nrows)]
    for j, e in enumerate(elems):
        for i, c in e.items:
            aug[col[i]][j] = c
    for i, c in g.items:
        aug[col[i]][ncols] = c
    aug, pivots = _rref(aug, p)
    if ncols in pivots:
        return None  # pivot in the augmented column: inconsistent
    coeffs = [0] * ncols
    for r, c in enumerate(pivots):
        coeffs[c] = aug[r][ncols]
    return tuple(coeffs)


def decompose(g: GroupElement, basis: "OrderedBasis") -> tuple[int, ...]:
    """Coefficients of g over an ordered basis; NotInSpan if g lies outside."""
    for e in basis.elems:
        _same_prime(g, e)
    coeffs = solve_in_span(g, basis.elems)
    if coeffs is None:
        raise NotInSpanError(f"{g!r} is not in the span of the given basis")
    return coeffs


@dataclass(frozen=True)
class OrderedBasis:
    """An ordered, independent tuple of nonzero elements over one prime."""

    prime: Prime
    elems: tuple[GroupElement, ...]

    def __post_init__(self):
        for g in self.elems:
            if g.prime != self.prime:
                raise InputError(f"mismatched primes: {g.prime.p} vs {self.prime.p}")
            if g.is_zero():
                raise InputError("basis elements must be nonzero")
        if rank(self.elems, self.prime) != len(self.elems):
            raise InputError("basis elements must be linearly independent")

    @classmethod
    def standard(cls, p, dim: int) -> "OrderedBasis":
        prime = as_prime(p)
        if not isinstance(dim, int) or dim < 1:
            raise InputError(f"dimension must be a positive integer, got {dim!r}")
        return cls(prime, tuple(GroupElement.unit(prime, i) for i in range(1, dim + 1)))

    def __len__(self):
        return len(self.elems)

    def __iter__(self):
        return iter(self.elems)

    def __getitem__(self, n):
        return self.elems[n]


def length_and_max(g: GroupElement, basis: OrderedBasis) -> tuple[int, int]:
    """(number of nonzero coefficients, largest 1-based position) of g over basis.

    The zero element yields (0, 0).
    """
    coeffs = decompose(g, basis)
    nz = [j + 1 for j, c in enumerate(coeffs) if c]
    if not nz:
        return (0, 0)
    return (len(nz), nz[-1])


def is_independent(elems: Iterable[GroupElement], p=None) -> bool:
    """Fast independence check: rank equals cardinality."""
    elems = tuple(elems)
    if not elems:
        return True
    return rank(elems, p) == len(elems)


def is_independent_oracle(elems: Iterable[GroupElement], *, cap: int | None = None) -> bool:
    """Independence by subset enumeration.

    For every split X = A | (X \\ A), the spans of the two halves must meet
    only at zero. A set containing the zero element is dependent outright.
    """
    elems = tuple(elems)
    if not elems:
        return True
    prime = elems[0].prime
    for g in elems:
        if g.prime != prime:
            raise InputError(f"mismatched primes: {g.prime.p} vs {prime.p}")
    if any(g.is_zero() for g in elems):
        return False
    n = len(elems)
    p = prime.p
    cap = DEFAULT_ENUM_CAP if cap is None else cap
    if (p ** n) * (2 ** n) > cap:
        raise CapExceededError(
            f"independence oracle needs ~{p ** n} * {2 ** n} steps, above cap {cap}")
    for bits in range(1, 2 ** n - 1):
        half = [elems[j] for j in range(n) if bits >> j & 1]
        rest = [elems[j] for j in range(n) if not bits >> j & 1]
        for w in enumerate_span(half, cap=cap):
            if w.is_zero():
                continue
            if solve_in_span(w, rest) is not None:
                return False
    return True


def enumerate_span(elems, *, cap: int | None = None) -> Iterator[GroupElement]:
    """All p^n combinations of the given elements, in lexicographic coefficient order.

    The first element yielded is zero, the last has every coefficient p-1.
    """
    prime = None
    if isinstance(elems, OrderedBasis):
        prime = elems.prime
        elems = elems.elems
    elems = tuple(elems)
    cap = DEFAULT_ENUM_CAP if cap is None else cap
    if not elems:
        if prime is None:
            raise InputError("cannot enumerate the span of an empty element list")
        yield GroupElement.zero(prime)
        return
    prime = elems[0].prime
    for g in elems:
        if g.prime != prime:
            raise InputError(f"mismatched primes: {g.prime.p} vs {prime.p}")
    p = prime.p
    total = p ** len(elems)
    if total > cap:
        raise CapExceededError(f"span of {len(elems)} elements has {total} members, above cap {cap}")
    multiples = [[e.smul(k) for k in range(p)] for e in elems]
    for vec in itertools.product(range(p), repeat=len(elems)):
        w = GroupElement.zero(prime)
        for j, lam in enumerate(vec):
            if lam:
                w = w + multiples[j][lam]
        yield w


class Truncation:
    """Dense view of span(e_1..e_dim): elements indexed by lexicographic rank.

    Rank r corresponds to the coefficient vector given by the base-p digits of
    r with the coefficient of e_1 most significant, matching enumerate_span
    order on the standard basis.
    """

    def __init__(self, p, dim: int, *, cap: int | None = None):
        self.prime = as_prime(p)
        if not isinstance(dim, int) or dim < 1:
            raise InputError(f"dimension must be a positive integer, got {dim!r}")
        cap = DEFAULT_ENUM_CAP if cap is None else cap
        size = self.prime.p ** dim
        if size > cap:
            raise CapExceededError(f"truncation has {size} elements, above cap {cap}")
        self.dim = dim
        self.size = size
        self._digits = None
        self._powers = None
        self._neg_perm = None

    @property
    def powers(self) -> np.ndarray:
        if self._powers is None:
            p, d = self.prime.p, self.dim
            self._powers = np.array([p ** (d - 1 - j) for j in range(d)], dtype=np.int64)
        return self._powers

    @property
    def digits(self) -> np.ndarray:
        """(size, dim) int64 array; row r holds the coefficient vector of rank r."""
        if self._digits is None:
            p, d = self.prime.p, self.dim
            ranks = np.arange(self.size, dtype=np.int64)
            self._digits = (ranks[:, None] // self.powers[None, :]) % p
        return self._digits

    @property
    def neg_perm(self) -> np.ndarray:
        """neg_perm[r] is the rank of the negation of rank r."""
        if self._neg_perm is None:
            p = self.prime.p
            self._neg_perm = ((p - self.digits) % p) @ self.powers
        return self._neg_perm

    def rank_of(self, g: GroupElement) -> int:
        if g.prime != self.prime:
            raise InputError(f"mismatched primes: {g.prime.p} vs {self.prime.p}")
        if g.max_index > self.dim:
            raise InputError(f"index {g.max_index} outside truncation of dimension {self.dim}")
        p, d = self.prime.p, self.dim
        r = 0
        for i, c in g.items:
            r += c * p ** (d - i)
        return r

    def element_of(self, r: int) -> GroupElement:
        if not 0 <= r < self.size:
            raise InputError(f"rank {r} out of range for truncation of size {self.size}")
        p, d = self.prime.p, self.dim
        items = []
        for i in range(1, d + 1):
            c = (r // p ** (d - i)) % p
            if c:
                items.append((i, c))
        return GroupElement(self.prime, tuple(items))

    def add_ranks(self, a: int, b: int) -> int:
        p, d = self.prime.p, self.dim
        r = 0
        for i in range(d):
            pw = p ** (d - 1 - i)
            r += (((a // pw) + (b // pw)) % p) * pw
        return r

    def neg_rank(self, r: int) -> int:
        p, d = self.prime.p, self.dim
        out = 0
        for i in range(d):
            pw = p ** (d - 1 - i)
            out += ((p - (r // pw) % p) % p) * pw
        return out

    def add_rank_row(self, r: int) -> np.ndarray:
        """Ranks of (g + element_of(r)) for every rank g, as one vectorized row."""
        p = self.prime.p
        if p == 2:
            return np.bitwise_xor(np.arange(self.size, dtype=np.int64), np.int64(r))
        return ((self.digits + self.digits[r]) % p) @ self.powers

    def sub_rank_row(self, r: int) -> np.ndarray:
        """Ranks of (g - element_of(r)) for every rank g."""
        p = self.prime.p
        if p == 2:
            return self.add_rank_row(r)
        return ((self.digits - self.digits[r]) % p) @ self.powers

    def elements(self) -> list[GroupElement]:
        return [self.element_of(r) for r in range(self.size)]
