"""Chain length and non-redundancy of binary codes.

Exact chain length uses the contraction recursion

    CL(C) = 1 + max over support coordinates i of CL({c in C : c_i = 0})

which holds because the last element of any chain names a coordinate missed
by every earlier word, and conversely any chain of the contracted code
extends by one.  Subcodes are represented as bitmasks over word indices and
memoised, and coordinates with identical columns are merged (they generate
the same contraction).  The union-closure formulation is implemented
separately and only serves as an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import Code, CodeInputError, InexactError

DEFAULT_BUDGET = 10_000_000
CLOSURE_WORD_LIMIT = 20


@dataclass(frozen=True)
class ChainWitness:
    """Chain ``(a, c)`` with ``coords[i] = a(i+1)`` and ``words[i]`` the index of ``c(i+1)``."""

    coords: tuple[int, ...]
    words: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.coords)

    def is_valid(self, code: Code) -> bool:
        if len(set(self.coords)) != len(self.coords) or len(set(self.words)) != len(self.words):
            return False
        mat = code.matrix
        for i, (a_i, c_i) in enumerate(zip(self.coords, self.words)):
            if not mat[c_i, a_i]:
                return False
            if any(mat[c_i, a_j] for a_j in self.coords[i + 1:]):
                return False
        return True

    def to_json(self, code: Code) -> dict:
        strings = code.as_strings()
        return {"length": self.length, "a": list(self.coords), "c": [strings[w] for w in self.words]}


@dataclass(frozen=True)
class NrdWitness:
    """Coordinate set ``S`` with, for each ``j`` in ``S``, a word meeting ``S`` only at ``j``."""

    private: dict[int, int] = field(default_factory=dict)

    @property
    def coords(self) -> tuple[int, ...]:
        return tuple(sorted(self.private))

    @property
    def size(self) -> int:
        return len(self.private)

    def is_valid(self, code: Code) -> bool:
        mat = code.matrix
        s = self.coords
        for j, w in self.private.items():
            row = mat[w]
            if not row[j] or any(row[i] for i in s if i != j):
                return False
        return True

    def to_json(self, code: Code) -> dict:
        strings = code.as_strings()
        return {"size": self.size, "S": list(self.coords),
                "private": {str(j): strings[w] for j, w in sorted(self.private.items())}}


class _Budget(Exception):
    pass


def _popcount(x: int) -> int:
    return x.bit_count()


def _lowest(x: int) -> int:
    return (x & -x).bit_length() - 1


class ChainSolver:
    """Memoised exact chain length over the subcodes of one code.

    Subcodes are passed around as int bitmasks of word indices.  The memo is
    shared between queries, which is what makes density computations and
    repeated contraction trials cheap.
    """

    def __init__(self, code: Code, budget: int = DEFAULT_BUDGET):
        self.code = code
        self.budget = budget
        self.classes = code.column_classes()
        self.cols = self.classes.masks
        self.full = (1 << len(code)) - 1
        nz = code.nonzero_mask()
        self.nonzero = sum(1 << i for i in range(len(code)) if nz[i])
        self.nodes = 0
        self._memo: dict[int, int] = {}

    def _children(self, s: int) -> dict[int, int]:
        """Distinct contractions of ``s``, keyed by result, valued by the first class producing it."""
        out: dict[int, int] = {}
        for k, col in enumerate(self.cols):
            if col & s:
                child = s & ~col
                if child not in out:
                    out[child] = k
        return out

    def _cl(self, s: int) -> int:
        memo = self._memo
        hit = memo.get(s)
        if hit is not None:
            return hit
        self.nodes += 1
        if self.nodes > self.budget:
            raise _Budget
        children = self._children(s)
        if not children:
            memo[s] = 0
            return 0
        ub = min(len(children), _popcount(s & self.nonzero))
        best = 0
        for child in children:
            if 1 + _popcount(child & self.nonzero) <= best:
                continue
            val = 1 + self._cl(child)
            if val > best:
                best = val
                if best == ub:
                    break
        memo[s] = best
        return best

    def chain_length(self, s: int | None = None) -> int:
        """Exact CL of the subcode ``s`` (default: the whole code)."""
        s = self.full if s is None else s
        try:
            return self._cl(s)
        except _Budget:
            raise InexactError(
                f"chain length search exceeded {self.budget} nodes",
                self.greedy(s)[0],
            ) from None

    def witness(self, s: int | None = None) -> ChainWitness:
        s = self.full if s is None else s
        target = self.chain_length(s)
        picks = []
        while target > 0:
            for child, k in self._children(s).items():
                if 1 + self.chain_length(child) == target:
                    word = _lowest(s & self.cols[k])
                    picks.append((self.classes.first_coord(k), word))
                    s, target = child, target - 1
                    break
        # picks run from the end of the chain backwards
        picks.reverse()
        return ChainWitness(tuple(p[0] for p in picks), tuple(p[1] for p in picks))

    def greedy(self, s: int | None = None) -> tuple[int, ChainWitness]:
        """Greedy chain: lightest word first, cheapest of its coordinates, contract, repeat."""
        s = self.full if s is None else s
        weights = self.code.weights()
        picks = []
        live = s & self.nonzero
        while live:
            word = min(_iter_bits(live), key=lambda w: (weights[w], w))
            best_k, best_hits = -1, None
            for k, col in enumerate(self.cols):
                if (col >> word) & 1:
                    hits = _popcount(col & live)
                    if best_hits is None or hits < best_hits:
                        best_k, best_hits = k, hits
            picks.append((self.classes.first_coord(best_k), word))
            live &= ~self.cols[best_k]
        picks.reverse()
        wit = ChainWitness(tuple(p[0] for p in picks), tuple(p[1] for p in picks))
        return wit.length, wit

    def support_size(self, s: int) -> int:
        return sum(size for col, size in zip(self.cols, self.classes.sizes) if col & s)


def _iter_bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def mask_of(indices) -> int:
    out = 0
    for i in indices:
        out |= 1 << int(i)
    return out


def chain_length_exact(code: Code, budget: int = DEFAULT_BUDGET) -> tuple[int, ChainWitness]:
    """Longest chain of ``code`` together with one witness.

    Raises :class:`InexactError` (carrying the greedy lower bound) when the
    search needs more than ``budget`` distinct subcodes.
    """
    solver = ChainSolver(code, budget)
    return solver.chain_length(), solver.witness()


def chain_length_bounds(code: Code) -> tuple[int, int]:
    """Cheap sandwich ``lower <= CL <= upper``.

    The lower end is the greedy chain; the upper end is the support size.
    """
    lower, _ = ChainSolver(code).greedy()
    upper = min(code.m, int(code.support_mask().sum()))
    return lower, upper


def chain_length(code: Code, budget: int = DEFAULT_BUDGET) -> int:
    return ChainSolver(code, budget).chain_length()


def chain_length_upper(code: Code, budget: int = 100_000) -> int:
    """Exact CL when the search is small, else the support bound."""
    try:
        return ChainSolver(code, budget).chain_length()
    except InexactError:
        return chain_length_bounds(code)[1]


def nrd_exact(code: Code, budget: int = DEFAULT_BUDGET) -> tuple[int, NrdWitness]:
    """Largest coordinate set whose every member is hit privately by some word.

    Two coordinates with equal columns can never both belong to such a set,
    so the search runs over column classes in ascending coordinate order.
    """
    classes = code.column_classes()
    cols = classes.masks
    n_cls = len(cols)
    nonzero = mask_of(i for i, nz in enumerate(code.nonzero_mask()) if nz)
    ub_total = min(n_cls, _popcount(nonzero))
    best: list[int] = []
    nodes = 0

    def privately_hit(chosen: list[int]) -> bool:
        for j in chosen:
            others = 0
            for k in chosen:
                if k != j:
                    others |= cols[k]
            if not cols[j] & ~others:
                return False
        return True

    def dfs(chosen: list[int], start: int) -> bool:
        nonlocal best, nodes
        nodes += 1
        if nodes > budget:
            raise _Budget
        if len(chosen) > len(best):
            best = list(chosen)
            if len(best) == ub_total:
                return True
        for k in range(start, n_cls):
            if len(chosen) + (n_cls - k) <= len(best):
                break
            chosen.append(k)
            if privately_hit(chosen) and dfs(chosen, k + 1):
                return True
            chosen.pop()
        return False

    try:
        dfs([], 0)
    except _Budget:
        raise InexactError(f"NRD search exceeded {budget} nodes", len(best)) from None
    private = {}
    for j in best:
        others = 0
        for k in best:
            if k != j:
                others |= cols[k]
        private[classes.first_coord(j)] = _lowest(cols[j] & ~others)
    return len(best), NrdWitness(private)


def union_closure_chain_length(code: Code) -> int:
    """Longest strictly ascending chain of sets inside the union-closure of ``code``.

    Brute force over the closure; only meant as an oracle for small codes.
    """
    words = [w for w in code.words if w]
    if len(code) > CLOSURE_WORD_LIMIT:
        raise CodeInputError(f"closure enumeration limited to {CLOSURE_WORD_LIMIT} words")
    closure: set[int] = set()
    frontier = set(words)
    while frontier:
        closure |= frontier
        frontier = {u | w for u in frontier for w in words} - closure
    members = sorted(closure, key=_popcount)
    longest: dict[int, int] = {}
    for i, u in enumerate(members):
        best = 0
        for v in members[:i]:
            if v != u and v & ~u == 0:
                best = max(best, longest[v])
        longest[u] = best + 1
    return max(longest.values(), default=0)


def cardinality_bound_check(code: Code, budget: int = DEFAULT_BUDGET) -> bool:
    """Whether ``|C| <= (m+1)^NRD(C)``."""
    nrd, _ = nrd_exact(code, budget)
    return len(code) <= (code.m + 1) ** nrd


def binom(n: int, k: int) -> int:
    return math.comb(n, k) if 0 <= k <= n else 0
