"""Benchmark codes: graph cuts, supports of linear codes, block fixtures, random codes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import Code, CodeInputError

CUT_VERTEX_LIMIT = 24
LINEAR_WORD_LIMIT = 2 ** 20
SUPPORTED_PRIMES = (2, 3, 5, 7)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``; edge order fixes coordinate order."""

    n: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise CodeInputError(f"edge ({u}, {v}) has an endpoint outside [0, {self.n})")
            if u == v:
                raise CodeInputError("self-loops are not allowed")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise CodeInputError(f"duplicate edge {key}")
            seen.add(key)
        if self.weights is not None and len(self.weights) != len(self.edges):
            raise CodeInputError("one weight per edge required")

    @property
    def m(self) -> int:
        return len(self.edges)

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        adj = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {0}
        stack = [0]
        while stack:
            for v in adj[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n


def cut_code(graph: Graph) -> Code:
    """Edge-indicator vectors of all cuts ``E(T, V \\ T)``, zero cut included.

    Only sets ``T`` containing vertex 0 are enumerated since a cut and its
    complement coincide.
    """
    n = graph.n
    if n > CUT_VERTEX_LIMIT:
        raise CodeInputError(f"cut enumeration limited to {CUT_VERTEX_LIMIT} vertices")
    if n == 0:
        return Code(np.zeros((1, graph.m), dtype=bool))
    sides = (np.arange(2 ** (n - 1), dtype=np.int64) << 1) | 1
    if not graph.edges:
        return Code(np.zeros((1, 0), dtype=bool))
    u = np.array([e[0] for e in graph.edges], dtype=np.int64)
    v = np.array([e[1] for e in graph.edges], dtype=np.int64)
    cut = (((sides[:, None] >> u[None, :]) ^ (sides[:, None] >> v[None, :])) & 1).astype(bool)
    return Code(cut)


@dataclass(frozen=True)
class LinearCodeSpec:
    """Generator matrix (rows) of a linear code over the prime field F_q."""

    q: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.q not in SUPPORTED_PRIMES:
            raise CodeInputError(f"field order must be one of {SUPPORTED_PRIMES}")
        widths = {len(r) for r in self.rows}
        if len(widths) > 1:
            raise CodeInputError("generator rows must have equal length")
        if any(not 0 <= x < self.q for r in self.rows for x in r):
            raise CodeInputError("generator entries must lie in [0, q)")

    @property
    def k(self) -> int:
        return len(self.rows)

    @property
    def m(self) -> int:
        return len(self.rows[0]) if self.rows else 0


def rank_mod_q(rows, q: int) -> int:
    """Rank of an integer matrix over F_q by Gaussian elimination."""
    mat = [[x % q for x in r] for r in rows]
    if not mat:
        return 0
    ncols = len(mat[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(mat)) if mat[r][col]), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        inv = pow(mat[rank][col], q - 2, q)
        mat[rank] = [(x * inv) % q for x in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][col]:
                f = mat[r][col]
                mat[r] = [(a - f * b) % q for a, b in zip(mat[r], mat[rank])]
        rank += 1
        if rank == len(mat):
            break
    return rank


def linear_support_code(spec: LinearCodeSpec) -> Code:
    """Support patterns of every codeword spanned by the generator rows."""
    k, m, q = spec.k, spec.m, spec.q
    if q ** k > LINEAR_WORD_LIMIT:
        raise CodeInputError(f"q^k = {q ** k} exceeds the enumeration limit")
    if k == 0:
        return Code(np.zeros((1, m), dtype=bool))
    gen = np.array(spec.rows, dtype=np.int64)
    coeffs = np.array(list(itertools.product(range(q), repeat=k)), dtype=np.int64)
    words = (coeffs @ gen) % q
    return Code(words != 0)


def parallel_block_code(block_sizes) -> Code:
    """Indicator of each block plus the all-ones word."""
    sizes = [int(b) for b in block_sizes]
    if any(b < 1 for b in sizes):
        raise CodeInputError("block sizes must be positive")
    m = sum(sizes)
    rows = np.zeros((len(sizes) + 1, m), dtype=bool)
    start = 0
    for i, b in enumerate(sizes):
        rows[i, start:start + b] = True
        start += b
    rows[-1] = True
    return Code(rows)


def random_code(m: int, count: int, density: float, rng) -> Code:
    """``count`` i.i.d. Bernoulli(``density``) words, deduplicated."""
    if m < 0 or count < 0 or not 0.0 <= density <= 1.0:
        raise CodeInputError("need m >= 0, count >= 0 and density in [0, 1]")
    rng = np.random.default_rng(rng)
    return Code(rng.random((count, m)) < density)


def random_graph(n: int, p: float, rng) -> Graph:
    """Erdos-Renyi G(n, p); edges listed in lexicographic order."""
    if n < 0 or not 0.0 <= p <= 1.0:
        raise CodeInputError("need n >= 0 and p in [0, 1]")
    rng = np.random.default_rng(rng)
    pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < p
    return Graph(n, tuple(e for e, k in zip(pairs, keep) if k))


def random_connected_graph(n: int, p: float, seed: int) -> Graph:
    """First connected draw of G(n, p) among seeds ``seed, seed+1, ...``."""
    for s in itertools.count(seed):
        g = random_graph(n, p, s)
        if g.is_connected():
            return g
    raise AssertionError("unreachable")


def random_linear_spec(k: int, m: int, q: int, rng) -> LinearCodeSpec:
    rng = np.random.default_rng(rng)
    rows = rng.integers(0, q, size=(k, m))
    return LinearCodeSpec(q, tuple(tuple(int(x) for x in r) for r in rows))


def k3() -> Graph:
    return Graph(3, ((0, 1), (0, 2), (1, 2)))


# edge-list I/O: header "n m", then one "u v [w]" line per edge, vertices 1..n

def read_edge_list(text: str) -> Graph:
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise CodeInputError("empty edge list")
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
        body = lines[1:]
        edges = tuple((int(p[0]) - 1, int(p[1]) - 1) for p in body)
        weights = tuple(float(p[2]) for p in body) if body and all(len(p) > 2 for p in body) else None
    except (IndexError, ValueError) as exc:
        raise CodeInputError(f"bad edge list: {exc}") from None
    if len(edges) != m:
        raise CodeInputError(f"header announces {m} edges, found {len(edges)}")
    return Graph(n, edges, weights)


def write_edge_list(graph: Graph) -> str:
    out = [f"{graph.n} {graph.m}"]
    for i, (u, v) in enumerate(graph.edges):
        w = f" {graph.weights[i]}" if graph.weights is not None else ""
        out.append(f"{u + 1} {v + 1}{w}")
    return "\n".join(out) + "\n"


def linear_spec_from_json(data: dict) -> LinearCodeSpec:
    try:
        return LinearCodeSpec(int(data["q"]), tuple(tuple(int(x) for x in r) for r in data["rows"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CodeInputError(f"bad generator JSON: {exc}") from None
