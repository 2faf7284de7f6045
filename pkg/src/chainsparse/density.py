"""Code density and the peeling decomposition.

The density of a code is the minimum of ``|Supp(C')| / CL(C')`` over its
nonempty subcodes.  For a fixed support ``U`` the best subcode is the whole
down-set ``C_U = {c in C : supp(c) <= U}`` (more words can only lengthen
chains), and ``U`` may be taken to be a union of words.  Exact mode therefore
walks the union-closure of the code rather than all ``2^|C|`` subcodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .chain_metrics import ChainSolver, InexactError, binom
from .core import ChainsparseError, Code, CodeInputError, restrict

EXACT_WORD_LIMIT = 20
FLOAT_SLACK = 1e-9
HEURISTIC_CL_BUDGET = 20_000


class CertificateError(ChainsparseError):
    """A heuristic decomposition failed its a-posteriori counting check."""


@dataclass(frozen=True)
class DensityResult:
    phi: Fraction
    witness: Code | None
    support_size: int
    chain_length: int
    exact: bool

    def __float__(self) -> float:
        return float(self.phi)


@dataclass(frozen=True)
class _Candidate:
    words: int        # bitmask of word indices
    classes: int      # bitmask of column classes forming the support
    support: int      # support size, counted with multiplicity
    cl: int           # exact CL, or a certified lower bound in heuristic mode

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.support, self.cl)


def _le(support: int, cl: int, d) -> bool:
    """``support / cl <= d``: exact for rationals, with float slack otherwise."""
    if isinstance(d, Rational):
        return Fraction(support, cl) <= d
    d = float(d)
    return support - d * cl <= FLOAT_SLACK * max(1.0, d * cl)


class _Context:
    """Per-code tables shared by the exact and heuristic searches."""

    def __init__(self, code: Code, cl_budget: int | None = None):
        self.code = code
        self.solver = ChainSolver(code, cl_budget) if cl_budget else ChainSolver(code)
        self.hsolver = ChainSolver(code, HEURISTIC_CL_BUDGET)
        cls = code.column_classes()
        self.cls = cls
        # support of each word as a bitmask over column classes
        self.word_cls = [0] * len(code)
        for k, col in enumerate(cls.masks):
            x = col
            while x:
                low = x & -x
                self.word_cls[low.bit_length() - 1] |= 1 << k
                x ^= low
        self.nonzero_words = [w for w, s in enumerate(self.word_cls) if s]

    def downset(self, u: int) -> int:
        out = 0
        for w in self.nonzero_words:
            if self.word_cls[w] & ~u == 0:
                out |= 1 << w
        return out

    def class_weight(self, u: int) -> int:
        total = 0
        sizes = self.cls.sizes
        while u:
            low = u & -u
            total += sizes[low.bit_length() - 1]
            u ^= low
        return total

    def closure(self) -> list[int]:
        gens = sorted({self.word_cls[w] for w in self.nonzero_words})
        seen = set(gens)
        frontier = list(gens)
        while frontier:
            nxt = []
            for u in frontier:
                for g in gens:
                    v = u | g
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            frontier = nxt
        return sorted(seen)

    def exact_candidates(self):
        for u in self.closure():
            words = self.downset(u)
            cl = self.solver.chain_length(words)
            yield _Candidate(words, u, self.class_weight(u), cl)

    def _certified_cl(self, words: int, floor: int = 0) -> int:
        sub = self.hsolver
        sub.nodes = 0
        try:
            return max(floor, sub.chain_length(words))
        except InexactError as exc:
            return max(floor, exc.lower)

    def heuristic_candidates(self):
        seen: set[int] = set()

        def make(u: int, floor: int):
            if u in seen or u == 0:
                return None
            seen.add(u)
            words = self.downset(u)
            return _Candidate(words, u, self.class_weight(u), self._certified_cl(words, floor))

        # prefixes of the greedy chain: the first k picked words form a chain of length k
        _, wit = self.solver.greedy()
        picked = list(reversed(wit.words))
        u = 0
        for k, w in enumerate(picked, start=1):
            u |= self.word_cls[w]
            cand = make(u, k)
            if cand:
                yield cand
        # down-sets of single words, grouped by support
        for w in self.nonzero_words:
            cand = make(self.word_cls[w], 1)
            if cand:
                yield cand
        # whole code
        full = 0
        for w in self.nonzero_words:
            full |= self.word_cls[w]
        cand = make(full, 1)
        if cand:
            yield cand


def _resolve_mode(code: Code, mode: str) -> str:
    if mode == "auto":
        return "exact" if len(code) <= EXACT_WORD_LIMIT else "heuristic"
    if mode not in ("exact", "heuristic"):
        raise CodeInputError(f"unknown mode {mode!r}")
    if mode == "exact" and len(code) > EXACT_WORD_LIMIT:
        raise CodeInputError(f"exact density limited to {EXACT_WORD_LIMIT} words")
    return mode


def density(code: Code, mode: str = "exact") -> DensityResult:
    """Minimum of ``|Supp(C')| / CL(C')`` over subcodes.

    Heuristic mode returns an upper bound on the density (its candidates use
    certified lower bounds on chain length) and flags ``exact=False``.
    """
    mode = _resolve_mode(code, mode)
    if not code.support_mask().any():
        raise CodeInputError("density is undefined for a code without nonzero words")
    ctx = _Context(code)
    cands = ctx.exact_candidates() if mode == "exact" else ctx.heuristic_candidates()
    best = min(cands, key=lambda c: (c.ratio, -c.support))
    return DensityResult(
        phi=best.ratio,
        witness=code.subcode(_bits(best.words)),
        support_size=best.support,
        chain_length=best.cl,
        exact=mode == "exact",
    )


def _bits(x: int) -> list[int]:
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


def _find(ctx: _Context, d, mode: str) -> _Candidate | None:
    cands = ctx.exact_candidates() if mode == "exact" else ctx.heuristic_candidates()
    best = None
    for c in cands:
        if c.cl > 0 and _le(c.support, c.cl, d):
            if best is None or (c.support, -c.ratio) > (best.support, -best.ratio):
                best = c
    return best


def find_sparse_subcode(code: Code, d, mode: str = "exact") -> Code | None:
    """A subcode with ``|Supp| / CL <= d``, preferring the largest support.

    ``None`` is authoritative in exact mode and only advisory in heuristic mode.
    """
    if d <= 0:
        raise CodeInputError("d must be positive")
    mode = _resolve_mode(code, mode)
    if not code.support_mask().any():
        return None
    hit = _find(_Context(code), d, mode)
    return None if hit is None else code.subcode(_bits(hit.words))


@dataclass(frozen=True)
class PeelRound:
    coords: tuple[int, ...]   # coordinates of the input code peeled this round
    support_size: int
    chain_length: int


@dataclass
class DecompositionResult:
    T: tuple[int, ...]
    peel_code: Code
    remaining_code: Code
    d: object
    chain_length: int
    rounds: list[PeelRound] = field(default_factory=list)
    mode: str = "exact"
    verified_phi: bool = True
    expanded_m: int = 0

    @property
    def peeled_size(self) -> int:
        """``|T|`` counted with multiplicity."""
        return sum(r.support_size for r in self.rounds)

    def size_ok(self) -> bool:
        return _le(self.peeled_size, 1, self.d * self.chain_length) if self.chain_length else self.peeled_size == 0

    def rounds_ok(self) -> bool:
        return all(r.chain_length > 0 and _le(r.support_size, r.chain_length, self.d) for r in self.rounds)

    def counting_table(self) -> list[tuple[int, int, int]]:
        return counting_rows(self.remaining_code, self.chain_length, self.d, self.chain_length, self.expanded_m)

    def counting_ok(self) -> bool:
        return all(count <= bound for _, count, bound in self.counting_table())

    def check(self) -> bool:
        return self.size_ok() and self.rounds_ok() and self.counting_ok()

    def to_json(self) -> dict:
        return {
            "T": list(self.T),
            "peeled_size": self.peeled_size,
            "d": float(self.d),
            "chain_length": self.chain_length,
            "mode": self.mode,
            "verified_phi": self.verified_phi,
            "rounds": [
                {"coords": list(r.coords), "support_size": r.support_size, "chain_length": r.chain_length}
                for r in self.rounds
            ],
            "remaining_words": len(self.remaining_code),
            "certificates": {
                "size": self.size_ok(),
                "rounds": self.rounds_ok(),
                "counting": self.counting_ok(),
            },
        }


def counting_rows(code: Code, cl_value: int, threshold, alpha_max: int, m: int | None = None):
    """``(alpha, #words of weight <= alpha*threshold, bound)`` for ``alpha = 1..alpha_max``.

    The bound is ``binom(CL, alpha) * (m+1)^alpha``; for ``alpha > CL`` the
    binomial vanishes and the cardinality bound ``(m+1)^alpha`` is used.
    """
    m = code.expanded_m if m is None else m
    weights = code.weights()
    rows = []
    for alpha in range(1, alpha_max + 1):
        limit = alpha * threshold
        if isinstance(limit, Rational):
            count = sum(1 for x in weights if Fraction(int(x)) <= limit)
        else:
            count = int(np.count_nonzero(weights <= float(limit) + FLOAT_SLACK))
        bound = max(binom(cl_value, alpha), 1 if alpha > cl_value else 0) * (m + 1) ** alpha
        rows.append((alpha, count, bound))
    return rows


def decompose(code: Code, d, mode: str = "exact", chain_length: int | None = None) -> DecompositionResult:
    """Peel off sparse subcodes until none with density ``<= d`` remains.

    ``chain_length`` may supply CL(C) or an upper bound on it; otherwise it is
    computed exactly.  Heuristic results are checked against the counting
    bound before being returned.
    """
    if d <= 0:
        raise CodeInputError("d must be positive")
    mode = _resolve_mode(code, mode)
    if chain_length is None:
        chain_length = ChainSolver(code).chain_length()
    idx = np.arange(code.m)
    cur = code
    rounds = []
    verified = True
    while cur.support_mask().any():
        ctx = _Context(cur)
        try:
            sub_mode = _resolve_mode(cur, mode)
        except CodeInputError:
            sub_mode = "heuristic"
        hit = _find(ctx, d, sub_mode)
        if hit is None:
            verified = sub_mode == "exact"
            break
        cols = np.concatenate([ctx.cls.members[k] for k in _bits(hit.classes)])
        peeled = np.sort(idx[cols])
        rounds.append(PeelRound(tuple(int(i) for i in peeled), hit.support, hit.cl))
        keep = np.ones(cur.m, dtype=bool)
        keep[cols] = False
        idx = idx[keep]
        cur = restrict(cur, keep)
    T = tuple(sorted(i for r in rounds for i in r.coords))
    keep = np.ones(code.m, dtype=bool)
    keep[list(T)] = False
    result = DecompositionResult(
        T=T,
        peel_code=restrict(code, np.asarray(T, dtype=np.int64)),
        remaining_code=restrict(code, keep),
        d=d,
        chain_length=chain_length,
        rounds=rounds,
        mode=mode,
        verified_phi=verified,
        expanded_m=code.expanded_m,
    )
    if not verified and not result.counting_ok():
        raise CertificateError(
            "heuristic decomposition failed the counting check; rerun in exact mode"
        )
    return result


def chain_additivity_check(code: Code, subcode: Code) -> bool:
    """``CL(C restricted off Supp(C')) <= CL(C) - CL(C')``."""
    if subcode.m != code.m:
        raise CodeInputError("subcode must live on the same coordinates")
    words = set(code.as_strings())
    if not set(subcode.as_strings()) <= words:
        raise CodeInputError("subcode is not contained in the code")
    rest = restrict(code, ~subcode.support_mask())
    return ChainSolver(rest).chain_length() <= ChainSolver(code).chain_length() - ChainSolver(subcode).chain_length()
