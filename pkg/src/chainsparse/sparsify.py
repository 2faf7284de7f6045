"""Recursive peel-and-subsample sparsification of unweighted codes.

At every node of the recursion the code is split by ``decompose`` into a
peeled part (few coordinates, kept at full weight) and a remainder with few
light words.  The remainder is subsampled at rate ``p = sqrt(eta * CL / m')``
and reweighted by ``1/p``; a sample is only accepted after every distinct word
has been checked against the per-level accuracy, so a returned sparsifier is
valid by construction.  Both children recurse until ``max_depth``.

Codes may carry column multiplicities (a column standing for several
identical coordinates).  Multiplicities count towards every size, and a
column with ``k`` copies contributes ``Binomial(k, p)`` sampled copies.  The
output weight of a column is the total weight of its copies.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .chain_metrics import ChainSolver, InexactError, chain_length_bounds
from .core import ChainsparseError, Code, CodeInputError, REL_TOL, WeightVector, restrict, seeded_rng
from .density import decompose
from .verify import verify_sparsifier

THEORY_ETA = 1000.0
THEORY_DENOM = 20.0
PRACTICAL_ETA = 0.003
PRACTICAL_DENOM = 1.5
NODE_CL_BUDGET = 20_000
MODES = ("theory", "practical")


class SubsampleError(ChainsparseError):
    """Rejection sampling ran out of attempts."""


class SparsifyError(ChainsparseError):
    """A returned sparsifier failed its end-to-end check (should not happen)."""


@dataclass(frozen=True)
class SparsifyParams:
    epsilon: float
    mode: str = "practical"
    eta_constant: float | None = None
    denom_constant: float | None = None
    max_depth: int | None = None
    attempt_cap: int = 100
    seed: int = 0
    cl_bound: int | None = None

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise CodeInputError("epsilon must lie in (0, 1)")
        if self.mode not in MODES:
            raise CodeInputError(f"mode must be one of {MODES}")
        if self.eta_constant is not None and self.eta_constant <= 0:
            raise CodeInputError("eta_constant must be positive")
        if self.denom_constant is not None and self.denom_constant <= 0:
            raise CodeInputError("denom_constant must be positive")
        if self.max_depth is not None and self.max_depth < 1:
            raise CodeInputError("max_depth must be at least 1")
        if self.attempt_cap < 1:
            raise CodeInputError("attempt_cap must be at least 1")
        if self.cl_bound is not None and self.cl_bound < 0:
            raise CodeInputError("cl_bound must be nonnegative")

    @property
    def eta_c(self) -> float:
        if self.eta_constant is not None:
            return self.eta_constant
        return THEORY_ETA if self.mode == "theory" else PRACTICAL_ETA

    @property
    def denom_c(self) -> float:
        if self.denom_constant is not None:
            return self.denom_constant
        return THEORY_DENOM if self.mode == "theory" else PRACTICAL_DENOM

    def depth_for(self, m: int) -> int:
        if self.max_depth is not None:
            return self.max_depth
        return max(1, math.ceil(math.log2(math.log2(m)))) if m > 2 else 1

    def replace(self, **kw) -> "SparsifyParams":
        return SparsifyParams(**{**asdict(self), **kw})


def llog(m: int) -> float:
    """``max(1, log2 log2 m)``."""
    return max(1.0, math.log2(math.log2(m))) if m > 2 else 1.0


def compute_eta(m: int, epsilon: float, params: SparsifyParams | None = None) -> float:
    """``eta_c * log2(m) * (denom_c * llog(m) / eps)^2``."""
    if m < 2:
        raise CodeInputError("eta needs m >= 2")
    params = params or SparsifyParams(0.5, mode="theory")
    return params.eta_c * math.log2(m) * (params.denom_c * llog(m) / epsilon) ** 2


def level_epsilon(m: int, epsilon: float, params: SparsifyParams) -> float:
    """Accuracy demanded of one subsample step."""
    return epsilon / (params.denom_c * llog(m))


def compose_accuracy(child_eps) -> float:
    """Worst relative error after stacking ``(1 +- e_i)`` factors."""
    up, down = 1.0, 1.0
    for e in child_eps:
        up *= 1 + e
        down *= 1 - e
    return max(up - 1, 1 - down)


@dataclass(frozen=True)
class SubsampleResult:
    counts: np.ndarray       # sampled copies per column
    p: float
    attempts: int

    @property
    def size(self) -> int:
        return int(self.counts.sum())

    @property
    def weight(self) -> float:
        return 1.0 / self.p


def sample_feasible(weights: np.ndarray, p: float, target_eps: float) -> bool:
    """Whether some sample count can put every word within ``(1 +- target_eps)``.

    A word of weight ``w`` is estimated by ``k / p`` with ``k`` an integer, so
    acceptance needs an integer in ``[(1 - eps) p w, (1 + eps) p w]``.
    """
    if p >= 1.0:
        return True
    lo = (1 - target_eps) * p * weights
    hi = (1 + target_eps) * p * weights
    tol = REL_TOL * np.maximum(1.0, hi)
    return bool(np.all(np.ceil(lo - tol) <= np.floor(hi + tol)))


def subsample_remaining(code: Code, cl_bound: int, eta: float, target_eps: float,
                        attempt_cap: int = 100, rng=0, m_prime: int | None = None) -> SubsampleResult:
    """Sample copies at rate ``p = min(1, sqrt(eta * CL / m'))`` until the sample is accurate.

    A sample is accepted when every distinct nonzero word is within
    ``(1 +- target_eps)`` of its weight and at most ``2 sqrt(CL m' eta)``
    copies were drawn.  ``m'`` defaults to the support size of ``code``.
    """
    if cl_bound < 1:
        raise CodeInputError("cl_bound must be at least 1")
    mult = code.mult
    m_prime = int(mult[code.support_mask()].sum()) if m_prime is None else m_prime
    if m_prime == 0:
        return SubsampleResult(np.zeros(code.m, dtype=np.int64), 1.0, 0)
    p = min(1.0, math.sqrt(eta * cl_bound / m_prime))
    if p >= 1.0:
        return SubsampleResult(mult.copy(), 1.0, 0)
    gen = seeded_rng(rng)
    mat = code.matrix[code.nonzero_mask()].astype(np.float64)
    true = mat @ mult
    slack = REL_TOL * np.maximum(1.0, true)
    if not sample_feasible(true, p, target_eps):
        raise SubsampleError(f"no sample at rate p = {p:.4g} can be accurate to {target_eps:.4g}")
    cap = 2.0 * math.sqrt(cl_bound * m_prime * eta)
    for attempt in range(1, attempt_cap + 1):
        counts = gen.binomial(mult, p)
        if counts.sum() > cap:
            continue
        est = (mat @ counts) / p
        if np.all(np.abs(est - true) <= target_eps * true + slack):
            return SubsampleResult(counts, p, attempt)
    raise SubsampleError(f"no accurate sample in {attempt_cap} attempts (p = {p:.4g})")


@dataclass
class SparsifyNode:
    path: tuple[int, ...]
    depth: int
    m_prime: int            # support size with multiplicity
    columns: int            # distinct support columns
    multiplier: float
    kind: str               # "empty", "depth", "retain" or "split"
    cl: int = 0
    d: float = 0.0
    peeled: int = 0
    sampled: int = 0
    attempts: int = 0
    p: float = 1.0
    level_eps: float = 0.0
    size_bound: float = 0.0

    def to_json(self) -> dict:
        out = asdict(self)
        out["path"] = list(self.path)
        return out


@dataclass
class SparsifyReport:
    params: dict
    m: int
    eta: float
    max_depth: int
    level_eps: float
    cl_bound: int
    nodes: list[SparsifyNode] = field(default_factory=list)
    support: int = 0
    certified_eps: float = 0.0
    verification: dict | None = None

    @property
    def leaves(self) -> int:
        return sum(1 for n in self.nodes if n.kind != "split")

    @property
    def split_depth(self) -> int:
        return max((n.depth + 1 for n in self.nodes if n.kind == "split"), default=0)

    def to_json(self) -> dict:
        return {"params": self.params, "m": self.m, "eta": self.eta, "max_depth": self.max_depth,
                "level_eps": self.level_eps, "cl_bound": self.cl_bound, "support": self.support,
                "leaves": self.leaves, "certified_eps": self.certified_eps,
                "verification": self.verification, "nodes": [n.to_json() for n in self.nodes]}


def node_chain_bound(code: Code, cl_bound: int | None = None, budget: int = NODE_CL_BUDGET) -> int:
    """An upper bound on CL: exact when cheap, else the support size; capped by ``cl_bound``."""
    try:
        cl = ChainSolver(code, budget).chain_length()
    except InexactError:
        cl = chain_length_bounds(code)[1]
    return cl if cl_bound is None else min(cl, cl_bound)


class _Sparsifier:
    def __init__(self, code: Code, params: SparsifyParams):
        self.params = params
        self.m = code.expanded_m
        self.eta = compute_eta(max(self.m, 2), params.epsilon, params)
        self.max_depth = params.depth_for(max(self.m, 2))
        self.level_eps = level_epsilon(max(self.m, 2), params.epsilon, params)
        self.root_cl = node_chain_bound(code, params.cl_bound)
        self.out = np.zeros(code.m)
        self.nodes: list[SparsifyNode] = []

    def size_bound(self, depth: int) -> float:
        cl = max(self.root_cl, 1)
        return 4.0 * cl * (self.m / cl) ** (1.0 / 2 ** depth) * self.eta

    def run(self, code: Code, idx: np.ndarray, factor: float, depth: int, path: tuple[int, ...]):
        supp = code.support_mask()
        m_prime = int(code.mult[supp].sum())
        node = SparsifyNode(path, depth, m_prime, int(supp.sum()), factor, "split",
                            size_bound=self.size_bound(depth))
        self.nodes.append(node)
        if self.params.mode == "theory" and m_prime > node.size_bound * (1 + REL_TOL):
            raise SparsifyError(f"node {path} has support {m_prime} above the size recurrence")
        if m_prime == 0:
            node.kind = "empty"
            return
        if depth >= self.max_depth:
            node.kind = "depth"
            self.out[idx] += factor * code.mult
            return
        cl = node_chain_bound(code, self.params.cl_bound)
        node.cl = cl
        if cl == 0 or 2.0 * math.sqrt(cl * m_prime * self.eta) >= m_prime:
            node.kind = "retain"
            self.out[idx] += factor * code.mult
            return
        # work on the support only; zero columns carry nothing
        code = restrict(code, supp)
        idx = idx[supp]
        d = math.sqrt(m_prime * self.eta / cl)
        node.d = d
        dec = decompose(code, d, mode="auto", chain_length=cl)
        peel = np.zeros(code.m, dtype=bool)
        peel[list(dec.T)] = True
        node.peeled = int(code.mult[peel].sum())
        node.level_eps = self.level_eps
        rest = restrict(code, ~peel)
        p = min(1.0, math.sqrt(self.eta * cl / m_prime))
        if not sample_feasible(rest.weights()[rest.nonzero_mask()], p, self.level_eps):
            # no draw at this rate can pass the accuracy check
            node.kind = "retain"
            node.p = p
            self.out[idx] += factor * code.mult
            return
        sample = subsample_remaining(rest, cl, self.eta, self.level_eps, self.params.attempt_cap,
                                     seeded_rng(self.params.seed, *path, 2), m_prime=m_prime)
        node.sampled, node.attempts, node.p = sample.size, sample.attempts, sample.p
        if peel.any():
            self.run(restrict(code, peel), idx[peel], factor, depth + 1, path + (0,))
        kept = sample.counts > 0
        if kept.any():
            rest_idx = idx[~peel]
            child = Code(rest.matrix[:, kept], rest.coords[kept], sample.counts[kept])
            self.run(child, rest_idx[kept], factor * sample.weight, depth + 1, path + (1,))


def sparsify_unweighted(code: Code, params: SparsifyParams) -> tuple[WeightVector, SparsifyReport]:
    """A ``(1 +- eps)`` sparsifier of ``code`` (column multiplicities count as weights).

    The result is verified against every distinct word before it is returned.
    """
    work = _Sparsifier(code, params)
    if code.m:
        work.run(code, np.arange(code.m), 1.0, 0, ())
    out = WeightVector(work.out)
    report = SparsifyReport(
        params={**asdict(params), "eta_constant": params.eta_c, "denom_constant": params.denom_c},
        m=work.m, eta=work.eta, max_depth=work.max_depth, level_eps=work.level_eps,
        cl_bound=work.root_cl, nodes=work.nodes, support=out.support_size,
    )
    report.certified_eps = compose_accuracy([work.level_eps] * report.split_depth)
    check = verify_sparsifier(code, code.mult.astype(np.float64), out, params.epsilon)
    report.verification = check.to_json()
    if not check.passed:
        raise SparsifyError(f"sparsifier misses accuracy {params.epsilon}: max deviation {check.max_rel:.4g}")
    return out, report
