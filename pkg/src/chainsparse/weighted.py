"""Weighted sparsification: duplication, weight grouping and the dimension-free loop.

Bounded weights (ratio at most ``m^3``) are handled by duplicating each
coordinate ``floor(2 w / eps)`` times and running the unweighted sparsifier.
Duplicates are kept implicit as column multiplicities, which is equivalent
because sampling every copy independently at rate ``p`` is a binomial draw
per column.

Arbitrary weights are split into groups ``t(i) = floor(log w(i) / (3 log m))``.
Group ``t`` is sparsified on the words whose heaviest coordinate lies in
group ``t`` or ``t + 1``, restricted to the group, plus the all-ones word of
the group.  The per-group results have disjoint supports and are summed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chain_metrics import ChainSolver
from .core import ChainsparseError, Code, CodeInputError, WeightVector, as_weights, restrict, seeded_rng
from .sparsify import SparsifyParams, compose_accuracy, node_chain_bound, sparsify_unweighted
from .verify import verify_sparsifier

THEORY_Q = 40.0
PRACTICAL_Q = 0.2


class StagnationError(ChainsparseError):
    """The dimension-free loop hit its iteration cap without shrinking the support."""


@dataclass(frozen=True)
class WeightedParams:
    """Constants for the weighted reductions on top of the unweighted ones."""

    base: SparsifyParams
    q_constant: float | None = None
    shortcuts: bool | None = None   # the "return w unchanged" thresholds for tiny eps

    @property
    def q(self) -> float:
        if self.q_constant is not None:
            return self.q_constant
        return THEORY_Q if self.base.mode == "theory" else PRACTICAL_Q

    @property
    def use_shortcuts(self) -> bool:
        return self.base.mode == "theory" if self.shortcuts is None else self.shortcuts

    def unweighted(self, epsilon: float, seed) -> SparsifyParams:
        return self.base.replace(epsilon=epsilon, seed=seed)


def _as_params(params, epsilon: float) -> WeightedParams:
    if params is None:
        return WeightedParams(SparsifyParams(epsilon))
    if isinstance(params, SparsifyParams):
        return WeightedParams(params)
    return params


def _mixed_seed(seed, *path: int) -> int:
    return int(seeded_rng(seed, *path).integers(2 ** 63))


# grouping

def weight_group(value: float, m: int) -> int:
    """Largest ``t`` with ``value >= m^(3t)``, using exact comparisons."""
    if value < 1:
        raise CodeInputError("normalized weights must be at least 1")
    if m < 2:
        return 0
    t = 0
    while value >= m ** (3 * (t + 1)):
        t += 1
    return t


@dataclass
class WeightGrouping:
    m: int
    scale: float                      # the minimum positive weight
    t: dict[int, int]                 # coordinate -> group
    members: dict[int, np.ndarray]    # group -> coordinates
    word_types: dict[int, int] = field(default_factory=dict)   # word index -> type
    proper: dict[int, bool] = field(default_factory=dict)

    @property
    def groups(self) -> list[int]:
        return sorted(self.members)

    def to_json(self) -> dict:
        return {"m": self.m, "scale": self.scale,
                "groups": [{"t": t, "size": int(self.members[t].size), "proper": self.proper.get(t)}
                           for t in self.groups],
                "word_types": {str(k): v for k, v in sorted(self.word_types.items())}}


def group_weights(w, m: int) -> WeightGrouping:
    """Group the positive coordinates by ``floor(log(w / min w) / (3 log m))``."""
    vals = w.values if isinstance(w, WeightVector) else np.asarray(w, dtype=np.float64)
    pos = np.flatnonzero(vals > 0)
    if pos.size == 0:
        return WeightGrouping(m, 1.0, {}, {})
    scale = float(vals[pos].min())
    t = {int(i): weight_group(vals[i] / scale, m) for i in pos}
    members: dict[int, list[int]] = {}
    for i, g in t.items():
        members.setdefault(g, []).append(i)
    return WeightGrouping(m, scale, t, {g: np.array(v, dtype=np.int64) for g, v in members.items()})


def classify_words(code: Code, grouping: WeightGrouping) -> None:
    """Fill in word types and proper flags."""
    tvec = np.full(code.m, -1, dtype=np.int64)
    for i, g in grouping.t.items():
        tvec[i] = g
    types = {}
    for k, row in enumerate(code.matrix):
        hit = tvec[row]
        hit = hit[hit >= 0]
        if hit.size:
            types[k] = int(hit.max())
    grouping.word_types = types
    for g, cols in grouping.members.items():
        grouping.proper[g] = any(code.matrix[k, cols].any() for k, ty in types.items() if ty in (g, g + 1))


def group_instance(code: Code, grouping: WeightGrouping, g: int) -> Code:
    """``(C_g u C_{g+1})`` restricted to ``I_g``, plus the all-ones word on ``I_g``."""
    cols = grouping.members[g]
    words = [k for k, ty in grouping.word_types.items() if ty in (g, g + 1)]
    sub = restrict(code.subcode(words), cols)
    return sub.with_word(np.ones(cols.size, dtype=bool))


def group_chain_additivity(code: Code, w) -> tuple[int, int]:
    """``(sum over groups of CL of the group's words, 2 CL(C))``; the first should not exceed the second."""
    vals = as_weights(w, code.m)
    pos = vals > 0
    sub = restrict(code, pos)
    grouping = group_weights(vals[pos], int(pos.sum()))
    classify_words(sub, grouping)
    total = 0
    for g in grouping.groups:
        cols = grouping.members[g]
        words = [k for k, ty in grouping.word_types.items() if ty in (g, g + 1)]
        total += ChainSolver(restrict(sub.subcode(words), cols)).chain_length()
    return total, 2 * ChainSolver(code).chain_length()


# bounded weights

@dataclass(frozen=True)
class DuplicationPlan:
    copies: np.ndarray     # b(i) = floor(2 w(i) / eps)
    epsilon: float

    @property
    def total(self) -> int:
        return int(self.copies.sum())

    @property
    def scale(self) -> float:
        return self.epsilon / 2


def duplication_plan(w, epsilon: float) -> DuplicationPlan:
    vals = np.asarray(w.values if isinstance(w, WeightVector) else w, dtype=np.float64)
    if np.any((vals > 0) & (vals < 1)):
        raise CodeInputError("duplication expects weights normalized to at least 1")
    return DuplicationPlan(np.floor(2 * vals / epsilon + 1e-9).astype(np.int64), epsilon)


def duplication_fidelity(code: Code, w, epsilon: float) -> bool:
    """``(eps/2) <b, c>`` lies in ``(1 +- eps/2) <w, c>`` for every word."""
    vals = as_weights(w, code.m)
    plan = duplication_plan(vals, epsilon)
    mat = code.matrix.astype(np.float64)
    dup = plan.scale * (mat @ plan.copies)
    true = mat @ vals
    return bool(np.all(np.abs(dup - true) <= epsilon / 2 * true + 1e-12 * np.maximum(1, true)))


@dataclass
class WeightedReport:
    kind: str
    epsilon: float
    support_in: int
    support_out: int
    shortcut: str | None = None
    inner: list = field(default_factory=list)
    grouping: dict | None = None
    passes: list = field(default_factory=list)
    certified_eps: float | None = None
    verification: dict | None = None
    checks: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def _finish(code: Code, w, out: np.ndarray, epsilon: float, report: WeightedReport):
    wt = WeightVector(out)
    check = verify_sparsifier(code, w, wt, epsilon)
    report.verification = check.to_json()
    report.support_out = wt.support_size
    if not check.passed:
        raise ChainsparseError(f"weighted sparsifier misses accuracy {epsilon}: deviation {check.max_rel:.4g}")
    return wt, report


def sparsify_bounded_weights(code: Code, w, epsilon: float, params=None,
                             weight_cap_m: int | None = None) -> tuple[WeightVector, WeightedReport]:
    """Sparsify a code whose positive weights are within a factor ``m^3`` of each other.

    ``weight_cap_m`` sets the ``m`` of that cap (default: the number of
    positive coordinates).
    """
    if not 0 < epsilon < 1:
        raise CodeInputError("epsilon must lie in (0, 1)")
    wp = _as_params(params, epsilon)
    vals = as_weights(w, code.m)
    pos = vals > 0
    m = int(pos.sum())
    report = WeightedReport("bounded", epsilon, m, m)
    out = np.zeros(code.m)
    if m == 0:
        return _finish(code, vals, out, epsilon, report)
    cap_m = weight_cap_m or m
    scale = float(vals[pos].min())
    norm = vals[pos] / scale
    if norm.max() > float(cap_m) ** 3:
        raise CodeInputError(f"weight ratio {norm.max():.4g} exceeds m^3 = {cap_m ** 3}")
    if wp.use_shortcuts and epsilon <= 1 / math.sqrt(m):
        report.shortcut = "eps <= 1/sqrt(m)"
        return _finish(code, vals, vals.copy(), epsilon, report)
    sub = restrict(code, pos)
    seed = wp.base.seed
    if np.all(norm == norm[0]):
        # uniform weights: the unweighted sparsifier up to a global scale
        report.shortcut = "uniform weights"
        wt, rep = sparsify_unweighted(sub, wp.unweighted(epsilon, seed))
        out[pos] = wt.values * scale * norm[0]
    else:
        plan = duplication_plan(norm, epsilon)
        dup = sub.with_mult(plan.copies)
        wt, rep = sparsify_unweighted(dup, wp.unweighted(epsilon / 3, seed))
        out[pos] = wt.values * plan.scale * scale
        report.checks["duplicated_m"] = plan.total
    report.inner.append(rep.to_json())
    return _finish(code, vals, out, epsilon, report)


def sparsify_weighted(code: Code, w, epsilon: float, params=None) -> tuple[WeightVector, WeightedReport]:
    """Sparsify a code with arbitrary nonnegative weights via weight groups."""
    if not 0 < epsilon < 1:
        raise CodeInputError("epsilon must lie in (0, 1)")
    wp = _as_params(params, epsilon)
    vals = as_weights(w, code.m)
    pos = vals > 0
    m = int(pos.sum())
    report = WeightedReport("weighted", epsilon, m, m)
    out = np.zeros(code.m)
    if m == 0:
        return _finish(code, vals, out, epsilon, report)
    if wp.use_shortcuts and epsilon < 8 / math.sqrt(m):
        report.shortcut = "eps < 8/sqrt(m)"
        return _finish(code, vals, vals.copy(), epsilon, report)
    pos_idx = np.flatnonzero(pos)
    sub = restrict(code, pos)
    grouping = group_weights(vals[pos], m)
    classify_words(sub, grouping)
    report.grouping = grouping.to_json()
    cap_ok = True
    for g in grouping.groups:
        if not grouping.proper[g]:
            continue
        cols = grouping.members[g]
        inst = group_instance(sub, grouping, g)
        base = grouping.scale * float(m) ** (3 * g)
        gw = vals[pos_idx[cols]] / base
        inner = WeightedParams(wp.base.replace(seed=_mixed_seed(wp.base.seed, g)), wp.q_constant, wp.shortcuts)
        wt, rep = sparsify_bounded_weights(inst, gw, epsilon / 2, inner, weight_cap_m=m)
        out[pos_idx[cols]] = wt.values * base
        report.inner.append({"t": g, **rep.to_json()})
        cap_ok &= bool(np.all(wt.values <= 2.0 * float(m) ** 4))
    report.checks["group_cap"] = cap_ok
    return _finish(code, vals, out, epsilon, report)


# dimension-free recursion

def log_star(m: float) -> int:
    k = 0
    while m > 1:
        m = math.log2(m)
        k += 1
    return k


def series_bound(q: float, terms: int = 60) -> float:
    """``1/a_0 + 1/a_1 + ...`` with ``a_0 = q`` and ``a_{k+1} = 2^(a_k / 6)``.

    Each pass shrinks ``m`` to about ``log^6 m``, so the per-pass accuracies
    ``eps / (Q log m)`` form this series with ``q = Q log m``.
    """
    total, a = 0.0, float(q)
    for _ in range(terms):
        total += 1.0 / a
        if a > 6 * 1023:
            break
        nxt = 2.0 ** (a / 6)
        if nxt <= a:
            # below the fixed point the series stops shrinking
            return math.inf
        a = nxt
    return total


def sparsify_dimension_free(code: Code, w, epsilon: float, params=None,
                            cl_bound: int | None = None) -> tuple[WeightVector, WeightedReport]:
    """Repeat the weighted sparsifier until the support no longer depends on ``m``.

    While ``log2 m >= CL / eps^2`` a pass at accuracy ``eps / (Q log2 m)`` is
    applied; then one more such pass and a final pass at ``eps / 2``.
    """
    if not 0 < epsilon <= 0.5:
        raise CodeInputError("the dimension-free sparsifier needs eps in (0, 1/2]")
    wp = _as_params(params, epsilon)
    vals = as_weights(w, code.m)
    cur = vals.copy()
    m0 = int(np.count_nonzero(cur))
    report = WeightedReport("dimension-free", epsilon, m0, m0)
    if m0 == 0:
        return _finish(code, vals, cur, epsilon, report)
    if cl_bound is None:
        cl_bound = wp.base.cl_bound
    cl = node_chain_bound(restrict(code, cur > 0), cl_bound)
    threshold = cl / epsilon ** 2
    cap = log_star(m0) + 3
    report.checks["cl_bound"] = cl
    report.checks["threshold_log2m"] = threshold
    eps_used = []

    def pass_eps(m_cur: int) -> float:
        # no pass needs to be coarser than the final eps/2 one
        return min(epsilon / (wp.q * math.log2(max(m_cur, 2))), epsilon / 2)

    def one_pass(eps_pass: float, index: int):
        nonlocal cur
        before = int(np.count_nonzero(cur))
        inner = WeightedParams(wp.base.replace(seed=_mixed_seed(wp.base.seed, index), cl_bound=cl_bound),
                               wp.q_constant, wp.shortcuts)
        wt, rep = sparsify_weighted(code, cur, eps_pass, inner)
        cur = wt.values.copy()
        eps_used.append(eps_pass)
        report.passes.append({"index": index, "epsilon": eps_pass, "support_before": before,
                              "support_after": wt.support_size})
        return before, wt.support_size

    i = 0
    while math.log2(np.count_nonzero(cur)) >= threshold:
        before, after = one_pass(pass_eps(int(np.count_nonzero(cur))), i)
        i += 1
        if i >= cap:
            if after >= before:
                raise StagnationError(
                    f"{i} passes without getting below 2^{threshold:.3g}; supports "
                    f"{[p['support_after'] for p in report.passes]}"
                )
            break
    one_pass(pass_eps(int(np.count_nonzero(cur))), i)
    one_pass(epsilon / 2, i + 1)
    report.certified_eps = compose_accuracy(eps_used)
    return _finish(code, vals, cur, epsilon, report)
