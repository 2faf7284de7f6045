"""Randomised contraction and its survival bound.

``contract`` repeatedly picks a uniformly random support coordinate and
deletes every word containing it, until the chain length falls below the
threshold, then returns a uniformly random surviving word.

Two stopping rules are supported.  ``until="below"`` loops while
``CL >= alpha`` (the loop as usually written down).  ``until="at_most"`` loops
while ``CL > alpha``; this is the rule under which the survival bound
``(m+1)^-alpha / binom(CL, alpha)`` is proved, since the product
``prod_{k=alpha+1}^{CL} (1 - alpha/k)`` stops at ``k = alpha + 1``.  With the
first rule a word of weight ``alpha * Phi`` can be contracted away with
certainty (e.g. ``alpha = 1`` on the identity code empties it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chain_metrics import ChainSolver, binom
from .core import Code, CodeInputError, parse_word, seeded_rng
from .density import density

UNTIL = ("below", "at_most")


def contract_step(code: Code, i: int) -> Code:
    """Drop every word with a one at coordinate ``i``."""
    if not 0 <= i < code.m:
        raise CodeInputError(f"coordinate {i} out of range for m={code.m}")
    col = code.matrix[:, i]
    if not col.any():
        raise CodeInputError(f"coordinate {i} is not in the support")
    return Code(code.matrix[~col], code.coords, code.mult)


@dataclass(frozen=True)
class ContractionTrace:
    alpha: int
    picked: tuple[int, ...]
    sizes: tuple[int, ...]          # words left after each step, starting with |C|
    returned: str | None            # bit string of the returned word

    @property
    def steps(self) -> int:
        return len(self.picked)

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "picked": list(self.picked), "sizes": list(self.sizes),
                "returned": self.returned}


class Contractor:
    """Runs contraction trials on one code, sharing the chain-length memo."""

    def __init__(self, code: Code, alpha: int, until: str = "below", budget: int | None = None):
        if alpha < 1:
            raise CodeInputError("alpha must be a positive integer")
        if until not in UNTIL:
            raise CodeInputError(f"until must be one of {UNTIL}")
        self.code = code
        self.alpha = alpha
        self.until = until
        self.solver = ChainSolver(code, budget) if budget else ChainSolver(code)
        self.classes = code.column_classes()
        self._states: dict[int, tuple] = {}

    def _keep_going(self, s: int) -> bool:
        cl = self.solver.chain_length(s)
        return cl >= self.alpha if self.until == "below" else cl > self.alpha

    def _live_classes(self, s: int) -> list[int]:
        return [k for k, col in enumerate(self.classes.masks) if col & s]

    def _state(self, s: int):
        """Cached (continue?, live classes, cumulative class weights) for subcode ``s``."""
        hit = self._states.get(s)
        if hit is None:
            live = self._live_classes(s)
            cum = np.cumsum([self.classes.sizes[k] for k in live], dtype=float)
            hit = (self._keep_going(s), live, cum)
            self._states[s] = hit
        return hit

    def run(self, rng: np.random.Generator) -> tuple[int, list[int], list[int], int | None]:
        """One trial: final subcode mask, picked coordinates, sizes, returned word index."""
        s = self.solver.full
        picked, sizes = [], [len(self.code)]
        while True:
            go, live, cum = self._state(s)
            if not go:
                break
            # a uniform support coordinate: class by total multiplicity, then a member
            r = rng.random() * cum[-1]
            k = live[min(int(np.searchsorted(cum, r, side="right")), len(live) - 1)]
            members = self.classes.members[k]
            if len(members) == 1:
                coord = int(members[0])
            else:
                mult = self.code.mult[members]
                coord = int(members[int(rng.choice(len(members), p=mult / mult.sum()))])
            picked.append(coord)
            s &= ~self.classes.masks[k]
            sizes.append(s.bit_count())
        n = s.bit_count()
        if n == 0:
            return s, picked, sizes, None
        pos = int(rng.integers(n))
        x = s
        for _ in range(pos):
            x &= x - 1
        return s, picked, sizes, (x & -x).bit_length() - 1

    def exact_return_probability(self, target: int) -> float:
        """Probability that a trial returns word index ``target``, by recursion over subcodes."""
        sizes = self.classes.sizes
        masks = self.classes.masks

        @lru_cache(maxsize=None)
        def prob(s: int) -> float:
            if not self._keep_going(s):
                n = s.bit_count()
                return ((s >> target) & 1) / n if n else 0.0
            live = self._live_classes(s)
            total = sum(sizes[k] for k in live)
            return sum(sizes[k] / total * prob(s & ~masks[k]) for k in live)

        return prob(self.solver.full)


def contract(code: Code, alpha: int, rng=0, until: str = "below") -> ContractionTrace:
    """Run one contraction; ``rng`` is a seed or a numpy Generator."""
    runner = Contractor(code, alpha, until)
    _, picked, sizes, word = runner.run(seeded_rng(rng))
    returned = None if word is None else code.as_strings()[word]
    return ContractionTrace(alpha, tuple(picked), tuple(sizes), returned)


def survival_bound(cl: int, m: int, alpha: int) -> float:
    """``(m+1)^-alpha / binom(CL, alpha)``; the binomial is floored at one for ``alpha > CL``."""
    return 1.0 / (max(binom(cl, alpha), 1) * (m + 1) ** alpha)


@dataclass(frozen=True)
class SurvivalResult:
    target: str
    alpha: int
    trials: int
    hits: int
    bound: float
    exact: float | None

    @property
    def empirical(self) -> float:
        return self.hits / self.trials

    @property
    def sigma(self) -> float:
        p = self.empirical
        return math.sqrt(p * (1 - p) / self.trials)

    @property
    def passed(self) -> bool:
        return self.empirical >= self.bound - 3 * self.sigma

    def to_json(self) -> dict:
        return {"target": self.target, "alpha": self.alpha, "trials": self.trials, "hits": self.hits,
                "empirical": self.empirical, "bound": self.bound, "sigma": self.sigma,
                "exact": self.exact, "passed": self.passed}


def survival_probability_experiment(
    code: Code,
    target,
    alpha: int,
    trials: int,
    rng=0,
    until: str = "at_most",
    check_precondition: bool = True,
) -> SurvivalResult:
    """Monte Carlo estimate of the probability that contraction returns ``target``.

    The lower bound only applies to targets of weight at most ``alpha * Phi(C)``;
    with ``check_precondition`` such targets are enforced.
    """
    if trials < 1:
        raise CodeInputError("trials must be positive")
    row = parse_word(target, code.m)
    t_idx = code.index_of(row)
    t_weight = int(code.weights()[t_idx])
    if check_precondition and code.support_mask().any():
        phi = density(code, "auto").phi
        if t_weight > alpha * phi:
            raise CodeInputError(
                f"target weight {t_weight} exceeds alpha * Phi = {float(alpha * phi):.4g}; bound does not apply"
            )
    runner = Contractor(code, alpha, until)
    gen = seeded_rng(rng)
    hits = 0
    for _ in range(trials):
        if runner.run(gen)[3] == t_idx:
            hits += 1
    cl = runner.solver.chain_length()
    exact = runner.exact_return_probability(t_idx) if len(code) <= 64 else None
    return SurvivalResult(code.as_strings()[t_idx], alpha, trials, hits,
                          survival_bound(cl, code.expanded_m, alpha), exact)
