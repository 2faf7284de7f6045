"""Sparsifier verification, counting-bound audits and the concentration Monte Carlo."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import REL_TOL, Code, CodeInputError, as_weights, seeded_rng
from .density import counting_rows


@dataclass(frozen=True)
class VerificationReport:
    mode: str                  # "exhaustive" or "sampled"
    epsilon: float
    words_checked: int
    max_over: float            # largest (est - true) / true
    max_under: float           # largest (true - est) / true
    worst_word: str | None
    passed: bool
    sample_seed: int | None = None

    @property
    def max_rel(self) -> float:
        return max(self.max_over, self.max_under)

    def to_json(self) -> dict:
        return {"mode": self.mode, "epsilon": self.epsilon, "words_checked": self.words_checked,
                "max_over": self.max_over, "max_under": self.max_under, "max_rel": self.max_rel,
                "worst_word": self.worst_word, "passed": self.passed, "sample_seed": self.sample_seed}


def word_values(code: Code, w) -> np.ndarray:
    """``<w, c>`` for every word of ``code``."""
    return code.matrix.astype(np.float64) @ as_weights(w, code.m)


def verify_sparsifier(code: Code, w, w_tilde, epsilon: float,
                      sample_size: int | None = None, seed: int = 0) -> VerificationReport:
    """Check ``<w~, c>`` in ``(1 +- eps) <w, c>`` for the nonzero words of ``code``.

    Every distinct nonzero word is checked unless ``sample_size`` is given and
    smaller than the code, in which case a seeded uniform sample is used.
    """
    if epsilon < 0:
        raise CodeInputError("epsilon must be nonnegative")
    true = word_values(code, w)
    est = word_values(code, w_tilde)
    idx = np.flatnonzero(code.nonzero_mask())
    mode, used_seed = "exhaustive", None
    if sample_size is not None and sample_size < idx.size:
        rng = seeded_rng(seed)
        idx = np.sort(rng.choice(idx, size=sample_size, replace=False))
        mode, used_seed = "sampled", seed
    if idx.size == 0:
        return VerificationReport(mode, epsilon, 0, 0.0, 0.0, None, True, used_seed)
    t, e = true[idx], est[idx]
    pos = t > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(pos, (e - t) / np.where(pos, t, 1.0), np.where(e > 0, np.inf, 0.0))
    slack = REL_TOL * np.maximum(1.0, np.abs(t))
    ok = np.abs(e - t) <= epsilon * t + slack
    worst = int(np.argmax(np.abs(rel)))
    return VerificationReport(
        mode=mode,
        epsilon=epsilon,
        words_checked=int(idx.size),
        max_over=float(max(0.0, rel.max())),
        max_under=float(max(0.0, -rel.min())),
        worst_word=code.as_strings()[idx[worst]],
        passed=bool(ok.all()),
        sample_seed=used_seed,
    )


@dataclass(frozen=True)
class CountingAudit:
    rows: tuple[tuple[int, int, int], ...]   # (alpha, words of weight <= alpha * phi, bound)

    @property
    def passed(self) -> bool:
        return all(count <= bound for _, count, bound in self.rows)

    def to_json(self) -> dict:
        return {"rows": [{"alpha": a, "count": c, "bound": b, "ok": c <= b} for a, c, b in self.rows],
                "passed": self.passed}


def counting_bound_audit(code: Code, cl_value: int, d_or_phi, alpha_max: int) -> CountingAudit:
    """Count words of weight ``<= alpha * d_or_phi`` against ``binom(CL, alpha) (m+1)^alpha``."""
    if cl_value < 0 or alpha_max < 0:
        raise CodeInputError("cl_value and alpha_max must be nonnegative")
    return CountingAudit(tuple(counting_rows(code, cl_value, d_or_phi, alpha_max)))


@dataclass(frozen=True)
class ConcentrationResult:
    ell: int
    p: float
    epsilon: float
    trials: int
    failures: int
    bound: float

    @property
    def rate(self) -> float:
        return self.failures / self.trials

    @property
    def sigma(self) -> float:
        r = self.rate
        return math.sqrt(r * (1 - r) / self.trials)

    @property
    def passed(self) -> bool:
        return self.rate <= self.bound + 3 * self.sigma

    def to_json(self) -> dict:
        return {"ell": self.ell, "p": self.p, "epsilon": self.epsilon, "trials": self.trials,
                "failures": self.failures, "rate": self.rate, "bound": self.bound,
                "sigma": self.sigma, "passed": self.passed}


def concentration_bound(ell: int, p: float, epsilon: float) -> float:
    return 2.0 * math.exp(-0.38 * epsilon ** 2 * ell * p)


def concentration_monte_carlo(ell: int, p: float, epsilon: float, trials: int, rng=0) -> ConcentrationResult:
    """Failure rate of ``sum X_i`` leaving ``(1 +- eps) ell`` when ``X_i = 1/p`` w.p. ``p``."""
    if ell < 1 or not 0 < p <= 1 or trials < 1 or epsilon < 0:
        raise CodeInputError("need ell >= 1, p in (0, 1], trials >= 1 and epsilon >= 0")
    gen = seeded_rng(rng)
    sums = gen.binomial(ell, p, size=trials) / p
    fail = np.abs(sums - ell) > epsilon * ell + REL_TOL * ell
    return ConcentrationResult(ell, p, epsilon, trials, int(fail.sum()), concentration_bound(ell, p, epsilon))
