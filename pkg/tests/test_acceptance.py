"""Acceptance criteria 1-10.

Each test prints exactly one ``criterion N: PASS|FAIL ...`` line to the
terminal (outside pytest's capture) and then asserts the same verdict.
"""

import time

import numpy as np
import pytest

from chainsparse.chain_metrics import ChainSolver, nrd_exact, union_closure_chain_length
from chainsparse.contraction import contract_step, survival_probability_experiment
from chainsparse.core import Code
from chainsparse.density import chain_additivity_check, decompose, density
from chainsparse.generators import (cut_code, k3, linear_support_code, parallel_block_code, random_code,
                                    random_connected_graph, random_linear_spec, rank_mod_q)
from chainsparse.sparsify import SparsifyParams, sparsify_unweighted
from chainsparse.verify import concentration_monte_carlo, counting_bound_audit, verify_sparsifier
from chainsparse.weighted import (WeightedParams, classify_words, group_chain_additivity, group_instance,
                                  group_weights, sparsify_bounded_weights, sparsify_dimension_free,
                                  sparsify_weighted)


@pytest.fixture
def announce(capsys):
    def emit(n: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail
    return emit


def instance(seed: int, max_m: int, max_words: int) -> Code:
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, max_m + 1))
    count = int(rng.integers(1, max_words + 1))
    return random_code(m, count, float(rng.uniform(0.2, 0.7)), rng)


@pytest.fixture(scope="module")
def structural_instances():
    return [instance(10_000 + s, 8, 12) for s in range(1000)]


def test_criterion_1_definition_equivalence(announce):
    start = time.perf_counter()
    bad = sum(ChainSolver(c).chain_length() != union_closure_chain_length(c)
              for c in (instance(s, 6, 8) for s in range(500)))
    elapsed = time.perf_counter() - start
    announce(1, bad == 0 and elapsed < 120, f"500 codes, {bad} mismatches, {elapsed:.1f}s (limit 120s)")


def test_criterion_2_structural_claims(announce, structural_instances):
    bad_nrd = bad_card = bad_step = 0
    for code in structural_instances:
        solver = ChainSolver(code)
        cl = solver.chain_length()
        nrd, _ = nrd_exact(code)
        bad_nrd += nrd > cl
        bad_card += len(code) > (code.m + 1) ** nrd
        for i in np.flatnonzero(code.support_mask()):
            bad_step += ChainSolver(contract_step(code, int(i))).chain_length() >= cl
    rng = np.random.default_rng(2)
    bad_add = 0
    for k in range(200):
        code = structural_instances[k]
        pick = [i for i in range(len(code)) if rng.random() < 0.5] or [0]
        bad_add += not chain_additivity_check(code, code.subcode(pick))
    total = bad_nrd + bad_card + bad_step + bad_add
    announce(2, total == 0, f"1000 codes: NRD>CL {bad_nrd}, cardinality {bad_card}, "
                            f"contract_step {bad_step}; 200 additivity pairs {bad_add} violations")


def test_criterion_3_counting_bound(announce, structural_instances):
    bad = audited = 0
    for code in structural_instances:
        cl = ChainSolver(code).chain_length()
        if cl == 0:
            continue
        phi = density(code, "exact").phi
        bad += not counting_bound_audit(code, cl, phi, cl).passed
        audited += 1
    announce(3, bad == 0, f"{audited} codes with nonempty support, {bad} violations")


def test_criterion_4_decomposition(announce, structural_instances):
    bad = runs = 0
    for code in structural_instances[:200]:
        if not code.support_mask().any():
            continue
        phi = density(code, "exact").phi
        for d in (1, 2, phi / 2, 2 * phi):
            runs += 1
            bad += not decompose(code, d, "exact").check()
    announce(4, bad == 0, f"{runs} decompositions, {bad} certificate violations")


def test_criterion_5_survival(announce):
    lines, ok = [], True
    for name, code, target in (("I4", Code.identity(4), "1000"), ("K3", cut_code(k3()), "000")):
        res = survival_probability_experiment(code, target, 1, 100_000, rng=5, until="at_most")
        ok &= res.passed
        lines.append(f"{name}/{target} {res.empirical:.4f} vs bound {res.bound:.4f} - 3sigma")
    announce(5, ok, "; ".join(lines))


def test_criterion_6_concentration(announce):
    lines, ok = [], True
    for eps in (0.1, 0.2):
        res = concentration_monte_carlo(1000, 0.5, eps, 100_000, rng=6)
        ok &= res.passed
        lines.append(f"eps={eps}: rate {res.rate:.5f} vs bound {res.bound:.5f} + 3sigma")
    announce(6, ok, "; ".join(lines))


def test_criterion_7_end_to_end_unweighted(announce):
    blocks = parallel_block_code([250, 250])
    start = time.perf_counter()
    wt, _ = sparsify_unweighted(blocks, SparsifyParams(0.25, seed=0))
    t_a = time.perf_counter() - start
    ok_a = verify_sparsifier(blocks, np.ones(500), wt, 0.25).passed and wt.support_size <= 250 and t_a < 60
    g = random_connected_graph(12, 0.5, 0)
    cuts = cut_code(g)
    start = time.perf_counter()
    wt_b, _ = sparsify_unweighted(cuts, SparsifyParams(0.5, seed=0, cl_bound=g.n - 1))
    t_b = time.perf_counter() - start
    rep_b = verify_sparsifier(cuts, np.ones(cuts.m), wt_b, 0.5)
    ok_b = rep_b.passed and rep_b.mode == "exhaustive" and t_b < 60
    announce(7, ok_a and ok_b,
             f"(a) support {wt.support_size}/500 in {t_a:.1f}s; "
             f"(b) {rep_b.words_checked} cuts, max dev {rep_b.max_rel:.3f}, support {wt_b.support_size}/{cuts.m} "
             f"in {t_b:.1f}s")


def test_criterion_8_weighted(announce):
    code = parallel_block_code([16, 16, 16])
    m = code.m
    w = np.concatenate([float(m) ** (3 * t) * (1 + np.arange(16) % 4) for t in range(3)])
    grouping = group_weights(w, m)
    classify_words(code, grouping)
    bounded_ok = True
    for t in grouping.groups:
        inst = group_instance(code, grouping, t)
        wg = w[grouping.members[t]] / (grouping.scale * float(m) ** (3 * t))
        wt, _ = sparsify_bounded_weights(inst, wg, 0.5, SparsifyParams(0.5, seed=t), weight_cap_m=m)
        bounded_ok &= verify_sparsifier(inst, wg, wt, 0.5).passed
    weighted = []
    for shortcuts in (None, False):
        wt, _ = sparsify_weighted(code, w, 0.5, WeightedParams(SparsifyParams(0.5, seed=8), shortcuts=shortcuts))
        weighted.append(verify_sparsifier(code, w, wt, 0.5).passed)
    total, bound = group_chain_additivity(code, w)
    ok = bounded_ok and all(weighted) and total <= bound
    announce(8, ok, f"bounded per group {bounded_ok}; weighted default/no-shortcuts {weighted}; "
                    f"sum of group CL {total} <= 2 CL = {bound}")


def test_criterion_9_dimension_free(announce):
    supports, passed = [], True
    for e in (12, 14, 16):
        code = parallel_block_code([2 ** (e - 1)] * 2)
        w = np.ones(code.m)
        wt, _ = sparsify_dimension_free(code, w, 0.5, SparsifyParams(0.5, seed=0), cl_bound=2)
        passed &= verify_sparsifier(code, w, wt, 0.5).passed
        supports.append(wt.support_size)
    spread = max(supports) / min(supports)
    announce(9, passed and spread <= 2, f"supports {supports} at m=2^12,2^14,2^16; ratio {spread:.2f} (limit 2)")


def test_criterion_10_application_identities(announce):
    bad_cut = 0
    for s in range(50):
        n = 2 + s % 7
        g = random_connected_graph(n, 0.5, 100 * s)
        bad_cut += ChainSolver(cut_code(g)).chain_length() > n - 1
    rng = np.random.default_rng(10)
    bad_lin = 0
    for s in range(50):
        q = (2, 3, 5)[s % 3]
        k = int(rng.integers(1, 6))
        spec = random_linear_spec(k, int(rng.integers(k, 9)), q, rng)
        bad_lin += ChainSolver(linear_support_code(spec)).chain_length() != rank_mod_q(spec.rows, q)
    announce(10, bad_cut + bad_lin == 0, f"50 graphs: {bad_cut} cut violations; 50 linear specs: {bad_lin} rank mismatches")
