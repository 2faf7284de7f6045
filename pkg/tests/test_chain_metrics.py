import itertools

import pytest
from hypothesis import given, settings

from chainsparse.chain_metrics import (ChainSolver, cardinality_bound_check, chain_length, chain_length_bounds,
                                       chain_length_exact, nrd_exact, union_closure_chain_length)
from chainsparse.core import Code, CodeInputError, InexactError, restrict

from strategies import codes


def brute_force_cl(code: Code) -> int:
    """Longest pair of injective maps checked directly from the definition."""
    words = [w for w in code.words if w]
    best = 0
    for length in range(1, min(code.m, len(words)) + 1):
        found = False
        for cs in itertools.permutations(words, length):
            for a in itertools.permutations(range(code.m), length):
                if all((cs[i] >> a[i]) & 1 for i in range(length)) and all(
                    not (cs[i] >> a[j]) & 1 for i in range(length) for j in range(i + 1, length)
                ):
                    found = True
                    break
            if found:
                break
        if not found:
            break
        best = length
    return best


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_identity(n):
    c = Code.identity(n)
    assert chain_length_exact(c)[0] == n
    assert chain_length_bounds(c) == (n, n)
    assert nrd_exact(c)[0] == n
    assert union_closure_chain_length(c) == n


def test_single_word():
    c = Code.from_strings(["111"])
    assert chain_length(c) == 1
    assert chain_length_bounds(c) == (1, 3)
    assert nrd_exact(c)[0] == 1
    assert union_closure_chain_length(c) == 1


def test_k3(k3_code):
    value, wit = chain_length_exact(k3_code)
    assert value == 2 == brute_force_cl(k3_code)
    assert wit.is_valid(k3_code) and wit.length == 2
    lo, hi = chain_length_bounds(k3_code)
    assert 1 <= lo <= 2 <= hi <= 3
    n, nw = nrd_exact(k3_code)
    assert n == 2 and nw.is_valid(k3_code)
    assert union_closure_chain_length(k3_code) == 2


def test_cardinality_bound_examples():
    assert cardinality_bound_check(Code.identity(3))
    cube = Code.from_ints(3, range(8))
    assert nrd_exact(cube)[0] == 3 and cardinality_bound_check(cube)
    assert cardinality_bound_check(Code.from_strings(["0110"]))


def test_budget_raises_with_lower_bound():
    c = Code.from_ints(8, range(0, 256, 3))
    with pytest.raises(InexactError) as info:
        chain_length_exact(c, budget=3)
    assert 1 <= info.value.lower <= chain_length(c)


def test_closure_limit():
    with pytest.raises(CodeInputError):
        union_closure_chain_length(Code.from_ints(5, range(25)))


def test_empty_and_zero_codes():
    assert chain_length(Code.from_strings([], m=3)) == 0
    assert chain_length(Code.from_strings(["000"])) == 0
    assert chain_length_exact(Code.from_strings(["000"]))[1].length == 0


@settings(max_examples=150, deadline=None)
@given(codes(5, 6))
def test_matches_definition(code):
    assert chain_length(code) == brute_force_cl(code)


@settings(max_examples=200, deadline=None)
@given(codes())
def test_exact_equals_closure_and_witnesses_valid(code):
    value, wit = chain_length_exact(code)
    assert value == union_closure_chain_length(code)
    assert wit.length == value and wit.is_valid(code)
    n, nw = nrd_exact(code)
    assert nw.size == n <= value and nw.is_valid(code)
    lo, hi = chain_length_bounds(code)
    assert lo <= value <= hi


@settings(max_examples=100, deadline=None)
@given(codes())
def test_monotone_under_subcodes_and_restriction(code):
    value = chain_length(code)
    solver = ChainSolver(code)
    for k in range(len(code)):
        assert solver.chain_length(solver.full & ~(1 << k)) <= value
    for i in range(code.m):
        assert chain_length(restrict(code, [j for j in range(code.m) if j != i])) <= value
