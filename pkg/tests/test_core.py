import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainsparse.core import (Code, CodeInputError, WeightVector, code_from_json, code_to_json, restrict,
                              seeded_rng, support, weighted_value, weights_from_json, weights_to_json, within)

from strategies import codes


def test_words_are_deduplicated_and_sorted():
    c = Code.from_strings(["110", "001", "110", "000"])
    assert c.as_strings() == ["000", "001", "110"]
    assert len(c) == 3 and c.m == 3


def test_empty_code_and_zero_width():
    assert len(Code.from_strings([], m=4)) == 0
    assert Code(np.zeros((2, 0), dtype=bool)).as_strings() == [""]


def test_bad_inputs_rejected():
    with pytest.raises(CodeInputError):
        Code.from_strings(["10", "1"])
    with pytest.raises(CodeInputError):
        Code.from_strings(["12"])
    with pytest.raises(CodeInputError):
        WeightVector([1.0, -1.0])


def test_restrict_identity_merges():
    assert restrict(Code.identity(3), [0, 1]).as_strings() == ["00", "01", "10"]


def test_restrict_full_is_identity(k3_code):
    assert restrict(k3_code, range(3)) == k3_code


def test_restrict_k3_to_first_coordinate(k3_code):
    assert restrict(k3_code, [0]).as_strings() == ["0", "1"]


def test_restrict_out_of_range():
    with pytest.raises(CodeInputError):
        restrict(Code.identity(3), [3])


def test_restrict_keeps_labels_and_multiplicity():
    c = Code.from_strings(["101", "011"]).with_mult([2, 3, 4])
    r = restrict(c, [1, 2])
    assert r.coords.tolist() == [1, 2]
    assert r.mult.tolist() == [3, 4]
    assert sorted(r.weights().tolist()) == [4, 7]


def test_support_examples():
    assert support(Code.from_strings(["000"])) == frozenset()
    assert support(Code.identity(3)) == {0, 1, 2}
    assert support(Code.from_strings(["110", "010"])) == {0, 1}


def test_weighted_value_examples():
    assert weighted_value("111", [1, 1, 1]) == 3
    assert weighted_value("000", [4, 5, 6]) == 0
    assert weighted_value("101", [2, 5, 0.5]) == 2.5
    with pytest.raises(CodeInputError):
        weighted_value("10", [1, 1, 1])


def test_within_has_absolute_floor():
    assert within(1.0 + 5e-13, 1.0, 0.0)
    assert not within(1.1, 1.0, 0.05)
    assert within(0.0, 0.0, 0.0)


def test_json_round_trip():
    c = Code.from_strings(["0110", "1001"]).with_mult([1, 2, 1, 3])
    back = code_from_json(json.loads(json.dumps(code_to_json(c))))
    assert back == c and back.mult.tolist() == [1, 2, 1, 3]
    w = WeightVector([0.5, 0, 3])
    assert weights_from_json(weights_to_json(w)) == w


def test_seeded_streams_are_reproducible_and_distinct():
    a = seeded_rng(7, 1, 0).random(3)
    assert np.array_equal(a, seeded_rng(7, 1, 0).random(3))
    assert not np.array_equal(a, seeded_rng(7, 1, 1).random(3))


@given(codes())
def test_size_at_most_cube(code):
    assert len(code) <= 2 ** code.m


@settings(max_examples=60)
@given(codes(), st.data())
def test_restrict_composes(code, data):
    a = data.draw(st.sets(st.integers(0, code.m - 1)))
    b = data.draw(st.sets(st.integers(0, code.m - 1)))
    ra = restrict(code, sorted(a))
    # positions of a & b inside the restricted code
    pos = [i for i, c in enumerate(sorted(a)) if c in b]
    assert restrict(ra, pos) == restrict(code, sorted(a & b))
    assert restrict(ra, range(ra.m)) == ra
    assert {int(ra.coords[i]) for i in support(ra)} <= a
