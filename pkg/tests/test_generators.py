import json
from pathlib import Path

import numpy as np
import pytest

from chainsparse.chain_metrics import chain_length
from chainsparse.core import Code, CodeInputError, code_to_json
from chainsparse.generators import (Graph, LinearCodeSpec, cut_code, k3, linear_support_code, parallel_block_code,
                                    random_code, random_connected_graph, random_graph, random_linear_spec,
                                    rank_mod_q, read_edge_list, write_edge_list)

DATA = Path(__file__).parent / "data"


def test_cut_code_examples():
    assert cut_code(k3()).as_strings() == ["000", "011", "101", "110"]
    assert cut_code(Graph(2, ((0, 1),))).as_strings() == ["0", "1"]
    assert cut_code(Graph(3, ((0, 1), (1, 2)))).as_strings() == ["00", "01", "10", "11"]


def test_graph_validation():
    with pytest.raises(CodeInputError):
        Graph(2, ((0, 2),))
    with pytest.raises(CodeInputError):
        Graph(2, ((0, 1), (1, 0)))
    with pytest.raises(CodeInputError):
        cut_code(Graph(30, ()))


def test_edge_list_round_trip():
    text = "3 3\n1 2\n1 3\n2 3\n"
    g = read_edge_list(text)
    assert g.edges == ((0, 1), (0, 2), (1, 2))
    assert write_edge_list(g) == text
    with pytest.raises(CodeInputError):
        read_edge_list("3 2\n1 2\n")


def test_linear_examples():
    cube = linear_support_code(LinearCodeSpec(2, ((1, 0, 0), (0, 1, 0), (0, 0, 1))))
    assert len(cube) == 8
    assert linear_support_code(LinearCodeSpec(2, ((1, 1, 1),))).as_strings() == ["000", "111"]
    two = linear_support_code(LinearCodeSpec(2, ((1, 1, 0), (0, 1, 1))))
    assert two.as_strings() == ["000", "011", "101", "110"]


def test_linear_over_f3():
    code = linear_support_code(LinearCodeSpec(3, ((1, 2, 0), (0, 1, 1))))
    assert chain_length(code) == 2
    with pytest.raises(CodeInputError):
        LinearCodeSpec(4, ((1,),))
    assert rank_mod_q([[1, 2], [2, 4]], 3) == 1
    assert rank_mod_q([[1, 2], [2, 4]], 5) == 1
    assert rank_mod_q([[1, 1], [1, 2]], 5) == 2


def test_block_examples():
    assert len(parallel_block_code([250, 250])) == 3
    assert parallel_block_code([1]).as_strings() == ["1"]
    c = parallel_block_code([2, 3])
    assert c.as_strings() == ["00111", "11000", "11111"]
    assert chain_length(c) == 2


def test_random_code_edges():
    assert random_code(5, 4, 0.0, 1).as_strings() == ["00000"]
    assert random_code(5, 4, 1.0, 1).as_strings() == ["11111"]


def test_random_fixture_pinned():
    pinned = json.loads((DATA / "random_code_m8_seed42.json").read_text())
    assert code_to_json(random_code(8, 10, 0.5, 42)) == pinned


def test_random_graphs_reproducible():
    assert random_graph(6, 0.5, 3) == random_graph(6, 0.5, 3)
    assert random_connected_graph(8, 0.3, 0).is_connected()


def test_cut_and_linear_chain_lengths():
    for seed in range(15):
        g = random_connected_graph(6, 0.5, seed * 7)
        assert chain_length(cut_code(g)) <= g.n - 1
    rng = np.random.default_rng(0)
    for _ in range(15):
        spec = random_linear_spec(int(rng.integers(1, 4)), int(rng.integers(3, 7)), 3, rng)
        assert chain_length(linear_support_code(spec)) == rank_mod_q(spec.rows, spec.q)
