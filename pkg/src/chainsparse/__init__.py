"""Chain-length driven sparsification of binary codes (set systems)."""

__version__ = "0.1.0"

from .chain_metrics import (ChainWitness, NrdWitness, chain_length, chain_length_bounds, chain_length_exact,
                            nrd_exact, union_closure_chain_length)
from .contraction import contract, contract_step, survival_probability_experiment
from .core import ChainsparseError, Code, CodeInputError, InexactError, WeightVector, restrict
from .density import decompose, density, find_sparse_subcode
from .generators import Graph, LinearCodeSpec, cut_code, linear_support_code, parallel_block_code
from .sparsify import SparsifyParams, compose_accuracy, compute_eta, sparsify_unweighted, subsample_remaining
from .verify import concentration_monte_carlo, counting_bound_audit, verify_sparsifier
from .weighted import (WeightedParams, group_weights, sparsify_bounded_weights, sparsify_dimension_free,
                       sparsify_weighted)

__all__ = [
    "ChainWitness", "ChainsparseError", "Code", "CodeInputError", "Graph", "InexactError", "LinearCodeSpec",
    "NrdWitness", "SparsifyParams", "WeightVector", "WeightedParams", "chain_length", "chain_length_bounds",
    "chain_length_exact", "compose_accuracy", "compute_eta", "concentration_monte_carlo", "contract",
    "contract_step", "counting_bound_audit", "cut_code", "decompose", "density", "find_sparse_subcode",
    "group_weights", "linear_support_code", "nrd_exact", "parallel_block_code", "restrict",
    "sparsify_bounded_weights", "sparsify_dimension_free", "sparsify_unweighted", "sparsify_weighted",
    "subsample_remaining", "survival_probability_experiment", "union_closure_chain_length", "verify_sparsifier",
]
