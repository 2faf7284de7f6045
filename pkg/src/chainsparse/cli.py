"""Command line front end.

Every subcommand writes a JSON report (sorted keys, stable apart from the
``timestamp`` field) to ``--report`` or standard output; short human
summaries go to standard error.  Exit codes: 0 success, 1 failed
verification, 2 bad input, 3 exhausted budget or attempts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .chain_metrics import (ChainSolver, InexactError, nrd_exact, union_closure_chain_length)
from .contraction import UNTIL, contract, survival_probability_experiment
from .core import (ChainsparseError, Code, CodeInputError, WeightVector, code_to_json, load_code,
                   load_weights, weights_to_json)
from .density import CertificateError, decompose, density
from .generators import (cut_code, linear_spec_from_json, linear_support_code, parallel_block_code,
                         random_code, random_connected_graph, random_linear_spec, read_edge_list)
from .sparsify import SparsifyError, SparsifyParams, SubsampleError, sparsify_unweighted
from .verify import concentration_monte_carlo, counting_bound_audit, verify_sparsifier
from .weighted import (StagnationError, WeightedParams, sparsify_dimension_free, sparsify_weighted)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class VerdictFailure(Exception):
    """Raised after the report is written when a check failed."""


def _write_json(data, path: str | None) -> None:
    text = json.dumps(data, sort_keys=True, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _report(args, body: dict) -> None:
    body = {**body, "subcommand": args.command, "version": __version__,
            "threads": args.threads, "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
    if "seed" in vars(args):
        body["seed"] = args.seed
    _write_json(_plain(body), getattr(args, "report", None))


def _plain(x):
    """Turn numpy scalars, arrays and fractions into JSON types."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, Fraction):
        return str(x)
    return x


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


# subcommands

def cmd_gen(args) -> None:
    if args.kind == "cut":
        if args.edges:
            with open(args.edges) as fh:
                graph = read_edge_list(fh.read())
        elif args.n is not None:
            graph = random_connected_graph(args.n, args.p, args.seed)
        else:
            raise CodeInputError("gen cut needs --edges or --n")
        code = cut_code(graph)
        _say(f"cut code: n={graph.n}, m={graph.m}, {len(code)} words")
    elif args.kind == "linear":
        if args.spec:
            with open(args.spec) as fh:
                spec = linear_spec_from_json(json.load(fh))
        elif args.k is not None and args.m is not None:
            spec = random_linear_spec(args.k, args.m, args.q, args.seed)
        else:
            raise CodeInputError("gen linear needs --spec or --k and --m")
        code = linear_support_code(spec)
    elif args.kind == "blocks":
        if not args.sizes:
            raise CodeInputError("gen blocks needs --sizes")
        code = parallel_block_code(int(s) for s in args.sizes.split(","))
    else:
        if args.m is None or args.count is None:
            raise CodeInputError("gen random needs --m and --count")
        code = random_code(args.m, args.count, args.density, args.seed)
    _write_json(code_to_json(code), args.out)


def cmd_cl(args) -> None:
    code = load_code(args.input)
    solver = ChainSolver(code, args.budget)
    value = solver.chain_length()
    print(value)
    if args.report:
        _report(args, {"chain_length": value, "witness": solver.witness().to_json(code)})


def cmd_nrd(args) -> None:
    code = load_code(args.input)
    value, wit = nrd_exact(code, args.budget)
    print(value)
    if args.report:
        _report(args, {"nrd": value, "witness": wit.to_json(code)})


def cmd_cl_closure(args) -> None:
    code = load_code(args.input)
    value = union_closure_chain_length(code)
    print(value)
    if args.report:
        _report(args, {"chain_length": value, "method": "union-closure"})


def cmd_density(args) -> None:
    code = load_code(args.input)
    res = density(code, args.mode)
    _say(f"density {res.phi} ({float(res.phi):.4g}), exact={res.exact}")
    _report(args, {"phi": res.phi, "phi_float": float(res.phi), "exact": res.exact,
                   "support_size": res.support_size, "chain_length": res.chain_length,
                   "witness": res.witness.as_strings() if res.witness is not None else None})


def cmd_decompose(args) -> None:
    code = load_code(args.input)
    res = decompose(code, args.d, args.mode, args.cl_bound)
    _say(f"peeled {len(res.T)} coordinates in {len(res.rounds)} rounds")
    _report(args, {"d": args.d, **res.to_json(), "remaining": code_to_json(res.remaining_code)})
    if not res.check():
        raise VerdictFailure("decomposition certificates failed")


def cmd_contract(args) -> None:
    code = load_code(args.input)
    if args.target is not None:
        res = survival_probability_experiment(code, args.target, args.alpha, args.trials, args.seed,
                                              until=args.until, check_precondition=not args.no_precondition)
        _say(f"empirical {res.empirical:.4g} vs bound {res.bound:.4g}")
        _report(args, res.to_json())
        if not res.passed:
            raise VerdictFailure("survival probability below bound")
        return
    trace = contract(code, args.alpha, args.seed, until=args.until)
    _report(args, trace.to_json())


def _sparsify_params(args) -> SparsifyParams:
    return SparsifyParams(
        epsilon=args.eps, mode=args.mode, eta_constant=args.eta_constant,
        denom_constant=args.denom_constant, max_depth=args.max_depth,
        attempt_cap=args.attempt_cap, seed=args.seed, cl_bound=args.cl_bound,
    )


def _weighted_params(args) -> WeightedParams:
    return WeightedParams(_sparsify_params(args), args.q, args.shortcuts)


def cmd_sparsify(args) -> None:
    code = load_code(args.input)
    wt, rep = sparsify_unweighted(code, _sparsify_params(args))
    _say(f"support {wt.support_size} of {code.m}")
    if args.out:
        _write_json(weights_to_json(wt), args.out)
    _report(args, rep.to_json())


def _load_weights_for(code: Code, path: str | None) -> WeightVector:
    w = load_weights(path) if path else WeightVector.ones(code.m)
    if w.m != code.m:
        raise CodeInputError(f"weights have length {w.m}, code has m={code.m}")
    return w


def cmd_sparsify_weighted(args) -> None:
    code = load_code(args.input)
    w = _load_weights_for(code, args.weights)
    wt, rep = sparsify_weighted(code, w, args.eps, _weighted_params(args))
    _say(f"support {wt.support_size} of {code.m}")
    if args.out:
        _write_json(weights_to_json(wt), args.out)
    _report(args, {"q_constant": _weighted_params(args).q, **rep.to_json()})


def cmd_sparsify_dimfree(args) -> None:
    code = load_code(args.input)
    w = _load_weights_for(code, args.weights)
    params = _weighted_params(args)
    wt, rep = sparsify_dimension_free(code, w, args.eps, params, args.cl_bound)
    _say(f"support {wt.support_size} of {code.m} after {len(rep.passes)} passes")
    if args.out:
        _write_json(weights_to_json(wt), args.out)
    _report(args, {"q_constant": params.q, **rep.to_json()})


def cmd_verify(args) -> None:
    code = load_code(args.code)
    w = _load_weights_for(code, args.w)
    wt = load_weights(args.wt)
    res = verify_sparsifier(code, w, wt, args.eps, args.sample_size, args.seed)
    _say(f"{'PASS' if res.passed else 'FAIL'}: max deviation {res.max_rel:.4g} over {res.words_checked} words")
    _report(args, res.to_json())
    if not res.passed:
        raise VerdictFailure("sparsifier outside tolerance")


def cmd_audit_counting(args) -> None:
    code = load_code(args.input)
    cl = args.cl if args.cl is not None else ChainSolver(code).chain_length()
    phi = args.phi if args.phi is not None else density(code, "auto").phi
    alpha_max = args.alpha_max if args.alpha_max is not None else cl
    res = counting_bound_audit(code, cl, phi, alpha_max)
    _report(args, {"chain_length": cl, "phi": phi, **res.to_json()})
    if not res.passed:
        raise VerdictFailure("counting bound violated")


def cmd_mc_concentration(args) -> None:
    res = concentration_monte_carlo(args.ell, args.p, args.eps, args.trials, args.seed)
    _say(f"failure rate {res.rate:.4g} vs bound {res.bound:.4g}")
    _report(args, res.to_json())
    if not res.passed:
        raise VerdictFailure("failure rate above bound")


# parser

def _positive_threads(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("threads must be positive")
    return n


def _sparsify_flags(p: argparse.ArgumentParser, weighted: bool = False) -> None:
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--mode", choices=("theory", "practical"), default="practical")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cl-bound", type=int)
    p.add_argument("--eta-constant", type=float)
    p.add_argument("--denom-constant", type=float)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--attempt-cap", type=int, default=100)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.add_argument("--report")
    if weighted:
        p.add_argument("--weights")
        p.add_argument("--q", type=float)
        p.add_argument("--shortcuts", action=argparse.BooleanOptionalAction, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chainsparse", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=_positive_threads,
                        default=_positive_threads(os.environ.get("CHAINSPARSE_THREADS", "1")))
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a benchmark code")
    p.add_argument("kind", choices=("cut", "linear", "blocks", "random"))
    p.add_argument("--edges", help="edge list file (header 'n m', vertices 1..n)")
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--spec", help="generator matrix JSON {q, rows}")
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--sizes", help="comma-separated block sizes")
    p.add_argument("--count", type=int)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    for name, func, help_ in (("cl", cmd_cl, "exact chain length"),
                              ("nrd", cmd_nrd, "exact non-redundancy"),
                              ("cl-closure", cmd_cl_closure, "chain length via the union-closure")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--in", dest="input", required=True)
        p.add_argument("--report")
        if name != "cl-closure":
            p.add_argument("--budget", type=int, default=10_000_000)
        p.set_defaults(func=func)

    p = sub.add_parser("density", help="density of a code")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mode", choices=("exact", "heuristic", "auto"), default="auto")
    p.add_argument("--report")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("decompose", help="peel sparse subcodes")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--d", type=_fraction, required=True)
    p.add_argument("--mode", choices=("exact", "heuristic", "auto"), default="auto")
    p.add_argument("--cl-bound", type=int)
    p.add_argument("--report")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("contract", help="random contraction, or its survival experiment with --target")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--until", choices=UNTIL)
    p.add_argument("--target")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--no-precondition", action="store_true")
    p.add_argument("--report")
    p.set_defaults(func=cmd_contract)

    p = sub.add_parser("sparsify", help="unweighted sparsifier")
    _sparsify_flags(p)
    p.set_defaults(func=cmd_sparsify)
    p = sub.add_parser("sparsify-weighted", help="weighted sparsifier via weight groups")
    _sparsify_flags(p, weighted=True)
    p.set_defaults(func=cmd_sparsify_weighted)
    p = sub.add_parser("sparsify-dimfree", help="dimension-free repeated sparsification")
    _sparsify_flags(p, weighted=True)
    p.set_defaults(func=cmd_sparsify_dimfree)

    p = sub.add_parser("verify", help="check a sparsifier against every word")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--code", required=True)
    p.add_argument("--w", help="original weights (default all ones)")
    p.add_argument("--wt", required=True)
    p.add_argument("--sample-size", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("audit-counting", help="count light words against the counting bound")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--cl", type=int)
    p.add_argument("--phi", type=_fraction)
    p.add_argument("--alpha-max", type=int)
    p.add_argument("--report")
    p.set_defaults(func=cmd_audit_counting)

    p = sub.add_parser("mc-concentration", help="Monte Carlo check of the sampling tail bound")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.set_defaults(func=cmd_mc_concentration)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "until", "x") is None:
        args.until = "at_most" if args.target is not None else "below"
    try:
        args.func(args)
    except VerdictFailure as exc:
        _say(f"FAIL: {exc}")
        return EXIT_FAIL
    except (SparsifyError, CertificateError) as exc:
        _say(f"FAIL: {exc}")
        return EXIT_FAIL
    except (InexactError, SubsampleError, StagnationError) as exc:
        _say(f"budget exhausted: {exc}")
        return EXIT_BUDGET
    except (CodeInputError, OSError, json.JSONDecodeError) as exc:
        _say(f"input error: {exc}")
        return EXIT_INPUT
    except ChainsparseError as exc:
        _say(f"FAIL: {exc}")
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
