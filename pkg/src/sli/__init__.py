"""sli: a grounder for typed first-order logic over finite structures.

Satisfying sets of interpreted subformulas are computed on packed bit
tensors; model-expansion problems are reduced to propositional/SMT form.
"""

from . import bench, bittensor, cli, errors, grounder, logic, parser, satset, smt
from .bench import BenchSpec, RunRecord, SplitMix64, generate, run_bench
from .grounder import (
    GroundTheory,
    ground_problem,
    ground_sentence,
    guard_split,
    maximal_interpreted_subformulas,
)
from .parser import Problem, parse_problem, print_formula
from .satset import SatSetEvaluator, eval_sat_set
from .smt import SmtDocument, emit

__all__ = [
    "BenchSpec",
    "GroundTheory",
    "Problem",
    "RunRecord",
    "SatSetEvaluator",
    "SmtDocument",
    "SplitMix64",
    "bench",
    "bittensor",
    "cli",
    "emit",
    "errors",
    "eval_sat_set",
    "generate",
    "ground_problem",
    "ground_sentence",
    "grounder",
    "guard_split",
    "logic",
    "maximal_interpreted_subformulas",
    "parse_problem",
    "parser",
    "print_formula",
    "run_bench",
    "satset",
    "smt",
]
__version__ = "0.1.0"
