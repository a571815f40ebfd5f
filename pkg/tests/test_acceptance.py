"""Acceptance suite: one test per numbered release criterion.

Each test prints a single ``[criterion N] PASS/FAIL`` line (run with
``pytest -s`` to see them).  Randomized sections use fixed seeds, so the
whole suite is reproducible; the performance checks assert direction
(which strategy is faster), never absolute times.
"""

import itertools
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from randgen import (
    candidate_structures,
    enumerate_satset,
    ground_theory_holds,
    random_formula,
    random_mx_problem,
    random_structure,
    theory_holds,
)
from test_bittensor import random_shape, random_tensor, v
from sli.bench import BenchSpec, generate, run_bench, run_one
from sli.errors import IndexOutOfRange, UnsupportedFormula
from sli.grounder import ground_problem, guard_split
from sli.logic import (
    And,
    Atom,
    EnumType,
    ForAll,
    FunctionTable,
    Not,
    Or,
    Structure,
    Variable,
    Vocabulary,
    eval_formula,
    free_variables,
)
from sli.parser import Problem, parse_problem, print_formula
from sli.satset import SatSetEvaluator, eval_sat_set
from sli.smt import emit

DATA = Path(__file__).parent / "data"


@contextmanager
def criterion(num, desc):
    """Print one PASS/FAIL line per criterion; failures re-raise."""
    info = {}
    try:
        yield info
    except BaseException:
        print(f"[criterion {num}] FAIL {desc}")
        raise
    note = info.get("note")
    print(f"[criterion {num}] PASS {desc}" + (f" ({note})" if note else ""))


def _outcome(fn):
    try:
        return fn()
    except IndexOutOfRange:
        return IndexOutOfRange


def test_criterion_1_evaluator_matches_enumeration():
    with criterion(1, "satisfying-set evaluator matches brute-force enumeration") as info:
        rng = np.random.default_rng(20260815)
        t0 = time.perf_counter()
        s = None
        scope = []
        for case in range(10_000):
            if case % 4 == 0:
                s = random_structure(rng, max_enum_types=2, max_size=6, n_funcs=(0, 2))
                scope = []
                if rng.random() < 0.5:
                    for t in s.voc.types:
                        if s.domain_size(t) > 0:
                            scope.append(Variable("u", t))
                            break
            names = ("y", "z") if scope else ("x", "y", "z")
            depth = int(rng.integers(1, 5))
            f = random_formula(rng, s, list(scope), depth, fresh_names=names)
            vars = tuple(free_variables(f))
            got = _outcome(lambda: eval_sat_set(f, vars, s).tuples())
            want = _outcome(lambda: enumerate_satset(f, vars, s))
            assert got == want, f"case {case}: {print_formula(f)}"
        elapsed = time.perf_counter() - t0
        assert elapsed < 60.0
        info["note"] = f"10000 pairs, {elapsed:.1f}s"


def test_criterion_2_worked_examples_bit_exact():
    with criterion(2, "worked examples reproduce bit-exactly"):
        # conjunction with negation over two binary predicates
        voc = Vocabulary()
        voc.types["T"] = EnumType("T")
        voc.predicates["P"] = ("T", "T")
        voc.predicates["Q"] = ("T", "T")
        s = Structure(
            voc,
            {"T": ("a", "b")},
            {"P": frozenset({(0, 0), (1, 0)}), "Q": frozenset({(0, 1), (0, 0)})},
            {},
        )
        x, y = Variable("x", "T"), Variable("y", "T")
        p_xy, q_xy = Atom("P", (x, y)), Atom("Q", (x, y))
        assert eval_sat_set(p_xy, (x, y), s).tuples() == {(0, 0), (1, 0)}
        assert eval_sat_set(Not(q_xy), (x, y), s).tuples() == {(1, 0), (1, 1)}
        got = eval_sat_set(And((p_xy, Not(q_xy))), (x, y), s).tuples()
        assert got == {(1, 0)}
        names = {tuple(s.domains["T"][i] for i in t) for t in got}
        assert names == {("b", "a")}

        # disjunction, widening, and transposition over a 3-element type
        voc = Vocabulary()
        voc.types["T"] = EnumType("T")
        voc.predicates["p"] = ("T",)
        voc.predicates["q"] = ("T",)
        s = Structure(
            voc,
            {"T": ("a", "b", "c")},
            {"p": frozenset({(1,)}), "q": frozenset({(1,), (2,)})},
            {},
        )
        ev = SatSetEvaluator(s)
        p_x, q_x = Atom("p", (x,)), Atom("q", (x,))
        assert ev.eval_over(p_x, (x,)).dump() == "x:3\n010"
        assert ev.eval_over(q_x, (x,)).dump() == "x:3\n011"
        assert ev.eval_over(Or((p_x, q_x)), (x,)).dump() == "x:3\n011"
        # widening replicates the vector along the new slow axis
        assert ev.eval_over(q_x, (y, x)).dump() == "y:3 x:3\n011\n011\n011"
        # swapping the axes transposes the display
        assert ev.eval_over(q_x, (x, y)).dump() == "x:3 y:3\n000\n111\n111"
        both = ev.eval_over(And((Atom("p", (y,)), q_x)), (x, y))
        assert both.dump() == "x:3 y:3\n000\n010\n010"
        assert set(both.iter_ones()) == {(1, 1), (2, 1)}

        # collapsing a universally quantified axis with a conjunction
        voc = Vocabulary()
        voc.types["T"] = EnumType("T")
        voc.predicates["r"] = ("T", "T")
        s = Structure(
            voc,
            {"T": ("a", "b", "c")},
            {"r": frozenset({(0, 0), (1, 0), (2, 0), (0, 1), (0, 2), (1, 2)})},
            {},
        )
        ev = SatSetEvaluator(s)
        r_xy = Atom("r", (x, y))
        assert ev.eval_over(r_xy, (y, x)).dump() == "y:3 x:3\n111\n100\n110"
        assert ev.eval_over(ForAll(y, r_xy), (x,)).dump() == "x:3\n100"

        # guard splitting keeps exactly the negative branch of a cover axiom
        prob = parse_problem(COVER)
        splits = guard_split(prob.sentences[0], prob.structure)
        assert len(splits) == 1
        (sp,) = splits
        assert sp.sign_vector == (False,)
        assert print_formula(sp.guard_formula) == "~P(x)"
        assert print_formula(sp.residual) == "Q(x)"
        gt = ground_problem(prob, "vec")
        assert [print_formula(a) for a in gt.assertions] == ["Q(b)", "Q(c)"]
        # the kept branch, reassembled as guard => residual, is equivalent
        # to the original sentence
        simplified = ForAll(x, Or((Not(sp.guard_formula), sp.residual)))
        for mask in range(8):
            rel = frozenset((i,) for i in range(3) if mask >> i & 1)
            full = Structure(
                prob.voc,
                prob.structure.domains,
                {**dict(prob.structure.relations), "Q": rel},
                {},
            )
            assert eval_formula(prob.sentences[0], full, {}) == eval_formula(
                simplified, full, {}
            )


COVER = """
vocabulary {
  type T := {a, b, c}.
  pred P(T).
  pred Q(T).
}
theory {
  !x in T: P(x) | Q(x).
}
structure {
  P := {a}.
}
"""


def test_criterion_3_grounding_preserves_model_expansion():
    with criterion(
        3, "grounding preserves model-expansion solutions under all strategies"
    ) as info:
        rng = np.random.default_rng(31337)
        done = 0
        attempts = 0
        while done < 1000 and attempts < 6000:
            attempts += 1
            s, sentences = random_mx_problem(rng)
            prob = Problem(s.voc, sentences, s)
            fulls = list(candidate_structures(s))
            try:
                truth = [theory_holds(sentences, full) for full in fulls]
            except IndexOutOfRange:
                continue
            try:
                gts = [ground_problem(prob, st) for st in ("vec", "naive", "noreduce")]
            except UnsupportedFormula:
                continue
            for gt in gts:
                got = [ground_theory_holds(gt, full) for full in fulls]
                assert got == truth, [print_formula(f) for f in sentences]
            done += 1
        assert done >= 1000
        info["note"] = f"{done} problems, zero mismatches"


def test_criterion_4_two_set_families_ground_to_trivial_verdicts():
    with criterion(
        4, "intersection/cover families ground to trivial verdicts with no assertions"
    ) as info:
        checked = 0
        table = (
            ("ci", "sat", "sat-trivial"),
            ("ci", "unsat", "unsat-trivial"),
            ("cs", "sat", "sat-trivial"),
            ("cs", "unsat", "unsat-trivial"),
        )
        for family, variant, expected in table:
            for size in (1, 2, 7, 40, 256, 1000):
                for ratio in (0.1, 0.5):
                    for seed in (0, 1):
                        prob = generate(BenchSpec(family, size, ratio, seed, variant))
                        for strat in ("vec", "naive"):
                            gt = ground_problem(prob, strat)
                            assert gt.verdict == expected, (family, variant, size)
                            assert gt.assertions == ()
                        nr = ground_problem(prob, "noreduce")
                        assert nr.verdict == "open"
                        assert len(nr.assertions) > 0
                        checked += 1
        info["note"] = f"{checked} instances"


def test_criterion_5_strategy_timing_trends():
    with criterion(
        5, "grounding-time trends: vec beats naive beats noreduce on full scans"
    ) as info:
        # full-scan instances: no early exit is possible for either verdict
        specs = [
            BenchSpec("ci", 500_000, 0.001, 11, "unsat"),
            BenchSpec("cs", 500_000, 0.001, 11, "sat"),
        ]
        records = run_bench(specs, ["vec", "naive", "noreduce"], emit=False)
        by_instance = {}
        for rec in records:
            by_instance.setdefault(rec.instance, {})[rec.strategy] = rec.ground_us
        notes = []
        for instance, t in by_instance.items():
            assert t["vec"] <= t["naive"] * 1.5, (instance, t)
            assert t["vec"] <= t["noreduce"], (instance, t)
            assert t["naive"] <= t["noreduce"], (instance, t)
            notes.append(
                f"{instance}: vec={t['vec']}us naive={t['naive']}us"
                f" noreduce={t['noreduce']}us"
            )

        # with a large satisfied overlap the per-tuple scan may exit early
        # and beat the vectorised pass; record the times without asserting
        spec = BenchSpec("ci", 500_000, 0.1, 11, "sat")
        prob = generate(spec)
        early_vec = run_one(spec, prob, "vec", emit=False).ground_us
        early_naive = run_one(spec, prob, "naive", emit=False).ground_us
        notes.append(
            f"early-exit record: vec={early_vec}us naive={early_naive}us"
        )

        # triangle detection scales with the cube of the node count
        best = {}
        for n in (300, 600):
            spec = BenchSpec("tg", n, seed=13)
            prob = generate(spec)
            best[n] = min(
                run_one(spec, prob, "vec", emit=False).ground_us for _ in range(3)
            )
        ratio = best[600] / best[300]
        assert ratio >= 6.0, best
        notes.append(f"tg vec600/vec300 = {ratio:.1f}x")
        info["note"] = "; ".join(notes)


def _padding_zero(t):
    bits = np.unpackbits(t.words.view(np.uint8), bitorder="little")
    return not bits[t.shape.nbits :].any()


def _same_bits(a, b):
    return a.shape == b.shape and np.array_equal(a.words, b.words)


def test_criterion_6_kernel_invariants():
    with criterion(6, "bit-tensor kernel invariants hold") as info:
        rng = np.random.default_rng(97)
        cases = 0

        def check(ok, what):
            nonlocal cases
            assert ok, what
            cases += 1

        for _ in range(1000):
            shape = random_shape(rng, max_axes=3, max_extent=6, allow_zero=True)
            a = random_tensor(rng, shape)
            b = random_tensor(rng, shape)
            check(_padding_zero(a), "pad fresh")
            check(_padding_zero(b), "pad fresh")
            conj = a.bit_and(b)
            disj = a.bit_or(b)
            neg = a.bit_not()
            check(_padding_zero(conj), "pad and")
            check(_padding_zero(disj), "pad or")
            check(_padding_zero(neg), "pad not")
            check(
                _same_bits(conj.bit_not(), neg.bit_or(b.bit_not())), "de morgan"
            )
            axes = len(shape.axes)
            if axes:
                var = shape.vars[int(rng.integers(0, axes))]
                alls = a.reduce_all(var)
                anys = a.reduce_any(var)
                check(_padding_zero(alls), "pad reduce_all")
                check(_padding_zero(anys), "pad reduce_any")
                check(
                    _same_bits(alls, a.bit_not().reduce_any(var).bit_not()),
                    "reduce duality",
                )
                perm = tuple(int(i) for i in rng.permutation(axes))
                inverse = tuple(int(i) for i in np.argsort(perm))
                swapped = a.permute_axes(perm)
                check(_padding_zero(swapped), "pad permute")
                check(
                    _same_bits(swapped.permute_axes(inverse), a), "permute round-trip"
                )
            pos = int(rng.integers(0, axes + 1))
            extent = int(rng.integers(0, 7))
            widened = a.insert_axis(pos, v("w"), extent)
            check(_padding_zero(widened), "pad insert_axis")
            check(
                widened.popcount() == extent * a.popcount(), "insert_axis popcount"
            )
        assert cases >= 10_000
        info["note"] = f"{cases} cases"


def test_criterion_7_emitter_goldens():
    with criterion(7, "emitter goldens are byte-exact and deterministic"):
        queens_src = (DATA / "queens3.sli").read_text()
        queens_golden = (DATA / "queens3.smt2").read_text()
        for strat in ("vec", "naive"):
            out = emit(ground_problem(parse_problem(queens_src), strat))
            assert out == queens_golden, strat
        # fresh parse and grounding must give identical bytes
        assert emit(ground_problem(parse_problem(queens_src), "vec")) == queens_golden

        map_src = (DATA / "mapcolour3.sli").read_text()
        map_golden = (DATA / "mapcolour3.smt2").read_text()
        for strat in ("vec", "naive"):
            out = emit(ground_problem(parse_problem(map_src), strat))
            assert out == map_golden, strat

        # the 3x3 placement problem has no model: check all 27 candidates
        prob = parse_problem(queens_src)
        models = 0
        for values in itertools.product(range(1, 4), repeat=3):
            table = FunctionTable((3,), {(i,): val for i, val in enumerate(values)})
            full = Structure(
                prob.voc, prob.structure.domains, {}, {"queen": table}
            )
            models += theory_holds(prob.sentences, full)
        assert models == 0
