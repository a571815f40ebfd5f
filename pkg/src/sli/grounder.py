"""Reduction of model-expansion problems to ground theories.

Given a theory over vocabulary sigma and a structure interpreting only a
subset sigma0, each sentence is turned into a quantifier-free formula over
ground atoms of the remaining symbols.  Three strategies:

- vec: per quantifier block, lift the maximal interpreted subformulas whose
  variables are all bound by the block, enumerate the 2^m sign splits, and
  instantiate each split's residual only at the tuples of the split's
  satisfying set (computed on bit tensors).
- naive: one nested loop over the block's tuples; the interpreted part is
  decided per tuple by recursive evaluation, skipping tuples whose residual
  is vacuous and exiting early on a deciding tuple.
- noreduce: instantiate everything, fold nothing, and emit the interpreted
  symbols' tables as ground assertions alongside.

vec and naive emit the same instantiations (each tuple realizes exactly one
sign vector), differing only in conjunct order and in how the interpreted
part is evaluated.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Callable, Iterable

from .bittensor import DEFAULT_BIT_BUDGET
from .errors import GroundingTimeout, GuardCapExceeded, UnsupportedFormula
from .logic import (
    FALSE,
    TRUE,
    And,
    Arith,
    Atom,
    Compare,
    DomainConstant,
    Exists,
    ForAll,
    Formula,
    FunctionApp,
    IntConstant,
    Interval,
    Not,
    Or,
    Structure,
    Term,
    Variable,
    desugar,
    eval_formula,
    eval_term,
    free_variables,
    substitute,
    symbols_of,
    _compare,
)
from .parser import Problem
from .satset import SatSetEvaluator

DEFAULT_GUARD_CAP = 8

STRATEGIES = ("vec", "naive", "noreduce")

VERDICT_SAT = "sat-trivial"
VERDICT_UNSAT = "unsat-trivial"
VERDICT_OPEN = "open"


# ---------------------------------------------------------------------------
# Boolean simplification


def _simp_not(child: Formula) -> Formula:
    if child is TRUE:
        return FALSE
    if child is FALSE:
        return TRUE
    if isinstance(child, Not):
        return child.child
    return Not(child)


def _simp_and(children: Iterable[Formula]) -> Formula:
    out: list[Formula] = []
    for c in children:
        if c is FALSE:
            return FALSE
        if c is TRUE:
            continue
        out.append(c)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def _simp_or(children: Iterable[Formula]) -> Formula:
    out: list[Formula] = []
    for c in children:
        if c is TRUE:
            return TRUE
        if c is FALSE:
            continue
        out.append(c)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def _simp_quant(forall: bool, var: Variable, body: Formula, s: Structure) -> Formula:
    if s.domain_size(var.type) == 0:
        return TRUE if forall else FALSE
    if body is TRUE or body is FALSE:
        return body
    return (ForAll if forall else Exists)(var, body)


def boolean_simplify(f: Formula, s: Structure) -> Formula:
    """Bottom-up constant propagation; leaves atoms and comparisons alone."""
    if isinstance(f, Not):
        return _simp_not(boolean_simplify(f.child, s))
    if isinstance(f, And):
        return _simp_and(boolean_simplify(c, s) for c in f.children)
    if isinstance(f, Or):
        return _simp_or(boolean_simplify(c, s) for c in f.children)
    if isinstance(f, (ForAll, Exists)):
        return _simp_quant(
            isinstance(f, ForAll), f.var, boolean_simplify(f.body, s), s
        )
    return f


# ---------------------------------------------------------------------------
# Guard identification


def _strip_negations(f: Formula) -> tuple[bool, Formula]:
    """Peel leading negations; returns (flipped, core)."""
    flipped = False
    while isinstance(f, Not):
        flipped = not flipped
        f = f.child
    return flipped, f


def maximal_interpreted_subformulas(
    f: Formula, sigma0: frozenset[str] | set[str]
) -> list[Formula]:
    """Subformulas whose symbols all lie in sigma0 and whose parent (if any)
    mentions a symbol outside it.  Ordered by position, structurally
    deduplicated.  Comparison operators count as interpreted.

    Leading negations are peeled off before deduplication, so a condition
    and its desugared negation collapse onto the same core formula."""
    out: list[Formula] = []

    def walk(n: Formula) -> None:
        if n is TRUE or n is FALSE:
            return
        if symbols_of(n) <= sigma0:
            _, core = _strip_negations(n)
            if core not in out and core is not TRUE and core is not FALSE:
                out.append(core)
            return
        if isinstance(n, Not):
            walk(n.child)
        elif isinstance(n, (And, Or)):
            for c in n.children:
                walk(c)
        elif isinstance(n, (ForAll, Exists)):
            walk(n.body)

    walk(f)
    return out


@dataclass(frozen=True, slots=True)
class GuardSplit:
    """One branch of the 2^m sign analysis of a quantifier block."""

    guards: tuple[Formula, ...]
    sign_vector: tuple[bool, ...]
    guard_formula: Formula
    residual: Formula


def _block_of(f: Formula) -> tuple[bool, list[Variable], Formula]:
    """Leading run of same-kind quantifiers and the body under it."""
    forall = isinstance(f, ForAll)
    kind = ForAll if forall else Exists
    vars: list[Variable] = []
    while isinstance(f, kind):
        vars.append(f.var)
        f = f.body
    return forall, vars, f


def _liftable(n: Formula, sigma0, block: frozenset[Variable]) -> bool:
    if n is TRUE or n is FALSE:
        return False
    if not symbols_of(n) <= sigma0:
        return False
    return all(v in block for v in free_variables(n))


def _collect_guards(
    body: Formula, sigma0, block: frozenset[Variable]
) -> list[Formula]:
    """Negation-stripped, deduplicated guards of one block, in order of
    first appearance.  Subformulas whose variables are bound deeper stay in
    the residual and are lifted when the inner block is ground."""
    out: list[Formula] = []

    def walk(n: Formula) -> None:
        if _liftable(n, sigma0, block):
            _, core = _strip_negations(n)
            if core is not TRUE and core is not FALSE and core not in out:
                out.append(core)
            return
        if isinstance(n, Not):
            walk(n.child)
        elif isinstance(n, (And, Or)):
            for c in n.children:
                walk(c)
        elif isinstance(n, (ForAll, Exists)):
            walk(n.body)

    walk(body)
    return out


def _substitute_guards(
    body: Formula,
    guards: list[Formula],
    signs: tuple[bool, ...],
    sigma0,
    block: frozenset[Variable],
) -> Formula:
    """Replace every maximal liftable subformula by its sign's constant."""

    def walk(n: Formula) -> Formula:
        if _liftable(n, sigma0, block):
            flipped, core = _strip_negations(n)
            if core is TRUE or core is FALSE:
                value = core is TRUE
            else:
                value = signs[guards.index(core)]
            return TRUE if value != flipped else FALSE
        if isinstance(n, Not):
            return Not(walk(n.child))
        if isinstance(n, And):
            return And(tuple(walk(c) for c in n.children))
        if isinstance(n, Or):
            return Or(tuple(walk(c) for c in n.children))
        if isinstance(n, ForAll):
            return ForAll(n.var, walk(n.body))
        if isinstance(n, Exists):
            return Exists(n.var, walk(n.body))
        return n

    return walk(body)


def _guard_formula(guards: list[Formula], signs: tuple[bool, ...]) -> Formula:
    return _simp_and(g if sign else Not(g) for g, sign in zip(guards, signs))


def guard_split(
    f: Formula, structure: Structure, cap: int = DEFAULT_GUARD_CAP
) -> list[GuardSplit]:
    """All non-vacuous sign splits of the leading quantifier block of f."""
    if not isinstance(f, (ForAll, Exists)):
        raise UnsupportedFormula("guard_split expects a quantified formula")
    forall, vars, body = _block_of(f)
    sigma0 = structure.interpreted_symbols
    guards = _collect_guards(body, sigma0, frozenset(vars))
    if len(guards) > cap:
        raise GuardCapExceeded(
            f"{len(guards)} guards exceed the split cap of {cap}"
        )
    out: list[GuardSplit] = []
    for signs in itertools.product((True, False), repeat=len(guards)):
        residual = boolean_simplify(
            _substitute_guards(body, guards, signs, sigma0, frozenset(vars)),
            structure,
        )
        if (forall and residual is TRUE) or (not forall and residual is FALSE):
            continue
        out.append(
            GuardSplit(tuple(guards), signs, _guard_formula(guards, signs), residual)
        )
    return out


# ---------------------------------------------------------------------------
# Constant folding (vec / naive)


def _term_has_uninterpreted(t: Term, sigma0) -> bool:
    if isinstance(t, FunctionApp):
        if t.name not in sigma0:
            return True
        return any(_term_has_uninterpreted(a, sigma0) for a in t.args)
    if isinstance(t, Arith):
        return _term_has_uninterpreted(t.left, sigma0) or _term_has_uninterpreted(
            t.right, sigma0
        )
    return False


def _is_constant_term(t: Term) -> bool:
    return isinstance(t, (DomainConstant, IntConstant))


class _SentenceGrounder:
    """Grounds one closed formula against one structure."""

    def __init__(
        self,
        structure: Structure,
        strategy: str,
        cap: int = DEFAULT_GUARD_CAP,
        budget: int = DEFAULT_BIT_BUDGET,
        tick: Callable[[], None] | None = None,
    ):
        self.s = structure
        self.sigma0 = structure.interpreted_symbols
        self.strategy = strategy
        self.cap = cap
        self.tick = tick
        self.ev = (
            SatSetEvaluator(structure, budget=budget, tick=tick)
            if strategy == "vec"
            else None
        )
        self.guards = 0
        self.splits_kept = 0
        self.instantiations = 0
        self._at_top = True
        self._const_cache: dict[tuple[str, int], Term] = {}

    # -- shared helpers ---------------------------------------------------

    def _tick(self) -> None:
        if self.tick is not None:
            self.tick()

    def _const(self, type_name: str, index: int) -> Term:
        key = (type_name, index)
        hit = self._const_cache.get(key)
        if hit is None:
            hit = self.s.constant_for(type_name, self.s.index_to_value(type_name, index))
            self._const_cache[key] = hit
        return hit

    def _codomain_const(self, codomain, value: int) -> Term:
        if isinstance(codomain, Interval):
            return IntConstant(value)
        return self.s.constant_for(codomain, value)

    # -- folding ----------------------------------------------------------

    def _fold_term(self, t: Term) -> Term:
        if isinstance(t, FunctionApp):
            args = tuple(self._fold_term(a) for a in t.args)
            if t.name in self.sigma0:
                if all(_is_constant_term(a) for a in args):
                    value = eval_term(FunctionApp(t.name, args), self.s, {})
                    return self._codomain_const(
                        self.s.voc.functions[t.name].codomain, value
                    )
                if any(_term_has_uninterpreted(a, self.sigma0) for a in args):
                    raise UnsupportedFormula(
                        f"interpreted function {t.name} applied to an argument "
                        "containing an uninterpreted symbol"
                    )
                return FunctionApp(t.name, args)
            for a in args:
                if _term_has_uninterpreted(a, self.sigma0):
                    raise UnsupportedFormula(
                        f"uninterpreted function {t.name} applied to an argument "
                        "containing an uninterpreted symbol"
                    )
            return FunctionApp(t.name, args)
        if isinstance(t, Arith):
            left = self._fold_term(t.left)
            right = self._fold_term(t.right)
            if isinstance(left, IntConstant) and isinstance(right, IntConstant):
                a, b = left.value, right.value
                return IntConstant(
                    a + b if t.op == "+" else a - b if t.op == "-" else a * b
                )
            return Arith(t.op, left, right)
        return t

    def _expand_interpreted_atom(self, f: Atom) -> Formula:
        """An interpreted predicate over ground arguments that embed
        uninterpreted terms: unfold its relation into a disjunction."""
        sig = self.s.voc.predicates[f.pred]
        disjuncts: list[Formula] = []
        for tup in sorted(self.s.relations[f.pred]):
            conj: list[Formula] = []
            match = True
            for arg, want, idx in zip(f.args, sig, tup):
                if _is_constant_term(arg):
                    have = (
                        arg.index
                        if isinstance(arg, DomainConstant)
                        else self.s.value_to_index(want, arg.value)
                    )
                    if have != idx:
                        match = False
                        break
                else:
                    conj.append(Compare("=", arg, self._const(want, idx)))
            if match:
                disjuncts.append(_simp_and(conj))
        return _simp_or(disjuncts)

    def fold(self, f: Formula) -> Formula:
        """Evaluate ground interpreted leaves, fold interpreted terms, and
        propagate constants.  Quantified subformulas are never evaluated
        here; they are lifted as guards instead."""
        if f is TRUE or f is FALSE:
            return f
        if isinstance(f, Atom):
            args = tuple(self._fold_term(a) for a in f.args)
            g = Atom(f.pred, args)
            if f.pred not in self.sigma0:
                for a in args:
                    if _term_has_uninterpreted(a, self.sigma0):
                        raise UnsupportedFormula(
                            f"uninterpreted predicate {f.pred} applied to an "
                            "argument containing an uninterpreted symbol"
                        )
                return g
            if all(_is_constant_term(a) for a in args):
                return TRUE if eval_formula(g, self.s, {}) else FALSE
            if all(not _term_variables_present(a) for a in args):
                return self._expand_interpreted_atom(g)
            return g
        if isinstance(f, Compare):
            left = self._fold_term(f.left)
            right = self._fold_term(f.right)
            if _is_constant_term(left) and _is_constant_term(right):
                lv = left.index if isinstance(left, DomainConstant) else left.value
                rv = right.index if isinstance(right, DomainConstant) else right.value
                return TRUE if _compare(f.op, lv, rv) else FALSE
            return Compare(f.op, left, right)
        if isinstance(f, Not):
            return _simp_not(self.fold(f.child))
        if isinstance(f, And):
            return _simp_and(self.fold(c) for c in f.children)
        if isinstance(f, Or):
            return _simp_or(self.fold(c) for c in f.children)
        if isinstance(f, (ForAll, Exists)):
            return _simp_quant(
                isinstance(f, ForAll), f.var, self.fold(f.body), self.s
            )
        raise TypeError(f"not a formula: {f!r}")

    # -- grounding --------------------------------------------------------

    def ground(self, f: Formula) -> Formula:
        self._tick()
        f = self.fold(f)
        if f is TRUE or f is FALSE:
            return f
        if isinstance(f, (ForAll, Exists)):
            return self._ground_block(f)
        if isinstance(f, Not):
            return _simp_not(self.ground(f.child))
        if isinstance(f, And):
            out = []
            for c in f.children:
                g = self.ground(c)
                if g is FALSE:
                    return FALSE
                if g is not TRUE:
                    out.append(g)
            return _simp_and(out)
        if isinstance(f, Or):
            out = []
            for c in f.children:
                g = self.ground(c)
                if g is TRUE:
                    return TRUE
                if g is not FALSE:
                    out.append(g)
            return _simp_or(out)
        return f  # ground atom or comparison over uninterpreted symbols

    def _ground_block(self, f: Formula) -> Formula:
        forall, vars, body = _block_of(f)
        block = frozenset(vars)
        guards = _collect_guards(body, self.sigma0, block)
        at_top = self._at_top
        self._at_top = False
        if at_top:
            self.guards = len(guards)
        if self.strategy == "vec":
            if len(guards) > self.cap:
                raise GuardCapExceeded(
                    f"{len(guards)} guards exceed the split cap of {self.cap}"
                )
            return self._block_vec(forall, vars, body, guards, block, at_top)
        return self._block_naive(forall, vars, body, guards, block, at_top)

    def _instantiate(
        self, residual: Formula, vars: list[Variable], idx_tuple: tuple[int, ...]
    ) -> Formula:
        self.instantiations += 1
        mapping = {v: self._const(v.type, i) for v, i in zip(vars, idx_tuple)}
        return self.ground(substitute(residual, mapping))

    def _block_vec(
        self,
        forall: bool,
        vars: list[Variable],
        body: Formula,
        guards: list[Formula],
        block: frozenset[Variable],
        at_top: bool,
    ) -> Formula:
        out: list[Formula] = []
        var_tuple = tuple(vars)
        for signs in itertools.product((True, False), repeat=len(guards)):
            residual = boolean_simplify(
                _substitute_guards(body, guards, signs, self.sigma0, block), self.s
            )
            if (forall and residual is TRUE) or (not forall and residual is FALSE):
                continue
            if at_top:
                self.splits_kept += 1
            tensor = self.ev.eval_over(_guard_formula(guards, signs), var_tuple)
            if residual is FALSE:  # forall: a single match refutes the sentence
                if tensor.any():
                    return FALSE
                continue
            if residual is TRUE:  # exists: a single match settles it
                if tensor.any():
                    return TRUE
                continue
            for idx_tuple in tensor.iter_ones():
                self._tick()
                g = self._instantiate(residual, vars, idx_tuple)
                if forall:
                    if g is FALSE:
                        return FALSE
                    if g is not TRUE:
                        out.append(g)
                else:
                    if g is TRUE:
                        return TRUE
                    if g is not FALSE:
                        out.append(g)
        return _simp_and(out) if forall else _simp_or(out)

    def _block_naive(
        self,
        forall: bool,
        vars: list[Variable],
        body: Formula,
        guards: list[Formula],
        block: frozenset[Variable],
        at_top: bool,
    ) -> Formula:
        out: list[Formula] = []
        residuals: dict[tuple[bool, ...], Formula] = {}
        seen_kept: set[tuple[bool, ...]] = set()
        closed = [g for g in guards if not free_variables(g)]
        closed_signs = {
            id(g): bool(eval_formula(g, self.s, {})) for g in closed
        }
        sizes = [self.s.domain_size(v.type) for v in vars]
        for idx_tuple in itertools.product(*(range(n) for n in sizes)):
            self._tick()
            env = {
                v.name: self.s.index_to_value(v.type, i)
                for v, i in zip(vars, idx_tuple)
            }
            signs = tuple(
                closed_signs[id(g)]
                if id(g) in closed_signs
                else bool(eval_formula(g, self.s, env))
                for g in guards
            )
            residual = residuals.get(signs)
            if residual is None:
                residual = boolean_simplify(
                    _substitute_guards(body, guards, signs, self.sigma0, block),
                    self.s,
                )
                residuals[signs] = residual
            if residual is TRUE:
                if not forall:
                    return TRUE
                continue
            if residual is FALSE:
                if forall:
                    return FALSE
                continue
            if at_top and signs not in seen_kept:
                seen_kept.add(signs)
                self.splits_kept += 1
            g = self._instantiate(residual, vars, idx_tuple)
            if forall:
                if g is FALSE:
                    return FALSE
                if g is not TRUE:
                    out.append(g)
            else:
                if g is TRUE:
                    return TRUE
                if g is not FALSE:
                    out.append(g)
        return _simp_and(out) if forall else _simp_or(out)

    # -- the non-reducing strategy -----------------------------------------

    def ground_noreduce(self, f: Formula) -> Formula:
        self._tick()
        if f is TRUE or f is FALSE:
            return f
        if isinstance(f, (ForAll, Exists)):
            forall, vars, body = _block_of(f)
            sizes = [self.s.domain_size(v.type) for v in vars]
            out = []
            for idx_tuple in itertools.product(*(range(n) for n in sizes)):
                self._tick()
                self.instantiations += 1
                mapping = {v: self._const(v.type, i) for v, i in zip(vars, idx_tuple)}
                out.append(self.ground_noreduce(substitute(body, mapping)))
            if not out:
                # a block over an empty domain unfolds to its neutral constant
                return TRUE if forall else FALSE
            return And(tuple(out)) if forall else Or(tuple(out))
        if isinstance(f, Not):
            return Not(self.ground_noreduce(f.child))
        if isinstance(f, And):
            return And(tuple(self.ground_noreduce(c) for c in f.children))
        if isinstance(f, Or):
            return Or(tuple(self.ground_noreduce(c) for c in f.children))
        return f


def _term_variables_present(t: Term) -> bool:
    if isinstance(t, Variable):
        return True
    if isinstance(t, FunctionApp):
        return any(_term_variables_present(a) for a in t.args)
    if isinstance(t, Arith):
        return _term_variables_present(t.left) or _term_variables_present(t.right)
    return False


# ---------------------------------------------------------------------------
# Sentence and problem entry points


@dataclass(frozen=True, slots=True)
class SentenceGrounding:
    formula: Formula
    strategy: str  # strategy actually used (vec may fall back to naive)
    guards: int
    splits_kept: int
    tensor_bits: int
    instantiations: int


def ground_sentence(
    f: Formula,
    structure: Structure,
    strategy: str,
    *,
    cap: int = DEFAULT_GUARD_CAP,
    budget: int = DEFAULT_BIT_BUDGET,
    tick: Callable[[], None] | None = None,
) -> SentenceGrounding:
    """Ground one sentence.  vec falls back to naive past the guard cap."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy: {strategy}")
    f = desugar(f)
    if strategy == "noreduce":
        g = _SentenceGrounder(structure, strategy, cap, budget, tick)
        out = g.ground_noreduce(f)
        return SentenceGrounding(out, strategy, 0, 0, 0, g.instantiations)
    names = [strategy] if strategy == "naive" else ["vec", "naive(fallback)"]
    for name in names:
        g = _SentenceGrounder(structure, name.split("(")[0], cap, budget, tick)
        try:
            out = g.ground(f)
        except GuardCapExceeded:
            if name == "vec":
                continue
            raise
        return SentenceGrounding(
            out,
            name,
            g.guards,
            g.splits_kept,
            g.ev.peak_bits if g.ev is not None else 0,
            g.instantiations,
        )
    raise AssertionError("unreachable")


@dataclass(frozen=True, slots=True)
class SentenceStats:
    sentence_id: int
    strategy: str
    guards: int
    splits_kept: int
    tensor_bits: int
    instantiations: int
    micros: int


STATS_HEADER = "sentence-id,strategy,guards,splits-kept,tensor-bits,instantiations,micros"


@dataclass(frozen=True, slots=True)
class GroundingStats:
    rows: tuple[SentenceStats, ...]

    @property
    def peak_bits(self) -> int:
        return max((r.tensor_bits for r in self.rows), default=0)

    @property
    def total_instantiations(self) -> int:
        return sum(r.instantiations for r in self.rows)

    def to_csv(self) -> str:
        lines = [STATS_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.sentence_id},{r.strategy},{r.guards},{r.splits_kept},"
                f"{r.tensor_bits},{r.instantiations},{r.micros}"
            )
        return "\n".join(lines) + "\n"


class GroundTheory:
    """Quantifier-free assertions plus the input structure (the emitter
    needs domains and signatures).  mode is 'reduced' (assertions mention no
    interpreted symbol) or 'unfolded' (interpreted symbols appear and their
    tables are part of the assertions)."""

    def __init__(
        self,
        structure: Structure,
        assertions: tuple[Formula, ...],
        verdict: str,
        mode: str,
        stats: GroundingStats,
    ):
        if verdict != VERDICT_OPEN and assertions:
            raise ValueError("a decided theory carries no assertions")
        self.structure = structure
        self.assertions = assertions
        self.verdict = verdict
        self.mode = mode
        self.stats = stats

    def __repr__(self) -> str:
        return (
            f"GroundTheory(verdict={self.verdict!r}, "
            f"assertions={len(self.assertions)}, mode={self.mode!r})"
        )


def _structure_facts(structure: Structure, symbols: Iterable[str]) -> list[Formula]:
    """The interpreted symbols' tables as ground assertions."""
    s = structure
    voc = s.voc
    out: list[Formula] = []
    for name in symbols:
        if name in s.relations:
            sig = voc.predicates[name]
            rel = s.relations[name]
            sizes = [s.domain_size(t) for t in sig]
            for tup in itertools.product(*(range(n) for n in sizes)):
                atom = Atom(
                    name, tuple(s.constant_for(t, s.index_to_value(t, i)) for t, i in zip(sig, tup))
                )
                out.append(atom if tup in rel else Not(atom))
        elif name in s.functions:
            sig = voc.functions[name]
            table = s.functions[name]
            sizes = [s.domain_size(t) for t in sig.args]
            for tup in itertools.product(*(range(n) for n in sizes)):
                app = FunctionApp(
                    name,
                    tuple(
                        s.constant_for(t, s.index_to_value(t, i))
                        for t, i in zip(sig.args, tup)
                    ),
                )
                value = table.lookup(tup)
                if isinstance(sig.codomain, Interval):
                    const: Term = IntConstant(value)
                else:
                    const = s.constant_for(sig.codomain, value)
                out.append(Compare("=", app, const))
    return out


def _split_assertions(g: Formula) -> list[Formula]:
    """One assertion per top-level conjunct."""
    if isinstance(g, And):
        return list(g.children)
    return [g]


def make_tick(deadline: float | None) -> Callable[[], None] | None:
    if deadline is None:
        return None

    def tick() -> None:
        if time.monotonic() > deadline:
            raise GroundingTimeout("grounding exceeded its deadline")

    return tick


def ground_problem(
    problem: Problem,
    strategy: str,
    *,
    cap: int = DEFAULT_GUARD_CAP,
    budget: int = DEFAULT_BIT_BUDGET,
    timeout: float | None = None,
) -> GroundTheory:
    """Ground every sentence, short-circuiting on a refuted one."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy: {strategy}")
    deadline = None if timeout is None else time.monotonic() + timeout
    tick = make_tick(deadline)
    s = problem.structure
    rows: list[SentenceStats] = []
    assertions: list[Formula] = []
    refuted = False
    for i, sentence in enumerate(problem.sentences):
        t0 = time.perf_counter()
        sg = ground_sentence(
            sentence, s, strategy, cap=cap, budget=budget, tick=tick
        )
        micros = int((time.perf_counter() - t0) * 1e6)
        rows.append(
            SentenceStats(
                i,
                sg.strategy,
                sg.guards,
                sg.splits_kept,
                sg.tensor_bits,
                sg.instantiations,
                micros,
            )
        )
        if sg.formula is FALSE:
            refuted = True
            break
        if sg.formula is not TRUE:
            assertions.extend(_split_assertions(sg.formula))
    stats = GroundingStats(tuple(rows))
    mode = "unfolded" if strategy == "noreduce" else "reduced"
    if refuted:
        return GroundTheory(s, (), VERDICT_UNSAT, mode, stats)
    if strategy == "noreduce" and assertions:
        used = set()
        for sentence in problem.sentences:
            used |= symbols_of(sentence)
        fact_symbols = [
            n
            for n in itertools.chain(s.voc.predicates, s.voc.functions)
            if n in used and s.interprets(n)
        ]
        assertions = _structure_facts(s, fact_symbols) + assertions
    if not assertions:
        return GroundTheory(s, (), VERDICT_SAT, mode, stats)
    return GroundTheory(s, tuple(assertions), VERDICT_OPEN, mode, stats)
