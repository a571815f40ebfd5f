"""Satisfying sets of interpreted formulas as packed bit tensors.

[f :: (v1..vk)] is the set of index tuples for which the structure makes f
true.  The evaluator computes it compositionally: conjunction intersects,
disjunction unites, negation complements, adding a variable replicates an
axis, and quantifiers collapse an axis by AND/OR.  Children are evaluated
over exactly their own free variables and aligned pairwise at each
connective; results are memoized per evaluator by formula identity, so
re-used guards are computed once.

Every symbol in a formula handed to this engine must be interpreted by
the structure; quantified model expansion over uninterpreted symbols is
the grounder's job, not this module's.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bittensor import DEFAULT_BIT_BUDGET, BitTensor, Shape, ValueTensor
from .errors import IndexOutOfRange, UninterpretedSymbol, UnknownVariable
from .logic import (
    And,
    Arith,
    Atom,
    Compare,
    DomainConstant,
    Exists,
    FalseFormula,
    ForAll,
    Formula,
    FunctionApp,
    IntConstant,
    Not,
    Or,
    Structure,
    Term,
    TrueFormula,
    Variable,
    free_variables,
)


@dataclass(frozen=True)
class SatSet:
    """A formula together with the packed tensor of its satisfying tuples."""

    formula: Formula
    tensor: BitTensor

    @property
    def vars(self) -> tuple[Variable, ...]:
        return self.tensor.shape.vars

    def tuples(self) -> set[tuple[int, ...]]:
        return set(self.tensor.iter_ones())


class SatSetEvaluator:
    """Evaluates satisfying sets against one fixed structure.

    Not thread-safe; create one per grounding task.  `tick`, when given,
    is called once per node evaluation (cooperative deadline checks).
    """

    def __init__(
        self,
        structure: Structure,
        budget: int = DEFAULT_BIT_BUDGET,
        tick: Callable[[], None] | None = None,
    ):
        self.s = structure
        self.budget = budget
        self.tick = tick
        self.memo: dict[Formula, BitTensor] = {}
        self.peak_bits = 0
        self._rel_keys: dict[str, np.ndarray] = {}
        self._fun_flat: dict[str, np.ndarray] = {}

    # -- shapes ---------------------------------------------------------------

    def extent(self, var: Variable) -> int:
        return self.s.domain_size(var.type)

    def shape_for(self, vars: tuple[Variable, ...]) -> Shape:
        return Shape(tuple((v, self.extent(v)) for v in vars))

    def _track(self, t: BitTensor) -> BitTensor:
        if t.shape.nbits > self.peak_bits:
            self.peak_bits = t.shape.nbits
        return t

    # -- public entry points ----------------------------------------------------

    def eval(self, f: Formula) -> BitTensor:
        """Tensor over free(f) in first-appearance order."""
        hit = self.memo.get(f)
        if hit is not None:
            return hit
        if self.tick is not None:
            self.tick()
        t = self._eval(f)
        self.memo[f] = t
        return t

    def eval_over(self, f: Formula, vars: tuple[Variable, ...]) -> BitTensor:
        """Tensor over the requested variable tuple (must cover free(f))."""
        free = free_variables(f)
        missing = [v for v in free if v not in vars]
        if missing:
            raise UnknownVariable(
                f"free variable {missing[0].name} not among the requested tuple"
            )
        return self._extend(self.eval(f), vars)

    # -- core recursion -----------------------------------------------------------

    def _eval(self, f: Formula) -> BitTensor:
        if isinstance(f, TrueFormula):
            return self._track(BitTensor.full(Shape(()), self.budget))
        if isinstance(f, FalseFormula):
            return self._track(BitTensor.empty(Shape(()), self.budget))
        if isinstance(f, Atom):
            return self._atom(f)
        if isinstance(f, Compare):
            return self._compare(f)
        if isinstance(f, Not):
            return self._track(self.eval(f.child).bit_not())
        if isinstance(f, (And, Or)):
            conj = isinstance(f, And)
            acc = self.eval(f.children[0])
            for c in f.children[1:]:
                a, b = self._align(acc, self.eval(c))
                acc = a.bit_and(b) if conj else a.bit_or(b)
                self._track(acc)
            return acc
        if isinstance(f, (ForAll, Exists)):
            conj = isinstance(f, ForAll)
            body = self.eval(f.body)
            if f.var not in body.shape.vars:
                if self.extent(f.var) == 0:
                    blank = BitTensor.full if conj else BitTensor.empty
                    return self._track(blank(body.shape, self.budget))
                return body
            out = body.reduce_all(f.var) if conj else body.reduce_any(f.var)
            return self._track(out)
        raise TypeError(f"satisfying sets need the desugared core, got {f!r}")

    # -- alignment ------------------------------------------------------------------

    def _extend(self, t: BitTensor, target: tuple[Variable, ...]) -> BitTensor:
        """Permute/grow t to exactly the target variable tuple."""
        have = t.shape.vars
        order = [have.index(v) for v in target if v in have]
        if len(order) != len(have):
            raise UnknownVariable("tensor has variables outside the target tuple")
        if order != sorted(order):
            t = self._track(t.permute_axes(tuple(order)))
        have = t.shape.vars
        pos = 0
        for v in target:
            if pos < len(have) and have[pos] == v:
                pos += 1
                continue
            t = self._track(t.insert_axis(pos, v, self.extent(v), self.budget))
            have = t.shape.vars
            pos += 1
        return t

    def _align(self, a: BitTensor, b: BitTensor) -> tuple[BitTensor, BitTensor]:
        """Bring two tensors onto the union tuple: a's variables first, then
        b's extras in their own order."""
        if a.shape == b.shape:
            return a, b
        target = a.shape.vars + tuple(v for v in b.shape.vars if v not in a.shape.vars)
        return self._extend(a, target), self._extend(b, target)

    # -- atoms and terms ---------------------------------------------------------------

    def _rel_key_array(self, pred: str, sizes: tuple[int, ...]) -> np.ndarray:
        keys = self._rel_keys.get(pred)
        if keys is None:
            rel = self.s.relations[pred]
            arr = np.empty(len(rel), dtype=np.int64)
            for i, tup in enumerate(sorted(rel)):
                k = 0
                for idx, size in zip(tup, sizes):
                    k = k * size + idx
                arr[i] = k
            keys = arr
            self._rel_keys[pred] = keys
        return keys

    def _fun_table(self, name: str) -> np.ndarray:
        flat = self._fun_flat.get(name)
        if flat is None:
            flat = self.s.functions[name].flat()
            self._fun_flat[name] = flat
        return flat

    def _arg_space(self, type_name: str, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Normalize term values into the index space of a declared argument
        type; returns (indices, in_range mask)."""
        from .logic import IntervalType

        decl = self.s.voc.type_decl(type_name)
        size = self.s.domain_size(type_name)
        if isinstance(decl, IntervalType):
            idx = values - decl.lo
        else:
            idx = values
        ok = (idx >= 0) & (idx < size)
        return idx, ok

    def _atom(self, f: Atom) -> BitTensor:
        if not self.s.interprets(f.pred):
            raise UninterpretedSymbol(f"predicate {f.pred} has no interpretation")
        arg_types = self.s.voc.predicates[f.pred]
        vars = free_variables(f)
        shape = self.shape_for(vars)
        sizes = tuple(self.s.domain_size(t) for t in arg_types)
        if not arg_types:
            rel = self.s.relations[f.pred]
            blank = BitTensor.full if () in rel else BitTensor.empty
            return self._track(blank(shape, self.budget))
        # fast path: distinct variables in shape order with matching types
        if (
            tuple(f.args) == vars
            and all(
                isinstance(a, Variable) and a.type == t for a, t in zip(f.args, arg_types)
            )
        ):
            return self._track(
                BitTensor.from_ones(shape, sorted(self.s.relations[f.pred]), self.budget)
            )
        key = None
        ok = np.ones(shape.nbits, dtype=bool)
        for arg, t, size in zip(f.args, arg_types, sizes):
            values = self._term(arg, shape).values
            idx, in_range = self._arg_space(t, values)
            ok &= in_range
            idx = np.where(in_range, idx, 0)
            key = idx if key is None else key * size + idx
        members = np.isin(key, self._rel_key_array(f.pred, sizes)) & ok
        return self._track(BitTensor.from_bools(shape, members, self.budget))

    def _compare(self, f: Compare) -> BitTensor:
        vars = free_variables(f)
        shape = self.shape_for(vars)
        left = self._term(f.left, shape)
        right = self._term(f.right, shape)
        return self._track(left.val_compare(f.op, right))

    def _term(self, t: Term, shape: Shape) -> ValueTensor:
        """Evaluate a term pointwise over the shape (indices for enum-typed
        terms, integers otherwise)."""
        if isinstance(t, Variable):
            from .logic import IntervalType

            decl = self.s.voc.type_decl(t.type)
            size = self.s.domain_size(t.type)
            base = (
                np.arange(decl.lo, decl.hi + 1, dtype=np.int64)
                if isinstance(decl, IntervalType)
                else np.arange(size, dtype=np.int64)
            )
            return ValueTensor.axis_values(shape, t, base)
        if isinstance(t, DomainConstant):
            return ValueTensor.constant(shape, t.index)
        if isinstance(t, IntConstant):
            return ValueTensor.constant(shape, t.value)
        if isinstance(t, FunctionApp):
            if not self.s.interprets(t.name):
                raise UninterpretedSymbol(f"function {t.name} has no interpretation")
            sig = self.s.voc.functions[t.name]
            key = None
            for arg, want in zip(t.args, sig.args):
                values = self._term(arg, shape).values
                idx, ok = self._arg_space(want, values)
                if not ok.all():
                    raise IndexOutOfRange(
                        f"argument of {t.name} outside the domain of {want}"
                    )
                size = self.s.domain_size(want)
                key = idx if key is None else key * size + idx
            if key is None:
                key = np.zeros(shape.nbits, dtype=np.int64)
            return ValueTensor(shape, key).gather(self._fun_table(t.name))
        if isinstance(t, Arith):
            return self._term(t.left, shape).val_map2(t.op, self._term(t.right, shape))
        raise TypeError(f"not a term: {t!r}")


def eval_sat_set(
    f: Formula,
    vars: tuple[Variable, ...],
    structure: Structure,
    budget: int = DEFAULT_BIT_BUDGET,
) -> SatSet:
    """[f :: vars] for a fully interpreted formula (vars must cover free(f))."""
    ev = SatSetEvaluator(structure, budget)
    return SatSet(f, ev.eval_over(f, vars))
