"""Serialization of ground theories to SMT-LIB 2 text.

Reduced theories declare one Bool constant per ground atom (``p!a!b``) and
one value constant per ground application of an uninterpreted function
(``queen!1``); enumerated types become finite sorts via declare-datatypes.
Unfolded theories keep every symbol applied, so predicates and functions
are declared with declare-fun instead.  Output is byte-deterministic.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

from .grounder import GroundTheory, VERDICT_OPEN, VERDICT_SAT
from .logic import (
    FALSE,
    TRUE,
    And,
    Arith,
    Atom,
    Compare,
    DomainConstant,
    EnumType,
    Formula,
    FunctionApp,
    IntConstant,
    Interval,
    Not,
    Or,
    Term,
    Vocabulary,
)

_SYMBOL_CHARS = frozenset(string.ascii_letters + string.digits + "~!@$%^&*_-+=<>.?/")

# term-namespace words that must never be produced as constant names
_RESERVED = frozenset(
    "true false not and or xor ite let distinct as is "
    "assert check-sat Int Bool".split()
)

_COMPARE_OPS = {"=": "=", "~=": "distinct", "<": "<", "=<": "<=", ">": ">", ">=": ">="}


def _int(n: int) -> str:
    """SMT-LIB numerals are unsigned; negatives are unary-minus terms."""
    return str(n) if n >= 0 else f"(- {-n})"


def _sanitize(name: str) -> str:
    out = "".join(c if c in _SYMBOL_CHARS else "_" for c in name)
    if not out:
        out = "_"
    if out[0].isdigit():
        out = "_" + out
    return out


class _NameRegistry:
    """Deterministic key -> simple-symbol mapping; collisions get numeric
    suffixes in first-use order."""

    def __init__(self):
        self._by_key: dict[object, str] = {}
        self._used: set[str] = set(_RESERVED)

    def assign(self, key: object, base: str) -> str:
        if key in self._by_key:
            return self._by_key[key]
        name = _sanitize(base)
        if name in self._used:
            k = 2
            while f"{name}!{k}" in self._used:
                k += 1
            name = f"{name}!{k}"
        self._used.add(name)
        self._by_key[key] = name
        return name

    def get(self, key: object) -> str:
        return self._by_key[key]


@dataclass(frozen=True, slots=True)
class SmtDocument:
    """An SMT-LIB 2 script in emission order."""

    logic: str
    sort_decls: tuple[str, ...]
    const_decls: tuple[str, ...]
    assertions: tuple[str, ...]
    footer: str = "(check-sat)"

    def text(self) -> str:
        lines = [f"(set-logic {self.logic})"]
        lines += self.sort_decls
        lines += self.const_decls
        lines += self.assertions
        lines.append(self.footer)
        return "\n".join(lines) + "\n"


class _Collector:
    """First pass: discover sorts, constants, and funs in emission order."""

    def __init__(self, gt: GroundTheory):
        self.gt = gt
        self.voc: Vocabulary = gt.structure.voc
        self.unfolded = gt.mode == "unfolded"
        self.sorts: dict[str, None] = {}
        # key -> (base name, sort spec); spec is "Bool", ("Int", lo, hi) or ("Sort", T)
        self.consts: dict[object, tuple[str, object]] = {}
        self.funs: dict[str, None] = {}
        self.bound_apps: dict[FunctionApp, None] = {}
        self.ints_used = False

    def run(self):
        for a in self.gt.assertions:
            self._formula(a)
        return self

    # -- sort handling ------------------------------------------------

    def _sort_of(self, type_name: str) -> object:
        decl = self.voc.type_decl(type_name)
        if isinstance(decl, EnumType):
            self.sorts.setdefault(type_name)
            return ("Sort", type_name)
        self.ints_used = True
        return ("Int", decl.lo, decl.hi)

    def _codomain_sort(self, fname: str) -> object:
        cod = self.voc.functions[fname].codomain
        if isinstance(cod, Interval):
            self.ints_used = True
            return ("Int", cod.lo, cod.hi)
        return self._sort_of(cod)

    # -- walk ----------------------------------------------------------

    def _formula(self, f: Formula) -> None:
        if f is TRUE or f is FALSE:
            return
        if isinstance(f, Atom):
            if self.unfolded:
                self.funs.setdefault(f.pred)
                for t in self.voc.predicates[f.pred]:
                    self._sort_of(t)
                for a in f.args:
                    self._term(a)
            else:
                key = ("atom", f.pred, f.args)
                if key not in self.consts:
                    base = _mangle(f.pred, f.args)
                    self.consts[key] = (base, "Bool")
        elif isinstance(f, Compare):
            self._term(f.left)
            self._term(f.right)
        elif isinstance(f, Not):
            self._formula(f.child)
        elif isinstance(f, (And, Or)):
            for c in f.children:
                self._formula(c)
        else:  # pragma: no cover - quantifiers cannot reach the emitter
            raise TypeError(f"non-ground formula in emission: {f!r}")

    def _term(self, t: Term) -> None:
        if isinstance(t, IntConstant):
            self.ints_used = True
        elif isinstance(t, DomainConstant):
            self._sort_of(t.type)
        elif isinstance(t, Arith):
            self.ints_used = True
            self._term(t.left)
            self._term(t.right)
        elif isinstance(t, FunctionApp):
            if self.unfolded:
                self.funs.setdefault(t.name)
                sig = self.voc.functions[t.name]
                for a in sig.args:
                    self._sort_of(a)
                cod = self._codomain_sort(t.name)
                for a in t.args:
                    self._term(a)
                if (
                    cod[0] == "Int"
                    and t.name not in self.gt.structure.functions
                    and t not in self.bound_apps
                ):
                    self.bound_apps.setdefault(t)
            else:
                key = ("app", t.name, t.args)
                if key not in self.consts:
                    base = _mangle(t.name, t.args)
                    self.consts[key] = (base, self._codomain_sort(t.name))
        else:  # pragma: no cover - variables cannot reach the emitter
            raise TypeError(f"non-ground term in emission: {t!r}")


def _mangle(symbol: str, args: tuple[Term, ...]) -> str:
    parts = [symbol]
    for a in args:
        if isinstance(a, DomainConstant):
            parts.append(a.name)
        elif isinstance(a, IntConstant):
            parts.append(str(a.value))
        else:  # pragma: no cover - guarded by the grounder
            raise TypeError(f"non-constant argument in ground name: {a!r}")
    return "!".join(parts)


class _Renderer:
    def __init__(self, col: _Collector, names: _NameRegistry, sorts: _NameRegistry):
        self.col = col
        self.names = names
        self.sorts = sorts
        self.unfolded = col.unfolded

    def formula(self, f: Formula) -> str:
        if f is TRUE:
            return "true"
        if f is FALSE:
            return "false"
        if isinstance(f, Atom):
            if not self.unfolded:
                return self.names.get(("atom", f.pred, f.args))
            if not f.args:
                return self.names.get(("fun", f.pred))
            args = " ".join(self.term(a) for a in f.args)
            return f"({self.names.get(('fun', f.pred))} {args})"
        if isinstance(f, Compare):
            return f"({_COMPARE_OPS[f.op]} {self.term(f.left)} {self.term(f.right)})"
        if isinstance(f, Not):
            return f"(not {self.formula(f.child)})"
        if isinstance(f, (And, Or)):
            word = "and" if isinstance(f, And) else "or"
            if not f.children:
                return "true" if isinstance(f, And) else "false"
            if len(f.children) == 1:
                return self.formula(f.children[0])
            return f"({word} {' '.join(self.formula(c) for c in f.children)})"
        raise TypeError(f"non-ground formula in emission: {f!r}")

    def term(self, t: Term) -> str:
        if isinstance(t, IntConstant):
            return _int(t.value)
        if isinstance(t, DomainConstant):
            return self.names.get(("ctor", t.type, t.name))
        if isinstance(t, Arith):
            return f"({t.op} {self.term(t.left)} {self.term(t.right)})"
        if isinstance(t, FunctionApp):
            if not self.unfolded:
                return self.names.get(("app", t.name, t.args))
            if not t.args:
                return self.names.get(("fun", t.name))
            args = " ".join(self.term(a) for a in t.args)
            return f"({self.names.get(('fun', t.name))} {args})"
        raise TypeError(f"non-ground term in emission: {t!r}")


def document(gt: GroundTheory) -> SmtDocument:
    """Lay out a ground theory as an SMT-LIB 2 script."""
    col = _Collector(gt).run()
    names = _NameRegistry()
    sorts = _NameRegistry()
    domains = gt.structure.domains

    sort_decls = []
    for type_name in col.sorts:
        sname = sorts.assign(("sort", type_name), type_name)
        ctors = " ".join(
            f"({names.assign(('ctor', type_name, e), f'{type_name}!{e}')})"
            for e in domains[type_name]
        )
        sort_decls.append(f"(declare-datatypes (({sname} 0)) (({ctors})))")

    const_decls = []
    bounds = []

    def sort_text(spec) -> str:
        if spec == "Bool":
            return "Bool"
        if spec[0] == "Int":
            return "Int"
        return sorts.get(("sort", spec[1]))

    if col.unfolded:
        for fname in col.funs:
            name = names.assign(("fun", fname), fname)
            if fname in col.voc.predicates:
                args = " ".join(
                    sort_text(col._sort_of(t)) for t in col.voc.predicates[fname]
                )
                const_decls.append(f"(declare-fun {name} ({args}) Bool)")
            else:
                sig = col.voc.functions[fname]
                args = " ".join(sort_text(col._sort_of(t)) for t in sig.args)
                cod = col._codomain_sort(fname)
                const_decls.append(f"(declare-fun {name} ({args}) {sort_text(cod)})")
    else:
        for key, (base, spec) in col.consts.items():
            name = names.assign(key, base)
            const_decls.append(f"(declare-const {name} {sort_text(spec)})")
            if spec != "Bool" and spec[0] == "Int":
                _, lo, hi = spec
                bounds.append(f"(assert (<= {_int(lo)} {name}))")
                bounds.append(f"(assert (<= {name} {_int(hi)}))")

    rend = _Renderer(col, names, sorts)

    if col.unfolded:
        for app in col.bound_apps:
            cod = col.voc.functions[app.name].codomain
            if isinstance(cod, Interval):
                lo, hi = cod.lo, cod.hi
            else:
                decl = col.voc.type_decl(cod)
                lo, hi = decl.lo, decl.hi
            text = rend.term(app)
            bounds.append(f"(assert (<= {_int(lo)} {text}))")
            bounds.append(f"(assert (<= {text} {_int(hi)}))")

    assertions = list(bounds)
    if gt.verdict == VERDICT_OPEN:
        assertions += [f"(assert {rend.formula(a)})" for a in gt.assertions]
    else:
        assertions.append(
            "(assert true)" if gt.verdict == VERDICT_SAT else "(assert false)"
        )

    logic = "QF_UFDTLIA" if col.ints_used else "QF_UFDT"
    return SmtDocument(logic, tuple(sort_decls), tuple(const_decls), tuple(assertions))


def emit(gt: GroundTheory) -> str:
    """Render a ground theory as deterministic SMT-LIB 2 text."""
    return document(gt).text()
