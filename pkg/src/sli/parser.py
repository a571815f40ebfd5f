"""Parser and printer for the .sli problem format.

A problem file has up to three blocks, in order:

    vocabulary {
      type T := {a, b, c}.          // enumerated type
      type N := Int[1..8].          // integer-interval type
      pred p(T, T).
      func f(T) -> Int[0..10].
    }
    theory {
      !x in T: p(x, x) | ?y in T: q(y).
    }
    structure {
      p := {(a, b), (b, c)}.        // predicate: set of tuples
      f := {a -> 3, b -> 0, c -> 7} // function: total map
    }

Formulas: ~ & | => <=> with precedence ~ > & > | > => > <=> and a
right-associative =>; quantifiers `!x in T:` (universal) and `?x in T:`
(existential) bind to the end of the sentence or enclosing parenthesis.
Comparisons: = ~= < =< > >=.  Comments run from // to end of line.
Implies/Equiv are desugared at parse time; parsed sentences are closed,
type-checked, and contain only the negation/and/or core.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import (
    DuplicateDefinition,
    ParseError,
    SourceSpan,
    TypeCheckError,
    UnknownElement,
)
from .logic import (
    FALSE,
    TRUE,
    And,
    Arith,
    Atom,
    Compare,
    DomainConstant,
    EnumType,
    Equiv,
    Exists,
    ForAll,
    Formula,
    FuncSig,
    FunctionApp,
    FunctionTable,
    Implies,
    IntConstant,
    Interval,
    IntervalType,
    Not,
    Or,
    Structure,
    Term,
    TrueFormula,
    FalseFormula,
    Variable,
    Vocabulary,
    check_sentence,
    desugar,
)

KEYWORDS = {
    "vocabulary",
    "theory",
    "structure",
    "type",
    "pred",
    "func",
    "in",
    "Int",
    "true",
    "false",
}

_OPS = (
    "<=>",
    ":=",
    "->",
    "=>",
    "~=",
    "=<",
    ">=",
    "..",
    "{",
    "}",
    "(",
    ")",
    "[",
    "]",
    ",",
    ".",
    ":",
    "!",
    "?",
    "~",
    "&",
    "|",
    "=",
    "<",
    ">",
    "+",
    "-",
    "*",
)

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)|(?P<comment>//[^\n]*)|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>" + "|".join(re.escape(o) for o in _OPS) + r")"
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'int', 'ident', 'keyword', 'op', 'eof'
    text: str
    line: int
    col: int

    def span(self, filename: str) -> SourceSpan:
        return SourceSpan(filename, self.line, self.col, self.col + max(1, len(self.text)))


def tokenize(text: str, filename: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {text[pos]!r}",
                SourceSpan(filename, line, col, col + 1),
            )
        lexeme = m.group(0)
        kind = m.lastgroup
        if kind == "ident" and lexeme in KEYWORDS:
            kind = "keyword"
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass
class Problem:
    """A parsed model-expansion problem: vocabulary, sentences, structure."""

    voc: Vocabulary
    sentences: tuple[Formula, ...]
    structure: Structure
    filename: str = "<string>"


@dataclass
class _Scope:
    vars: dict[str, Variable] = field(default_factory=dict)


class Parser:
    def __init__(self, text: str, filename: str = "<string>"):
        self.filename = filename
        self.tokens = tokenize(text, filename)
        self.pos = 0
        self.voc = Vocabulary()
        self.domains: dict[str, tuple[str, ...]] = {}
        self.elements: dict[str, tuple[str, int]] = {}  # name -> (type, index)
        self.names: set[str] = set()  # all declared names, for uniqueness

    # -- token plumbing ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.span(self.filename))

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            raise self.error(f"expected {text!r}, found {t.text!r}")
        return self.next()

    def accept(self, text: str) -> bool:
        if self.peek().text == text and self.peek().kind != "eof":
            self.next()
            return True
        return False

    def ident(self, what: str) -> Token:
        t = self.peek()
        if t.kind != "ident":
            raise self.error(f"expected {what}, found {t.text!r}")
        return self.next()

    def _declare(self, tok: Token) -> str:
        if tok.text in self.names:
            raise DuplicateDefinition(f"name {tok.text} already declared", tok.span(self.filename))
        self.names.add(tok.text)
        return tok.text

    # -- top level -----------------------------------------------------------

    def parse_problem(self) -> Problem:
        self.expect("vocabulary")
        self.expect("{")
        while not self.accept("}"):
            self.parse_vocab_decl()
        sentences: list[Formula] = []
        if self.accept("theory"):
            self.expect("{")
            while not self.accept("}"):
                f = self.parse_formula(_Scope())
                self.expect(".")
                try:
                    check_sentence(f, self.voc)
                except TypeCheckError as exc:
                    raise self.error(str(exc)) from exc
                sentences.append(desugar(f))
        relations: dict[str, frozenset] = {}
        functions: dict[str, FunctionTable] = {}
        if self.accept("structure"):
            self.expect("{")
            while not self.accept("}"):
                self.parse_interpretation(relations, functions)
        t = self.peek()
        if t.kind != "eof":
            raise self.error(f"unexpected {t.text!r} after structure block")
        structure = Structure(self.voc, self.domains, relations, functions)
        return Problem(self.voc, tuple(sentences), structure, self.filename)

    # -- vocabulary ----------------------------------------------------------

    def parse_vocab_decl(self) -> None:
        t = self.next()
        if t.text == "type":
            name_tok = self.ident("type name")
            name = self._declare(name_tok)
            self.expect(":=")
            if self.accept("{"):
                elems: list[str] = []
                if not self.accept("}"):
                    while True:
                        e = self.ident("element name")
                        self._declare(e)
                        self.elements[e.text] = (name, len(elems))
                        elems.append(e.text)
                        if not self.accept(","):
                            break
                    self.expect("}")
                self.voc.types[name] = EnumType(name)
                self.domains[name] = tuple(elems)
            else:
                lo, hi = self.parse_interval_literal()
                self.voc.types[name] = IntervalType(name, lo, hi)
        elif t.text == "pred":
            name = self._declare(self.ident("predicate name"))
            self.voc.predicates[name] = self.parse_param_list()
        elif t.text == "func":
            name = self._declare(self.ident("function name"))
            params = self.parse_param_list()
            self.expect("->")
            cod: str | Interval
            if self.peek().text == "Int":
                lo, hi = self.parse_interval_literal()
                cod = Interval(lo, hi)
            else:
                cod = self.type_ref()
            self.voc.functions[name] = FuncSig(params, cod)
        else:
            raise self.error("expected type, pred, or func declaration", t)
        self.expect(".")

    def parse_interval_literal(self) -> tuple[int, int]:
        self.expect("Int")
        self.expect("[")
        lo = self.parse_int_literal()
        self.expect("..")
        hi = self.parse_int_literal()
        self.expect("]")
        if hi < lo:
            raise self.error(f"empty interval Int[{lo}..{hi}]")
        return lo, hi

    def parse_int_literal(self) -> int:
        neg = self.accept("-")
        t = self.peek()
        if t.kind != "int":
            raise self.error(f"expected integer, found {t.text!r}")
        self.next()
        return -int(t.text) if neg else int(t.text)

    def type_ref(self) -> str:
        t = self.ident("type name")
        if t.text not in self.voc.types:
            raise self.error(f"unknown type {t.text}", t)
        return t.text

    def parse_param_list(self) -> tuple[str, ...]:
        self.expect("(")
        params: list[str] = []
        if not self.accept(")"):
            while True:
                params.append(self.type_ref())
                if not self.accept(","):
                    break
            self.expect(")")
        return tuple(params)

    # -- formulas --------------------------------------------------------------

    def parse_formula(self, scope: _Scope) -> Formula:
        f = self.parse_implication(scope)
        while self.accept("<=>"):
            f = Equiv(f, self.parse_implication(scope))
        return f

    def parse_implication(self, scope: _Scope) -> Formula:
        f = self.parse_disjunction(scope)
        if self.accept("=>"):
            return Implies(f, self.parse_implication(scope))
        return f

    def parse_disjunction(self, scope: _Scope) -> Formula:
        parts = [self.parse_conjunction(scope)]
        while self.accept("|"):
            parts.append(self.parse_conjunction(scope))
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def parse_conjunction(self, scope: _Scope) -> Formula:
        parts = [self.parse_unary(scope)]
        while self.accept("&"):
            parts.append(self.parse_unary(scope))
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def parse_unary(self, scope: _Scope) -> Formula:
        t = self.peek()
        if t.text == "~":
            self.next()
            return Not(self.parse_unary(scope))
        if t.text in ("!", "?"):
            return self.parse_quantified(scope)
        if t.text == "(":
            self.next()
            f = self.parse_formula(scope)
            self.expect(")")
            return f
        if t.text == "true" and t.kind == "keyword":
            self.next()
            return TRUE
        if t.text == "false" and t.kind == "keyword":
            self.next()
            return FALSE
        return self.parse_atomic(scope)

    def parse_quantified(self, scope: _Scope) -> Formula:
        kind = self.next().text  # '!' or '?'
        groups: list[Variable] = []
        while True:
            names = [self.ident("variable name")]
            while self.accept(","):
                names.append(self.ident("variable name"))
            self.expect("in")
            type_name = self.type_ref()
            for tok in names:
                if tok.text in scope.vars:
                    raise self.error(f"variable {tok.text} rebound in nested scope", tok)
                var = Variable(tok.text, type_name)
                scope.vars[tok.text] = var
                groups.append(var)
            if not self.accept(","):
                break
        self.expect(":")
        body = self.parse_formula(scope)
        for var in reversed(groups):
            del scope.vars[var.name]
            body = ForAll(var, body) if kind == "!" else Exists(var, body)
        return body

    def parse_atomic(self, scope: _Scope) -> Formula:
        t = self.peek()
        if t.kind == "ident" and t.text in self.voc.predicates:
            self.next()
            args: tuple[Term, ...] = ()
            if self.accept("("):
                parts: list[Term] = []
                if not self.accept(")"):
                    while True:
                        parts.append(self.parse_term(scope))
                        if not self.accept(","):
                            break
                    self.expect(")")
                args = tuple(parts)
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text in ("=", "~=", "<", "=<", ">", ">="):
                raise self.error(f"predicate {t.text} used as a term", nxt)
            return Atom(t.text, args)
        left = self.parse_term(scope)
        op = self.peek()
        if op.kind == "op" and op.text in ("=", "~=", "<", "=<", ">", ">="):
            self.next()
            right = self.parse_term(scope)
            return Compare(op.text, left, right)
        raise self.error("expected a comparison or predicate application", op)

    # -- terms -----------------------------------------------------------------

    def parse_term(self, scope: _Scope) -> Term:
        t = self.parse_mul(scope)
        while self.peek().text in ("+", "-") and self.peek().kind == "op":
            op = self.next().text
            t = Arith(op, t, self.parse_mul(scope))
        return t

    def parse_mul(self, scope: _Scope) -> Term:
        t = self.parse_prim(scope)
        while self.peek().text == "*" and self.peek().kind == "op":
            self.next()
            t = Arith("*", t, self.parse_prim(scope))
        return t

    def parse_prim(self, scope: _Scope) -> Term:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntConstant(int(t.text))
        if t.text == "-":
            self.next()
            tok = self.peek()
            if tok.kind != "int":
                raise self.error("expected integer after unary -")
            self.next()
            return IntConstant(-int(tok.text))
        if t.text == "(":
            self.next()
            inner = self.parse_term(scope)
            self.expect(")")
            return inner
        if t.kind == "ident":
            self.next()
            if t.text in scope.vars:
                return scope.vars[t.text]
            if t.text in self.elements:
                type_name, index = self.elements[t.text]
                return DomainConstant(t.text, type_name, index)
            if t.text in self.voc.functions:
                self.expect("(")
                args: list[Term] = []
                if not self.accept(")"):
                    while True:
                        args.append(self.parse_term(scope))
                        if not self.accept(","):
                            break
                    self.expect(")")
                return FunctionApp(t.text, tuple(args))
            if t.text in self.voc.predicates:
                raise self.error(f"predicate {t.text} used as a term", t)
            raise UnknownElement(
                f"unknown variable or element: {t.text}", t.span(self.filename)
            )
        raise self.error(f"expected a term, found {t.text!r}")

    # -- structure ---------------------------------------------------------------

    def parse_interpretation(self, relations: dict, functions: dict) -> None:
        name_tok = self.ident("symbol name")
        name = name_tok.text
        self.expect(":=")
        if name in self.voc.predicates:
            if name in relations:
                raise DuplicateDefinition(
                    f"{name} interpreted twice", name_tok.span(self.filename)
                )
            relations[name] = self.parse_relation(self.voc.predicates[name])
        elif name in self.voc.functions:
            if name in functions:
                raise DuplicateDefinition(
                    f"{name} interpreted twice", name_tok.span(self.filename)
                )
            functions[name] = self.parse_function(self.voc.functions[name])
        else:
            raise self.error(f"unknown predicate or function: {name}", name_tok)
        self.expect(".")

    def parse_value(self, type_name: str) -> int:
        """One element/integer, normalized to index space of type_name."""
        t = self.peek()
        if t.kind == "int" or t.text == "-":
            value = self.parse_int_literal()
            decl = self.voc.types[type_name]
            if not isinstance(decl, IntervalType):
                raise self.error(f"integer value for non-interval type {type_name}", t)
            if not decl.lo <= value <= decl.hi:
                raise self.error(
                    f"value {value} outside Int[{decl.lo}..{decl.hi}]", t
                )
            return value - decl.lo
        tok = self.ident("element name")
        info = self.elements.get(tok.text)
        if info is None:
            raise UnknownElement(f"unknown element: {tok.text}", tok.span(self.filename))
        etype, index = info
        if etype != type_name:
            raise self.error(
                f"element {tok.text} has type {etype}, expected {type_name}", tok
            )
        return index

    def parse_tuple(self, arg_types: tuple[str, ...]) -> tuple[int, ...]:
        if self.peek().text == "(":
            self.next()
            vals: list[int] = []
            if not self.accept(")"):
                i = 0
                while True:
                    if i >= len(arg_types):
                        raise self.error("tuple longer than declared arity")
                    vals.append(self.parse_value(arg_types[i]))
                    i += 1
                    if not self.accept(","):
                        break
                self.expect(")")
            if len(vals) != len(arg_types):
                raise self.error(
                    f"tuple of {len(vals)} values for arity {len(arg_types)}"
                )
            return tuple(vals)
        if len(arg_types) != 1:
            raise self.error("bare value only allowed for unary symbols")
        return (self.parse_value(arg_types[0]),)

    def parse_relation(self, arg_types: tuple[str, ...]) -> frozenset:
        t = self.peek()
        if t.kind == "keyword" and t.text in ("true", "false"):
            if arg_types:
                raise self.error("true/false shorthand only for 0-ary predicates", t)
            self.next()
            return frozenset({()} if t.text == "true" else set())
        self.expect("{")
        tuples: set[tuple[int, ...]] = set()
        if not self.accept("}"):
            while True:
                tup = self.parse_tuple(arg_types)
                if tup in tuples:
                    raise self.error(f"duplicate tuple in relation")
                tuples.add(tup)
                if not self.accept(","):
                    break
            self.expect("}")
        return frozenset(tuples)

    def _codomain_value(self, cod) -> int:
        """Parse a function value (index for enum codomain, value otherwise)."""
        if isinstance(cod, Interval):
            t = self.peek()
            value = self.parse_int_literal()
            if not cod.lo <= value <= cod.hi:
                raise self.error(f"value {value} outside Int[{cod.lo}..{cod.hi}]", t)
            return value
        decl = self.voc.types[cod]
        if isinstance(decl, IntervalType):
            t = self.peek()
            value = self.parse_int_literal()
            if not decl.lo <= value <= decl.hi:
                raise self.error(f"value {value} outside Int[{decl.lo}..{decl.hi}]", t)
            return value
        tok = self.ident("element name")
        info = self.elements.get(tok.text)
        if info is None:
            raise UnknownElement(f"unknown element: {tok.text}", tok.span(self.filename))
        etype, index = info
        if etype != cod:
            raise self.error(f"element {tok.text} has type {etype}, expected {cod}", tok)
        return index

    def parse_function(self, sig: FuncSig) -> FunctionTable:
        arg_sizes = tuple(self._type_size(t) for t in sig.args)
        if self.peek().text != "{":
            # 0-ary shorthand: f := value.
            if sig.args:
                raise self.error("bare value only allowed for 0-ary functions")
            value = self._codomain_value(sig.codomain)
            return FunctionTable((), {(): value})
        self.expect("{")
        entries: dict[tuple[int, ...], int] = {}
        if not self.accept("}"):
            while True:
                key = self.parse_tuple(sig.args)
                if key in entries:
                    raise self.error("duplicate entry in function table")
                self.expect("->")
                entries[key] = self._codomain_value(sig.codomain)
                if not self.accept(","):
                    break
            self.expect("}")
        try:
            return FunctionTable(arg_sizes, entries)
        except TypeCheckError as exc:
            raise self.error(str(exc)) from exc

    def _type_size(self, name: str) -> int:
        decl = self.voc.types[name]
        if isinstance(decl, IntervalType):
            return decl.hi - decl.lo + 1
        return len(self.domains[name])


def parse_problem(text: str, filename: str = "<string>") -> Problem:
    """Parse, resolve, type-check, and desugar a .sli problem."""
    return Parser(text, filename).parse_problem()


# ---------------------------------------------------------------------------
# Printing

_PREC = {
    Equiv: 2,
    Implies: 3,
    Or: 4,
    And: 5,
    Not: 6,
}


def _prec(f: Formula) -> int:
    if isinstance(f, (ForAll, Exists)):
        return 1
    return _PREC.get(type(f), 7)


def print_term(t: Term, parent: int = 0) -> str:
    if isinstance(t, Variable):
        return t.name
    if isinstance(t, DomainConstant):
        return t.name
    if isinstance(t, IntConstant):
        return str(t.value)
    if isinstance(t, FunctionApp):
        return f"{t.name}({', '.join(print_term(a) for a in t.args)})"
    if isinstance(t, Arith):
        mine = 2 if t.op == "*" else 1
        s = f"{print_term(t.left, mine)} {t.op} {print_term(t.right, mine + 1)}"
        return f"({s})" if mine < parent else s
    raise TypeError(f"not a term: {t!r}")


def print_formula(f: Formula, parent: int = 0) -> str:
    """Concrete syntax for f; parse_problem round-trips it (mod desugaring)."""
    mine = _prec(f)
    if isinstance(f, TrueFormula):
        s = "true"
    elif isinstance(f, FalseFormula):
        s = "false"
    elif isinstance(f, Atom):
        s = f"{f.pred}({', '.join(print_term(a) for a in f.args)})"
    elif isinstance(f, Compare):
        s = f"{print_term(f.left)} {f.op} {print_term(f.right)}"
    elif isinstance(f, Not):
        s = f"~{print_formula(f.child, 6)}"
    elif isinstance(f, And):
        s = " & ".join(print_formula(c, 6) for c in f.children)
    elif isinstance(f, Or):
        s = " | ".join(print_formula(c, 5) for c in f.children)
    elif isinstance(f, Implies):
        s = f"{print_formula(f.left, 4)} => {print_formula(f.right, 3)}"
    elif isinstance(f, Equiv):
        s = f"{print_formula(f.left, 3)} <=> {print_formula(f.right, 3)}"
    elif isinstance(f, (ForAll, Exists)):
        kind = "!" if isinstance(f, ForAll) else "?"
        names = [f.var.name]
        body = f.body
        while isinstance(body, type(f)) and body.var.type == f.var.type:
            names.append(body.var.name)
            body = body.body
        s = f"{kind}{', '.join(names)} in {f.var.type}: {print_formula(body, 1)}"
    else:
        raise TypeError(f"not a formula: {f!r}")
    return f"({s})" if mine < parent else s


def _print_value(s: Structure, type_name: str, index: int) -> str:
    return s.element_name(type_name, index)


def _print_codomain_value(s: Structure, cod, value: int) -> str:
    if isinstance(cod, Interval):
        return str(value)
    decl = s.voc.types[cod]
    if isinstance(decl, IntervalType):
        return str(value)
    return s.domains[cod][value]


def print_problem(p: Problem) -> str:
    """Deterministic .sli text for a problem (used for byte-level checks)."""
    out: list[str] = ["vocabulary {"]
    for name, decl in p.voc.types.items():
        if isinstance(decl, IntervalType):
            out.append(f"  type {name} := Int[{decl.lo}..{decl.hi}].")
        else:
            elems = ", ".join(p.structure.domains[name])
            out.append(f"  type {name} := {{{elems}}}.")
    for name, args in p.voc.predicates.items():
        out.append(f"  pred {name}({', '.join(args)}).")
    for name, sig in p.voc.functions.items():
        cod = (
            f"Int[{sig.codomain.lo}..{sig.codomain.hi}]"
            if isinstance(sig.codomain, Interval)
            else sig.codomain
        )
        out.append(f"  func {name}({', '.join(sig.args)}) -> {cod}.")
    out.append("}")
    out.append("theory {")
    for f in p.sentences:
        out.append(f"  {print_formula(f)}.")
    out.append("}")
    out.append("structure {")
    s = p.structure
    for name, rel in s.relations.items():
        args = p.voc.predicates[name]
        if not args:
            out.append(f"  {name} := {'true' if () in rel else 'false'}.")
            continue
        parts = []
        for tup in sorted(rel):
            vals = [_print_value(s, t, i) for t, i in zip(args, tup)]
            parts.append(vals[0] if len(tup) == 1 else f"({', '.join(vals)})")
        out.append(f"  {name} := {{{', '.join(parts)}}}.")
    for name, table in s.functions.items():
        sig = p.voc.functions[name]
        if not sig.args:
            val = _print_codomain_value(s, sig.codomain, table.lookup(()))
            out.append(f"  {name} := {val}.")
            continue
        parts = []
        for key in sorted(table.entries):
            vals = [_print_value(s, t, i) for t, i in zip(sig.args, key)]
            lhs = vals[0] if len(key) == 1 else f"({', '.join(vals)})"
            parts.append(f"{lhs} -> {_print_codomain_value(s, sig.codomain, table.entries[key])}")
        out.append(f"  {name} := {{{', '.join(parts)}}}.")
    out.append("}")
    return "\n".join(out) + "\n"
