"""Logic core: traversals, desugaring, type checking, model checking."""

import pytest

from sli.errors import (
    ArityMismatch,
    TypeCheckError,
    TypeMismatch,
    UninterpretedSymbol,
    UnknownSymbol,
)
from sli.logic import (
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
    Variable,
    Vocabulary,
    check_models,
    check_sentence,
    desugar,
    eval_formula,
    free_variables,
    substitute,
    symbols_of,
    type_check,
)


def two_pred_vocab():
    voc = Vocabulary()
    voc.types["T"] = EnumType("T")
    voc.predicates["p"] = ("T", "T")
    voc.predicates["q"] = ("T", "T")
    return voc


def two_pred_structure():
    # domain {a, b}; p = {(a,a),(b,a)}; q = {(a,b),(a,a)}
    voc = two_pred_vocab()
    return Structure(
        voc,
        domains={"T": ("a", "b")},
        relations={"p": {(0, 0), (1, 0)}, "q": {(0, 1), (0, 0)}},
    )


X = Variable("x", "T")
Y = Variable("y", "T")


def test_free_variables_ordered_by_first_appearance():
    f = And((Atom("p", (Y, X)), Atom("q", (X, Y))))
    assert free_variables(f) == (Y, X)
    assert free_variables(ForAll(Y, f)) == (X,)
    assert free_variables(ForAll(X, ForAll(Y, f))) == ()


def test_desugar_implication_and_equivalence():
    a = Atom("p", (X, X))
    b = Atom("q", (X, X))
    assert desugar(Implies(a, b)) == Or((Not(a), b))
    assert desugar(Equiv(a, b)) == And((Or((Not(a), b)), Or((Not(b), a))))
    nested = ForAll(X, Implies(a, Implies(b, a)))
    assert desugar(nested) == ForAll(X, Or((Not(a), Or((Not(b), a)))))


def test_substitute_respects_binding():
    c = DomainConstant("a", "T", 0)
    f = And((Atom("p", (X, Y)), Exists(Y, Atom("q", (X, Y)))))
    g = substitute(f, {Y: c})
    assert g == And((Atom("p", (X, c)), Exists(Y, Atom("q", (X, Y)))))


def test_symbols_of_collects_nested_functions():
    voc = Vocabulary()
    f = Compare("=", FunctionApp("f", (FunctionApp("g", (X,)),)), IntConstant(3))
    assert symbols_of(f) == {"f", "g"}
    assert symbols_of(Atom("p", (X, X))) == {"p"}


def test_type_check_accepts_well_typed_sentence():
    voc = two_pred_vocab()
    f = ForAll(X, ForAll(Y, Implies(Atom("p", (X, Y)), Atom("q", (Y, X)))))
    check_sentence(f, voc)


def test_type_check_errors():
    voc = two_pred_vocab()
    with pytest.raises(UnknownSymbol):
        type_check(Atom("r", (X,)), voc)
    with pytest.raises(ArityMismatch):
        type_check(Atom("p", (X,)), voc)
    with pytest.raises(TypeMismatch):
        type_check(Compare("=", X, IntConstant(1)), voc)
    with pytest.raises(TypeMismatch):
        # order comparison needs integers
        type_check(Compare("<", X, Y), voc)
    with pytest.raises(TypeMismatch):
        type_check(ForAll(X, Exists(X, Atom("p", (X, X)))), voc)
    with pytest.raises(TypeCheckError):
        check_sentence(Atom("p", (X, Y)), voc)


def test_interval_types_compare_as_integers():
    voc = Vocabulary()
    voc.types["N"] = IntervalType("N", 1, 8)
    voc.functions["queen"] = FuncSig(("N",), "N")
    n1 = Variable("x", "N")
    n2 = Variable("y", "N")
    f = ForAll(
        n1,
        ForAll(
            n2,
            Implies(
                Compare("~=", n1, n2),
                Compare("~=", FunctionApp("queen", (n1,)), FunctionApp("queen", (n2,))),
            ),
        ),
    )
    check_sentence(f, voc)
    type_check(Compare("=<", Arith("+", n1, IntConstant(1)), n2), voc)


def test_eval_matches_worked_example():
    s = two_pred_structure()
    f = And((Atom("p", (X, Y)), Not(Atom("q", (X, Y)))))
    hits = [
        (dx, dy)
        for dx in range(2)
        for dy in range(2)
        if eval_formula(f, s, {"x": dx, "y": dy})
    ]
    assert hits == [(1, 0)]  # exactly (b, a)
    assert check_models(s, Exists(X, Exists(Y, f)))
    assert not check_models(s, ForAll(X, ForAll(Y, f)))


def test_eval_connectives_and_constants():
    s = two_pred_structure()
    assert eval_formula(TRUE, s, {})
    assert not eval_formula(FALSE, s, {})
    a = DomainConstant("a", "T", 0)
    b = DomainConstant("b", "T", 1)
    assert check_models(s, Atom("p", (a, a)))
    assert not check_models(s, Atom("p", (a, b)))
    assert check_models(s, Or((Atom("p", (a, b)), Atom("q", (a, b)))))
    assert check_models(s, Equiv(Atom("p", (a, b)), FALSE))
    assert check_models(s, Compare("~=", a, b))


def test_eval_functions_and_arithmetic():
    voc = Vocabulary()
    voc.types["T"] = EnumType("T")
    voc.functions["f"] = FuncSig(("T",), Interval(0, 10))
    voc.functions["g"] = FuncSig(("T",), Interval(0, 10))
    s = Structure(
        voc,
        domains={"T": ("a", "b", "c")},
        functions={
            "f": FunctionTable((3,), {(0,): 2, (1,): 3, (2,): 5}),
            "g": FunctionTable((3,), {(0,): 3, (1,): 2, (2,): 1}),
        },
    )
    total = Compare("=", Arith("+", FunctionApp("f", (X,)), FunctionApp("g", (X,))), IntConstant(5))
    hits = [d for d in range(3) if eval_formula(total, s, {"x": d})]
    assert hits == [0, 1]
    assert check_models(s, Exists(X, total))
    assert not check_models(s, ForAll(X, total))


def test_uninterpreted_symbol_is_an_error_for_direct_eval():
    voc = two_pred_vocab()
    voc.predicates["r"] = ("T",)
    s = Structure(voc, domains={"T": ("a",)}, relations={"p": set(), "q": set()})
    with pytest.raises(UninterpretedSymbol):
        check_models(s, Atom("r", (DomainConstant("a", "T", 0),)))


def test_vacuous_quantification_over_empty_domain():
    voc = Vocabulary()
    voc.types["T"] = EnumType("T")
    voc.predicates["p"] = ("T",)
    s = Structure(voc, domains={"T": ()}, relations={"p": set()})
    assert check_models(s, ForAll(X, FALSE))
    assert not check_models(s, Exists(X, TRUE))


def test_function_table_totality_enforced():
    with pytest.raises(TypeCheckError):
        FunctionTable((3,), {(0,): 1})


def test_interval_structure_values():
    voc = Vocabulary()
    voc.types["N"] = IntervalType("N", 3, 5)
    s = Structure(voc)
    assert list(s.domain_values("N")) == [3, 4, 5]
    assert s.domain_size("N") == 3
    assert s.value_to_index("N", 4) == 1
    assert s.value_to_index("N", 9) is None
    assert s.index_to_value("N", 2) == 5
    assert s.element_name("N", 0) == "3"
    assert s.constant_for("N", 4) == IntConstant(4)
