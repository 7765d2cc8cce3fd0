import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdconform.conditions import (
    conj, disj, entails, equivalent, is_satisfiable, is_tautology, negate, set_atom_cap, simplify,
    substitute_cond,
)
from sdconform.errors import AtomBudgetExceeded
from sdconform.frontend import parse_cond
from sdconform.model import FALSE, TRUE, AndC, Atom, NotC

from conftest import conditions

OK = Atom("OK", "=", "true")


def test_negate_is_syntactic():
    assert negate(TRUE) == NotC(TRUE)


def test_entails_examples():
    assert entails(OK, OK)
    assert not entails(TRUE, OK)
    assert entails(conj(OK, Atom("OK", "=", "false")), FALSE)


def test_tautologies():
    assert is_tautology(disj(OK, negate(OK)))
    assert not is_tautology(OK)
    assert is_tautology(disj(OK, Atom("OK", "!=", "true")))


def test_login2_guard_constructor():
    g = conj(Atom("pOK", "=", "true"), Atom("kOK", "=", "true"))
    assert g == parse_cond("pOK=true && kOK=true")


def test_substitute_then_simplify_login():
    g = conj(Atom("pOK", "=", "true"), Atom("kOK", "=", "true"))
    out = simplify(substitute_cond(g, {"pOK": "OK", "kOK": "true"}))
    assert out == OK


def test_simplify_units():
    assert simplify(conj(OK, TRUE)) == OK
    assert simplify(disj(OK, TRUE)) == TRUE
    assert simplify(conj(OK, FALSE)) == FALSE
    assert simplify(disj(FALSE, OK)) == OK
    assert simplify(negate(TRUE)) == FALSE
    assert simplify(negate(FALSE)) == TRUE


def test_other_differs_from_every_literal():
    assert simplify(Atom("other", "=", "null")) == FALSE
    assert simplify(Atom("other", "!=", "null")) == TRUE


def test_numeric_bounds():
    le3 = Atom("i", "<=", "3")
    assert entails(Atom("i", "<", "3"), le3)
    assert not entails(le3, Atom("i", "<", "3"))
    assert not is_satisfiable(conj(Atom("i", "<", "1"), Atom("i", "=", "1")))


def test_distinct_literals_are_distinct_values():
    assert entails(Atom("v", "=", "null"), Atom("v", "!=", "other"))
    assert not is_satisfiable(conj(Atom("v", "=", "1"), Atom("v", "=", "2")))


def test_name_name_atoms_are_free():
    a = Atom("i", "<=", "dim")
    assert not is_tautology(a)
    assert not is_tautology(negate(a))
    assert is_tautology(disj(a, negate(a)))


def test_atom_budget():
    big = TRUE
    for i in range(25):
        big = AndC(big, Atom(f"v{i}", "=", "true"))
    old = set_atom_cap(20)
    try:
        with pytest.raises(AtomBudgetExceeded):
            entails(big, FALSE)
    finally:
        set_atom_cap(old)


@settings(max_examples=300)
@given(conditions)
def test_entails_reflexive(c):
    assert entails(c, c)


@settings(max_examples=300)
@given(conditions, conditions, conditions)
def test_entails_transitive(a, b, c):
    if entails(a, b) and entails(b, c):
        assert entails(a, c)


@settings(max_examples=300)
@given(conditions)
def test_excluded_middle(c):
    assert is_tautology(disj(c, negate(c)))


@settings(max_examples=300)
@given(conditions, conditions)
def test_conjunction_entails_left(a, b):
    assert entails(conj(a, b), a)


@settings(max_examples=300)
@given(conditions, st.fixed_dictionaries({"x": st.sampled_from(["x", "y", "true", "1"])}))
def test_simplify_preserves_meaning(c, rho):
    s = substitute_cond(c, rho)
    assert equivalent(simplify(s), s)
