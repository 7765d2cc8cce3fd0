"""Guard-condition algebra and a decision procedure for entailment.

Entailment is decided by enumerating value assignments.  Every name that is
compared against a literal ranges over the literals of the query (plus the
integer neighbours of numeric literals and one fresh value distinct from all
of them); atoms comparing two names are treated as independent booleans.
Distinct literals always denote distinct values.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .errors import AtomBudgetExceeded
from .model import (
    FALSE, TRUE, AndC, Atom, FalseC, NotC, OrC, TrueC, cond_atoms, is_name,
    literal_kind,
)

DEFAULT_ATOM_CAP = 20

_atom_cap = DEFAULT_ATOM_CAP


def set_atom_cap(cap):
    """Change the atom budget used by :func:`entails`; returns the old one."""
    global _atom_cap
    old, _atom_cap = _atom_cap, cap
    entails.cache_clear()
    return old


def negate(c):
    return NotC(c)


def conj(c1, c2):
    return AndC(c1, c2)


def disj(c1, c2):
    return OrC(c1, c2)


# --------------------------------------------------------------------------
# Values

_FRESH = ("fresh",)


def literal_value(text):
    kind = literal_kind(text)
    if kind == "number":
        return ("n", int(text))
    if kind == "boolean":
        return ("b", text == "true")
    return ("s", text)


def _compare(rel, a, b):
    if rel == "=":
        return a == b
    if rel == "!=":
        return a != b
    if a[0] != "n" or b[0] != "n":
        return False
    return a[1] <= b[1] if rel == "<=" else a[1] < b[1]


def _atom_key(a):
    """Orientation-independent key for symmetric variable-variable atoms."""
    if a.rel in ("=", "!=") and a.right < a.left:
        return Atom(a.right, a.rel, a.left)
    return a


def evaluate_cond(c, values, free):
    """Truth of ``c`` under ``values`` (name -> value) and ``free`` (atom -> bool)."""
    if isinstance(c, TrueC):
        return True
    if isinstance(c, FalseC):
        return False
    if isinstance(c, NotC):
        return not evaluate_cond(c.operand, values, free)
    if isinstance(c, AndC):
        return evaluate_cond(c.left, values, free) and evaluate_cond(c.right, values, free)
    if isinstance(c, OrC):
        return evaluate_cond(c.left, values, free) or evaluate_cond(c.right, values, free)
    left_name, right_name = is_name(c.left), is_name(c.right)
    if left_name and right_name:
        if c.left == c.right:
            return c.rel in ("=", "<=")
        return free[_atom_key(c)]
    a = values[c.left] if left_name else literal_value(c.left)
    b = values[c.right] if right_name else literal_value(c.right)
    return _compare(c.rel, a, b)


def _universe(conds):
    atoms = set()
    for c in conds:
        atoms |= cond_atoms(c)
    if len(atoms) > _atom_cap:
        raise AtomBudgetExceeded(f"{len(atoms)} atoms exceed the cap of {_atom_cap}")
    literals = set()
    valued = set()
    free = set()
    for a in atoms:
        ln, rn = is_name(a.left), is_name(a.right)
        if ln and rn:
            if a.left != a.right:
                free.add(_atom_key(a))
            continue
        for t in (a.left, a.right):
            if is_name(t):
                valued.add(t)
            else:
                literals.add(literal_value(t))
    domain = set(literals)
    for kind, v in list(literals):
        if kind == "n":
            domain.update({("n", v - 1), ("n", v + 1)})
    domain.add(_FRESH)
    return sorted(valued), sorted(domain, key=repr), sorted(free, key=repr)


def assignments(conds):
    """Yield every (values, free) pair relevant to the given conditions."""
    names, domain, free = _universe(conds)
    for combo in itertools.product(domain, repeat=len(names)):
        values = dict(zip(names, combo))
        for bits in itertools.product((False, True), repeat=len(free)):
            yield values, dict(zip(free, bits))


@lru_cache(maxsize=200_000)
def entails(c1, c2):
    """True iff ``c2`` holds in every assignment in which ``c1`` holds."""
    if c1 == c2 or isinstance(c2, TrueC) or isinstance(c1, FalseC):
        return True
    for values, free in assignments((c1, c2)):
        if evaluate_cond(c1, values, free) and not evaluate_cond(c2, values, free):
            return False
    return True


def is_tautology(c):
    return entails(TRUE, c)


def is_satisfiable(c):
    return not entails(c, FALSE)


def equivalent(c1, c2):
    return entails(c1, c2) and entails(c2, c1)


# --------------------------------------------------------------------------
# Substitution and simplification


def substitute_cond(c, rho):
    """Replace names per ``rho`` (a mapping); literals are never renamed."""
    if isinstance(c, Atom):
        return Atom(rho.get(c.left, c.left), c.rel, rho.get(c.right, c.right))
    if isinstance(c, NotC):
        return NotC(substitute_cond(c.operand, rho))
    if isinstance(c, AndC):
        return AndC(substitute_cond(c.left, rho), substitute_cond(c.right, rho))
    if isinstance(c, OrC):
        return OrC(substitute_cond(c.left, rho), substitute_cond(c.right, rho))
    return c


def _simplify_step(c):
    if isinstance(c, Atom):
        if not is_name(c.left) and not is_name(c.right):
            ok = _compare(c.rel, literal_value(c.left), literal_value(c.right))
            return TRUE if ok else FALSE
        return c
    if isinstance(c, NotC):
        inner = _simplify_step(c.operand)
        if isinstance(inner, TrueC):
            return FALSE
        if isinstance(inner, FalseC):
            return TRUE
        return NotC(inner)
    if isinstance(c, (AndC, OrC)):
        l, r = _simplify_step(c.left), _simplify_step(c.right)
        unit, zero = (TrueC, FalseC) if isinstance(c, AndC) else (FalseC, TrueC)
        if isinstance(l, zero) or isinstance(r, zero):
            return FALSE if isinstance(c, AndC) else TRUE
        if isinstance(l, unit):
            return r
        if isinstance(r, unit):
            return l
        return type(c)(l, r)
    return c


def simplify(c):
    """Evaluate ground atoms, then apply unit and zero laws to a fixpoint."""
    while True:
        s = _simplify_step(c)
        if s == c:
            return s
        c = s
