"""Tokens, traces and the operations the semantics is built from.

A trace is a plain tuple of tokens.  A token is an :class:`~sdconform.model.Event`,
a :class:`Cond` wrapping a guard condition, or a :class:`Crit` segment holding
a flat tuple of events and conditions.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb
from typing import NamedTuple

from .errors import NestedCritical, SizeBudgetExceeded
from .model import Event, cond_text, interned

EPSILON = ()
SEP = "·"


@interned
class Cond:
    cond: object


@interned
class Crit:
    tokens: tuple

    def __post_init__(self):
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(self.tokens))
        for t in self.tokens:
            if isinstance(t, Crit):
                raise NestedCritical("critical segments cannot be nested")


class TaggedToken(NamedTuple):
    token: object
    tag: str


def is_event(t):
    return isinstance(t, Event)


def is_cond(t):
    return isinstance(t, Cond)


@lru_cache(maxsize=100_000)
def token_text(t):
    if isinstance(t, Event):
        return t.text()
    if isinstance(t, Cond):
        return "[" + cond_text(t.cond) + "]"
    if isinstance(t, tuple):
        return f"{token_text(t[0])}@{t[1]}"
    return "<< " + trace_text(t.tokens) + " >>"


@lru_cache(maxsize=500_000)
def trace_text(trace):
    if not trace:
        return "ε"
    return SEP.join(token_text(t) for t in trace)


def trace_key(trace):
    return trace_text(trace)


# --------------------------------------------------------------------------


def interleave(mu, nu, cap=None):
    """All shuffles of two traces; critical segments move as one token."""
    mu, nu = tuple(mu), tuple(nu)
    if cap is not None and comb(len(mu) + len(nu), len(mu)) > cap:
        raise SizeBudgetExceeded(
            f"interleaving traces of length {len(mu)} and {len(nu)} exceeds {cap}")
    return set(_shuffles(mu, nu))


def _shuffles(mu, nu):
    if not mu:
        yield nu
        return
    if not nu:
        yield mu
        return
    for rest in _shuffles(mu[1:], nu):
        yield (mu[0],) + rest
    for rest in _shuffles(mu, nu[1:]):
        yield (nu[0],) + rest


def unwrap(sigma):
    """Normal form under segment unwrapping: every Crit token is flattened."""
    out = []
    for t in sigma:
        if isinstance(t, Crit):
            out.extend(t.tokens)
        else:
            out.append(t)
    return tuple(out)


def unwrap_steps(sigma):
    """Every trace reachable from ``sigma`` by unwrapping exactly one segment."""
    sigma = tuple(sigma)
    return [sigma[:i] + t.tokens + sigma[i + 1:]
            for i, t in enumerate(sigma) if isinstance(t, Crit)]


def wrap(sigma):
    sigma = tuple(sigma)
    if any(isinstance(t, Crit) for t in sigma):
        raise NestedCritical("wrap expects a trace without critical segments")
    return Crit(sigma)


@lru_cache(maxsize=100_000)
def lifelines(t):
    if isinstance(t, Event):
        return frozenset((t.lifeline,))
    if isinstance(t, Crit):
        out = set()
        for x in t.tokens:
            out |= lifelines(x)
        return frozenset(out)
    return frozenset()


def tag(sigma, label):
    return tuple(TaggedToken(t, label) for t in sigma)


def untag(tagged):
    return tuple(tt.token for tt in tagged)


def shares_lifelines(t1, t2):
    """The ``~`` relation on tagged tokens."""
    return bool(lifelines(t1.token) & lifelines(t2.token))


def events_in(trace):
    """Flattened event sequence of a trace, segments included."""
    return tuple(t for t in unwrap(trace) if isinstance(t, Event))
