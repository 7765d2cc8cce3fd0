"""The trace simulation relation and its witnesses.

``simulates(t1, t2)`` holds when ``t1`` can be unwrapped (zero or more of its
critical segments flattened) into some ``beta`` that maps, token by token and
in order, onto ``t2`` such that every position of ``t2`` left out of the map
holds a condition.
"""

from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass
from functools import lru_cache

from .conditions import entails
from .model import Event
from .traces import Cond, Crit, trace_text, unwrap_steps

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))


@dataclass(frozen=True)
class SimWitness:
    """Which segments of t1 were flattened, and where each token of the result went."""

    unwrap_choices: frozenset
    eta: tuple

    def describe(self, t1, t2):
        beta = unwrap_at(t1, self.unwrap_choices)
        lines = []
        if self.unwrap_choices:
            lines.append("unwrap t1 at " + ", ".join(map(str, sorted(self.unwrap_choices))))
        for i, j in enumerate(self.eta):
            lines.append(f"  {i}:{trace_text((beta[i],))} -> {j}:{trace_text((t2[j],))}")
        return "\n".join(lines)


def unwrap_at(t, positions):
    """Flatten the critical segments of ``t`` found at ``positions``."""
    out = []
    for i, tok in enumerate(t):
        if i in positions and isinstance(tok, Crit):
            out.extend(tok.tokens)
        else:
            out.append(tok)
    return tuple(out)


def token_simulates(a, b):
    """Base cases: conditions by reverse entailment, events by equality, segments recursively."""
    if isinstance(a, Cond):
        return isinstance(b, Cond) and entails(b.cond, a.cond)
    if isinstance(a, Event):
        return a is b or a == b
    if isinstance(a, Crit):
        return isinstance(b, Crit) and _flat_simulates(a.tokens, b.tokens)
    return False


@lru_cache(maxsize=100_000)
def _flat_simulates(a, b):
    """Simulation between traces whose left side has no segments: an ordered embedding."""
    n, m = len(a), len(b)
    if n > m:
        return False
    # ok[i] after processing column j: a[i:] embeds into b[j:]
    ok = [False] * n + [True]
    for j in range(m - 1, -1, -1):
        skip = isinstance(b[j], Cond)
        new = [False] * n + [ok[n] and skip]
        for i in range(n - 1, -1, -1):
            new[i] = (token_simulates(a[i], b[j]) and ok[i + 1]) or (skip and ok[i])
        ok = new
    return ok[0] if m else n == 0


def simulates(t1, t2, witness=False):
    """Decide ``t1 ⋉ t2``; with ``witness=True`` return ``(verdict, SimWitness | None)``."""
    t1, t2 = tuple(t1), tuple(t2)
    if not witness and not any(isinstance(x, Crit) for x in t1):
        return _flat_simulates(t1, t2)
    ok, w = _search(t1, t2)
    return (ok, w) if witness else ok


def _search(t1, t2):
    n, m = len(t1), len(t2)
    memo = {}

    # state: position i in t1, offset k inside an unwrapped segment at i (or -1),
    # position j in t2.  Returns a list of moves or None.
    def go(i, k, j):
        key = (i, k, j)
        if key in memo:
            return memo[key]
        memo[key] = None
        r = _step(i, k, j)
        memo[key] = r
        return r

    def _step(i, k, j):
        if i == n:
            if all(isinstance(x, Cond) for x in t2[j:]):
                return ()
            return None
        tok = t1[i]
        if k >= 0 and k == len(tok.tokens):
            return go(i + 1, -1, j)
        if j == m:
            return None
        if k >= 0:
            cur = tok.tokens[k]
            if token_simulates(cur, t2[j]):
                rest = go(i, k + 1, j + 1)
                if rest is not None:
                    return (("match", i, j),) + rest
        else:
            if token_simulates(tok, t2[j]):
                rest = go(i + 1, -1, j + 1)
                if rest is not None:
                    return (("match", i, j),) + rest
            if isinstance(tok, Crit):
                rest = go(i, 0, j)
                if rest is not None:
                    return (("unwrap", i, j),) + rest
        if isinstance(t2[j], Cond):
            rest = go(i, k, j + 1)
            if rest is not None:
                return rest
        return None

    moves = go(0, -1, 0)
    if moves is None:
        return False, None
    unwrapped = frozenset(i for kind, i, _ in moves if kind == "unwrap")
    eta = tuple(j for kind, _, j in moves if kind == "match")
    return True, SimWitness(unwrapped, eta)


def check_witness(t1, t2, w):
    """Replay a witness against clauses (1) and (2) of the relation."""
    if any(not isinstance(t1[i], Crit) for i in w.unwrap_choices if i < len(t1)):
        return False
    if any(i >= len(t1) for i in w.unwrap_choices):
        return False
    beta = unwrap_at(t1, w.unwrap_choices)
    eta = list(w.eta)
    if len(eta) != len(beta):
        return False
    if any(b <= a for a, b in zip(eta, eta[1:])):
        return False
    if eta and (eta[0] < 0 or eta[-1] >= len(t2)):
        return False
    if not all(token_simulates(beta[i], t2[j]) for i, j in enumerate(eta)):
        return False
    image = set(eta)
    return all(isinstance(t2[j], Cond) for j in range(len(t2)) if j not in image)


def brute_force_simulates(t1, t2):
    """Exhaustive oracle: every unwrap subset and every strictly increasing map."""
    t1, t2 = tuple(t1), tuple(t2)
    crits = [i for i, tok in enumerate(t1) if isinstance(tok, Crit)]
    for r in range(len(crits) + 1):
        for chosen in itertools.combinations(crits, r):
            beta = unwrap_at(t1, set(chosen))
            for eta in itertools.combinations(range(len(t2)), len(beta)):
                if check_witness(t1, t2, SimWitness(frozenset(chosen), eta)):
                    return True
    return False


def unwrap_step_preserved(a1, a2, b2):
    """Given a1 ⋉ a2 and a2 unwrapping in one step to b2, find a one-step unwrap of a1 that still simulates b2."""
    return any(simulates(b1, b2) for b1 in unwrap_steps(a1))
