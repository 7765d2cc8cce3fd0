"""Hiding, substitution, refinement, conformance and witness inference."""

from __future__ import annotations

import itertools
import os
import time
from dataclasses import dataclass, field, replace

from .conditions import simplify, substitute_cond
from .errors import InputError, InvalidHiddenSet, SearchBudgetExceeded
from .model import (
    Alt, Block, Critical, Ev, Event, FalseC, Loop, Opt, Par, Seq, Strict, Tau,
    TrueC, cond_atoms, cond_names, conditions_of, events_of, is_literal, is_name,
    walk,
)
from .semantics import DEFAULT_CONFIG, evaluate
from .simulation import simulates
from .traces import events_in, trace_text


# --------------------------------------------------------------------------
# Substitutions


class Substitution:
    """A finite renaming of names to names or literals; identity elsewhere."""

    __slots__ = ("_map",)

    def __init__(self, mapping=()):
        items = mapping.items() if hasattr(mapping, "items") else mapping
        m = {}
        for src, dst in items:
            if not isinstance(src, str) or not is_name(src):
                raise InputError(f"substitution source must be a name, not {src!r}")
            if not isinstance(dst, str) or not (is_name(dst) or is_literal(dst)):
                raise InputError(f"substitution target must be a name or literal, not {dst!r}")
            if src in m and m[src] != dst:
                raise InputError(f"{src} is mapped twice")
            if src != dst:
                m[src] = dst
        self._map = dict(sorted(m.items()))

    def __call__(self, name):
        return self._map.get(name, name)

    def get(self, name, default=None):
        return self._map.get(name, default)

    def items(self):
        return self._map.items()

    def __iter__(self):
        return iter(self._map)

    def __len__(self):
        return len(self._map)

    def __contains__(self, name):
        return name in self._map

    def __eq__(self, other):
        return isinstance(other, Substitution) and self._map == other._map

    def __hash__(self):
        return hash(tuple(self._map.items()))

    def __repr__(self):
        return f"Substitution({self._map!r})"

    def text(self):
        return "{" + ", ".join(f"{a} -> {b}" for a, b in self._map.items()) + "}"

    def as_dict(self):
        return dict(self._map)

    def event(self, e):
        """The image of an event, or None when a renamed name cannot stand there."""
        msg, s, r = self(e.message), self(e.sender), self(e.receiver)
        if not (is_name(msg) and is_name(s) and is_name(r)):
            return None
        return Event(e.kind, msg, s, r, tuple(self(p) for p in e.params))

    def compose(self, inner):
        """``self ∘ inner``: apply ``inner`` first."""
        out = {k: self(v) if is_name(v) else v for k, v in inner.items()}
        for k, v in self.items():
            out.setdefault(k, v)
        return Substitution({k: v for k, v in out.items() if k != v})


IDENTITY = Substitution()


# --------------------------------------------------------------------------
# hide and substitute


def hide(d, hidden):
    """Replace every occurrence of a hidden event with tau."""
    hidden = frozenset(hidden)
    if not hidden:
        return d
    return _map_sd(d, lambda ev: Tau(span=ev.span) if ev.event in hidden else ev, None)


def substitute(d, rho, prune=True):
    """Rename names throughout ``d`` and simplify its guards.

    With ``prune`` set, fragments whose guard simplified to a constant are
    resolved: opt(true, D) is D, opt(false, D) and loop(false, D) are tau, and
    alt picks its branch.
    """
    if not isinstance(rho, Substitution):
        rho = Substitution(rho)
    if not len(rho):
        return d

    def on_event(ev):
        img = rho.event(ev.event)
        if img is None:
            raise InputError(f"substitution maps a name of {ev.event.text()} to a literal")
        return Ev(img, span=ev.span)

    def on_cond(c):
        return simplify(substitute_cond(c, rho.as_dict()))

    return _map_sd(d, on_event, on_cond, prune)


def _map_sd(d, on_event, on_cond, prune=False):
    def go(n):
        if isinstance(n, Tau):
            return n
        if isinstance(n, Ev):
            return on_event(n)
        if isinstance(n, (Opt, Loop, Alt)):
            c = on_cond(n.cond) if on_cond else n.cond
            if isinstance(n, Alt):
                a, b = go(n.then), go(n.orelse)
                if prune and isinstance(c, TrueC):
                    return a
                if prune and isinstance(c, FalseC):
                    return b
                return Alt(c, a, b, span=n.span)
            body = go(n.body)
            if prune and isinstance(c, FalseC):
                return Tau(span=n.span)
            if prune and isinstance(n, Opt) and isinstance(c, TrueC):
                return body
            return type(n)(c, body, span=n.span)
        if isinstance(n, Critical):
            return Critical(go(n.body), span=n.span)
        if isinstance(n, (Par, Strict, Seq)):
            return type(n)(go(n.left), go(n.right), span=n.span)
        if isinstance(n, Block):
            return Block(tuple((l, go(b)) for l, b in n.parts), n.order, span=n.span)
        raise TypeError(f"not a sequence diagram: {n!r}")

    return go(d)


# --------------------------------------------------------------------------
# Refinement


@dataclass
class RefinementResult:
    holds: bool
    loop_bound: int
    # per obligation of D1 (canonical index): index of the D2 obligation matched
    matches: list = field(default_factory=list)
    counterexample: object = None
    sem1: object = None
    sem2: object = None

    def __bool__(self):
        return self.holds


class _Target:
    """Index of the right-hand semantics for repeated refinement queries."""

    def __init__(self, m2):
        from .semantics import sorted_semantics

        self.obligations = [frozenset(o) for o in sorted_semantics(m2)]
        self.position = {o: i for i, o in enumerate(self.obligations)}
        traces = sorted({t for o in self.obligations for t in o}, key=trace_text)
        self.traces = traces
        self.tindex = {t: i for i, t in enumerate(traces)}
        self.buckets = {}
        for i, t in enumerate(traces):
            self.buckets.setdefault(events_in(t), []).append(i)
        self.masks = [sum(1 << self.tindex[t] for t in o) for o in self.obligations]
        self._cache = {}

    def cover(self, o1):
        """Bit mask of D2 traces simulated by some trace of ``o1``."""
        s = 0
        for t1 in o1:
            for i in self.buckets.get(events_in(t1), ()):
                if not (s >> i) & 1 and simulates(t1, self.traces[i]):
                    s |= 1 << i
        return s

    def match(self, o1):
        hit = self.position.get(o1)
        if hit is not None:
            return hit
        s = self.cover(o1)
        r = self._cache.get(s, -2)
        if r == -2:
            r = next((i for i, m in enumerate(self.masks) if m & ~s == 0), -1)
            self._cache[s] = r
        return r


_TARGETS = {}


def refines_sem(m1, m2, loop_bound=None):
    """The refinement quantifier chain over two evaluated semantics."""
    from .semantics import sorted_semantics

    target = _TARGETS.get(m2)
    if target is None:
        if len(_TARGETS) > 8:
            _TARGETS.clear()
        target = _TARGETS[m2] = _Target(m2)
    matches = []
    for o1 in sorted_semantics(m1):
        j = target.match(frozenset(o1))
        if j < 0:
            return RefinementResult(False, loop_bound, matches, frozenset(o1), m1, m2)
        matches.append(j)
    return RefinementResult(True, loop_bound, matches, None, m1, m2)


def refines(d1, d2, cfg=DEFAULT_CONFIG):
    """``d1 ⪰ d2`` relative to ``cfg.loop_bound``."""
    return refines_sem(evaluate(d1, cfg), evaluate(d2, cfg), cfg.loop_bound)


# --------------------------------------------------------------------------
# Conformance


@dataclass
class ConformanceWitness:
    rho: Substitution
    hidden: frozenset
    loop_bound_used: int
    refinement_witnesses: list = field(default_factory=list)
    verified: bool = False

    def key(self):
        return (tuple(self.rho.items()), tuple(sorted(e.text() for e in self.hidden)))

    def hidden_sorted(self):
        return sorted(self.hidden, key=lambda e: e.text())

    def to_dict(self):
        return {
            "rho": [{"from": a, "to": b} for a, b in self.rho.items()],
            "hidden": [e.text() for e in self.hidden_sorted()],
            "loop_bound": self.loop_bound_used,
            "verified": self.verified,
        }


@dataclass
class ConformanceResult:
    holds: bool
    witness: ConformanceWitness
    reason: str = ""
    refinement: RefinementResult = None
    clash: frozenset = frozenset()

    def __bool__(self):
        return self.holds


def conforms(d1, d2, rho=IDENTITY, hidden=(), cfg=DEFAULT_CONFIG):
    """Whether ``d1`` conforms to ``d2`` with respect to ``rho`` and ``hidden``."""
    if not isinstance(rho, Substitution):
        rho = Substitution(rho)
    hidden = frozenset(hidden)
    evts1 = events_of(d1)
    stray = hidden - evts1
    if stray:
        raise InvalidHiddenSet(
            "hidden events not in the diagram: " + ", ".join(sorted(e.text() for e in stray)))
    w = ConformanceWitness(rho, hidden, cfg.loop_bound)
    images = {rho.event(e) for e in hidden} - {None}
    clash = frozenset(images & events_of(d2))
    if clash:
        return ConformanceResult(
            False, w, "hidden events rename onto events of the target: "
            + ", ".join(sorted(e.text() for e in clash)), clash=clash)
    ref = refines(substitute(hide(d1, hidden), rho), d2, cfg)
    w.refinement_witnesses = list(ref.matches)
    w.verified = ref.holds
    reason = "" if ref.holds else "an obligation has no refining counterpart"
    return ConformanceResult(ref.holds, w, reason, ref)


# --------------------------------------------------------------------------
# Inference

SEARCH_SPACE = (
    "message names of the target each take one source message of equal arity "
    "whose events rename exactly onto the target's events (lifelines injective); "
    "events of unchosen source messages are hidden; remaining guard variables "
    "are left alone or bound to a target guard variable, a literal from their "
    "own atoms, or `other`, and only binding sets with no conforming proper "
    "subset are kept; candidates are screened at loop bound {screen} before "
    "the check at loop bound {bound}"
)


def search_space(cfg=DEFAULT_CONFIG):
    return SEARCH_SPACE.format(screen=min(cfg.loop_bound, 1), bound=cfg.loop_bound)


def _messages(d):
    out = {}
    for e in events_of(d):
        out.setdefault(e.message, set()).add(e)
    return out


def _unify_terms(a, b, rho):
    """Extend ``rho`` so that name/literal ``a`` maps to ``b``; False if impossible."""
    if not is_name(a):
        return a == b
    cur = rho.get(a)
    if cur is not None:
        return cur == b
    rho[a] = b
    return True


def _unify_events(e1, e2, rho):
    if e1.kind != e2.kind or len(e1.params) != len(e2.params):
        return None
    r = dict(rho)
    r["\0lifelines"] = dict(rho.get("\0lifelines", {}))
    if not _unify_terms(e1.message, e2.message, r):
        return None
    for a, b in ((e1.sender, e2.sender), (e1.receiver, e2.receiver)):
        ll = r["\0lifelines"]
        if a in ll:
            if ll[a] != b:
                return None
            continue
        if a in r and r[a] != b:
            return None
        if b in ll.values():
            return None
        ll[a] = b
        r[a] = b
    for a, b in zip(e1.params, e2.params):
        if not _unify_terms(a, b, r):
            return None
    return r


def _unify_sets(es1, es2, rho):
    """All extensions of rho under which es1 maps bijectively onto es2."""
    es1 = sorted(es1, key=lambda e: e.text())
    es2 = sorted(es2, key=lambda e: e.text())
    if len(es1) != len(es2):
        return

    def go(i, used, r):
        if i == len(es1):
            yield r
            return
        for j, e2 in enumerate(es2):
            if j in used:
                continue
            r2 = _unify_events(es1[i], e2, r)
            if r2 is not None:
                yield from go(i + 1, used | {j}, r2)

    yield from go(0, frozenset(), rho)


def _message_maps(d1, d2):
    """Name maps realising every target message by a distinct source message."""
    m1, m2 = _messages(d1), _messages(d2)
    targets = sorted(m2)

    def go(i, used, rho):
        if i == len(targets):
            yield rho, used
            return
        n = targets[i]
        for m in sorted(m1):
            if m in used or len(m1[m]) != len(m2[n]):
                continue
            for r in _unify_sets(m1[m], m2[n], rho):
                yield from go(i + 1, used | {m}, r)

    seen = set()
    for rho, used in go(0, frozenset(), {"\0lifelines": {}}):
        plain = {k: v for k, v in rho.items() if k != "\0lifelines" and k != v}
        key = (tuple(sorted(plain.items())), used)
        if key not in seen:
            seen.add(key)
            yield plain, used


def _binding_choices(d1_hidden, d2, bound):
    """Candidate values for each guard variable not fixed by the message map."""
    d2_vars = sorted({n for c in conditions_of(d2) for n in cond_names(c)})
    conds = conditions_of(d1_hidden)
    free = sorted({n for c in conds for n in cond_names(c)} - set(bound))
    choices = {}
    for x in free:
        lits = set()
        for c in conds:
            for a in cond_atoms(c):
                if x in (a.left, a.right):
                    lits.update(t for t in (a.left, a.right) if is_literal(t))
        vals = [v for v in d2_vars if v != x]
        vals += sorted(lits - {"other"}, key=str)
        vals.append("other")
        choices[x] = vals
    return free, choices


def _budget_deadline():
    ms = os.environ.get("SDCONFORM_BUDGET_MS")
    if not ms:
        return None
    try:
        return time.monotonic() + float(ms) / 1000.0
    except ValueError:
        raise InputError(f"SDCONFORM_BUDGET_MS must be a number, not {ms!r}")


def infer(d1, d2, cfg=DEFAULT_CONFIG, max_candidates=200_000):
    """Every witness (rho, U) in the search space for which d1 conforms to d2."""
    deadline = _budget_deadline()
    screen_cfg = replace(cfg, loop_bound=min(cfg.loop_bound, 1))
    screening = screen_cfg != cfg
    evts1, evts2 = events_of(d1), events_of(d2)
    found = {}
    tried = 0

    def over_budget():
        return deadline is not None and time.monotonic() > deadline

    for rho0, used in _message_maps(d1, d2):
        hidden = frozenset(e for e in evts1 if e.message not in used)
        base = Substitution(rho0)
        images = {base.event(e) for e in hidden} - {None}
        if images & evts2:
            continue
        hidden_d1 = hide(d1, hidden)
        names_fixed = set(rho0) | {
            n for e in evts1 - hidden
            for n in (e.message, e.sender, e.receiver) + e.params if is_name(n)}
        free, choices = _binding_choices(hidden_d1, d2, names_fixed)
        successes = []
        for size in range(len(free) + 1):
            for names in itertools.combinations(free, size):
                if any(s <= set(names) for s in successes):
                    continue
                hit = False
                for values in itertools.product(*(choices[x] for x in names)):
                    tried += 1
                    if tried > max_candidates or over_budget():
                        raise SearchBudgetExceeded(
                            f"search stopped after {tried} candidates",
                            _canonical(found.values()))
                    rho = Substitution({**rho0, **dict(zip(names, values))})
                    if ({rho.event(e) for e in hidden} - {None}) & evts2:
                        continue
                    try:
                        cand = substitute(hidden_d1, rho)
                    except InputError:
                        continue
                    if screening and not refines(cand, d2, screen_cfg).holds:
                        continue
                    res = refines(cand, d2, cfg)
                    if not res.holds:
                        continue
                    w = ConformanceWitness(rho, hidden, cfg.loop_bound, list(res.matches), True)
                    found.setdefault(w.key(), w)
                    hit = True
                if hit:
                    successes.append(set(names))
    return _canonical(found.values())


def _canonical(ws):
    return sorted(ws, key=lambda w: w.key())
