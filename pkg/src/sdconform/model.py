"""Core vocabulary: names, events, guard conditions and the diagram AST.

Every value here is immutable and hashable.  Hashes are cached on first use
because traces and obligations hash the same tokens many times over.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
NUMBER_RE = re.compile(r"-?[0-9]+\Z")

BOOLEAN_LITERALS = ("true", "false")
SYMBOL_LITERALS = ("null", "other")
OTHER = "other"

RELATIONS = ("=", "!=", "<=", "<")


def literal_kind(text):
    """Return 'boolean', 'number' or 'symbol' for a literal, None for a name."""
    if text in BOOLEAN_LITERALS:
        return "boolean"
    if text in SYMBOL_LITERALS:
        return "symbol"
    if NUMBER_RE.match(text):
        return "number"
    return None


def is_literal(text):
    return literal_kind(text) is not None


def is_name(text):
    return bool(NAME_RE.match(text)) and not is_literal(text)


def check_name(text, what="name"):
    if not isinstance(text, str) or not is_name(text):
        raise ValueError(f"invalid {what}: {text!r}")
    return text


def check_term(text):
    if not isinstance(text, str) or not (is_name(text) or is_literal(text)):
        raise ValueError(f"invalid term: {text!r}")
    return text


def _cached_hash(self):
    d = self.__dict__
    h = d.get("_hash")
    if h is None:
        h = hash((type(self).__name__,) + tuple(d[f] for f in self._hash_fields))
        d["_hash"] = h
    return h


def node(cls):
    """Frozen dataclass with a cached structural hash (span fields excluded)."""
    cls = dataclass(frozen=True)(cls)
    cls._hash_fields = tuple(
        f.name for f in cls.__dataclass_fields__.values() if f.compare
    )
    cls.__hash__ = _cached_hash
    return cls


class _Interned(type):
    """Metaclass returning one shared instance per distinct field tuple.

    Trace tokens and conditions are hashed millions of times while semantics
    are built; interning lets identity stand in for structural equality so
    hashing and comparison stay in C.
    """

    def __call__(cls, *args, **kwargs):
        obj = super().__call__(*args, **kwargs)
        key = tuple(getattr(obj, f) for f in cls._fields_)
        pool = cls._pool_
        hit = pool.get(key)
        if hit is None:
            pool[key] = hit = obj
        return hit


def interned(cls):
    """Frozen dataclass whose instances are interned (see :class:`_Interned`)."""
    ns = {k: v for k, v in cls.__dict__.items() if k not in ("__dict__", "__weakref__")}
    cls = _Interned(cls.__name__, cls.__bases__, ns)
    cls = dataclass(frozen=True, eq=False)(cls)
    cls._fields_ = tuple(cls.__dataclass_fields__)
    cls._pool_ = {}
    cls.__reduce__ = lambda self: (type(self), tuple(getattr(self, f) for f in self._fields_))
    return cls


# --------------------------------------------------------------------------
# Events

SEND = "send"
RECEIVE = "receive"


@interned
class Event:
    kind: str
    message: str
    sender: str
    receiver: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in (SEND, RECEIVE):
            raise ValueError(f"event kind must be send or receive, not {self.kind!r}")
        check_name(self.message, "message name")
        check_name(self.sender, "lifeline")
        check_name(self.receiver, "lifeline")
        if not isinstance(self.params, tuple):
            object.__setattr__(self, "params", tuple(self.params))
        for p in self.params:
            check_term(p)

    @property
    def lifeline(self):
        return self.sender if self.kind == SEND else self.receiver

    def text(self):
        mark = "!" if self.kind == SEND else "?"
        args = [self.sender, self.receiver]
        if self.params:
            args.append("[" + ",".join(self.params) + "]")
        return f"{mark}{self.message}({','.join(args)})"

    def __str__(self):
        return self.text()


def send(message, sender, receiver, params=()):
    return Event(SEND, message, sender, receiver, tuple(params))


def receive(message, sender, receiver, params=()):
    return Event(RECEIVE, message, sender, receiver, tuple(params))


# --------------------------------------------------------------------------
# Guard conditions


@interned
class TrueC:
    pass


@interned
class FalseC:
    pass


@interned
class Atom:
    left: str
    rel: str
    right: str

    def __post_init__(self):
        check_term(self.left)
        check_term(self.right)
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")


@interned
class NotC:
    operand: object


@interned
class AndC:
    left: object
    right: object


@interned
class OrC:
    left: object
    right: object


TRUE = TrueC()
FALSE = FalseC()

_PREC = {OrC: 1, AndC: 2}


def cond_text(c, parent=0):
    """Concrete syntax shared by the DSL and trace rendering."""
    if isinstance(c, TrueC):
        return "true"
    if isinstance(c, FalseC):
        return "false"
    if isinstance(c, Atom):
        return f"{c.left}{c.rel}{c.right}"
    if isinstance(c, NotC):
        inner = c.operand
        if isinstance(inner, (TrueC, FalseC, NotC)):
            return "!" + cond_text(inner, 3)
        return "!(" + cond_text(inner) + ")"
    prec = _PREC[type(c)]
    op = " || " if isinstance(c, OrC) else " && "
    # both operators are associative, so a left-nested chain prints flat
    s = cond_text(c.left, prec - 1 if isinstance(c.left, type(c)) else prec) + op + cond_text(c.right, prec)
    return f"({s})" if prec <= parent else s


def cond_atoms(c):
    if isinstance(c, Atom):
        return {c}
    if isinstance(c, NotC):
        return cond_atoms(c.operand)
    if isinstance(c, (AndC, OrC)):
        return cond_atoms(c.left) | cond_atoms(c.right)
    return set()


def cond_names(c):
    """Non-literal names occurring in a condition."""
    return {t for a in cond_atoms(c) for t in (a.left, a.right) if is_name(t)}


# --------------------------------------------------------------------------
# Sequence diagrams

def _span():
    return field(default=None, compare=False, repr=False)


@node
class Tau:
    span: object = _span()


@node
class Ev:
    event: Event
    span: object = _span()


@node
class Opt:
    cond: object
    body: object
    span: object = _span()


@node
class Alt:
    cond: object
    then: object
    orelse: object
    span: object = _span()


@node
class Loop:
    cond: object
    body: object
    span: object = _span()


@node
class Critical:
    body: object
    span: object = _span()


@node
class Par:
    left: object
    right: object
    span: object = _span()


@node
class Strict:
    left: object
    right: object
    span: object = _span()


@node
class Seq:
    left: object
    right: object
    span: object = _span()


def label_key(label):
    """Natural ordering: numeric labels first, by value, then the rest."""
    label = str(label)
    if label.isdigit():
        return (0, int(label), label)
    return (1, 0, label)


@node
class Block:
    """A labelled pomset of sub-diagrams.

    ``parts`` is a tuple of ``(label, diagram)`` pairs in natural label order
    and ``order`` a frozenset of ``(label, label)`` edges.  Use :func:`block`
    to build one; it sorts the parts and stores the transitive reduction.
    """

    parts: tuple
    order: frozenset
    span: object = _span()

    @property
    def labels(self):
        return tuple(l for l, _ in self.parts)

    @property
    def body(self):
        return dict(self.parts)


BINARY = (Par, Strict, Seq)
GUARDED = (Opt, Loop)


def transitive_closure(labels, edges):
    succ = {l: set() for l in labels}
    for a, b in edges:
        succ.setdefault(a, set()).add(b)
        succ.setdefault(b, set())
    closure = {}
    for start in succ:
        seen = set()
        stack = list(succ[start])
        while stack:
            x = stack.pop()
            if x not in seen:
                seen.add(x)
                stack.extend(succ[x])
        closure[start] = seen
    return closure


def transitive_reduction(labels, edges):
    """Reduce an acyclic relation; reflexive and cyclic edges are kept as-is."""
    edges = set(edges)
    closure = transitive_closure(labels, edges)
    reduced = set()
    for a, b in edges:
        if a == b or a in closure.get(b, ()):
            reduced.add((a, b))
            continue
        if not any(b in closure[c] for c in closure[a] if c != b and c != a):
            reduced.add((a, b))
    return frozenset(reduced)


def block(parts, order=(), span=None):
    if isinstance(parts, Mapping):
        parts = parts.items()
    parts = tuple(sorted(((str(l), d) for l, d in parts), key=lambda p: label_key(p[0])))
    order = {(str(a), str(b)) for a, b in order}
    labels = [l for l, _ in parts]
    return Block(parts, transitive_reduction(labels, order), span=span)


def chain(*labels):
    """Edges of a total order over the given labels."""
    labels = [str(l) for l in labels]
    return {(a, b) for a, b in zip(labels, labels[1:])}


def msg(message, sender, receiver, params=()):
    """The usual message sugar: strict(send, receive)."""
    return Strict(Ev(send(message, sender, receiver, params)),
                  Ev(receive(message, sender, receiver, params)))


def children(d):
    if isinstance(d, (Opt, Loop, Critical)):
        return [d.body]
    if isinstance(d, Alt):
        return [d.then, d.orelse]
    if isinstance(d, BINARY):
        return [d.left, d.right]
    if isinstance(d, Block):
        return [b for _, b in d.parts]
    return []


def walk(d):
    yield d
    for c in children(d):
        yield from walk(c)


def events_of(d):
    return frozenset(n.event for n in walk(d) if isinstance(n, Ev))


def conditions_of(d):
    return [n.cond for n in walk(d) if isinstance(n, (Opt, Alt, Loop))]


def has_loop(d):
    return any(isinstance(n, Loop) for n in walk(d))


def lifelines_of(d):
    out = set()
    for e in events_of(d):
        out.update((e.sender, e.receiver))
    return out


# --------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


def _node_name(d):
    return type(d).__name__.lower()


def validate(d, path="sd"):
    """Structural problems in ``d``; an empty list means the diagram is usable."""
    out = []
    if isinstance(d, Block):
        labels = [l for l, _ in d.parts]
        if not labels:
            out.append(Violation(path, "block has no labels"))
        dupes = sorted({l for l in labels if labels.count(l) > 1}, key=label_key)
        for l in dupes:
            out.append(Violation(path, f"label {l} is used more than once"))
        known = set(labels)
        for a, b in sorted(d.order, key=lambda e: (label_key(e[0]), label_key(e[1]))):
            if a not in known or b not in known:
                missing = a if a not in known else b
                out.append(Violation(path, f"edge {a}->{b} refers to unknown label {missing}"))
            elif a == b:
                out.append(Violation(path, f"reflexive edge {a}->{b}"))
        good = [(a, b) for a, b in d.order if a != b and a in known and b in known]
        closure = transitive_closure(labels, good)
        cyclic = sorted((l for l in known if l in closure.get(l, ())), key=label_key)
        if cyclic:
            out.append(Violation(path, "order is cyclic through labels " + ",".join(cyclic)))
        for l, sub in d.parts:
            out.extend(validate(sub, f"{path}/block[{l}]"))
        return out
    for i, c in enumerate(children(d)):
        suffix = "" if len(children(d)) == 1 else f"#{i}"
        out.extend(validate(c, f"{path}/{_node_name(d)}{suffix}"))
    return out


# --------------------------------------------------------------------------
# Structural equality with label alpha-equivalence


def equal_sd(d1, d2):
    if type(d1) is not type(d2):
        return False
    if isinstance(d1, Tau):
        return True
    if isinstance(d1, Ev):
        return d1.event == d2.event
    if isinstance(d1, (Opt, Loop)):
        return d1.cond == d2.cond and equal_sd(d1.body, d2.body)
    if isinstance(d1, Alt):
        return (d1.cond == d2.cond and equal_sd(d1.then, d2.then)
                and equal_sd(d1.orelse, d2.orelse))
    if isinstance(d1, Critical):
        return equal_sd(d1.body, d2.body)
    if isinstance(d1, BINARY):
        return equal_sd(d1.left, d2.left) and equal_sd(d1.right, d2.right)
    return _equal_blocks(d1, d2)


def _equal_blocks(b1, b2):
    if len(b1.parts) != len(b2.parts) or len(b1.order) != len(b2.order):
        return False
    labels1 = [l for l, _ in b1.parts]
    body1, body2 = dict(b1.parts), dict(b2.parts)
    candidates = {
        l1: [l2 for l2, _ in b2.parts if equal_sd(body1[l1], body2[l2])] for l1 in labels1
    }
    order2 = b2.order

    def extend(i, mapping, used):
        if i == len(labels1):
            return {(mapping[a], mapping[b]) for a, b in b1.order} == order2
        l1 = labels1[i]
        for l2 in candidates[l1]:
            if l2 not in used:
                mapping[l1] = l2
                used.add(l2)
                if extend(i + 1, mapping, used):
                    return True
                used.discard(l2)
                del mapping[l1]
        return False

    return extend(0, {}, set())

