"""Text formats: the ``.sd`` DSL, ``.sd.json`` documents, rho files and hide lists.

A small example::

    sd Hello {
      block {
        1: send hi() from a to b;
        2: recv hi() from a to b;
        order 1 -> 2;
      }
    }
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .errors import InputError, ParseError, UnsupportedOperator, ValidationError
from .model import (
    FALSE, TRUE, Alt, AndC, Atom, Block, Critical, Ev, Event, FalseC, Loop, NotC,
    Opt, OrC, Par, Seq, Strict, Tau, TrueC, block, cond_text, is_literal, is_name,
    label_key, receive, send, validate, walk,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    col: int
    end_line: int
    end_col: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.col}"


# --------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>(//|\#)[^\n]*)
  | (?P<arrow>->)
  | (?P<num>-?[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>&&|\|\||!=|<=|[{}()\[\],;:=<!])
""", re.VERBOSE)

UNSUPPORTED = ("neg", "assert", "break", "ignore", "consider", "ref")
KEYWORDS = ("sd", "tau", "send", "recv", "msg", "opt", "alt", "else", "loop",
            "critical", "par", "strict", "seq", "and", "block", "order", "from", "to")


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int
    end_line: int
    end_col: int


def tokenize(text, file="<input>"):
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             SourceSpan(file, line, col, line, col + 1))
        s = m.group()
        nl = s.count("\n")
        end_line = line + nl
        end_col = (len(s) - s.rfind("\n")) if nl else col + len(s)
        if m.lastgroup not in ("ws", "comment"):
            kind = m.lastgroup
            if kind == "arrow":
                kind = "op"
            out.append(Tok(kind, s, line, col, end_line, end_col))
        pos, line, col = m.end(), end_line, end_col
    out.append(Tok("eof", "", line, col, line, col))
    return out


# --------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text, file):
        self.file = file
        self.toks = tokenize(text, file)
        self.i = 0

    # helpers
    @property
    def cur(self):
        return self.toks[self.i]

    def span(self, start, end=None):
        end = end or self.toks[max(self.i - 1, 0)]
        return SourceSpan(self.file, start.line, start.col, end.end_line, end.end_col)

    def error(self, message, tok=None):
        tok = tok or self.cur
        return ParseError(message, SourceSpan(self.file, tok.line, tok.col, tok.end_line, tok.end_col))

    def at(self, text):
        return self.cur.text == text and self.cur.kind != "eof"

    def take(self, text=None, kind=None):
        t = self.cur
        if text is not None and t.text != text:
            found = t.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        if kind is not None and t.kind != kind:
            found = t.text or "end of input"
            raise self.error(f"expected {kind}, found {found!r}")
        self.i += 1
        return t

    def name(self, what="name"):
        t = self.cur
        if t.kind != "ident" or not is_name(t.text):
            raise self.error(f"expected {what}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t.text

    def term(self):
        t = self.cur
        if t.kind == "num" or (t.kind == "ident" and (is_name(t.text) or is_literal(t.text))):
            self.i += 1
            return t.text
        raise self.error(f"expected a name or literal, found {t.text or 'end of input'!r}")

    def label(self):
        t = self.cur
        if t.kind == "num" and not t.text.startswith("-"):
            self.i += 1
            return t.text
        if t.kind == "ident":
            self.i += 1
            return t.text
        raise self.error(f"expected a label, found {t.text or 'end of input'!r}")

    # grammar
    def document(self):
        self.take("sd")
        name = self.name("diagram name")
        self.take("{")
        d = self.frag()
        self.take("}")
        if self.cur.kind != "eof":
            raise self.error(f"unexpected {self.cur.text!r} after the diagram")
        return name, d

    def frag(self):
        start = self.cur
        word = start.text
        if start.kind != "ident":
            raise self.error(f"expected a fragment, found {word or 'end of input'!r}")
        if word in UNSUPPORTED:
            raise UnsupportedOperator(
                f"operator {word} is not supported",
                SourceSpan(self.file, start.line, start.col, start.end_line, start.end_col))
        self.i += 1
        if word == "tau":
            return Tau(span=self.span(start))
        if word in ("send", "recv", "msg"):
            msg = self.name("message name")
            self.take("(")
            params = []
            if not self.at(")"):
                params.append(self.term())
                while self.at(","):
                    self.take(",")
                    params.append(self.term())
            self.take(")")
            self.take("from")
            a = self.name("lifeline")
            self.take("to")
            b = self.name("lifeline")
            sp = self.span(start)
            if word == "send":
                return Ev(send(msg, a, b, params), span=sp)
            if word == "recv":
                return Ev(receive(msg, a, b, params), span=sp)
            return Strict(Ev(send(msg, a, b, params), span=sp),
                          Ev(receive(msg, a, b, params), span=sp), span=sp)
        if word in ("opt", "loop"):
            c = self.paren_cond()
            body = self.braced()
            cls = Opt if word == "opt" else Loop
            return cls(c, body, span=self.span(start))
        if word == "alt":
            c = self.paren_cond()
            a = self.braced()
            self.take("else")
            b = self.braced()
            return Alt(c, a, b, span=self.span(start))
        if word == "critical":
            return Critical(self.braced(), span=self.span(start))
        if word in ("par", "strict", "seq"):
            a = self.braced()
            self.take("and")
            b = self.braced()
            cls = {"par": Par, "strict": Strict, "seq": Seq}[word]
            return cls(a, b, span=self.span(start))
        if word == "block":
            return self.block(start)
        raise self.error(f"unknown fragment {word!r}", start)

    def braced(self):
        self.take("{")
        d = self.frag()
        self.take("}")
        return d

    def block(self, start):
        self.take("{")
        parts, order = [], []
        while not self.at("order") and not self.at("}"):
            l = self.label()
            self.take(":")
            parts.append((l, self.frag()))
            self.take(";")
        if self.at("order"):
            self.take("order")
            while not self.at("}"):
                a = self.label()
                self.take("->")
                b = self.label()
                self.take(";")
                order.append((a, b))
        self.take("}")
        sp = self.span(start)
        labels = [l for l, _ in parts]
        if len(set(labels)) != len(labels):
            dup = next(l for l in labels if labels.count(l) > 1)
            raise ParseError(f"label {dup} is used more than once", sp)
        return block(parts, order, span=sp)

    def paren_cond(self):
        self.take("(")
        c = self.cond()
        self.take(")")
        return c

    def cond(self):
        c = self.cond_and()
        while self.at("||"):
            self.take("||")
            c = OrC(c, self.cond_and())
        return c

    def cond_and(self):
        c = self.cond_not()
        while self.at("&&"):
            self.take("&&")
            c = AndC(c, self.cond_not())
        return c

    def cond_not(self):
        if self.at("!"):
            self.take("!")
            return NotC(self.cond_not())
        if self.at("("):
            self.take("(")
            c = self.cond()
            self.take(")")
            return c
        if self.cur.kind == "ident" and self.cur.text in ("true", "false"):
            nxt = self.toks[self.i + 1]
            if nxt.text not in ("=", "!=", "<=", "<"):
                self.i += 1
                return TRUE if self.toks[self.i - 1].text == "true" else FALSE
        left = self.term()
        rel = self.cur.text
        if rel not in ("=", "!=", "<=", "<"):
            raise self.error(f"expected a relation, found {rel or 'end of input'!r}")
        self.i += 1
        right = self.term()
        return Atom(left, rel, right)


def parse_document(text, file="<input>", check=True):
    """Parse DSL text into ``(name, diagram)``; validation runs unless ``check`` is off."""
    name, d = _Parser(text, file).document()
    if check:
        problems = validate(d)
        if problems:
            raise ValidationError(problems)
    return name, d


def parse_dsl(text, file="<input>"):
    return parse_document(text, file)[1]


def parse_cond(text):
    p = _Parser(text, "<cond>")
    c = p.cond()
    if p.cur.kind != "eof":
        raise p.error(f"unexpected {p.cur.text!r}")
    return c


# --------------------------------------------------------------------------
# Printer


def _event_dsl(e):
    word = "send" if e.kind == "send" else "recv"
    return f"{word} {e.message}({', '.join(e.params)}) from {e.sender} to {e.receiver}"


def _is_msg(d):
    if not (isinstance(d, Strict) and isinstance(d.left, Ev) and isinstance(d.right, Ev)):
        return False
    a, b = d.left.event, d.right.event
    return a.kind == "send" and b == receive(a.message, a.sender, a.receiver, a.params)


def _frag_lines(d, indent):
    pad = "  " * indent
    if isinstance(d, Tau):
        return [pad + "tau"]
    if isinstance(d, Ev):
        return [pad + _event_dsl(d.event)]
    if _is_msg(d):
        e = d.left.event
        return [pad + f"msg {e.message}({', '.join(e.params)}) from {e.sender} to {e.receiver}"]
    if isinstance(d, (Opt, Loop)):
        word = "opt" if isinstance(d, Opt) else "loop"
        return [pad + f"{word} ({cond_text(d.cond)}) {{", *_frag_lines(d.body, indent + 1), pad + "}"]
    if isinstance(d, Alt):
        return [pad + f"alt ({cond_text(d.cond)}) {{", *_frag_lines(d.then, indent + 1),
                pad + "} else {", *_frag_lines(d.orelse, indent + 1), pad + "}"]
    if isinstance(d, Critical):
        return [pad + "critical {", *_frag_lines(d.body, indent + 1), pad + "}"]
    if isinstance(d, (Par, Strict, Seq)):
        word = type(d).__name__.lower()
        return [pad + f"{word} {{", *_frag_lines(d.left, indent + 1),
                pad + "} and {", *_frag_lines(d.right, indent + 1), pad + "}"]
    if isinstance(d, Block):
        lines = [pad + "block {"]
        for l, sub in d.parts:
            inner = _frag_lines(sub, indent + 2)
            first = inner[0].lstrip()
            if len(inner) == 1:
                lines.append(f"{pad}  {l}: {first};")
            else:
                lines.append(f"{pad}  {l}: {first}")
                lines.extend(inner[1:-1])
                lines.append(inner[-1] + ";")
        edges = sorted(d.order, key=lambda e: (label_key(e[0]), label_key(e[1])))
        if edges:
            lines.append(pad + "  order " + " ".join(f"{a} -> {b};" for a, b in edges))
        lines.append(pad + "}")
        return lines
    raise TypeError(f"not a sequence diagram: {d!r}")


def print_dsl(d, name="D"):
    return "\n".join([f"sd {name} {{", *_frag_lines(d, 1), "}"]) + "\n"


# --------------------------------------------------------------------------
# Structured (JSON) documents


def cond_to_json(c):
    if isinstance(c, TrueC):
        return True
    if isinstance(c, FalseC):
        return False
    if isinstance(c, Atom):
        return {"atom": [c.left, c.rel, c.right]}
    if isinstance(c, NotC):
        return {"not": cond_to_json(c.operand)}
    if isinstance(c, AndC):
        return {"and": [cond_to_json(c.left), cond_to_json(c.right)]}
    return {"or": [cond_to_json(c.left), cond_to_json(c.right)]}


def cond_from_json(j):
    if j is True:
        return TRUE
    if j is False:
        return FALSE
    if not isinstance(j, dict) or len(j) != 1:
        raise InputError(f"bad condition {j!r}")
    (k, v), = j.items()
    if k == "atom":
        return Atom(*v)
    if k == "not":
        return NotC(cond_from_json(v))
    if k in ("and", "or"):
        a, b = v
        return (AndC if k == "and" else OrC)(cond_from_json(a), cond_from_json(b))
    raise InputError(f"bad condition {j!r}")


def event_to_json(e):
    return {"kind": e.kind, "message": e.message, "from": e.sender,
            "to": e.receiver, "params": list(e.params)}


def event_from_json(j):
    return Event(j["kind"], j["message"], j["from"], j["to"], tuple(j.get("params", ())))


def sd_to_json(d):
    if isinstance(d, Tau):
        return {"op": "tau"}
    if isinstance(d, Ev):
        return {"op": "event", "event": event_to_json(d.event)}
    if isinstance(d, (Opt, Loop)):
        return {"op": type(d).__name__.lower(), "cond": cond_to_json(d.cond), "body": sd_to_json(d.body)}
    if isinstance(d, Alt):
        return {"op": "alt", "cond": cond_to_json(d.cond),
                "then": sd_to_json(d.then), "else": sd_to_json(d.orelse)}
    if isinstance(d, Critical):
        return {"op": "critical", "body": sd_to_json(d.body)}
    if isinstance(d, (Par, Strict, Seq)):
        return {"op": type(d).__name__.lower(), "left": sd_to_json(d.left), "right": sd_to_json(d.right)}
    if isinstance(d, Block):
        return {"op": "block",
                "parts": [{"label": l, "body": sd_to_json(b)} for l, b in d.parts],
                "order": [[a, b] for a, b in sorted(d.order, key=lambda e: (label_key(e[0]), label_key(e[1])))]}
    raise TypeError(f"not a sequence diagram: {d!r}")


def sd_from_json(j):
    try:
        op = j["op"]
        if op == "tau":
            return Tau()
        if op == "event":
            return Ev(event_from_json(j["event"]))
        if op in ("opt", "loop"):
            return (Opt if op == "opt" else Loop)(cond_from_json(j["cond"]), sd_from_json(j["body"]))
        if op == "alt":
            return Alt(cond_from_json(j["cond"]), sd_from_json(j["then"]), sd_from_json(j["else"]))
        if op == "critical":
            return Critical(sd_from_json(j["body"]))
        if op in ("par", "strict", "seq"):
            cls = {"par": Par, "strict": Strict, "seq": Seq}[op]
            return cls(sd_from_json(j["left"]), sd_from_json(j["right"]))
        if op == "block":
            parts = tuple(sorted(((str(p["label"]), sd_from_json(p["body"])) for p in j["parts"]),
                                 key=lambda p: label_key(p[0])))
            return Block(parts, frozenset((str(a), str(b)) for a, b in j.get("order", ())))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed diagram document: {exc}") from exc
    raise InputError(f"unknown fragment {op!r}")


def dump_json(d, name="D"):
    doc = {"schema_version": SCHEMA_VERSION, "name": name, "diagram": sd_to_json(d)}
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def load_json(text, file="<input>", check=True):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", SourceSpan(file, exc.lineno, exc.colno, exc.lineno, exc.colno))
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise InputError(f"{file}: unsupported or missing schema_version")
    d = sd_from_json(doc.get("diagram"))
    if check:
        problems = validate(d)
        if problems:
            raise ValidationError(problems)
    return doc.get("name", "D"), d


def load_file(path):
    """Read a ``.sd`` or ``.sd.json`` file into ``(name, diagram)``."""
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    if str(path).endswith(".json"):
        return load_json(text, str(path))
    return parse_document(text, str(path))


# --------------------------------------------------------------------------
# rho files and hide lists


def parse_rho(text, file="<rho>"):
    """Lines of ``from -> to``; blank lines and comments are ignored."""
    from .conformance import Substitution

    pairs = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = re.sub(r"(//|#).*", "", raw).strip()
        if not line:
            continue
        m = re.fullmatch(r"(\S+)\s*->\s*(\S+)", line)
        if not m:
            raise ParseError("expected 'from -> to'", SourceSpan(file, n, 1, n, len(raw) + 1))
        src, dst = m.groups()
        if not is_name(src):
            raise ParseError(f"{src!r} is not a name", SourceSpan(file, n, 1, n, len(raw) + 1))
        if not (is_name(dst) or is_literal(dst)):
            raise ParseError(f"{dst!r} is not a name or literal", SourceSpan(file, n, 1, n, len(raw) + 1))
        pairs.append((src, dst))
    return Substitution(pairs)


def event_from_text(text):
    """Inverse of :meth:`Event.text`, e.g. ``!m(a,b,[p,q])``."""
    m = re.fullmatch(r"\s*([!?])([A-Za-z_]\w*)\(([A-Za-z_]\w*),([A-Za-z_]\w*)(?:,\[([^\]]*)\])?\)\s*", text)
    if not m:
        raise InputError(f"not an event: {text!r}")
    mark, msg, a, b, params = m.groups()
    params = tuple(p.strip() for p in params.split(",")) if params else ()
    return (send if mark == "!" else receive)(msg, a, b, params)


def labelled_events(d):
    """Map from block label to event, for block parts that are single events."""
    out = {}
    for n in walk(d):
        if isinstance(n, Block):
            for l, sub in n.parts:
                if isinstance(sub, Ev):
                    out.setdefault(l, set()).add(sub.event)
    return out


def resolve_hidden(items, d):
    """Resolve hide-list items: a label, a letter-prefixed label (``f9``) or event text."""
    labels = labelled_events(d)
    out = set()
    for item in items:
        item = item.strip()
        if not item:
            continue
        if item[0] in "!?":
            out.add(event_from_text(item))
            continue
        key = item if item in labels else None
        if key is None:
            m = re.fullmatch(r"[A-Za-z]+([0-9]+)", item)
            if m and m.group(1) in labels:
                key = m.group(1)
        if key is None:
            raise InputError(f"hide item {item!r} names no labelled event")
        evs = labels[key]
        if len(evs) > 1:
            raise InputError(f"label {key} labels more than one event")
        out |= evs
    return frozenset(out)
