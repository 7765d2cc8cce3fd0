"""Rendering of results as tab-delimited text reports and JSON documents."""

from __future__ import annotations

import json

from .frontend import cond_to_json, event_to_json
from .model import Event
from .semantics import sorted_semantics
from .simulation import simulates
from .traces import Cond, Crit, trace_text

SCHEMA_VERSION = 1


def token_json(t):
    if isinstance(t, Event):
        return {"event": event_to_json(t)}
    if isinstance(t, Cond):
        return {"cond": cond_to_json(t.cond)}
    if isinstance(t, Crit):
        return {"critical": [token_json(x) for x in t.tokens]}
    raise TypeError(f"not a token: {t!r}")


def _doc(command, **fields):
    return {"schema_version": SCHEMA_VERSION, "command": command, **fields}


def dumps(doc):
    return json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=False) + "\n"


# --------------------------------------------------------------------------
# sem


def sem_text(name, m, cfg):
    rows = [f"# diagram\t{name}",
            f"# loop_bound\t{cfg.loop_bound}\t(results are relative to this bound)",
            f"# obligations\t{len(m)}",
            "obligation\ttrace"]
    for i, o in enumerate(sorted_semantics(m), 1):
        for t in o:
            rows.append(f"{i}\t{trace_text(t)}")
    return "\n".join(rows) + "\n"


def sem_json(name, m, cfg):
    obligations = []
    for o in sorted_semantics(m):
        obligations.append([{"text": trace_text(t), "tokens": [token_json(x) for x in t]} for t in o])
    return _doc("sem", diagram=name, loop_bound=cfg.loop_bound, paper_literal=cfg.paper_literal,
                obligations=obligations)


# --------------------------------------------------------------------------
# refines


def _explain_refinement(res):
    """Per obligation of the left side: the matched right obligation and trace-level evidence."""
    lines = []
    left = sorted_semantics(res.sem1)
    right = sorted_semantics(res.sem2)
    for i, o1 in enumerate(left[:len(res.matches)], 1):
        j = res.matches[i - 1]
        lines.append(f"O1[{i}] refines O2[{j + 1}]")
        for t2 in right[j]:
            for t1 in o1:
                ok, w = simulates(t1, t2, witness=True)
                if ok:
                    lines.append(f"  {trace_text(t1)}  simulates  {trace_text(t2)}")
                    lines.append(f"    eta {list(w.eta)}"
                                 + (f" unwrap {sorted(w.unwrap_choices)}" if w.unwrap_choices else ""))
                    break
    return lines


def refines_text(names, res, explain=False):
    a, b = names
    rows = [f"# refines\t{a}\t{b}",
            f"# loop_bound\t{res.loop_bound}\t(verdict is relative to this bound)",
            f"verdict\t{'holds' if res.holds else 'fails'}"]
    if not res.holds and res.counterexample is not None:
        rows.append("counterexample\t" + " | ".join(sorted(trace_text(t) for t in res.counterexample)))
    if explain:
        rows.extend(_explain_refinement(res))
    return "\n".join(rows) + "\n"


def refines_json(names, res):
    doc = _doc("refines", left=names[0], right=names[1], loop_bound=res.loop_bound, holds=res.holds)
    if res.counterexample is not None:
        doc["counterexample"] = sorted(trace_text(t) for t in res.counterexample)
    doc["matches"] = [j + 1 for j in res.matches]
    return doc


# --------------------------------------------------------------------------
# conforms and infer


def witness_rows(w, prefix=""):
    rho = ", ".join(f"{a} -> {b}" for a, b in w.rho.items()) or "(identity)"
    hidden = ", ".join(e.text() for e in w.hidden_sorted()) or "(none)"
    return [f"{prefix}rho\t{rho}", f"{prefix}hidden\t{hidden}",
            f"{prefix}loop_bound\t{w.loop_bound_used}", f"{prefix}verified\t{str(w.verified).lower()}"]


def conforms_text(names, result, explain=False):
    a, b = names
    w = result.witness
    rows = [f"# conforms\t{a}\t{b}",
            f"# loop_bound\t{w.loop_bound_used}\t(verdict is relative to this bound)",
            f"verdict\t{'conforms' if result.holds else 'does not conform'}"]
    if result.reason:
        rows.append(f"reason\t{result.reason}")
    rows.extend(witness_rows(w))
    ref = result.refinement
    if ref is not None and not ref.holds and ref.counterexample is not None:
        rows.append("counterexample\t" + " | ".join(sorted(trace_text(t) for t in ref.counterexample)))
    if explain and ref is not None and ref.holds:
        rows.extend(_explain_refinement(ref))
    return "\n".join(rows) + "\n"


def conforms_json(names, result):
    return _doc("conforms", left=names[0], right=names[1], holds=result.holds,
                reason=result.reason, witness=result.witness.to_dict())


def infer_text(names, witnesses, space, loop_bound, partial=False):
    a, b = names
    rows = [f"# infer\t{a}\t{b}",
            f"# search_space\t{space}",
            f"# loop_bound\t{loop_bound}\t(witnesses are relative to this bound)",
            f"witnesses\t{len(witnesses)}"]
    if partial:
        rows.append("partial\ttrue\t(search budget exhausted)")
    for i, w in enumerate(witnesses, 1):
        rows.extend(witness_rows(w, prefix=f"{i}\t"))
    return "\n".join(rows) + "\n"


def infer_json(names, witnesses, space, loop_bound, partial=False):
    return _doc("infer", left=names[0], right=names[1], search_space=space,
                loop_bound=loop_bound, partial=partial,
                witnesses=[w.to_dict() for w in witnesses])
