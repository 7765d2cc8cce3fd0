"""Evaluation of diagrams to sets of alternative obligations.

A semantics is a ``frozenset`` of obligations and an obligation a
``frozenset`` of traces (tuples of tokens).  Composite results are normalised
with :func:`minimize` after :func:`fold` unless ``paper_literal`` is set, in
which case only the operators whose defining equations fold do so.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .conditions import disj, is_tautology, negate
from .errors import SizeBudgetExceeded
from .model import (
    Alt, Block, Critical, Ev, Loop, Opt, Par, Seq, Strict, Tau, label_key,
    transitive_closure,
)
from .traces import (
    EPSILON, Cond, Crit, lifelines, trace_text, unwrap,
)


@dataclass(frozen=True)
class EvalConfig:
    loop_bound: int = 3
    max_obligations: int = 250_000
    max_traces_per_obligation: int = 5_000
    max_trace_length: int = 512
    max_choices: int = 2_000_000
    paper_literal: bool = False

    def __post_init__(self):
        if self.loop_bound < 0:
            raise ValueError("loop_bound must be non-negative")
        for name in ("max_obligations", "max_traces_per_obligation",
                     "max_trace_length", "max_choices"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_CONFIG = EvalConfig()

TAU_SEM = frozenset({frozenset({EPSILON})})


# --------------------------------------------------------------------------
# Canonical ordering


def obligation_key(o):
    return tuple(sorted(trace_text(t) for t in o))


def sorted_obligation(o):
    return sorted(o, key=trace_text)


def sorted_semantics(m):
    """Obligations (each a sorted list of traces) in canonical order."""
    return [sorted_obligation(o) for o in sorted(m, key=obligation_key)]


def sem(*obligations):
    """Build a semantics from iterables of traces (handy in tests)."""
    return frozenset(frozenset(tuple(t) for t in o) for o in obligations)


# --------------------------------------------------------------------------
# fold and minimize


def _fold_candidates(o):
    """Foldable pairs in deterministic scan order."""
    if len({len(t) for t in o}) == len(o):
        return
    slots = {}
    for t in o:
        for i, tok in enumerate(t):
            if isinstance(tok, Cond):
                slots.setdefault((len(t), i), []).append(t)
    groups = {}
    for (_, i), ts in slots.items():
        if len(ts) < 2 or not _some_cover({t[i].cond for t in ts}):
            continue
        for t in ts:
            groups.setdefault((i, t[:i], t[i + 1:]), []).append(t)
    live = [k for k, v in groups.items() if len(v) > 1]
    if not live:
        return
    for key in sorted(live, key=lambda k: (k[0], trace_text(k[1]), trace_text(k[2]))):
        members = sorted(groups[key], key=trace_text)
        i = key[0]
        for a, b in itertools.combinations(members, 2):
            if is_tautology(disj(a[i].cond, b[i].cond)):
                yield a, b, key[1] + key[2]


def _some_cover(conds):
    conds = list(conds)
    return any(is_tautology(disj(a, b))
               for a, b in itertools.combinations_with_replacement(conds, 2))


def fold_step_options(o):
    """Every one-step fold rewrite of an obligation (used by confluence checks)."""
    out = []
    for a, b, merged in _fold_candidates(o):
        out.append(frozenset((set(o) - {a, b}) | {merged}))
    return out


def fold_obligation(o):
    o = set(o)
    while True:
        step = next(_fold_candidates(o), None)
        if step is None:
            return frozenset(o)
        a, b, merged = step
        o.discard(a)
        o.discard(b)
        o.add(merged)


_FOLD_CACHE = {}


def fold(m):
    out = set()
    for o in m:
        r = _FOLD_CACHE.get(o)
        if r is None:
            if len(_FOLD_CACHE) > 200_000:
                _FOLD_CACHE.clear()
            r = _FOLD_CACHE[o] = fold_obligation(o)
        out.add(r)
    return frozenset(out)


def minimize(m):
    """Drop every obligation that strictly contains another one."""
    m = set(m)
    if len(m) <= 1:
        return frozenset(m)
    by_size = sorted(m, key=len)
    if len(by_size[0]) == len(by_size[-1]):
        return frozenset(m)
    keep = []
    smallest = len(by_size[0])
    for o in by_size:
        if len(o) == smallest:
            keep.append(o)
            continue
        if len(o) <= 12 and (1 << len(o)) < 4 * len(m):
            redundant = any(
                frozenset(sub) in m
                for r in range(smallest, len(o))
                for sub in itertools.combinations(o, r)
            )
        else:
            redundant = any(k < o for k in keep if len(k) < len(o))
        if not redundant:
            keep.append(o)
    return frozenset(keep)


def normalize(m, cfg=DEFAULT_CONFIG, literal_fold=True):
    if cfg.paper_literal and not literal_fold:
        return minimize(m)
    return minimize(fold(m))


def is_fold_stable(m):
    return all(next(_fold_candidates(o), None) is None for o in m)


def in_domain(m):
    return minimize(m) == frozenset(m) and is_fold_stable(m)


# --------------------------------------------------------------------------
# Budgets


def _check(m, cfg, path):
    if len(m) > cfg.max_obligations:
        raise SizeBudgetExceeded(f"{len(m)} obligations exceed {cfg.max_obligations}", path)
    for o in m:
        if len(o) > cfg.max_traces_per_obligation:
            raise SizeBudgetExceeded(
                f"obligation of {len(o)} traces exceeds {cfg.max_traces_per_obligation}", path)
        for t in o:
            if len(t) > cfg.max_trace_length:
                raise SizeBudgetExceeded(
                    f"trace of length {len(t)} exceeds {cfg.max_trace_length}", path)
    return m


# --------------------------------------------------------------------------
# Pointwise lifted operators


def concat(m1, m2):
    return frozenset(frozenset(a + b for a in o1 for b in o2) for o1 in m1 for o2 in m2)


def guarded(c, m, otherwise):
    """{{c}} concatenated with ``m``, unioned pointwise with ``otherwise``."""
    tok = (Cond(c),)
    return frozenset(
        frozenset(tok + t for t in o) | o2 for o in m for o2 in otherwise
    )


# --------------------------------------------------------------------------
# Constrained interleaving


def _shuffles(a, b, a_first, b_first, cap):
    """Shuffles of ``a`` and ``b`` honouring cross-trace precedence.

    ``a_first[i]`` is the smallest j such that a[i] must come before b[j]
    (None if there is none) and ``b_first[j]`` likewise for b[j] before a[i].
    Later tokens are covered by the internal order of each trace.
    """
    n, k = len(a), len(b)
    need_a = [0] * k  # b[j] needs this many tokens of a emitted first
    for i, j in enumerate(a_first):
        if j is not None:
            need_a[j] = max(need_a[j], i + 1)
    need_b = [0] * n
    for j, i in enumerate(b_first):
        if i is not None:
            need_b[i] = max(need_b[i], j + 1)

    count = {}

    def cnt(i, j):
        key = (i, j)
        if key in count:
            return count[key]
        if i == n and j == k:
            r = 1
        else:
            r = 0
            if i < n and j >= need_b[i]:
                r += cnt(i + 1, j)
            if j < k and i >= need_a[j]:
                r += cnt(i, j + 1)
        count[key] = r
        return r

    total = cnt(0, 0)
    if total > cap:
        raise SizeBudgetExceeded(f"{total} interleavings exceed {cap}")
    memo = {}

    def gen(i, j):
        key = (i, j)
        if key in memo:
            return memo[key]
        if i == n and j == k:
            r = [()]
        else:
            r = []
            if i < n and j >= need_b[i] and cnt(i + 1, j):
                head = (a[i],)
                r.extend(head + s for s in gen(i + 1, j))
            if j < k and i >= need_a[j] and cnt(i, j + 1):
                head = (b[j],)
                r.extend(head + s for s in gen(i, j + 1))
        memo[key] = r
        return r

    return gen(0, 0)


def _first_index(x, seq, must_precede):
    for j, y in enumerate(seq):
        if must_precede(x, y):
            return j
    return None


def _precedence(a, b, must_precede):
    return ([_first_index(x, b, must_precede) for x in a],
            [_first_index(y, a, must_precede) for y in b])


def _combine_obligations(o1, o2, shuffle, cfg):
    """Minimal images of choice functions picking one admissible shuffle per pair."""
    images = {frozenset()}
    for s1 in o1:
        for s2 in o2:
            options = shuffle(s1, s2)
            if not options:
                return set()
            if len(images) * len(options) > cfg.max_choices:
                raise SizeBudgetExceeded(f"choice functions exceed {cfg.max_choices}")
            images = {img | {s} for img in images for s in options}
            if len(images) > 64:
                images = set(minimize(images))
    return images


def _combine(m1, m2, shuffle, cfg):
    out = set()
    for o1 in m1:
        for o2 in m2:
            out |= _combine_obligations(o1, o2, shuffle, cfg)
            if len(out) > 4 * cfg.max_obligations:
                raise SizeBudgetExceeded(f"more than {cfg.max_obligations} obligations")
    return minimize(out)


def _cached_shuffler(must_precede, cap):
    cache = {}

    def shuffle(a, b):
        key = (a, b)
        r = cache.get(key)
        if r is None:
            a_first, b_first = _precedence(a, b, must_precede)
            r = cache[key] = _shuffles(a, b, a_first, b_first, cap)
        return r

    return shuffle


def _never(x, y):
    return False


def _weak(x, y):
    # weak sequencing: left tokens precede right tokens on a shared lifeline
    return x[1] == 1 and y[1] == 2 and bool(lifelines(x[0]) & lifelines(y[0]))


def par_combine(o1, o2, cfg=DEFAULT_CONFIG):
    """Minimal obligations of the parallel combination of two obligations."""
    shuffle = _cached_shuffler(_never, cfg.max_choices)
    return minimize(_combine_obligations(o1, o2, shuffle, cfg))


def par_sem(m1, m2, cfg=DEFAULT_CONFIG):
    return _combine(m1, m2, _cached_shuffler(_never, cfg.max_choices), cfg)


def _tag_sem(m, label):
    return frozenset(frozenset(tuple([(t, label) for t in s]) for s in o) for o in m)


def _untag_sem(m):
    return frozenset(frozenset(tuple([tt[0] for tt in s]) for s in o) for o in m)


def seq_combine(m1, m2, cfg=DEFAULT_CONFIG):
    """Weak sequencing of two semantics."""
    shuffle = _cached_shuffler(_weak, cfg.max_choices)
    tagged = _combine(_tag_sem(m1, 1), _tag_sem(m2, 2), shuffle, cfg)
    return normalize(_untag_sem(tagged), cfg, literal_fold=False)


def block_combine(labels, bodies, order, cfg=DEFAULT_CONFIG, label_order=None):
    """Tagged n-ary interleaving filtered by the strict closure of ``order``."""
    labels = [str(l) for l in labels]
    closure = transitive_closure(labels, order)

    def must_precede(x, y):
        return x[1] != y[1] and y[1] in closure.get(x[1], ())

    seq = list(label_order) if label_order is not None else sorted(labels, key=label_key)
    # silent parts are units of interleaving; their edges survive in the closure
    seq = [l for l in seq if bodies[l] != TAU_SEM] or seq[:1]
    ranked = sorted(seq, key=lambda l: len(closure.get(l, ()) & set(seq)), reverse=True)
    if all(b in closure.get(a, ()) for a, b in zip(ranked, ranked[1:])):
        # a total order leaves exactly one admissible shuffle: concatenation
        acc = bodies[ranked[0]]
        for l in ranked[1:]:
            acc = concat(acc, bodies[l])
        return normalize(acc, cfg, literal_fold=False)
    shuffle = _cached_shuffler(must_precede, cfg.max_choices)
    acc = _tag_sem(bodies[seq[0]], seq[0])
    for l in seq[1:]:
        acc = _combine(acc, _tag_sem(bodies[l], l), shuffle, cfg)
    return normalize(_untag_sem(acc), cfg, literal_fold=False)


def loop_eval(c, body_sem, cfg=DEFAULT_CONFIG, path="loop"):
    if body_sem == TAU_SEM:
        # iterating a silent body requires nothing, whatever the guard says
        return TAU_SEM
    stop = frozenset({frozenset({(Cond(negate(c)),)})})
    x = stop
    for _ in range(cfg.loop_bound):
        x = normalize(guarded(c, seq_combine(body_sem, x, cfg), stop), cfg, literal_fold=False)
        _check(x, cfg, path)
    return x


def critical_sem(m, cfg=DEFAULT_CONFIG):
    flat = normalize(frozenset(frozenset(unwrap(t) for t in o) for o in m), cfg)
    return frozenset(
        frozenset((Crit(t),) if t else EPSILON for t in o) for o in flat
    )


# --------------------------------------------------------------------------
# The evaluator


def evaluate(d, cfg=DEFAULT_CONFIG):
    """The set of alternative obligations of diagram ``d``."""
    return _evaluate(d, cfg, "sd")


_CACHE = {}
_CACHE_LIMIT = 2048


def clear_cache():
    _CACHE.clear()


def _evaluate(d, cfg, path):
    if isinstance(d, (Tau, Ev)):
        return _evaluate_node(d, cfg, path)
    key = (d, cfg)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    try:
        result = _check(_evaluate_node(d, cfg, path), cfg, path)
    except SizeBudgetExceeded as exc:
        if exc.path is None:
            raise SizeBudgetExceeded(str(exc), path) from None
        raise
    if len(_CACHE) >= _CACHE_LIMIT:
        _CACHE.clear()
    _CACHE[key] = result
    return result


def _evaluate_node(d, cfg, path):
    if isinstance(d, Tau):
        return TAU_SEM
    if isinstance(d, Ev):
        return frozenset({frozenset({(d.event,)})})
    if isinstance(d, Strict):
        m1 = _evaluate(d.left, cfg, path + "/strict#0")
        m2 = _evaluate(d.right, cfg, path + "/strict#1")
        return normalize(concat(m1, m2), cfg)
    if isinstance(d, Critical):
        return critical_sem(_evaluate(d.body, cfg, path + "/critical"), cfg)
    if isinstance(d, Alt):
        m1 = _evaluate(d.then, cfg, path + "/alt#0")
        m2 = _evaluate(d.orelse, cfg, path + "/alt#1")
        neg = frozenset(frozenset((Cond(negate(d.cond)),) + t for t in o) for o in m2)
        return normalize(guarded(d.cond, m1, neg), cfg)
    if isinstance(d, Opt):
        m1 = _evaluate(d.body, cfg, path + "/opt")
        stop = frozenset({frozenset({(Cond(negate(d.cond)),)})})
        return normalize(guarded(d.cond, m1, stop), cfg)
    if isinstance(d, Par):
        m1 = _evaluate(d.left, cfg, path + "/par#0")
        m2 = _evaluate(d.right, cfg, path + "/par#1")
        return normalize(par_sem(m1, m2, cfg), cfg, literal_fold=False)
    if isinstance(d, Seq):
        m1 = _evaluate(d.left, cfg, path + "/seq#0")
        m2 = _evaluate(d.right, cfg, path + "/seq#1")
        return seq_combine(m1, m2, cfg)
    if isinstance(d, Loop):
        body = _evaluate(d.body, cfg, path + "/loop")
        return loop_eval(d.cond, body, cfg, path)
    if isinstance(d, Block):
        bodies = {l: _evaluate(b, cfg, f"{path}/block[{l}]") for l, b in d.parts}
        return block_combine([l for l, _ in d.parts], bodies, d.order, cfg)
    raise TypeError(f"not a sequence diagram: {d!r}")
