import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from sdconform import model as M
from sdconform.model import Atom, Ev, Event, NotC, TRUE
from sdconform.semantics import EvalConfig
from sdconform.traces import Cond, Crit

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "sdconform" / "fixtures"

settings.register_profile(
    "sdconform", deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much,
                           HealthCheck.data_too_large])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "sdconform"))

SMALL = EvalConfig(loop_bound=1, max_obligations=20_000, max_traces_per_obligation=2_000)


@pytest.fixture
def fixtures():
    return FIXTURES


def fx(name):
    return FIXTURES / name


def load(name):
    from sdconform.frontend import load_file

    return load_file(fx(name))[1]


def snd(m, s="A", r="B", params=()):
    return M.send(m, s, r, params)


def rcv(m, s="A", r="B", params=()):
    return M.receive(m, s, r, params)


def ev(m, s="A", r="B"):
    return Ev(snd(m, s, r))


def atom(v, lit="true"):
    return Atom(v, "=", lit)


def C(c):
    return Cond(c)


# --------------------------------------------------------------------------
# strategies

LIFELINES = ("A", "B", "C")
MESSAGES = ("m", "n", "p")

events = st.builds(
    Event,
    kind=st.sampled_from((M.SEND, M.RECEIVE)),
    message=st.sampled_from(MESSAGES),
    sender=st.sampled_from(LIFELINES),
    receiver=st.sampled_from(LIFELINES),
    params=st.just(()),
)

# a fixed alphabet keeps generated diagrams comparable
ALPHABET = (snd("m", "A", "B"), rcv("m", "A", "B"), snd("n", "B", "C"), rcv("n", "B", "C"))
alphabet_events = st.sampled_from(ALPHABET)

atoms = st.builds(Atom, left=st.sampled_from(("x", "y")), rel=st.just("="),
                  right=st.sampled_from(("true", "1")))
conditions = st.recursive(
    st.one_of(atoms, st.just(TRUE)),
    lambda inner: st.one_of(st.builds(NotC, inner), st.builds(M.AndC, inner, inner),
                            st.builds(M.OrC, inner, inner)),
    max_leaves=3,
)
simple_conditions = st.one_of(atoms, st.builds(NotC, atoms))


def flat_tokens(evs=alphabet_events):
    return st.one_of(evs, st.builds(Cond, simple_conditions))


def traces(max_len=6, evs=alphabet_events, crit=True):
    tok = flat_tokens(evs)
    if crit:
        seg = st.lists(tok, min_size=1, max_size=3).map(lambda ts: Crit(tuple(ts)))
        tok = st.one_of(tok, tok, seg)
    return st.lists(tok, max_size=max_len).map(tuple)


def diagrams(max_leaves=4, evs=alphabet_events, loops=True, blocks=True):
    leaves = st.one_of(st.builds(Ev, evs), st.builds(Ev, evs), st.just(M.Tau()))

    def extend(inner):
        opts = [
            st.builds(M.Opt, simple_conditions, inner),
            st.builds(M.Alt, simple_conditions, inner, inner),
            st.builds(M.Critical, inner),
            st.builds(M.Par, inner, inner),
            st.builds(M.Strict, inner, inner),
            st.builds(M.Seq, inner, inner),
        ]
        if loops:
            opts.append(st.builds(M.Loop, simple_conditions, inner))
        if blocks:
            opts.append(st.builds(lambda a, b, o: M.block({"1": a, "2": b}, o),
                                  inner, inner, st.sampled_from([(), (("1", "2"),), (("2", "1"),)])))
        return st.one_of(*opts)

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def event_free_diagrams(max_leaves=4):
    def extend(inner):
        return st.one_of(
            st.builds(M.Opt, simple_conditions, inner),
            st.builds(M.Alt, simple_conditions, inner, inner),
            st.builds(M.Loop, simple_conditions, inner),
            st.builds(M.Critical, inner),
            st.builds(M.Par, inner, inner),
            st.builds(M.Strict, inner, inner),
            st.builds(M.Seq, inner, inner),
        )

    return st.recursive(st.just(M.Tau()), extend, max_leaves=max_leaves)


# --------------------------------------------------------------------------
# acceptance reporting: one PASS/FAIL line per criterion


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): an acceptance criterion")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    n, title = mark.args
    entry = item.config._criteria.setdefault(n, {"title": title, "ok": True, "notes": []})
    if rep.failed:
        entry["ok"] = False
        entry["notes"].append(f"failed: {item.name}")
    entry["notes"].extend(v for k, v in item.user_properties if k == "note")


def pytest_terminal_summary(terminalreporter, config):
    crit = getattr(config, "_criteria", {})
    if not crit:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(crit):
        c = crit[n]
        terminalreporter.write_line(f"criterion {n:>2}  {'PASS' if c['ok'] else 'FAIL'}  {c['title']}")
        for note in dict.fromkeys(c["notes"]):
            terminalreporter.write_line(f"              {note}")
