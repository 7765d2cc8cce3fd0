from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sdconform.conditions import conj, disj
from sdconform.simulation import (
    SimWitness, brute_force_simulates, check_witness, simulates, unwrap_step_preserved,
)
from sdconform.traces import Cond, Crit, unwrap_steps

from conftest import atom, simple_conditions, snd, traces

e1, e2, e3 = snd("e1"), snd("e2"), snd("e3")
c = Cond(atom("c"))


def test_identical_traces():
    assert simulates((e1, e3), (e1, e3))


def test_condition_in_t1_needs_a_match():
    assert not simulates((c, e1), (e1,))


def test_event_between_blocks_segment():
    assert not simulates((Crit((e1, e2, e3)),), (Crit((e1, e3)),))


def test_extra_condition_in_t2():
    ok, w = simulates((e1,), (c, e1), witness=True)
    assert ok and w.eta == (1,)


def test_segment_unwraps_onto_plain_events():
    ok, w = simulates((Crit((e1, e3)),), (e1, e3), witness=True)
    assert ok and w.unwrap_choices == {0}
    assert check_witness((Crit((e1, e3)),), (e1, e3), w)


def test_segment_with_condition_inside_target():
    assert simulates((Crit((e1, e3)),), (Crit((e1, c, e3)),))


def test_plain_events_do_not_match_segment():
    assert not simulates((e1, e3), (Crit((e1, e3)),))


def test_weaker_condition_simulates_stronger():
    strong = Cond(conj(atom("p"), atom("k")))
    assert simulates((Cond(atom("p")), e1), (strong, e1))
    assert not simulates((strong, e1), (Cond(atom("p")), e1))


def test_empty_traces():
    assert simulates((), ())
    assert simulates((), (c,))
    assert not simulates((), (e1,))
    assert not simulates((e1,), ())


def test_extra_observable_rejected():
    assert not simulates((e1, e2, e3), (e1, e3))


def test_witness_describe():
    ok, w = simulates((e1,), (c, e1), witness=True)
    assert "0:" in w.describe((e1,), (c, e1))


def test_bad_witness_rejected():
    assert not check_witness((e1,), (c, e1), SimWitness(frozenset(), (0,)))
    assert not check_witness((e1, e3), (e1, e3), SimWitness(frozenset(), (1, 0)))


def test_unwrap_step_examples():
    seg = Crit((e1,))
    assert unwrap_step_preserved((seg,), (seg,), (e1,))
    assert unwrap_step_preserved((e1,), (e1,), (e1,)) is False  # vacuous: no step in either


# --------------------------------------------------------------------------
# generators of simulating pairs


@st.composite
def weaker_than(draw, t):
    """A trace that simulates ``t``: drop or weaken conditions, wrap plain runs."""
    out = []
    for tok in t:
        if isinstance(tok, Cond):
            choice = draw(st.sampled_from(("keep", "drop", "weaken")))
            if choice == "keep":
                out.append(tok)
            elif choice == "weaken":
                out.append(Cond(disj(tok.cond, draw(simple_conditions))))
        elif isinstance(tok, Crit):
            inner = [x for x in tok.tokens
                     if not (isinstance(x, Cond) and draw(st.booleans()))]
            out.append(Crit(tuple(inner)))
        else:
            out.append(tok)
    # wrap one run of plain tokens into a segment
    plain = [i for i, x in enumerate(out) if not isinstance(x, Crit)]
    if plain and draw(st.booleans()):
        i = draw(st.sampled_from(plain))
        j = i
        while j + 1 < len(out) and not isinstance(out[j + 1], Crit) and draw(st.booleans()):
            j += 1
        out[i:j + 1] = [Crit(tuple(out[i:j + 1]))]
    return tuple(out)


@st.composite
def chains(draw):
    t3 = draw(traces(max_len=5))
    t2 = draw(weaker_than(t3))
    t1 = draw(weaker_than(t2))
    return t1, t2, t3


@settings(max_examples=500)
@given(traces(max_len=6))
def test_reflexive(t):
    assert simulates(t, t)


@settings(max_examples=500)
@given(chains())
def test_transitive_on_chains(triple):
    t1, t2, t3 = triple
    assert simulates(t2, t3)
    assert simulates(t1, t2)
    assert simulates(t1, t3)


@settings(max_examples=500)
@given(traces(max_len=4), traces(max_len=4), traces(max_len=4))
def test_transitive_random(t1, t2, t3):
    if simulates(t1, t2) and simulates(t2, t3):
        assert simulates(t1, t3)


@settings(max_examples=500)
@given(traces(max_len=6), traces(max_len=6))
def test_memoised_matches_brute_force(t1, t2):
    assert simulates(t1, t2) == brute_force_simulates(t1, t2)


@settings(max_examples=500)
@given(traces(max_len=5).flatmap(lambda t: st.tuples(weaker_than(t), st.just(t))))
def test_memoised_matches_brute_force_on_positive_pairs(pair):
    t1, t2 = pair
    assert simulates(t1, t2) == brute_force_simulates(t1, t2) is True


@settings(max_examples=500)
@given(traces(max_len=6).flatmap(lambda t: st.tuples(weaker_than(t), st.just(t))))
def test_witness_sound(pair):
    t1, t2 = pair
    ok, w = simulates(t1, t2, witness=True)
    assert ok and check_witness(t1, t2, w)


@st.composite
def unwrap_triples(draw):
    a2 = draw(traces(max_len=5))
    assume(any(isinstance(x, Crit) for x in a2))
    a1 = draw(weaker_than(a2))
    b2 = draw(st.sampled_from(unwrap_steps(a2)))
    return a1, a2, b2


@settings(max_examples=500)
@given(unwrap_triples())
def test_unwrap_step_preserved(triple):
    a1, a2, b2 = triple
    assert simulates(a1, a2)
    assert unwrap_step_preserved(a1, a2, b2)
