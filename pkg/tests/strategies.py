"""Hypothesis strategies for systems, labelings and partitions."""
from hypothesis import strategies as st

from itskit.core import Labeling, Partition, StateRelabeledTS, TransitionSystem


@st.composite
def automata(draw, max_states=8, max_symbols=3, full=True):
    n = draw(st.integers(1, max_states))
    k = draw(st.integers(1, max_symbols))
    triples = []
    for s in range(n):
        for a in range(k):
            if full or draw(st.booleans()):
                triples.append((s, a, draw(st.integers(0, n - 1))))
    return TransitionSystem(n, [str(a) for a in range(k)], triples)


@st.composite
def relations(draw, max_states=6, max_symbols=2):
    n = draw(st.integers(1, max_states))
    k = draw(st.integers(1, max_symbols))
    triples = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, k - 1),
                                     st.integers(0, n - 1)), max_size=n * k * 2))
    return TransitionSystem(n, [str(a) for a in range(k)], triples)


def labelings(n, max_labels=3):
    return st.lists(st.integers(0, max_labels - 1), min_size=n, max_size=n).map(Labeling)


def partitions(n, max_blocks=None):
    hi = (max_blocks or n) - 1
    return st.lists(st.integers(0, max(hi, 0)), min_size=n, max_size=n).map(Partition)


@st.composite
def labeled(draw, systems=None, max_labels=3):
    ts = draw(systems if systems is not None else automata())
    lab = draw(labelings(ts.n_states, max_labels))
    return StateRelabeledTS(ts, lab)


@st.composite
def external_models(draw, max_states=6, max_actions=3, max_obs=3):
    from itskit.model import ExternalModel

    n = draw(st.integers(1, max_states))
    k = draw(st.integers(1, max_actions))
    m = draw(st.integers(1, max_obs))
    triples = [(s, a, draw(st.integers(0, n - 1))) for s in range(n) for a in range(k)]
    ts = TransitionSystem(n, [f"u{a}" for a in range(k)], triples)
    obs = draw(st.lists(st.integers(0, m - 1), min_size=n, max_size=n))
    return ExternalModel(ts, obs, [f"y{i}" for i in range(m)])


@st.composite
def policy_dits(draw, actions=("a", "b"), observations=("0", "1"), max_states=6):
    """Random pairs-view plan; state 0 is the initial I-state."""
    from itskit.filters import DITS
    from itskit.history import PAIRS, view_alphabet
    from itskit.plan import PolicyDITS

    n = draw(st.integers(1, max_states))
    alphabet = view_alphabet(PAIRS, actions, observations)
    triples = []
    for s in range(n):
        for a in range(len(alphabet)):
            if n > 1 and draw(st.booleans()):
                triples.append((s, a, draw(st.integers(1, n - 1))))
    policy = [None] + [draw(st.integers(0, len(actions) - 1)) for _ in range(n - 1)]
    return PolicyDITS(DITS(TransitionSystem(n, alphabet, triples), 0, None, PAIRS),
                      tuple(policy), actions)
