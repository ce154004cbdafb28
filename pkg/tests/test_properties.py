"""Cross-module invariants over generated models, machines and plans."""
from hypothesis import given
from hypothesis import strategies as st

from itskit.core import TransitionSystem, check_determinism
from itskit.filters import DITS, derive_dits, localization_machine, run_filter
from itskit.history import OBSERVATIONS, PAIRS, TaskMachine, build_history_tree, label_tree, learn_dits_from_trials, view_alphabet
from itskit.plan import PolicyDITS, check_feasible, couple_and_run, synthesize_policy
from itskit.refinement import MODES, minimal_sufficient_refinement
from itskit.worlds import gate_trials, lift_machine

from .strategies import external_models


@st.composite
def full_plans(draw, model, max_states=5):
    n = draw(st.integers(2, max_states))
    alphabet = view_alphabet(PAIRS, model.actions, model.observations)
    triples = [(s, a, draw(st.integers(1, n - 1))) for s in range(n) for a in range(len(alphabet))]
    policy = [None] + [draw(st.integers(0, len(model.actions) - 1)) for _ in range(n - 1)]
    dits = DITS(TransitionSystem(n, alphabet, triples), 0, None, PAIRS)
    return PolicyDITS(dits, tuple(policy), model.actions)


@st.composite
def obs_machines(draw, observations, max_states=4):
    n = draw(st.integers(1, max_states))
    triples = [(s, a, draw(st.integers(0, n - 1))) for s in range(n) for a in range(len(observations))]
    outputs = draw(st.lists(st.sampled_from(["goal", "busy"]), min_size=n, max_size=n))
    return TaskMachine(TransitionSystem(n, observations, triples), outputs, 0, OBSERVATIONS,
                       frozenset({"goal"}))


@given(external_models(max_obs=2), st.data())
def test_coupled_replay(model, data):
    plan = data.draw(full_plans(model))
    task = lift_machine(data.draw(obs_machines(model.observations)), PAIRS, model.actions)
    for x in range(model.n_states):
        tr = couple_and_run(model, plan, task, x, max_steps=20)
        assert tr.verify(model, plan, task)
        assert tr.reason in ("goal", "cycle", "horizon")


@given(external_models(max_states=5, max_obs=2), st.data())
def test_synthesis_sound(model, data):
    X0 = sorted(data.draw(st.sets(st.integers(0, model.n_states - 1), min_size=1)))
    task = localization_machine(model, X0)
    res = synthesize_policy(model, X0, task)
    if res.feasible:
        assert check_feasible(model, res.plan, task, X0).feasible
    else:
        assert res.losing and res.plan is None


@given(st.sampled_from(MODES), st.data())
def test_derived_filter_commutes(mode, data):
    machine = data.draw(obs_machines(("r", "g")))
    tree = build_history_tree([], ["r", "g"], depth=4, view=OBSERVATIONS)
    lab = label_tree(machine, tree)
    part = minimal_sufficient_refinement(tree.labeled(lab), mode).partition
    d = derive_dits(tree, part, lab)
    assert check_determinism(d.ts) is None
    for node, h in enumerate(tree.histories):
        assert run_filter(d, h.events).outputs[-1] == lab.name_of(node)


@given(external_models(max_states=4, max_actions=2, max_obs=2), st.data())
def test_learned_filter_replays_trials(model, data):
    machine = data.draw(obs_machines(model.observations))
    trials = gate_trials(model, 3, machine)
    learned = learn_dits_from_trials(trials)
    assert learned.sufficient
    for t in trials:
        outs = run_filter(learned.dits, t).outputs
        assert all(outs[k] == lab for k, lab in t.labels.items())
