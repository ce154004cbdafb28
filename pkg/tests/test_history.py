import pytest
from hypothesis import given
from hypothesis import strategies as st

from itskit.core import check_determinism, check_sufficiency, violation_at
from itskit.errors import AlphabetMismatch, InconsistentTrials, InvalidInput, SizeLimit
from itskit.filters import run_filter
from itskit.history import (
    ALTERNATING,
    OBSERVATIONS,
    PAIRS,
    UNLABELED,
    HistoryState,
    Trial,
    apply_task_machine,
    build_history_tree,
    hist_transition,
    label_tree,
    learn_dits_from_trials,
    project,
    tree_size,
)
from itskit.refinement import STRICT, WILDCARD, minimal_sufficient_refinement
from itskit.worlds import GateWorldConfig, consistency_machine, gate_trials, gate_world, lift_machine


def obs(*ys):
    return HistoryState(None, tuple(("y", y) for y in ys))


def test_tree_counts():
    assert build_history_tree([], ["r", "g"], depth=3, view=OBSERVATIONS).n_nodes == 15
    assert build_history_tree(["a", "b"], ["0", "1"], depth=2, view=PAIRS).n_nodes == 11


@pytest.mark.parametrize("view", [OBSERVATIONS, PAIRS, ALTERNATING])
@pytest.mark.parametrize("depth", [1, 2, 3])
def test_tree_shape(view, depth):
    tree = build_history_tree(["a", "b", "c"], ["0", "1"], depth=depth, view=view)
    assert tree.n_nodes == tree_size(view, 3, 2, depth)
    assert tree.is_tree() and tree.interior_full()
    assert all(tree.histories[s].stage == depth for s in tree.frontier)
    assert check_determinism(tree.ts) is None


def test_tree_size_cap():
    with pytest.raises(SizeLimit):
        build_history_tree(["a", "b"], ["0", "1"], depth=12, max_nodes=1000)


def test_tree_bad_inputs():
    with pytest.raises(InvalidInput):
        build_history_tree(["a"], [], depth=2)
    with pytest.raises(InvalidInput):
        build_history_tree(["a"], ["0"], depth=0)
    with pytest.raises(InvalidInput):
        build_history_tree(["a/b"], ["0"], depth=1)


def test_model_based_root_tag():
    tree = build_history_tree(["a"], ["0"], init=[3, 1, 3], depth=1)
    assert tree.init == (1, 3)
    assert all(h.init == (1, 3) for h in tree.histories)


def test_hist_transition_concatenates():
    eta = obs("r")
    nxt = hist_transition(eta, "u1", "g")
    assert nxt.events == (("y", "r"), ("u", "u1"), ("y", "g"))
    assert nxt.stage == 2 and eta.stage == 1
    root = HistoryState()
    assert hist_transition(root, None, "r").stage == 1
    assert hist_transition(obs("r"), "u", "g") != hist_transition(obs("g"), "u", "g")


def test_hist_transition_errors():
    with pytest.raises(AlphabetMismatch):
        hist_transition(HistoryState(), "u", "r")
    with pytest.raises(AlphabetMismatch):
        hist_transition(obs("r"), None, "x", Y=["r", "g"])
    with pytest.raises(AlphabetMismatch):
        hist_transition(obs("r"), "jump", "g", U=["walk"])
    with pytest.raises(InvalidInput):
        HistoryState(None, (("u", "a"),))


def test_projection_views():
    events = [("y", "r"), ("u", "a"), ("y", "g")]
    assert project(events, OBSERVATIONS) == ["r", "g"]
    assert project(events, PAIRS) == ["r", "a/g"]
    assert project(events, ALTERNATING) == ["r", "a", "g"]
    assert project(events, PAIRS, start=1) == ["a/g"]


def test_consistency_machine_runs():
    m = consistency_machine()
    assert apply_task_machine(m, obs("r", "g", "r", "g")) == "consistent"
    assert apply_task_machine(m, obs("r", "r")) == "inconsistent"
    assert apply_task_machine(m, obs("r", "r", "g", "r")) == "inconsistent"
    assert apply_task_machine(m, HistoryState()) == "consistent"


def test_constant_machine_gives_constant_labels():
    m = consistency_machine()
    trap_only = type(m)(m.ts, ["x"] * 4)
    tree = build_history_tree([], ["r", "g"], depth=3, view=OBSERVATIONS)
    assert label_tree(trap_only, tree).label_count == 1


def test_example_tree_labeling_insufficient():
    tree = build_history_tree([], ["r", "g"], depth=4, view=OBSERVATIONS)
    srts = tree.labeled(label_tree(consistency_machine(), tree))
    v = check_sufficiency(srts)
    assert v is not None and v.replay(srts)
    # (r,g) and (r,g,r) are both consistent, but appending r splits them
    s, q = tree.node_of_observations("rg"), tree.node_of_observations("rgr")
    w = violation_at(srts, s, q, tree.ts.symbol_id("r"))
    assert w is not None


@given(st.sampled_from([OBSERVATIONS, PAIRS, ALTERNATING]), st.integers(1, 3))
def test_memoized_labels_match_direct_evaluation(view, depth):
    m = consistency_machine()
    if view != OBSERVATIONS:
        m = lift_machine(m, view, ["a", "b"])
    tree = build_history_tree(["a", "b"], ["r", "g"], depth=depth, view=view)
    lab = label_tree(m, tree)
    for node, h in enumerate(tree.histories):
        assert lab.name_of(node) == apply_task_machine(m, h)


def test_pairs_machine_cannot_read_observation_tree():
    m = lift_machine(consistency_machine(), PAIRS, ["a"])
    tree = build_history_tree([], ["r", "g"], depth=2, view=OBSERVATIONS)
    with pytest.raises(AlphabetMismatch):
        label_tree(m, tree)


def test_single_trial_gives_chain():
    t = Trial.from_observations("rgrg", {k: f"s{k}" for k in range(5)})
    learned = learn_dits_from_trials([t])
    assert learned.dits.n_states == 5
    assert learned.dits.outputs == ("s0", "s1", "s2", "s3", "s4")


def test_conflicting_trials_rejected():
    a = Trial.from_observations("rg", {2: "good"})
    b = Trial.from_observations("rgg", {2: "bad"})
    with pytest.raises(InconsistentTrials):
        learn_dits_from_trials([a, b])


def test_terminal_labels_only():
    # unlabeled prefixes become one extra class in strict mode
    trials = [Trial.from_observations(w, {len(w): "end"}) for w in ("rr", "rg", "gr", "gg")]
    learned = learn_dits_from_trials(trials, STRICT)
    assert set(learned.dits.outputs) == {UNLABELED, "end"}


def replay_ok(learned, trials):
    for t in trials:
        run = run_filter(learned.dits, t)
        for k, lab in t.labels.items():
            if run.outputs[k] != lab:
                return False
    return True


def test_learning_matches_tree_refinement_depth6():
    model = gate_world(GateWorldConfig(2))
    trials = gate_trials(model, 6, view=OBSERVATIONS)
    learned = learn_dits_from_trials(trials, WILDCARD, view=OBSERVATIONS, alphabet=("r", "g"))
    tree = build_history_tree([], ["r", "g"], depth=6, view=OBSERVATIONS)
    srts = tree.labeled(label_tree(consistency_machine(), tree))
    assert learned.tree.transitions == tree.ts.transitions
    assert learned.partition == minimal_sufficient_refinement(srts, WILDCARD).partition
    assert learned.dits.n_states == 4
    assert replay_ok(learned, trials)


def test_learning_pairs_view_replays():
    model = gate_world(GateWorldConfig(4))
    trials = gate_trials(model, 4)
    learned = learn_dits_from_trials(trials, STRICT)
    assert learned.sufficient
    assert replay_ok(learned, trials)


def test_trial_validation():
    with pytest.raises(InvalidInput):
        Trial.from_observations("rg", {5: "x"})
    t = Trial((("y", "r"), ("u", "a"), ("y", "g")), {0: "x"})
    assert t.stages == 2 and t.prefix(1) == (("y", "r"),) and t.prefix(0) == ()
