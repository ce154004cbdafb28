import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from itskit import kernels
from itskit.core import (
    Labeling,
    Partition,
    StateRelabeledTS,
    TransitionSystem,
    check_sufficiency,
    common_refinement,
    refines,
)
from itskit.errors import InvalidInput, NondeterministicInput, TooLarge
from itskit.history import build_history_tree, label_tree
from itskit.refinement import (
    STRICT,
    WILDCARD,
    NoSufficientRefinement,
    brute_force_msr,
    certify_minimality,
    exhaustive_min_sufficient,
    minimal_sufficient_refinement,
    sufficient_refinement_general,
)
from itskit.worlds import consistency_machine, random_transition_system

from .strategies import automata, labeled, labelings, relations


def test_already_sufficient_is_fixed_point():
    ts = TransitionSystem(3, ["a"], [(0, 0, 1), (1, 0, 2), (2, 0, 2)])
    srts = StateRelabeledTS(ts, Labeling.identity(3))
    res = minimal_sufficient_refinement(srts)
    assert res.partition == Partition.identity(3)
    assert res.iterations == 0 and res.sufficient


def test_constant_labeling_stays_one_block():
    ts = TransitionSystem(4, ["a", "b"], [(s, a, (s + a + 1) % 4) for s in range(4) for a in range(2)])
    res = minimal_sufficient_refinement(StateRelabeledTS(ts, Labeling.constant(4)))
    assert res.partition.block_count == 1


def test_redundant_gate_machine_realization():
    m = consistency_machine(redundant=True)
    srts = StateRelabeledTS(m.ts, m.labeling)
    res = minimal_sufficient_refinement(srts)
    oracle = brute_force_msr(srts)
    assert oracle.unique
    assert res.partition == oracle.partition
    names = [[m.ts.states[s] for s in blk] for blk in res.partition.blocks]
    assert names == [["init"], ["lastR0", "lastR1"], ["lastG0", "lastG1"], ["trapA", "trapB"]]


def test_nondeterministic_input_rejected():
    ts = TransitionSystem(2, ["a"], [(0, 0, 0), (0, 0, 1)])
    with pytest.raises(NondeterministicInput):
        minimal_sufficient_refinement(StateRelabeledTS(ts, Labeling.identity(2)))


def test_unknown_mode_rejected():
    ts = TransitionSystem(1, ["a"], [(0, 0, 0)])
    with pytest.raises(InvalidInput):
        minimal_sufficient_refinement(StateRelabeledTS(ts, Labeling.identity(1)), "hopeful")


def test_general_reports_permanent_conflict():
    ts = TransitionSystem(3, ["a"], [(0, 0, 1), (0, 0, 2), (1, 0, 1), (2, 0, 2)])
    srts = StateRelabeledTS(ts, Labeling(["s", "x", "y"]))
    res = sufficient_refinement_general(srts)
    assert isinstance(res, NoSufficientRefinement)
    assert res.state == 0 and res.replay(srts)
    assert brute_force_msr(srts).partition is None


def test_brute_force_bound():
    ts = TransitionSystem(11, ["a"], [(s, 0, s) for s in range(11)])
    with pytest.raises(TooLarge):
        brute_force_msr(StateRelabeledTS(ts, Labeling.constant(11)))


def test_three_state_sufficient_labeling_unique():
    ts = TransitionSystem(3, ["a"], [(0, 0, 1), (1, 0, 0), (2, 0, 2)])
    srts = StateRelabeledTS(ts, Labeling(["p", "p", "q"]))
    res = brute_force_msr(srts)
    assert res.partition == Partition([0, 0, 1]) and res.unique


def test_certificate_reports_mergeable_pair():
    ts = TransitionSystem(2, ["a"], [(0, 0, 1), (1, 0, 0)])
    srts = StateRelabeledTS(ts, Labeling.constant(2))
    cert = certify_minimality(srts, Partition.identity(2))
    assert not cert.minimal
    assert cert.mergeable == (0, 1)


def test_certificate_preconditions():
    ts = TransitionSystem(2, ["a"], [(0, 0, 1), (1, 0, 1)])
    srts = StateRelabeledTS(ts, Labeling(["x", "y"]))
    with pytest.raises(InvalidInput):
        certify_minimality(srts, Partition.constant(2))


def gate_tree(depth):
    tree = build_history_tree([], ["r", "g"], depth=depth, view="observations")
    return tree, StateRelabeledTS(tree.ts, label_tree(consistency_machine(), tree))


def test_wildcard_depth_stability():
    parts = []
    for d in (4, 5, 6):
        tree, srts = gate_tree(d)
        res = minimal_sufficient_refinement(srts, WILDCARD)
        assert res.sufficient and res.partition.block_count == 4
        parts.append(res.partition.block_of[:31])
    assert parts[0] == parts[1] == parts[2]


def test_wildcard_matches_exhaustive_search_depth4():
    _, srts = gate_tree(4)
    oracle = exhaustive_min_sufficient(srts)
    assert oracle.unique
    assert minimal_sufficient_refinement(srts, WILDCARD).partition == oracle.partition


def test_strict_mode_on_truncated_tree():
    # absent successors count as a signature entry, so depth leaks into the classes
    tree, srts = gate_tree(4)
    strict = minimal_sufficient_refinement(srts, STRICT)
    wild = minimal_sufficient_refinement(srts, WILDCARD)
    assert strict.sufficient
    assert refines(strict.partition, srts.labeling.partition)
    assert strict.partition.block_count > wild.partition.block_count
    assert strict.partition.block_count == 11


@given(labeled(automata(max_states=8, max_symbols=3)))
def test_oracle_equivalence(srts):
    res = minimal_sufficient_refinement(srts)
    oracle = brute_force_msr(srts)
    assert oracle.unique
    assert res.partition == oracle.partition


@given(labeled(automata(max_states=8, max_symbols=3, full=False)))
def test_strict_matches_brute_force_on_partial_automata(srts):
    # strict mode is sound but may split more than the literal definition requires
    res = minimal_sufficient_refinement(srts)
    assert res.sufficient
    assert refines(res.partition, srts.labeling.partition)
    oracle = brute_force_msr(srts)
    assert res.partition.block_count >= oracle.partition.block_count


@given(labeled(automata()))
def test_output_refines_and_is_stable(srts):
    res = minimal_sufficient_refinement(srts)
    assert refines(res.partition, srts.labeling.partition)
    assert check_sufficiency(srts.relabel(res.partition)) is None
    again = minimal_sufficient_refinement(srts.relabel(res.partition))
    assert again.iterations == 0 and again.partition == res.partition


@given(labeled(automata()), st.randoms(use_true_random=False))
def test_state_order_independence(srts, rnd):
    ts = srts.ts
    n = ts.n_states
    perm = list(range(n))
    rnd.shuffle(perm)
    inv = {p: i for i, p in enumerate(perm)}
    shuffled = TransitionSystem(n, ts.alphabet, [(inv[s], a, inv[t]) for s, a, t in ts.transitions])
    lab = Labeling([srts.labeling[perm[i]] for i in range(n)])
    res = minimal_sufficient_refinement(srts).partition
    res2 = minimal_sufficient_refinement(StateRelabeledTS(shuffled, lab)).partition
    assert Partition([res2.block_of[inv[s]] for s in range(n)]) == res


@given(automata().flatmap(lambda ts: st.tuples(st.just(ts), labelings(ts.n_states), labelings(ts.n_states))))
def test_monotonicity(args):
    ts, a, b = args
    fine = common_refinement(a.partition, b.partition).to_labeling()
    msr_fine = minimal_sufficient_refinement(StateRelabeledTS(ts, fine)).partition
    msr_b = minimal_sufficient_refinement(StateRelabeledTS(ts, b)).partition
    assert refines(msr_fine, msr_b)


@given(labeled(automata()))
def test_general_agrees_on_automata(srts):
    assert sufficient_refinement_general(srts).partition == minimal_sufficient_refinement(srts).partition


def test_general_nondeterministic_against_oracle():
    found = 0
    for seed in range(300):
        ts = random_transition_system(6, 2, seed, density=0.2)
        lab = Labeling([random.Random(seed).randrange(2) for _ in range(6)])
        srts = StateRelabeledTS(ts, lab)
        res = sufficient_refinement_general(srts)
        oracle = brute_force_msr(srts)
        if isinstance(res, NoSufficientRefinement):
            assert res.replay(srts)
            assert oracle.partition is None
            continue
        found += 1
        assert res.sufficient and refines(res.partition, lab.partition)
        assert oracle.partition is not None
        assert res.partition.block_count >= oracle.partition.block_count
    assert found > 20


@given(labeled(relations()))
def test_exhaustive_search_agrees_with_enumeration(srts):
    a = exhaustive_min_sufficient(srts)
    b = brute_force_msr(srts)
    if b.partition is None:
        assert a.partition is None
    else:
        assert a.partition.block_count == b.partition.block_count
        assert check_sufficiency(srts.relabel(a.partition)) is None


@given(labeled(automata(max_states=7)))
def test_certificate_agrees_with_oracle_on_automata(srts):
    res = minimal_sufficient_refinement(srts)
    assert certify_minimality(srts, res.partition).minimal
    fine = Partition.identity(srts.ts.n_states)
    if check_sufficiency(srts.relabel(fine)) is None:
        cert = certify_minimality(srts, fine)
        assert cert.minimal == (res.partition == fine)


def test_pairwise_merges_miss_three_way_merge():
    ts = TransitionSystem(3, ["a"], [(0, 0, 2), (1, 0, 0), (2, 0, 1)])
    srts = StateRelabeledTS(ts, Labeling.constant(3))
    cert = certify_minimality(srts, Partition.identity(3))
    assert set(cert.reasons().values()) == {"sufficiency"}
    assert not cert.minimal
    assert cert.coarser == Partition.constant(3)


@pytest.mark.parametrize("backend", ["python", "cython"])
def test_backends_agree_on_gate_tree(backend):
    if backend == "cython" and kernels.BACKEND != "cython":
        pytest.skip("compiled kernel not built")
    _, srts = gate_tree(6)
    res = minimal_sufficient_refinement(srts, WILDCARD, backend=backend)
    assert res.partition.block_count == 4
