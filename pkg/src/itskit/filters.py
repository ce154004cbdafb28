"""Derived deterministic filters and the set-based nondeterministic filter."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .core import (
    Labeling,
    Partition,
    StateRelabeledTS,
    TransitionSystem,
    check_sufficiency,
)
from .errors import InconsistentObservation, InvalidInput, MissingTransition, NotSufficient, SizeLimit
from .history import PAIRS, VIEWS, HistoryTree, Trial, pair_symbol, project
from .model import ExternalModel


@dataclass(frozen=True)
class DITS:
    """A deterministic ITS: automaton, initial I-state and optional per-state outputs."""

    ts: TransitionSystem
    initial: int = 0
    outputs: Optional[tuple] = None
    view: str = PAIRS

    def __post_init__(self):
        if not self.ts.deterministic:
            raise InvalidInput("a DITS needs deterministic transitions")
        if not 0 <= self.initial < self.ts.n_states:
            raise InvalidInput("initial I-state out of range")
        if self.outputs is not None:
            object.__setattr__(self, "outputs", tuple(map(str, self.outputs)))
            if len(self.outputs) != self.ts.n_states:
                raise InvalidInput("outputs must be total")
        if self.view not in VIEWS:
            raise InvalidInput(f"unknown view {self.view!r}")

    @property
    def n_states(self) -> int:
        return self.ts.n_states

    def step(self, state: int, symbol: str, stage: Optional[int] = None) -> int:
        try:
            a = self.ts.symbol_id(symbol)
        except Exception:
            raise MissingTransition(state, symbol, stage) from None
        nxt = self.ts.step(state, a)
        if nxt is None:
            raise MissingTransition(state, symbol, stage)
        return nxt

    def output(self, state: int) -> Optional[str]:
        return None if self.outputs is None else self.outputs[state]


BeliefState = tuple  # canonical sorted tuple of external state ids


def belief(xs: Iterable[int]) -> BeliefState:
    return tuple(sorted(set(xs)))


@dataclass(frozen=True)
class FilterRun:
    states: tuple[int, ...]
    outputs: tuple


def derive_dits(tree: HistoryTree, p: Partition, labeling: Optional[Labeling] = None) -> DITS:
    """Quotient of the history tree by a sufficient partition.

    Blocks are named after their first (shortest) history.  Raises
    :class:`NotSufficient` carrying the violation when ``p`` is not
    sufficient on the tree.
    """
    if p.size != tree.n_nodes:
        raise InvalidInput("partition size differs from the tree")
    v = check_sufficiency(StateRelabeledTS(tree.ts, p.to_labeling()))
    if v is not None:
        raise NotSufficient(v)
    bo = p.block_of
    names = [tree.ts.states[blk[0]] for blk in p.blocks]
    triples = {(bo[s], a, bo[t]) for s, a, t in tree.ts.transitions}
    ts = TransitionSystem(names, tree.ts.alphabet, triples)
    outputs = None
    if labeling is not None:
        outputs = tuple(labeling.name_of(blk[0]) for blk in p.blocks)
    return DITS(ts, bo[0], outputs, tree.view)


def run_filter(d: DITS, trace) -> FilterRun:
    """Replay a trial (or raw event list) through ``d`` stage by stage."""
    events = trace.events if isinstance(trace, Trial) else tuple(tuple(e) for e in trace)
    states = [d.initial]
    for i, sym in enumerate(project(list(events), d.view)):
        states.append(d.step(states[-1], sym, i + 1))
    return FilterRun(tuple(states), tuple(d.output(s) for s in states))


def ndet_filter_step(model: ExternalModel, X: Sequence[int], u: int, y: int) -> BeliefState:
    """``X' = (union of f(x, u) over X) intersected with H(y)``."""
    if not X:
        raise InvalidInput("belief must be non-empty")
    out = model.image(X, u) & model.preimage(y)
    if not out:
        raise InconsistentObservation(
            f"no state in {list(X)} explains action {model.actions[u]!r} "
            f"followed by {model.observations[y]!r}")
    return belief(out)


UNLOCALIZED = "unlocalized"


def localization_label(model: ExternalModel, b: BeliefState, key=None) -> str:
    """A singleton's name (or ``key`` of it); every other belief shares one label."""
    keys = {model.states[x] if key is None else key(x) for x in b}
    return str(next(iter(keys))) if len(keys) == 1 else UNLOCALIZED


@dataclass(frozen=True)
class BeliefDITS(DITS):
    """Belief-graph filter; ``beliefs[i]`` is the state set of I-state ``i``.

    State 0 is the prior (before the first observation); its outgoing edges
    are observation-only, every other edge is an ``u/y`` pair.
    """

    beliefs: tuple = ()

    def belief_labeling(self, key=None, separate_prior: bool = False) -> Labeling:
        """One label per distinct belief, optionally compared through ``key``.

        With ``separate_prior`` the pre-observation state gets its own label.
        """
        vals = [frozenset(b if key is None else map(key, b)) for b in self.beliefs]
        if separate_prior:
            vals[0] = "prior"
        return Labeling(vals)


def reachable_belief_dits(model: ExternalModel, X0: Iterable[int], depth: int = 0,
                          max_states: int = 100_000, key=None) -> BeliefDITS:
    """Breadth-first closure of the set-based filter from ``X0``.

    ``depth`` bounds the number of action stages explored (0 = fixpoint).
    Outputs are localization labels: a singleton's state name, otherwise
    ``unlocalized``.
    """
    prior = belief(X0)
    if not prior:
        raise InvalidInput("initial belief must be non-empty")
    Y, U = model.observations, model.actions
    alphabet = Y + tuple(pair_symbol(u, y) for u in U for y in Y)
    beliefs = [prior]
    index: dict = {}
    triples = []
    level = {}
    queue: deque = deque()
    for yi in range(len(Y)):
        b = belief(set(prior) & model.preimage(yi))
        if not b:
            continue
        if b not in index:
            index[b] = len(beliefs)
            beliefs.append(b)
            level[b] = 1
            queue.append(b)
        triples.append((0, yi, index[b]))
    while queue:
        b = queue.popleft()
        if depth and level[b] > depth:
            continue
        for ui in range(len(U)):
            img = model.image(b, ui)
            for yi in range(len(Y)):
                nb = belief(img & model.preimage(yi))
                if not nb:
                    continue
                if nb not in index:
                    if len(beliefs) >= max_states:
                        raise SizeLimit(f"belief graph exceeds {max_states} states")
                    index[nb] = len(beliefs)
                    beliefs.append(nb)
                    level[nb] = level[b] + 1
                    queue.append(nb)
                triples.append((index[b], len(Y) + ui * len(Y) + yi, index[nb]))
    names = ["prior"] + ["{" + ",".join(map(str, b)) + "}" for b in beliefs[1:]]
    ts = TransitionSystem(names, alphabet, triples)
    outputs = tuple(localization_label(model, b, key) for b in beliefs)
    return BeliefDITS(ts, 0, outputs, PAIRS, tuple(beliefs))


def complete_with_sink(bd: BeliefDITS) -> TransitionSystem:
    """Belief graph made full: histories the model cannot explain go to an absorbing empty belief."""
    n = bd.n_states
    succ = {(s, a): t for s, a, t in bd.ts.transitions}
    return TransitionSystem.from_function(
        list(bd.ts.states) + ["{}"], bd.ts.alphabet,
        lambda s, a: n if s == n else succ.get((s, a), n))


@dataclass(frozen=True)
class LocalizationAnalysis:
    """The completed belief system labeled for localization, plus the belief partition."""

    srts: StateRelabeledTS
    beliefs: Partition
    dits: BeliefDITS


def localization_analysis(model: ExternalModel, X0: Iterable[int], key=None) -> LocalizationAnalysis:
    """Localization labeling and belief partition on the completed belief system.

    The empty belief carries the shared non-singleton label; the prior keeps
    its own belief class because only it reads a bare first observation.
    """
    bd = reachable_belief_dits(model, X0, key=key)
    ts = complete_with_sink(bd)
    srts = StateRelabeledTS(ts, Labeling(list(bd.outputs) + [UNLOCALIZED]))
    part = Labeling(list(bd.belief_labeling(key, separate_prior=True).labels) + [-1]).partition
    return LocalizationAnalysis(srts, part, bd)


def localization_machine(model: ExternalModel, X0: Iterable[int], key=None):
    """Pairs-view task machine for localization; goal = every singleton label."""
    from .history import TaskMachine

    bd = reachable_belief_dits(model, X0, key=key)
    ts = complete_with_sink(bd)
    goal = {o for o in bd.outputs if o != UNLOCALIZED}
    return TaskMachine(ts, list(bd.outputs) + [UNLOCALIZED], 0, PAIRS, frozenset(goal))
