"""History information states, truncated history trees and task machines.

Histories are interleaved event sequences ``y1, u1, y2, u2, ...``; the null
action before the first observation is never stored.  Three input views
project a history onto machine symbols:

``observations``
    only the observations (an observer that cannot see the actions);
``pairs``
    ``y1`` alone, then one composite ``u/y`` symbol per stage;
``alternating``
    every event is its own symbol (action and observation names must differ).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

from .core import Labeling, Partition, StateRelabeledTS, TransitionSystem, check_determinism, check_fullness
from .errors import AlphabetMismatch, InconsistentTrials, InvalidInput, SizeLimit

OBSERVATIONS = "observations"
PAIRS = "pairs"
ALTERNATING = "alternating"
VIEWS = (OBSERVATIONS, PAIRS, ALTERNATING)
UNLABELED = "⊥"

Event = tuple[str, str]


def pair_symbol(u: str, y: str) -> str:
    return f"{u}/{y}"


def view_alphabet(view: str, U: Sequence[str], Y: Sequence[str]) -> tuple[str, ...]:
    """Symbol names used by ``view`` over actions ``U`` and observations ``Y``."""
    U, Y = tuple(map(str, U)), tuple(map(str, Y))
    for name in U + Y:
        if "/" in name:
            raise InvalidInput(f"symbol name {name!r} may not contain '/'")
    if view == OBSERVATIONS:
        return Y
    if view == PAIRS:
        return Y + tuple(pair_symbol(u, y) for u in U for y in Y)
    if view == ALTERNATING:
        if set(U) & set(Y):
            raise InvalidInput("alternating view needs disjoint action and observation names")
        return Y + U
    raise InvalidInput(f"unknown view {view!r}")


def project(events: Sequence[Event], view: str, start: int = 0) -> list[str]:
    """Project ``events`` onto the symbols of ``view``.

    Only symbols produced by events at index ``>= start`` are returned, so a
    caller holding a parent's projection can extend it incrementally.
    """
    out = []
    seen_y = False
    for i, (kind, name) in enumerate(events):
        sym = None
        if view == OBSERVATIONS:
            if kind == "y":
                sym = name
        elif view == ALTERNATING:
            sym = name
        elif view == PAIRS:
            if kind == "y":
                if i > 0 and events[i - 1][0] == "u":
                    sym = pair_symbol(events[i - 1][1], name)
                elif not seen_y:
                    sym = name
                else:
                    raise AlphabetMismatch("pairs view needs the action preceding each later observation")
        else:
            raise InvalidInput(f"unknown view {view!r}")
        if kind == "y":
            seen_y = True
        if sym is not None and i >= start:
            out.append(sym)
    return out


@dataclass(frozen=True)
class HistoryState:
    """``eta_k = (eta_0, u~_{k-1}, y~_k)`` stored as one interleaved event tuple."""

    init: Any = None
    events: tuple[Event, ...] = ()

    def __post_init__(self):
        events = tuple((str(k), str(n)) for k, n in self.events)
        prev = None
        for kind, _ in events:
            if kind not in ("u", "y"):
                raise InvalidInput(f"unknown event kind {kind!r}")
            if prev is None and kind != "y":
                raise InvalidInput("a history starts with an observation")
            if kind == "u" and prev == "u":
                raise InvalidInput("two actions without an observation between them")
            prev = kind
        object.__setattr__(self, "events", events)

    @property
    def stage(self) -> int:
        return sum(1 for kind, _ in self.events if kind == "y")

    @property
    def observations(self) -> tuple[str, ...]:
        return tuple(n for k, n in self.events if k == "y")

    @property
    def actions(self) -> tuple[str, ...]:
        return tuple(n for k, n in self.events if k == "u")

    def name(self) -> str:
        if not self.events:
            return "()"
        return ".".join(n if k == "y" else n + ">" for k, n in self.events).replace(">.", "/")


def hist_transition(eta: HistoryState, u: Optional[str], y: str,
                    U: Optional[Iterable[str]] = None, Y: Optional[Iterable[str]] = None
                    ) -> HistoryState:
    """Append ``u`` then ``y`` to ``eta``.

    ``u`` must be ``None`` at stage 0 (the null action) and for histories in
    which actions are never recorded.
    """
    if Y is not None and y not in set(Y):
        raise AlphabetMismatch(f"observation {y!r} not in {sorted(Y)}")
    if u is not None and U is not None and u not in set(U):
        raise AlphabetMismatch(f"action {u!r} not in {sorted(U)}")
    if u is None:
        if eta.actions:
            raise AlphabetMismatch("history records actions; one is required")
        return HistoryState(eta.init, eta.events + (("y", y),))
    if eta.stage == 0:
        raise AlphabetMismatch("no action precedes the first observation")
    return HistoryState(eta.init, eta.events + (("u", u), ("y", y)))


@dataclass(frozen=True)
class HistoryTree:
    """A depth-truncated history I-space as a tree-shaped automaton.

    Node 0 is the root ``eta_0``; nodes are numbered breadth-first with
    children in symbol order.  ``frontier`` holds the depth-``d`` nodes.
    """

    ts: TransitionSystem
    histories: tuple[HistoryState, ...]
    parent: tuple[int, ...]
    frontier: frozenset
    view: str
    depth: int
    U: tuple[str, ...] = ()
    Y: tuple[str, ...] = ()
    init: Any = None

    @property
    def root(self) -> int:
        return 0

    @property
    def n_nodes(self) -> int:
        return self.ts.n_states

    def node_of(self, events: Sequence[Event]) -> int:
        """Follow ``events`` from the root; returns the node id."""
        node = 0
        for sym in project(list(events), self.view):
            nxt = self.ts.step(node, self.ts.symbol_id(sym))
            if nxt is None:
                raise AlphabetMismatch(f"history leaves the tree at {sym!r}")
            node = nxt
        return node

    def node_of_observations(self, ys: Sequence[str]) -> int:
        return self.node_of([("y", y) for y in ys])

    def stage_alphabet(self, node: int) -> tuple[int, ...]:
        """Symbol ids available at ``node`` (the root only sees observations)."""
        k = self.ts.n_symbols
        ny = len(self.Y)
        if self.view == OBSERVATIONS:
            return tuple(range(k))
        if self.view == PAIRS:
            return tuple(range(ny)) if node == 0 else tuple(range(ny, k))
        last = self.histories[node].events[-1][0] if self.histories[node].events else "u"
        return tuple(range(ny)) if last == "u" else tuple(range(ny, k))

    def interior_full(self) -> bool:
        return all(
            check_fullness(self.ts, [s], self.stage_alphabet(s)) is None
            for s in range(self.n_nodes) if s not in self.frontier
        )

    def is_tree(self) -> bool:
        indeg = [0] * self.n_nodes
        for _, _, t in self.ts.transitions:
            indeg[t] += 1
        return indeg[0] == 0 and all(d == 1 for d in indeg[1:]) and check_determinism(self.ts) is None

    def labeled(self, labeling: Labeling) -> StateRelabeledTS:
        return StateRelabeledTS(self.ts, labeling)


def tree_size(view: str, n_actions: int, n_obs: int, depth: int) -> int:
    """Node count of the complete history tree of the given depth."""
    if view == OBSERVATIONS:
        return sum(n_obs ** i for i in range(depth + 1))
    if view == PAIRS:
        return 1 + n_obs * sum((n_actions * n_obs) ** i for i in range(depth))
    if view == ALTERNATING:
        total = 1
        for i in range(1, depth + 1):
            total += n_obs ** i * n_actions ** (i - 1)
            if i < depth:
                total += n_obs ** i * n_actions ** i
        return total
    raise InvalidInput(f"unknown view {view!r}")


def build_history_tree(U: Sequence[str], Y: Sequence[str], init: Any = None,
                       depth: int = 3, view: str = PAIRS, max_nodes: int = 200_000
                       ) -> HistoryTree:
    """All histories up to ``depth`` observations, as a tree automaton.

    ``init`` tags the root: ``None`` for the model-free space, a state id for
    a known initial state, or a collection of state ids for an initial set.
    """
    U, Y = tuple(map(str, U)), tuple(map(str, Y))
    if not Y:
        raise InvalidInput("observation set must be non-empty")
    if view != OBSERVATIONS and not U:
        raise InvalidInput("action set must be non-empty")
    if depth < 1:
        raise InvalidInput("depth must be at least 1")
    alphabet = view_alphabet(view, U, Y)
    projected = tree_size(view, len(U), len(Y), depth)
    if projected > max_nodes:
        raise SizeLimit(f"tree would have {projected} nodes (cap {max_nodes})")
    if init is not None and not isinstance(init, int):
        init = tuple(sorted(set(init)))
    sym_id = {s: i for i, s in enumerate(alphabet)}

    histories = [HistoryState(init)]
    parent = [-1]
    triples = []
    queue = deque([0])
    while queue:
        node = queue.popleft()
        eta = histories[node]
        if eta.stage == depth and (not eta.events or eta.events[-1][0] == "y"):
            continue
        kids = []
        if view == OBSERVATIONS:
            kids = [(y, HistoryState(init, eta.events + (("y", y),))) for y in Y]
        elif view == PAIRS:
            if eta.stage == 0:
                kids = [(y, hist_transition(eta, None, y)) for y in Y]
            else:
                kids = [(pair_symbol(u, y), hist_transition(eta, u, y)) for u in U for y in Y]
        else:
            last = eta.events[-1][0] if eta.events else "u"
            if last == "u":
                kids = [(y, HistoryState(init, eta.events + (("y", y),))) for y in Y]
            else:
                kids = [(u, HistoryState(init, eta.events + (("u", u),))) for u in U]
        for sym, child in sorted(kids, key=lambda kv: sym_id[kv[0]]):
            cid = len(histories)
            histories.append(child)
            parent.append(node)
            triples.append((node, sym_id[sym], cid))
            queue.append(cid)

    frontier = frozenset(i for i, h in enumerate(histories)
                         if h.stage == depth and h.events and h.events[-1][0] == "y")
    ts = TransitionSystem([h.name() for h in histories], alphabet, triples)
    return HistoryTree(ts, tuple(histories), tuple(parent), frontier, view, depth, U, Y, init)


@dataclass(frozen=True)
class TaskMachine:
    """A deterministic, full Moore machine assigning task labels to histories."""

    ts: TransitionSystem
    outputs: tuple[str, ...]
    initial: int = 0
    view: str = OBSERVATIONS
    goal: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "outputs", tuple(map(str, self.outputs)))
        object.__setattr__(self, "goal", frozenset(map(str, self.goal)))
        if len(self.outputs) != self.ts.n_states:
            raise InvalidInput("one output per machine state is required")
        if not self.ts.deterministic or not self.ts.full:
            raise InvalidInput("task machine must be deterministic and full")
        if not 0 <= self.initial < self.ts.n_states:
            raise InvalidInput("initial state out of range")
        if self.view not in VIEWS:
            raise InvalidInput(f"unknown view {self.view!r}")

    def step(self, state: int, symbol: str) -> int:
        try:
            a = self.ts.alphabet.index(symbol)
        except ValueError:
            raise AlphabetMismatch(f"machine has no symbol {symbol!r}") from None
        return self.ts.successors(state, a)[0]

    def run(self, symbols: Iterable[str], state: Optional[int] = None) -> int:
        state = self.initial if state is None else state
        for sym in symbols:
            state = self.step(state, sym)
        return state

    def feed(self, state: int, u: Optional[str], y: str) -> int:
        """Advance on one stage: action ``u`` (``None`` before ``y1``) and observation ``y``."""
        if self.view == OBSERVATIONS:
            return self.step(state, y)
        if u is None:
            return self.step(state, y)
        if self.view == PAIRS:
            return self.step(state, pair_symbol(u, y))
        return self.step(self.step(state, u), y)

    def output(self, state: int) -> str:
        return self.outputs[state]

    def is_goal(self, state: int) -> bool:
        return self.outputs[state] in self.goal

    @property
    def labeling(self) -> Labeling:
        return Labeling(self.outputs)


def apply_task_machine(m: TaskMachine, eta: HistoryState) -> str:
    """Task label of history ``eta``: project onto the machine's view and run."""
    return m.output(m.run(project(eta.events, m.view)))


def label_tree(m: TaskMachine, t: HistoryTree) -> Labeling:
    """Label every tree node by the machine output, reusing the parent's machine state."""
    if m.view != OBSERVATIONS and t.view == OBSERVATIONS:
        raise AlphabetMismatch(f"a {m.view} machine cannot read an observations-only tree")
    mstate = [m.initial] * t.n_nodes
    for node in range(1, t.n_nodes):
        p = t.parent[node]
        events = t.histories[node].events
        start = len(t.histories[p].events)
        mstate[node] = m.run(project(events, m.view, start), mstate[p])
    return Labeling([m.outputs[s] for s in mstate])


def uniform_action_labeling(t: HistoryTree) -> Labeling:
    """``same`` for histories whose recorded actions are all equal, else ``mixed``.

    Histories with fewer than two actions count as ``same``.  On a tree with
    two or more actions this labeling has a nondeterministic quotient.
    """
    return Labeling(["same" if len(set(h.actions)) <= 1 else "mixed" for h in t.histories])


@dataclass(frozen=True)
class Trial:
    """One finite interaction history with optional per-stage task labels.

    ``labels`` maps a stage index (number of observations) to a label.
    """

    events: tuple[Event, ...]
    labels: dict = field(default_factory=dict)
    view: str = PAIRS
    init: Any = None

    def __post_init__(self):
        h = HistoryState(None, self.events)
        object.__setattr__(self, "events", h.events)
        object.__setattr__(self, "labels", {int(k): str(v) for k, v in self.labels.items()})
        for k in self.labels:
            if not 0 <= k <= h.stage:
                raise InvalidInput(f"label at stage {k} beyond trial length {h.stage}")

    @property
    def stages(self) -> int:
        return sum(1 for k, _ in self.events if k == "y")

    @classmethod
    def from_observations(cls, ys, labels=None, view=OBSERVATIONS) -> "Trial":
        return cls(tuple(("y", y) for y in ys), labels or {}, view)

    def prefix(self, stage: int) -> tuple[Event, ...]:
        """Events up to and including the ``stage``-th observation."""
        seen = 0
        for i, (k, _) in enumerate(self.events):
            if k == "y":
                seen += 1
                if seen == stage:
                    return self.events[: i + 1]
        if stage == 0:
            return ()
        raise InvalidInput(f"trial has no stage {stage}")


@dataclass(frozen=True)
class LearnedDITS:
    """Result of :func:`learn_dits_from_trials`.

    ``dits`` is the quotient of the prefix tree; ``tree`` and ``partition``
    are kept so the learned classes can be compared with other derivations.
    """

    dits: Any
    labeling: Labeling
    partition: Partition
    tree: TransitionSystem
    sufficient: bool


def learn_dits_from_trials(trials: Sequence[Trial], mode: str = "strict",
                           view: Optional[str] = None,
                           alphabet: Optional[Sequence[str]] = None) -> LearnedDITS:
    """Fold trials into a prefix tree, refine it and return the quotient DITS.

    Unlabeled prefixes carry the label ``⊥`` in strict mode and are don't-care
    in frontier-wildcard mode.  Raises :class:`InconsistentTrials` when two
    trials label the same prefix differently.
    """
    from .filters import DITS
    from .refinement import WILDCARD, minimal_sufficient_refinement

    if not trials:
        raise InvalidInput("at least one trial is required")
    view = view or trials[0].view
    words = [project(t.events, view) for t in trials]
    if alphabet is None:
        seen: dict[str, None] = {}
        for w in words:
            for s in w:
                seen.setdefault(s, None)
        alphabet = list(seen)
    alphabet = tuple(alphabet)
    sym_id = {s: i for i, s in enumerate(alphabet)}
    for w in words:
        for s in w:
            if s not in sym_id:
                raise AlphabetMismatch(f"trial symbol {s!r} not in the declared alphabet")

    # prefix tree keyed by projected word; numbered breadth-first later
    children: dict[tuple, dict[int, tuple]] = {(): {}}
    labels: dict[tuple, str] = {}
    for trial, word in zip(trials, words):
        node = ()
        for s in word:
            nxt = node + (s,)
            children[node][sym_id[s]] = nxt
            children.setdefault(nxt, {})
            node = nxt
        for stage, lab in trial.labels.items():
            key = tuple(project(trial.prefix(stage), view))
            if labels.setdefault(key, lab) != lab:
                raise InconsistentTrials(key, (labels[key], lab))

    order = [()]
    index = {(): 0}
    triples = []
    i = 0
    while i < len(order):
        node = order[i]
        for a in sorted(children[node]):
            child = children[node][a]
            index[child] = len(order)
            order.append(child)
            triples.append((i, a, index[child]))
        i += 1
    names = [".".join(w) if w else "()" for w in order]
    ts = TransitionSystem(names, alphabet, triples)
    unlabeled = [j for j, w in enumerate(order) if w not in labels]
    raw = [labels.get(w, UNLABELED) for w in order]
    srts = StateRelabeledTS(ts, Labeling(raw))
    if mode == WILDCARD:
        res = minimal_sufficient_refinement(srts, WILDCARD, unlabeled=unlabeled)
    else:
        res = minimal_sufficient_refinement(srts, mode)
    part = res.partition
    block_labels = [UNLABELED] * part.block_count
    for j, b in enumerate(part.block_of):
        if raw[j] != UNLABELED:
            block_labels[b] = raw[j]
    qnames = [names[blk[0]] for blk in part.blocks]
    qtriples = {(part.block_of[s], a, part.block_of[t]) for s, a, t in ts.transitions}
    qts = TransitionSystem(qnames, alphabet, qtriples)
    dits = DITS(qts, part.block_of[0], tuple(block_labels), view) if qts.deterministic else None
    return LearnedDITS(dits, Labeling(block_labels), part, ts, res.sufficient)
