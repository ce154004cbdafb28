"""Generators for the gate worlds, the L-shaped corridor family and random instances."""
from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Optional

from .core import Labeling, TransitionSystem
from .errors import InvalidConfig
from .filters import DITS
from .history import ALTERNATING, OBSERVATIONS, PAIRS, TaskMachine, Trial, pair_symbol
from .model import ExternalModel
from .plan import PolicyDITS

RED, GREEN = "r", "g"
COLORS = (RED, GREEN)
PASSIVE_ACTIONS = ("cross-red", "cross-green")
ACTIVE_ACTIONS = ("block-red", "block-green", "block-none")
CONSISTENT, INCONSISTENT, GOAL = "consistent", "inconsistent", "goal"


# ---------------------------------------------------------------- gate world

@dataclass(frozen=True)
class GateWorldConfig:
    """A ring of ``regions`` regions; gate ``i`` joins region ``i`` and ``i+1``.

    Gates alternate red/green around the ring, so each region borders one
    gate of each color.  That needs an even region count.
    """

    regions: int = 4
    active: bool = False

    def validate(self) -> None:
        if self.regions < 2:
            raise InvalidConfig("every region needs two gates, so at least two regions")
        if self.regions % 2:
            raise InvalidConfig("an odd ring cannot give every region one gate of each color")


def gate_layout(n: int) -> tuple[tuple[int, int, str], ...]:
    """Gates as ``(region, next region, color)``."""
    return tuple((i, (i + 1) % n, COLORS[i % 2]) for i in range(n))


def gates_of_region(n: int, region: int) -> dict[str, int]:
    """Color -> neighbouring region across the gate of that color."""
    out = {}
    for a, b, c in gate_layout(n):
        if region in (a, b):
            if c in out:
                raise InvalidConfig(f"region {region} has two {c} gates")
            out[c] = b if region == a else a
    return out


def gate_world(cfg: GateWorldConfig) -> ExternalModel:
    """The gate world as an external model.

    Passive: state ``(region, last color)`` with actions ``cross-red`` and
    ``cross-green``.  Active: the state also carries a bias bit telling
    which gate an unconstrained bounce crosses; ``block-red`` walls off the
    red gate (so the robot crosses green), ``block-green`` the reverse and
    ``block-none`` follows the bias.  The sensor reports the last color.
    """
    cfg.validate()
    n = cfg.regions
    nbr = [gates_of_region(n, r) for r in range(n)]
    biases = (0, 1) if cfg.active else (0,)
    states = [(r, c, b) for r in range(n) for c in COLORS for b in biases]
    index = {s: i for i, s in enumerate(states)}
    actions = ACTIVE_ACTIONS if cfg.active else PASSIVE_ACTIONS

    def crossed(action: str, bias: int) -> str:
        if action in ("cross-red", "block-green"):
            return RED
        if action in ("cross-green", "block-red"):
            return GREEN
        return COLORS[bias]

    triples = []
    for i, (r, _, b) in enumerate(states):
        for a, act in enumerate(actions):
            c = crossed(act, b)
            triples.append((i, a, index[(nbr[r][c], c, b)]))
    if cfg.active:
        names = [f"R{r}:{c}:{'rg'[b]}" for r, c, b in states]
    else:
        names = [f"R{r}:{c}" for r, c, _ in states]
    ts = TransitionSystem(names, actions, triples)
    return ExternalModel(ts, [COLORS.index(c) for _, c, _ in states], COLORS)


def lift_machine(m: TaskMachine, view: str, actions: Iterable[str] = ()) -> TaskMachine:
    """Re-express an observations-view machine for the pairs or alternating view.

    Actions are ignored: pair symbols step on their observation and plain
    action symbols are self-loops.
    """
    if m.view != OBSERVATIONS:
        raise InvalidConfig("only observations-view machines can be lifted")
    if view == OBSERVATIONS:
        return m
    Y = m.ts.alphabet
    U = tuple(actions)
    if view == PAIRS:
        alphabet = Y + tuple(pair_symbol(u, y) for u in U for y in Y)
        obs_of = list(range(len(Y))) + [yi for _ in U for yi in range(len(Y))]
    elif view == ALTERNATING:
        alphabet = Y + U
        obs_of = list(range(len(Y))) + [None] * len(U)
    else:
        raise InvalidConfig(f"unknown view {view!r}")

    def delta(s, a):
        return s if obs_of[a] is None else m.ts.successors(s, obs_of[a])[0]

    ts = TransitionSystem.from_function(m.ts.states, alphabet, delta)
    return TaskMachine(ts, m.outputs, m.initial, view, m.goal)


def consistency_machine(redundant: bool = False) -> TaskMachine:
    """Did the observed colors alternate so far?

    States ``init``, ``lastR``, ``lastG`` and an absorbing ``trap``.  The
    empty history counts as consistent.  ``redundant=True`` returns a
    7-state realization with parity-tagged twins of the same machine.
    """
    if not redundant:
        names = ["init", "lastR", "lastG", "trap"]
        delta = {
            (0, 0): 1, (0, 1): 2,
            (1, 0): 3, (1, 1): 2,
            (2, 0): 1, (2, 1): 3,
            (3, 0): 3, (3, 1): 3,
        }
        outputs = [CONSISTENT] * 3 + [INCONSISTENT]
    else:
        # lastR/lastG split by stage parity; two trap copies
        names = ["init", "lastR0", "lastG0", "lastR1", "lastG1", "trapA", "trapB"]
        delta = {
            (0, 0): 1, (0, 1): 2,
            (1, 0): 5, (1, 1): 4,
            (2, 0): 3, (2, 1): 5,
            (3, 0): 6, (3, 1): 2,
            (4, 0): 1, (4, 1): 6,
            (5, 0): 6, (5, 1): 6,
            (6, 0): 5, (6, 1): 5,
        }
        outputs = [CONSISTENT] * 5 + [INCONSISTENT] * 2
    ts = TransitionSystem.from_function(names, COLORS, lambda s, a: delta[(s, a)])
    return TaskMachine(ts, outputs, 0, OBSERVATIONS)


def lap_machine(length: int) -> TaskMachine:
    """Goal once ``length`` consecutive alternating colors have been observed.

    The goal state is absorbing; a repeated color before that traps.
    """
    if length < 1:
        raise InvalidConfig("length must be positive")
    names = ["init"] + [f"{c}{k}" for k in range(1, length) for c in COLORS] + ["done", "trap"]
    idx = {nm: i for i, nm in enumerate(names)}

    def delta(s, a):
        nm = names[s]
        if nm in ("done", "trap"):
            return s
        c = COLORS[a]
        if nm == "init":
            k = 1
        else:
            if nm[0] == c:
                return idx["trap"]
            k = int(nm[1:]) + 1
        return idx["done"] if k >= length else idx[f"{c}{k}"]

    ts = TransitionSystem.from_function(names, COLORS, delta)
    outputs = [GOAL if nm == "done" else INCONSISTENT if nm == "trap" else CONSISTENT
               for nm in names]
    return TaskMachine(ts, outputs, 0, OBSERVATIONS, frozenset({GOAL}))


def three_state_gate_plan() -> PolicyDITS:
    """The three I-state wall-setting policy for the active gate world.

    ``i0`` acts with the null action, ``i1`` (last saw red) walls off red,
    ``i2`` (last saw green) walls off green.  The update reads only the
    latest color.
    """
    alphabet = COLORS + tuple(pair_symbol(u, y) for u in ACTIVE_ACTIONS for y in COLORS)
    target = {RED: 1, GREEN: 2}
    triples = []
    for a, sym in enumerate(alphabet):
        y = sym.split("/")[-1]
        if "/" not in sym:
            triples.append((0, a, target[y]))
        else:
            triples += [(1, a, target[y]), (2, a, target[y])]
    ts = TransitionSystem(["i0", "i1", "i2"], alphabet, triples)
    dits = DITS(ts, 0, ("start", "saw-red", "saw-green"), PAIRS)
    return PolicyDITS(dits, (None, 0, 1), ACTIVE_ACTIONS)


def gate_trials(model: ExternalModel, depth: int, machine: Optional[TaskMachine] = None,
                view: str = PAIRS) -> list[Trial]:
    """Every trace of ``depth`` observations from every state, with per-prefix labels.

    Uniform enumeration over initial states and action sequences; labels are
    revealed by ``machine`` (the consistency machine by default).
    """
    machine = machine or consistency_machine()
    out = []
    for x0 in range(model.n_states):
        for acts in product(range(len(model.actions)), repeat=depth - 1):
            x = x0
            events = [("y", model.observations[model.h(x)])]
            for a in acts:
                x = model.f(x, a)
                events += [("u", model.actions[a]), ("y", model.observations[model.h(x)])]
            ys = [n for k, n in events if k == "y"]
            labels = {k: machine.output(machine.run(ys[:k])) for k in range(depth + 1)}
            out.append(Trial(tuple(events), labels, view, x0))
    return out


def observation_language(model: ExternalModel, depth: int) -> frozenset:
    """All observation strings of length ``depth`` the model can produce."""
    words = set()
    frontier = {(x, (model.observations[model.h(x)],)) for x in range(model.n_states)}
    for _ in range(depth - 1):
        frontier = {
            (model.f(x, a), w + (model.observations[model.h(model.f(x, a))],))
            for x, w in frontier for a in range(len(model.actions))
        }
    for _, w in frontier:
        words.add(w)
    return frozenset(words)


# ---------------------------------------------------------------- corridor

EAST, NORTH, WEST, SOUTH = "east", "north", "west", "south"
MOVES = {EAST: (1, 0), NORTH: (0, 1), WEST: (-1, 0), SOUTH: (0, -1)}
CORRIDOR_ACTIONS = (EAST, NORTH, WEST, SOUTH)


@dataclass(frozen=True)
class CorridorConfig:
    bound: int = 2

    def validate(self) -> None:
        if self.bound < 1:
            raise InvalidConfig("corridor bound must be at least 1")


def corridor_cells(l1: int, l2: int) -> list[tuple[int, int]]:
    """Horizontal arm ``(i, 0)`` for ``0 <= i <= l1``, then vertical arm ``(l1, j)``."""
    return [(i, 0) for i in range(l1 + 1)] + [(l1, j) for j in range(1, l2 + 1)]


def l_corridor_family(l: int) -> tuple[ExternalModel, tuple[int, ...]]:
    """Disjoint union of all L-shaped corridors with arm lengths in ``1..l``.

    A state is ``(cell, (l1, l2), flag)``; a blocked move keeps the cell and
    sets the flag, which is what the sensor reports.  Returns the model and
    the initial belief: every environment at ``(0, 0)`` with the flag clear.
    """
    CorridorConfig(l).validate()
    states = []
    for l1, l2 in product(range(1, l + 1), repeat=2):
        for cell in corridor_cells(l1, l2):
            for flag in (0, 1):
                states.append((cell, (l1, l2), flag))
    index = {s: i for i, s in enumerate(states)}
    triples = []
    for i, (cell, env, _) in enumerate(states):
        inside = set(corridor_cells(*env))
        for a, act in enumerate(CORRIDOR_ACTIONS):
            dx, dy = MOVES[act]
            nxt = (cell[0] + dx, cell[1] + dy)
            if nxt in inside:
                triples.append((i, a, index[(nxt, env, 0)]))
            else:
                triples.append((i, a, index[(cell, env, 1)]))
    names = [f"({c[0]},{c[1]})|{e[0]},{e[1]}|{f}" for c, e, f in states]
    ts = TransitionSystem(names, CORRIDOR_ACTIONS, triples)
    model = ExternalModel(ts, [f for _, _, f in states], ("0", "1"))
    X0 = tuple(index[((0, 0), e, 0)] for e in product(range(1, l + 1), repeat=2))
    return model, X0


def corridor_environment(model: ExternalModel, x: int) -> tuple[int, int]:
    env = model.states[x].split("|")[1]
    a, b = env.split(",")
    return int(a), int(b)


def corridor_position(model: ExternalModel):
    """Key dropping the blocked flag: ``x -> "(cell)|l1,l2"``."""
    return lambda x: model.states[x].rsplit("|", 1)[0]


def two_phase_plan(l: int) -> PolicyDITS:
    """Move east until blocked, then north until blocked; the counters decode ``(l1, l2)``.

    I-states: ``start``, ``E<k>`` (k successful east moves), ``N<k>,<n>``
    (north phase after east was blocked at ``k``) and ``D<k>,<n>`` (done).
    """
    names = ["start"] + [f"E{k}" for k in range(l + 1)]
    names += [f"N{k},{n}" for k in range(1, l + 1) for n in range(l + 1)]
    names += [f"D{k},{n}" for k in range(1, l + 1) for n in range(1, l + 1)]
    idx = {nm: i for i, nm in enumerate(names)}
    Y = ("0", "1")
    alphabet = Y + tuple(pair_symbol(u, y) for u in CORRIDOR_ACTIONS for y in Y)
    sym = {s: i for i, s in enumerate(alphabet)}
    triples = [(0, sym["0"], idx["E0"]), (0, sym["1"], idx["E0"])]
    for k in range(l + 1):
        if k < l:
            triples.append((idx[f"E{k}"], sym["east/0"], idx[f"E{k + 1}"]))
        if k >= 1:
            triples.append((idx[f"E{k}"], sym["east/1"], idx[f"N{k},0"]))
    for k in range(1, l + 1):
        for n in range(l + 1):
            if n < l:
                triples.append((idx[f"N{k},{n}"], sym["north/0"], idx[f"N{k},{n + 1}"]))
            if n >= 1:
                triples.append((idx[f"N{k},{n}"], sym["north/1"], idx[f"D{k},{n}"]))
    policy = []
    for nm in names:
        if nm == "start":
            policy.append(None)
        elif nm[0] == "E":
            policy.append(CORRIDOR_ACTIONS.index(EAST))
        else:
            policy.append(CORRIDOR_ACTIONS.index(NORTH))
    dits = DITS(TransitionSystem(names, alphabet, triples), 0, tuple(names), PAIRS)
    return PolicyDITS(dits, tuple(policy), CORRIDOR_ACTIONS)


def decode_two_phase(plan: PolicyDITS, istate: int) -> Optional[tuple[int, int]]:
    """``(k, n)`` read off an ``N`` or ``D`` I-state of :func:`two_phase_plan`."""
    nm = plan.dits.ts.states[istate]
    if nm[0] not in "ND":
        return None
    k, n = nm[1:].split(",")
    return int(k), int(n)


# ---------------------------------------------------------------- random instances

def random_automaton(n: int, symbols: int, seed: int) -> TransitionSystem:
    """Deterministic full automaton with uniformly drawn targets."""
    if n < 1:
        raise InvalidConfig("need at least one state")
    rng = random.Random(seed)
    return TransitionSystem(n, [str(a) for a in range(symbols)],
                            [(s, a, rng.randrange(n)) for s in range(n) for a in range(symbols)])


def random_labeling(n: int, labels: int, seed: int) -> Labeling:
    rng = random.Random(seed)
    return Labeling([rng.randrange(labels) for _ in range(n)])


def random_transition_system(n: int, symbols: int, seed: int, density: float = 0.3,
                             full: bool = True) -> TransitionSystem:
    """Possibly nondeterministic system; each triple present with probability ``density``."""
    rng = random.Random(seed)
    triples = []
    for s in range(n):
        for a in range(symbols):
            row = [t for t in range(n) if rng.random() < density]
            if full and not row:
                row = [rng.randrange(n)]
            triples += [(s, a, t) for t in row]
    return TransitionSystem(n, [str(a) for a in range(symbols)], triples)


def random_external_model(n: int, actions: int, observations: int, seed: int) -> ExternalModel:
    rng = random.Random(seed)
    ts = random_automaton(n, actions, rng.randrange(1 << 30))
    ts = TransitionSystem(ts.states, [f"u{a}" for a in range(actions)], ts.transitions)
    return ExternalModel(ts, [rng.randrange(observations) for _ in range(n)],
                         [f"y{i}" for i in range(observations)])
