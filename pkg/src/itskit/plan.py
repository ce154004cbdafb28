"""Coupled execution, feasibility checking, policy synthesis and policy-preserving minimization."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .core import Labeling, StateRelabeledTS, TransitionSystem
from .errors import AlphabetMismatch, InvalidInput, MissingTransition, SizeLimit
from .filters import DITS, BeliefState, belief
from .history import PAIRS, TaskMachine, Trial, pair_symbol
from .model import ExternalModel

__all__ = [
    "ExternalModel", "PolicyDITS", "CoupledTrace", "FeasibilityVerdict", "SynthesisResult",
    "couple_and_run", "compute_reachable_set", "check_feasible", "synthesize_policy",
    "minimize_for_policy",
]

GOAL, CYCLE, HORIZON, STUCK = "goal", "cycle", "horizon", "stuck"


@dataclass(frozen=True)
class PolicyDITS:
    """A pairs-view DITS plus an action per I-state.

    ``policy[i]`` indexes ``actions``; the initial I-state emits the null
    action and stores ``None``.
    """

    dits: DITS
    policy: tuple
    actions: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "policy", tuple(self.policy))
        object.__setattr__(self, "actions", tuple(map(str, self.actions)))
        if self.dits.view != PAIRS:
            raise InvalidInput("a policy DITS reads the pairs view")
        if len(self.policy) != self.dits.n_states:
            raise InvalidInput("one policy entry per I-state is required")
        for i, u in enumerate(self.policy):
            if u is None:
                if i != self.dits.initial:
                    raise InvalidInput(f"policy undefined at non-initial I-state {i}")
            elif not 0 <= u < len(self.actions):
                raise InvalidInput(f"policy action {u} out of range")
        if any(t == self.dits.initial for _, _, t in self.dits.ts.transitions):
            raise InvalidInput("the initial I-state emits no action and cannot be re-entered")

    @property
    def n_states(self) -> int:
        return self.dits.n_states

    @property
    def initial(self) -> int:
        return self.dits.initial

    def action(self, i: int) -> Optional[str]:
        u = self.policy[i]
        return None if u is None else self.actions[u]

    def step(self, i: int, u: Optional[str], y: str, stage: Optional[int] = None) -> int:
        sym = y if u is None else pair_symbol(u, y)
        return self.dits.step(i, sym, stage)

    def restricted_transitions(self) -> tuple:
        """Triples allowed once ``u = pi(i)`` is imposed; the initial state keeps its observation edges."""
        ts = self.dits.ts
        out = []
        for s, a, t in ts.transitions:
            sym = ts.alphabet[a]
            if "/" not in sym:
                if s == self.initial:
                    out.append((s, a, t))
            elif self.policy[s] is not None and sym.split("/", 1)[0] == self.actions[self.policy[s]]:
                out.append((s, a, t))
        return tuple(out)

    def emit(self, ys: Sequence[str]) -> tuple[str, ...]:
        """Action sequence produced for the observation word ``ys`` (stops where undefined)."""
        i = self.initial
        out: list[str] = []
        u = None
        for y in ys:
            try:
                i = self.step(i, u, y)
            except MissingTransition:
                break
            u = self.action(i)
            out.append(u)
        return tuple(out)


@dataclass(frozen=True)
class CoupledTrace:
    """Stage-indexed run of Eq. (1).

    ``xs[j]``, ``ys[j]`` belong to stage ``j+1``; ``istates[0]`` is ``i_0``
    and ``istates[j+1]`` the I-state after ``ys[j]``; ``us[j]`` is applied
    after stage ``j+1``.  ``mstates`` mirrors ``istates`` for the task machine.
    """

    xs: tuple[int, ...]
    ys: tuple[str, ...]
    us: tuple[str, ...]
    istates: tuple[int, ...]
    mstates: tuple[int, ...]
    reason: str

    @property
    def stages(self) -> int:
        return len(self.xs)

    def verify(self, ext: ExternalModel, plan: PolicyDITS, task: TaskMachine) -> bool:
        """Re-check every step against ``f``, ``h``, ``phi``, ``pi`` and the machine."""
        if not (len(self.ys) == len(self.xs) == len(self.istates) - 1 == len(self.mstates) - 1):
            return False
        if len(self.us) not in (len(self.xs) - 1, len(self.xs)):
            return False
        if self.istates[0] != plan.initial or self.mstates[0] != task.initial:
            return False
        u = None
        for j, x in enumerate(self.xs):
            if j > 0:
                u = self.us[j - 1]
                if u != plan.action(self.istates[j]):
                    return False
                if x != ext.f(self.xs[j - 1], ext.action_id(u)):
                    return False
            if self.ys[j] != ext.observations[ext.h(x)]:
                return False
            if self.istates[j + 1] != plan.step(self.istates[j], u, self.ys[j]):
                return False
            if self.mstates[j + 1] != task.feed(self.mstates[j], u, self.ys[j]):
                return False
        return True

    def to_trial(self, labels: Optional[dict] = None) -> Trial:
        events: list = []
        for j, y in enumerate(self.ys):
            if j > 0:
                events.append(("u", self.us[j - 1]))
            events.append(("y", y))
        return Trial(tuple(events), labels or {}, PAIRS, self.xs[0] if self.xs else None)

    def to_dict(self) -> dict:
        return {"xs": list(self.xs), "ys": list(self.ys), "us": list(self.us),
                "istates": list(self.istates), "mstates": list(self.mstates),
                "reason": self.reason}


def _check_alphabets(ext: ExternalModel, plan: PolicyDITS, task: Optional[TaskMachine] = None):
    missing = set(plan.actions) - set(ext.actions)
    if missing:
        raise AlphabetMismatch(f"plan actions {sorted(missing)} unknown to the model")
    for sym in plan.dits.ts.alphabet:
        y = sym.split("/", 1)[-1]
        if y not in ext.observations:
            raise AlphabetMismatch(f"plan symbol {sym!r} uses an unknown observation")
    if task is not None:
        allowed = set(ext.observations) | set(ext.actions) | {
            pair_symbol(u, y) for u in ext.actions for y in ext.observations}
        extra = set(task.ts.alphabet) - allowed
        if extra:
            raise AlphabetMismatch(f"task machine symbols {sorted(extra)} unknown to the model")


def couple_and_run(ext: ExternalModel, plan: PolicyDITS, task: TaskMachine, x1: int,
                   max_steps: int = 1000) -> CoupledTrace:
    """Run the internal and external systems together from ``(i_0, x1)``.

    Stops at the first goal-labeled history, at a repeated ``(x, i, m)``
    triple, or after ``max_steps`` stages.  A missing plan transition raises
    :class:`MissingTransition` whose ``partial`` holds the trace so far.
    """
    if max_steps < 1:
        raise InvalidInput("max_steps must be at least 1")
    _check_alphabets(ext, plan, task)
    xs, ys, us = [], [], []
    istates, mstates = [plan.initial], [task.initial]
    seen = set()
    x, u = x1, None
    while True:
        y = ext.observations[ext.h(x)]
        xs.append(x)
        ys.append(y)
        m = task.feed(mstates[-1], u, y)
        try:
            i = plan.step(istates[-1], u, y, len(xs))
        except MissingTransition as err:
            mstates.append(m)
            err.partial = CoupledTrace(tuple(xs), tuple(ys), tuple(us), tuple(istates),
                                       tuple(mstates), STUCK)
            raise
        istates.append(i)
        mstates.append(m)
        if task.is_goal(m):
            reason = GOAL
        elif (x, i, m) in seen:
            reason = CYCLE
        elif len(xs) >= max_steps:
            reason = HORIZON
        else:
            seen.add((x, i, m))
            u = plan.action(i)
            us.append(u)
            x = ext.f(x, ext.action_id(u))
            continue
        return CoupledTrace(tuple(xs), tuple(ys), tuple(us), tuple(istates), tuple(mstates), reason)


def compute_reachable_set(ext: ExternalModel, task: TaskMachine,
                          candidates: Optional[Iterable[int]] = None) -> frozenset:
    """States from which some action sequence drives the task machine to a goal label.

    Exact product reachability over ``(x, machine state)``.  ``candidates``
    restricts which initial states are reported (all states by default).
    """
    cands = range(ext.n_states) if candidates is None else sorted(set(candidates))
    starts = {}
    for x in cands:
        starts[x] = (x, task.feed(task.initial, None, ext.observations[ext.h(x)]))
    nodes = set(starts.values())
    queue = deque(nodes)
    rev: dict = {}
    while queue:
        x, m = queue.popleft()
        if task.is_goal(m):
            continue
        for ui, u in enumerate(ext.actions):
            x2 = ext.f(x, ui)
            nxt = (x2, task.feed(m, u, ext.observations[ext.h(x2)]))
            rev.setdefault(nxt, []).append((x, m))
            if nxt not in nodes:
                nodes.add(nxt)
                queue.append(nxt)
    good = {nd for nd in nodes if task.is_goal(nd[1])}
    queue = deque(good)
    while queue:
        nd = queue.popleft()
        for p in rev.get(nd, ()):
            if p not in good:
                good.add(p)
                queue.append(p)
    return frozenset(x for x, nd in starts.items() if nd in good)


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    counterexample: Optional[int] = None
    trace: Optional[CoupledTrace] = None
    reasons: dict = field(default_factory=dict)


def check_feasible(ext: ExternalModel, plan: PolicyDITS, task: TaskMachine,
                   X_init: Optional[Iterable[int]] = None) -> FeasibilityVerdict:
    """Simulate from every initial state; feasible iff each run reaches a goal.

    The stage bound ``|X| * |I| * |M| + 1`` guarantees that a non-goal run is
    caught as a cycle.  The smallest failing state is the counterexample.
    """
    X = sorted(compute_reachable_set(ext, task)) if X_init is None else sorted(set(X_init))
    bound = ext.n_states * plan.n_states * task.ts.n_states + 1
    reasons = {}
    first = None
    for x in X:
        try:
            tr = couple_and_run(ext, plan, task, x, bound)
        except MissingTransition as err:
            tr = err.partial
        reasons[x] = tr.reason
        if tr.reason != GOAL and first is None:
            first = (x, tr)
    if first is None:
        return FeasibilityVerdict(True, reasons=reasons)
    return FeasibilityVerdict(False, first[0], first[1], reasons)


@dataclass(frozen=True)
class SynthesisResult:
    feasible: bool
    plan: Optional[PolicyDITS]
    reachable: frozenset
    winning: frozenset = frozenset()
    losing: tuple = ()
    nodes: tuple = ()

    @property
    def counterexample(self):
        return self.losing[0] if self.losing else None


def synthesize_policy(ext: ExternalModel, X0: Iterable[int], task: TaskMachine,
                      horizon: Optional[int] = None, max_nodes: int = 200_000) -> SynthesisResult:
    """AND-OR search over ``(belief, machine state)`` nodes.

    A node wins at rank 0 if goal-labeled, and at rank ``r`` if some action
    sends every consistent observation to a node of smaller rank.  ``horizon``
    caps the rank.  The returned plan covers the nodes reachable under the
    chosen actions; its state 0 is the prior, goal nodes keep action 0 and
    have no outgoing edges.
    """
    X0 = belief(X0)
    if not X0:
        raise InvalidInput("initial belief must be non-empty")
    Y, U = ext.observations, ext.actions
    roots = []
    for yi, y in enumerate(Y):
        b = belief(set(X0) & ext.preimage(yi))
        if b:
            roots.append((y, (b, task.feed(task.initial, None, y))))

    # forward exploration of the whole AND-OR graph
    succ: dict = {}
    order = []
    queue = deque(nd for _, nd in roots)
    seen = set(queue)
    while queue:
        nd = queue.popleft()
        order.append(nd)
        b, m = nd
        if task.is_goal(m):
            succ[nd] = None
            continue
        per_action = []
        for ui, u in enumerate(U):
            img = ext.image(b, ui)
            kids = []
            for yi, y in enumerate(Y):
                nb = belief(img & ext.preimage(yi))
                if nb:
                    kid = (nb, task.feed(m, u, y))
                    kids.append((y, kid))
                    if kid not in seen:
                        if len(seen) >= max_nodes:
                            raise SizeLimit(f"belief search exceeds {max_nodes} nodes")
                        seen.add(kid)
                        queue.append(kid)
            per_action.append(kids)
        succ[nd] = per_action

    rank = {nd: 0 for nd in order if succ[nd] is None}
    choice: dict = {}
    r = 0
    while horizon is None or r < horizon:
        r += 1
        fresh = {}
        for nd in order:
            if nd in rank:
                continue
            for ui, kids in enumerate(succ[nd]):
                if kids and all(k in rank for _, k in kids):
                    fresh[nd] = ui
                    break
        if not fresh:
            break
        for nd, ui in fresh.items():
            rank[nd] = r
            choice[nd] = ui

    reachable = compute_reachable_set(ext, task, X0)
    winning = frozenset(rank)
    losing = tuple(nd for _, nd in roots if nd not in rank)
    if losing:
        return SynthesisResult(False, None, reachable, winning, losing, tuple(order))

    # plan over nodes reachable under the chosen actions
    states = [None]
    index: dict = {}
    triples = []
    alphabet = Y + tuple(pair_symbol(u, y) for u in U for y in Y)
    sym = {s: i for i, s in enumerate(alphabet)}
    queue = deque()

    def visit(nd):
        if nd not in index:
            index[nd] = len(states)
            states.append(nd)
            queue.append(nd)
        return index[nd]

    for y, nd in roots:
        triples.append((0, sym[y], visit(nd)))
    while queue:
        nd = queue.popleft()
        if succ[nd] is None:
            continue
        ui = choice[nd]
        for y, kid in succ[nd][ui]:
            triples.append((index[nd], sym[pair_symbol(U[ui], y)], visit(kid)))
    names = ["prior"] + [
        "{" + ",".join(map(str, b)) + "}|" + str(m) for b, m in states[1:]]
    outputs = ["prior"] + [task.outputs[m] for _, m in states[1:]]
    policy = [None] + [choice.get(nd, 0) for nd in states[1:]]
    dits = DITS(TransitionSystem(names, alphabet, triples), 0, tuple(outputs), PAIRS)
    return SynthesisResult(True, PolicyDITS(dits, tuple(policy), U), reachable, winning, (),
                           tuple(order))


def minimize_for_policy(plan: PolicyDITS) -> PolicyDITS:
    """Coarsest quotient of the plan that keeps its action outputs sufficient.

    Strict Moore minimization with ``pi`` as the labeling, so the quotient
    emits the same actions on every input word.
    """
    from .refinement import STRICT, minimal_sufficient_refinement

    ts = plan.dits.ts
    lab = Labeling(["-" if u is None else u for u in plan.policy])
    res = minimal_sufficient_refinement(StateRelabeledTS(ts, lab), STRICT)
    part = res.partition
    bo = part.block_of
    names = [ts.states[blk[0]] for blk in part.blocks]
    triples = {(bo[s], a, bo[t]) for s, a, t in ts.transitions}
    outputs = None
    if plan.dits.outputs is not None:
        outputs = tuple(plan.dits.outputs[blk[0]] for blk in part.blocks)
    dits = DITS(TransitionSystem(names, ts.alphabet, triples), bo[plan.initial], outputs, PAIRS)
    policy = tuple(plan.policy[blk[0]] for blk in part.blocks)
    return PolicyDITS(dits, policy, plan.actions)
