"""Finite transition systems, labelings, partitions and the sufficiency test.

States and symbols are dense 0-based integers.  Display names live in side
tables.  Every value here is immutable once built, and every set-valued
output is emitted in sorted order so that serializations are bit-stable.
"""
from __future__ import annotations

from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from .errors import DomainMismatch, InvalidInput

Triple = tuple[int, int, int]


def _canonical_ids(values: Sequence[Hashable]) -> tuple[tuple[int, ...], list]:
    """Renumber ``values`` by first occurrence; return (ids, distinct values)."""
    seen: dict = {}
    ids = []
    for v in values:
        if v not in seen:
            seen[v] = len(seen)
        ids.append(seen[v])
    return tuple(ids), list(seen)


@dataclass(frozen=True)
class TransitionSystem:
    """A finite transition system ``(S, Lambda, T)``.

    ``states`` may be given as a count or as a sequence of display names.
    Transitions are deduplicated and stored sorted by (source, symbol, target).
    """

    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    transitions: tuple[Triple, ...] = ()

    def __init__(self, states, alphabet, transitions=()):
        if isinstance(states, int):
            if states < 0:
                raise InvalidInput("state count must be non-negative")
            states = tuple(str(i) for i in range(states))
        else:
            states = tuple(str(s) for s in states)
        alphabet = tuple(str(a) for a in alphabet)
        if len(set(alphabet)) != len(alphabet):
            raise InvalidInput(f"duplicate symbol names in {alphabet}")
        n, k = len(states), len(alphabet)
        triples = set()
        for tr in transitions:
            s, a, t = (int(x) for x in tr)
            if not (0 <= s < n and 0 <= t < n):
                raise InvalidInput(f"transition {tr} references an unknown state")
            if not 0 <= a < k:
                raise InvalidInput(f"transition {tr} references an unknown symbol")
            triples.add((s, a, t))
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "transitions", tuple(sorted(triples)))

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_symbols(self) -> int:
        return len(self.alphabet)

    def symbol_id(self, name: str) -> int:
        try:
            return self.alphabet.index(name)
        except ValueError:
            raise InvalidInput(f"unknown symbol {name!r}") from None

    @cached_property
    def _out(self) -> tuple[tuple[int, ...], ...]:
        k = self.n_symbols
        table: list[list[int]] = [[] for _ in range(self.n_states * k)]
        for s, a, t in self.transitions:
            table[s * k + a].append(t)
        return tuple(tuple(ts) for ts in table)

    def successors(self, state: int, symbol: int) -> tuple[int, ...]:
        return self._out[state * self.n_symbols + symbol]

    def step(self, state: int, symbol: int) -> Optional[int]:
        """The unique successor, ``None`` if absent; raises if ambiguous."""
        targets = self.successors(state, symbol)
        if not targets:
            return None
        if len(targets) > 1:
            raise InvalidInput(f"state {state} branches on symbol {symbol}")
        return targets[0]

    @cached_property
    def deterministic(self) -> bool:
        return all(len(ts) <= 1 for ts in self._out)

    @cached_property
    def full(self) -> bool:
        return all(ts for ts in self._out)

    def delta_table(self) -> list[int]:
        """Flat ``n*k`` successor table of a deterministic system (-1 = absent)."""
        if not self.deterministic:
            raise InvalidInput("delta_table needs a deterministic system")
        return [ts[0] if ts else -1 for ts in self._out]

    @cached_property
    def predecessors(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per state, the sorted ``(source, symbol)`` pairs entering it."""
        preds: list[list[tuple[int, int]]] = [[] for _ in range(self.n_states)]
        for s, a, t in self.transitions:
            preds[t].append((s, a))
        return tuple(tuple(p) for p in preds)

    @classmethod
    def from_function(cls, states, alphabet, delta) -> "TransitionSystem":
        """Build an automaton from ``delta(state_id, symbol_id) -> target or None``."""
        n = states if isinstance(states, int) else len(states)
        triples = []
        for s in range(n):
            for a in range(len(alphabet)):
                t = delta(s, a)
                if t is not None:
                    triples.append((s, a, t))
        return cls(states, alphabet, triples)


@dataclass(frozen=True)
class Partition:
    """A partition of ``range(n)`` in canonical block numbering.

    Block ids are assigned by first occurrence in state-id order, so two equal
    partitions have identical ``block_of`` tuples.
    """

    block_of: tuple[int, ...]

    def __init__(self, block_of: Iterable[Hashable]):
        ids, _ = _canonical_ids(list(block_of))
        object.__setattr__(self, "block_of", ids)

    @classmethod
    def from_blocks(cls, n: int, blocks: Iterable[Iterable[int]]) -> "Partition":
        owner = [-1] * n
        for b, members in enumerate(blocks):
            for s in members:
                if owner[s] != -1:
                    raise InvalidInput(f"state {s} appears in two blocks")
                owner[s] = b
        if -1 in owner:
            raise InvalidInput(f"state {owner.index(-1)} is in no block")
        return cls(owner)

    @classmethod
    def identity(cls, n: int) -> "Partition":
        return cls(range(n))

    @classmethod
    def constant(cls, n: int) -> "Partition":
        return cls([0] * n)

    def __len__(self) -> int:
        return len(self.block_of)

    @property
    def size(self) -> int:
        return len(self.block_of)

    @cached_property
    def block_count(self) -> int:
        return max(self.block_of) + 1 if self.block_of else 0

    @cached_property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.block_count)]
        for s, b in enumerate(self.block_of):
            out[b].append(s)
        return tuple(tuple(b) for b in out)

    def to_labeling(self) -> "Labeling":
        return Labeling(self.block_of)

    def __repr__(self) -> str:
        return f"Partition({[list(b) for b in self.blocks]})"


@dataclass(frozen=True)
class Labeling:
    """A total map from states to labels.

    Label ids are contiguous and assigned by first occurrence in state order;
    ``names[i]`` is the display name of label ``i``.
    """

    labels: tuple[int, ...]
    names: tuple[str, ...] = field(default=())

    def __init__(self, values: Iterable[Hashable], names: Optional[Sequence] = None):
        values = list(values)
        ids, distinct = _canonical_ids(values)
        if names is None:
            names = tuple(str(v) for v in distinct)
        else:
            # names are indexed by the caller's raw label values
            raw_names = list(names)
            if all(isinstance(v, int) for v in distinct):
                try:
                    names = tuple(str(raw_names[v]) for v in distinct)
                except IndexError:
                    raise InvalidInput("label name table too short") from None
            else:
                raise InvalidInput("explicit names need integer label values")
        object.__setattr__(self, "labels", ids)
        object.__setattr__(self, "names", names)

    @classmethod
    def constant(cls, n: int, name: str = "const") -> "Labeling":
        return cls([name] * n)

    @classmethod
    def identity(cls, n: int) -> "Labeling":
        return cls(range(n))

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, state: int) -> int:
        return self.labels[state]

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def label_count(self) -> int:
        return len(self.names)

    def name_of(self, state: int) -> str:
        return self.names[self.labels[state]]

    @cached_property
    def partition(self) -> Partition:
        return Partition(self.labels)

    def __eq__(self, other):
        if not isinstance(other, Labeling):
            return NotImplemented
        return self.labels == other.labels and self.names == other.names

    def __hash__(self):
        return hash((self.labels, self.names))


@dataclass(frozen=True)
class StateRelabeledTS:
    """A transition system paired with a total state labeling."""

    ts: TransitionSystem
    labeling: Labeling

    def __post_init__(self):
        if self.labeling.size != self.ts.n_states:
            raise DomainMismatch(
                f"labeling covers {self.labeling.size} states, system has {self.ts.n_states}"
            )

    def relabel(self, labeling) -> "StateRelabeledTS":
        if isinstance(labeling, Partition):
            labeling = labeling.to_labeling()
        return StateRelabeledTS(self.ts, labeling)


@dataclass(frozen=True)
class NondeterminismWitness:
    state: int
    symbol: int
    targets: tuple[int, ...]


@dataclass(frozen=True)
class FullnessWitness:
    state: int
    symbol: int


@dataclass(frozen=True)
class SufficiencyViolation:
    """States ``s`` and ``q`` share a label but their ``symbol``-successors do not."""

    s: int
    q: int
    symbol: int
    s_next: int
    q_next: int

    def replay(self, srts: StateRelabeledTS) -> bool:
        """Confirm this witness against ``srts``."""
        ts, lab = srts.ts, srts.labeling
        return (
            lab[self.s] == lab[self.q]
            and self.s_next in ts.successors(self.s, self.symbol)
            and self.q_next in ts.successors(self.q, self.symbol)
            and lab[self.s_next] != lab[self.q_next]
        )

    def to_dict(self) -> dict:
        return {"s": self.s, "q": self.q, "symbol": self.symbol,
                "s_next": self.s_next, "q_next": self.q_next}


def check_determinism(ts: TransitionSystem, states: Optional[Iterable[int]] = None
                      ) -> Optional[NondeterminismWitness]:
    """Return ``None`` if deterministic, else the first branching (state, symbol)."""
    scope = range(ts.n_states) if states is None else sorted(set(states))
    for s in scope:
        for a in range(ts.n_symbols):
            targets = ts.successors(s, a)
            if len(targets) > 1:
                return NondeterminismWitness(s, a, targets)
    return None


def check_fullness(ts: TransitionSystem, states: Optional[Iterable[int]] = None,
                   symbols: Optional[Iterable[int]] = None) -> Optional[FullnessWitness]:
    """Return ``None`` if every (state, symbol) in scope has a successor."""
    scope = range(ts.n_states) if states is None else sorted(set(states))
    syms = range(ts.n_symbols) if symbols is None else sorted(set(symbols))
    for s in scope:
        for a in syms:
            if not ts.successors(s, a):
                return FullnessWitness(s, a)
    return None


def check_sufficiency(srts: StateRelabeledTS) -> Optional[SufficiencyViolation]:
    """Test the labeling of ``srts`` for sufficiency.

    A labeling is sufficient iff, for every label and symbol, the successors
    of all states carrying that label agree on their label.  ``s == q`` is
    allowed, so a single state branching to differently labeled successors is
    a violation.  Returns ``None`` when sufficient, otherwise the violation
    with the lexicographically smallest ``(s, q, symbol)``.  Linear in ``|T|``.
    """
    ts, lab = srts.ts, srts.labeling.labels
    k = ts.n_symbols
    slot: dict[tuple[int, int], int] = {}
    conflicted: set[tuple[int, int]] = set()
    for s, a, t in ts.transitions:
        key = (lab[s], a)
        prev = slot.setdefault(key, lab[t])
        if prev != lab[t]:
            conflicted.add(key)
    if not conflicted:
        return None

    s = next(s for s, a, _ in ts.transitions if (lab[s], a) in conflicted)
    out = ts._out
    best = None
    for q in range(ts.n_states):
        if lab[q] != lab[s]:
            continue
        for a in range(k):
            if (lab[s], a) not in conflicted:
                continue
            s_succ, q_succ = out[s * k + a], out[q * k + a]
            pair = next(((x, y) for x in s_succ for y in q_succ if lab[x] != lab[y]), None)
            if pair is not None:
                best = SufficiencyViolation(s, q, a, pair[0], pair[1])
                break
        if best is not None:
            break
    assert best is not None
    return best


def is_sufficient(srts: StateRelabeledTS) -> bool:
    return check_sufficiency(srts) is None


def violation_at(srts: StateRelabeledTS, s: int, q: int, symbol: int
                 ) -> Optional[SufficiencyViolation]:
    """Return the violation witnessed by the specific triple, if it is one."""
    ts, lab = srts.ts, srts.labeling
    if lab[s] != lab[q]:
        return None
    for x in ts.successors(s, symbol):
        for y in ts.successors(q, symbol):
            if lab[x] != lab[y]:
                return SufficiencyViolation(s, q, symbol, x, y)
    return None


def quotient(srts: StateRelabeledTS) -> StateRelabeledTS:
    """The quotient system by the labeling; output labeling is the identity.

    Sufficiency is deliberately not checked here, so quotients by
    insufficient labelings come out nondeterministic.
    """
    ts = srts.ts
    part = srts.labeling.partition
    bo = part.block_of
    names = ["{" + ",".join(ts.states[s] for s in block) + "}" for block in part.blocks]
    triples = {(bo[s], a, bo[t]) for s, a, t in ts.transitions}
    qts = TransitionSystem(names, ts.alphabet, triples)
    return StateRelabeledTS(qts, Labeling.identity(part.block_count))


def _same_domain(a: Partition, b: Partition) -> None:
    if a.size != b.size:
        raise DomainMismatch(f"partitions over {a.size} and {b.size} states")


def refines(a: Partition, b: Partition) -> bool:
    """True iff every block of ``a`` lies inside a block of ``b``."""
    _same_domain(a, b)
    image: dict[int, int] = {}
    for ba, bb in zip(a.block_of, b.block_of):
        if image.setdefault(ba, bb) != bb:
            return False
    return True


def common_refinement(a: Partition, b: Partition) -> Partition:
    """Coarsest partition refining both (blockwise intersection)."""
    _same_domain(a, b)
    return Partition(zip(a.block_of, b.block_of))


def common_coarsening(a: Partition, b: Partition) -> Partition:
    """Finest partition coarsened by both (union of overlapping blocks)."""
    _same_domain(a, b)
    n = a.size
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for part in (a, b):
        for block in part.blocks:
            root = find(block[0])
            for s in block[1:]:
                r = find(s)
                if r != root:
                    parent[max(r, root)] = min(r, root)
                    root = min(r, root)
    return Partition(find(s) for s in range(n))
