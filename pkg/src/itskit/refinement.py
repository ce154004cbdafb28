"""Minimal sufficient refinements, minimality certificates and exhaustive oracles."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional

from . import kernels
from .core import (
    Partition,
    StateRelabeledTS,
    SufficiencyViolation,
    check_sufficiency,
    refines,
)
from .errors import InvalidInput, NondeterministicInput, TooLarge

STRICT = "strict"
WILDCARD = "frontier-wildcard"
MODES = (STRICT, WILDCARD)


@dataclass(frozen=True)
class RefinementResult:
    partition: Partition
    sufficient: bool
    iterations: int
    mode: str = STRICT

    @property
    def block_count(self) -> int:
        return self.partition.block_count


@dataclass(frozen=True)
class NoSufficientRefinement:
    """State ``state`` reaches differently-blocked states on one symbol.

    Refinement only ever splits blocks, so the two successors can never be
    reunited and no sufficient refinement exists.
    """

    state: int
    symbol: int
    first: int
    second: int
    partition: Partition

    def replay(self, srts: StateRelabeledTS) -> bool:
        succ = srts.ts.successors(self.state, self.symbol)
        bo = self.partition.block_of
        return (self.first in succ and self.second in succ
                and bo[self.first] != bo[self.second]
                and refines(self.partition, srts.labeling.partition))

    def to_dict(self) -> dict:
        return {"state": self.state, "symbol": self.symbol,
                "successors": [self.first, self.second]}


def minimal_sufficient_refinement(
    srts: StateRelabeledTS,
    mode: str = STRICT,
    frontier: Optional[Iterable[int]] = None,
    unlabeled: Optional[Iterable[int]] = None,
    backend: Optional[str] = None,
) -> RefinementResult:
    """Coarsest sufficient partition refining the labeling of an automaton.

    In ``strict`` mode a missing successor is a distinguished signature entry.
    In ``frontier-wildcard`` mode the ``frontier`` states (by default, the
    states with no outgoing transitions) never trigger splits: each round they
    are placed into the block that their predecessor's block-mates reach on
    the same symbol.  ``unlabeled`` states are frontier-like and also ignore
    their own label.
    """
    ts = srts.ts
    if not ts.deterministic:
        raise NondeterministicInput(
            "minimal_sufficient_refinement needs an automaton; "
            "use sufficient_refinement_general")
    if mode not in MODES:
        raise InvalidInput(f"unknown mode {mode!r}")
    n, k = ts.n_states, ts.n_symbols
    labels = list(srts.labeling.labels)
    wild = [False] * n
    free = [False] * n
    if mode == WILDCARD:
        if frontier is None:
            frontier = [s for s in range(n)
                        if not any(ts.successors(s, a) for a in range(k))]
        for s in frontier:
            wild[s] = True
        for s in unlabeled or ():
            wild[s] = free[s] = True
    block_of, rounds = kernels.refine(n, k, ts.delta_table(), labels, wild, free,
                                      ts.predecessors, backend=backend)
    part = Partition(block_of)
    ok = check_sufficiency(srts.relabel(part)) is None
    return RefinementResult(part, ok, rounds, mode)


def sufficient_refinement_general(srts: StateRelabeledTS):
    """Refinement with set-valued signatures for nondeterministic systems.

    Returns a :class:`RefinementResult` or, when some state's successors on
    one symbol end up in two blocks, a :class:`NoSufficientRefinement`.
    Absent successors form their own (empty) signature entry.
    """
    ts = srts.ts
    n, k = ts.n_states, ts.n_symbols
    blocks = list(srts.labeling.labels)
    nb = srts.labeling.label_count
    rounds = 0
    while True:
        sigs: dict = {}
        new = [0] * n
        for s in range(n):
            entries = []
            for a in range(k):
                targets = ts.successors(s, a)
                seen = sorted({blocks[t] for t in targets})
                if len(seen) > 1:
                    first = min(targets)
                    second = min(t for t in targets if blocks[t] != blocks[first])
                    return NoSufficientRefinement(s, a, first, second, Partition(blocks))
                entries.append(seen[0] if seen else -1)
            new[s] = sigs.setdefault((blocks[s], *entries), len(sigs))
        if len(sigs) == nb:
            break
        rounds += 1
        nb = len(sigs)
        blocks = new
    part = Partition(blocks)
    return RefinementResult(part, check_sufficiency(srts.relabel(part)) is None, rounds)


@dataclass(frozen=True)
class OracleResult:
    partition: Optional[Partition]
    unique: bool
    examined: int
    solutions: int = 0


def _set_partitions(n: int):
    """All restricted-growth strings of length ``n``."""
    if n == 0:
        yield []
        return
    rgs = [0] * n
    maxes = [0] * n

    def rec(i):
        if i == n:
            yield rgs
            return
        for b in range(maxes[i - 1] + 2):
            rgs[i] = b
            maxes[i] = max(maxes[i - 1], b)
            yield from rec(i + 1)

    rgs[0] = 0
    maxes[0] = 0
    yield from rec(1)


def brute_force_msr(srts: StateRelabeledTS, max_states: int = 10) -> OracleResult:
    """Enumerate every partition; keep the sufficient refinements; return the coarsest.

    ``unique`` reports whether exactly one sufficient refinement attains the
    minimum block count.  Bell-number cost, hence the state bound.
    """
    n = srts.ts.n_states
    if n > max_states:
        raise TooLarge(f"{n} states exceeds the enumeration bound {max_states}")
    target = srts.labeling.partition
    best: Optional[Partition] = None
    best_count = None
    ties = 0
    examined = 0
    solutions = 0
    for rgs in _set_partitions(n):
        examined += 1
        part = Partition(rgs)
        if not refines(part, target):
            continue
        if check_sufficiency(srts.relabel(part)) is not None:
            continue
        solutions += 1
        c = part.block_count
        if best_count is None or c < best_count:
            best, best_count, ties = part, c, 1
        elif c == best_count:
            ties += 1
    return OracleResult(best, ties == 1, examined, solutions)


def exhaustive_min_sufficient(srts: StateRelabeledTS, max_blocks: Optional[int] = None
                              ) -> OracleResult:
    """Backtracking search for the fewest-block sufficient refinement.

    Exhaustive like :func:`brute_force_msr` but prunes partial assignments
    that already break refinement or sufficiency, so it reaches trees with a
    few dozen states.  Counts up to two optimal solutions to decide
    uniqueness.
    """
    ts = srts.ts
    lab = srts.labeling.labels
    n, k = ts.n_states, ts.n_symbols
    preds = ts.predecessors
    lo = srts.labeling.label_count
    hi = n if max_blocks is None else max_blocks
    assign = [-1] * n
    members: list[list[int]] = []
    block_label: list[int] = []
    examined = 0

    def consistent(block: int, a: int) -> bool:
        seen = -1
        for m in members[block]:
            for t in ts.successors(m, a):
                bt = assign[t]
                if bt < 0:
                    continue
                if seen < 0:
                    seen = bt
                elif bt != seen:
                    return False
        return True

    def search(v: int, limit: int, found: list) -> None:
        nonlocal examined
        if len(found) >= 2:
            return
        if v == n:
            found.append(Partition(assign))
            return
        choices = list(range(len(members)))
        if len(members) < limit:
            choices.append(len(members))
        for b in choices:
            if b < len(members) and block_label[b] != lab[v]:
                continue
            examined += 1
            if b == len(members):
                members.append([])
                block_label.append(lab[v])
            members[b].append(v)
            assign[v] = b
            ok = all(consistent(b, a) for a in range(k)) and all(
                consistent(assign[p], a) for p, a in preds[v] if assign[p] >= 0)
            if ok:
                search(v + 1, limit, found)
            assign[v] = -1
            members[b].pop()
            if not members[b]:
                members.pop()
                block_label.pop()
            if len(found) >= 2:
                return

    for limit in range(max(lo, 1) if n else 0, hi + 1):
        found: list = []
        search(0, limit, found)
        if found:
            return OracleResult(found[0], len(found) == 1, examined, len(found))
    return OracleResult(None, False, examined, 0)


@dataclass(frozen=True)
class MergeVerdict:
    first: int
    second: int
    reason: str  # "refinement", "sufficiency" or "mergeable"
    violation: Optional[SufficiencyViolation] = None


@dataclass(frozen=True)
class MinimalityCertificate:
    """Per-pair merge verdicts plus, for full automata, a global cross-check.

    Surviving no pairwise merge does not rule out a coarser sufficient
    partition that merges three or more blocks at once (a 3-cycle under a
    constant labeling is the smallest case).  ``coarser`` holds the unique
    coarsest sufficient refinement when it is strictly coarser than the
    certified partition.
    """

    minimal: bool
    verdicts: tuple[MergeVerdict, ...] = field(default=())
    coarser: Optional[Partition] = None

    @property
    def mergeable(self) -> Optional[tuple[int, int]]:
        for v in self.verdicts:
            if v.reason == "mergeable":
                return (v.first, v.second)
        return None

    def reasons(self) -> dict[tuple[int, int], str]:
        return {(v.first, v.second): v.reason for v in self.verdicts}

    def report(self) -> dict:
        return {
            "minimal": self.minimal,
            "coarser": list(self.coarser.block_of) if self.coarser else None,
            "pairs": [
                {"blocks": [v.first, v.second], "reason": v.reason,
                 "violation": v.violation.to_dict() if v.violation else None}
                for v in self.verdicts
            ],
        }


def certify_minimality(srts: StateRelabeledTS, p: Partition) -> MinimalityCertificate:
    """Check that no pairwise merge of blocks of ``p`` stays a sufficient refinement.

    Each unordered block pair gets a verdict: merging breaks refinement of
    the labeling, breaks sufficiency (with the violation), or survives.  On
    full automata ``p`` is also compared with the unique coarsest result.
    """
    target = srts.labeling.partition
    if not refines(p, target):
        raise InvalidInput("partition does not refine the labeling")
    if check_sufficiency(srts.relabel(p)) is not None:
        raise InvalidInput("partition is not sufficient")
    block_label = {}
    for s, b in enumerate(p.block_of):
        block_label.setdefault(b, target.block_of[s])
    verdicts = []
    for i, j in combinations(range(p.block_count), 2):
        if block_label[i] != block_label[j]:
            verdicts.append(MergeVerdict(i, j, "refinement"))
            continue
        merged = Partition(i if b == j else b for b in p.block_of)
        v = check_sufficiency(srts.relabel(merged))
        verdicts.append(MergeVerdict(i, j, "sufficiency" if v else "mergeable", v))
    coarser = None
    if srts.ts.deterministic and srts.ts.full:
        best = minimal_sufficient_refinement(srts).partition
        if best != p:
            coarser = best
    minimal = coarser is None and all(v.reason != "mergeable" for v in verdicts)
    return MinimalityCertificate(minimal, tuple(verdicts), coarser)
