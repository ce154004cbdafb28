"""JSON (de)serialization of every artifact type and DOT export.

Field order is fixed and arrays come out in canonical order, so dumping the
same value twice gives byte-identical text.
"""
from __future__ import annotations

import json
from collections import deque
from typing import Any, Optional

from .core import Labeling, Partition, StateRelabeledTS, TransitionSystem
from .errors import InvalidInput
from .filters import DITS, BeliefDITS
from .history import (
    ALTERNATING,
    PAIRS,
    HistoryState,
    HistoryTree,
    TaskMachine,
    Trial,
)
from .model import ExternalModel
from .plan import CoupledTrace, PolicyDITS


def dumps(obj: Any) -> str:
    return json.dumps(to_dict(obj), indent=1, ensure_ascii=False) + "\n"


def loads(text: str) -> Any:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise InvalidInput(f"malformed JSON: {err}") from None
    return from_dict(data)


def load(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as err:
        raise InvalidInput(f"cannot read {path}: {err}") from None


def _ts_fields(ts: TransitionSystem) -> dict:
    return {"states": list(ts.states), "alphabet": list(ts.alphabet),
            "transitions": [list(t) for t in ts.transitions]}


def _labels_fields(lab: Labeling) -> dict:
    return {"labels": list(lab.labels), "label_names": list(lab.names)}


def to_dict(obj: Any) -> dict:
    if isinstance(obj, HistoryTree):
        d = _ts_fields(obj.ts)
        d.update(frontier=sorted(obj.frontier), view=obj.view, actions=list(obj.U),
                 observations=list(obj.Y), depth=obj.depth)
        if obj.init is not None:
            d["init"] = obj.init if isinstance(obj.init, int) else list(obj.init)
        return d
    if isinstance(obj, TransitionSystem):
        return _ts_fields(obj)
    if isinstance(obj, StateRelabeledTS):
        d = _ts_fields(obj.ts)
        d.update(_labels_fields(obj.labeling))
        return d
    if isinstance(obj, Partition):
        return {"partition": list(obj.block_of), "block_count": obj.block_count}
    if isinstance(obj, Labeling):
        return _labels_fields(obj)
    if isinstance(obj, PolicyDITS):
        d = to_dict(obj.dits)
        d["policy"] = list(obj.policy)
        d["actions"] = list(obj.actions)
        return d
    if isinstance(obj, DITS):
        d = _ts_fields(obj.ts)
        d["initial"] = obj.initial
        d["view"] = obj.view
        if obj.outputs is not None:
            d["outputs"] = list(obj.outputs)
        if isinstance(obj, BeliefDITS):
            d["beliefs"] = [list(b) for b in obj.beliefs]
        return d
    if isinstance(obj, TaskMachine):
        d = _ts_fields(obj.ts)
        d.update(outputs=list(obj.outputs), view=obj.view, initial=obj.initial,
                 goal=sorted(obj.goal))
        return d
    if isinstance(obj, ExternalModel):
        d = _ts_fields(obj.ts)
        d.update(labels=list(obj.obs), observations=list(obj.observations))
        return d
    if isinstance(obj, Trial):
        d = {"view": obj.view, "init": obj.init,
             "events": [list(e) for e in obj.events],
             "labels": {str(k): v for k, v in sorted(obj.labels.items())}}
        return d
    if isinstance(obj, CoupledTrace):
        return obj.to_dict()
    raise InvalidInput(f"cannot serialize {type(obj).__name__}")


def _ts_from(d: dict) -> TransitionSystem:
    try:
        return TransitionSystem(d["states"], d["alphabet"], d.get("transitions", []))
    except (KeyError, TypeError, ValueError) as err:
        if isinstance(err, InvalidInput):
            raise
        raise InvalidInput(f"bad transition system: {err!r}") from None


def _labeling_from(d: dict) -> Labeling:
    labels = d["labels"]
    names = d.get("label_names")
    if names is not None:
        if not all(isinstance(v, int) for v in labels):
            raise InvalidInput("label_names needs integer labels")
        return Labeling(labels, names)
    return Labeling(labels)


def tree_from_dict(d: dict) -> HistoryTree:
    """Rebuild a :class:`HistoryTree` by walking the stored tree from node 0."""
    ts = _ts_from(d)
    view = d["view"]
    U, Y = tuple(d.get("actions", ())), tuple(d.get("observations", ()))
    init = d.get("init")
    if isinstance(init, list):
        init = tuple(init)
    hist: list[Optional[HistoryState]] = [None] * ts.n_states
    parent = [-1] * ts.n_states
    hist[0] = HistoryState(init)
    queue = deque([0])
    while queue:
        s = queue.popleft()
        for a in range(ts.n_symbols):
            for t in ts.successors(s, a):
                sym = ts.alphabet[a]
                if view == PAIRS and "/" in sym:
                    u, y = sym.split("/", 1)
                    ev = (("u", u), ("y", y))
                elif view == ALTERNATING and sym in U:
                    ev = (("u", sym),)
                else:
                    ev = (("y", sym),)
                if hist[t] is not None:
                    raise InvalidInput("stored tree is not tree-shaped")
                hist[t] = HistoryState(init, hist[s].events + ev)
                parent[t] = s
                queue.append(t)
    if any(h is None for h in hist):
        raise InvalidInput("stored tree has unreachable nodes")
    return HistoryTree(ts, tuple(hist), tuple(parent), frozenset(d.get("frontier", ())),
                       view, int(d.get("depth", 0)), U, Y, init)


def from_dict(d: Any) -> Any:
    """Inverse of :func:`to_dict`; the artifact type is recognised by its keys."""
    if not isinstance(d, dict):
        raise InvalidInput("expected a JSON object")
    try:
        if "partition" in d:
            return Partition(d["partition"])
        if "events" in d:
            return Trial(tuple(tuple(e) for e in d["events"]), d.get("labels", {}),
                         d.get("view", PAIRS), d.get("init"))
        if "states" not in d and "labels" in d:
            return _labeling_from(d)
        if "policy" in d:
            dits = _dits_from(d)
            policy = [None if u is None else int(u) for u in d["policy"]]
            return PolicyDITS(dits, tuple(policy), tuple(d["actions"]))
        if "goal" in d:
            return TaskMachine(_ts_from(d), tuple(d["outputs"]), int(d["initial"]),
                               d["view"], frozenset(d["goal"]))
        if "observations" in d and "frontier" not in d:
            return ExternalModel(_ts_from(d), tuple(d["labels"]), tuple(d["observations"]))
        if "frontier" in d and "view" in d:
            return tree_from_dict(d)
        if "initial" in d:
            return _dits_from(d)
        ts = _ts_from(d)
        if "labels" in d:
            return StateRelabeledTS(ts, _labeling_from(d))
        return ts
    except (KeyError, TypeError) as err:
        raise InvalidInput(f"missing or malformed field: {err!r}") from None


def _dits_from(d: dict) -> DITS:
    ts = _ts_from(d)
    outputs = tuple(d["outputs"]) if d.get("outputs") is not None else None
    view = d.get("view", PAIRS)
    if "beliefs" in d:
        return BeliefDITS(ts, int(d["initial"]), outputs, view,
                          tuple(tuple(b) for b in d["beliefs"]))
    return DITS(ts, int(d["initial"]), outputs, view)


def labeled_tree(d: dict) -> tuple[HistoryTree, Optional[Labeling]]:
    """A tree plus its labels when the JSON carries them."""
    tree = tree_from_dict(d)
    return tree, (_labeling_from(d) if "labels" in d else None)


def _q(s: str) -> str:
    return '"' + str(s).replace('"', '\\"') + '"'


def to_dot(obj: Any, name: str = "its") -> str:
    """Graphviz text; states are annotated with their label or output when known."""
    labels: Optional[list] = None
    initial = None
    if isinstance(obj, StateRelabeledTS):
        ts, labels = obj.ts, [obj.labeling.name_of(s) for s in range(obj.ts.n_states)]
    elif isinstance(obj, PolicyDITS):
        ts, initial = obj.dits.ts, obj.initial
        labels = [obj.action(s) or "-" for s in range(ts.n_states)]
    elif isinstance(obj, (DITS, TaskMachine)):
        ts, initial = obj.ts, obj.initial
        labels = list(obj.outputs) if obj.outputs is not None else None
    elif isinstance(obj, ExternalModel):
        ts = obj.ts
        labels = [obj.observations[y] for y in obj.obs]
    elif isinstance(obj, HistoryTree):
        ts, initial = obj.ts, 0
    elif isinstance(obj, TransitionSystem):
        ts = obj
    else:
        raise InvalidInput(f"cannot draw {type(obj).__name__}")
    lines = [f"digraph {_q(name)} {{", "  rankdir=LR;"]
    for s, nm in enumerate(ts.states):
        text = nm if labels is None else f"{nm}\\n[{labels[s]}]"
        shape = ', shape="doublecircle"' if s == initial else ""
        lines.append(f"  n{s} [label={_q(text)}{shape}];")
    edges: dict = {}
    for s, a, t in ts.transitions:
        edges.setdefault((s, t), []).append(ts.alphabet[a])
    for (s, t), syms in sorted(edges.items()):
        lines.append(f"  n{s} -> n{t} [label={_q(','.join(syms))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
