"""Command-line front end.

Exit codes: 0 ok, 1 property fails, 2 input error, 3 no solution, 4 size cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import io
from .core import (
    Partition,
    StateRelabeledTS,
    TransitionSystem,
    check_determinism,
    check_fullness,
    check_sufficiency,
    quotient,
)
from .errors import ItsError, SizeLimit, TooLarge
from .filters import DITS, localization_machine, reachable_belief_dits, run_filter
from .history import VIEWS, HistoryTree, TaskMachine, Trial, build_history_tree, label_tree, learn_dits_from_trials
from .model import ExternalModel
from .plan import (
    PolicyDITS,
    check_feasible,
    compute_reachable_set,
    couple_and_run,
    minimize_for_policy,
    synthesize_policy,
)
from .refinement import (
    MODES,
    STRICT,
    NoSufficientRefinement,
    certify_minimality,
    minimal_sufficient_refinement,
    sufficient_refinement_general,
)
from . import worlds

OK, FAILS, BAD_INPUT, NO_SOLUTION, CAP = 0, 1, 2, 3, 4


class UsageError(ItsError):
    pass


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=1, ensure_ascii=False) + "\n"


def _raw(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise UsageError(f"{path}: malformed JSON: {err}") from None
    if not isinstance(data, dict):
        raise UsageError(f"{path}: expected a JSON object")
    return data


def _expect(path: str, *types):
    obj = io.from_dict(_raw(path))
    if not isinstance(obj, types):
        names = "/".join(t.__name__ for t in types)
        raise UsageError(f"{path}: expected {names}, got {type(obj).__name__}")
    return obj


def _labeled(path: str) -> tuple[StateRelabeledTS, Optional[dict]]:
    """A labeled system plus the raw dict (for frontier information)."""
    d = _raw(path)
    if "labels" not in d:
        raise UsageError(f"{path}: a labeling is required")
    ts = io.from_dict({k: d[k] for k in ("states", "alphabet", "transitions") if k in d})
    if isinstance(ts, ExternalModel) or not isinstance(ts, TransitionSystem):
        raise UsageError(f"{path}: expected a labeled transition system")
    return StateRelabeledTS(ts, io._labeling_from(d)), d


def _ids(text: Optional[str]):
    if not text:
        return None
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated state ids, got {text!r}") from None


def _names(text: Optional[str]) -> list[str]:
    return [v for v in (text or "").split(",") if v]


# ---------------------------------------------------------------- commands

def cmd_check(args) -> int:
    d = _raw(args.file)
    ts = io.from_dict({k: d[k] for k in ("states", "alphabet", "transitions") if k in d})
    if not isinstance(ts, TransitionSystem):
        raise UsageError(f"{args.file}: expected a transition system")
    srts = StateRelabeledTS(ts, io._labeling_from(d)) if "labels" in d else None
    report: dict = {}
    ok = True
    props = ("determinism", "fullness", "sufficiency") if args.property == "all" else (args.property,)
    for prop in props:
        if prop == "determinism":
            w = check_determinism(ts)
            report[prop] = None if w is None else {"state": w.state, "symbol": w.symbol,
                                                    "targets": list(w.targets)}
        elif prop == "fullness":
            w = check_fullness(ts)
            report[prop] = None if w is None else {"state": w.state, "symbol": w.symbol}
        else:
            if srts is None:
                raise UsageError("sufficiency needs a labeling")
            v = check_sufficiency(srts)
            report[prop] = None if v is None else v.to_dict()
        ok = ok and report[prop] is None
    _emit(args, _json({"holds": ok, "witnesses": report}))
    return OK if ok else FAILS


def cmd_minimize(args) -> int:
    srts, d = _labeled(args.file)
    frontier = d.get("frontier") if args.mode != STRICT else None
    if not srts.ts.deterministic:
        res = sufficient_refinement_general(srts)
        if isinstance(res, NoSufficientRefinement):
            _emit(args, _json({"solution": None, "witness": res.to_dict()}))
            return NO_SOLUTION
        cert = None
    else:
        res = minimal_sufficient_refinement(srts, args.mode, frontier=frontier)
        cert = certify_minimality(srts, res.partition).report() if args.certify else None
    q = quotient(srts.relabel(res.partition))
    out = {"partition": list(res.partition.block_of), "block_count": res.partition.block_count,
           "sufficient": res.sufficient, "iterations": res.iterations, "mode": res.mode,
           "quotient": io.to_dict(q.ts), "deterministic": q.ts.deterministic}
    if cert is not None:
        out["certificate"] = cert
    _emit(args, _json(out))
    return OK


def cmd_quotient(args) -> int:
    srts, _ = _labeled(args.file)
    if args.partition:
        p = _expect(args.partition, Partition)
        srts = srts.relabel(p)
    _emit(args, io.dumps(quotient(srts).ts))
    return OK


def cmd_build_tree(args) -> int:
    tree = build_history_tree(_names(args.actions), _names(args.observations), _ids(args.init),
                              args.depth, args.view, args.max_nodes)
    _emit(args, io.dumps(tree))
    return OK


def cmd_label(args) -> int:
    tree = _expect(args.tree, HistoryTree)
    machine = _expect(args.machine, TaskMachine)
    lab = label_tree(machine, tree)
    d = io.to_dict(tree)
    d.update(io.to_dict(lab))
    _emit(args, _json(d))
    return OK


def _trials(path: str) -> list[Trial]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise UsageError(f"{path}: malformed JSON: {err}") from None
    if isinstance(data, dict):
        data = data.get("trials", [data])
    out = [io.from_dict(t) for t in data]
    if not all(isinstance(t, Trial) for t in out):
        raise UsageError(f"{path}: expected trials")
    return out


def cmd_filter(args) -> int:
    d = _expect(args.dits, DITS)
    runs = []
    for t in _trials(args.trace):
        r = run_filter(d, t)
        runs.append({"states": list(r.states), "outputs": list(r.outputs)})
    _emit(args, _json(runs[0] if len(runs) == 1 else runs))
    return OK


def cmd_belief(args) -> int:
    model = _expect(args.model, ExternalModel)
    X0 = _ids(args.initial) or list(range(model.n_states))
    _emit(args, io.dumps(reachable_belief_dits(model, X0, args.depth, args.max_nodes)))
    return OK


def cmd_simulate(args) -> int:
    model = _expect(args.model, ExternalModel)
    plan = _expect(args.plan, PolicyDITS)
    task = _expect(args.machine, TaskMachine)
    xs = _ids(args.initial) or list(range(model.n_states))
    report = {}
    for x in xs:
        try:
            tr = couple_and_run(model, plan, task, x, args.max_steps)
        except ItsError as err:
            if getattr(err, "partial", None) is None:
                raise
            tr = err.partial
        report[str(x)] = tr.to_dict()
    _emit(args, _json(report))
    return OK


def cmd_reach(args) -> int:
    model = _expect(args.model, ExternalModel)
    task = _expect(args.machine, TaskMachine)
    R = compute_reachable_set(model, task, _ids(args.initial))
    _emit(args, _json({"reachable": sorted(R)}))
    return OK


def cmd_feasible(args) -> int:
    model = _expect(args.model, ExternalModel)
    plan = _expect(args.plan, PolicyDITS)
    task = _expect(args.machine, TaskMachine)
    v = check_feasible(model, plan, task, _ids(args.initial))
    out = {"feasible": v.feasible, "reasons": {str(k): r for k, r in v.reasons.items()}}
    if not v.feasible:
        out["counterexample"] = v.counterexample
        out["trace"] = io.to_dict(v.trace.to_trial())
        out["reason"] = v.trace.reason
    _emit(args, _json(out))
    return OK if v.feasible else FAILS


def cmd_synthesize(args) -> int:
    model = _expect(args.model, ExternalModel)
    task = _expect(args.machine, TaskMachine)
    X0 = _ids(args.initial) or list(range(model.n_states))
    res = synthesize_policy(model, X0, task, args.horizon, args.max_nodes)
    if not res.feasible:
        _emit(args, _json({"feasible": False, "reachable": sorted(res.reachable),
                           "losing": [{"belief": list(b), "machine": m} for b, m in res.losing]}))
        return NO_SOLUTION
    _emit(args, io.dumps(res.plan))
    return OK


def cmd_minimize_plan(args) -> int:
    plan = _expect(args.plan, PolicyDITS)
    _emit(args, io.dumps(minimize_for_policy(plan)))
    return OK


def cmd_learn(args) -> int:
    trials = _trials(args.trials)
    res = learn_dits_from_trials(trials, args.mode, args.view, _names(args.alphabet) or None)
    out = {"partition": list(res.partition.block_of), "sufficient": res.sufficient,
           "labels": list(res.labeling.names[i] for i in res.labeling.labels)}
    if res.dits is not None:
        out["dits"] = io.to_dict(res.dits)
    _emit(args, _json(out))
    return OK if res.dits is not None else NO_SOLUTION


def cmd_gen_world(args) -> int:
    kind = args.kind
    if kind == "gate":
        obj = worlds.gate_world(worlds.GateWorldConfig(args.regions, args.active))
    elif kind == "corridor":
        model, X0 = worlds.l_corridor_family(args.bound)
        d = io.to_dict(model)
        d["initial_belief"] = list(X0)
        _emit(args, _json(d))
        return OK
    elif kind == "consistency-machine":
        obj = worlds.consistency_machine()
        if args.view != "observations":
            obj = worlds.lift_machine(obj, args.view, worlds.PASSIVE_ACTIONS if not args.active
                                      else worlds.ACTIVE_ACTIONS)
    elif kind == "lap-machine":
        obj = worlds.lift_machine(worlds.lap_machine(args.length or args.regions + 1), "pairs",
                                  worlds.ACTIVE_ACTIONS)
    elif kind == "localization-machine":
        model, X0 = worlds.l_corridor_family(args.bound)
        obj = localization_machine(model, X0, worlds.corridor_position(model))
    elif kind == "gate-plan":
        obj = worlds.three_state_gate_plan()
    elif kind == "two-phase-plan":
        obj = worlds.two_phase_plan(args.bound)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(kind)
    _emit(args, io.dumps(obj))
    return OK


def cmd_random(args) -> int:
    ts = worlds.random_automaton(args.states, args.symbols, args.seed)
    lab = worlds.random_labeling(args.states, args.labels, args.seed + 1)
    _emit(args, io.dumps(StateRelabeledTS(ts, lab)))
    return OK


def cmd_export_dot(args) -> int:
    d = _raw(args.file)
    obj = io.from_dict(d)
    if isinstance(obj, (TransitionSystem, HistoryTree)) and "labels" in d:
        ts = obj.ts if isinstance(obj, HistoryTree) else obj
        obj = StateRelabeledTS(ts, io._labeling_from(d))
    _emit(args, io.to_dot(obj))
    return OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="itskit", description="Information transition system toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        sp.add_argument("-o", "--out", help="write output here instead of stdout")
        return sp

    sp = add("check", cmd_check, "determinism / fullness / sufficiency")
    sp.add_argument("file")
    sp.add_argument("--property", choices=("determinism", "fullness", "sufficiency", "all"),
                    default="sufficiency")

    sp = add("minimize", cmd_minimize, "minimal sufficient refinement of a labeled system")
    sp.add_argument("file")
    sp.add_argument("--mode", choices=MODES, default=STRICT)
    sp.add_argument("--certify", action="store_true", help="attach a pairwise-merge certificate")

    sp = add("quotient", cmd_quotient, "quotient by the labeling or a partition file")
    sp.add_argument("file")
    sp.add_argument("--partition")

    sp = add("build-tree", cmd_build_tree, "truncated history tree")
    sp.add_argument("--actions", default="")
    sp.add_argument("--observations", required=True)
    sp.add_argument("--depth", type=int, default=3)
    sp.add_argument("--view", choices=VIEWS, default="pairs")
    sp.add_argument("--init", help="initial state id(s)")
    sp.add_argument("--max-nodes", type=int, default=200_000)

    sp = add("label", cmd_label, "label a history tree with a task machine")
    sp.add_argument("tree")
    sp.add_argument("machine")

    sp = add("filter", cmd_filter, "run a DITS on a trace")
    sp.add_argument("dits")
    sp.add_argument("trace")

    sp = add("belief", cmd_belief, "reachable belief DITS of a model")
    sp.add_argument("model")
    sp.add_argument("--initial")
    sp.add_argument("--depth", type=int, default=0)
    sp.add_argument("--max-nodes", type=int, default=100_000)

    for name, fn, help_ in (("simulate", cmd_simulate, "coupled runs from initial states"),
                            ("feasible", cmd_feasible, "feasibility check of a plan")):
        sp = add(name, fn, help_)
        sp.add_argument("model")
        sp.add_argument("plan")
        sp.add_argument("machine")
        sp.add_argument("--initial")
        if name == "simulate":
            sp.add_argument("--max-steps", type=int, default=1000)

    sp = add("reach", cmd_reach, "states from which the goal is reachable")
    sp.add_argument("model")
    sp.add_argument("machine")
    sp.add_argument("--initial")

    sp = add("synthesize", cmd_synthesize, "belief-space policy synthesis")
    sp.add_argument("model")
    sp.add_argument("machine")
    sp.add_argument("--initial")
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--max-nodes", type=int, default=200_000)

    sp = add("minimize-plan", cmd_minimize_plan, "policy-preserving plan minimization")
    sp.add_argument("plan")

    sp = add("learn", cmd_learn, "learn a DITS from labeled trials")
    sp.add_argument("trials")
    sp.add_argument("--mode", choices=MODES, default=STRICT)
    sp.add_argument("--view", choices=VIEWS)
    sp.add_argument("--alphabet", help="comma-separated symbol order")

    sp = add("gen-world", cmd_gen_world, "generate example worlds, machines and plans")
    sp.add_argument("kind", choices=("gate", "corridor", "consistency-machine", "lap-machine",
                                     "localization-machine", "gate-plan", "two-phase-plan"))
    sp.add_argument("--regions", type=int, default=4)
    sp.add_argument("--active", action="store_true")
    sp.add_argument("--bound", type=int, default=2)
    sp.add_argument("--length", type=int)
    sp.add_argument("--view", choices=VIEWS, default="observations")

    sp = add("random", cmd_random, "seeded random labeled automaton")
    sp.add_argument("--states", type=int, default=6)
    sp.add_argument("--symbols", type=int, default=2)
    sp.add_argument("--labels", type=int, default=2)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("export-dot", cmd_export_dot, "Graphviz DOT of any system file")
    sp.add_argument("file")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    try:
        return args.func(args)
    except (SizeLimit, TooLarge) as err:
        print(f"itskit: {err}", file=sys.stderr)
        return CAP
    except ItsError as err:
        print(f"itskit: {err}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
