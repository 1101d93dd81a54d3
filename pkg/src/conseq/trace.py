"""Machine-checkable run traces.

A trace is the list of rule firings of one run, each with its source and
target state. validate_structure replays the rules and checks the path shape;
validate_semantics re-derives the true consequence set by brute force and
checks every state and oracle outcome against it. Both return all violations
rather than stopping at the first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

from .logic import (
    CnfFormula,
    Program,
    Theory,
    Vocabulary,
    atom_of,
    atoms_of,
    brute_consequences,
    enumerate_models,
    is_positive,
    neg_lit,
    pos_lit,
)
from .parsers import ParseError
from .transitions import (
    Action,
    Chunk,
    ControlState,
    Core,
    CoreState,
    EvalState,
    Over,
    PreState,
    RuleId,
    State,
    TerminalCont,
    TerminalOk,
    Under,
    UnderEmpty,
    applicable,
    apply,
    record_consistent,
    record_plus,
    record_total,
)

RETURN_RULES = (RuleId.FIND, RuleId.FAIL_OVER, RuleId.FAIL_UNDER, RuleId.FAIL_CHUNK)
FAIL_RULES = (
    RuleId.FAIL_OVER,
    RuleId.FAIL_UNDER,
    RuleId.FAIL_CHUNK,
    RuleId.FAIL1_PRE,
    RuleId.FAIL2_PRE,
)
ORACLE_RULES = (RuleId.ORACLE, RuleId.CORE_ORACLE)


@dataclass(frozen=True)
class OracleStats:
    conflicts: int
    decisions: int


@dataclass(frozen=True)
class TraceEvent:
    step: int
    rule: RuleId
    before: State
    after: State
    oracle_stats: OracleStats | None = None


@dataclass
class ValidationReport:
    violations: list[tuple[int, str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _bounds(state: State) -> tuple[frozenset[int], frozenset[int]] | None:
    if isinstance(state, (CoreState, ControlState, PreState, EvalState, TerminalCont)):
        return state.over, state.under
    return None


def _action_atoms(action: Action) -> frozenset[int]:
    if isinstance(action, Under):
        return frozenset((action.atom,))
    if isinstance(action, Chunk):
        return action.atoms
    if isinstance(action, Core):
        return frozenset(atom_of(l) for l in action.lits)
    return frozenset()


def _is_initial(state: State, atoms: frozenset[int]) -> bool:
    if not (isinstance(state, CoreState) and state.record == ()):
        return False
    if state.over != atoms or state.under:
        return False
    if isinstance(state.action, (Over, UnderEmpty)):
        return True
    return isinstance(state.action, Core) and state.action.lits == frozenset(
        neg_lit(a) for a in atoms
    )


def validate_structure(events: list[TraceEvent], base: Theory) -> ValidationReport:
    report = ValidationReport()
    out = report.violations
    atoms = atoms_of(base)
    if not events:
        if atoms:
            out.append((0, "initial", "empty trace for a theory with atoms"))
        return report

    if not _is_initial(events[0].before, atoms):
        out.append((0, "initial", f"first state is not an initial core state: {events[0].before}"))
    for i, e in enumerate(events):
        if e.step != i:
            out.append((i, "step", f"step numbered {e.step}, expected {i}"))
        if i and events[i - 1].after != e.before:
            out.append((i, "chain", "source state differs from the previous target"))
        if e.oracle_stats is not None and e.rule not in ORACLE_RULES:
            out.append((i, "stats", f"oracle_stats on a {e.rule.value} edge"))
        if not applicable(e.rule, e.before, atoms):
            out.append((i, "applicable", f"{e.rule.value} does not apply at {e.before}"))
            continue
        payload = _payload(e, atoms, out)
        if payload is BAD:
            continue
        expected = apply(e.rule, e.before, payload)
        if e.after != expected:
            out.append((i, "apply", f"{e.rule.value} target should be {expected}, got {e.after}"))

    seen: set[State] = set()
    for i, state in enumerate([events[0].before] + [e.after for e in events]):
        step = max(i - 1, 0)
        if state in seen:
            out.append((step, "acyclic", f"state repeats: {state}"))
        seen.add(state)
        b = _bounds(state)
        if b is not None:
            over, under = b
            if not under <= over:
                out.append((step, "bounds", "under bound is not contained in the over bound"))
            if not over <= atoms:
                out.append((step, "bounds", "over bound contains foreign atoms"))
        if isinstance(state, CoreState) and not _action_atoms(state.action) <= state.over:
            out.append((step, "bounds", "action mentions atoms outside the over bound"))
        if isinstance(state, PreState) and not frozenset(atom_of(l) for l in state.n) <= state.over:
            out.append((step, "bounds", "pending literals mention atoms outside the over bound"))

    first_action = events[0].before.action if isinstance(events[0].before, CoreState) else None
    for i, e in enumerate(events):
        if e.rule not in RETURN_RULES or not isinstance(e.before, CoreState):
            continue
        if e.before.action == first_action:
            continue
        gap_before = e.before.over - e.before.under
        b = _bounds(e.after)
        gap_after = b[0] - b[1]
        if not gap_after < gap_before:
            out.append((i, "progress", "gap did not strictly shrink on a return edge"))

    if not isinstance(events[-1].after, (TerminalOk, TerminalCont)):
        out.append((len(events) - 1, "terminal", "run does not end in a terminal state"))
    return report


BAD = object()


def _payload(e: TraceEvent, atoms: frozenset[int], out: list[tuple[int, str, str]]):
    """Extract and vet the choice a nondeterministic rule made; BAD on misuse."""
    i = e.step
    if e.rule in ORACLE_RULES:
        if not isinstance(e.after, CoreState):
            out.append((i, "apply", "oracle edge must target a core state"))
            return BAD
        record = e.after.record
        if len(set(record)) != len(record):
            out.append((i, "record", "record repeats a literal"))
            return BAD
        if not frozenset(atom_of(l) for l in record) <= atoms:
            out.append((i, "record", "record mentions atoms outside the vocabulary"))
            return BAD
        if record_consistent(record) and not record_total(record, atoms):
            out.append((i, "record", "consistent record does not cover the vocabulary"))
            return BAD
        return record
    if e.rule is RuleId.UNDER_APPROX:
        if not (isinstance(e.after, CoreState) and isinstance(e.after.action, Under)):
            out.append((i, "choice", "UnderApprox must pick a single-atom action"))
            return BAD
        a = e.after.action.atom
        if a not in e.before.over - e.before.under:
            out.append((i, "choice", "UnderApprox picked an atom outside the gap"))
            return BAD
        return a
    if e.rule is RuleId.CHUNK:
        if not (isinstance(e.after, CoreState) and isinstance(e.after.action, Chunk)):
            out.append((i, "choice", "Chunk must pick a chunk action"))
            return BAD
        n = e.after.action.atoms
        if not n or not n <= e.before.over - e.before.under:
            out.append((i, "choice", "chunk is empty or reaches outside the gap"))
            return BAD
        return n
    return None


def _survives(m: frozenset[int], over: frozenset[int], action: Action) -> bool:
    """Whether the model of the base theory also satisfies the action's constraints."""
    if isinstance(action, Over):
        return not over <= m
    if isinstance(action, UnderEmpty):
        return True
    if isinstance(action, Under):
        return action.atom not in m
    if isinstance(action, Chunk):
        return not action.atoms <= m
    return all(atom_of(l) not in m for l in action.lits)


def _refuted(models, truth, over, action) -> bool:
    """No model survives the action's constraints.

    For the body-constraint actions this is a subset test against the model
    intersection (which the no-model convention extends correctly); only core
    actions need the model scan.
    """
    if isinstance(action, Over):
        return over <= truth
    if isinstance(action, UnderEmpty):
        return not models
    if isinstance(action, Under):
        return action.atom in truth
    if isinstance(action, Chunk):
        return action.atoms <= truth
    return not any(_survives(m, over, action) for m in models)


@lru_cache(maxsize=None)
def _model_index(base: Theory, kind: str) -> frozenset[frozenset[int]]:
    return frozenset(enumerate_models(base, kind))


def validate_semantics(events: list[TraceEvent], base: Theory, kind: str | None = None) -> ValidationReport:
    report = ValidationReport()
    out = report.violations
    if kind is None:
        kind = "stable" if isinstance(base, Program) else "classical"
    truth = brute_consequences(base, kind)
    models = enumerate_models(base, kind)

    if not events:
        return report
    for i, state in enumerate([events[0].before] + [e.after for e in events]):
        step = max(i - 1, 0)
        b = _bounds(state)
        if b is not None and not (b[1] <= truth <= b[0]):
            out.append((step, "bracket", f"true consequences escape the bounds at {state}"))
        if isinstance(state, TerminalOk) and state.witness != truth:
            out.append(
                (step, "exact", f"claimed answer {sorted(state.witness)} differs from {sorted(truth)}")
            )
    for e in events:
        if not isinstance(e.before, CoreState):
            continue
        over, action = e.before.over, e.before.action
        if e.rule is RuleId.FAIL_OVER and truth != over:
            out.append((e.step, "over-exact", "over-approximation failed before converging"))
        if e.rule in (RuleId.FIND, RuleId.FIND_PRE):
            m = record_plus(e.before.record)
            if m not in _model_index(base, kind) or not _survives(m, over, action):
                out.append((e.step, "witness", "record is not a model of the constrained theory"))
        if e.rule in FAIL_RULES:
            if not _refuted(models, truth, over, action):
                out.append((e.step, "incoherence", "constrained theory has a model after all"))
    return report


def _lit_name(l: int, vocab: Vocabulary) -> str:
    name = vocab.name_of(atom_of(l))
    return name if is_positive(l) else "-" + name


def _lit_id(s: str, vocab: Vocabulary, line: int) -> int:
    name = s[1:] if s.startswith("-") else s
    try:
        a = vocab.id_of(name)
    except KeyError:
        raise ParseError(f"unknown atom {name!r} in trace", line) from None
    return neg_lit(a) if s.startswith("-") else pos_lit(a)


def _atom_list(atoms: frozenset[int], vocab: Vocabulary) -> list[str]:
    return sorted(vocab.name_of(a) for a in atoms)


def _lit_list(lits: frozenset[int], vocab: Vocabulary) -> list[str]:
    return sorted((_lit_name(l, vocab) for l in lits), key=lambda s: s.lstrip("-"))


def _action_json(action: Action, vocab: Vocabulary) -> dict:
    if isinstance(action, Over):
        return {"kind": "over"}
    if isinstance(action, UnderEmpty):
        return {"kind": "under_empty"}
    if isinstance(action, Under):
        return {"kind": "under", "atom": vocab.name_of(action.atom)}
    if isinstance(action, Chunk):
        return {"kind": "chunk", "atoms": _atom_list(action.atoms, vocab)}
    return {"kind": "core", "lits": _lit_list(action.lits, vocab)}


def _state_json(state: State, vocab: Vocabulary) -> dict:
    if isinstance(state, CoreState):
        return {
            "kind": "core",
            "record": [_lit_name(l, vocab) for l in state.record],
            "over": _atom_list(state.over, vocab),
            "under": _atom_list(state.under, vocab),
            "action": _action_json(state.action, vocab),
        }
    if isinstance(state, ControlState):
        return {
            "kind": "control",
            "over": _atom_list(state.over, vocab),
            "under": _atom_list(state.under, vocab),
            "action": _action_json(state.action, vocab),
        }
    if isinstance(state, PreState):
        return {
            "kind": "pre",
            "n": _lit_list(state.n, vocab),
            "over": _atom_list(state.over, vocab),
            "under": _atom_list(state.under, vocab),
        }
    if isinstance(state, EvalState):
        return {
            "kind": "eval",
            "over": _atom_list(state.over, vocab),
            "under": _atom_list(state.under, vocab),
        }
    if isinstance(state, TerminalOk):
        return {"kind": "ok", "witness": _atom_list(state.witness, vocab)}
    return {"kind": "cont", "over": _atom_list(state.over, vocab), "under": _atom_list(state.under, vocab)}


def serialize(events: list[TraceEvent], vocab: Vocabulary) -> str:
    lines = []
    for e in events:
        row: dict = {
            "step": e.step,
            "rule": e.rule.value,
            "before": _state_json(e.before, vocab),
            "after": _state_json(e.after, vocab),
        }
        if e.oracle_stats is not None:
            row["oracle_stats"] = {
                "conflicts": e.oracle_stats.conflicts,
                "decisions": e.oracle_stats.decisions,
            }
        lines.append(json.dumps(row, separators=(",", ":")))
    return "\n".join(lines) + ("\n" if lines else "")


def _need(row: dict, key: str, line: int):
    if key not in row:
        raise ParseError(f"missing field {key!r}", line)
    return row[key]


def _atom_set(names, vocab: Vocabulary, line: int) -> frozenset[int]:
    ids = set()
    for name in names:
        try:
            ids.add(vocab.id_of(name))
        except KeyError:
            raise ParseError(f"unknown atom {name!r} in trace", line) from None
    return frozenset(ids)


def _action_from(row: dict, vocab: Vocabulary, line: int) -> Action:
    kind = _need(row, "kind", line)
    if kind == "over":
        return Over()
    if kind == "under_empty":
        return UnderEmpty()
    if kind == "under":
        return Under(next(iter(_atom_set([_need(row, "atom", line)], vocab, line))))
    if kind == "chunk":
        return Chunk(_atom_set(_need(row, "atoms", line), vocab, line))
    if kind == "core":
        return Core(frozenset(_lit_id(s, vocab, line) for s in _need(row, "lits", line)))
    raise ParseError(f"unknown action kind {kind!r}", line)


def _state_from(row: dict, vocab: Vocabulary, line: int) -> State:
    kind = _need(row, "kind", line)
    if kind == "core":
        return CoreState(
            tuple(_lit_id(s, vocab, line) for s in _need(row, "record", line)),
            _atom_set(_need(row, "over", line), vocab, line),
            _atom_set(_need(row, "under", line), vocab, line),
            _action_from(_need(row, "action", line), vocab, line),
        )
    if kind == "control":
        return ControlState(
            _atom_set(_need(row, "over", line), vocab, line),
            _atom_set(_need(row, "under", line), vocab, line),
            _action_from(_need(row, "action", line), vocab, line),
        )
    if kind == "pre":
        return PreState(
            frozenset(_lit_id(s, vocab, line) for s in _need(row, "n", line)),
            _atom_set(_need(row, "over", line), vocab, line),
            _atom_set(_need(row, "under", line), vocab, line),
        )
    if kind == "eval":
        return EvalState(
            _atom_set(_need(row, "over", line), vocab, line),
            _atom_set(_need(row, "under", line), vocab, line),
        )
    if kind == "ok":
        return TerminalOk(_atom_set(_need(row, "witness", line), vocab, line))
    if kind == "cont":
        return TerminalCont(
            _atom_set(_need(row, "over", line), vocab, line),
            _atom_set(_need(row, "under", line), vocab, line),
        )
    raise ParseError(f"unknown state kind {kind!r}", line)


def deserialize(text: str, vocab: Vocabulary) -> list[TraceEvent]:
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            row = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", lineno) from None
        if not isinstance(row, dict):
            raise ParseError("trace line is not an object", lineno)
        rule_name = _need(row, "rule", lineno)
        try:
            rule = RuleId(rule_name)
        except ValueError:
            raise ParseError(f"unknown rule {rule_name!r}", lineno) from None
        stats = None
        if "oracle_stats" in row:
            s = row["oracle_stats"]
            stats = OracleStats(int(s["conflicts"]), int(s["decisions"]))
        events.append(
            TraceEvent(
                int(_need(row, "step", lineno)),
                rule,
                _state_from(_need(row, "before", lineno), vocab, lineno),
                _state_from(_need(row, "after", lineno), vocab, lineno),
                stats,
            )
        )
    return events
