"""States, actions, and transition rules of the abstract solver graphs.

A record is the oracle's final literal string (duplicate-free, possibly
inconsistent); the oracle edge is atomic, so records jump from empty straight
to the returned string. Incoherent oracle outcomes are materialized as the
inconsistent record core + complements, which makes the hat set (atoms present
with both signs, taken negatively) equal the core.

Control states remember the action that produced them; terminal Cont states
are distinct from control states because for the core-based family Cont(O,U)
is a legal end of the run (and a handoff point when chunking follows).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .logic import (
    Theory,
    atom_of,
    is_positive,
    neg_lit,
    negate,
    with_constraint,
)


class RuleId(Enum):
    ORACLE = "Oracle"
    CORE_ORACLE = "CoreOracle"
    FAIL_OVER = "FailOver"
    FAIL_UNDER = "FailUnder"
    FAIL_CHUNK = "FailChunk"
    FIND = "Find"
    TERMINAL = "Terminal"
    OVER_APPROX = "OverApprox"
    UNDER_APPROX = "UnderApprox"
    CHUNK = "Chunk"
    FAIL1_PRE = "Fail1Pre"
    FAIL2_PRE = "Fail2Pre"
    FIND_PRE = "FindPre"
    MAIN = "Main"
    CONTINUE = "Continue"
    NEW_SET = "NewSet"
    FINAL = "Final"


@dataclass(frozen=True)
class Over:
    pass


@dataclass(frozen=True)
class UnderEmpty:
    pass


@dataclass(frozen=True)
class Under:
    atom: int


@dataclass(frozen=True)
class Chunk:
    atoms: frozenset[int]


@dataclass(frozen=True)
class Core:
    lits: frozenset[int]  # assumption literals, negative by construction


Action = Over | UnderEmpty | Under | Chunk | Core


@dataclass(frozen=True)
class CoreState:
    record: tuple[int, ...]
    over: frozenset[int]
    under: frozenset[int]
    action: Action


@dataclass(frozen=True)
class ControlState:
    over: frozenset[int]
    under: frozenset[int]
    action: Action


@dataclass(frozen=True)
class PreState:
    n: frozenset[int]
    over: frozenset[int]
    under: frozenset[int]


@dataclass(frozen=True)
class EvalState:
    over: frozenset[int]
    under: frozenset[int]


@dataclass(frozen=True)
class TerminalOk:
    witness: frozenset[int]


@dataclass(frozen=True)
class TerminalCont:
    over: frozenset[int]
    under: frozenset[int]


State = CoreState | ControlState | PreState | EvalState | TerminalOk | TerminalCont

OV = "OV"
UN = "UN"
CH = "CH"
MIXED = "MIXED"
FS = "FS"
FS_THEN_CH = "FS_THEN_CH"
FAMILIES = (OV, UN, CH, MIXED, FS, FS_THEN_CH)


def initial_state(family: str, atoms: frozenset[int]) -> CoreState:
    if family in (OV, MIXED):
        action: Action = Over()
    elif family in (UN, CH):
        action = UnderEmpty()
    elif family in (FS, FS_THEN_CH):
        action = Core(frozenset(neg_lit(a) for a in atoms))
    else:
        raise ValueError(f"unknown family {family!r}")
    return CoreState((), frozenset(atoms), frozenset(), action)


def record_plus(record: tuple[int, ...]) -> frozenset[int]:
    return frozenset(atom_of(l) for l in record if is_positive(l))


def record_consistent(record: tuple[int, ...]) -> bool:
    s = set(record)
    return not any(negate(l) in s for l in s)


def record_total(record: tuple[int, ...], atoms: frozenset[int]) -> bool:
    return record_consistent(record) and frozenset(atom_of(l) for l in record) == atoms


def record_hat(record: tuple[int, ...]) -> frozenset[int]:
    """Atoms appearing with both signs, as negative literals (the paper's L-hat)."""
    s = set(record)
    return frozenset(l for l in s if not is_positive(l) and negate(l) in s)


def incoherent_record(core_lits: frozenset[int], atoms: frozenset[int]) -> tuple[int, ...]:
    """Materialize an incoherent outcome: core complements first, then the core.

    For the empty core (the theory alone is incoherent) any inconsistent pair
    over the base atoms does; the smallest atom is used.
    """
    if not core_lits:
        a = min(atoms)
        return (a << 1, (a << 1) | 1)
    ordered = sorted(core_lits, key=lambda l: (atom_of(l), l))
    return tuple(negate(l) for l in ordered) + tuple(ordered)


def constrained_theory(base: Theory, over: frozenset[int], under: frozenset[int], action: Action) -> Theory:
    """The paper's constrained theory for the call the action stands for."""
    if isinstance(action, Over):
        return with_constraint(base, tuple(sorted(over)))
    if isinstance(action, UnderEmpty):
        return base
    if isinstance(action, Under):
        return with_constraint(base, (action.atom,))
    if isinstance(action, Chunk):
        return with_constraint(base, tuple(sorted(action.atoms)))
    out = base
    for l in sorted(action.lits):
        assert not is_positive(l), "core assumption literals are negative"
        out = with_constraint(out, (atom_of(l),))
    return out


def applicable(rule: RuleId, state: State, atoms: frozenset[int]) -> bool:
    """Side condition of the rule at this state (choice payloads not included)."""
    if rule in (RuleId.ORACLE, RuleId.CORE_ORACLE):
        if not (isinstance(state, CoreState) and state.record == ()):
            return False
        return isinstance(state.action, Core) == (rule is RuleId.CORE_ORACLE)
    if rule is RuleId.FIND:
        return (
            isinstance(state, CoreState)
            and not isinstance(state.action, Core)
            and record_total(state.record, atoms)
        )
    if rule is RuleId.FIND_PRE:
        return (
            isinstance(state, CoreState)
            and isinstance(state.action, Core)
            and record_total(state.record, atoms)
        )
    if rule is RuleId.FAIL_OVER:
        return (
            isinstance(state, CoreState)
            and isinstance(state.action, Over)
            and not record_consistent(state.record)
        )
    if rule is RuleId.FAIL_UNDER:
        return (
            isinstance(state, CoreState)
            and isinstance(state.action, (UnderEmpty, Under))
            and not record_consistent(state.record)
        )
    if rule is RuleId.FAIL_CHUNK:
        return (
            isinstance(state, CoreState)
            and isinstance(state.action, Chunk)
            and not record_consistent(state.record)
        )
    if rule in (RuleId.FAIL1_PRE, RuleId.FAIL2_PRE):
        if not (
            isinstance(state, CoreState)
            and isinstance(state.action, Core)
            and not record_consistent(state.record)
        ):
            return False
        k = len(record_hat(state.record) & state.action.lits)
        return k == 1 if rule is RuleId.FAIL1_PRE else k > 1
    if rule is RuleId.TERMINAL:
        return isinstance(state, (ControlState, TerminalCont)) and state.over == state.under
    if rule is RuleId.OVER_APPROX:
        return isinstance(state, ControlState) and state.over != state.under
    if rule is RuleId.UNDER_APPROX:
        return isinstance(state, ControlState) and state.over != state.under
    if rule is RuleId.CHUNK:
        return isinstance(state, (ControlState, TerminalCont)) and state.over != state.under
    if rule is RuleId.MAIN:
        return isinstance(state, PreState) and not state.n
    if rule is RuleId.CONTINUE:
        return isinstance(state, PreState) and bool(state.n)
    if rule is RuleId.NEW_SET:
        return isinstance(state, EvalState) and state.over != state.under
    if rule is RuleId.FINAL:
        return isinstance(state, EvalState) and state.over == state.under
    raise ValueError(f"unknown rule {rule}")


def apply(rule: RuleId, state: State, payload=None) -> State:
    """The rule's target state. Choice rules take their choice as payload:
    Oracle/CoreOracle the record, UnderApprox the atom, Chunk the atom set."""
    if rule in (RuleId.ORACLE, RuleId.CORE_ORACLE):
        return CoreState(tuple(payload), state.over, state.under, state.action)
    if rule is RuleId.FIND:
        return ControlState(state.over & record_plus(state.record), state.under, state.action)
    if rule is RuleId.FAIL_OVER:
        return ControlState(state.over, state.over, state.action)
    if rule is RuleId.FAIL_UNDER:
        grow = frozenset((state.action.atom,)) if isinstance(state.action, Under) else frozenset()
        return ControlState(state.over, state.under | grow, state.action)
    if rule is RuleId.FAIL_CHUNK:
        return ControlState(state.over, state.under | state.action.atoms, state.action)
    if rule is RuleId.TERMINAL:
        return TerminalOk(state.over)
    if rule is RuleId.OVER_APPROX:
        return CoreState((), state.over, state.under, Over())
    if rule is RuleId.UNDER_APPROX:
        return CoreState((), state.over, state.under, Under(payload))
    if rule is RuleId.CHUNK:
        return CoreState((), state.over, state.under, Chunk(frozenset(payload)))
    if rule is RuleId.FAIL1_PRE:
        (l,) = record_hat(state.record) & state.action.lits
        return PreState(state.action.lits - {l}, state.over, state.under | {atom_of(l)})
    if rule is RuleId.FAIL2_PRE:
        return PreState(state.action.lits - record_hat(state.record), state.over, state.under)
    if rule is RuleId.FIND_PRE:
        return EvalState(state.over & record_plus(state.record), state.under)
    if rule is RuleId.MAIN:
        return TerminalCont(state.over, state.under)
    if rule is RuleId.CONTINUE:
        return CoreState((), state.over, state.under, Core(state.n))
    if rule is RuleId.NEW_SET:
        return CoreState(
            (), state.over, state.under, Core(frozenset(neg_lit(a) for a in state.over))
        )
    if rule is RuleId.FINAL:
        return TerminalOk(state.over)
    raise ValueError(f"unknown rule {rule}")
