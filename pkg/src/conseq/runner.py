"""Strategy execution over the solver graphs.

One run owns one incremental oracle session; every solver invocation, including
core minimization probes and the final coherence probe, counts toward
oracle_calls. Oracle edges record the returned total assignment when a model is
found; refutations are recorded as the inconsistent string built from the
refuted constraint body (or the minimized core), so the validators can check
them without rerunning the solver.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass

from .aspsolve import ClassicalSession, StableSession
from .engine import ResourceLimit, minimize_core
from .logic import (
    CnfFormula,
    Program,
    Theory,
    atoms_of,
    neg_lit,
    pos_lit,
)
from .trace import OracleStats, TraceEvent
from .transitions import (
    CH,
    FAMILIES,
    FS,
    FS_THEN_CH,
    MIXED,
    OV,
    UN,
    Action,
    Chunk,
    ControlState,
    Core,
    CoreState,
    Over,
    RuleId,
    State,
    TerminalCont,
    TerminalOk,
    Under,
    UnderEmpty,
    apply,
    incoherent_record,
)

ORDERS = ("asc", "desc", "shuffle")
ORACLE_KINDS = ("stable", "classical")


@dataclass(frozen=True)
class StrategyConfig:
    algorithm: str = UN
    chunk_size: int | None = None
    chunk_percent: int | None = None
    candidate_order: str = "asc"
    seed: int = 0
    oracle_kind: str | None = None  # None picks by theory type
    mixed_first: str = "over"


@dataclass
class RunResult:
    consequences: frozenset[int] | None  # set iff the run ended in Ok
    bounds: tuple[frozenset[int], frozenset[int]] | None  # set iff it ended in Cont
    oracle_calls: int
    conflicts: int
    trace: list[TraceEvent]
    coherent: bool


class Interrupted(ResourceLimit):
    """Budget or deadline hit; carries whatever the run had established."""

    def __init__(self, over, under, oracle_calls, conflicts, trace):
        super().__init__("conflict budget or deadline exhausted")
        self.over = over
        self.under = under
        self.oracle_calls = oracle_calls
        self.conflicts = conflicts
        self.trace = trace


def candidate_order(atoms: frozenset[int], order: str, seed: int = 0) -> list[int]:
    ids = sorted(atoms)
    if order == "asc":
        return ids
    if order == "desc":
        return ids[::-1]
    if order == "shuffle":
        random.Random(seed).shuffle(ids)
        return ids
    raise ValueError(f"unknown candidate order {order!r}")

def select_candidate(over: frozenset[int], under: frozenset[int], order: list[int]) -> int:
    for a in order:
        if a in over and a not in under:
            return a
    raise ValueError("no candidate left to test")


def select_chunk(
    over: frozenset[int], under: frozenset[int], size: int, order: list[int]
) -> frozenset[int]:
    out = []
    for a in order:
        if a in over and a not in under:
            out.append(a)
            if len(out) == size:
                break
    if not out:
        raise ValueError("no candidate left to test")
    return frozenset(out)


def chunk_size_of(size: int | None, percent: int | None, initial_count: int) -> int:
    if size is not None:
        return size
    if percent is not None:
        return max(1, math.ceil(initial_count * percent / 100))
    return 2


def program_clauses(program: Program) -> CnfFormula:
    """The program read as classical implications, in clausal form."""
    occ = atoms_of(program)
    clauses = []
    for r in program.rules:
        head = [pos_lit(r.head)] if r.head is not None else []
        cl = head + [neg_lit(a) for a in r.pos] + [pos_lit(a) for a in r.neg]
        clauses.append(tuple(cl))
    return CnfFormula(max(occ) + 1 if occ else 0, tuple(clauses))


def _validate(cfg: StrategyConfig, base: Theory) -> str:
    if cfg.algorithm not in FAMILIES:
        raise ValueError(f"unknown algorithm {cfg.algorithm!r}")
    if cfg.candidate_order not in ORDERS:
        raise ValueError(f"unknown candidate order {cfg.candidate_order!r}")
    if cfg.mixed_first not in ("over", "under"):
        raise ValueError(f"mixed_first must be 'over' or 'under', not {cfg.mixed_first!r}")
    if cfg.chunk_size is not None and cfg.chunk_percent is not None:
        raise ValueError("chunk_size and chunk_percent are mutually exclusive")
    if cfg.chunk_size is not None and cfg.chunk_size < 1:
        raise ValueError("chunk_size must be at least 1")
    if cfg.chunk_percent is not None and not 1 <= cfg.chunk_percent <= 100:
        raise ValueError("chunk_percent must be within 1..100")
    if cfg.algorithm not in (CH, FS_THEN_CH) and (
        cfg.chunk_size is not None or cfg.chunk_percent is not None
    ):
        raise ValueError(f"chunk policy does not apply to {cfg.algorithm}")
    kind = cfg.oracle_kind
    if kind is None:
        kind = "stable" if isinstance(base, Program) else "classical"
    if kind not in ORACLE_KINDS:
        raise ValueError(f"unknown oracle kind {kind!r}")
    if kind == "stable" and not isinstance(base, Program):
        raise ValueError("the stable oracle needs a program")
    return kind


def _total_record(model: frozenset[int], atoms: frozenset[int]) -> tuple[int, ...]:
    return tuple(pos_lit(a) if a in model else neg_lit(a) for a in sorted(atoms))


def _fail_record(action: Action, over: frozenset[int], atoms: frozenset[int]) -> tuple[int, ...]:
    if isinstance(action, Core):
        return incoherent_record(action.lits, atoms)
    if isinstance(action, Over):
        body = over
    elif isinstance(action, Under):
        body = frozenset((action.atom,))
    elif isinstance(action, Chunk):
        body = action.atoms
    else:
        body = frozenset()
    return incoherent_record(frozenset(neg_lit(a) for a in body), atoms)


class _Run:
    def __init__(self, base: Theory, cfg: StrategyConfig, max_conflicts, deadline):
        self.base = base
        self.cfg = cfg
        self.kind = _validate(cfg, base)
        self.atoms = atoms_of(base)
        if isinstance(base, Program) and self.kind == "stable":
            self.session = StableSession(base)
        elif isinstance(base, Program):
            self.session = ClassicalSession(program_clauses(base))
        else:
            self.session = ClassicalSession(base)
        self.order = candidate_order(self.atoms, cfg.candidate_order, cfg.seed)
        self.max_conflicts = max_conflicts
        self.deadline = deadline
        self.events: list[TraceEvent] = []
        self.over = frozenset(self.atoms)
        self.under: frozenset[int] = frozenset()
        self.coherent: bool | None = None
        self.chunk_k = chunk_size_of(cfg.chunk_size, cfg.chunk_percent, len(self.atoms))

    # ---- oracle plumbing ----

    def _budget(self) -> int | None:
        if self.max_conflicts is None:
            return None
        left = self.max_conflicts - self.session.engine.conflicts_total
        if left <= 0:
            raise ResourceLimit("conflict budget exhausted")
        return left

    def _solve(self, action: Action):
        if isinstance(action, Over):
            forbid, assume = tuple(sorted(self.over)), ()
        elif isinstance(action, UnderEmpty):
            forbid, assume = None, ()
        elif isinstance(action, Under):
            forbid, assume = (action.atom,), ()
        elif isinstance(action, Chunk):
            forbid, assume = tuple(sorted(action.atoms)), ()
        else:
            forbid, assume = None, tuple(sorted(action.lits))
        res = self.session.solve(forbid, assume, self._budget(), self.deadline)
        if res.model is not None:
            self.coherent = True
        elif isinstance(action, UnderEmpty):
            self.coherent = False
        return res

    def _probe(self, lits: tuple[int, ...]) -> bool:
        """Core minimization probe; True iff the subset is still refuted."""
        res = self.session.solve(None, lits, self._budget(), self.deadline)
        if res.model is not None:
            self.coherent = True
        return res.model is None

    def _emit(self, rule: RuleId, before: State, after: State, stats=None) -> State:
        self.events.append(TraceEvent(len(self.events), rule, before, after, stats))
        return after

    # ---- the bounded families (over, under, chunk, and their mixture) ----

    def _schedule(self, i: int) -> str:
        algo = self.cfg.algorithm
        if algo == OV:
            return "over"
        if algo == UN:
            return "under"
        if algo in (CH, FS_THEN_CH):
            return "chunk"
        pair = ("over", "under") if self.cfg.mixed_first == "over" else ("under", "over")
        return pair[i % 2]

    def _refine(self, control: State, kind: str) -> CoreState:
        if kind == "over":
            return self._emit(RuleId.OVER_APPROX, control, apply(RuleId.OVER_APPROX, control))
        if kind == "under":
            a = select_candidate(self.over, self.under, self.order)
            return self._emit(
                RuleId.UNDER_APPROX, control, apply(RuleId.UNDER_APPROX, control, a)
            )
        n = select_chunk(self.over, self.under, self.chunk_k, self.order)
        return self._emit(RuleId.CHUNK, control, apply(RuleId.CHUNK, control, n))

    def _bounded_loop(self, state: CoreState, i: int) -> None:
        while True:
            res = self._solve(state.action)
            stats = OracleStats(res.conflicts, res.decisions)
            if res.model is not None:
                rec = _total_record(res.model, self.atoms)
                after = self._emit(RuleId.ORACLE, state, apply(RuleId.ORACLE, state, rec), stats)
                rule = RuleId.FIND
            else:
                rec = _fail_record(state.action, self.over, self.atoms)
                after = self._emit(RuleId.ORACLE, state, apply(RuleId.ORACLE, state, rec), stats)
                if isinstance(state.action, Over):
                    rule = RuleId.FAIL_OVER
                elif isinstance(state.action, Chunk):
                    rule = RuleId.FAIL_CHUNK
                else:
                    rule = RuleId.FAIL_UNDER
            control = self._emit(rule, after, apply(rule, after))
            self.over, self.under = control.over, control.under
            i += 1
            if self.over == self.under:
                self._emit(RuleId.TERMINAL, control, apply(RuleId.TERMINAL, control))
                return
            state = self._refine(control, self._schedule(i))

    # ---- the core-based family ----

    def _fs_loop(self) -> str:
        state = CoreState(
            (), self.over, self.under, Core(frozenset(neg_lit(a) for a in self.atoms))
        )
        while True:
            res = self._solve(state.action)
            stats = OracleStats(res.conflicts, res.decisions)
            if res.model is not None:
                rec = _total_record(res.model, self.atoms)
                after = self._emit(
                    RuleId.CORE_ORACLE, state, apply(RuleId.CORE_ORACLE, state, rec), stats
                )
                ev = self._emit(RuleId.FIND_PRE, after, apply(RuleId.FIND_PRE, after))
                self.over, self.under = ev.over, ev.under
                if ev.over == ev.under:
                    self._emit(RuleId.FINAL, ev, apply(RuleId.FINAL, ev))
                    return "ok"
                state = self._emit(RuleId.NEW_SET, ev, apply(RuleId.NEW_SET, ev))
                continue
            core = minimize_core(lambda lits: not self._probe(lits), res.core)
            if not core:
                self.coherent = False
                return "incoherent"
            rec = incoherent_record(core, self.atoms)
            after = self._emit(
                RuleId.CORE_ORACLE, state, apply(RuleId.CORE_ORACLE, state, rec), stats
            )
            rule = RuleId.FAIL1_PRE if len(core) == 1 else RuleId.FAIL2_PRE
            pre = self._emit(rule, after, apply(rule, after))
            self.over, self.under = pre.over, pre.under
            if pre.n:
                state = self._emit(RuleId.CONTINUE, pre, apply(RuleId.CONTINUE, pre))
            else:
                self._emit(RuleId.MAIN, pre, apply(RuleId.MAIN, pre))
                return "cont"

    def _ov_switch(self) -> None:
        """The base itself is refuted, which the empty core proves; the whole
        over-approximation run is then forced, so it is replayed without
        further oracle work (and any prior events are discarded)."""
        self.events = []
        self.over, self.under = frozenset(self.atoms), frozenset()
        state = CoreState((), self.over, self.under, Over())
        rec = _fail_record(Over(), self.over, self.atoms)
        after = self._emit(RuleId.ORACLE, state, apply(RuleId.ORACLE, state, rec))
        control = self._emit(RuleId.FAIL_OVER, after, apply(RuleId.FAIL_OVER, after))
        self.over, self.under = control.over, control.under
        self._emit(RuleId.TERMINAL, control, apply(RuleId.TERMINAL, control))

    # ---- entry ----

    def execute(self) -> None:
        if not self.atoms:
            return
        algo = self.cfg.algorithm
        if algo in (FS, FS_THEN_CH):
            outcome = self._fs_loop()
            if outcome == "incoherent":
                self._ov_switch()
                return
            if outcome == "ok" or algo == FS:
                return
            cont = self.events[-1].after
            if cont.over == cont.under:
                self._emit(RuleId.TERMINAL, cont, apply(RuleId.TERMINAL, cont))
                return
            self.chunk_k = chunk_size_of(
                self.cfg.chunk_size, self.cfg.chunk_percent, len(cont.over - cont.under)
            )
            state = self._refine(cont, "chunk")
            self._bounded_loop(state, 0)
            return
        first = self._schedule(0)
        action: Action = Over() if first == "over" else UnderEmpty()
        self._bounded_loop(CoreState((), self.over, self.under, action), 0)


def run(
    base: Theory,
    config: StrategyConfig | None = None,
    *,
    max_conflicts: int | None = None,
    timeout: float | None = None,
) -> RunResult:
    """Execute the configured strategy; raises Interrupted on budget/deadline."""
    cfg = config if config is not None else StrategyConfig()
    deadline = time.monotonic() + timeout if timeout is not None else None
    r = _Run(base, cfg, max_conflicts, deadline)
    try:
        r.execute()
        if r.coherent is None:
            res = r.session.solve(None, (), r._budget(), deadline)
            r.coherent = res.model is not None
    except ResourceLimit:
        raise Interrupted(
            r.over,
            r.under,
            r.session.total_solves,
            r.session.engine.conflicts_total,
            r.events,
        ) from None
    consequences = bounds = None
    if not r.events:
        consequences = frozenset()
    else:
        last = r.events[-1].after
        if isinstance(last, TerminalOk):
            consequences = last.witness
        elif isinstance(last, TerminalCont):
            bounds = (last.over, last.under)
    return RunResult(
        consequences,
        bounds,
        r.session.total_solves,
        r.session.engine.conflicts_total,
        r.events,
        r.coherent,
    )
