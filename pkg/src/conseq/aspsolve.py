"""Oracles: answer sets of programs and classical models of CNF formulas.

The stable oracle is Clark's completion plus lazy loop-formula refinement:
solve the completion, check the candidate with the independent logic-core
stability test, and if the candidate is unfounded add the loop formula of one
unfounded loop and retry. Loop clauses are consequences of the base program
and stay in the clause database forever.

Per-call constraints arrive either as `forbid_all` (the constraint <- body,
meaning "not all of these atoms together") or as literal assumptions. A
single-atom body is assumed directly; longer bodies get a one-shot selector
variable so that retracting the constraint is just not assuming the selector.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import Solver
from .logic import (
    CnfFormula,
    Program,
    Rule,
    atoms_of,
    is_answer_set,
    least_model,
    neg_lit,
    negate,
    pos_lit,
    reduct,
)


@dataclass(frozen=True)
class OracleResult:
    """model is the positive part over base atoms; core is a subset of the
    assumptions passed in (possibly empty). Exactly one of the two is None,
    so callers must test `is None`, not truthiness."""

    model: frozenset[int] | None
    core: frozenset[int] | None
    conflicts: int
    decisions: int


@dataclass(frozen=True)
class CompletionInfo:
    formula: CnfFormula
    body_lit: dict  # (pos, neg) -> aux literal
    n_base: int


def clark_completion(program: Program) -> CompletionInfo:
    """Completion over var ids [0, n_base) for atoms, aux body vars above."""
    n_base = max(atoms_of(program), default=-1) + 1
    next_var = n_base
    body_lit: dict[tuple[tuple[int, ...], tuple[int, ...]], int] = {}
    clauses: list[tuple[int, ...]] = []
    bodies: dict[int, list[int]] = {a: [] for a in range(n_base)}
    facts: set[int] = set()
    for r in program.rules:
        lits = tuple(pos_lit(a) for a in r.pos) + tuple(neg_lit(a) for a in r.neg)
        if r.head is None:
            clauses.append(tuple(negate(l) for l in lits))
            continue
        if not lits:
            facts.add(r.head)
            continue
        key = (r.pos, r.neg)
        if key not in body_lit:
            b = pos_lit(next_var)
            next_var += 1
            body_lit[key] = b
            for l in lits:
                clauses.append((negate(b), l))
            clauses.append((b,) + tuple(negate(l) for l in lits))
        if body_lit[key] not in bodies[r.head]:
            bodies[r.head].append(body_lit[key])
    for a in range(n_base):
        if a in facts:
            clauses.append((pos_lit(a),))
            continue
        bs = bodies[a]
        if not bs:
            clauses.append((neg_lit(a),))
            continue
        for b in bs:
            clauses.append((negate(b), pos_lit(a)))
        clauses.append((neg_lit(a),) + tuple(bs))
    return CompletionInfo(CnfFormula(next_var, tuple(clauses)), body_lit, n_base)


def positive_sccs(program: Program) -> list[frozenset[int]]:
    """SCCs of the positive dependency graph, dependencies before dependents."""
    nodes = sorted(atoms_of(program))
    edges: dict[int, list[int]] = {a: [] for a in nodes}
    for r in program.rules:
        if r.head is None:
            continue
        for b in r.pos:
            if b not in edges[r.head]:
                edges[r.head].append(b)
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[frozenset[int]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work: list[tuple[int, int]] = [(root, 0)]
        while work:
            v, ei = work[-1]
            if ei == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            if ei < len(edges[v]):
                work[-1] = (v, ei + 1)
                w = edges[v][ei]
                if w not in index:
                    work.append((w, 0))
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])
                if low[v] == index[v]:
                    comp = set()
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.add(w)
                        if w == v:
                            break
                    out.append(frozenset(comp))
    return out


def is_tight(program: Program) -> bool:
    for scc in positive_sccs(program):
        if len(scc) > 1:
            return False
    for r in program.rules:
        if r.head is not None and r.head in r.pos:
            return False
    return True


def loop_clauses(program: Program, info: CompletionInfo, loop: frozenset[int]) -> list[tuple[int, ...]]:
    """ASSAT loop formula as clauses: each loop atom implies some external support."""
    external: list[int] = []
    for r in program.rules:
        if r.head in loop and not (set(r.pos) & loop):
            if not r.pos and not r.neg:
                return []  # a fact supports the loop unconditionally
            external.append(info.body_lit[(r.pos, r.neg)])
    supports = tuple(dict.fromkeys(external))
    return [(neg_lit(a),) + supports for a in sorted(loop)]


def _violated_loop(program: Program, mplus: frozenset[int]) -> frozenset[int]:
    """Pick one unfounded loop of the non-stable candidate mplus.

    The remainder (true but not derivable) is split into SCCs of its positive
    subgraph; a sink SCC has no support from outside itself, so its loop
    formula is violated. Smallest sink first, then smallest atom id.
    """
    definite = Program(tuple(r for r in reduct(program, mplus).rules if r.head is not None))
    remainder = mplus - least_model(definite)
    sub = Program(
        tuple(
            Rule(r.head, tuple(a for a in r.pos if a in remainder), ())
            for r in program.rules
            if r.head in remainder
        )
    )
    sccs = positive_sccs(sub)
    reach: dict[int, frozenset[int]] = {}
    for scc in sccs:
        for a in scc:
            reach[a] = scc
    sinks = []
    for scc in sccs:
        outgoing = False
        for r in sub.rules:
            if r.head in scc and any(reach[b] is not scc for b in r.pos):
                outgoing = True
                break
        if not outgoing:
            sinks.append(scc)
    assert sinks, "non-stable candidate must contain an unfounded loop"
    return min(sinks, key=lambda s: (len(s), min(s)))


class _Session:
    """Shared incremental solving harness for the two oracle kinds."""

    def __init__(self, base_atoms: frozenset[int], n_vars: int):
        self.atoms = base_atoms
        self.engine = Solver()
        for _ in range(n_vars):
            self.engine.new_var()
        self.total_solves = 0

    def _prepare(self, forbid_all, assumptions) -> tuple[int, ...]:
        assume = list(assumptions)
        if forbid_all is not None:
            if len(forbid_all) == 1:
                assume.append(neg_lit(forbid_all[0]))
            else:
                s = self.engine.new_var()
                self.engine.add_clause([neg_lit(a) for a in forbid_all] + [neg_lit(s)])
                assume.append(pos_lit(s))
        return tuple(assume)

    def _result(self, sat: bool, assumptions, c0: int, d0: int) -> OracleResult:
        c = self.engine.conflicts_total - c0
        d = self.engine.decisions_total - d0
        if sat:
            model = frozenset(a for a in self.atoms if self.engine.model[a])
            return OracleResult(model, None, c, d)
        return OracleResult(None, self.engine.core & frozenset(assumptions), c, d)


class ClassicalSession(_Session):
    def __init__(self, formula: CnfFormula):
        super().__init__(atoms_of(formula), formula.n_vars)
        self.base = formula
        for cl in formula.clauses:
            self.engine.add_clause(list(cl))

    def solve(
        self,
        forbid_all: tuple[int, ...] | None = None,
        assumptions: tuple[int, ...] = (),
        max_conflicts: int | None = None,
        deadline: float | None = None,
    ) -> OracleResult:
        self.total_solves += 1
        c0, d0 = self.engine.conflicts_total, self.engine.decisions_total
        assume = self._prepare(forbid_all, assumptions)
        sat = self.engine.solve(assume, max_conflicts, deadline)
        return self._result(sat, assumptions, c0, d0)


class StableSession(_Session):
    def __init__(self, program: Program):
        info = clark_completion(program)
        super().__init__(atoms_of(program), info.formula.n_vars)
        self.base = program
        self.info = info
        self.loops_added: set[frozenset[int]] = set()
        for cl in info.formula.clauses:
            self.engine.add_clause(list(cl))

    def solve(
        self,
        forbid_all: tuple[int, ...] | None = None,
        assumptions: tuple[int, ...] = (),
        max_conflicts: int | None = None,
        deadline: float | None = None,
    ) -> OracleResult:
        self.total_solves += 1
        c0, d0 = self.engine.conflicts_total, self.engine.decisions_total
        assume = self._prepare(forbid_all, assumptions)
        while True:
            sat = self.engine.solve(assume, max_conflicts, deadline)
            if not sat:
                return self._result(False, assumptions, c0, d0)
            mplus = frozenset(a for a in self.atoms if self.engine.model[a])
            if is_answer_set(self.base, mplus):
                return self._result(True, assumptions, c0, d0)
            loop = _violated_loop(self.base, mplus)
            assert loop not in self.loops_added, "refinement must make progress"
            self.loops_added.add(loop)
            for cl in loop_clauses(self.base, self.info, loop):
                self.engine.add_clause(list(cl))
