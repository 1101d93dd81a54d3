"""Incremental CDCL SAT engine with assumptions and conflict cores.

Literals use the same packing as logic.py (var v true -> 2v, false -> 2v+1).
The clause database only grows; per-call constraints must be injected through
assumptions (possibly on selector variables) by the caller. Deterministic by
construction: no randomness, ties in branching go to the lowest variable id.

solve() returns True and fills .model, or returns False and fills .core with
the subset of the assumptions proven jointly unsatisfiable (empty when the
clauses alone are unsatisfiable). Budgets raise ResourceLimit, leaving the
solver reusable.
"""

from __future__ import annotations

import time

from .logic import atom_of, is_positive, negate

_UNDEF = -1
_RESCALE = 1e100


class ResourceLimit(Exception):
    """Conflict budget or deadline exhausted."""


class Solver:
    def __init__(self) -> None:
        self.clauses: list[list[int]] = []
        self.watches: list[list[int]] = []  # lit -> clause indices watching it
        self.assign: list[int] = []  # var -> 1 true, 0 false, _UNDEF
        self.level: list[int] = []
        self.reason: list[int | None] = []  # var -> clause index
        self.activity: list[float] = []
        self.phase: list[bool] = []
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.ok = True
        self.var_inc = 1.0
        self.model: list[bool] = []
        self.core: frozenset[int] = frozenset()
        self.conflicts_total = 0
        self.decisions_total = 0
        self.propagations_total = 0

    # ---- variables and clauses ----

    def new_var(self) -> int:
        v = len(self.assign)
        self.assign.append(_UNDEF)
        self.level.append(0)
        self.reason.append(None)
        self.activity.append(0.0)
        self.phase.append(False)
        self.watches.append([])
        self.watches.append([])
        return v

    def n_vars(self) -> int:
        return len(self.assign)

    def value(self, lit: int) -> int:
        v = self.assign[atom_of(lit)]
        if v == _UNDEF:
            return _UNDEF
        return v if is_positive(lit) else 1 - v

    def add_clause(self, lits: list[int]) -> bool:
        """Add at decision level 0; returns False once the database is unsat."""
        assert not self.trail_lim
        if not self.ok:
            return False
        seen: set[int] = set()
        out: list[int] = []
        for l in sorted(set(lits)):
            if negate(l) in seen:
                return True  # tautology
            if self.value(l) == 1:
                return True  # satisfied at level 0
            if self.value(l) == 0:
                continue  # false at level 0, drop
            seen.add(l)
            out.append(l)
        if not out:
            self.ok = False
            return False
        if len(out) == 1:
            self._enqueue(out[0], None)
            self.ok = self._propagate() is None
            return self.ok
        ci = len(self.clauses)
        self.clauses.append(out)
        self.watches[out[0]].append(ci)
        self.watches[out[1]].append(ci)
        return True

    # ---- trail ----

    def _enqueue(self, lit: int, reason: int | None) -> None:
        v = atom_of(lit)
        self.assign[v] = 1 if is_positive(lit) else 0
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.phase[v] = is_positive(lit)
        self.trail.append(lit)

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        for i in range(len(self.trail) - 1, self.trail_lim[lvl] - 1, -1):
            self.assign[atom_of(self.trail[i])] = _UNDEF
        del self.trail[self.trail_lim[lvl]:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    # ---- propagation ----

    def _propagate(self) -> int | None:
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            self.propagations_total += 1
            false_lit = negate(p)
            ws = self.watches[false_lit]
            i = 0
            while i < len(ws):
                ci = ws[i]
                cl = self.clauses[ci]
                if cl[0] == false_lit:
                    cl[0], cl[1] = cl[1], cl[0]
                first = cl[0]
                if self.value(first) == 1:
                    i += 1
                    continue
                moved = False
                for k in range(2, len(cl)):
                    if self.value(cl[k]) != 0:
                        cl[1], cl[k] = cl[k], cl[1]
                        self.watches[cl[1]].append(ci)
                        ws[i] = ws[-1]
                        ws.pop()
                        moved = True
                        break
                if moved:
                    continue
                if self.value(first) == 0:
                    self.qhead = len(self.trail)
                    return ci
                self._enqueue(first, ci)
                i += 1
        return None

    # ---- conflict analysis ----

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > _RESCALE:
            for x in range(len(self.activity)):
                self.activity[x] /= _RESCALE
            self.var_inc /= _RESCALE

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        learnt: list[int] = [0]
        seen = [False] * self.n_vars()
        counter = 0
        p: int | None = None
        idx = len(self.trail) - 1
        cur_level = len(self.trail_lim)
        while True:
            cl = self.clauses[confl]
            start = 0 if p is None else 1
            for q in cl[start:]:
                v = atom_of(q)
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.level[v] >= cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[atom_of(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            seen[atom_of(p)] = False
            counter -= 1
            idx -= 1
            if counter == 0:
                break
            confl = self.reason[atom_of(p)]  # type: ignore[assignment]
        learnt[0] = negate(p)
        if len(learnt) == 1:
            return learnt, 0
        bt = max(self.level[atom_of(q)] for q in learnt[1:])
        top = max(range(1, len(learnt)), key=lambda i: self.level[atom_of(learnt[i])])
        learnt[1], learnt[top] = learnt[top], learnt[1]
        return learnt, bt

    def _analyze_final(self, failed: int) -> frozenset[int]:
        """Assumptions responsible for the assumption literal `failed` being false."""
        core = {failed}
        if not self.trail_lim:
            return frozenset(core)
        seen = {atom_of(failed)}
        for i in range(len(self.trail) - 1, self.trail_lim[0] - 1, -1):
            lit = self.trail[i]
            v = atom_of(lit)
            if v not in seen:
                continue
            seen.discard(v)
            r = self.reason[v]
            if r is None:
                core.add(lit)
            else:
                for q in self.clauses[r][1:]:
                    if self.level[atom_of(q)] > 0:
                        seen.add(atom_of(q))
        return frozenset(core)

    # ---- search ----

    def _decide(self) -> int | None:
        best = -1
        best_act = -1.0
        for v in range(self.n_vars()):
            if self.assign[v] == _UNDEF and self.activity[v] > best_act:
                best = v
                best_act = self.activity[v]
        if best < 0:
            return None
        return best << 1 if self.phase[best] else (best << 1) | 1

    def solve(
        self,
        assumptions: tuple[int, ...] = (),
        max_conflicts: int | None = None,
        deadline: float | None = None,
    ) -> bool:
        if not self.ok:
            self.core = frozenset()
            return False
        conflicts_here = 0
        restart_at = 100
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts_total += 1
                conflicts_here += 1
                if not self.trail_lim:
                    # toplevel conflict: the database itself is unsatisfiable,
                    # and the unprocessed tail of the trail is now meaningless
                    self.ok = False
                    self.core = frozenset()
                    return False
                learnt, bt = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    ci = len(self.clauses)
                    self.clauses.append(learnt)
                    self.watches[learnt[0]].append(ci)
                    self.watches[learnt[1]].append(ci)
                    self._enqueue(learnt[0], ci)
                self.var_inc /= 0.95
                if max_conflicts is not None and conflicts_here >= max_conflicts:
                    self._cancel_until(0)
                    raise ResourceLimit("conflict budget exhausted")
                if deadline is not None and conflicts_here % 64 == 0 and time.monotonic() > deadline:
                    self._cancel_until(0)
                    raise ResourceLimit("deadline exceeded")
                if conflicts_here >= restart_at:
                    restart_at = int(restart_at * 1.5)
                    self._cancel_until(0)
                continue
            if deadline is not None and time.monotonic() > deadline:
                self._cancel_until(0)
                raise ResourceLimit("deadline exceeded")
            if len(self.trail_lim) < len(assumptions):
                p = assumptions[len(self.trail_lim)]
                if self.value(p) == 1:
                    self.trail_lim.append(len(self.trail))
                    continue
                if self.value(p) == 0:
                    self.core = self._analyze_final(p)
                    self._cancel_until(0)
                    return False
                self.trail_lim.append(len(self.trail))
                self._enqueue(p, None)
                continue
            lit = self._decide()
            if lit is None:
                self.model = [self.assign[v] == 1 for v in range(self.n_vars())]
                self._cancel_until(0)
                return True
            self.decisions_total += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)


def minimize_core(
    solve_subset,
    core: frozenset[int],
) -> frozenset[int]:
    """Deletion-based single pass. solve_subset(assumptions) -> True iff satisfiable.

    Sound because supersets of unsatisfiable assumption sets stay unsatisfiable;
    the result is subset-minimal for single removals, not globally minimum.
    """
    kept = sorted(core)
    i = 0
    while i < len(kept):
        trial = kept[:i] + kept[i + 1:]
        if not solve_subset(tuple(trial)):
            kept = trial
        else:
            i += 1
    return frozenset(kept)
