"""Ground normal programs, CNF formulas, and brute-force ground truth.

Atoms are dense integer ids managed by a Vocabulary. Literals pack atom and
sign into one int: positive atom a is 2*a, negative is 2*a+1. Truth objects
(models, consequence sets) are frozensets of true atom ids; everything else
about an assignment is implied because assignments are total over the
occurring atoms.

Conventions fixed here and relied on everywhere else:
  - cautious/backbone of an object with no models is atoms_of(object)
    (empty-intersection convention);
  - enumeration order is lexicographic with the smallest occurring atom id
    most significant and false < true.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

BRUTE_ATOM_BOUND = 20


def pos_lit(atom: int) -> int:
    return atom << 1


def neg_lit(atom: int) -> int:
    return (atom << 1) | 1


def atom_of(lit: int) -> int:
    return lit >> 1


def is_positive(lit: int) -> bool:
    return (lit & 1) == 0


def negate(lit: int) -> int:
    return lit ^ 1


class Vocabulary:
    """Append-only bidirectional atom name <-> id map."""

    def __init__(self) -> None:
        self._by_name: dict[str, int] = {}
        self._names: list[str] = []

    def intern(self, name: str) -> int:
        aid = self._by_name.get(name)
        if aid is None:
            aid = len(self._names)
            self._by_name[name] = aid
            self._names.append(name)
        return aid

    def id_of(self, name: str) -> int:
        return self._by_name[name]

    def name_of(self, aid: int) -> str:
        return self._names[aid]

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __len__(self) -> int:
        return len(self._names)

    def names(self) -> list[str]:
        return list(self._names)


@dataclass(frozen=True)
class Rule:
    """head <- pos, not neg. head None makes it a constraint."""

    head: int | None
    pos: tuple[int, ...]
    neg: tuple[int, ...]


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...]


@dataclass(frozen=True)
class CnfFormula:
    """n_vars is the declared count; clauses hold literal tuples."""

    n_vars: int
    clauses: tuple[tuple[int, ...], ...]


Theory = Program | CnfFormula


def atoms_of(base: Theory) -> frozenset[int]:
    """Atoms occurring in the object (declared-but-unused DIMACS vars excluded)."""
    out: set[int] = set()
    if isinstance(base, Program):
        for r in base.rules:
            if r.head is not None:
                out.add(r.head)
            out.update(r.pos)
            out.update(r.neg)
    else:
        for cl in base.clauses:
            out.update(atom_of(l) for l in cl)
    return frozenset(out)


def with_constraint(base: Theory, body: tuple[int, ...]) -> Theory:
    """base plus the constraint "<- body" (body is a tuple of atoms, all positive)."""
    if isinstance(base, Program):
        return Program(base.rules + (Rule(None, tuple(body), ()),))
    clause = tuple(neg_lit(a) for a in body)
    return CnfFormula(base.n_vars, base.clauses + (clause,))


def reduct(program: Program, xplus: frozenset[int]) -> Program:
    """The reduct wrt the positive part xplus: drop rules blocked by X, strip negation."""
    kept = []
    for r in program.rules:
        if any(a in xplus for a in r.neg):
            continue
        kept.append(Rule(r.head, r.pos, ()))
    return Program(tuple(kept))


def least_model(program: Program) -> frozenset[int]:
    """Least model of a definite program; constraint rows are ignored here."""
    if any(r.neg for r in program.rules):
        raise ValueError("least_model requires a definite program")
    true: set[int] = set()
    changed = True
    while changed:
        changed = False
        for r in program.rules:
            if r.head is None or r.head in true:
                continue
            if all(a in true for a in r.pos):
                true.add(r.head)
                changed = True
    return frozenset(true)


def is_classical_model(base: Theory, mplus: frozenset[int]) -> bool:
    """mplus is the positive part of a total assignment over atoms_of(base)."""
    if isinstance(base, Program):
        for r in base.rules:
            body_holds = all(a in mplus for a in r.pos) and not any(
                a in mplus for a in r.neg
            )
            if body_holds and (r.head is None or r.head not in mplus):
                return False
        return True
    for cl in base.clauses:
        if not any(
            (atom_of(l) in mplus) == is_positive(l) for l in cl
        ):
            return False
    return True


def is_answer_set(program: Program, mplus: frozenset[int]) -> bool:
    if not is_classical_model(program, mplus):
        return False
    definite = Program(tuple(r for r in reduct(program, mplus).rules if r.head is not None))
    return least_model(definite) == mplus


def _cnf_models(formula: CnfFormula, occ: tuple[int, ...]) -> list[frozenset[int]]:
    n = len(occ)
    bitpos = {a: n - 1 - i for i, a in enumerate(occ)}
    masks = np.arange(1 << n, dtype=np.int64)
    sat_all = np.ones(1 << n, dtype=bool)
    for cl in formula.clauses:
        sat = np.zeros(1 << n, dtype=bool)
        for lit in cl:
            vals = (masks >> bitpos[atom_of(lit)]) & 1
            sat |= vals == (1 if is_positive(lit) else 0)
        sat_all &= sat
    out = []
    for m in masks[sat_all]:
        out.append(frozenset(a for a in occ if (int(m) >> bitpos[a]) & 1))
    return out


@lru_cache(maxsize=None)
def enumerate_models(base: Theory, kind: str) -> tuple[frozenset[int], ...]:
    """All models of the given kind ('stable' or 'classical'), positive parts only.

    Order is the lexicographic assignment order documented in the module
    docstring; exponential in the number of occurring atoms.
    """
    if kind not in ("stable", "classical"):
        raise ValueError(f"unknown model kind {kind!r}")
    if kind == "stable" and not isinstance(base, Program):
        raise ValueError("stable models are defined for programs only")
    occ = tuple(sorted(atoms_of(base)))
    n = len(occ)
    if isinstance(base, CnfFormula) and n > 0:
        return tuple(_cnf_models(base, occ))
    check = is_answer_set if kind == "stable" else is_classical_model
    out = []
    for mask in range(1 << n):
        mplus = frozenset(occ[i] for i in range(n) if (mask >> (n - 1 - i)) & 1)
        if check(base, mplus):
            out.append(mplus)
    return tuple(out)


def brute_consequences(base: Theory, kind: str, bound: int = BRUTE_ATOM_BOUND) -> frozenset[int]:
    """Intersection of all models' positive parts; atoms_of(base) if there are none."""
    occ = atoms_of(base)
    if len(occ) > bound:
        raise ValueError(f"{len(occ)} atoms exceed the brute-force bound {bound}")
    models = enumerate_models(base, kind)
    if not models:
        return occ
    out = set(occ)
    for m in models:
        out &= m
    return frozenset(out)
