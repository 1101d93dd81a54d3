"""Seeded random instances for benchmarks and randomized test suites."""

from __future__ import annotations

import random

from .logic import CnfFormula, Program, Rule, Vocabulary, neg_lit, pos_lit

CONSTRAINT_PROB = 0.15
CYCLE_PROB = 0.3


def random_program(rng: random.Random, n_atoms: int, n_rules: int) -> tuple[Program, Vocabulary]:
    vocab = Vocabulary()
    ids = [vocab.intern(f"x{i + 1}") for i in range(n_atoms)]
    rules = []
    for _ in range(n_rules):
        if rng.random() < CONSTRAINT_PROB:
            body = rng.sample(ids, rng.randint(1, min(2, n_atoms)))
            head = None
        else:
            head = rng.choice(ids)
            body = rng.sample(ids, rng.randint(0, min(3, n_atoms)))
        pos = sorted(a for a in body if rng.random() < 0.5)
        neg = sorted(a for a in body if a not in pos)
        rules.append(Rule(head, tuple(pos), tuple(neg)))
    if n_atoms >= 2 and rng.random() < CYCLE_PROB:
        # a positive loop, sometimes guarded, so non-tight programs show up
        cyc = rng.sample(ids, rng.randint(2, min(3, n_atoms)))
        for i, a in enumerate(cyc):
            b = cyc[(i + 1) % len(cyc)]
            pool = [g for g in ids if g != b]  # a guard on the edge atom would kill the edge
            guard = (rng.choice(pool),) if rng.random() < 0.5 else ()
            rules.append(Rule(a, (b,), guard))
    return Program(tuple(rules)), vocab


def random_3cnf(rng: random.Random, n_vars: int, n_clauses: int) -> tuple[CnfFormula, Vocabulary]:
    vocab = Vocabulary()
    for i in range(n_vars):
        vocab.intern(f"v{i + 1}")
    clauses = []
    for _ in range(n_clauses):
        atoms = sorted(rng.sample(range(n_vars), min(3, n_vars)))
        clauses.append(
            tuple(pos_lit(a) if rng.random() < 0.5 else neg_lit(a) for a in atoms)
        )
    return CnfFormula(n_vars, tuple(clauses)), vocab


def gen_instances(kind: str, count: int, atoms: int, size: int, seed: int):
    """Deterministic batch: a list of (name, theory, vocabulary) triples."""
    if kind not in ("program", "3cnf"):
        raise ValueError(f"unknown instance kind {kind!r}")
    if atoms < 1:
        raise ValueError("instances need at least one atom")
    rng = random.Random(seed)
    out = []
    for i in range(count):
        n_atoms = rng.randint(min(2, atoms), atoms)
        n_rows = rng.randint(1, max(1, size))
        if kind == "program":
            base, vocab = random_program(rng, n_atoms, n_rows)
            name = f"program_{seed}_{i:03d}"
        else:
            base, vocab = random_3cnf(rng, n_atoms, n_rows)
            name = f"cnf_{seed}_{i:03d}"
        out.append((name, base, vocab))
    return out
