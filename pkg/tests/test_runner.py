import random

import pytest

from conseq.generate import random_program
from conseq.logic import CnfFormula, brute_consequences, neg_lit, pos_lit
from conseq.parsers import parse_program
from conseq.runner import (
    Interrupted,
    StrategyConfig,
    candidate_order,
    chunk_size_of,
    program_clauses,
    run,
    select_candidate,
    select_chunk,
)
from conseq.trace import validate_semantics, validate_structure
from conseq.transitions import CH, FS, FS_THEN_CH, MIXED, OV, UN, RuleId

ALL = (OV, UN, MIXED, CH, FS, FS_THEN_CH)


def _cfg(algo, **kw):
    if algo in (CH, FS_THEN_CH) and "chunk_size" not in kw and "chunk_percent" not in kw:
        kw["chunk_size"] = 2
    return StrategyConfig(algorithm=algo, **kw)


def test_under_ascending_uses_three_oracle_calls(p1):
    prog, vocab = p1
    result = run(prog, StrategyConfig(algorithm=UN, candidate_order="asc"))
    assert result.consequences == {vocab.id_of("c")}
    assert result.oracle_calls == 3
    assert result.coherent
    assert len(result.trace) == 9
    assert validate_structure(result.trace, prog).ok
    assert validate_semantics(result.trace, prog).ok


def test_chunked_run_reaches_the_p2_answer(p2):
    prog, vocab = p2
    result = run(prog, StrategyConfig(algorithm=CH, chunk_size=2, candidate_order="asc"))
    assert result.consequences == {vocab.id_of("c"), vocab.id_of("d")}
    assert validate_structure(result.trace, prog).ok
    assert validate_semantics(result.trace, prog).ok


def test_all_complete_families_agree_on_p1(p1):
    prog, vocab = p1
    want = {vocab.id_of("c")}
    for algo in (OV, UN, MIXED, CH, FS_THEN_CH):
        for order in ("asc", "desc"):
            result = run(prog, _cfg(algo, candidate_order=order))
            assert result.consequences == want, (algo, order)


def test_backbone_families_agree_on_f1(f1):
    formula, vocab = f1
    want = {vocab.id_of("v3")}
    for algo in (OV, UN, MIXED, CH, FS_THEN_CH):
        result = run(formula, _cfg(algo))
        assert result.consequences == want, algo


def test_core_family_brackets_p1(p1):
    prog, vocab = p1
    a, b, c = (vocab.id_of(n) for n in "abc")
    result = run(prog, StrategyConfig(algorithm=FS))
    assert result.consequences is None
    assert result.bounds == (frozenset({a, b, c}), frozenset({c}))
    assert result.oracle_calls == 5
    assert len(result.trace) == 6
    # the first minimized core is {not a, not b}, so the plural rule fires first
    assert [e.rule for e in result.trace] == [
        RuleId.CORE_ORACLE,
        RuleId.FAIL2_PRE,
        RuleId.CONTINUE,
        RuleId.CORE_ORACLE,
        RuleId.FAIL1_PRE,
        RuleId.MAIN,
    ]
    assert validate_structure(result.trace, prog).ok
    assert validate_semantics(result.trace, prog).ok


def test_core_then_chunk_finishes(p1):
    prog, vocab = p1
    result = run(prog, StrategyConfig(algorithm=FS_THEN_CH, chunk_size=2))
    assert result.consequences == {vocab.id_of("c")}
    assert validate_structure(result.trace, prog).ok
    assert validate_semantics(result.trace, prog).ok


def test_incoherent_program_yields_all_atoms():
    prog, vocab = parse_program("a :- not a.\nb :- a.\n")
    atoms = frozenset({vocab.id_of("a"), vocab.id_of("b")})
    for algo in ALL:
        result = run(prog, _cfg(algo))
        assert result.consequences == atoms, algo
        assert result.coherent is False
        assert result.trace[-1].rule is RuleId.TERMINAL
        assert validate_structure(result.trace, prog).ok
        assert validate_semantics(result.trace, prog).ok


def test_unsat_formula_yields_occurring_atoms():
    formula = CnfFormula(2, ((pos_lit(0),), (neg_lit(0),)))
    for algo in ALL:
        result = run(formula, _cfg(algo))
        assert result.consequences == {0}, algo
        assert result.coherent is False


def test_empty_theory():
    result = run(CnfFormula(0, ()))
    assert result.consequences == frozenset()
    assert result.trace == []
    assert result.coherent


def test_empty_clause_formula():
    result = run(CnfFormula(0, ((),)))
    assert result.consequences == frozenset()
    assert result.coherent is False


def test_candidate_order_helpers():
    atoms = frozenset({3, 1, 2})
    assert candidate_order(atoms, "asc") == [1, 2, 3]
    assert candidate_order(atoms, "desc") == [3, 2, 1]
    assert candidate_order(atoms, "shuffle", seed=5) == candidate_order(atoms, "shuffle", seed=5)
    with pytest.raises(ValueError):
        candidate_order(atoms, "sideways")
    order = [1, 2, 3]
    assert select_candidate(frozenset({2, 3}), frozenset({3}), order) == 2
    assert select_chunk(frozenset({1, 2, 3}), frozenset({2}), 2, order) == {1, 3}
    with pytest.raises(ValueError):
        select_candidate(frozenset({1}), frozenset({1}), order)


def test_chunk_size_policy():
    assert chunk_size_of(None, None, 10) == 2
    assert chunk_size_of(4, None, 10) == 4
    assert chunk_size_of(None, 20, 10) == 2
    assert chunk_size_of(None, 20, 11) == 3  # ceil
    assert chunk_size_of(None, 1, 3) == 1  # floor of one candidate


def test_chunk_percent_run(p2):
    prog, vocab = p2
    result = run(prog, StrategyConfig(algorithm=CH, chunk_percent=50))
    assert result.consequences == brute_consequences(prog, "stable")


def test_program_clauses_reads_rules_classically(p1):
    prog, vocab = p1
    a, b, c = (vocab.id_of(n) for n in "abc")
    formula = program_clauses(prog)
    assert formula.clauses == (
        (pos_lit(a), pos_lit(b)),
        (pos_lit(b), pos_lit(a)),
        (pos_lit(c), neg_lit(a)),
        (pos_lit(c), neg_lit(b)),
    )


def test_classical_oracle_on_program(p1):
    prog, _ = p1
    result = run(prog, StrategyConfig(algorithm=UN, oracle_kind="classical"))
    assert result.consequences == brute_consequences(program_clauses(prog), "classical")


@pytest.mark.parametrize(
    "kwargs",
    [
        {"algorithm": "XX"},
        {"candidate_order": "sideways"},
        {"mixed_first": "both"},
        {"algorithm": CH, "chunk_size": 2, "chunk_percent": 10},
        {"algorithm": CH, "chunk_size": 0},
        {"algorithm": CH, "chunk_percent": 0},
        {"algorithm": CH, "chunk_percent": 101},
        {"algorithm": UN, "chunk_size": 2},
        {"algorithm": OV, "chunk_percent": 10},
        {"oracle_kind": "supported"},
    ],
)
def test_config_validation(p1, kwargs):
    prog, _ = p1
    with pytest.raises(ValueError):
        run(prog, StrategyConfig(**kwargs))


def test_stable_oracle_needs_a_program(f1):
    formula, _ = f1
    with pytest.raises(ValueError):
        run(formula, StrategyConfig(oracle_kind="stable"))


def test_mixed_schedule_alternates(p2):
    prog, _ = p2
    result = run(prog, StrategyConfig(algorithm=MIXED, mixed_first="under"))
    assert result.consequences == brute_consequences(prog, "stable")
    probes = [
        e.after.action
        for e in result.trace
        if e.rule in (RuleId.OVER_APPROX, RuleId.UNDER_APPROX)
    ]
    assert probes  # at least one refinement beyond the opening call


def test_timeout_interrupts(p1):
    prog, _ = p1
    with pytest.raises(Interrupted) as exc:
        run(prog, StrategyConfig(algorithm=UN), timeout=0.0)
    partial = exc.value
    assert partial.under <= partial.over
    # the aborted invocation is still on the books
    assert partial.oracle_calls == 1
    assert partial.trace == []


def test_conflict_budget_interrupts():
    prog, _ = parse_program("a :- not b.\nb :- not a.\n:- a.\n:- b.\n")
    with pytest.raises(Interrupted):
        run(prog, StrategyConfig(algorithm=UN), max_conflicts=0)
    generous = run(prog, StrategyConfig(algorithm=UN), max_conflicts=10_000)
    assert generous.consequences == brute_consequences(prog, "stable")


def test_shuffle_orders_are_deterministic(p2):
    prog, _ = p2
    runs = [
        run(prog, StrategyConfig(algorithm=UN, candidate_order="shuffle", seed=3))
        for _ in range(2)
    ]
    assert runs[0].trace == runs[1].trace
    assert runs[0].consequences == runs[1].consequences


def test_random_programs_small_sweep():
    rng = random.Random(1234)
    for _ in range(40):
        prog, _ = random_program(rng, rng.randint(2, 6), rng.randint(1, 8))
        want = brute_consequences(prog, "stable")
        for algo in (OV, UN, MIXED):
            result = run(prog, _cfg(algo))
            assert result.consequences == want
            assert validate_structure(result.trace, prog).ok
            assert validate_semantics(result.trace, prog).ok
