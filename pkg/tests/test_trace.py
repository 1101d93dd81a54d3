import json
from dataclasses import replace
from pathlib import Path

import pytest

from conseq.logic import neg_lit, pos_lit
from conseq.parsers import ParseError
from conseq.runner import StrategyConfig, run
from conseq.trace import (
    OracleStats,
    TraceEvent,
    deserialize,
    serialize,
    validate_semantics,
    validate_structure,
)
from conseq.transitions import (
    CH,
    FS,
    UN,
    ControlState,
    CoreState,
    Over,
    RuleId,
    TerminalCont,
    TerminalOk,
    Under,
    UnderEmpty,
)

FIXTURES = Path(__file__).parent / "fixtures"


def _golden(name, theory):
    prog, vocab = theory
    events = deserialize((FIXTURES / name).read_text(), vocab)
    return prog, vocab, events


def _checks(report):
    return {check for _, check, _ in report.violations}


def test_fixture_under_run_validates(p1):
    prog, vocab, events = _golden("fig2_trace.jsonl", p1)
    assert len(events) == 9
    assert validate_structure(events, prog).ok
    assert validate_semantics(events, prog).ok
    assert events[-1].after == TerminalOk(frozenset({vocab.id_of("c")}))


def test_fixture_chunk_run_validates(p2):
    prog, vocab, events = _golden("fig4_trace.jsonl", p2)
    assert len(events) == 9
    assert validate_structure(events, prog).ok
    assert validate_semantics(events, prog).ok
    c, d = vocab.id_of("c"), vocab.id_of("d")
    assert events[-1].after == TerminalOk(frozenset({c, d}))
    # the failed chunk grows the under bound but leaves the over bound alone
    fail = next(e for e in events if e.rule is RuleId.FAIL_CHUNK)
    assert fail.after.over == fail.before.over
    assert fail.after.under == {c, d}


def test_fixture_core_run_validates(p1):
    prog, vocab, events = _golden("fig6_trace.jsonl", p1)
    assert len(events) == 6
    assert validate_structure(events, prog).ok
    assert validate_semantics(events, prog).ok
    a, b, c = (vocab.id_of(n) for n in "abc")
    assert events[-1].after == TerminalCont(frozenset({a, b, c}), frozenset({c}))


def test_runner_trace_roundtrips(p1):
    prog, vocab = p1
    result = run(prog, StrategyConfig(algorithm=UN))
    text = serialize(result.trace, vocab)
    assert len(text.splitlines()) == 9
    back = deserialize(text, vocab)
    assert back == result.trace
    assert serialize(back, vocab) == text


def test_runner_traces_validate_for_other_families(p1, p2):
    prog2, vocab2 = p2
    result = run(prog2, StrategyConfig(algorithm=CH, chunk_size=2))
    assert validate_structure(result.trace, prog2).ok
    assert validate_semantics(result.trace, prog2).ok
    prog1, vocab1 = p1
    result = run(prog1, StrategyConfig(algorithm=FS))
    assert validate_structure(result.trace, prog1).ok
    assert validate_semantics(result.trace, prog1).ok
    back = deserialize(serialize(result.trace, vocab1), vocab1)
    assert back == result.trace


def test_fixture_roundtrip_preserves_events(p1):
    prog, vocab, events = _golden("fig2_trace.jsonl", p1)
    assert deserialize(serialize(events, vocab), vocab) == events


def test_empty_trace():
    from conseq.logic import Program

    empty = Program(())
    assert validate_structure([], empty).ok
    assert validate_semantics([], empty).ok


def test_empty_trace_needs_empty_theory(p1):
    prog, _ = p1
    report = validate_structure([], prog)
    assert _checks(report) == {"initial"}


def test_structure_rejects_bad_step_numbers(p1):
    prog, _, events = _golden("fig2_trace.jsonl", p1)
    events[3] = replace(events[3], step=7)
    assert "step" in _checks(validate_structure(events, prog))


def test_structure_rejects_broken_chain(p1):
    prog, _, events = _golden("fig2_trace.jsonl", p1)
    del events[4]
    fixed = [replace(e, step=i) for i, e in enumerate(events)]
    assert "chain" in _checks(validate_structure(fixed, prog))


def test_structure_rejects_foreign_stats(p1):
    prog, _, events = _golden("fig2_trace.jsonl", p1)
    events[1] = replace(events[1], oracle_stats=OracleStats(0, 0))
    assert "stats" in _checks(validate_structure(events, prog))


def test_structure_rejects_wrong_target(p1):
    prog, vocab, events = _golden("fig2_trace.jsonl", p1)
    a = vocab.id_of("a")
    last = events[-1]
    events[-1] = replace(last, after=TerminalOk(frozenset({a})))
    assert "apply" in _checks(validate_structure(events, prog))


def test_structure_rejects_duplicate_record_literal(p1):
    prog, _, events = _golden("fig2_trace.jsonl", p1)
    bad = events[0].after
    events[0] = replace(
        events[0],
        after=replace(bad, record=bad.record + (bad.record[0],)),
    )
    assert "record" in _checks(validate_structure(events, prog))


def test_structure_rejects_partial_consistent_record(p1):
    prog, _, events = _golden("fig2_trace.jsonl", p1)
    bad = events[0].after
    events[0] = replace(events[0], after=replace(bad, record=bad.record[:2]))
    assert "record" in _checks(validate_structure(events, prog))


def test_structure_rejects_choice_outside_gap(p1):
    prog, vocab, events = _golden("fig2_trace.jsonl", p1)
    b = vocab.id_of("b")
    choice = events[2]
    events[2] = replace(choice, after=replace(choice.after, action=Under(b)))
    assert "choice" in _checks(validate_structure(events, prog))


def test_structure_rejects_truncated_run(p1):
    prog, _, events = _golden("fig2_trace.jsonl", p1)
    assert "terminal" in _checks(validate_structure(events[:-1], prog))


def test_structure_rejects_inapplicable_rule(p1):
    prog, _, events = _golden("fig2_trace.jsonl", p1)
    # Terminal fired while the bounds still differ
    control = events[1].after
    fake = [
        events[0],
        events[1],
        TraceEvent(2, RuleId.TERMINAL, control, TerminalOk(control.over)),
    ]
    assert "applicable" in _checks(validate_structure(fake, prog))


def test_structure_rejects_stalled_gap(p1):
    prog, vocab = p1
    atoms = frozenset(range(3))
    a = vocab.id_of("a")
    rec = tuple(pos_lit(x) for x in sorted(atoms))
    start = CoreState((), atoms, frozenset(), UnderEmpty())
    filled = CoreState(rec, atoms, frozenset(), UnderEmpty())
    ctl = ControlState(atoms, frozenset(), UnderEmpty())
    probe = CoreState((), atoms, frozenset(), Under(a))
    clash = CoreState((pos_lit(a), neg_lit(a)), atoms, frozenset(), Under(a))
    ctl2 = ControlState(atoms, frozenset({a}), Under(a))
    events = [
        TraceEvent(0, RuleId.ORACLE, start, filled),
        TraceEvent(1, RuleId.FIND, filled, ctl),
        TraceEvent(2, RuleId.UNDER_APPROX, ctl, probe),
        TraceEvent(3, RuleId.ORACLE, probe, clash),
        TraceEvent(4, RuleId.FAIL_UNDER, clash, ctl2),
    ]
    checks = _checks(validate_structure(events, prog))
    # the all-true model keeps the over bound whole, so the Find edge stalls;
    # the run is also unfinished
    assert "progress" not in checks  # Find under the initial action is exempt
    assert "terminal" in checks


def test_structure_flags_repeated_states(p1):
    prog, _, events = _golden("fig2_trace.jsonl", p1)
    # replaying the first probe verbatim revisits its source state
    looped = events[:2] + [
        replace(events[0], step=2),
        replace(events[1], step=3),
    ]
    checks = _checks(validate_structure(looped, prog))
    assert "acyclic" in checks


def test_semantics_rejects_wrong_witness(p1):
    prog, vocab, events = _golden("fig2_trace.jsonl", p1)
    a = vocab.id_of("a")
    last = events[-1]
    events[-1] = replace(last, after=TerminalOk(frozenset({a})))
    assert "exact" in _checks(validate_semantics(events, prog))


def test_semantics_rejects_non_model_record(p1):
    prog, vocab, events = _golden("fig2_trace.jsonl", p1)
    a, b, c = (vocab.id_of(n) for n in "abc")
    # {a,b} is total and consistent but not an answer set
    rec = (pos_lit(a), pos_lit(b), neg_lit(c))
    first = events[0]
    filled = replace(first.after, record=rec)
    partial = [
        replace(first, after=filled),
        TraceEvent(
            1,
            RuleId.FIND,
            filled,
            ControlState(frozenset({a, b}), frozenset(), UnderEmpty()),
        ),
    ]
    assert "witness" in _checks(validate_semantics(partial, prog))


def test_semantics_rejects_phantom_failure(p1):
    prog, vocab, events = _golden("fig2_trace.jsonl", p1)
    a = vocab.id_of("a")
    # claim the probe on a failed although an answer set avoids a
    probe = events[5].after
    clash = replace(probe, record=(pos_lit(a), neg_lit(a)))
    partial = [
        TraceEvent(0, RuleId.ORACLE, probe, clash),
        TraceEvent(
            1,
            RuleId.FAIL_UNDER,
            clash,
            ControlState(probe.over, probe.under | {a}, probe.action),
        ),
    ]
    assert "witness" not in _checks(validate_semantics(partial, prog))
    assert "incoherence" in _checks(validate_semantics(partial, prog))


def test_semantics_rejects_escaped_bracket(p1):
    prog, vocab, events = _golden("fig2_trace.jsonl", p1)
    b = vocab.id_of("b")
    first = events[0]
    # an under bound the true consequences cannot contain
    poisoned = replace(first.before, under=frozenset({b}), record=())
    partial = [replace(first, before=poisoned, after=replace(first.after, under=frozenset({b})))]
    assert "bracket" in _checks(validate_semantics(partial, prog))


def test_semantics_checks_fail_over_exactness(f1):
    formula, vocab = f1
    v1 = vocab.id_of("v1")
    atoms = frozenset(range(3))
    rec = (pos_lit(v1), neg_lit(v1))
    probe = CoreState((), atoms, frozenset(), Over())
    clash = CoreState(rec, atoms, frozenset(), Over())
    partial = [
        TraceEvent(0, RuleId.ORACLE, probe, clash),
        TraceEvent(1, RuleId.FAIL_OVER, clash, ControlState(atoms, atoms, Over())),
    ]
    # the backbone is {v3}, not all three atoms
    assert "over-exact" in _checks(validate_semantics(partial, formula))


def test_validate_semantics_oracle_kind_override(p1):
    prog, _, events = _golden("fig2_trace.jsonl", p1)
    assert validate_semantics(events, prog, "stable").ok
    with pytest.raises(ValueError):
        validate_semantics(events, prog, "supported")


def test_serialize_stats_roundtrip(p1):
    prog, vocab = p1
    result = run(prog, StrategyConfig(algorithm=UN))
    stats = [e.oracle_stats for e in result.trace]
    assert any(s is not None for s in stats)
    rows = [json.loads(line) for line in serialize(result.trace, vocab).splitlines()]
    for e, row in zip(result.trace, rows):
        assert (e.oracle_stats is not None) == ("oracle_stats" in row)


@pytest.mark.parametrize(
    "line,fragment",
    [
        ("{nope", "invalid JSON"),
        ('["list"]', "not an object"),
        ('{"step":0}', "missing field"),
        ('{"step":0,"rule":"Warp","before":{},"after":{}}', "unknown rule"),
        (
            '{"step":0,"rule":"Find","before":{"kind":"woble"},"after":{"kind":"ok","witness":[]}}',
            "unknown state kind",
        ),
        (
            '{"step":0,"rule":"Find","before":{"kind":"ok","witness":["zz"]},"after":{"kind":"ok","witness":[]}}',
            "unknown atom",
        ),
    ],
)
def test_deserialize_errors(line, fragment, p1):
    _, vocab = p1
    with pytest.raises(ParseError) as exc:
        deserialize("\n" + line + "\n", vocab)
    assert fragment in str(exc.value)
    assert exc.value.line == 2


def test_deserialize_skips_blank_lines(p1):
    prog, vocab, events = _golden("fig2_trace.jsonl", p1)
    text = (FIXTURES / "fig2_trace.jsonl").read_text()
    spaced = "\n\n".join(text.splitlines()) + "\n"
    assert deserialize(spaced, vocab) == events
