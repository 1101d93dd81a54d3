"""Text input/output for programs and DIMACS CNF.

Program syntax, one statement per "." terminator:

    a :- b, not c.    % rule
    a.                % fact
    :- a, b.          % constraint
    % comment to end of line

Atom names match [A-Za-z_][A-Za-z0-9_]*. DIMACS variable i is interned under
the name "v{i}"; declared-but-unused variables stay in the vocabulary but do
not occur in the formula (atoms_of skips them).
"""

from __future__ import annotations

import re

from .logic import CnfFormula, Program, Rule, Vocabulary, neg_lit, pos_lit

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


class ParseError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _strip_comments(text: str) -> str:
    return "\n".join(part.split("%", 1)[0] for part in text.split("\n"))


def parse_program(text: str) -> tuple[Program, Vocabulary]:
    vocab = Vocabulary()
    rules: list[Rule] = []
    clean = _strip_comments(text)
    pos = 0
    line = 1
    while True:
        dot = clean.find(".", pos)
        if dot < 0:
            tail = clean[pos:]
            if tail.strip():
                at = pos + len(tail) - len(tail.lstrip())
                raise ParseError("statement not terminated by '.'", line + clean.count("\n", 0, at))
            break
        stmt = clean[pos:dot]
        stmt_line = line + clean.count("\n", 0, pos + len(stmt) - len(stmt.lstrip()))
        rules.append(_parse_statement(stmt.strip(), stmt_line, vocab))
        pos = dot + 1
    return Program(tuple(rules)), vocab


def _parse_statement(stmt: str, line: int, vocab: Vocabulary) -> Rule:
    if not stmt:
        raise ParseError("empty statement", line)
    if ":-" in stmt:
        head_txt, body_txt = stmt.split(":-", 1)
        head_txt = head_txt.strip()
        head = _parse_atom(head_txt, line, vocab) if head_txt else None
        body_txt = body_txt.strip()
        if not body_txt:
            raise ParseError("empty body after ':-'", line)
        pos_set: dict[int, None] = {}
        neg_set: dict[int, None] = {}
        for item in body_txt.split(","):
            item = item.strip()
            if item.startswith("not ") or item.startswith("not\t"):
                neg_set[_parse_atom(item[4:].strip(), line, vocab)] = None
            else:
                pos_set[_parse_atom(item, line, vocab)] = None
        return Rule(head, tuple(sorted(pos_set)), tuple(sorted(neg_set)))
    return Rule(_parse_atom(stmt, line, vocab), (), ())


def _parse_atom(token: str, line: int, vocab: Vocabulary) -> int:
    if not _NAME.match(token):
        raise ParseError(f"bad atom name {token!r}", line)
    return vocab.intern(token)


def render_program(program: Program, vocab: Vocabulary) -> str:
    lines = []
    for r in program.rules:
        body = [vocab.name_of(a) for a in r.pos] + [f"not {vocab.name_of(a)}" for a in r.neg]
        if r.head is None:
            lines.append(f":- {', '.join(body)}.")
        elif body:
            lines.append(f"{vocab.name_of(r.head)} :- {', '.join(body)}.")
        else:
            lines.append(f"{vocab.name_of(r.head)}.")
    return "".join(line + "\n" for line in lines)


def parse_dimacs(text: str) -> tuple[CnfFormula, Vocabulary]:
    n_vars = -1
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("c"):
            continue
        if stripped.startswith("%"):
            break
        if stripped.startswith("p"):
            if n_vars >= 0:
                raise ParseError("duplicate problem line", lineno)
            fields = stripped.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise ParseError(f"bad problem line {stripped!r}", lineno)
            try:
                n_vars, _ = int(fields[2]), int(fields[3])
            except ValueError:
                raise ParseError(f"bad problem line {stripped!r}", lineno)
            if n_vars < 0:
                raise ParseError("negative variable count", lineno)
            continue
        if n_vars < 0:
            raise ParseError("clause before problem line", lineno)
        for tok in stripped.split():
            try:
                v = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno)
            if v == 0:
                clauses.append(tuple(current))
                current = []
                continue
            if abs(v) > n_vars:
                raise ParseError(f"variable {abs(v)} exceeds declared {n_vars}", lineno)
            current.append(pos_lit(abs(v) - 1) if v > 0 else neg_lit(abs(v) - 1))
    if n_vars < 0:
        raise ParseError("missing problem line", 1)
    if current:
        raise ParseError("unterminated clause at end of input", lineno)
    vocab = Vocabulary()
    for i in range(n_vars):
        vocab.intern(f"v{i + 1}")
    return CnfFormula(n_vars, tuple(clauses)), vocab


def render_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.n_vars} {len(formula.clauses)}"]
    for cl in formula.clauses:
        nums = [(l >> 1) + 1 if (l & 1) == 0 else -((l >> 1) + 1) for l in cl]
        lines.append(" ".join(str(x) for x in nums + [0]))
    return "".join(line + "\n" for line in lines)
