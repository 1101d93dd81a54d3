from pathlib import Path

import pytest

from conseq import parse_dimacs, parse_program

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def p1():
    return parse_program((FIXTURES / "p1.lp").read_text())


@pytest.fixture(scope="session")
def p2():
    return parse_program((FIXTURES / "p2.lp").read_text())


@pytest.fixture(scope="session")
def f1():
    return parse_dimacs((FIXTURES / "f1.cnf").read_text())
