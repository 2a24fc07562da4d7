import json
from pathlib import Path

import numpy as np
import pytest

from nosig.state_core import Ensemble, PureState

DATA = Path(__file__).parent / "data"


def ket(*amps):
    return PureState.normalized(np.array(amps, dtype=complex))


def z_pair():
    return Ensemble(((0.5, ket(1, 0)), (0.5, ket(0, 1))))


def x_pair():
    return Ensemble(((0.5, ket(1, 1)), (0.5, ket(1, -1))))


def proj(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def ptrace_b_loops(m, da, db):
    """Partial trace over B by explicit index summation."""
    out = np.zeros((da, da), dtype=complex)
    for i in range(da):
        for j in range(da):
            for b in range(db):
                out[i, j] += m[i * db + b, j * db + b]
    return out


def ptrace_a_loops(m, da, db):
    out = np.zeros((db, db), dtype=complex)
    for i in range(db):
        for j in range(db):
            for a in range(da):
                out[i, j] += m[a * db + i, a * db + j]
    return out


@pytest.fixture(scope="session")
def golden():
    return {
        "cloner": json.loads((DATA / "golden" / "cloner.json").read_text()),
        "mean_field": json.loads((DATA / "golden" / "mean_field.json").read_text()),
    }


ACCEPTANCE_LINES: list[str] = []


def record_criterion(label: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
