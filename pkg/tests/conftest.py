import pathlib

import numpy as np
import pytest

from trussforge.truss import TrussTopology

ROOT = pathlib.Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"


def regular_tetrahedron(a=1.0):
    base = np.array([[0.0, 0.0, 0.0], [a, 0.0, 0.0], [a / 2, a * np.sqrt(3) / 2, 0.0]])
    apex = base.mean(axis=0) + [0.0, 0.0, a * np.sqrt(2.0 / 3.0)]
    return np.vstack([base, apex])


TETRA = TrussTopology(4, ((0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (2, 3)), frozenset({0, 1, 2}))


def random_truss(rng, n_nodes):
    """Random connected truss with 3 anchors and well-separated nodes."""
    while True:
        P = rng.uniform(-1.0, 1.0, size=(n_nodes, 3))
        d = np.linalg.norm(P[:, None] - P[None], axis=-1) + np.eye(n_nodes)
        if d.min() > 0.2:
            break
    members = [(i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes) if rng.random() < 0.7 or j == i + 1]
    return TrussTopology(n_nodes, tuple(members), frozenset({0, 1, 2})), P


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance(request, capsys):
    """Record one pass/fail line for an acceptance criterion and echo it immediately."""
    def report(number, title, passed, detail=""):
        line = f"ACCEPTANCE {number}: {'PASS' if passed else 'FAIL'} - {title}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return passed
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
