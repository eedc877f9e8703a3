import numpy as np
import pytest
from hypothesis import strategies as st

from dynrg import SnapshotSequence

ACCEPTANCE_LINES = []


def random_sequence(rng, n, T, density=0.3, persist=0.6):
    """Snapshots with some persistence so every transition type occurs."""
    iu, ju = np.triu_indices(n, 1)
    state = rng.random(len(iu)) < density
    snaps = [np.column_stack([iu[state], ju[state]])]
    for _ in range(T):
        u = rng.random(len(iu))
        state = np.where(state, u < persist, u < density * (1 - persist) / max(1 - density, 1e-9))
        snaps.append(np.column_stack([iu[state], ju[state]]))
    return SnapshotSequence(n, tuple(snaps))


def dense_counts(seq):
    """O(n^2 T) scan over unordered pairs: (e0, n01, n10, n11, n00)."""
    A = seq.to_dense()
    iu, ju = np.triu_indices(seq.n, 1)
    x = A[:, iu, ju].astype(int)
    prev, cur = x[:-1], x[1:]
    return (int(x[0].sum()), int(((1 - prev) * cur).sum()), int((prev * (1 - cur)).sum()),
            int((prev * cur).sum()), int(((1 - prev) * (1 - cur)).sum()))


@st.composite
def sequences(draw, max_n=12, max_T=4, min_T=0):
    n = draw(st.integers(1, max_n))
    T = draw(st.integers(min_T, max_T))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    snaps = []
    for _ in range(T + 1):
        mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
        snaps.append([p for p, m in zip(pairs, mask) if m])
    return SnapshotSequence.from_edge_lists(n, snaps)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def report():
    """Record one acceptance line: report(criterion, passed, detail)."""
    def add(criterion, passed, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
        return passed
    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
