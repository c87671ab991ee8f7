import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from tdachatter.persistence import PersistenceDiagram  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_diagram(rng, n_max=20, scale=3.0) -> PersistenceDiagram:
    n = int(rng.integers(0, n_max + 1))
    b = rng.uniform(0, scale, n)
    d = b + rng.uniform(0.01, scale, n)
    return PersistenceDiagram(1, np.column_stack([b, d]))


@st.composite
def diagrams(draw, max_points=12):
    n = draw(st.integers(0, max_points))
    coord = st.floats(0, 10, allow_nan=False, allow_infinity=False)
    pts = []
    for _ in range(n):
        b = draw(coord)
        p = draw(st.floats(0.01, 5))
        pts.append((b, b + p))
    return PersistenceDiagram(1, np.array(pts).reshape(-1, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def blobs(seed=42, n=50, separation=10.0, dim=2):
    """Two isotropic unit-variance Gaussian blobs ``separation`` sigma apart.

    Returns (X_train, y_train, X_test, y_test), n points per class on each side.
    """
    rng = np.random.default_rng(seed)
    shift = np.zeros(dim)
    shift[0] = separation

    def draw():
        X = np.vstack([rng.normal(size=(n, dim)), rng.normal(size=(n, dim)) + shift])
        return X, np.repeat([0, 1], n)

    return (*draw(), *draw())


def f5_only_samples(n_per_class=30, seed=0):
    """Diagrams whose classes differ only through one point's persistence,
    which f5 reads off directly.

    Every diagram shares a point dying last at (9.9, 10), so the per-diagram
    maximum death is the same in both classes; the class point is born at 0,
    so it adds nothing to f1 or f3.
    """
    from tdachatter.learn import LabeledDiagram

    rng = np.random.default_rng(seed)
    out = []
    for label in (0, 1):
        for i in range(n_per_class):
            b = rng.uniform(0, 5, 20)
            base = np.column_stack([b, b + rng.uniform(0.01, 0.4, 20)])
            p = (0.5 if label == 0 else 1.0) + rng.uniform(0, 0.1)
            pts = np.vstack([base, [[0.0, p], [9.9, 10.0]]])
            rid = f"{label}_{i}"
            out.append(LabeledDiagram(rid, rid, label, PersistenceDiagram(1, pts)))
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        name, ok, detail = results[number]
        terminalreporter.write_line(
            f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2} {name}: {detail}")
