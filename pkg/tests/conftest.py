import json
import math
from pathlib import Path

import numpy as np
import pytest

from phaseadj.array_model import ArrayGeometry, build_preassigned_weight

DATA = Path(__file__).parent / "data"


def load_json(name):
    with open(DATA / name) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def ref_array():
    pub = load_json("published_weights.json")
    geom = ArrayGeometry(pub["positions"])
    gains = np.array(load_json("level_52deg.json")["gains"])
    w_pub = np.array([complex(re, im) for re, im in pub["weights"]])
    w_pre = build_preassigned_weight(geom, gains, math.radians(-30.0))
    return {"geom": geom, "gains": gains, "w_pub": w_pub, "w_pre": w_pre}


@pytest.fixture
def data_dir():
    return DATA


def random_edges(rng, n, low=0.05, high=1.0, feasible=True):
    """Sorted random edge list; redrawn until it has the requested feasibility."""
    while True:
        d = np.sort(rng.uniform(low, high, n))[::-1].copy()
        if (d[0] <= d[1:].sum()) == feasible:
            return d


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance_log(request):
    """Record a criterion outcome; lines are repeated in the terminal summary."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def log(number, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
        print(line)
        lines.append(line)
        return passed

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
