import json
from pathlib import Path

import numpy as np
import pytest

from cmacsec.files import channel_to_dict, load_channel
from cmacsec.info import DmChannel, JointPmf

DATA = Path(__file__).parent / "data"

FIG3 = dict(h1=0.6, h2=0.6, g1=0.4, g2=0.5, p1=1.0, p2=1.0)
FIG4 = dict(h1=0.6, h2=0.6, g1=0.1, g2=0.5, p1=1.0, p2=1.0)


def bsc(e):
    return np.array([[1 - e, e], [e, 1 - e]])


def binary_channel():
    return load_channel(DATA / "channel_binary.json")


def identical_outputs_channel(seed=0):
    """Y2 is a copy of Y1, so receiver 2 sees exactly what receiver 1 sees."""
    rng = np.random.default_rng(seed)
    p_y1 = rng.dirichlet(np.ones(2), size=(2, 2))
    law = np.einsum("abi,ij->abij", p_y1, np.eye(2))
    return DmChannel(law)


def x1_blind_eavesdropper():
    """Y1 is a clean copy of X1; Y2 is a noisy copy of X2 and ignores X1."""
    p_y1 = np.broadcast_to(bsc(0.0)[:, None, :], (2, 2, 2))
    p_y2 = np.broadcast_to(bsc(0.2)[None, :, :], (2, 2, 2))
    return DmChannel.from_components(p_y1, p_y2)


def noiseless_channel():
    """Both receivers see (X1, X2) exactly, Y = 2 * X1 + X2."""
    law = np.zeros((2, 2, 4, 4))
    for a in range(2):
        for b in range(2):
            law[a, b, 2 * a + b, 2 * a + b] = 1.0
    return DmChannel(law)


def random_channel(seed, sizes=(2, 2, 2, 2)):
    rng = np.random.default_rng(seed)
    x1, x2, y1, y2 = sizes
    return DmChannel(rng.dirichlet(np.ones(y1 * y2), size=(x1, x2)).reshape(sizes))


def mi_battery(count=60, seed=2024):
    """Seeded random joints with 2 to 4 variables, each of size 2 or 3, some with zero cells."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        nvars = int(rng.integers(2, 5))
        sizes = tuple(int(s) for s in rng.integers(2, 4, size=nvars))
        table = rng.dirichlet(np.full(int(np.prod(sizes)), 0.7))
        if i % 3 == 0:
            table[rng.random(table.size) < 0.25] = 0.0
            table /= table.sum()
        names = tuple("ABCD"[:nvars])
        out.append(JointPmf(names, table.reshape(sizes)))
    return out


def write_json(path, doc):
    Path(path).write_text(json.dumps(doc))
    return path


@pytest.fixture
def channel_file(tmp_path):
    """Factory writing a DmChannel to a channel-spec JSON file."""
    def make(ch, name="channel.json"):
        return write_json(tmp_path / name, channel_to_dict(ch))
    return make


# -- acceptance summary ----------------------------------------------------------

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE[name] = (report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda n: int(n.split("_")[2])):
        outcome, duration = _ACCEPTANCE[name]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        number = name.split("_")[2]
        title = " ".join(name.split("_")[3:])
        terminalreporter.write_line(f"criterion {number}: {verdict} ({title}, {duration:.2f} s)")
