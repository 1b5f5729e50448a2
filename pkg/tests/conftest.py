import numpy as np
import pytest

from dresim.config import ScenarioConfig
from dresim.core import TimingParams
from dresim.engine import World
from dresim.geometry import Arena
from dresim.ierap import IeRap


class Forced:
    """Mixin: replace the per-round (K, F) draw with fixed arrays."""

    def __init__(self, *args, K, F, **kw):
        super().__init__(*args, **kw)
        self.fixed = (np.asarray(K), np.asarray(F))

    def draw_round(self, msg, draws, n):
        draws.reserve(2)
        return self.fixed


def forced(cls, K, F, *args, **kw):
    sub = type("Forced" + cls.__name__, (Forced, cls), {})
    return sub(*args, K=K, F=F, **kw)


# reader id -> (name, position, K, F); ids are 0-based, names follow the walkthrough
TOY = [
    ("R1", (15.0, 0.0), 1, 2),
    ("R2", (0.0, 0.0), 1, 1),
    ("R3", (30.0, 0.0), 2, 2),
    ("R4", (30.0, 15.0), 3, 3),
    ("R5", (45.0, 15.0), 4, 3),
    ("R6", (30.0, 30.0), 4, 2),
    ("R7", (45.0, 30.0), 3, 4),
]
TOY_PREKNOWN = ("R1", "R4", "R6")


def toy_world(log=True):
    cfg = ScenarioConfig(protocol="ierap", readers=len(TOY), tags=len(TOY), channels=4, rounds=1,
                         arena=Arena(100, 100, read_range=10, interference_range=25),
                         timing=TimingParams(slots=4))
    pos = [p for _, p, _, _ in TOY]
    proto = forced(IeRap, [k for *_, k, _ in TOY], [f for *_, f in TOY], 4, 4)
    world = World(cfg, protocol=proto, log=log, reader_positions=pos, tag_positions=pos)
    for i, (name, *_rest) in enumerate(TOY):
        if name in TOY_PREKNOWN:
            world.readers[i].known_tags.add(i)
    return world


@pytest.fixture
def toy():
    return toy_world()


# one line per acceptance criterion, echoed at the end of the run
VERDICTS: list[str] = []


def record(number, ok: bool, detail: str) -> bool:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    VERDICTS.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
