import time

import numpy as np
import pytest

from dresim.baselines import Nfra
from dresim.config import ScenarioConfig
from dresim.core import HOLD, READ, SimulationFault
from dresim.engine import World, run_round, run_simulation
from dresim.geometry import Arena, MobilityConfig
from dresim.ierap import IeRap


def test_zero_reader_round_is_bare_schedule():
    cfg = ScenarioConfig(protocol="ierap", readers=0, tags=0, rounds=1)
    rep = run_simulation(cfg)
    assert rep.elapsed == pytest.approx(0.89983, abs=1e-12)
    assert rep.successful_reads == 0 and rep.network_energy == 0.0


def test_one_reader_one_tag():
    cfg = ScenarioConfig(protocol="ierap", readers=1, tags=1, rounds=1)
    world = World(cfg, reader_positions=[(50, 50)], tag_positions=[(52, 50)])
    rep = run_simulation(cfg, world=world)
    assert rep.successful_reads == 1 and rep.acquisitions == 1
    assert world.readers[0].known_tags == {0}


def test_zero_rounds():
    rep = run_simulation(ScenarioConfig(protocol="gdra", readers=5, rounds=0))
    assert rep.elapsed == 0.0 and rep.per_round == [] and rep.network_energy == 0.0


@pytest.mark.parametrize("name,channels", [("ierap", 4), ("frca2", 4), ("dmrcp", 1)])
def test_runs_are_reproducible(name, channels):
    cfg = ScenarioConfig(protocol=name, readers=25, tags=150, channels=channels, rounds=5, seed=11,
                         arena=Arena(150, 150), mobility=MobilityConfig("random-waypoint"))
    (a, wa), (b, wb) = (run_simulation(cfg, log=True, keep_world=True) for _ in range(2))
    assert wa.log.to_text() == wb.log.to_text()
    assert np.array_equal(a.reader_energy, b.reader_energy)
    assert (a.successful_reads, a.elapsed) == (b.successful_reads, b.elapsed)
    c = run_simulation(cfg.with_(seed=12))
    assert (c.successful_reads, c.network_energy) != (a.successful_reads, a.network_energy)


@pytest.mark.parametrize("name,channels", [("ierap", 4), ("nfra", 1), ("gdra", 4), ("dmrcp", 1)])
def test_clock_accounting(name, channels):
    cfg = ScenarioConfig(protocol=name, readers=40, tags=300, channels=channels, rounds=6, seed=3,
                         arena=Arena(200, 200))
    rep, world = run_simulation(cfg, log=True, keep_world=True)
    assert sum(r.duration for r in rep.per_round) == pytest.approx(rep.elapsed, rel=1e-12)
    for prev, nxt in zip(rep.per_round, rep.per_round[1:]):
        assert nxt.start == pytest.approx(prev.start + prev.duration, abs=1e-12)
    for r in rep.per_round:
        assert r.duration >= world.timing.bare_round - 1e-12
    times = [e.time for e in world.log]
    assert times == sorted(times)
    assert times[-1] <= rep.elapsed + 1e-12


def test_reads_finish_before_round_ends():
    cfg = ScenarioConfig(protocol="nfra", readers=10, tags=100, channels=1, rounds=4, seed=2,
                         arena=Arena(60, 60))
    rep, world = run_simulation(cfg, log=True, keep_world=True)
    ends = {}
    for r in rep.per_round:
        ends[round(r.start, 9)] = r.start + r.duration
    starts = sorted(ends)
    for e in world.log:
        if e.kind == "read-end":
            i = np.searchsorted(starts, e.time, side="right") - 1
            assert e.time <= ends[starts[i]] + 1e-12


class _StubbornHold(Nfra):
    def resolve(self, groups, world, p, draws):
        return {b.reader_id: HOLD for g in groups for b in g}

    def on_slot(self, reader, msg):
        if reader.K == msg.slot:
            return super().on_slot(reader, msg)
        return None


def test_protocol_contract_faults_are_raised():
    cfg = ScenarioConfig(protocol="nfra", readers=1, tags=1, channels=1, rounds=1, seed=1)
    world = World(cfg, protocol=_StubbornHold(1, 8))
    world.timing = world.timing.__class__(slots=8)
    with pytest.raises(SimulationFault):
        run_round(world)


class _ReadAnyway(IeRap):
    def resolve(self, groups, world, p, draws):
        return {b.reader_id: READ for g in groups for b in g}


def test_reading_known_tags_is_a_fault_for_ierap():
    cfg = ScenarioConfig(protocol="ierap", readers=1, tags=1, channels=1, rounds=1)
    world = World(cfg, protocol=_ReadAnyway(1, 128), reader_positions=[(5, 5)], tag_positions=[(5, 5)])
    world.readers[0].known_tags = {0}
    with pytest.raises(SimulationFault):
        run_round(world)


def test_mobility_moves_readers_between_rounds():
    cfg = ScenarioConfig(protocol="gdra", readers=20, tags=10, rounds=1, seed=4,
                         mobility=MobilityConfig("random-waypoint"))
    world = World(cfg)
    before = world.positions.copy()
    run_round(world)
    assert not np.array_equal(before, world.positions)
    static = World(cfg.with_(mobility=MobilityConfig("static")))
    before = static.positions.copy()
    run_round(static)
    assert np.array_equal(before, static.positions)


def test_ierap_never_reads_redundantly():
    cfg = ScenarioConfig(protocol="ierap", readers=60, tags=500, channels=4, rounds=20, seed=9,
                         arena=Arena(150, 150), mobility=MobilityConfig("random-waypoint"))
    rep = run_simulation(cfg)
    assert rep.redundant_reads == 0 and rep.successful_reads > 0


def test_hundred_readers_full_run_is_fast():
    cfg = ScenarioConfig(protocol="ierap", readers=100, tags=1000, channels=4, rounds=128, seed=1)
    t0 = time.perf_counter()
    run_simulation(cfg)
    assert time.perf_counter() - t0 < 10.0
