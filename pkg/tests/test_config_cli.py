import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dresim.cli import CSV_COLUMNS, emit_csv, main
from dresim.config import (PROTOCOLS, SINGLE_CHANNEL_ONLY, ConfigError, ScenarioConfig, parse_config,
                           preset, render_config)
from dresim.metrics import MetricsReport

BASIC = """\
# small run
protocol = ierap
readers = 10
tags = 50
channels = 4
rounds = 3
seed = 7
side_x = 60.0
side_y = 60.0
"""


def test_parse_basic_file():
    cfg = parse_config(BASIC)
    assert (cfg.protocol, cfg.readers, cfg.tags, cfg.channels, cfg.rounds, cfg.seed) == ("ierap", 10, 50, 4, 3, 7)
    assert cfg.arena.side_x == 60.0
    assert cfg.slots == 128 and cfg.isp


configs = st.builds(
    lambda proto, n, tags, ch, rounds, seed, isp, scope, profile: ScenarioConfig(
        protocol=proto, readers=n, tags=tags, channels=1 if proto in SINGLE_CHANNEL_ONLY else ch,
        rounds=rounds, seed=seed, isp=isp, waiting_scope=scope, timing_profile=profile),
    st.sampled_from(PROTOCOLS), st.integers(0, 500), st.integers(0, 5000), st.integers(1, 8),
    st.integers(0, 1000), st.integers(0, 2 ** 64 - 1), st.booleans(),
    st.sampled_from(["round", "global"]), st.sampled_from(["table1", "uniform"]))


@settings(max_examples=60)
@given(configs)
def test_render_parse_round_trip(cfg):
    assert parse_config(render_config(cfg)) == cfg


@pytest.mark.parametrize("text,line", [
    ("readers = 10\n", None),
    ("protocol = ierap\nchannels = 0\n", 2),
    ("protocol = ierap\nfoo = 1\n", 2),
    ("protocol = ierap\nreaders = 3\nreaders = 4\n", 3),
    ("protocol = nfra\nchannels = 4\n", None),  # cross-field: no single line
    ("protocol = ierap\nreaders = many\n", 2),
    ("protocol = ierap\njust words\n", 2),
])
def test_config_errors(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line


def test_preset_contents():
    s1 = preset("scenario1", 100)
    assert [c.protocol for c in s1] == ["ierap", "gdra", "frca1", "frca2"]
    assert all(c.channels == 4 and c.mobility.model == "static" for c in s1)
    s2 = preset("scenario2", 400)
    assert all(c.channels == 1 for c in s2)
    assert {"nfra", "dmrcp"} <= {c.protocol for c in s2}
    s3 = preset("scenario3", 200, seed=4)
    assert all(c.mobility.model == "random-waypoint" and c.seed == 4 for c in s3)
    with pytest.raises(ConfigError):
        preset("scenario1", 150)
    with pytest.raises(ConfigError):
        preset("scenario9", 100)


def fake_report(protocol, readers, seed):
    r = MetricsReport(protocol, readers, 4, seed, 128, elapsed=100.0, successful_reads=10)
    return r


def test_emit_csv_counts_rows():
    reports = [fake_report(p, n, s) for n in (400, 100, 300, 200)
               for p in ("ierap", "gdra", "frca1", "frca2", "nfra") for s in range(20, 0, -1)]
    lines = emit_csv(reports).splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 401
    keys = [tuple(l.split(",")[:4]) for l in lines[1:]]
    assert keys == sorted(keys, key=lambda k: (k[0], int(k[1]), int(k[2]), int(k[3])))
    with pytest.raises(ValueError):
        emit_csv([])


def test_cli_dist(capsys):
    assert main(["dist", "--k", "4", "--m", "512"]) == 0
    out = capsys.readouterr().out
    assert "0.875214" in out
    assert main(["dist", "--k", "0", "--m", "4"]) == 1


def test_cli_bad_arguments_exit_one():
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--preset", "nope"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 1


def test_cli_config_errors_exit_two(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "missing.cfg")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("protocol = ierap\nchannels = 0\n")
    assert main(["simulate", "--config", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_cli_simulate_and_replay(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(BASIC)
    out = tmp_path / "out.csv"
    assert main(["simulate", "--config", str(cfg), "--seed", "9", "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 2 and lines[1].startswith("ierap,10,4,9,3,")
    ev1, ev2 = tmp_path / "a.log", tmp_path / "b.log"
    assert main(["replay", "--config", str(cfg), "--seed", "9", "--events", str(ev1)]) == 0
    assert main(["replay", "--config", str(cfg), "--seed", "9", "--events", str(ev2)]) == 0
    assert ev1.read_bytes() == ev2.read_bytes()
    assert "msgA" in ev1.read_text()


def test_cli_sweep_row_count(tmp_path, monkeypatch):
    monkeypatch.setenv("DRE_SIM_THREADS", "1")
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--preset", "scenario1", "--readers", "100", "--seeds", "2",
                 "--rounds", "2", "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 9
    assert {l.split(",")[3] for l in lines[1:]} == {"1", "2"}
    first = out.read_text()
    assert main(["sweep", "--preset", "scenario1", "--readers", "100", "--seeds", "2",
                 "--rounds", "2", "--output", str(out)]) == 0
    assert out.read_text() == first
