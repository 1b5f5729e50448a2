import numpy as np
import pytest

from dresim.core import (ContractViolation, IspRecord, IspStore, Mode, MsgKind, ReaderState,
                         RoundDraws, ServerMessage, TimingParams, isp_publish, isp_sync,
                         protocol_timing)


def sealed(*records):
    store = IspStore()
    for r in records:
        isp_publish(store, r)
    store.seal()
    return store


def test_messages():
    a = ServerMessage.a(128, 4)
    assert (a.kind, a.max_slot, a.max_channel) == (MsgKind.A, 128, 4)
    assert ServerMessage.c(7).slot == 7
    assert ServerMessage.sh().kind is MsgKind.SH
    for bad in (lambda: ServerMessage.a(0, 4), lambda: ServerMessage.a(128, 0),
                lambda: ServerMessage.c(0)):
        with pytest.raises(ValueError):
            bad()


def test_timing_defaults_and_derived():
    t = TimingParams()
    assert (t.slot_duration, t.read_duration, t.beacon_duration) == (0.005, 0.46, 0.0003)
    assert (t.msg_a_duration, t.msg_c_duration, t.msg_sh_duration, t.slots) == (0.00283, 0.002, 0.001, 128)
    assert t.read_slots == 92
    assert t.bare_round == pytest.approx(0.00283 + 128 * 0.007 + 0.001, abs=1e-15)
    with pytest.raises(ValueError):
        TimingParams(beacon_duration=0.006)
    with pytest.raises(ValueError):
        TimingParams(slot_duration=0)


def test_protocol_timing_profiles():
    base = TimingParams()
    assert protocol_timing("ierap", base) == base
    g = protocol_timing("gdra", base)
    assert (g.msg_c_duration, g.msg_sh_duration) == (0.001, 0.0)
    assert protocol_timing("nfra", base).of_duration == 0.0003
    d = protocol_timing("dmrcp", base)
    assert (d.msg_a_duration, d.msg_c_duration, d.beacon_duration) == (0.0, 0.0, 0.005)
    assert protocol_timing("gdra", base, "uniform") == base


def test_isp_empty_sync_is_noop():
    r = ReaderState(0, known_tags={1})
    assert isp_sync(sealed(), r) == set()
    assert r.known_tags == {1}


def test_isp_sync_merges_tags_and_s():
    store = sealed(IspRecord(1, 0, 1), IspRecord(2, 0, 2), IspRecord(2, 3, 4))
    b = ReaderState(1)
    assert isp_sync(store, b) == {1, 2}
    assert b.known_tags == {1, 2}
    assert b.rival_s == {0: 2, 3: 4}
    a = ReaderState(0, known_tags={1, 2})
    assert isp_sync(store, a) == set()
    assert 0 not in a.rival_s


def test_isp_duplicate_pair_ignored():
    store = IspStore()
    store.publish(IspRecord(5, 1, 1))
    store.publish(IspRecord(5, 1, 2))
    store.publish(IspRecord(5, 2, 1))
    assert len(store) == 2
    assert store.tag_ids() == {5}


def test_isp_contract():
    store = IspStore()
    with pytest.raises(ContractViolation):
        isp_sync(store, ReaderState(0))
    store.seal()
    with pytest.raises(ContractViolation):
        store.publish(IspRecord(1, 0, 1))
    store.clear()
    store.publish(IspRecord(1, 0, 1))
    assert not store.sealed and len(store) == 1
    with pytest.raises(ValueError):
        IspRecord(1, 0, 0)


def test_round_draws_prefix_stable():
    small = RoundDraws(3, 2, 5)
    big = RoundDraws(3, 2, 50)
    assert np.array_equal(small.rows, big.rows[:5])
    assert [small.uniform(4) for _ in range(12)] == [big.uniform(4) for _ in range(12)]


def test_round_draws_reserve_and_spill():
    d = RoundDraws(1, 0, 2)
    d.reserve(2)
    assert d.uniform(0) == d.rows[0, 2]
    vals = [d.uniform(1) for _ in range(20)]
    assert vals[:6] == list(d.rows[1, 2:])
    assert all(0 <= v < 1 for v in vals)
    assert RoundDraws(1, 0, 2).rows.tolist() != RoundDraws(1, 1, 2).rows.tolist()


def test_reader_state_defaults():
    r = ReaderState(4)
    assert (r.S, r.mode, r.known_tags, r.pending_isp) == (0, Mode.IDLE, set(), [])
