import dataclasses
import os
import threading

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from hardyz import store
from hardyz.errors import CorruptionError, IncompatibilityError, PreconditionError, RangeError
from hardyz.moments import Checkpoint, build_grid, cumulative_moment
from hardyz.special import DEFAULT_CONFIG
from hardyz.store import (GRID_HEADER_SIZE, CheckpointFile, GridCache, checkpoint_file,
                          extend_grid, load_checkpoints, load_grid, save_checkpoints, save_grid)


@pytest.fixture(scope="module")
def grid100():
    return build_grid(1.0, 100.0, 0.05)


@pytest.fixture(scope="module")
def saved(tmp_path_factory, grid100):
    path = tmp_path_factory.mktemp("grid") / "g.hzg"
    save_grid(grid100, path)
    return path.read_bytes()


def _same(a, b):
    return (a.t_min == b.t_min and a.t_max == b.t_max and a.step == b.step
            and a.cfg_fingerprint == b.cfg_fingerprint and np.array_equal(a.values, b.values))


def test_round_trip(tmp_path, grid100):
    path = tmp_path / "g.hzg"
    save_grid(grid100, path)
    assert _same(load_grid(path), grid100)
    raw = path.read_bytes()
    assert raw[:8] == b"HZGRID01" and len(raw) == GRID_HEADER_SIZE + 8 * grid100.n
    assert np.array_equal(np.frombuffer(raw[GRID_HEADER_SIZE:], "<f8"), grid100.values)


def test_extend_is_append_only(tmp_path, grid100):
    path = tmp_path / "g.hzg"
    save_grid(grid100, path)
    g = extend_grid(path, 200.0)
    loaded = load_grid(path)
    assert _same(g, loaded) and loaded.t_max == 200.0
    assert np.array_equal(loaded.values[:grid100.n], grid100.values)
    assert _same(loaded, build_grid(1.0, 200.0, 0.05))
    assert extend_grid(path, 150.0).t_max == 200.0


def test_extend_incompatible(tmp_path, grid100):
    path = tmp_path / "g.hzg"
    save_grid(grid100, path)
    other = dataclasses.replace(DEFAULT_CONFIG, rs_correction_terms=3)
    with pytest.raises(IncompatibilityError):
        extend_grid(path, 200.0, other)
    with pytest.raises(IncompatibilityError):
        extend_grid(path, 200.0, step=0.025)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.data())
def test_flipped_payload_byte_detected(tmp_path, saved, data):
    off = data.draw(st.integers(GRID_HEADER_SIZE, len(saved) - 1))
    bit = data.draw(st.integers(0, 7))
    buf = bytearray(saved)
    buf[off] ^= 1 << bit
    path = tmp_path / "bad.hzg"
    path.write_bytes(bytes(buf))
    with pytest.raises(CorruptionError, match=rf"bytes \[{GRID_HEADER_SIZE}, {len(saved)}\)"):
        load_grid(path)


def test_header_damage_detected(tmp_path, saved):
    path = tmp_path / "bad.hzg"
    path.write_bytes(b"HZGRID02" + saved[8:])
    with pytest.raises(CorruptionError, match="magic"):
        load_grid(path)
    path.write_bytes(saved[:40])
    with pytest.raises(CorruptionError):
        load_grid(path)


def test_truncated_file_fails_loudly(tmp_path, saved):
    path = tmp_path / "cut.hzg"
    for cut in (len(saved) - 8, len(saved) - 3, GRID_HEADER_SIZE):
        path.write_bytes(saved[:cut])
        with pytest.raises(CorruptionError):
            load_grid(path)


def test_crash_mid_extend_keeps_old_file(tmp_path, grid100, monkeypatch):
    path = tmp_path / "g.hzg"
    save_grid(grid100, path)
    real_fsync = os.fsync

    def crash(fd):
        real_fsync(fd)
        raise OSError("simulated power loss")

    monkeypatch.setattr(store.os, "fsync", crash)
    with pytest.raises(OSError):
        extend_grid(path, 200.0)
    monkeypatch.undo()
    assert _same(load_grid(path), grid100)
    assert [p.name for p in tmp_path.iterdir()] == ["g.hzg"]


def test_checkpoint_round_trip_and_resume(tmp_path, grid10k, data10k):
    ck = checkpoint_file(data10k.I1, grid10k, extra=(1000.0,))
    path = tmp_path / "i1.hzc"
    save_checkpoints(ck, path)
    back = load_checkpoints(path)
    assert back == ck
    cp = back.at(1000.0)
    assert cp.T == 1000.0
    resumed = cumulative_moment(1, grid10k, resume=cp)
    i = int(np.searchsorted(data10k.I1.grid_T, 1000.0))
    assert np.array_equal(resumed.values, data10k.I1.values[i:])
    assert resumed(1e4) == data10k.I1(1e4)
    with pytest.raises(RangeError):
        back.at(1.5)


def test_checkpoint_corruption(tmp_path, grid10k, data10k):
    path = tmp_path / "i1.hzc"
    save_checkpoints(checkpoint_file(data10k.I1, grid10k), path)
    raw = bytearray(path.read_bytes())
    raw[100] ^= 0x10
    path.write_bytes(bytes(raw))
    with pytest.raises(CorruptionError, match="checksum"):
        load_checkpoints(path)
    path.write_bytes(bytes(raw[:-5]))
    with pytest.raises(CorruptionError):
        load_checkpoints(path)


def test_checkpoint_ladder_must_increase():
    e = (Checkpoint(4.0, 1.0, 0.0), Checkpoint(2.0, 2.0, 0.0))
    with pytest.raises(PreconditionError):
        CheckpointFile("I_k", 1, 1.0, 0.05, "00" * 32, e)


def test_grid_cache_obtain(tmp_path):
    cache = GridCache(tmp_path)
    a = cache.obtain(60.0, 0.05)
    files = sorted(p.name for p in tmp_path.glob("*.hzg"))
    assert len(files) == 1
    b = cache.obtain(40.0, 0.05)
    assert _same(a, b)
    c = cache.obtain(90.0, 0.05)
    assert c.t_max == 90.0 and np.array_equal(c.values[:a.n], a.values)
    assert _same(c, build_grid(1.0, 90.0, 0.05))


def test_grid_cache_lock_serializes(tmp_path):
    cache = GridCache(tmp_path)
    order = []

    def hold():
        with cache.lock():
            order.append("a-in")
            ev.set()
            threading.Event().wait(0.2)
            order.append("a-out")

    ev = threading.Event()
    th = threading.Thread(target=hold)
    th.start()
    ev.wait()
    with cache.lock():
        order.append("b-in")
    th.join()
    assert order == ["a-in", "a-out", "b-in"]
