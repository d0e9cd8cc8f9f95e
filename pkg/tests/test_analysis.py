"""Spectrum math and statistics accumulator tests."""

import io
import math
from collections import Counter

import numpy as np
import pytest

from axcsi import analysis, wire
from axcsi.capture import CsiRecord


def frame_with_iq(i_vals, q_vals, **kwargs):
    n = len(i_vals)
    defaults = dict(bw=0, csi_cnt=n)
    defaults.update(kwargs)
    return wire.CsiDataFrame.build(csi_i=i_vals, csi_q=q_vals, **defaults)


def record_for(frame, received_at_us=0, source=("127.0.0.1", 8024)):
    return CsiRecord(received_at_us, source, frame, wire.encode_csi_frame(frame))


# --- to_spectrum ------------------------------------------------------------

def test_three_four_five_identity():
    frame = frame_with_iq([3] * 64, [4] * 64)
    view = analysis.to_spectrum(frame)
    assert view.subcarrier_count == 64
    assert np.all(view.magnitude == 5.0)
    assert np.allclose(view.phase_rad, math.atan2(4, 3))
    assert abs(view.phase_rad[0] - 0.9273) < 1e-4


def test_zero_sample_convention():
    frame = frame_with_iq([0] * 64, [0] * 64)
    view = analysis.to_spectrum(frame)
    assert np.all(view.magnitude == 0.0)
    assert np.all(view.phase_rad == 0.0)


def test_trailing_entries_ignored():
    frame = wire.CsiDataFrame.build(bw=0, csi_cnt=64,
                                    csi_i=[7] * 64, csi_q=[0] * 64)
    frame.csi_i[100] = 999  # beyond csi_cnt; must not appear in the view
    view = analysis.to_spectrum(frame)
    assert view.subcarrier_count == 64
    assert len(view.magnitude) == 64


def test_spectrum_rejects_bad_count():
    frame = frame_with_iq([1] * 64, [1] * 64)
    frame.csi_cnt = 0
    with pytest.raises(ValueError):
        analysis.to_spectrum(frame)


def test_magnitude_invariant_under_global_rotation():
    rng = np.random.default_rng(31)
    base = rng.uniform(-20000, 20000, 64) + 1j * rng.uniform(-20000, 20000, 64)
    view0 = analysis.to_spectrum(frame_with_iq(
        np.rint(base.real).astype(int), np.rint(base.imag).astype(int)))
    rotated = base * np.exp(1j * 0.7)
    view1 = analysis.to_spectrum(frame_with_iq(
        np.rint(rotated.real).astype(int), np.rint(rotated.imag).astype(int)))
    # +-1.5 LSB tolerance on the 16-bit-quantized samples.
    assert np.max(np.abs(view0.magnitude - view1.magnitude)) <= 1.5 * math.sqrt(2)


def test_magnitude_db_floor():
    db = analysis.magnitude_db([0.0, 1.0, 10.0, 1e-9])
    assert db[0] == -120.0
    assert db[1] == 0.0
    assert abs(db[2] - 20.0) < 1e-12
    assert db[3] == -120.0


def test_unwrap_phase():
    phase = np.array([3.0, -3.0, 3.0])
    unwrapped = analysis.unwrap_phase(phase)
    assert np.all(np.abs(np.diff(unwrapped)) < np.pi)


def test_spectrum_csv_schema():
    frame = frame_with_iq([3, 0], [4, 0], csi_cnt=2)
    out = io.StringIO()
    analysis.spectrum_to_csv(analysis.to_spectrum(frame), out)
    lines = out.getvalue().strip().splitlines()
    assert lines[0] == "subcarrier,i,q,magnitude,phase"
    assert lines[1].startswith("0,3,4,5.0,")
    assert len(lines) == 3


# --- decimation --------------------------------------------------------------

def test_decimate_small_passthrough():
    assert analysis.decimate_indices(10, 256) == list(range(10))


def test_decimate_endpoints_and_stride():
    idx = analysis.decimate_indices(512, 256)
    assert idx[0] == 0 and idx[-1] == 511
    assert len(idx) <= 256
    strides = set(np.diff(idx[:-1]))
    assert len(strides) == 1  # uniform stride up to the final endpoint


# --- stats -------------------------------------------------------------------

def test_counters_match_brute_force_recount():
    rng = np.random.default_rng(32)
    acc = analysis.StatsAccumulator()
    records = []
    for k in range(500):
        bw = int(rng.integers(0, 5))
        frame = wire.CsiDataFrame.build(
            bw=bw, csi_cnt=wire.Bandwidth(bw).max_subcarriers,
            csi_i=[], csi_q=[], mcs=int(rng.integers(0, 12)),
            rssi=rng.integers(-90, -20, 16).astype(np.int32))
        records.append(record_for(frame, received_at_us=k * 1000))
    for rec in records:
        analysis.accumulate(acc, rec)
    snap = acc.snapshot()

    assert snap.total_frames == 500
    assert snap.frames_by_bandwidth == Counter(r.frame.bw for r in records)
    assert snap.frames_by_mcs == Counter(r.frame.mcs for r in records)
    assert sum(snap.frames_by_bandwidth.values()) == snap.total_frames
    assert sum(snap.frames_by_mcs.values()) == snap.total_frames
    for chain in range(16):
        vals = [int(r.frame.rssi[chain]) for r in records if r.frame.rssi[chain]]
        expect = sum(vals) / len(vals) if vals else 0.0
        assert abs(snap.avg_rssi_per_chain[chain] - expect) < 1e-9


def test_rssi_mean_example():
    acc = analysis.StatsAccumulator()
    for value, t in ((-40, 0), (-44, 1000)):
        rssi = np.zeros(16, np.int32)
        rssi[0] = value
        frame = wire.CsiDataFrame.build(bw=3, csi_cnt=512, csi_i=[], csi_q=[],
                                        mcs=9, rssi=rssi)
        acc.accumulate(record_for(frame, received_at_us=t))
    snap = acc.snapshot()
    assert snap.avg_rssi_per_chain[0] == -42.0
    assert snap.avg_rssi_per_chain[1] == 0.0
    assert snap.frames_by_bandwidth == {3: 2}
    assert snap.frames_by_mcs == {9: 2}


def test_empty_stream_snapshot():
    snap = analysis.StatsAccumulator().snapshot()
    assert snap.total_frames == 0
    assert snap.frames_by_bandwidth == {}
    assert snap.frames_by_mcs == {}
    assert snap.avg_rssi_per_chain == [0.0] * 16
    assert snap.frames_per_second == 0.0
    assert snap.decode_errors == 0


def test_permutation_independence():
    rng = np.random.default_rng(33)
    records = []
    for k in range(200):
        rssi = rng.integers(-90, 0, 16).astype(np.int32)
        rssi[rng.integers(0, 16)] = 0
        frame = wire.CsiDataFrame.build(
            bw=int(rng.integers(0, 5)), csi_cnt=64, csi_i=[], csi_q=[],
            mcs=int(rng.integers(0, 12)), rssi=rssi)
        records.append(record_for(frame, received_at_us=int(rng.integers(0, 10**7))))

    snaps = []
    for _ in range(3):
        order = rng.permutation(len(records))
        acc = analysis.StatsAccumulator()
        for idx in order:
            acc.accumulate(records[idx])
        snaps.append(acc.snapshot())

    first = snaps[0]
    for snap in snaps[1:]:
        assert snap.total_frames == first.total_frames
        assert snap.frames_by_bandwidth == first.frames_by_bandwidth
        assert snap.frames_by_mcs == first.frames_by_mcs
        assert snap.frames_per_second == first.frames_per_second
        for a, b in zip(snap.avg_rssi_per_chain, first.avg_rssi_per_chain):
            assert abs(a - b) < 1e-9


def test_fps_sliding_window():
    acc = analysis.StatsAccumulator()
    frame = wire.CsiDataFrame.build(bw=0, csi_cnt=64, csi_i=[], csi_q=[])
    # 100 frames spread over 2 s, then one frame 10 s later.
    for k in range(100):
        acc.accumulate(record_for(frame, received_at_us=k * 20_000))
    assert acc.snapshot().frames_per_second == 100 / 5.0
    acc.accumulate(record_for(frame, received_at_us=12_000_000))
    assert acc.snapshot().frames_per_second == 1 / 5.0


def test_stats_json_schema():
    acc = analysis.StatsAccumulator()
    frame = wire.CsiDataFrame.build(bw=1, csi_cnt=128, csi_i=[], csi_q=[], mcs=7)
    acc.accumulate(record_for(frame))
    acc.note_decode_error()
    data = acc.snapshot().to_dict()
    assert data["total_frames"] == 1
    assert data["frames_by_bandwidth"] == {"1": 1}
    assert data["frames_by_mcs"] == {"7": 1}
    assert len(data["avg_rssi_per_chain"]) == 16
    assert data["decode_errors"] == 1
