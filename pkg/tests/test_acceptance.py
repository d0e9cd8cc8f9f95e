"""Acceptance suite: protocol exactness, timing and end-to-end behavior.

Each test covers one release criterion and prints a [PASS]/[FAIL] line
(visible with `pytest -s tests/test_acceptance.py`).
"""

import socket
import threading
import time
from collections import Counter
from contextlib import contextmanager

import numpy as np
import pytest

from axcsi import analysis, capture, wire
from axcsi.collector import Collector, CollectorConfig
from axcsi.controller import Controller, ControllerConfig, SessionPlan
from axcsi.emulator import (
    ApPhase,
    ApState,
    ChannelModel,
    Emulator,
    EmulatorConfig,
    FlatChannel,
    MultipathChannel,
    Station,
    generate_frame,
    handle_command,
    reboot,
)

MAC = "0a:19:c6:51:00:12"


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


def random_command_frame(rng):
    kind = rng.integers(1, 7)
    if kind == 1:
        payload = wire.ReportEnable(int(rng.integers(0, 2)))
    elif kind == 2:
        payload = wire.StaFilter(bytes(rng.integers(0, 256, 6, dtype=np.uint8)))
    elif kind == 3:
        payload = wire.CsiConfig(int(rng.integers(0, 256)))
    elif kind == 4:
        payload = wire.ReportConfig(wire.format_ipv4(
            bytes(rng.integers(0, 256, 4, dtype=np.uint8))))
    elif kind == 5:
        payload = wire.BandConfig(wire.Band(int(rng.integers(0, 2))))
    else:
        payload = wire.CheckAvailability()
    return wire.CommandFrame.wrap(payload)


def random_csi_frame(rng):
    bw = int(rng.integers(0, 5))
    csi_cnt = int(rng.integers(1, wire.Bandwidth(bw).max_subcarriers + 1))
    i = np.zeros(512, np.int32)
    q = np.zeros(512, np.int32)
    i[:csi_cnt] = rng.integers(-(2**31), 2**31, csi_cnt, dtype=np.int64)
    q[:csi_cnt] = rng.integers(-(2**31), 2**31, csi_cnt, dtype=np.int64)
    return wire.CsiDataFrame.build(
        bw=bw, csi_cnt=csi_cnt, csi_i=i[:csi_cnt], csi_q=q[:csi_cnt],
        magic=(0xCAFE << 16) | int(rng.integers(0, 1 << 16)),
        vendor=int(rng.integers(0, 256)),
        chip_id=int(rng.integers(0, 2**32)),
        timestamp_us=int(rng.integers(0, 2**64, dtype=np.uint64)),
        resv=int(rng.integers(0, 2**32)),
        phy_mode=int(rng.integers(0, 2**32)),
        resv_1=int(rng.integers(0, 256)),
        resv_2=int(rng.integers(0, 2**16)),
        peer_addr=bytes(rng.integers(0, 256, 6, dtype=np.uint8)),
        rssi=rng.integers(-120, 0, 16).astype(np.int32),
        resv_3=rng.integers(-(2**31), 2**31, 16, dtype=np.int64).astype(np.int32),
        agc_gain=rng.integers(-128, 128, 16).astype(np.int8),
        mcs=int(rng.integers(-(2**15), 2**15)),
        gi_type=int(rng.integers(-128, 128)),
        coding=int(rng.integers(-128, 128)),
        stbc=int(rng.integers(-128, 128)),
        resv_4=int(rng.integers(-128, 128)),
        dcm=int(rng.integers(-128, 128)),
        resv_5=int(rng.integers(-128, 128)),
        resv_6=int(rng.integers(0, 2**64, dtype=np.uint64)))


def test_codec_round_trip_1000_each():
    with criterion("codec round-trip: 1000 commands + 1000 CSI frames, "
                   "exact, < 5 s"):
        rng = np.random.default_rng(2025)
        t0 = time.perf_counter()
        for _ in range(1000):
            frame = random_command_frame(rng)
            data = wire.encode_command(frame)
            assert wire.decode_command(data) == frame
            assert wire.encode_command(wire.decode_command(data)) == data
        for _ in range(1000):
            frame = random_csi_frame(rng)
            data = wire.encode_csi_frame(frame)
            assert wire.decode_csi_frame(data) == frame
            assert wire.encode_csi_frame(wire.decode_csi_frame(data)) == data
        elapsed = time.perf_counter() - t0
        assert elapsed < 5.0, f"round-trips took {elapsed:.2f} s"


def test_golden_vectors():
    with criterion("golden vectors: band command bytes, sizes, frame type, "
                   "4296-byte record"):
        band5 = wire.encode_command(wire.CommandFrame.wrap(
            wire.BandConfig(wire.Band.GHZ_5)))
        assert band5 == bytes.fromhex("2520feca000000000501")
        check = wire.encode_command(wire.CommandFrame.wrap(wire.CheckAvailability()))
        assert len(check) == 9
        assert wire.frame_type_from_subfields(0b10, 0b1000) == 0x22
        frame = wire.CsiDataFrame.build(bw=0, csi_cnt=64, csi_i=[], csi_q=[])
        assert len(wire.encode_csi_frame(frame)) == 4296


def test_ordering_conformance():
    with criterion("ordering: [5,3,1,2,4] sequence, every gap >= 500 ms, "
                   "strict rejects, reboot unlocks"):
        # Capture stub standing in for the AP.
        stub = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        stub.bind(("127.0.0.1", 0))
        stub.settimeout(5.0)
        config = ControllerConfig(ap_address="127.0.0.1",
                                  command_port=stub.getsockname()[1])
        ctl = Controller(config)
        plan = SessionPlan(band=wire.Band.GHZ_5, report_target_ip="192.168.1.1",
                           sta_filters=("01:02:03:04:05:06",))
        arrivals = []

        def run():
            ctl.start_session(plan)

        worker = threading.Thread(target=run)
        worker.start()
        for _ in range(5):
            data, _ = stub.recvfrom(2048)
            arrivals.append((time.monotonic(), data))
        worker.join()
        stub.close()
        ctl.close()

        types = [wire.decode_command(d).cmd_type for _, d in arrivals]
        assert types == [5, 3, 1, 2, 4]
        gaps = [b - a for (a, _), (b, _) in zip(arrivals, arrivals[1:])]
        assert all(gap >= 0.5 for gap in gaps), f"gap below floor: {gaps}"
        assert all(gap < 1.0 for gap in gaps), f"pathological pacing: {gaps}"

        # Strict-mode emulator behavior.
        state, _, events = handle_command(ApState(),
                                          wire.encode_command(
                                              wire.CommandFrame.wrap(wire.ReportEnable(1))),
                                          strict=True)
        assert not state.reporting
        assert events[0]["reason"] == "out_of_order"

        state = ApState()
        state, _, _ = handle_command(state, wire.encode_command(
            wire.CommandFrame.wrap(wire.BandConfig(wire.Band.GHZ_5))))
        locked, _, events = handle_command(state, wire.encode_command(
            wire.CommandFrame.wrap(wire.BandConfig(wire.Band.GHZ_2_4))))
        assert locked.locked_band is wire.Band.GHZ_5
        assert events[0]["reason"] == "band_locked"

        fresh = reboot(locked)
        after, _, events = handle_command(fresh, wire.encode_command(
            wire.CommandFrame.wrap(wire.BandConfig(wire.Band.GHZ_2_4))))
        assert after.locked_band is wire.Band.GHZ_2_4
        assert events[0]["event"] == "state"


def test_end_to_end_loopback():
    with criterion("end-to-end loopback: 50 Hz x 2 s -> 100 +- 2 frames, "
                   "0 decode errors, exact metadata, recounted stats, < 10 s"):
        t_start = time.perf_counter()
        collector = Collector(CollectorConfig(bind_address="127.0.0.1",
                                              listen_port=0))
        collector.start()
        listen_port = collector.address[1]
        station = Station(MAC, bandwidth=2, mcs=9, rssi=(-40, -42, -45))
        emu = Emulator(EmulatorConfig(
            bind_address="127.0.0.1", command_port=0, report_source_port=0,
            report_port=listen_port, stations=(station,),
            frame_rate_hz=50.0, channel=ChannelModel(FlatChannel(1200.0)),
            rng_seed=7))
        emu.start()
        ctl = Controller(ControllerConfig(ap_address="127.0.0.1",
                                          command_port=emu.command_address[1]))
        ctl.start_session(SessionPlan(band=wire.Band.GHZ_5,
                                      report_target_ip="127.0.0.1"))
        window_start_us = time.time_ns() // 1000
        time.sleep(2.0)
        window_end_us = window_start_us + 2_000_000
        ctl.stop_session()
        time.sleep(0.2)
        emu.stop()
        collector.stop()
        ctl.close()

        # The AP side saw the pacing too (its recorded inter-arrivals).
        assert len(emu.command_intervals) == 4  # [5,3,1,4] + stop
        assert all(gap >= 0.5 for gap in emu.command_intervals)

        records = collector.window()
        in_window = [r for r in records
                     if window_start_us <= r.received_at_us < window_end_us]
        assert abs(len(in_window) - 100) <= 2, f"{len(in_window)} frames in 2 s"

        snap = collector.stats_snapshot()
        assert snap.decode_errors == 0
        assert all(r.frame.peer_addr == wire.parse_mac(MAC) for r in records)
        assert all(r.frame.bw == 2 for r in records)
        assert all(r.frame.mcs == 9 for r in records)
        assert all(r.frame.vendor == 2 and r.frame.chip_id == 1 for r in records)

        # Independent brute-force recount over the retained record list.
        assert snap.total_frames == len(records)
        assert snap.frames_by_bandwidth == Counter(r.frame.bw for r in records)
        assert snap.frames_by_mcs == Counter(r.frame.mcs for r in records)

        elapsed = time.perf_counter() - t_start
        assert elapsed < 10.0, f"loopback run took {elapsed:.2f} s"


def test_channel_model_oracle():
    with criterion("channel model: single-tap phase slope vs DFT oracle, "
                   "flat gain exact after quantization"):
        delay, n, amp = 4, 64, 10000.0
        cfg = EmulatorConfig(
            stations=(Station(MAC, bandwidth=0),),
            channel=ChannelModel(MultipathChannel(((delay, amp),))),
            rng_seed=0)
        frame = generate_frame(cfg, ApState(), cfg.stations[0], now_us=0)
        assert frame.csi_cnt == n
        phase = np.arctan2(frame.csi_q[:n].astype(float),
                           frame.csi_i[:n].astype(float))

        taps = np.zeros(n, np.complex128)
        taps[delay] = amp
        oracle = np.angle(np.fft.fft(taps))

        lsb_angle = 1.0 / amp  # one sample LSB at the tap radius
        expected_inc = -2 * np.pi * delay / n
        incs = np.angle(np.exp(1j * np.diff(phase)))
        assert np.all(np.abs(incs - expected_inc) <= 2 * lsb_angle)
        err = np.angle(np.exp(1j * (phase - oracle)))
        assert np.max(np.abs(err)) <= 2 * lsb_angle

        flat_cfg = EmulatorConfig(
            stations=(Station(MAC, bandwidth=3),),
            channel=ChannelModel(FlatChannel(1000.0)), rng_seed=0)
        flat = generate_frame(flat_cfg, ApState(), flat_cfg.stations[0], now_us=0)
        mags = np.hypot(flat.csi_i[:512].astype(float),
                        flat.csi_q[:512].astype(float))
        assert np.all(mags == 1000.0)


def test_capture_persistence_and_replay(tmp_path):
    with criterion("capture persistence: byte-identical read-back, replay "
                   "reproduces histograms"):
        cfg = EmulatorConfig(
            stations=(Station(MAC, bandwidth=1, mcs=5),
                      Station("02:99:88:77:66:55", bandwidth=3, mcs=11)),
            channel=ChannelModel(FlatChannel(700.0), noise_sigma=2.5),
            rng_seed=11)
        records = []
        base_us = 1_700_000_000_000_000
        for tick in range(30):
            for idx, station in enumerate(cfg.stations):
                frame = generate_frame(cfg, ApState(), station,
                                       now_us=tick * 20_000, tick=tick,
                                       station_index=idx)
                raw = wire.encode_csi_frame(frame)
                records.append(capture.CsiRecord(
                    base_us + tick * 20_000 + idx * 3_000,
                    ("192.168.5.1", 8024), frame, raw))
        path = tmp_path / "acceptance.bin"
        capture.write_capture(path, records)

        back = list(capture.read_capture(path))
        assert [r.raw for r in back] == [r.raw for r in records]

        original = analysis.StatsAccumulator()
        for rec in records:
            original.accumulate(rec)

        collector = Collector(CollectorConfig(bind_address="127.0.0.1",
                                              listen_port=0))
        collector.start()
        sent = capture.replay_capture(path, collector.address, rate=1.0)
        assert sent == len(records)
        deadline = time.monotonic() + 2.0
        while collector.received < sent and time.monotonic() < deadline:
            time.sleep(0.01)
        collector.stop()

        replayed = collector.stats_snapshot()
        want = original.snapshot()
        assert replayed.total_frames == want.total_frames
        assert replayed.frames_by_mcs == want.frames_by_mcs
        assert replayed.frames_by_bandwidth == want.frames_by_bandwidth


def test_robustness_fuzz_100k():
    with criterion("robustness: 100 000 fuzzed decodes raise only typed "
                   "errors, < 30 s"):
        rng = np.random.default_rng(99)
        valid_cmd = wire.encode_command(wire.CommandFrame.wrap(
            wire.StaFilter(b"\x01\x02\x03\x04\x05\x06")))
        valid_csi = wire.encode_csi_frame(
            wire.CsiDataFrame.build(bw=3, csi_cnt=512,
                                    csi_i=rng.integers(-100, 100, 512),
                                    csi_q=rng.integers(-100, 100, 512)))
        t0 = time.perf_counter()
        checked = 0

        def try_decode(decoder, blob):
            nonlocal checked
            try:
                decoder(blob)
            except wire.DecodeError:
                pass
            checked += 1

        # Random short blobs against the command decoder.
        for _ in range(30000):
            blob = rng.integers(0, 256, int(rng.integers(0, 32)),
                                dtype=np.uint8).tobytes()
            try_decode(wire.decode_command, blob)
        # Valid commands truncated and extended at every boundary.
        for _ in range(2000):
            for cut in range(len(valid_cmd) + 1):
                try_decode(wire.decode_command, valid_cmd[:cut])
        checked_cmds = 30000 + 2000 * (len(valid_cmd) + 1)
        # Random and mutated CSI-sized blobs.
        for _ in range(20000):
            blob = bytearray(valid_csi)
            for _ in range(4):
                blob[int(rng.integers(0, 4296))] = int(rng.integers(0, 256))
            try_decode(wire.decode_csi_frame, bytes(blob))
        for _ in range(10000):
            length = int(rng.integers(0, 5000))
            blob = rng.integers(0, 256, length, dtype=np.uint8).tobytes()
            try_decode(wire.decode_csi_frame, blob)
        # CSI records truncated at random boundaries.
        for _ in range(100000 - checked_cmds - 30000):
            cut = int(rng.integers(0, 4296))
            try_decode(wire.decode_csi_frame, valid_csi[:cut])

        elapsed = time.perf_counter() - t0
        assert checked >= 100000, f"only {checked} decodes exercised"
        assert elapsed < 30.0, f"fuzzing took {elapsed:.2f} s"
