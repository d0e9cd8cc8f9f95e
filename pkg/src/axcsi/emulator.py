"""Protocol-faithful stand-in for a ZTE AX3000 access point.

Listens for configuration commands on the command port (8021 on real
hardware), enforces the band-lock and command-ordering rules, replies
"OK" to availability checks, and while reporting is enabled streams
synthetic CSI frames from the report source port (8024) to the
configured target's report port (8023).

The radio channel is synthesized per station from a tapped-delay model:
H[k] = sum_t a_t * exp(-2j*pi*k*d_t/N) plus optional complex Gaussian
noise, then rounded and saturated to the 16-bit sample range. Frame
content is deterministic for a fixed seed and tick index, so identical
command schedules produce byte-identical streams.
"""

import json
import logging
import socket
import threading
import time
from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np

from . import _kernels, wire

log = logging.getLogger("axcsi.emulator")

CSI_REPORT_MAGIC = (wire.CSI_MAGIC_HIGH << 16) | 0x0001


@dataclass(frozen=True)
class FlatChannel:
    """Frequency-flat response: H[k] = gain for every subcarrier."""

    gain: float = 1000.0


@dataclass(frozen=True)
class MultipathChannel:
    """Tapped-delay response; taps are (delay_samples, complex amplitude)."""

    taps: tuple

    def __post_init__(self):
        taps = tuple((int(d), complex(a)) for d, a in self.taps)
        if not taps:
            raise ValueError("multipath channel needs at least one tap")
        object.__setattr__(self, "taps", taps)


@dataclass(frozen=True)
class ChannelModel:
    """Channel shape plus additive complex Gaussian noise (sigma in LSB)."""

    shape: object = FlatChannel()
    noise_sigma: float = 0.0

    def response(self, n_sub):
        if isinstance(self.shape, FlatChannel):
            return np.full(n_sub, complex(self.shape.gain), np.complex128)
        delays = np.array([d for d, _ in self.shape.taps], np.int64)
        amps = np.array([a for _, a in self.shape.taps], np.complex128)
        return _kernels.channel_response(delays, amps, n_sub, n_sub)


@dataclass(frozen=True)
class Station:
    """One synthetic STA whose PPDUs yield CSI reports."""

    mac: bytes
    bandwidth: int = wire.Bandwidth.BW160
    mcs: int = 9
    rssi: tuple = (-40, -42, -45)  # per-chain baselines; zero = chain unused
    phy_mode: int = 0
    gi_type: int = 0
    coding: int = 0
    stbc: int = 0
    dcm: int = 0

    def __post_init__(self):
        if isinstance(self.mac, str):
            object.__setattr__(self, "mac", wire.parse_mac(self.mac))
        else:
            object.__setattr__(self, "mac", bytes(self.mac))
        if len(self.mac) != 6:
            raise ValueError("station MAC must be 6 bytes")
        if not 0 <= int(self.bandwidth) <= 4:
            raise ValueError(f"bandwidth code {self.bandwidth} out of range 0..4")
        if not 1 <= len(self.rssi) <= 16:
            raise ValueError("per-chain rssi baseline needs 1..16 entries")


@dataclass(frozen=True)
class EmulatorConfig:
    bind_address: str = "0.0.0.0"
    command_port: int = 8021
    report_source_port: int = 8024
    report_port: int = 8023
    default_target_ip: str = None
    strict_ordering: bool = True
    stations: tuple = ()
    frame_rate_hz: float = 50.0
    channel: ChannelModel = ChannelModel()
    rng_seed: int = 0
    epoch_us: int = 0

    def __post_init__(self):
        if self.frame_rate_hz <= 0:
            raise ValueError("frame_rate_hz must be positive")
        object.__setattr__(self, "stations", tuple(self.stations))


class ApPhase(IntEnum):
    BOOTED = 0
    BAND_SET = 1
    CONFIGURED = 2
    ENABLED = 3


@dataclass(frozen=True)
class ApState:
    """Immutable snapshot of the emulated AP's configuration."""

    phase: ApPhase = ApPhase.BOOTED
    locked_band: wire.Band = None
    frame_type: int = None
    filter: tuple = ()
    target_ip: str = None      # explicit, from a report-config command
    fallback_ip: str = None    # latest command sender, used until then
    reporting: bool = False

    @property
    def effective_target_ip(self):
        return self.target_ip or self.fallback_ip


def reboot(state):
    """Power-cycle: clears band lock, filters and reporting."""
    return ApState()


def handle_command(state, datagram, *, strict=True, sender_ip=None):
    """Apply one command datagram to the AP state.

    Returns (new_state, reply_bytes_or_None, events) where events is a
    list of dicts describing rejections and state changes. Invalid
    datagrams never produce a reply; they only produce events.
    """
    events = []
    try:
        frame = wire.decode_command(bytes(datagram))
    except wire.BadMagic:
        return state, None, [{"event": "drop", "reason": "bad_magic"}]
    except wire.DecodeError as exc:
        return state, None, [{"event": "drop", "reason": "malformed",
                              "error": type(exc).__name__}]

    if sender_ip and sender_ip != state.fallback_ip:
        state = replace(state, fallback_ip=sender_ip)

    payload = frame.payload

    if isinstance(payload, wire.CheckAvailability):
        events.append({"event": "availability_check"})
        return state, wire.AVAILABILITY_REPLY, events

    if isinstance(payload, wire.BandConfig):
        if state.locked_band is not None and state.locked_band != payload.band:
            events.append({"event": "reject", "reason": "band_locked",
                           "locked": str(state.locked_band),
                           "requested": str(payload.band)})
            return state, None, events
        state = replace(state, locked_band=payload.band,
                        phase=max(state.phase, ApPhase.BAND_SET))
        events.append({"event": "state", "band": str(payload.band)})
        return state, None, events

    if isinstance(payload, wire.CsiConfig):
        if strict and state.phase < ApPhase.BAND_SET:
            events.append({"event": "reject", "reason": "out_of_order",
                           "command": "csi_config"})
            return state, None, events
        state = replace(state, frame_type=payload.frame_type,
                        phase=max(state.phase, ApPhase.CONFIGURED))
        events.append({"event": "state", "frame_type": payload.frame_type})
        return state, None, events

    if isinstance(payload, wire.ReportEnable):
        if strict and state.phase < ApPhase.CONFIGURED:
            events.append({"event": "reject", "reason": "out_of_order",
                           "command": "report_enable"})
            return state, None, events
        if payload.enable:
            state = replace(state, reporting=True, phase=ApPhase.ENABLED)
        else:
            state = replace(state, reporting=False)
        events.append({"event": "state", "reporting": bool(payload.enable)})
        return state, None, events

    if isinstance(payload, wire.StaFilter):
        if strict and state.phase < ApPhase.ENABLED:
            events.append({"event": "reject", "reason": "out_of_order",
                           "command": "sta_filter"})
            return state, None, events
        entries = (state.filter + (payload.mac,))[-5:]  # FIFO, at most 5
        state = replace(state, filter=entries)
        events.append({"event": "state",
                       "filter": [wire.format_mac(m) for m in entries]})
        return state, None, events

    if isinstance(payload, wire.ReportConfig):
        if strict and state.phase < ApPhase.ENABLED:
            events.append({"event": "reject", "reason": "out_of_order",
                           "command": "report_config"})
            return state, None, events
        state = replace(state, target_ip=payload.target_ip)
        events.append({"event": "state", "target_ip": payload.target_ip})
        return state, None, events

    return state, None, [{"event": "drop", "reason": "unhandled"}]


def generate_frame(config, state, station, now_us, tick=0, station_index=0):
    """Build one deterministic CSI report for a station.

    The same (seed, tick, station_index) always yields the same bytes.
    """
    n_sub = wire.Bandwidth(int(station.bandwidth)).max_subcarriers
    rng = np.random.default_rng([config.rng_seed & 0xFFFFFFFF,
                                 tick, station_index])
    h = config.channel.response(n_sub)
    if config.channel.noise_sigma > 0:
        h = h + (rng.normal(0.0, config.channel.noise_sigma, n_sub)
                 + 1j * rng.normal(0.0, config.channel.noise_sigma, n_sub))
    csi_i, csi_q = _kernels.quantize_iq(h.real, h.imag)

    rssi = np.zeros(16, np.int32)
    agc = np.zeros(16, np.int8)
    for chain, baseline in enumerate(station.rssi):
        if baseline == 0:
            continue
        rssi[chain] = int(baseline) + int(rng.integers(-2, 3))
        agc[chain] = int(np.clip(94 + int(baseline), -128, 127))

    return wire.CsiDataFrame.build(
        magic=CSI_REPORT_MAGIC,
        bw=int(station.bandwidth),
        csi_cnt=n_sub,
        csi_i=csi_i,
        csi_q=csi_q,
        peer_addr=station.mac,
        timestamp_us=int(now_us),
        phy_mode=station.phy_mode,
        rssi=rssi,
        agc_gain=agc,
        mcs=station.mcs,
        gi_type=station.gi_type,
        coding=station.coding,
        stbc=station.stbc,
        dcm=station.dcm,
    )


def _admitted(state, station):
    return not state.filter or station.mac in state.filter


class Emulator:
    """Runs the command server and the frame generator on two threads.

    The command thread is the sole writer of the state snapshot; the
    generator (and external readers) only ever see whole snapshots.
    """

    def __init__(self, config):
        self.config = config
        self._state = ApState()
        self._state_lock = threading.Lock()
        self._stop = threading.Event()
        self._threads = []
        self._cmd_sock = None
        self._report_sock = None
        self.invalid_magic = 0
        self.rejections = 0
        self.frames_sent = 0
        self.command_intervals = []   # inter-arrival gaps, for pacing checks
        self._last_cmd_at = None

    # -- state handling ----------------------------------------------------

    @property
    def state(self):
        return self._state

    def _swap_state(self, new_state):
        with self._state_lock:
            self._state = new_state

    def reboot(self):
        """Simulated power cycle; afterwards any band can be locked again."""
        self._swap_state(reboot(self._state))
        log.info(json.dumps({"event": "reboot"}))

    # -- lifecycle -----------------------------------------------------------

    def start(self):
        cfg = self.config
        if not cfg.stations:
            raise ValueError("emulator needs at least one station to generate CSI")
        self._cmd_sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._cmd_sock.bind((cfg.bind_address, cfg.command_port))
        self._cmd_sock.settimeout(0.2)
        self._report_sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._report_sock.bind((cfg.bind_address, cfg.report_source_port))
        self._stop.clear()
        self._threads = [
            threading.Thread(target=self._serve_commands, name="ap-cmd",
                             daemon=True),
            threading.Thread(target=self._generate, name="ap-gen", daemon=True),
        ]
        for t in self._threads:
            t.start()
        return self

    def stop(self):
        self._stop.set()
        for t in self._threads:
            t.join(timeout=2.0)
        for sock in (self._cmd_sock, self._report_sock):
            if sock is not None:
                sock.close()
        self._threads = []

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    @property
    def command_address(self):
        return self._cmd_sock.getsockname()

    @property
    def report_source_address(self):
        return self._report_sock.getsockname()

    # -- threads ---------------------------------------------------------------

    def _serve_commands(self):
        while not self._stop.is_set():
            try:
                datagram, addr = self._cmd_sock.recvfrom(2048)
            except socket.timeout:
                continue
            except OSError:
                return
            now = time.monotonic()
            if self._last_cmd_at is not None:
                self.command_intervals.append(now - self._last_cmd_at)
            self._last_cmd_at = now
            new_state, reply, events = handle_command(
                self._state, datagram,
                strict=self.config.strict_ordering, sender_ip=addr[0])
            self._swap_state(new_state)
            for event in events:
                if event.get("reason") == "bad_magic":
                    self.invalid_magic += 1
                if event.get("event") == "reject":
                    self.rejections += 1
                log.info(json.dumps({"from": addr[0], **event}))
            if reply is not None:
                try:
                    self._cmd_sock.sendto(reply, addr)
                except OSError:
                    pass

    def _generate(self):
        cfg = self.config
        period = 1.0 / cfg.frame_rate_hz
        period_us = 1e6 / cfg.frame_rate_hz
        tick = 0
        next_t = None
        while not self._stop.is_set():
            state = self._state
            target_ip = state.effective_target_ip or cfg.default_target_ip
            if not (state.reporting and target_ip):
                next_t = None
                time.sleep(0.01)
                continue
            if next_t is None:
                next_t = time.monotonic()
            now_us = cfg.epoch_us + int(round(tick * period_us))
            for idx, station in enumerate(cfg.stations):
                if not _admitted(state, station):
                    continue
                frame = generate_frame(cfg, state, station, now_us,
                                       tick=tick, station_index=idx)
                try:
                    self._report_sock.sendto(wire.encode_csi_frame(frame),
                                             (target_ip, cfg.report_port))
                    self.frames_sent += 1
                except OSError:
                    pass
            tick += 1
            next_t += period
            while not self._stop.is_set():
                remaining = next_t - time.monotonic()
                if remaining <= 0:
                    break
                time.sleep(min(remaining, 0.05))
                if not self._state.reporting:
                    break
            if next_t < time.monotonic() - 1.0:
                next_t = time.monotonic()  # fell far behind; resync


def run_emulator(config, duration=None):
    """Run an emulator until interrupted (or for duration seconds)."""
    emu = Emulator(config)
    emu.start()
    try:
        if duration is None:
            while True:
                time.sleep(0.5)
        else:
            time.sleep(duration)
    except KeyboardInterrupt:
        pass
    finally:
        emu.stop()
    return emu
