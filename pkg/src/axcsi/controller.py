"""UDP session controller: drives an AP through the mandated sequence.

Starting a session sends, in order and paced at least 500 ms apart:

    band selection (0x5), CSI configuration (0x3), report enable (0x1),
    one STA filter (0x2) per requested MAC, report target (0x4).

The AP locks to the first band it is given until it reboots; asking for
the other band raises BandLockedError. All commands except the
availability check are fire-and-forget (the protocol defines no acks
for them).
"""

import socket
import threading
import time
from dataclasses import dataclass, replace
from enum import Enum

from . import wire

MIN_COMMAND_DELAY = 0.5
# Sent gaps sit slightly above the floor so receive-side timestamps can
# never measure below it.
PACING_MARGIN = 0.005

MAX_STA_FILTERS = 5


class ControllerError(Exception):
    """Base for controller failures."""


class TransportError(ControllerError):
    """A UDP send/receive failed; phase_reached tells how far we got."""

    def __init__(self, message, phase_reached=None):
        super().__init__(message)
        self.phase_reached = phase_reached


class BandLockedError(ControllerError):
    """The AP is locked to a different band; it must reboot to switch."""


class BusyError(ControllerError):
    """Another session operation is already running on this controller."""


class StateError(ControllerError):
    """Operation not allowed in the current phase."""


class Phase(Enum):
    IDLE = "idle"
    BAND_SET = "band_set"
    CONFIGURED = "configured"
    ENABLED = "enabled"
    FILTERED = "filtered"
    REPORTING = "reporting"
    STOPPED = "stopped"


@dataclass(frozen=True)
class ControllerConfig:
    ap_address: str
    command_port: int = 8021
    inter_command_delay: float = MIN_COMMAND_DELAY
    availability_timeout: float = 2.0
    availability_retries: int = 3

    def __post_init__(self):
        if self.inter_command_delay < MIN_COMMAND_DELAY:
            raise ValueError(
                f"inter_command_delay must be >= {MIN_COMMAND_DELAY} s, "
                f"got {self.inter_command_delay}")


@dataclass(frozen=True)
class SessionPlan:
    band: wire.Band
    report_target_ip: str
    frame_type: int = wire.FRAME_TYPE_QOS_DATA
    sta_filters: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "band", wire.Band(self.band))
        filters = tuple(
            wire.parse_mac(m) if isinstance(m, str) else bytes(m)
            for m in self.sta_filters)
        if len(filters) > MAX_STA_FILTERS:
            raise ValueError(f"at most {MAX_STA_FILTERS} STA filters supported, "
                             f"got {len(filters)}")
        if any(len(m) != 6 for m in filters):
            raise ValueError("STA filter entries must be 6-byte MACs")
        object.__setattr__(self, "sta_filters", filters)
        if not 0 <= self.frame_type <= 0xFF:
            raise ValueError(f"frame_type {self.frame_type} out of range 0..255")


@dataclass(frozen=True)
class ControllerState:
    phase: Phase = Phase.IDLE
    locked_band: wire.Band = None


class Controller:
    """Owns one controller-side state machine and its UDP socket.

    clock/sleep are injectable for tests; defaults are monotonic time.
    """

    def __init__(self, config, *, clock=time.monotonic, sleep=time.sleep):
        self.config = config
        self._clock = clock
        self._sleep = sleep
        self._state = ControllerState()
        self._lock = threading.Lock()
        self._sock = None
        self._last_send_at = None

    @property
    def state(self):
        return self._state

    def reset(self):
        """Forget the band lock after the AP was rebooted out-of-band."""
        self._state = ControllerState()

    # -- transport ----------------------------------------------------------

    def _socket(self):
        if self._sock is None:
            self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            self._sock.bind(("0.0.0.0", 0))
        return self._sock

    def close(self):
        if self._sock is not None:
            self._sock.close()
            self._sock = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _pace(self):
        if self._last_send_at is None:
            return
        target = self._last_send_at + self.config.inter_command_delay + PACING_MARGIN
        while True:
            remaining = target - self._clock()
            if remaining <= 0:
                return
            self._sleep(remaining)

    def _send_paced(self, payload, phase_reached):
        data = wire.encode_command(wire.CommandFrame.wrap(payload))
        self._pace()
        try:
            self._socket().sendto(
                data, (self.config.ap_address, self.config.command_port))
        except OSError as exc:
            raise TransportError(f"send failed: {exc}",
                                 phase_reached=phase_reached) from exc
        self._last_send_at = self._clock()

    def send_raw(self, frame):
        """Encode and transmit one command with no pacing or state tracking."""
        data = wire.encode_command(frame)
        try:
            self._socket().sendto(
                data, (self.config.ap_address, self.config.command_port))
        except OSError as exc:
            raise TransportError(f"send failed: {exc}") from exc

    # -- operations -----------------------------------------------------------

    def check_availability(self):
        """True iff the AP answers the availability command with b'OK'.

        A missing or non-OK reply returns False after the configured
        retries; socket failures raise TransportError instead.
        """
        cfg = self.config
        data = wire.encode_command(wire.CommandFrame.wrap(wire.CheckAvailability()))
        for _ in range(max(1, cfg.availability_retries)):
            sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            try:
                sock.bind(("0.0.0.0", 0))
                self._pace()
                sock.sendto(data, (cfg.ap_address, cfg.command_port))
                self._last_send_at = self._clock()
                deadline = time.monotonic() + cfg.availability_timeout
                while True:
                    remaining = deadline - time.monotonic()
                    if remaining <= 0:
                        break
                    sock.settimeout(remaining)
                    try:
                        reply, _addr = sock.recvfrom(256)
                    except socket.timeout:
                        break
                    if reply == wire.AVAILABILITY_REPLY:
                        return True
            except OSError as exc:
                raise TransportError(f"availability check failed: {exc}") from exc
            finally:
                sock.close()
        return False

    def start_session(self, plan):
        """Run the five-step configuration sequence; ends in REPORTING.

        Allowed from a fresh controller or when the locked band matches
        the plan; a different band raises BandLockedError (the AP needs
        a reboot, and this controller a reset(), to switch).
        """
        if not self._lock.acquire(blocking=False):
            raise BusyError("another session operation is in progress")
        try:
            state = self._state
            if state.phase is not Phase.IDLE and state.locked_band is not None \
                    and state.locked_band != plan.band:
                raise BandLockedError(
                    f"AP locked to {state.locked_band}; reboot required "
                    f"before switching to {plan.band}")

            def advance(phase):
                self._state = ControllerState(phase, self._state.locked_band)

            self._send_paced(wire.BandConfig(plan.band), self._state.phase)
            self._state = ControllerState(Phase.BAND_SET, plan.band)
            self._send_paced(wire.CsiConfig(plan.frame_type), Phase.BAND_SET)
            advance(Phase.CONFIGURED)
            self._send_paced(wire.ReportEnable(1), Phase.CONFIGURED)
            advance(Phase.ENABLED)
            reached = Phase.ENABLED
            for mac in plan.sta_filters:
                self._send_paced(wire.StaFilter(mac), reached)
                advance(Phase.FILTERED)
                reached = Phase.FILTERED
            self._send_paced(wire.ReportConfig(plan.report_target_ip), reached)
            advance(Phase.REPORTING)
            return self._state
        finally:
            self._lock.release()

    def stop_session(self):
        """Disable reporting; keeps the band lock, ends in STOPPED."""
        if not self._lock.acquire(blocking=False):
            raise BusyError("another session operation is in progress")
        try:
            if self._state.phase is not Phase.REPORTING:
                raise StateError(
                    f"stop_session requires phase REPORTING, "
                    f"current {self._state.phase.value}")
            self._send_paced(wire.ReportEnable(0), Phase.REPORTING)
            self._state = replace(self._state, phase=Phase.STOPPED)
            return self._state
        finally:
            self._lock.release()
