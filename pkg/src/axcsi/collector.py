"""UDP collector for CSI reports (port 8023 on real deployments).

One receive loop owns the socket: each datagram that decodes as a CSI
report and passes the optional MAC allowlist is timestamped, kept in a
bounded in-memory window (oldest evicted first), appended to the capture
file when one is configured, counted into the statistics and fanned out
to subscriber queues. Fan-out never blocks the receive loop: queues are
bounded and drop their oldest entry on overflow.

Malformed datagrams only increment the decode-error counter. Disk
failures demote the collector to in-memory operation with a persistent
warning; collection continues.
"""

import logging
import queue
import socket
import threading
import time
from collections import deque
from dataclasses import dataclass

from . import wire
from .analysis import StatsAccumulator
from .capture import CaptureWriter, CsiRecord

log = logging.getLogger("axcsi.collector")

DEFAULT_LISTEN_PORT = 8023
REPORT_SOURCE_PORT = 8024
MAX_DATAGRAM = 8192


@dataclass(frozen=True)
class CollectorConfig:
    bind_address: str = "0.0.0.0"
    listen_port: int = DEFAULT_LISTEN_PORT
    window_capacity: int = 4096
    mac_allowlist: frozenset = None
    capture_path: str = None
    strict_source_port: bool = False
    expected_source_port: int = REPORT_SOURCE_PORT
    subscriber_queue_size: int = 256

    def __post_init__(self):
        if self.window_capacity <= 0:
            raise ValueError("window_capacity must be positive")
        if self.mac_allowlist is not None:
            allow = frozenset(
                wire.parse_mac(m) if isinstance(m, str) else bytes(m)
                for m in self.mac_allowlist)
            object.__setattr__(self, "mac_allowlist", allow)


class Collector:
    """Receives, windows, persists and fans out CSI records."""

    def __init__(self, config):
        self.config = config
        self._sock = None
        self._thread = None
        self._stop = threading.Event()
        self._window = deque(maxlen=config.window_capacity)
        self._window_lock = threading.Lock()
        self._subscribers = []
        self._sub_lock = threading.Lock()
        self._stats = StatsAccumulator()
        self._stats_lock = threading.Lock()
        self._writer = None
        self.capture_warning = None
        self.received = 0
        self.filtered_out = 0
        self.wrong_source_port = 0
        self.subscriber_drops = 0

    # -- lifecycle ----------------------------------------------------------

    def start(self):
        cfg = self.config
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.bind((cfg.bind_address, cfg.listen_port))
        self._sock.settimeout(0.2)
        if cfg.capture_path:
            self._writer = CaptureWriter(cfg.capture_path)
        self._stop.clear()
        self._thread = threading.Thread(target=self._recv_loop,
                                        name="csi-collector", daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
            self._thread = None
        if self._sock is not None:
            self._sock.close()
            self._sock = None
        if self._writer is not None:
            self._writer.close()
            self._writer = None

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    @property
    def address(self):
        return self._sock.getsockname()

    # -- consumers ------------------------------------------------------------

    def subscribe(self, maxsize=None):
        q = queue.Queue(maxsize or self.config.subscriber_queue_size)
        with self._sub_lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q):
        with self._sub_lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def window(self):
        """Snapshot copy of the retained records, oldest first."""
        with self._window_lock:
            return list(self._window)

    def latest(self, n):
        with self._window_lock:
            if n <= 0:
                return []
            return list(self._window)[-n:]

    def stats_snapshot(self):
        with self._stats_lock:
            return self._stats.snapshot()

    # -- receive path ----------------------------------------------------------

    def _recv_loop(self):
        cfg = self.config
        while not self._stop.is_set():
            try:
                data, addr = self._sock.recvfrom(MAX_DATAGRAM)
            except socket.timeout:
                continue
            except OSError:
                return
            received_at_us = time.time_ns() // 1000
            if cfg.strict_source_port and addr[1] != cfg.expected_source_port:
                self.wrong_source_port += 1
                continue
            try:
                frame = wire.decode_csi_frame(data)
            except wire.DecodeError:
                with self._stats_lock:
                    self._stats.note_decode_error()
                continue
            if cfg.mac_allowlist is not None and frame.peer_addr not in cfg.mac_allowlist:
                self.filtered_out += 1
                continue
            record = CsiRecord(received_at_us, (addr[0], addr[1]), frame, data)
            self.received += 1
            with self._window_lock:
                self._window.append(record)
            with self._stats_lock:
                self._stats.accumulate(record)
            self._persist(record)
            self._fan_out(record)

    def _persist(self, record):
        if self._writer is None:
            return
        try:
            self._writer.append(record.received_at_us, record.source, record.raw)
            self._writer.flush()
        except OSError as exc:
            self.capture_warning = f"capture write failed, continuing in memory: {exc}"
            log.warning(self.capture_warning)
            try:
                self._writer.close()
            except OSError:
                pass
            self._writer = None

    def _fan_out(self, record):
        with self._sub_lock:
            subscribers = list(self._subscribers)
        for q in subscribers:
            try:
                q.put_nowait(record)
            except queue.Full:
                try:
                    q.get_nowait()  # drop the oldest queued record
                except queue.Empty:
                    pass
                try:
                    q.put_nowait(record)
                except queue.Full:
                    pass
                self.subscriber_drops += 1


def run_collector(config, duration=None, on_start=None):
    """Run a collector and yield CsiRecords as they arrive.

    Stops after duration seconds when given, otherwise runs until the
    consumer abandons the generator. on_start, when given, receives the
    running Collector (useful to learn an ephemeral bound port).
    """
    collector = Collector(config)
    collector.start()
    if on_start is not None:
        on_start(collector)
    q = collector.subscribe()
    deadline = None if duration is None else time.monotonic() + duration
    try:
        while deadline is None or time.monotonic() < deadline:
            try:
                yield q.get(timeout=0.1)
            except queue.Empty:
                continue
    finally:
        collector.stop()
