"""Capture-file persistence and replay for received CSI datagrams.

File layout (all integers little-endian):

    header   8s  magic 'ZCSICAP1'
             H   version (1)
             6s  reserved, zero
    record   Q   receive time, microseconds since the epoch
             4s  source IPv4, first printed octet first
             H   source port
             I   datagram length
             N   raw datagram bytes

Records store the datagram exactly as it arrived, so a capture can be
replayed or re-parsed losslessly.
"""

import socket
import struct
import time
from dataclasses import dataclass

from . import wire

CAPTURE_MAGIC = b"ZCSICAP1"
CAPTURE_VERSION = 1
_HEADER = CAPTURE_MAGIC + struct.pack("<H", CAPTURE_VERSION) + bytes(6)
_REC_FMT = "<Q4sHI"
_REC_SIZE = struct.calcsize(_REC_FMT)


class CaptureError(Exception):
    """Base for capture-file failures."""


class BadHeader(CaptureError):
    """File is empty or does not start with a valid capture header."""


class TruncatedRecord(CaptureError):
    """File ends in the middle of a record."""


@dataclass
class CsiRecord:
    """One received CSI report with its arrival metadata."""

    received_at_us: int
    source: tuple
    frame: wire.CsiDataFrame
    raw: bytes


class CaptureWriter:
    """Appends received datagrams to a capture file."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "wb")
        self._fh.write(_HEADER)
        self.records_written = 0

    def append(self, received_at_us, source, raw):
        ip, port = source
        self._fh.write(struct.pack(_REC_FMT, received_at_us,
                                   wire.parse_ipv4(ip), port, len(raw)))
        self._fh.write(raw)
        self.records_written += 1

    def flush(self):
        self._fh.flush()

    def close(self):
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def iter_capture_raw(path):
    """Yield (received_at_us, ip, port, raw) tuples in file order.

    Raises BadHeader immediately on a bad header; yields every complete
    record before raising TruncatedRecord on a short tail.
    """
    with open(path, "rb") as fh:
        head = fh.read(len(_HEADER))
        if len(head) < len(_HEADER) or head[:8] != CAPTURE_MAGIC:
            raise BadHeader(f"{path}: not a capture file")
        version = struct.unpack_from("<H", head, 8)[0]
        if version != CAPTURE_VERSION:
            raise BadHeader(f"{path}: unsupported capture version {version}")
        while True:
            rec_head = fh.read(_REC_SIZE)
            if not rec_head:
                return
            if len(rec_head) < _REC_SIZE:
                raise TruncatedRecord(f"{path}: short record header")
            received_at_us, ip_raw, port, length = struct.unpack(_REC_FMT, rec_head)
            raw = fh.read(length)
            if len(raw) < length:
                raise TruncatedRecord(f"{path}: short record payload")
            yield received_at_us, wire.format_ipv4(ip_raw), port, raw


def read_capture(path):
    """Yield CsiRecord objects (raw bytes decoded) in file order."""
    for received_at_us, ip, port, raw in iter_capture_raw(path):
        frame = wire.decode_csi_frame(raw)
        yield CsiRecord(received_at_us, (ip, port), frame, raw)


def write_capture(path, records):
    """Write an iterable of CsiRecord to a new capture file."""
    with CaptureWriter(path) as writer:
        for rec in records:
            writer.append(rec.received_at_us, rec.source, rec.raw)
        return writer.records_written


def replay_capture(path, target, rate=1.0, sock=None):
    """Re-send captured datagrams to target, pacing by recorded gaps.

    Gaps between consecutive records are divided by rate; rate=1.0
    reproduces the original timing. Returns the number of datagrams sent.
    """
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate}")
    own_sock = sock is None
    if own_sock:
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    sent = 0
    first_us = None
    started = None
    try:
        for received_at_us, _ip, _port, raw in iter_capture_raw(path):
            if first_us is None:
                first_us = received_at_us
                started = time.monotonic()
            else:
                # Absolute schedule: overhead never accumulates into drift.
                due = started + (received_at_us - first_us) / 1e6 / rate
                delay = due - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
            sock.sendto(raw, target)
            sent += 1
    finally:
        if own_sock:
            sock.close()
    return sent
