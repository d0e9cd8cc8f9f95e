"""Spectrum conversion and the statistics kept by the capture UI.

Raw I/Q integers become complex per-subcarrier spectra (magnitude and
phase); a streaming accumulator maintains the counters the statistics
pane shows: totals by bandwidth and MCS, per-chain average RSSI, frame
rate over a sliding 5 s window and the decode-error count.
"""

import csv
import json
from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .wire import CSI_MAX_SUBCARRIERS

FPS_WINDOW_US = 5_000_000
DB_FLOOR = -120.0


@dataclass
class SpectrumView:
    """Complex spectrum of one CSI report, first csi_cnt entries only."""

    subcarrier_count: int
    complex_values: np.ndarray
    magnitude: np.ndarray
    phase_rad: np.ndarray


def to_spectrum(frame):
    """CsiDataFrame -> SpectrumView over the first csi_cnt subcarriers."""
    n = frame.csi_cnt
    if not 0 < n <= CSI_MAX_SUBCARRIERS:
        raise ValueError(f"csi_cnt {n} out of range 1..{CSI_MAX_SUBCARRIERS}")
    i = frame.csi_i[:n]
    q = frame.csi_q[:n]
    mag, phase = _kernels.mag_phase(i, q)
    return SpectrumView(
        subcarrier_count=n,
        complex_values=i.astype(np.float64) + 1j * q.astype(np.float64),
        magnitude=mag,
        phase_rad=phase,
    )


def unwrap_phase(phase_rad):
    """Optional +-pi jump correction; off the default display path."""
    return np.unwrap(np.asarray(phase_rad, np.float64))


def magnitude_db(magnitude):
    """Linear magnitude -> dB (20*log10), floored at -120 dB for zeros."""
    mag = np.asarray(magnitude, np.float64)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(np.where(mag > 0, mag, np.nan))
    return np.where(np.isnan(db) | (db < DB_FLOOR), DB_FLOOR, db)


def spectrum_to_csv(view, fh):
    """Write 'subcarrier,i,q,magnitude,phase' rows for one spectrum."""
    writer = csv.writer(fh)
    writer.writerow(["subcarrier", "i", "q", "magnitude", "phase"])
    for k in range(view.subcarrier_count):
        writer.writerow([k, int(view.complex_values[k].real),
                         int(view.complex_values[k].imag),
                         repr(float(view.magnitude[k])),
                         repr(float(view.phase_rad[k]))])


def decimate_indices(n, max_points):
    """Indices into 0..n-1, uniformly strided, endpoints always kept."""
    if n <= max_points:
        return list(range(n))
    stride = -(-(n - 1) // (max_points - 1))  # ceil
    idx = list(range(0, n, stride))
    if idx[-1] != n - 1:
        idx.append(n - 1)
    return idx


@dataclass
class StatsSnapshot:
    """Point-in-time copy of the streaming statistics."""

    total_frames: int = 0
    frames_by_bandwidth: dict = field(default_factory=dict)
    frames_by_mcs: dict = field(default_factory=dict)
    avg_rssi_per_chain: list = field(default_factory=lambda: [0.0] * 16)
    frames_per_second: float = 0.0
    decode_errors: int = 0

    def to_dict(self):
        """JSON-ready dict; map keys become strings."""
        return {
            "total_frames": self.total_frames,
            "frames_by_bandwidth": {str(k): v for k, v
                                    in sorted(self.frames_by_bandwidth.items())},
            "frames_by_mcs": {str(k): v for k, v
                              in sorted(self.frames_by_mcs.items())},
            "avg_rssi_per_chain": list(self.avg_rssi_per_chain),
            "frames_per_second": self.frames_per_second,
            "decode_errors": self.decode_errors,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


class StatsAccumulator:
    """Streaming counter set; permutation of the input stream does not
    change counters or means (frame rate keys off the newest timestamp).
    """

    def __init__(self):
        self.total_frames = 0
        self.frames_by_bandwidth = Counter()
        self.frames_by_mcs = Counter()
        self.decode_errors = 0
        self._rssi_sum = [0] * 16
        self._rssi_cnt = [0] * 16
        self._newest_us = None
        self._window = deque()

    def accumulate(self, record):
        frame = record.frame
        self.total_frames += 1
        self.frames_by_bandwidth[int(frame.bw)] += 1
        self.frames_by_mcs[int(frame.mcs)] += 1
        for chain in range(16):
            v = int(frame.rssi[chain])
            if v != 0:
                self._rssi_sum[chain] += v
                self._rssi_cnt[chain] += 1
        t = record.received_at_us
        if self._newest_us is None or t > self._newest_us:
            self._newest_us = t
        cutoff = self._newest_us - FPS_WINDOW_US
        if t > cutoff:
            self._window.append(t)
        if len(self._window) > 4096:
            # Amortized prune; snapshot() filters exactly either way.
            self._window = deque(x for x in self._window if x > cutoff)

    def note_decode_error(self):
        self.decode_errors += 1

    def snapshot(self):
        if self._newest_us is None:
            fps = 0.0
        else:
            cutoff = self._newest_us - FPS_WINDOW_US
            fps = sum(1 for t in self._window if t > cutoff) / (FPS_WINDOW_US / 1e6)
        return StatsSnapshot(
            total_frames=self.total_frames,
            frames_by_bandwidth=dict(self.frames_by_bandwidth),
            frames_by_mcs=dict(self.frames_by_mcs),
            avg_rssi_per_chain=[
                self._rssi_sum[c] / self._rssi_cnt[c] if self._rssi_cnt[c] else 0.0
                for c in range(16)],
            frames_per_second=fps,
            decode_errors=self.decode_errors,
        )


def accumulate(acc, record):
    """Feed one record into acc and return it (streaming fold step)."""
    acc.accumulate(record)
    return acc
