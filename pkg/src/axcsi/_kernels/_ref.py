"""Pure-Python (numpy) kernels for the per-frame hot paths.

This is the fallback backend used when the compiled extension is not
available. Both backends must produce bit-identical results; the parity
tests in tests/test_kernels.py enforce that.

Kernels do no protocol validation beyond what they need to avoid
corrupting memory. Callers (axcsi.wire, axcsi.emulator) validate first.
"""

import struct

import numpy as np

BACKEND = "python"

CSI_FRAME_SIZE = 4296
CSI_HEADER_SIZE = 200
CSI_MAX_SUBCARRIERS = 512

_HEAD_FMT = "<IBIQIIIBH6s"      # magic .. peer_addr, offset 0
_TAIL_FMT = "<hbbbbbbQh"        # mcs .. csi_cnt, offset 182
_OFF_RSSI = 38
_OFF_RESV3 = 102
_OFF_AGC = 166
_OFF_TAIL = 182
_OFF_CSI_I = 200
_OFF_CSI_Q = 2248

_INT16_MIN = -32768
_INT16_MAX = 32767


def unpack_csi_frame(data):
    """Split a 4296-byte CSI report into scalars and arrays.

    Returns a 24-tuple in wire order. Array fields come back as fresh
    native-endian numpy arrays (int32/int8), so the caller may drop the
    source buffer.
    """
    if len(data) != CSI_FRAME_SIZE:
        raise ValueError(f"expected {CSI_FRAME_SIZE} bytes, got {len(data)}")
    (magic, vendor, chip_id, timestamp_us, resv, bw, phy_mode,
     resv_1, resv_2, peer_addr) = struct.unpack_from(_HEAD_FMT, data, 0)
    rssi = np.frombuffer(data, "<i4", 16, _OFF_RSSI).astype(np.int32)
    resv_3 = np.frombuffer(data, "<i4", 16, _OFF_RESV3).astype(np.int32)
    agc_gain = np.frombuffer(data, "i1", 16, _OFF_AGC).astype(np.int8)
    (mcs, gi_type, coding, stbc, resv_4, dcm, resv_5, resv_6,
     csi_cnt) = struct.unpack_from(_TAIL_FMT, data, _OFF_TAIL)
    csi_i = np.frombuffer(data, "<i4", 512, _OFF_CSI_I).astype(np.int32)
    csi_q = np.frombuffer(data, "<i4", 512, _OFF_CSI_Q).astype(np.int32)
    return (magic, vendor, chip_id, timestamp_us, resv, bw, phy_mode,
            resv_1, resv_2, peer_addr, rssi, resv_3, agc_gain,
            mcs, gi_type, coding, stbc, resv_4, dcm, resv_5, resv_6,
            csi_cnt, csi_i, csi_q)


def pack_csi_frame(magic, vendor, chip_id, timestamp_us, resv, bw, phy_mode,
                   resv_1, resv_2, peer_addr, rssi, resv_3, agc_gain,
                   mcs, gi_type, coding, stbc, resv_4, dcm, resv_5, resv_6,
                   csi_cnt, csi_i, csi_q):
    """Pack CSI report fields into the 4296-byte wire record."""
    out = bytearray(CSI_FRAME_SIZE)
    struct.pack_into(_HEAD_FMT, out, 0,
                     magic, vendor, chip_id, timestamp_us, resv, bw, phy_mode,
                     resv_1, resv_2, bytes(peer_addr))
    out[_OFF_RSSI:_OFF_RESV3] = np.asarray(rssi, np.int32).astype("<i4").tobytes()
    out[_OFF_RESV3:_OFF_AGC] = np.asarray(resv_3, np.int32).astype("<i4").tobytes()
    out[_OFF_AGC:_OFF_TAIL] = np.asarray(agc_gain, np.int8).tobytes()
    struct.pack_into(_TAIL_FMT, out, _OFF_TAIL,
                     mcs, gi_type, coding, stbc, resv_4, dcm, resv_5, resv_6,
                     csi_cnt)
    out[_OFF_CSI_I:_OFF_CSI_Q] = np.asarray(csi_i, np.int32).astype("<i4").tobytes()
    out[_OFF_CSI_Q:] = np.asarray(csi_q, np.int32).astype("<i4").tobytes()
    return bytes(out)


def mag_phase(csi_i, csi_q):
    """Per-subcarrier magnitude and phase of integer I/Q samples.

    magnitude[k] = sqrt(I[k]^2 + Q[k]^2), phase[k] = atan2(Q[k], I[k]).
    """
    i = np.asarray(csi_i, np.float64)
    q = np.asarray(csi_q, np.float64)
    return np.hypot(i, q), np.arctan2(q, i)


def channel_response(delays, amps, n_sub, fft_size):
    """Frequency response of a tapped-delay channel on n_sub tones.

    H[k] = sum_t amps[t] * exp(-2j*pi*k*delays[t]/fft_size), k = 0..n_sub-1.
    """
    delays = np.asarray(delays, np.int64)
    amps = np.asarray(amps, np.complex128)
    k = np.arange(n_sub, dtype=np.float64)
    h = np.zeros(n_sub, dtype=np.complex128)
    for d, a in zip(delays, amps):
        h += a * np.exp(-2j * np.pi * k * (d / float(fft_size)))
    return h


def quantize_iq(re, im):
    """Round I/Q to integers and saturate at the 16-bit sample range.

    Rounding is IEEE round-half-to-even so both backends agree bit for bit.
    """
    i = np.clip(np.rint(np.asarray(re, np.float64)), _INT16_MIN, _INT16_MAX)
    q = np.clip(np.rint(np.asarray(im, np.float64)), _INT16_MIN, _INT16_MAX)
    return i.astype(np.int32), q.astype(np.int32)
