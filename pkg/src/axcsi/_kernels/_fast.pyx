# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the per-frame hot paths.

Mirrors axcsi._kernels._ref exactly; see the parity tests. Numeric code
uses the same libm calls and the same operation order as the numpy
reference so results stay bit-compatible.
"""

from libc.stdint cimport (uint8_t, uint16_t, uint32_t, uint64_t,
                          int8_t, int16_t, int32_t, int64_t)
from libc.math cimport sin, cos, rint, M_PI

import numpy as np

BACKEND = "cython"

CSI_FRAME_SIZE = 4296
CSI_HEADER_SIZE = 200
CSI_MAX_SUBCARRIERS = 512

DEF _OFF_RSSI = 38
DEF _OFF_RESV3 = 102
DEF _OFF_AGC = 166
DEF _OFF_TAIL = 182
DEF _OFF_CSI_I = 200
DEF _OFF_CSI_Q = 2248

DEF _INT16_MIN = -32768.0
DEF _INT16_MAX = 32767.0


cdef inline uint16_t _rd_u16(const uint8_t* p) noexcept nogil:
    return p[0] | (<uint16_t>p[1] << 8)

cdef inline uint32_t _rd_u32(const uint8_t* p) noexcept nogil:
    return (p[0] | (<uint32_t>p[1] << 8)
            | (<uint32_t>p[2] << 16) | (<uint32_t>p[3] << 24))

cdef inline uint64_t _rd_u64(const uint8_t* p) noexcept nogil:
    return _rd_u32(p) | (<uint64_t>_rd_u32(p + 4) << 32)

cdef inline void _wr_u16(uint8_t* p, uint16_t v) noexcept nogil:
    p[0] = v & 0xFF
    p[1] = (v >> 8) & 0xFF

cdef inline void _wr_u32(uint8_t* p, uint32_t v) noexcept nogil:
    p[0] = v & 0xFF
    p[1] = (v >> 8) & 0xFF
    p[2] = (v >> 16) & 0xFF
    p[3] = (v >> 24) & 0xFF

cdef inline void _wr_u64(uint8_t* p, uint64_t v) noexcept nogil:
    _wr_u32(p, <uint32_t>v)
    _wr_u32(p + 4, <uint32_t>(v >> 32))


def unpack_csi_frame(data):
    """Split a 4296-byte CSI report into scalars and arrays."""
    cdef const uint8_t[::1] buf = data
    if buf.shape[0] != CSI_FRAME_SIZE:
        raise ValueError(f"expected {CSI_FRAME_SIZE} bytes, got {buf.shape[0]}")
    cdef const uint8_t* p = &buf[0]

    rssi_arr = np.empty(16, dtype=np.int32)
    resv3_arr = np.empty(16, dtype=np.int32)
    agc_arr = np.empty(16, dtype=np.int8)
    csi_i_arr = np.empty(512, dtype=np.int32)
    csi_q_arr = np.empty(512, dtype=np.int32)
    cdef int32_t[::1] rssi = rssi_arr
    cdef int32_t[::1] resv_3 = resv3_arr
    cdef int8_t[::1] agc = agc_arr
    cdef int32_t[::1] csi_i = csi_i_arr
    cdef int32_t[::1] csi_q = csi_q_arr

    cdef Py_ssize_t k
    for k in range(16):
        rssi[k] = <int32_t>_rd_u32(p + _OFF_RSSI + 4 * k)
        resv_3[k] = <int32_t>_rd_u32(p + _OFF_RESV3 + 4 * k)
        agc[k] = <int8_t>p[_OFF_AGC + k]
    for k in range(512):
        csi_i[k] = <int32_t>_rd_u32(p + _OFF_CSI_I + 4 * k)
        csi_q[k] = <int32_t>_rd_u32(p + _OFF_CSI_Q + 4 * k)

    return (_rd_u32(p), p[4], _rd_u32(p + 5), _rd_u64(p + 9),
            _rd_u32(p + 17), _rd_u32(p + 21), _rd_u32(p + 25),
            p[29], _rd_u16(p + 30), bytes(buf[32:38]),
            rssi_arr, resv3_arr, agc_arr,
            <int16_t>_rd_u16(p + _OFF_TAIL),
            <int8_t>p[184], <int8_t>p[185], <int8_t>p[186],
            <int8_t>p[187], <int8_t>p[188], <int8_t>p[189],
            _rd_u64(p + 190), <int16_t>_rd_u16(p + 198),
            csi_i_arr, csi_q_arr)


def pack_csi_frame(uint32_t magic, uint8_t vendor, uint32_t chip_id,
                   uint64_t timestamp_us, uint32_t resv, uint32_t bw,
                   uint32_t phy_mode, uint8_t resv_1, uint16_t resv_2,
                   peer_addr, rssi, resv_3, agc_gain,
                   int16_t mcs, int8_t gi_type, int8_t coding, int8_t stbc,
                   int8_t resv_4, int8_t dcm, int8_t resv_5, uint64_t resv_6,
                   int16_t csi_cnt, csi_i, csi_q):
    """Pack CSI report fields into the 4296-byte wire record."""
    cdef const uint8_t[::1] peer = peer_addr
    cdef const int32_t[::1] rssi_v = np.ascontiguousarray(rssi, dtype=np.int32)
    cdef const int32_t[::1] resv3_v = np.ascontiguousarray(resv_3, dtype=np.int32)
    cdef const int8_t[::1] agc_v = np.ascontiguousarray(agc_gain, dtype=np.int8)
    cdef const int32_t[::1] csi_i_v = np.ascontiguousarray(csi_i, dtype=np.int32)
    cdef const int32_t[::1] csi_q_v = np.ascontiguousarray(csi_q, dtype=np.int32)
    if peer.shape[0] != 6:
        raise ValueError("peer_addr must be 6 bytes")
    if (rssi_v.shape[0] != 16 or resv3_v.shape[0] != 16
            or agc_v.shape[0] != 16
            or csi_i_v.shape[0] != 512 or csi_q_v.shape[0] != 512):
        raise ValueError("bad array length")

    out = bytearray(CSI_FRAME_SIZE)
    cdef uint8_t[::1] o = out
    cdef uint8_t* p = &o[0]
    cdef Py_ssize_t k

    _wr_u32(p, magic)
    p[4] = vendor
    _wr_u32(p + 5, chip_id)
    _wr_u64(p + 9, timestamp_us)
    _wr_u32(p + 17, resv)
    _wr_u32(p + 21, bw)
    _wr_u32(p + 25, phy_mode)
    p[29] = resv_1
    _wr_u16(p + 30, resv_2)
    for k in range(6):
        p[32 + k] = peer[k]
    for k in range(16):
        _wr_u32(p + _OFF_RSSI + 4 * k, <uint32_t>rssi_v[k])
        _wr_u32(p + _OFF_RESV3 + 4 * k, <uint32_t>resv3_v[k])
        p[_OFF_AGC + k] = <uint8_t>agc_v[k]
    _wr_u16(p + _OFF_TAIL, <uint16_t>mcs)
    p[184] = <uint8_t>gi_type
    p[185] = <uint8_t>coding
    p[186] = <uint8_t>stbc
    p[187] = <uint8_t>resv_4
    p[188] = <uint8_t>dcm
    p[189] = <uint8_t>resv_5
    _wr_u64(p + 190, resv_6)
    _wr_u16(p + 198, <uint16_t>csi_cnt)
    for k in range(512):
        _wr_u32(p + _OFF_CSI_I + 4 * k, <uint32_t>csi_i_v[k])
        _wr_u32(p + _OFF_CSI_Q + 4 * k, <uint32_t>csi_q_v[k])
    return bytes(out)


def mag_phase(csi_i, csi_q):
    """Per-subcarrier magnitude and phase of integer I/Q samples.

    numpy's SIMD ufuncs already beat a scalar libm loop for this op, so
    the compiled backend uses the exact same path as the fallback.
    """
    i = np.asarray(csi_i, np.float64)
    q = np.asarray(csi_q, np.float64)
    return np.hypot(i, q), np.arctan2(q, i)


def channel_response(delays, amps, Py_ssize_t n_sub, Py_ssize_t fft_size):
    """Frequency response of a tapped-delay channel on n_sub tones."""
    cdef const int64_t[::1] d_v = np.ascontiguousarray(delays, dtype=np.int64)
    amps_c = np.ascontiguousarray(amps, dtype=np.complex128)
    cdef const double complex[::1] a_v = amps_c
    cdef Py_ssize_t n_taps = d_v.shape[0]
    if a_v.shape[0] != n_taps:
        raise ValueError("delay/amplitude length mismatch")
    h_arr = np.zeros(n_sub, dtype=np.complex128)
    cdef double complex[::1] h = h_arr
    cdef Py_ssize_t t, k
    cdef double step_c, step_s, c, s, nc, a_re, a_im, theta
    with nogil:
        for t in range(n_taps):
            theta = (-2.0 * M_PI) * (<double>d_v[t] / <double>fft_size)
            step_c = cos(theta)
            step_s = sin(theta)
            a_re = a_v[t].real
            a_im = a_v[t].imag
            # Rotation recurrence: one complex multiply per tone. Drift
            # over <= 512 steps stays far below the parity tolerance.
            c = 1.0
            s = 0.0
            for k in range(n_sub):
                h[k] = h[k] + (a_re * c - a_im * s) + 1j * (a_re * s + a_im * c)
                nc = c * step_c - s * step_s
                s = s * step_c + c * step_s
                c = nc
    return h_arr


def quantize_iq(re, im):
    """Round I/Q to integers and saturate at the 16-bit sample range."""
    cdef const double[::1] re_v = np.ascontiguousarray(re, dtype=np.float64)
    cdef const double[::1] im_v = np.ascontiguousarray(im, dtype=np.float64)
    cdef Py_ssize_t n = re_v.shape[0]
    if im_v.shape[0] != n:
        raise ValueError("I/Q length mismatch")
    i_arr = np.empty(n, dtype=np.int32)
    q_arr = np.empty(n, dtype=np.int32)
    cdef int32_t[::1] i_o = i_arr
    cdef int32_t[::1] q_o = q_arr
    cdef Py_ssize_t k
    cdef double v
    with nogil:
        for k in range(n):
            v = rint(re_v[k])
            if v < _INT16_MIN:
                v = _INT16_MIN
            elif v > _INT16_MAX:
                v = _INT16_MAX
            i_o[k] = <int32_t>v
            v = rint(im_v[k])
            if v < _INT16_MIN:
                v = _INT16_MIN
            elif v > _INT16_MAX:
                v = _INT16_MAX
            q_o[k] = <int32_t>v
    return i_arr, q_arr
