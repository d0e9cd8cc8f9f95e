"""Wire codec for the AX3000 CSI control protocol and CSI report record.

Everything on the wire is little-endian and fully packed (no padding).
Command datagrams carry a 64-bit magic (0xCAFE2025), a one-byte command
type and a type-specific payload:

    type 0x1  report enable     1 byte   (0 stop, 1 start)      10 bytes
    type 0x2  STA filter        6 bytes  (MAC, transmission order) 15
    type 0x3  CSI configuration 1 byte   (packed frame type)    10
    type 0x4  report target     4 bytes  (IPv4, first octet first) 13
    type 0x5  band selection    1 byte   (0 = 2.4 GHz, 1 = 5 GHz) 10
    type 0x6  availability check  none                           9

CSI reports are 4296-byte records: a 200-byte radio header followed by
512 int32 I samples and 512 int32 Q samples; only the first csi_cnt
entries of each array are meaningful. The report magic is a 32-bit word
whose high half must be 0xCAFE (the low half is not validated).

Encoding and decoding are pure functions over byte-strings; the
per-frame hot path is delegated to axcsi._kernels.
"""

import ipaddress
import struct
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from . import _kernels

COMMAND_MAGIC = 0xCAFE2025
COMMAND_MAGIC_BYTES = struct.pack("<Q", COMMAND_MAGIC)
CSI_MAGIC_HIGH = 0xCAFE

CSI_FRAME_SIZE = _kernels.CSI_FRAME_SIZE
CSI_MAX_SUBCARRIERS = _kernels.CSI_MAX_SUBCARRIERS

VENDOR_ZTE_AX3000 = 2
CHIP_ID_ZTE_AX3000 = 1

# Recommended packed frame type: QoS data (type 2b'10, subtype 4b'1000).
FRAME_TYPE_QOS_DATA = 0x22


class WireError(Exception):
    """Base for all codec failures."""


class EncodeError(WireError):
    """A value violates the wire contract for its field."""


class DecodeError(WireError):
    """Base for decode failures; every decoder raises a subclass."""


class BadMagic(DecodeError):
    """Magic field does not identify this protocol."""


class UnknownType(DecodeError):
    """Command type byte outside 1..6."""


class TruncatedPayload(DecodeError):
    """Datagram too short for its declared command type."""


class BadLength(DecodeError):
    """Datagram length does not match the fixed wire size."""


class BadValue(DecodeError):
    """A field decoded to a value outside its allowed set."""


class CsiCountOutOfRange(DecodeError):
    """csi_cnt must satisfy 0 < csi_cnt <= 512."""


class Band(IntEnum):
    """Radio band selector (the AP reports one band per boot)."""

    GHZ_2_4 = 0
    GHZ_5 = 1

    @classmethod
    def from_str(cls, text):
        name = text.strip().lower()
        if name in ("2.4g", "2.4ghz", "2g4", "2.4"):
            return cls.GHZ_2_4
        if name in ("5g", "5ghz", "5"):
            return cls.GHZ_5
        raise ValueError(f"unknown band {text!r} (expected '2.4g' or '5g')")

    def __str__(self):
        return "2.4g" if self is Band.GHZ_2_4 else "5g"


class Bandwidth(IntEnum):
    """PPDU bandwidth code carried in CSI reports (0..4)."""

    BW20 = 0
    BW40 = 1
    BW80 = 2
    BW160 = 3
    BW80P80 = 4  # 160 MHz as two 80 MHz segments

    @property
    def mhz(self):
        return (20, 40, 80, 160, 160)[self.value]

    @property
    def max_subcarriers(self):
        return (64, 128, 256, 512, 512)[self.value]


def parse_mac(text):
    """'01:02:03:04:05:06' (or '-' separated) -> 6 transmission-order bytes."""
    parts = text.replace("-", ":").split(":")
    if len(parts) != 6:
        raise ValueError(f"bad MAC address {text!r}")
    try:
        vals = [int(p, 16) for p in parts]
    except ValueError:
        raise ValueError(f"bad MAC address {text!r}") from None
    if any(not 0 <= v <= 0xFF for v in vals):
        raise ValueError(f"bad MAC address {text!r}")
    return bytes(vals)


def format_mac(raw):
    return ":".join(f"{b:02x}" for b in raw)


def parse_ipv4(text):
    """Dotted quad -> 4 wire-order bytes (first printed octet first)."""
    return ipaddress.IPv4Address(text).packed


def format_ipv4(raw):
    return str(ipaddress.IPv4Address(bytes(raw)))


def frame_type_from_subfields(type2, subtype4):
    """Pack 802.11 Type (2 bits) and Subtype (4 bits) into 0 0 B7..B2.

    QoS data (type 2b'10, subtype 4b'1000) packs to 0x22.
    """
    if not 0 <= type2 < 4:
        raise ValueError(f"type subfield {type2} out of range 0..3")
    if not 0 <= subtype4 < 16:
        raise ValueError(f"subtype subfield {subtype4} out of range 0..15")
    return (subtype4 << 2) | type2


# --- command payloads ----------------------------------------------------

@dataclass(frozen=True)
class ReportEnable:
    """Start (1) or stop (0) CSI reporting."""

    enable: int

    CMD_TYPE = 0x1
    WIRE_SIZE = 1

    def __post_init__(self):
        if self.enable not in (0, 1):
            raise ValueError(f"enable must be 0 or 1, got {self.enable}")

    def encode(self):
        return bytes([self.enable])

    @classmethod
    def decode(cls, data):
        if data[0] not in (0, 1):
            raise BadValue(f"enable byte must be 0 or 1, got {data[0]}")
        return cls(data[0])


@dataclass(frozen=True)
class StaFilter:
    """Restrict reporting to PPDUs from one STA (MAC in transmission order)."""

    mac: bytes

    CMD_TYPE = 0x2
    WIRE_SIZE = 6

    def __post_init__(self):
        if isinstance(self.mac, str):
            object.__setattr__(self, "mac", parse_mac(self.mac))
        else:
            object.__setattr__(self, "mac", bytes(self.mac))
        if len(self.mac) != 6:
            raise ValueError(f"MAC must be 6 bytes, got {len(self.mac)}")

    def encode(self):
        return self.mac

    @classmethod
    def decode(cls, data):
        return cls(data)


@dataclass(frozen=True)
class CsiConfig:
    """Select which PPDU frame type yields CSI (packed 0 0 B7..B2 byte)."""

    frame_type: int = FRAME_TYPE_QOS_DATA

    CMD_TYPE = 0x3
    WIRE_SIZE = 1

    def __post_init__(self):
        if not 0 <= self.frame_type <= 0xFF:
            raise ValueError(f"frame_type {self.frame_type} out of range 0..255")

    def encode(self):
        return bytes([self.frame_type])

    @classmethod
    def decode(cls, data):
        return cls(data[0])


@dataclass(frozen=True)
class ReportConfig:
    """Set the IPv4 address CSI reports are sent to."""

    target_ip: str

    CMD_TYPE = 0x4
    WIRE_SIZE = 4

    def __post_init__(self):
        # Normalize so decode(encode(x)) compares equal.
        object.__setattr__(self, "target_ip", format_ipv4(parse_ipv4(self.target_ip))
                           if isinstance(self.target_ip, str)
                           else format_ipv4(self.target_ip))

    def encode(self):
        return parse_ipv4(self.target_ip)

    @classmethod
    def decode(cls, data):
        return cls(format_ipv4(data))


@dataclass(frozen=True)
class BandConfig:
    """Select the band (one band per boot; switching requires reboot)."""

    band: Band

    CMD_TYPE = 0x5
    WIRE_SIZE = 1

    def __post_init__(self):
        object.__setattr__(self, "band", Band(self.band))

    def encode(self):
        return bytes([self.band.value])

    @classmethod
    def decode(cls, data):
        if data[0] not in (0, 1):
            raise BadValue(f"band byte must be 0 or 1, got {data[0]}")
        return cls(Band(data[0]))


@dataclass(frozen=True)
class CheckAvailability:
    """Ask the AP whether it is ready; a ready AP replies b'OK'."""

    CMD_TYPE = 0x6
    WIRE_SIZE = 0

    def encode(self):
        return b""

    @classmethod
    def decode(cls, data):
        return cls()


PAYLOAD_CLASSES = {
    cls.CMD_TYPE: cls
    for cls in (ReportEnable, StaFilter, CsiConfig, ReportConfig,
                BandConfig, CheckAvailability)
}

AVAILABILITY_REPLY = b"OK"


@dataclass(frozen=True)
class CommandFrame:
    """One configuration command: magic + type byte + payload."""

    cmd_type: int
    payload: object

    @classmethod
    def wrap(cls, payload):
        return cls(type(payload).CMD_TYPE, payload)

    @property
    def wire_size(self):
        return 9 + type(self.payload).WIRE_SIZE


def encode_command(frame):
    """CommandFrame -> fixed-size little-endian datagram."""
    payload_cls = PAYLOAD_CLASSES.get(frame.cmd_type)
    if payload_cls is None:
        raise EncodeError(f"unknown command type {frame.cmd_type}")
    if type(frame.payload) is not payload_cls:
        raise EncodeError(
            f"command type 0x{frame.cmd_type:x} requires {payload_cls.__name__}, "
            f"got {type(frame.payload).__name__}")
    return COMMAND_MAGIC_BYTES + bytes([frame.cmd_type]) + frame.payload.encode()


def decode_command(data):
    """Datagram -> CommandFrame.

    Raises BadMagic, UnknownType, TruncatedPayload or BadLength; never
    anything else on an arbitrary byte-string.
    """
    if len(data) < 8:
        raise TruncatedPayload(f"{len(data)} bytes is too short for the magic")
    magic = struct.unpack_from("<Q", data, 0)[0]
    if magic != COMMAND_MAGIC:
        raise BadMagic(f"magic 0x{magic:016X} != 0x{COMMAND_MAGIC:08X}")
    if len(data) < 9:
        raise TruncatedPayload("missing command type byte")
    cmd_type = data[8]
    payload_cls = PAYLOAD_CLASSES.get(cmd_type)
    if payload_cls is None:
        raise UnknownType(f"command type {cmd_type} outside 1..6")
    body = data[9:]
    if len(body) < payload_cls.WIRE_SIZE:
        raise TruncatedPayload(
            f"{payload_cls.__name__} payload needs {payload_cls.WIRE_SIZE} bytes, "
            f"got {len(body)}")
    if len(body) > payload_cls.WIRE_SIZE:
        raise BadLength(
            f"{payload_cls.__name__} datagram must be {9 + payload_cls.WIRE_SIZE} "
            f"bytes, got {len(data)}")
    return CommandFrame(cmd_type, payload_cls.decode(body))


# --- CSI report record ----------------------------------------------------

def _as_array(values, dtype, length, name):
    arr = np.ascontiguousarray(values, dtype=dtype)
    if arr.shape != (length,):
        raise ValueError(f"{name} must have shape ({length},), got {arr.shape}")
    return arr


@dataclass(eq=False)
class CsiDataFrame:
    """One CSI report: radio metadata plus 512-slot I/Q sample arrays.

    Field order matches the wire layout. Arrays are numpy int32 (rssi,
    resv_3, csi_i, csi_q) and int8 (agc_gain); only the first csi_cnt
    entries of csi_i/csi_q are meaningful.
    """

    magic: int
    vendor: int
    chip_id: int
    timestamp_us: int
    resv: int
    bw: int
    phy_mode: int
    resv_1: int
    resv_2: int
    peer_addr: bytes
    rssi: np.ndarray
    resv_3: np.ndarray
    agc_gain: np.ndarray
    mcs: int
    gi_type: int
    coding: int
    stbc: int
    resv_4: int
    dcm: int
    resv_5: int
    resv_6: int
    csi_cnt: int
    csi_i: np.ndarray
    csi_q: np.ndarray

    def __post_init__(self):
        self.peer_addr = bytes(self.peer_addr)
        self.rssi = _as_array(self.rssi, np.int32, 16, "rssi")
        self.resv_3 = _as_array(self.resv_3, np.int32, 16, "resv_3")
        self.agc_gain = _as_array(self.agc_gain, np.int8, 16, "agc_gain")
        self.csi_i = _as_array(self.csi_i, np.int32, 512, "csi_i")
        self.csi_q = _as_array(self.csi_q, np.int32, 512, "csi_q")

    @classmethod
    def build(cls, *, bw, csi_cnt, csi_i, csi_q, peer_addr=b"\x00" * 6,
              magic=(CSI_MAGIC_HIGH << 16) | 0x0001, vendor=VENDOR_ZTE_AX3000,
              chip_id=CHIP_ID_ZTE_AX3000, timestamp_us=0, resv=0, phy_mode=0,
              resv_1=0, resv_2=0, rssi=None, resv_3=None, agc_gain=None,
              mcs=0, gi_type=0, coding=0, stbc=0, resv_4=0, dcm=0, resv_5=0,
              resv_6=0):
        """Construct a frame with zero-filled reserved fields and arrays."""
        i = np.zeros(512, np.int32)
        q = np.zeros(512, np.int32)
        i[:len(csi_i)] = csi_i
        q[:len(csi_q)] = csi_q
        return cls(
            magic=magic, vendor=vendor, chip_id=chip_id,
            timestamp_us=timestamp_us, resv=resv, bw=int(bw),
            phy_mode=phy_mode, resv_1=resv_1, resv_2=resv_2,
            peer_addr=peer_addr,
            rssi=np.zeros(16, np.int32) if rssi is None else rssi,
            resv_3=np.zeros(16, np.int32) if resv_3 is None else resv_3,
            agc_gain=np.zeros(16, np.int8) if agc_gain is None else agc_gain,
            mcs=mcs, gi_type=gi_type, coding=coding, stbc=stbc,
            resv_4=resv_4, dcm=dcm, resv_5=resv_5, resv_6=resv_6,
            csi_cnt=int(csi_cnt), csi_i=i, csi_q=q)

    @property
    def bandwidth(self):
        """Bandwidth enum for the bw code; raises ValueError outside 0..4."""
        return Bandwidth(self.bw)

    @property
    def csi_cnt_exceeds_bw(self):
        """True when csi_cnt is larger than the bandwidth allows.

        Flagged rather than rejected: the decoder stays liberal. False
        when the bw code itself is out of range (nothing to compare to).
        """
        if not 0 <= self.bw <= 4:
            return False
        return self.csi_cnt > self.bandwidth.max_subcarriers

    def __eq__(self, other):
        if not isinstance(other, CsiDataFrame):
            return NotImplemented
        return (
            (self.magic, self.vendor, self.chip_id, self.timestamp_us,
             self.resv, self.bw, self.phy_mode, self.resv_1, self.resv_2,
             self.peer_addr, self.mcs, self.gi_type, self.coding, self.stbc,
             self.resv_4, self.dcm, self.resv_5, self.resv_6, self.csi_cnt)
            == (other.magic, other.vendor, other.chip_id, other.timestamp_us,
                other.resv, other.bw, other.phy_mode, other.resv_1,
                other.resv_2, other.peer_addr, other.mcs, other.gi_type,
                other.coding, other.stbc, other.resv_4, other.dcm,
                other.resv_5, other.resv_6, other.csi_cnt)
            and np.array_equal(self.rssi, other.rssi)
            and np.array_equal(self.resv_3, other.resv_3)
            and np.array_equal(self.agc_gain, other.agc_gain)
            and np.array_equal(self.csi_i, other.csi_i)
            and np.array_equal(self.csi_q, other.csi_q))


def _check_uint(value, bits, name):
    if not 0 <= value < (1 << bits):
        raise EncodeError(f"{name} {value} out of range for uint{bits}")


def _check_int(value, bits, name):
    lo = -(1 << (bits - 1))
    if not lo <= value < (1 << (bits - 1)):
        raise EncodeError(f"{name} {value} out of range for int{bits}")


def encode_csi_frame(frame):
    """CsiDataFrame -> 4296-byte record. Raises EncodeError on bad fields."""
    if (frame.magic >> 16) != CSI_MAGIC_HIGH:
        raise EncodeError(f"magic 0x{frame.magic:08X} high half != 0x{CSI_MAGIC_HIGH:04X}")
    _check_uint(frame.magic, 32, "magic")
    _check_uint(frame.vendor, 8, "vendor")
    _check_uint(frame.chip_id, 32, "chip_id")
    _check_uint(frame.timestamp_us, 64, "timestamp_us")
    _check_uint(frame.resv, 32, "resv")
    if not 0 <= frame.bw <= 4:
        raise EncodeError(f"bw code {frame.bw} out of range 0..4")
    _check_uint(frame.phy_mode, 32, "phy_mode")
    _check_uint(frame.resv_1, 8, "resv_1")
    _check_uint(frame.resv_2, 16, "resv_2")
    if len(frame.peer_addr) != 6:
        raise EncodeError(f"peer_addr must be 6 bytes, got {len(frame.peer_addr)}")
    _check_int(frame.mcs, 16, "mcs")
    for name in ("gi_type", "coding", "stbc", "resv_4", "dcm", "resv_5"):
        _check_int(getattr(frame, name), 8, name)
    _check_uint(frame.resv_6, 64, "resv_6")
    if not 0 < frame.csi_cnt <= CSI_MAX_SUBCARRIERS:
        raise EncodeError(f"csi_cnt {frame.csi_cnt} out of range 1..{CSI_MAX_SUBCARRIERS}")
    return _kernels.pack_csi_frame(
        frame.magic, frame.vendor, frame.chip_id, frame.timestamp_us,
        frame.resv, frame.bw, frame.phy_mode, frame.resv_1, frame.resv_2,
        frame.peer_addr, frame.rssi, frame.resv_3, frame.agc_gain,
        frame.mcs, frame.gi_type, frame.coding, frame.stbc, frame.resv_4,
        frame.dcm, frame.resv_5, frame.resv_6, frame.csi_cnt,
        frame.csi_i, frame.csi_q)


def decode_csi_frame(data):
    """4296-byte record -> CsiDataFrame.

    Raises BadLength (size != 4296), BadMagic (high half != 0xCAFE) or
    CsiCountOutOfRange; never anything else on an arbitrary byte-string.
    """
    if len(data) != CSI_FRAME_SIZE:
        raise BadLength(f"CSI record must be {CSI_FRAME_SIZE} bytes, got {len(data)}")
    # High half of the little-endian u32 magic: bytes 2..3. Checked
    # before the full unpack so garbage is rejected cheaply.
    if data[2:4] != b"\xfe\xca":
        magic = struct.unpack_from("<I", data, 0)[0]
        raise BadMagic(f"magic 0x{magic:08X} high half != 0x{CSI_MAGIC_HIGH:04X}")
    fields = _kernels.unpack_csi_frame(data)
    csi_cnt = fields[21]
    if not 0 < csi_cnt <= CSI_MAX_SUBCARRIERS:
        raise CsiCountOutOfRange(f"csi_cnt {csi_cnt} out of range 1..{CSI_MAX_SUBCARRIERS}")
    return CsiDataFrame(*fields)
