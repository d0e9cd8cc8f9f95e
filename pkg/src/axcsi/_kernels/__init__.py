"""Hot-path kernels with a compiled core and a pure-Python fallback.

The compiled extension (axcsi._kernels._fast, built from _fast.pyx) is
preferred; when it is missing (source checkout without a build step,
unsupported platform) the numpy implementation in _ref is used instead.
Set AXCSI_KERNEL_BACKEND=python to force the fallback.
"""

import os

from . import _ref

if os.environ.get("AXCSI_KERNEL_BACKEND", "").lower() == "python":
    _impl = _ref
else:
    try:
        from . import _fast as _impl
    except ImportError:
        _impl = _ref

BACKEND = _impl.BACKEND

CSI_FRAME_SIZE = _impl.CSI_FRAME_SIZE
CSI_HEADER_SIZE = _impl.CSI_HEADER_SIZE
CSI_MAX_SUBCARRIERS = _impl.CSI_MAX_SUBCARRIERS

unpack_csi_frame = _impl.unpack_csi_frame
pack_csi_frame = _impl.pack_csi_frame
mag_phase = _impl.mag_phase
channel_response = _impl.channel_response
quantize_iq = _impl.quantize_iq
