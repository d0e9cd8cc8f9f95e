"""802.11ax CSI toolkit for ZTE AX3000 access points.

Subpackages cover the full capture pipeline: wire codec, UDP session
controller, report collector with capture files, spectrum/statistics
analysis, a protocol-faithful AP emulator, an HTTP/WebSocket service and
a CLI front end.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND  # noqa: F401
