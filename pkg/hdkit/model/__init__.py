"""
Shared domain types of hdkit: physical constants, detector components, the aggregate DetectorModel, spectrum traces
and their on-disk formats.

All quantities are SI internally (Hz, A, V, F, W). dB and dBm appear only at I/O boundaries.
"""

# pylint: disable=wildcard-import
from .constants import *
from .components import *
from .detector import *
from .trace import *
from .config import *
from .presets import *
