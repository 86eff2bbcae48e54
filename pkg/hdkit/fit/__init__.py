"""
The characterization pipeline: noise-floor subtraction, de-embedding and every parameter fit.
"""

# pylint: disable=wildcard-import
from .engine import *
from .processing import *
from .spectra import *
from .extract import *
