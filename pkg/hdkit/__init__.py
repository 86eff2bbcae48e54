"""
hdkit is a design, simulation and characterization toolkit for balanced homodyne detectors built from photodiodes
and a shunt-feedback transimpedance amplifier. It predicts bandwidth and noise from circuit parameters, synthesizes
spectrum analyzer measurement campaigns, and fits measured or simulated spectra for the detector's figures of merit.

The root configuration object is :class:`hdkit.model.DetectorModel`; presets are loaded with
:func:`hdkit.model.load_preset`.
"""

__version__ = (0, 1, 0)

if bytes is str:
    raise Exception("This module is designed for python 3 only. Please install an older version to use python 2.")

import logging
logging.getLogger("hdkit").addHandler(logging.NullHandler())

# pylint: disable=wildcard-import
from . import utils
from .errors import *
from .model import *
from .circuit import *
from .noise import *
from .simulate import *
from .fit import *
from .design import *
