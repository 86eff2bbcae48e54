"""
The virtual detector and its measurement campaigns.
"""

# pylint: disable=wildcard-import
from .optics import *
from .esa import *
from .cmrr import *
from .campaign import *
