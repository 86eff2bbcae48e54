"""
DC operating point and small-signal AC analysis of the two-stage amplifier, and closed-form bandwidth estimates.
"""

# pylint: disable=wildcard-import
from .bias import *
from .hybrid_pi import *
from .network import *
from .ac import *
from .bandwidth import *
