import math
import logging

import numpy as np

from ..errors import HDNoCrossingError

__all__ = ('f3db_butterworth_estimate', 'gain_bandwidth_product', 'f3db_from_spectrum', 'HALF_POWER_DB')

l = logging.getLogger('hdkit.circuit.bandwidth')

HALF_POWER_DB = 10.0 * math.log10(2.0)
_PLATEAU_FLATNESS_DB = 1.0


def f3db_butterworth_estimate(A0fA, C_in, R_F):
    """
    -3 dB bandwidth of a single-stage shunt-feedback amplifier tuned for a Butterworth response:
    sqrt(A0fA / (2 pi C_in R_F)).

    :param A0fA:    Open-loop gain-bandwidth product (Hz)
    :param C_in:    Total input capacitance (F)
    :param R_F:     Feedback resistance (Ohm)
    """
    if not (A0fA > 0 and C_in > 0 and R_F > 0):
        raise ValueError("gain-bandwidth product, capacitance and resistance must be positive")
    return math.sqrt(A0fA / (2 * math.pi * C_in * R_F))


def gain_bandwidth_product(hbt):
    """
    Open-loop gain-bandwidth product of the amplifier: (C_I/C_L) * f_T.
    """
    if not hbt.C_ratio > 0:
        raise ValueError("C_ratio must be positive")
    return hbt.C_ratio * hbt.f_T


def _levels_db(spec):
    # ComplexSpectrum carries amplitudes, SpectrumTrace carries power densities
    if hasattr(spec, 'power') and not hasattr(spec, 'unit'):
        return 10.0 * np.log10(spec.power())
    return spec.db()


def f3db_from_spectrum(spec):
    """
    The frequency where the power response first falls 3.0103 dB below its low-frequency plateau.

    The plateau is the mean level over the first decade of the grid (from the first positive frequency up to ten
    times it), which must be flat within 1 dB. The crossing is interpolated linearly in dB against log-frequency.

    :param spec:    A ComplexSpectrum or a SpectrumTrace.
    :raises HDNoCrossingError: if the response never drops 3 dB inside the grid.
    :raises ValueError: if there is no flat plateau.
    """
    freqs = np.asarray(spec.freqs, dtype=float)
    levels = _levels_db(spec)
    positive = freqs[freqs > 0]
    if not len(positive):
        raise ValueError("spectrum has no positive frequencies")
    decade = freqs <= 10.0 * positive[0]
    plateau = levels[decade]
    if np.ptp(plateau) > _PLATEAU_FLATNESS_DB:
        raise ValueError("no flat low-frequency plateau (%.2f dB ripple over the first decade)" % np.ptp(plateau))
    target = np.mean(plateau) - HALF_POWER_DB

    below = np.nonzero(levels < target)[0]
    below = below[below > 0]
    if not len(below):
        raise HDNoCrossingError("response stays within 3 dB of its plateau up to %g Hz" % freqs[-1])
    k = below[0]
    f0, f1 = freqs[k - 1], freqs[k]
    y0, y1 = levels[k - 1], levels[k]
    t = (y0 - target) / (y0 - y1)
    if f0 > 0:
        return float(10 ** (math.log10(f0) + t * (math.log10(f1) - math.log10(f0))))
    return float(f0 + t * (f1 - f0))
