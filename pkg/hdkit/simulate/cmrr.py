import math
import logging
from dataclasses import dataclass

from ..circuit import solve_detector
from ..noise import LOAD_OHM
from ..utils import watt_to_dbm
from .optics import photocurrents

__all__ = ('CMRR_CAP_DB', 'REFERENCES', 'CMRRTones', 'cmrr_tones', 'simulate_cmrr_experiment')

l = logging.getLogger('hdkit.simulate.cmrr')

CMRR_CAP_DB = 80.0
REFERENCES = ('total', 'strong', 'weak')


@dataclass(frozen=True)
class CMRRTones:
    """
    Modulation tone powers at the analyzer (dBm) with one and with both photodiodes connected.
    """
    single_dbm: float
    both_dbm: float

    @property
    def cmrr_db(self):
        return self.single_dbm - self.both_dbm


def _single_current(pair, reference):
    if reference == 'total':
        # LO readjusted so the lone diode carries the whole photocurrent
        return pair.total
    if reference == 'strong':
        return max(pair.I_top, pair.I_bottom)
    if reference == 'weak':
        return min(pair.I_top, pair.I_bottom)
    raise ValueError("unknown single-diode reference %r (expected one of %s)" % (reference, ', '.join(REFERENCES)))


def cmrr_tones(model, Z, mod_freq, mod_depth, lo_power, reference='total'):
    """
    Tone powers of an intensity-modulated LO.

    A modulation depth m turns each photocurrent I into a tone of amplitude m*I. With both diodes connected only the
    difference of the two tones reaches the amplifier; with one diode its whole tone does. Both tones pass through
    the same transimpedance into the 50 Ohm load. The suppression is capped at 80 dB.

    :param ComplexSpectrum Z:   Transimpedance of the amplifier.
    :param float mod_freq:      Modulation frequency (Hz).
    :param float mod_depth:     Fractional modulation depth, in (0, 1).
    :param float lo_power:      Off-chip LO power (W).
    :param str reference:       Which single-diode configuration is the reference: ``total``, ``strong`` or
                                ``weak``.
    :rtype:                     CMRRTones
    """
    if not 0 < mod_depth < 1:
        raise ValueError("modulation depth must lie in (0, 1)")
    pair = photocurrents(model.frontend, lo_power)
    i_single = _single_current(pair, reference)
    if not i_single > 0:
        raise ValueError("CMRR needs light on the reference photodiode")
    z2 = float(Z.power_at(mod_freq))

    def tone_dbm(i):
        # rms tone current (m I / sqrt 2) into the matched load
        return float(watt_to_dbm(z2 * (mod_depth * i) ** 2 / 2.0 / (4 * LOAD_OHM)))

    single = tone_dbm(i_single)
    residual = abs(pair.difference)
    if residual == 0 or 20.0 * math.log10(i_single / residual) > CMRR_CAP_DB:
        both = single - CMRR_CAP_DB
    else:
        both = tone_dbm(residual)
    return CMRRTones(single_dbm=single, both_dbm=both)


def simulate_cmrr_experiment(model, mod_freq, mod_depth, lo_power, reference='total', Z=None):
    """
    Simulated common-mode rejection (dB) of ``model``: 20 log10(I_single / |I_top - I_bottom|), capped at 80 dB.
    """
    if Z is None:
        Z = solve_detector(model, [0.0, 2.0 * mod_freq]).Z
    tones = cmrr_tones(model, Z, mod_freq, mod_depth, lo_power, reference)
    l.debug("CMRR at %g Hz: single %.3f dBm, both %.3f dBm", mod_freq, tones.single_dbm, tones.both_dbm)
    return tones.cmrr_db
