import logging
import dataclasses
from dataclasses import dataclass

import numpy as np

from ..errors import HDUnbalanceableError

__all__ = ('PhotocurrentPair', 'on_chip_power', 'photocurrents', 'balance_photocurrents', 'balanced_frontend',
           'rin_excess_psd')

l = logging.getLogger('hdkit.simulate.optics')


@dataclass(frozen=True)
class PhotocurrentPair:
    """
    DC photocurrents of the two diodes (A).
    """
    I_top: float
    I_bottom: float

    def __post_init__(self):
        if not (self.I_top >= 0 and self.I_bottom >= 0):
            raise ValueError("photocurrents must be non-negative")

    @property
    def total(self):
        return self.I_top + self.I_bottom

    @property
    def difference(self):
        return self.I_top - self.I_bottom


def on_chip_power(frontend, lo_power_offchip):
    """
    LO power reaching the splitter after one grating coupler (W).
    """
    if lo_power_offchip < 0:
        raise ValueError("LO power must be non-negative")
    return lo_power_offchip * frontend.coupler_transmission


def photocurrents(frontend, lo_power_offchip):
    """
    Photocurrents for an off-chip LO power ``lo_power_offchip`` (W).

    The top diode sees the splitter arm named by ``frontend.top_arm`` and the bottom diode the other one; the bottom
    diode's responsivity is scaled by ``qe_scale_bottom``.

    :rtype: PhotocurrentPair
    """
    p_on = on_chip_power(frontend, lo_power_offchip)
    return PhotocurrentPair(
        I_top=frontend.responsivity_top * frontend.top_fraction * p_on,
        I_bottom=frontend.responsivity_bottom * frontend.qe_scale_bottom * frontend.bottom_fraction * p_on,
    )


def balance_photocurrents(frontend, lo_power, tol=1e-9):
    """
    The bottom-diode quantum-efficiency scale that matches the two photocurrents at ``lo_power``.

    The scale is computed from the unscaled bottom current, so balancing an already balanced front end returns the
    same value.

    :param OpticalFrontEnd frontend:    The front end.
    :param float lo_power:              Off-chip LO power (W).
    :param float tol:                   Accepted current mismatch (A).
    :return:                            The new ``qe_scale_bottom``.
    :raises HDUnbalanceableError:       if balancing would need a scale above 1.
    """
    pair = photocurrents(frontend, lo_power)
    if abs(pair.difference) <= tol:
        return frontend.qe_scale_bottom
    p_on = on_chip_power(frontend, lo_power)
    unscaled = frontend.responsivity_bottom * frontend.bottom_fraction * p_on
    if not (pair.I_top > 0 and unscaled > 0):
        raise ValueError("balancing needs light on both photodiodes")
    scale = pair.I_top / unscaled
    if scale > 1.0 + 1e-12:
        raise HDUnbalanceableError("bottom diode is on the weaker arm: balancing needs a %.3f efficiency scale"
                                   % scale)
    scale = min(scale, 1.0)
    l.info("balanced bottom photodiode at %.4g W: qe scale %.4f", lo_power, scale)
    return scale


def balanced_frontend(frontend, lo_power, tol=1e-9):
    return dataclasses.replace(frontend, qe_scale_bottom=balance_photocurrents(frontend, lo_power, tol))


def rin_excess_psd(frontend, pair, f):
    """
    Classical intensity noise that survives the subtraction: (I_top - I_bottom)^2 * 10^(RIN/10) (A^2/Hz), flat in
    frequency. Zero when the LO is shot-noise limited.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError("frequency must be non-negative")
    if frontend.rin_dbchz is None:
        return np.zeros(f.shape)
    return np.full(f.shape, pair.difference ** 2 * 10.0 ** (frontend.rin_dbchz / 10.0))
