import csv
import math
import logging

import numpy as np
import scipy.stats

from .engine import FitResult
from ..errors import HDNonPositiveInputError, HDConfigError
from ..utils import stream_or_path

__all__ = ('fit_loglog_gradient', 'read_points_csv', 'extract_cmrr', 'extract_responsivity',
           'grating_loss_from_loopback')

l = logging.getLogger('hdkit.fit.extract')


def fit_loglog_gradient(points):
    """
    Straight-line fit of log10(variance) against log10(photocurrent).

    A shot-noise limited detector gives a gradient of 1; classical intensity noise pushes it towards 2.

    :param points:  ``(I, variance)`` pairs; extra columns are ignored.
    :rtype:         FitResult with parameters ``gradient`` and ``intercept``
    :raises HDNonPositiveInputError: if a current or variance is not positive.
    """
    arr = np.asarray([tuple(p)[:2] for p in points], dtype=float)
    if arr.ndim != 2 or len(arr) < 3:
        raise ValueError("a gradient fit needs at least three points")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise HDNonPositiveInputError("log-log fits need positive currents and variances")
    x, y = np.log10(arr[:, 0]), np.log10(arr[:, 1])
    if np.ptp(x) == 0:
        raise ValueError("all photocurrents are equal")
    res = scipy.stats.linregress(x, y)
    resid = y - (res.intercept + res.slope * x)
    return FitResult(
        params={'gradient': float(res.slope), 'intercept': float(res.intercept)},
        std_errs={'gradient': float(res.stderr), 'intercept': float(res.intercept_stderr)},
        residual_norm=float(resid @ resid), converged=True, n_iter=0,
        extras={'r_value': float(res.rvalue), 'n_points': len(x)},
    )


def read_points_csv(src):
    """
    Read ``i_total_a,variance`` rows.
    """
    points = []
    with stream_or_path(src, 'r') as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ['i_total_a', 'variance']:
            raise HDConfigError("points file must start with the header i_total_a,variance")
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            try:
                points.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                raise HDConfigError("line %d: expected two numbers" % lineno)
    return points


def extract_cmrr(tone_single, tone_both):
    """
    Common-mode rejection (dB) from the tone with one photodiode and the tone with both (dBm).
    """
    if not (math.isfinite(tone_single) and math.isfinite(tone_both)):
        raise ValueError("tone powers must be finite")
    return tone_single - tone_both


def extract_responsivity(I_sum, lo_power_offchip, coupler_loss_db):
    """
    Photodiode responsivity (A/W) from the summed photocurrent and the off-chip LO power, referred to the chip
    through one grating coupler.
    """
    if not lo_power_offchip > 0:
        raise ValueError("LO power must be positive")
    return I_sum / (lo_power_offchip * 10.0 ** (-coupler_loss_db / 10.0))


def grating_loss_from_loopback(loopback_loss_db):
    """
    Per-coupler loss of a grating-to-grating loopback structure: half the total.
    """
    if loopback_loss_db < 0:
        raise ValueError("loopback loss must be non-negative")
    return loopback_loss_db / 2.0
