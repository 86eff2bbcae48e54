"""
Design-space exploration: the bandwidth, gain and capacitance trade-off of the shunt-feedback amplifier and the
tuning of its bias resistors.
"""
import csv
import math
import logging
import dataclasses
from dataclasses import dataclass

import numpy as np

from .circuit.bandwidth import f3db_butterworth_estimate
from .circuit.bias import dc_operating_point
from .errors import HDError, HDInfeasibleError
from .model.constants import PhysicalConstants
from .utils import stream_or_path, dump_json

__all__ = ('DesignConstraints', 'FeedbackRange', 'select_feedback_resistor', 'BiasTuning', 'tune_bias_resistors',
           'InterconnectRow', 'interconnect_tradeoff', 'write_table_csv', 'table_to_json')

l = logging.getLogger('hdkit.design')

_R_C_RANGE = (10.0, 1e4)
_R_E_RANGE = (1.0, 1e3)
_GRID_POINTS = 25
_BIAS_RTOL = 1e-3


@dataclass(frozen=True)
class DesignConstraints:
    """
    Targets for choosing the feedback resistor.

    :ivar min_clearance_db:     Shot-noise clearance required at DC (dB)
    :ivar min_bandwidth:        Required -3 dB bandwidth (Hz)
    :ivar A0fA:                 Open-loop gain-bandwidth product (Hz)
    :ivar C_in:                 Total input capacitance (F)
    :ivar T:                    Temperature of the feedback resistor (K)
    :ivar termination_T:        Temperature of the 50 Ohm termination (K)
    :ivar termination_ohm:      Termination resistance (Ohm); its thermal noise is referred to the input through
                                a transimpedance of R_F
    :ivar base_shot:            Base shot noise 2 q I_C / beta (A^2/Hz) counted against the clearance, 0 to ignore
    """
    min_clearance_db: float
    min_bandwidth: float
    A0fA: float
    C_in: float
    T: float = 300.0
    termination_T: float = 300.0
    termination_ohm: float = 50.0
    base_shot: float = 0.0

    def __post_init__(self):
        for name in ('min_clearance_db', 'min_bandwidth', 'A0fA', 'C_in', 'T', 'termination_T', 'termination_ohm'):
            if not getattr(self, name) > 0:
                raise ValueError("design constraint %s must be positive" % name)
        if not self.base_shot >= 0:
            raise ValueError("base shot noise must be non-negative")


@dataclass(frozen=True)
class FeedbackRange:
    """
    Admissible feedback resistance. ``binding`` names the violated constraint when the range is empty.
    """
    lower: float
    upper: float
    feasible: bool
    binding: object = None


def _dc_noise(constraints, R_F, k_B):
    # input-referred white noise: feedback Johnson noise plus the termination seen through R_F
    g = 1.0 / R_F
    return (4 * k_B * constraints.T * g + 4 * k_B * constraints.termination_T * constraints.termination_ohm * g ** 2
            + constraints.base_shot)


def select_feedback_resistor(constraints, I_total_ref, constants=None):
    """
    The range of R_F meeting both the DC clearance and the bandwidth target.

    The lower bound makes the input-referred white noise small enough against the shot noise 2 q I_total_ref to
    reach ``min_clearance_db`` at DC. The upper bound inverts the Butterworth bandwidth estimate:
    R_F <= A0fA / (2 pi C_in f^2).

    :rtype: FeedbackRange
    """
    if not I_total_ref > 0:
        raise ValueError("reference photocurrent must be positive")
    if constants is None:
        constants = PhysicalConstants(T=constraints.T)
    k_B = constants.k_B
    upper = constraints.A0fA / (2 * math.pi * constraints.C_in * constraints.min_bandwidth ** 2)

    excess = 10.0 ** (constraints.min_clearance_db / 10.0) - 1.0
    budget = 2 * constants.q * I_total_ref / excess - constraints.base_shot
    if budget <= 0:
        l.info("base shot noise alone exceeds the clearance budget")
        return FeedbackRange(lower=math.inf, upper=upper, feasible=False, binding='clearance')
    a = 4 * k_B * constraints.termination_T * constraints.termination_ohm
    b = 4 * k_B * constraints.T
    g_max = (-b + math.sqrt(b * b + 4 * a * budget)) / (2 * a)
    lower = 1.0 / g_max

    if lower > upper:
        return FeedbackRange(lower=lower, upper=upper, feasible=False, binding='clearance')
    return FeedbackRange(lower=lower, upper=upper, feasible=True)


@dataclass(frozen=True)
class BiasTuning:
    R_C: float
    R_E: float
    bias: object


def _collector_current(tia, hbt, constants, R_C, R_E):
    try:
        return dc_operating_point(dataclasses.replace(tia, R_C=R_C, R_E=R_E), hbt, constants)
    except HDError:
        return None


def _log_grid(lo, hi):
    return np.logspace(math.log10(lo), math.log10(hi), _GRID_POINTS)


def tune_bias_resistors(target_IC, tia, hbt, constants):
    """
    Find (R_C, R_E) giving a collector current within 1% of ``target_IC`` without reaching breakdown.

    R_C candidates come from a log grid and are tried nearest to the current ``tia.R_C`` first. For each, R_E is
    scanned on a log grid for a pair of points bracketing the target, then refined by bisection in log R_E.

    :rtype: BiasTuning
    :raises HDInfeasibleError: if no grid point reaches the target.
    """
    if not target_IC > 0:
        raise HDInfeasibleError("the collector law never reaches %g A" % target_IC)
    candidates = sorted(set(_log_grid(*_R_C_RANGE)) | {tia.R_C}, key=lambda r: abs(math.log(r / tia.R_C)))
    r_e_grid = _log_grid(*_R_E_RANGE)

    for R_C in candidates:
        points = [(R_E, _collector_current(tia, hbt, constants, R_C, R_E)) for R_E in r_e_grid]
        for (lo, b_lo), (hi, b_hi) in zip(points, points[1:]):
            if b_lo is None or b_hi is None or not b_lo.I_C >= target_IC >= b_hi.I_C:
                continue
            best = min((b_lo, lo), (b_hi, hi), key=lambda t: abs(t[0].I_C - target_IC))
            for _ in range(60):
                if abs(best[0].I_C - target_IC) <= _BIAS_RTOL * target_IC:
                    break
                mid = math.sqrt(lo * hi)
                b_mid = _collector_current(tia, hbt, constants, R_C, mid)
                if b_mid is None:
                    break
                if b_mid.I_C > target_IC:
                    lo = mid
                else:
                    hi = mid
                best = (b_mid, mid)
            bias, R_E = best
            if abs(bias.I_C - target_IC) <= 0.01 * target_IC:
                assert bias.V_CE < hbt.V_breakdown
                l.info("bias tuned: R_C=%.4g R_E=%.4g I_C=%.4g A V_CE=%.3f V", R_C, R_E, bias.I_C, bias.V_CE)
                return BiasTuning(R_C=float(R_C), R_E=float(R_E), bias=bias)
    raise HDInfeasibleError("no (R_C, R_E) on the search grid reaches I_C = %g A" % target_IC)


@dataclass(frozen=True)
class InterconnectRow:
    """
    Bandwidth of an input node with an alternative interconnect, relative to the base design.
    """
    C_interconnect: float
    C_in: float
    ratio: float

    @property
    def speedup(self):
        """
        How much faster the base design is than this alternative.
        """
        return 1.0 / self.ratio


def interconnect_tradeoff(base, alternatives):
    """
    For every alternative interconnect capacitance, the -3 dB bandwidth relative to ``base`` at fixed gain-bandwidth
    product and R_F: sqrt(C_in_base / C_in_alt).

    :param InputNode base:  The reference input node.
    :param alternatives:    Interconnect capacitances (F).
    :return:                A list of :class:`InterconnectRow`.
    """
    rows = []
    for c in alternatives:
        if c < 0:
            raise ValueError("capacitance must be non-negative")
        alt = dataclasses.replace(base, C_interconnect=float(c))
        # unit gain-bandwidth and R_F cancel in the ratio
        ratio = f3db_butterworth_estimate(1.0, alt.C_in, 1.0) / f3db_butterworth_estimate(1.0, base.C_in, 1.0)
        rows.append(InterconnectRow(C_interconnect=float(c), C_in=alt.C_in, ratio=ratio))
    return rows


def _row_dict(row):
    d = dataclasses.asdict(row)
    for name in ('speedup',):
        if hasattr(row, name):
            d[name] = getattr(row, name)
    return d


def write_table_csv(rows, dest):
    """
    Write a list of design rows (dataclasses) as CSV with a header of their field names.
    """
    dicts = [_row_dict(r) for r in rows]
    with stream_or_path(dest, 'w') as f:
        if not dicts:
            return
        w = csv.DictWriter(f, fieldnames=list(dicts[0]), lineterminator='\n')
        w.writeheader()
        for d in dicts:
            w.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in d.items()})


def table_to_json(rows):
    return dump_json([_row_dict(r) for r in rows])
