import csv
import logging

import numpy as np

from ..errors import HDConfigError, HDOutOfGridError
from ..utils import dbm_to_watt, watt_to_dbm, stream_or_path

__all__ = ('SpectrumTrace', 'STAGES', 'UNITS', 'LOG_UNITS', 'make_grid')

l = logging.getLogger('hdkit.model.trace')

STAGES = ('raw', 'danl_subtracted', 'electronics_subtracted', 'deembedded')
UNITS = ('dBm/Hz', 'W/Hz', 'A2/Hz', 'ratio')
LOG_UNITS = ('dBm/Hz',)

# grid points closer than this (relative) to an edge count as inside
_EDGE_TOL = 1e-9


def _frozen(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def make_grid(f_lo, f_hi, n_points):
    """
    A linear frequency grid, as a swept spectrum analyzer produces.
    """
    if not f_hi > f_lo >= 0 or n_points < 2:
        raise ValueError("grid needs 0 <= f_lo < f_hi and at least two points")
    return np.linspace(f_lo, f_hi, int(n_points))


class SpectrumTrace:
    """
    A power spectral density on a frequency grid.

    :ivar freqs:    Strictly increasing frequencies (Hz)
    :ivar values:   One PSD value per bin, in ``unit``
    :ivar str unit: One of ``UNITS``: dBm/Hz (analyzer readout), W/Hz, A2/Hz (input-referred current) or ratio
    :ivar rbw:      Resolution bandwidth the trace was recorded with (Hz)
    :ivar stage:    Processing stage, one of ``STAGES``
    :ivar mask:     Boolean array marking bins that were clipped by a floor subtraction, or None
    """

    __slots__ = ('freqs', 'values', 'unit', 'rbw', 'stage', 'mask')

    def __init__(self, freqs, values, unit='dBm/Hz', rbw=100e3, stage='raw', mask=None):
        freqs = _frozen(freqs)
        values = _frozen(values)
        if freqs.ndim != 1 or freqs.shape != values.shape:
            raise ValueError("freqs and values must be 1-d arrays of equal length")
        if len(freqs) < 2:
            raise ValueError("a trace needs at least two bins")
        if not np.all(np.diff(freqs) > 0):
            raise ValueError("trace frequencies must be strictly increasing")
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(freqs)):
            raise ValueError("trace values must be finite")
        if unit not in UNITS:
            raise ValueError("unknown unit %r" % unit)
        if stage not in STAGES:
            raise ValueError("unknown stage %r" % stage)
        if not rbw > 0:
            raise ValueError("resolution bandwidth must be positive")
        self.freqs = freqs
        self.values = values
        self.unit = unit
        self.rbw = float(rbw)
        self.stage = stage
        self.mask = None if mask is None else _frozen(mask, dtype=bool)

    def __len__(self):
        return len(self.freqs)

    def __repr__(self):
        return '<SpectrumTrace %d bins [%g:%g] Hz, %s, %s>' % (len(self), self.freqs[0], self.freqs[-1], self.unit,
                                                               self.stage)

    def __eq__(self, other):
        if not isinstance(other, SpectrumTrace):
            return NotImplemented
        return (self.unit == other.unit and self.rbw == other.rbw and self.stage == other.stage
                and np.array_equal(self.freqs, other.freqs) and np.array_equal(self.values, other.values))

    __hash__ = None

    @property
    def is_log(self):
        return self.unit in LOG_UNITS

    def linear(self):
        """
        The values as linear power density: W/Hz for dBm/Hz traces, unchanged otherwise.
        """
        if self.unit == 'dBm/Hz':
            return dbm_to_watt(self.values)
        return np.array(self.values)

    def db(self):
        """
        The values on a logarithmic scale: dBm/Hz traces as-is, linear ones as 10*log10 of the value.
        """
        if self.is_log:
            return np.array(self.values)
        return 10.0 * np.log10(self.values)

    def in_unit(self, unit):
        """
        Convert between dBm/Hz and W/Hz. Other conversions are not defined.
        """
        if unit == self.unit:
            return self
        if (self.unit, unit) == ('dBm/Hz', 'W/Hz'):
            return self.with_values(dbm_to_watt(self.values), unit=unit)
        if (self.unit, unit) == ('W/Hz', 'dBm/Hz'):
            return self.with_values(watt_to_dbm(self.values), unit=unit)
        raise ValueError("cannot convert %s to %s" % (self.unit, unit))

    def with_values(self, values, unit=None, stage=None, mask=None):
        return SpectrumTrace(self.freqs, values, unit=self.unit if unit is None else unit, rbw=self.rbw,
                             stage=self.stage if stage is None else stage, mask=mask)

    def same_grid(self, other):
        return len(self.freqs) == len(other.freqs) and np.array_equal(self.freqs, other.freqs)

    def covers(self, f):
        f = np.asarray(f, dtype=float)
        span = self.freqs[-1] - self.freqs[0]
        return bool(np.all(f >= self.freqs[0] - _EDGE_TOL * span) and np.all(f <= self.freqs[-1] + _EDGE_TOL * span))

    def value_at(self, f):
        """
        Linear interpolation of the linear-power values at ``f``, returned as linear power.

        :raises HDOutOfGridError: if ``f`` lies outside the grid.
        """
        if not self.covers(f):
            raise HDOutOfGridError("frequency outside trace grid [%g, %g] Hz" % (self.freqs[0], self.freqs[-1]))
        return np.interp(f, self.freqs, self.linear())

    #
    # CSV I/O: header freq_hz,value,unit
    #

    def to_csv(self, dest):
        with stream_or_path(dest, 'w') as f:
            w = csv.writer(f, lineterminator='\n')
            w.writerow(('freq_hz', 'value', 'unit'))
            for fr, v in zip(self.freqs, self.values):
                w.writerow((repr(float(fr)), repr(float(v)), self.unit))

    @classmethod
    def from_csv(cls, src, rbw=100e3, stage='raw'):
        """
        Read a trace written by :meth:`to_csv`. Resolution bandwidth and stage are not part of the file format and
        are given by the caller (campaign manifests record them).
        """
        freqs, values, units = [], [], set()
        with stream_or_path(src, 'r') as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ['freq_hz', 'value', 'unit']:
                raise HDConfigError("trace file must start with the header freq_hz,value,unit")
            for lineno, row in enumerate(reader, 2):
                if not row:
                    continue
                if len(row) != 3:
                    raise HDConfigError("line %d: expected 3 columns, got %d" % (lineno, len(row)))
                try:
                    freqs.append(float(row[0]))
                    values.append(float(row[1]))
                except ValueError:
                    raise HDConfigError("line %d: not a number" % lineno)
                units.add(row[2].strip())
        if len(units) != 1:
            raise HDConfigError("trace file must use a single unit, found %s" % sorted(units))
        try:
            return cls(freqs, values, unit=units.pop(), rbw=rbw, stage=stage)
        except ValueError as e:
            raise HDConfigError(str(e))
