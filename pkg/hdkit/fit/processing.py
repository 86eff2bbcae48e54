import csv
import logging

import numpy as np

from ..errors import HDGridMismatchError, HDConfigError
from ..model.trace import SpectrumTrace
from ..utils import db_to_lin, watt_to_dbm, stream_or_path

__all__ = ('S21Trace', 'subtract_noise_floor', 'de_embed', 'clearance_trace', 'CLIP_FRACTION')

l = logging.getLogger('hdkit.fit.processing')

# subtracted bins are clipped to this fraction of the floor
CLIP_FRACTION = 1e-3

_NEXT_STAGE = {
    'raw': 'danl_subtracted',
    'danl_subtracted': 'electronics_subtracted',
}


class S21Trace:
    """
    Insertion loss of a two-port (a cable or a board trace) on a frequency grid, in dB. Values are at most 0 dB for
    a passive two-port. Between grid points the loss is interpolated linearly in dB.
    """

    __slots__ = ('freqs', 's21_db')

    def __init__(self, freqs, s21_db):
        freqs = np.array(freqs, dtype=float)
        s21_db = np.array(s21_db, dtype=float)
        if freqs.ndim != 1 or freqs.shape != s21_db.shape or len(freqs) < 2:
            raise ValueError("freqs and s21_db must be 1-d arrays of equal length >= 2")
        if not np.all(np.diff(freqs) > 0):
            raise ValueError("S21 frequencies must be strictly increasing")
        if not np.all(np.isfinite(s21_db)):
            raise ValueError("S21 values must be finite")
        freqs.setflags(write=False)
        s21_db.setflags(write=False)
        self.freqs = freqs
        self.s21_db = s21_db

    def __repr__(self):
        return '<S21Trace %d points [%g:%g] Hz>' % (len(self.freqs), self.freqs[0], self.freqs[-1])

    def __eq__(self, other):
        if not isinstance(other, S21Trace):
            return NotImplemented
        return np.array_equal(self.freqs, other.freqs) and np.array_equal(self.s21_db, other.s21_db)

    __hash__ = None

    @classmethod
    def flat(cls, freqs, db):
        freqs = np.asarray(freqs, dtype=float)
        return cls(freqs, np.full(freqs.shape, float(db)))

    @classmethod
    def tilt(cls, freqs, db_per_hz, db0=0.0):
        """
        A loss falling linearly with frequency, e.g. ``db_per_hz=-1e-9`` for -1 dB/GHz.
        """
        freqs = np.asarray(freqs, dtype=float)
        return cls(freqs, db0 + db_per_hz * freqs)

    @classmethod
    def cascade(cls, first, *others):
        """
        Two-ports in series: insertion losses add in dB. The result uses the grid of ``first``.
        """
        total = np.array(first.s21_db)
        for other in others:
            total = total + other.db_at(first.freqs)
        return cls(first.freqs, total)

    def negated(self):
        return S21Trace(self.freqs, -self.s21_db)

    def covers(self, f):
        f = np.asarray(f, dtype=float)
        span = self.freqs[-1] - self.freqs[0]
        return bool(np.all(f >= self.freqs[0] - 1e-9 * span) and np.all(f <= self.freqs[-1] + 1e-9 * span))

    def db_at(self, f):
        """
        :raises HDGridMismatchError: if ``f`` is outside the S21 grid.
        """
        if not self.covers(f):
            raise HDGridMismatchError("S21 grid [%g, %g] Hz does not cover the requested frequencies"
                                      % (self.freqs[0], self.freqs[-1]))
        return np.interp(f, self.freqs, self.s21_db)

    def gain_at(self, f):
        """
        Linear power gain at ``f``.
        """
        return db_to_lin(self.db_at(f))

    def to_csv(self, dest):
        with stream_or_path(dest, 'w') as f:
            w = csv.writer(f, lineterminator='\n')
            w.writerow(('freq_hz', 's21_db'))
            for fr, v in zip(self.freqs, self.s21_db):
                w.writerow((repr(float(fr)), repr(float(v))))

    @classmethod
    def from_csv(cls, src):
        freqs, values = [], []
        with stream_or_path(src, 'r') as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ['freq_hz', 's21_db']:
                raise HDConfigError("S21 file must start with the header freq_hz,s21_db")
            for lineno, row in enumerate(reader, 2):
                if not row:
                    continue
                try:
                    freqs.append(float(row[0]))
                    values.append(float(row[1]))
                except (ValueError, IndexError):
                    raise HDConfigError("line %d: expected two numbers" % lineno)
        try:
            return cls(freqs, values)
        except ValueError as e:
            raise HDConfigError(str(e))


def _linear_pair(trace, floor):
    if not trace.same_grid(floor):
        raise HDGridMismatchError("trace and floor are on different frequency grids")
    if trace.unit != floor.unit:
        raise ValueError("trace is in %s but floor is in %s" % (trace.unit, floor.unit))
    return trace.linear(), floor.linear()


def subtract_noise_floor(trace, floor, stage=None):
    """
    Subtract ``floor`` from ``trace`` in linear power.

    Bins that would fall below 1e-3 of the floor are clipped there and flagged in the result's ``mask``. The stage
    advances from raw to danl_subtracted to electronics_subtracted unless ``stage`` is given.

    :raises HDGridMismatchError: if the two traces are on different grids.
    """
    x, fl = _linear_pair(trace, floor)
    diff = x - fl
    clip = CLIP_FRACTION * fl
    mask = diff < clip
    if np.any(mask):
        l.warning("%d of %d bins clipped after floor subtraction", int(np.sum(mask)), len(mask))
    values = np.where(mask, clip, diff)
    if trace.unit == 'dBm/Hz':
        values = watt_to_dbm(values)
    if stage is None:
        stage = _NEXT_STAGE.get(trace.stage, trace.stage)
    return trace.with_values(values, stage=stage, mask=mask)


def de_embed(trace, s21):
    """
    Refer ``trace`` to the device output by adding the insertion loss of ``s21`` back (in dB).

    :raises HDGridMismatchError: if the S21 grid does not cover the trace.
    """
    loss = s21.db_at(trace.freqs)
    if trace.is_log:
        values = trace.values - loss
    else:
        values = trace.values * db_to_lin(-loss)
    return trace.with_values(values, stage='deembedded', mask=trace.mask)


def clearance_trace(raw, dark, danl=None):
    """
    Measured shot-noise clearance: the ratio of the LO-on trace to the dark trace, after removing the analyzer floor
    from both when ``danl`` is given.

    :rtype: SpectrumTrace in unit ``ratio``
    """
    if danl is not None:
        raw = subtract_noise_floor(raw, danl)
        dark = subtract_noise_floor(dark, danl)
    x, d = _linear_pair(raw, dark)
    stage = 'danl_subtracted' if danl is not None else 'raw'
    return SpectrumTrace(raw.freqs, x / d, unit='ratio', rbw=raw.rbw, stage=stage)
