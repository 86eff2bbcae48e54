import csv
import logging
from collections import namedtuple

import numpy as np
import scipy.linalg

from .bias import dc_operating_point
from .hybrid_pi import small_signal_params
from .network import build_tia_network
from ..errors import HDSingularMatrixError, HDOutOfGridError, HDConfigError
from ..utils import stream_or_path

__all__ = ('ComplexSpectrum', 'ac_transimpedance', 'DetectorResponse', 'solve_detector')

l = logging.getLogger('hdkit.circuit.ac')

# relative KCL residual allowed per solve
_KCL_TOL = 1e-9


class ComplexSpectrum:
    """
    A complex transfer function sampled on a frequency grid, in Ohm for transimpedances.
    """

    __slots__ = ('freqs', 'values')

    def __init__(self, freqs, values):
        freqs = np.array(freqs, dtype=float)
        values = np.array(values, dtype=complex)
        if freqs.ndim != 1 or freqs.shape != values.shape or len(freqs) < 2:
            raise ValueError("freqs and values must be 1-d arrays of equal length >= 2")
        if not np.all(np.diff(freqs) > 0):
            raise ValueError("frequencies must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("transfer values must be finite")
        freqs.setflags(write=False)
        values.setflags(write=False)
        self.freqs = freqs
        self.values = values

    def __len__(self):
        return len(self.freqs)

    def __repr__(self):
        return '<ComplexSpectrum %d points [%g:%g] Hz>' % (len(self), self.freqs[0], self.freqs[-1])

    @property
    def magnitude(self):
        return np.abs(self.values)

    def power(self):
        """
        |Z|^2 per grid point.
        """
        return np.abs(self.values) ** 2

    def db(self):
        return 20.0 * np.log10(np.abs(self.values))

    def normalized(self):
        return ComplexSpectrum(self.freqs, self.values / self.values[0])

    def covers(self, f):
        f = np.asarray(f, dtype=float)
        span = self.freqs[-1] - self.freqs[0]
        return bool(np.all(f >= self.freqs[0] - 1e-9 * span) and np.all(f <= self.freqs[-1] + 1e-9 * span))

    def power_at(self, f):
        """
        |Z(f)|^2, interpolated linearly between grid points.

        :raises HDOutOfGridError: if ``f`` lies outside the grid.
        """
        if not self.covers(f):
            raise HDOutOfGridError("frequency outside transfer grid [%g, %g] Hz" % (self.freqs[0], self.freqs[-1]))
        return np.interp(f, self.freqs, self.power())

    def to_csv(self, dest):
        with stream_or_path(dest, 'w') as f:
            w = csv.writer(f, lineterminator='\n')
            w.writerow(('freq_hz', 're_ohm', 'im_ohm'))
            for fr, z in zip(self.freqs, self.values):
                w.writerow((repr(float(fr)), repr(float(z.real)), repr(float(z.imag))))

    @classmethod
    def from_csv(cls, src):
        rows = []
        with stream_or_path(src, 'r') as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ['freq_hz', 're_ohm', 'im_ohm']:
                raise HDConfigError("transfer file must start with the header freq_hz,re_ohm,im_ohm")
            for lineno, row in enumerate(reader, 2):
                if not row:
                    continue
                try:
                    rows.append((float(row[0]), complex(float(row[1]), float(row[2]))))
                except (ValueError, IndexError):
                    raise HDConfigError("line %d: expected three numbers" % lineno)
        try:
            return cls([r[0] for r in rows], [r[1] for r in rows])
        except ValueError as e:
            raise HDConfigError(str(e))


def ac_transimpedance(net, freqs):
    """
    Output voltage per unit input current of ``net`` at every frequency in ``freqs``.

    Each frequency assembles Y(f) and solves Y v = i densely; the KCL residual of every solve is checked. When the
    network has a buffer pole its single-pole response is applied to the output.

    :param LinearNetwork net:   The network.
    :param freqs:               Frequency grid (Hz).
    :rtype:                     ComplexSpectrum
    :raises HDSingularMatrixError: if Y(f) cannot be solved at some frequency.
    """
    freqs = np.asarray(freqs, dtype=float)
    i = net.excitation()
    out = net.index_of(net.output_node)
    values = np.empty(len(freqs), dtype=complex)
    for k, f in enumerate(freqs):
        Y = net.admittance(f)
        try:
            v = scipy.linalg.solve(Y, i, check_finite=False)
        except (scipy.linalg.LinAlgError, ValueError) as e:
            raise HDSingularMatrixError("nodal matrix is singular at %g Hz: %s" % (f, e))
        resid = np.linalg.norm(Y @ v - i)
        scale = np.linalg.norm(Y, np.inf) * np.linalg.norm(v) + np.linalg.norm(i)
        if not np.all(np.isfinite(v)) or resid > _KCL_TOL * scale:
            raise HDSingularMatrixError("nodal solve at %g Hz left KCL residual %.3e" % (f, resid))
        values[k] = v[out]
    if net.buffer_pole:
        values = values / (1.0 + 1j * freqs / net.buffer_pole)
    return ComplexSpectrum(freqs, values)


DetectorResponse = namedtuple('DetectorResponse', ('bias', 'hpi', 'network', 'Z'))


def solve_detector(model, freqs):
    """
    Bias, linearize and AC-solve the amplifier of ``model`` on ``freqs``.

    :rtype: DetectorResponse
    """
    bias = dc_operating_point(model.tia, model.hbt, model.constants)
    hpi = small_signal_params(model.hbt, bias, model.constants)
    net = build_tia_network(model.tia, hpi, model.input, model.hbt)
    Z = ac_transimpedance(net, freqs)
    l.debug("detector %s: I_C=%.4g A, |Z(%g Hz)|=%.4g Ohm", model.name, bias.I_C, Z.freqs[0], abs(Z.values[0]))
    return DetectorResponse(bias, hpi, net, Z)
