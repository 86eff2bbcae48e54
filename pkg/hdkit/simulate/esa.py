"""
Spectrum analyzer traces of the virtual detector.

A trace is the device output noise (shot, electronic and surviving intensity noise, shaped by the transimpedance and
optionally attenuated by cable and board loss) plus the analyzer's displayed average noise level, all added in
linear power and read out in dBm/Hz.
"""
import logging

import numpy as np
import scipy.signal

from ..errors import HDOutOfGridError
from ..model.trace import SpectrumTrace
from ..noise import output_noise_psd, LOAD_OHM
from ..utils import dbm_to_watt, watt_to_dbm
from .optics import rin_excess_psd

__all__ = ('device_output_psd', 'analytic_esa_psd', 'analytic_esa_trace', 'danl_trace', 'monte_carlo_trace',
           'synthesize_noise', 'MIN_SAMPLES')

l = logging.getLogger('hdkit.simulate.esa')

MIN_SAMPLES = 2 ** 12


def device_output_psd(model, bias, hpi, Z, pair, freqs, s21=None):
    """
    Noise power density the device delivers to the analyzer input (W/Hz), without the analyzer's own floor.

    :param s21: Optional S21Trace of the cable and board between device and analyzer.
    """
    freqs = np.asarray(freqs, dtype=float)
    shot, electronic = output_noise_psd(model, bias, hpi, Z, pair.total, freqs)
    rin = Z.power_at(freqs) * rin_excess_psd(model.frontend, pair, freqs) / (4 * LOAD_OHM)
    psd = shot + electronic + rin
    if s21 is not None:
        psd = psd * s21.gain_at(freqs)
    return psd


def analytic_esa_psd(model, bias, hpi, Z, pair, freqs, s21=None):
    """
    Expected analyzer reading in W/Hz: device output plus DANL.
    """
    return device_output_psd(model, bias, hpi, Z, pair, freqs, s21) + float(dbm_to_watt(model.esa_danl_dbm_hz))


def analytic_esa_trace(model, bias, hpi, Z, pair, grid, rbw, s21=None):
    """
    The expected analyzer trace for photocurrents ``pair``, in dBm/Hz at stage ``raw``.

    :raises HDOutOfGridError: if ``grid`` reaches beyond the grid of ``Z``.
    """
    psd = analytic_esa_psd(model, bias, hpi, Z, pair, grid, s21)
    return SpectrumTrace(grid, watt_to_dbm(psd), unit='dBm/Hz', rbw=rbw, stage='raw')


def danl_trace(model, grid, rbw):
    """
    The analyzer's own floor, recorded with the input terminated.
    """
    grid = np.asarray(grid, dtype=float)
    return SpectrumTrace(grid, np.full(grid.shape, float(model.esa_danl_dbm_hz)), unit='dBm/Hz', rbw=rbw,
                         stage='raw')


def synthesize_noise(psd_fn, n_samples, fs, rng):
    """
    A stationary Gaussian record whose single-sided PSD is ``psd_fn(f)`` (units^2/Hz), made by shaping unit white
    noise in the frequency domain.

    Unit-variance white noise sampled at ``fs`` has a single-sided density of 2/fs, so each rfft bin is scaled by
    sqrt(S(f) fs / 2).
    """
    white = rng.standard_normal(n_samples)
    spectrum = np.fft.rfft(white)
    f = np.fft.rfftfreq(n_samples, d=1.0 / fs)
    spectrum *= np.sqrt(psd_fn(f) * fs / 2.0)
    return np.fft.irfft(spectrum, n=n_samples)


def monte_carlo_trace(model, bias, hpi, Z, pair, grid, rbw, n_samples=2 ** 16, n_averages=64, seed=0, s21=None,
                      oversample=1.25):
    """
    A stochastic analyzer trace whose expectation is :func:`analytic_esa_trace`.

    A time record sampled at ``2 * oversample * f_hi`` is synthesized from the analytic density and its PSD is
    estimated by averaging ``n_averages`` non-overlapping rectangular-window periodograms. The estimate is
    interpolated onto ``grid``; grid points below the first non-DC periodogram bin take that bin's value. The
    estimator resolution is the sampling rate over the segment length; ``rbw`` is recorded on the trace.

    :param seed:    An int or a ``numpy.random.SeedSequence``; equal seeds give bit-identical traces.
    :raises HDOutOfGridError: if ``grid`` reaches outside the transimpedance grid.
    """
    if n_samples < MIN_SAMPLES:
        raise ValueError("Monte Carlo traces need at least %d samples" % MIN_SAMPLES)
    if not 1 <= n_averages <= n_samples // 2:
        raise ValueError("bad number of averages %d" % n_averages)
    if not oversample >= 1:
        raise ValueError("oversample must be at least 1")
    grid = np.asarray(grid, dtype=float)
    if not Z.covers(grid):
        raise HDOutOfGridError("trace grid [%g, %g] Hz reaches outside the transfer grid [%g, %g] Hz"
                               % (grid[0], grid[-1], Z.freqs[0], Z.freqs[-1]))
    fs = 2.0 * oversample * grid[-1]
    lo, hi = Z.freqs[0], Z.freqs[-1]

    def psd_fn(f):
        # Z covers the trace grid; the density is held constant beyond it
        return analytic_esa_psd(model, bias, hpi, Z, pair, np.clip(f, lo, hi), s21)

    rng = np.random.default_rng(seed)
    record = synthesize_noise(psd_fn, n_samples, fs, rng)
    nperseg = n_samples // n_averages
    fw, pxx = scipy.signal.welch(record[:nperseg * n_averages], fs=fs, window='boxcar', nperseg=nperseg,
                                 noverlap=0, detrend=False, scaling='density', return_onesided=True)
    values = np.interp(grid, fw[1:], pxx[1:])
    l.debug("Monte Carlo trace: fs=%g Hz, %d segments of %d samples", fs, n_averages, nperseg)
    return SpectrumTrace(grid, watt_to_dbm(values), unit='dBm/Hz', rbw=rbw, stage='raw')
