import math
import logging

import numpy as np

from .engine import FitResult, levenberg, covariance
from ..circuit.bandwidth import f3db_from_spectrum
from ..errors import HDNoCrossingError, HDRankDeficientError, HDNoConvergenceError
from ..noise import ClearanceModel, shot_noise_efficiency

__all__ = ('SHAPES', 'gain_shape', 'fit_bandwidth', 'fit_clearance', 'CLEARANCE_LEVELS_DB')

l = logging.getLogger('hdkit.fit.spectra')

SHAPES = ('first_order', 'butterworth')
CLEARANCE_LEVELS_DB = (10.0, 3.0, 1.0, 0.1)


def gain_shape(f, f3db, shape='first_order'):
    """
    Normalized power gain of an ideal shunt-feedback amplifier.

    ``first_order`` is 1/(1 + (f/f3db)^2), which is what the complex second-order expression reduces to once
    its imaginary factors cancel; ``butterworth`` is the true second-order magnitude 1/(1 + (f/f3db)^4). Both are
    -3 dB at ``f3db``.
    """
    x = (np.asarray(f, dtype=float) / f3db) ** 2
    if shape == 'first_order':
        return 1.0 / (1.0 + x)
    if shape == 'butterworth':
        return 1.0 / (1.0 + x ** 2)
    raise ValueError("unknown gain shape %r" % shape)


def _plateau(freqs, y):
    positive = freqs[freqs > 0]
    first = positive[0] if len(positive) else freqs[1]
    return float(np.mean(y[freqs <= 10.0 * first]))


def fit_bandwidth(trace, shape='first_order', strict=False):
    """
    Fit the plateau A0^2 and the -3 dB frequency of a de-embedded, noise-subtracted gain or noise trace.

    The fit runs in linear power with residuals relative to the model. A trace that does not roll off inside its
    grid gives an f3db beyond the grid; the result is then flagged ``in_band = False`` and not converged.

    :param SpectrumTrace trace: The trace.
    :param str shape:           ``first_order`` or ``butterworth``, see :func:`gain_shape`.
    :rtype:                     FitResult with parameters ``plateau`` and ``f3db_hz``
    """
    if shape not in SHAPES:
        raise ValueError("unknown gain shape %r" % shape)
    freqs = np.asarray(trace.freqs, dtype=float)
    y = np.asarray(trace.linear(), dtype=float)
    if np.any(y <= 0):
        raise ValueError("bandwidth fits need positive linear power")
    f_max = float(freqs[-1])
    try:
        f3_init = f3db_from_spectrum(trace)
    except (HDNoCrossingError, ValueError):
        f3_init = f_max

    def residuals(p):
        return y / (p[0] * gain_shape(freqs, p[1], shape)) - 1.0

    state = levenberg(residuals, [_plateau(freqs, y), f3_init])
    # the model depends on f3db only through its square
    plateau, f3 = float(state.params[0]), abs(float(state.params[1]))
    in_band = 0 < f3 <= f_max
    try:
        cov = covariance(residuals, state.params, len(y) - 2)
        errs = np.sqrt(np.clip(np.diag(cov), 0, None))
    except HDRankDeficientError:
        if in_band:
            raise
        errs = np.array([math.inf, math.inf])
    converged = state.converged and in_band
    if not in_band:
        l.warning("fitted bandwidth %.4g Hz lies beyond the trace grid (%.4g Hz)", f3, f_max)
    elif not converged:
        l.warning("bandwidth fit did not converge in %d iterations", state.n_iter)
    if strict and not converged:
        raise HDNoConvergenceError("bandwidth fit did not converge in band")
    return FitResult(
        params={'plateau': plateau, 'f3db_hz': f3},
        std_errs={'plateau': float(errs[0]), 'f3db_hz': float(errs[1])},
        residual_norm=state.cost, converged=converged, n_iter=state.n_iter,
        extras={'shape': shape, 'in_band': bool(in_band), 'A0': math.sqrt(plateau) if plateau > 0 else None},
    )


def fit_clearance(trace, fix_c_zero=False, levels_db=CLEARANCE_LEVELS_DB, strict=False):
    """
    Fit the clearance A / (B + C f^2) + 1 to a linear clearance ratio trace.

    A and C are fitted through their square roots so both stay non-negative; B is held at 1 because a common scaling
    of A, B and C leaves the curve unchanged. A is fitted first with C = 0; C is freed only if the cost falls as C
    leaves zero, so a trace without roll-off reports C = 0. Standard errors are computed for A and C directly. The
    result also reports the clearance at DC, the shot-noise efficiency there, and the frequencies where the fitted
    clearance falls to each of ``levels_db``.

    :param SpectrumTrace trace: Clearance ratio (unit ``ratio``) against frequency.
    :param bool fix_c_zero:     Fit A alone with C = 0.
    :rtype:                     FitResult with parameters ``A``, ``B`` and ``C``
    """
    freqs = np.asarray(trace.freqs, dtype=float)
    y = np.asarray(trace.linear(), dtype=float)
    if trace.unit != 'ratio':
        raise ValueError("clearance fits need a ratio trace, got %s" % trace.unit)
    if np.any(y <= 0):
        raise ValueError("clearance ratios must be positive")
    f_max = float(freqs[-1])
    c_unit = 1.0 / f_max ** 2

    def model(A, C):
        return A / (1.0 + C * freqs ** 2) + 1.0

    def natural(p):
        return y / model(p[0], p[1] * c_unit) - 1.0

    a_init = max(_plateau(freqs, y) - 1.0, 1e-6)
    excess_hi = float(np.mean(y[-max(1, len(y) // 50):])) - 1.0
    c_init = (a_init / excess_hi - 1.0) / f_max ** 2 if excess_hi > 0 else 0.0
    c_init = max(c_init, 1e-3 * c_unit)

    def flat_residuals(s):
        return y / model(s[0] ** 2, 0.0) - 1.0

    state = levenberg(flat_residuals, [math.sqrt(a_init)])
    A, C = float(state.params[0]) ** 2, 0.0

    if fix_c_zero:
        cov = covariance(lambda p: natural([p[0], 0.0]), [A], len(y) - 1)
        errs = {'A': math.sqrt(max(cov[0, 0], 0.0)), 'B': 0.0, 'C': 0.0}
    else:
        # d(cost)/dC at C = 0 in units of c_unit; when it is not negative C stays on its bound
        m0 = A + 1.0
        slope = float(np.sum(flat_residuals([math.sqrt(A)]) * y * A * (freqs / f_max) ** 2)) / m0 ** 2
        if slope < 0:
            def residuals(s):
                return y / model(s[0] ** 2, s[1] ** 2 * c_unit) - 1.0

            start = math.sqrt(A) if A > 0 else math.sqrt(a_init)
            state = levenberg(residuals, [start, math.sqrt(c_init / c_unit)])
            A = float(state.params[0]) ** 2
            C = float(state.params[1]) ** 2 * c_unit
        else:
            l.info("clearance shows no roll-off; C held at zero")
        # C is taken in units of c_unit, where the fitted C may sit at zero
        cov = covariance(natural, [A, C / c_unit], len(y) - 2, scale=[A if A > 0 else 1.0, 1.0])
        errs = {'A': math.sqrt(max(cov[0, 0], 0.0)), 'B': 0.0, 'C': math.sqrt(max(cov[1, 1], 0.0)) * c_unit}

    cm = ClearanceModel(A=A, B=1.0, C=C)
    crossings = {}
    for level in levels_db:
        f = cm.frequency_at_db(level)
        if f > f_max:
            l.info("clearance reaches %g dB at %.4g Hz, beyond the trace grid (extrapolated)", level, f)
        crossings[repr(float(level))] = f
    dc_db = cm.dc_db()
    if not state.converged:
        if strict:
            raise HDNoConvergenceError("clearance fit did not converge")
        l.warning("clearance fit did not converge in %d iterations", state.n_iter)
    return FitResult(
        params={'A': A, 'B': 1.0, 'C': C},
        std_errs=errs,
        residual_norm=state.cost, converged=state.converged, n_iter=state.n_iter,
        extras={
            'dc_clearance_db': dc_db,
            'dc_efficiency': float(shot_noise_efficiency(dc_db)) if dc_db >= 0 else 0.0,
            'f_at_db_hz': crossings,
            'c_fixed_zero': bool(fix_c_zero),
        },
    )
