import io
import json
import math

import numpy as np
import numpy.testing as npt
import scipy.signal

import hdkit
from hdkit import (least_squares, levenberg, fit_bandwidth, fit_clearance, fit_loglog_gradient, gain_shape,
                   subtract_noise_floor, de_embed, clearance_trace, extract_cmrr, extract_responsivity,
                   grating_loss_from_loopback, read_points_csv, S21Trace, SpectrumTrace, FitResult, make_grid,
                   synthesize_noise, run_lo_sweep, LOSweep, variance_vs_photocurrent)
from hdkit.fit.engine import jacobian

GRID = make_grid(10e6, 26.5e9, 4096)


def _line(x, a, b):
    return a * x + b


def test_exact_line():
    x = np.arange(10.0)
    res = least_squares(_line, (x, 3.0 * x + 2.0), [1.0, 1.0])
    npt.assert_allclose([res['p0'], res['p1']], [3.0, 2.0], rtol=1e-9)
    assert res.residual_norm < 1e-20
    assert res.converged


def test_start_at_optimum():
    x = np.arange(10.0)
    res = least_squares(_line, (x, _line(x, 3.0, 2.0)), {'slope': 3.0, 'offset': 2.0})
    assert res.converged
    assert res.n_iter <= 2
    assert res['slope'] == 3.0 and res['offset'] == 2.0


def test_exact_fit_reaches_gradient_tolerance():
    x = np.arange(10.0)
    y = 3.0 * x + 2.0
    res = least_squares(_line, (x, y), [1.0, 1.0])
    p = np.array([res['p0'], res['p1']])
    r = y - _line(x, *p)
    g = jacobian(lambda q: y - _line(x, *q), p, r).T @ r
    assert res.converged
    assert np.linalg.norm(g) < 1e-10


def test_exact_exponential():
    x = np.linspace(0, 1, 30)
    y = 2.0 * np.exp(1.5 * x)
    state = levenberg(lambda p: p[0] * np.exp(p[1] * x) - y, [1.0, 1.0])
    assert state.converged
    npt.assert_allclose(state.params, [2.0, 1.5], rtol=1e-9)


def test_noisy_quadratic_within_three_sigma():
    rng = np.random.default_rng(12)
    x = np.linspace(-1, 1, 50)
    truth = np.array([2.0, -1.0, 0.5])
    hits = 0
    for _ in range(100):
        y = truth[0] * x ** 2 + truth[1] * x + truth[2] + rng.normal(0, 0.05, x.shape)
        res = least_squares(lambda x, a, b, c: a * x ** 2 + b * x + c, (x, y), [1.0, 1.0, 1.0])
        est = np.array([res['p0'], res['p1'], res['p2']])
        err = np.array([res.std_errs['p0'], res.std_errs['p1'], res.std_errs['p2']])
        hits += bool(np.all(np.abs(est - truth) <= 3 * err))
    assert hits >= 95


def test_degenerate_parameters():
    x = np.linspace(1, 10, 20)
    try:
        levenberg(lambda p: p[0] * p[1] * x - 2 * x, [1.0, 3.0])
    except hdkit.HDRankDeficientError:
        pass
    else:
        assert False


def test_strict_non_convergence():
    x = np.linspace(0, 1, 30)
    y = np.exp(3 * x)
    try:
        least_squares(lambda x, a, b: a * np.exp(b * x), (x, y), [1.0, 1.0], max_iter=1, strict=True)
    except hdkit.HDNoConvergenceError:
        pass
    else:
        assert False


def test_fit_result_json():
    res = FitResult(params={'a': 1.0}, std_errs={'a': math.inf}, residual_norm=0.0, converged=True, n_iter=3,
                    extras={'f_at_db_hz': {'10.0': math.inf}, 'shape': 'first_order'})
    d = json.loads(res.to_json())
    assert d['std_errs']['a'] is None
    assert d['extras']['f_at_db_hz']['10.0'] is None
    assert d['extras']['shape'] == 'first_order'


#
# trace processing
#

def _w_trace(values, stage='raw'):
    return SpectrumTrace(GRID, values, unit='W/Hz', stage=stage)


def test_subtract_floor_exact():
    rng = np.random.default_rng(2)
    floor = _w_trace(rng.uniform(1e-21, 2e-21, len(GRID)))
    x = rng.uniform(1e-21, 1e-19, len(GRID))
    out = subtract_noise_floor(_w_trace(floor.values + x), floor)
    npt.assert_allclose(out.values, x, rtol=1e-9)
    assert out.stage == 'danl_subtracted'
    assert not np.any(out.mask)
    assert subtract_noise_floor(out, floor).stage == 'electronics_subtracted'


def test_subtract_floor_from_itself():
    floor = SpectrumTrace(GRID, np.full(len(GRID), -160.0))
    out = subtract_noise_floor(floor, floor)
    assert np.all(out.mask)
    npt.assert_allclose(out.values, -190.0, rtol=1e-12)


def test_subtract_floor_grid_mismatch():
    floor = SpectrumTrace(GRID[:100], np.full(100, -160.0))
    try:
        subtract_noise_floor(SpectrumTrace(GRID, np.full(len(GRID), -150.0)), floor)
    except hdkit.HDGridMismatchError:
        pass
    else:
        assert False


def test_de_embed():
    trace = SpectrumTrace(GRID, np.full(len(GRID), -150.0))
    assert np.array_equal(de_embed(trace, S21Trace.flat(GRID, 0.0)).values, trace.values)
    npt.assert_allclose(de_embed(trace, S21Trace.flat(GRID, -3.0)).values, -147.0, rtol=1e-12)
    assert de_embed(trace, S21Trace.flat(GRID, -3.0)).stage == 'deembedded'


def test_de_embed_tilt():
    s21 = S21Trace.tilt(GRID, -1e-9)
    tilted = SpectrumTrace(GRID, -150.0 + s21.s21_db)
    npt.assert_allclose(de_embed(tilted, s21).values, -150.0, atol=1e-9)


def test_de_embed_linear_trace():
    trace = _w_trace(np.full(len(GRID), 1e-20))
    npt.assert_allclose(de_embed(trace, S21Trace.flat(GRID, -10.0)).values, 1e-19, rtol=1e-12)


def test_de_embed_uncovered():
    try:
        de_embed(SpectrumTrace(GRID, np.full(len(GRID), -150.0)), S21Trace.flat([0.0, 10e9], -1.0))
    except hdkit.HDGridMismatchError:
        pass
    else:
        assert False


def test_de_embed_undone_by_negated_s21():
    rng = np.random.default_rng(4)
    s21 = S21Trace.tilt([0.0, 30e9], -1e-10, db0=-0.5)
    trace = SpectrumTrace(GRID, rng.uniform(-160.0, -140.0, len(GRID)))
    back = de_embed(de_embed(trace, s21), s21.negated())
    npt.assert_allclose(back.values, trace.values, atol=1e-9)


def test_clearance_trace():
    danl = _w_trace(np.full(len(GRID), 1e-21))
    dark = _w_trace(np.full(len(GRID), 3e-21))
    raw = _w_trace(np.full(len(GRID), 21e-21))
    ratio = clearance_trace(raw, dark, danl)
    assert ratio.unit == 'ratio'
    npt.assert_allclose(ratio.values, 10.0, rtol=1e-9)
    npt.assert_allclose(clearance_trace(raw, dark).values, 7.0, rtol=1e-12)


#
# bandwidth
#

def _bandwidth_trace(f3, rng=None, noise_db=0.0, shape='first_order'):
    values = 1e-17 * gain_shape(GRID, f3, shape)
    if rng is not None:
        values = values * 10 ** (rng.normal(0, noise_db, len(GRID)) / 10)
    return _w_trace(values, stage='deembedded')


def test_gain_shapes():
    for shape in ('first_order', 'butterworth'):
        npt.assert_allclose(gain_shape(19.8e9, 19.8e9, shape), 0.5, rtol=1e-12)
    try:
        gain_shape(1.0, 1.0, 'chebyshev')
    except ValueError:
        pass
    else:
        assert False


def test_bandwidth_noiseless():
    res = fit_bandwidth(_bandwidth_trace(5e9))
    npt.assert_allclose(res['f3db_hz'], 5e9, rtol=1e-6)
    npt.assert_allclose(res['plateau'], 1e-17, rtol=1e-6)
    assert res.extras['in_band']
    assert res.converged


def test_bandwidth_butterworth_shape():
    res = fit_bandwidth(_bandwidth_trace(8e9, shape='butterworth'), shape='butterworth')
    npt.assert_allclose(res['f3db_hz'], 8e9, rtol=1e-6)


def test_bandwidth_with_noise():
    rng = np.random.default_rng(198)
    res = fit_bandwidth(_bandwidth_trace(19.8e9, rng, 0.2))
    assert abs(res['f3db_hz'] - 19.8e9) <= 0.1e9
    assert res.std_errs['f3db_hz'] < 0.1e9


def test_bandwidth_recovery_rate():
    rng = np.random.default_rng(3)
    hits = 0
    for _ in range(200):
        res = fit_bandwidth(_bandwidth_trace(19.8e9, rng, 0.2))
        hits += abs(res['f3db_hz'] / 19.8e9 - 1) <= 0.005
    assert hits >= 197


def test_bandwidth_flat_trace():
    res = fit_bandwidth(_w_trace(np.full(len(GRID), 1e-17)))
    assert not res.extras['in_band']
    assert not res.converged
    assert res['f3db_hz'] > GRID[-1]
    try:
        fit_bandwidth(_w_trace(np.full(len(GRID), 1e-17)), strict=True)
    except hdkit.HDNoConvergenceError:
        pass
    else:
        assert False


def test_bandwidth_independent_of_gain():
    rng = np.random.default_rng(77)
    trace = _bandwidth_trace(12e9, rng, 0.2)
    base = fit_bandwidth(trace)
    for k in (1e-3, 7.5, 1e4):
        scaled = fit_bandwidth(_w_trace(trace.values * k, stage='deembedded'))
        npt.assert_allclose(scaled['f3db_hz'], base['f3db_hz'], rtol=1e-9)
        npt.assert_allclose(scaled['plateau'], k * base['plateau'], rtol=1e-9)


#
# clearance
#

A_PLANT = 10 ** 1.5 - 1
C_PLANT = (A_PLANT / 9.0 - 1) / 26.5e9 ** 2


def _clearance_trace(A, C, rng=None, noise=0.0):
    values = A / (1 + C * GRID ** 2) + 1
    if rng is not None:
        values = values * (1 + rng.normal(0, noise, len(GRID)))
    return SpectrumTrace(GRID, values, unit='ratio')


def test_clearance_recovery():
    rng = np.random.default_rng(30)
    for _ in range(10):
        res = fit_clearance(_clearance_trace(A_PLANT, C_PLANT, rng, 0.01))
        assert abs(res['A'] / A_PLANT - 1) < 0.05
        assert abs(res['C'] / C_PLANT - 1) < 0.05
        assert res['B'] == 1.0


def test_clearance_crossing_at_grid_edge():
    res = fit_clearance(_clearance_trace(A_PLANT, C_PLANT))
    npt.assert_allclose(res.extras['dc_clearance_db'], 15.0, atol=1e-6)
    npt.assert_allclose(res.extras['dc_efficiency'], 0.968, atol=1e-3)
    step = GRID[1] - GRID[0]
    assert abs(res.extras['f_at_db_hz']['10.0'] - 26.5e9) <= step
    assert res.extras['f_at_db_hz']['0.1'] > 26.5e9


def test_clearance_without_roll_off():
    rng = np.random.default_rng(31)
    res = fit_clearance(_clearance_trace(A_PLANT, 0.0, rng, 0.01))
    assert 0 < res.std_errs['C'] < math.inf
    assert res['C'] <= 3 * res.std_errs['C']
    assert abs(res['A'] / A_PLANT - 1) < 0.05


def test_clearance_with_fixed_c():
    rng = np.random.default_rng(32)
    res = fit_clearance(_clearance_trace(A_PLANT, 0.0, rng, 0.01), fix_c_zero=True)
    assert res['C'] == 0.0
    assert res.extras['c_fixed_zero']
    assert res.extras['f_at_db_hz']['10.0'] == math.inf
    assert abs(res['A'] / A_PLANT - 1) < 0.01


def test_flat_clearance_with_fixed_c_converges_at_once():
    trace = SpectrumTrace(GRID, np.full(len(GRID), 10 ** 1.5), unit='ratio')
    res = fit_clearance(trace, fix_c_zero=True, strict=True)
    assert res.converged
    assert res.n_iter <= 2
    npt.assert_allclose(res.extras['dc_clearance_db'], 15.0, atol=1e-9)


def test_flat_clearance_keeps_c_at_zero():
    trace = SpectrumTrace(GRID, np.full(len(GRID), 10 ** 1.5), unit='ratio')
    res = fit_clearance(trace, strict=True)
    assert res.converged
    assert 0.0 <= res['C'] < 1e-6 / GRID[-1] ** 2
    assert math.isfinite(res.std_errs['C'])
    npt.assert_allclose(res['A'], A_PLANT, rtol=1e-9)


def test_clearance_needs_ratio():
    try:
        fit_clearance(_w_trace(np.full(len(GRID), 2.0)))
    except ValueError:
        pass
    else:
        assert False


#
# extraction
#

def test_gradient_exact():
    i = np.logspace(-7, -2, 9)
    res = fit_loglog_gradient(list(zip(i, 3e-17 * i)))
    npt.assert_allclose(res['gradient'], 1.0, atol=1e-12)
    res = fit_loglog_gradient(list(zip(i, 3e-17 * i ** 2)))
    npt.assert_allclose(res['gradient'], 2.0, atol=1e-12)


def test_gradient_rejects_non_positive():
    try:
        fit_loglog_gradient([(1e-3, 1e-20), (2e-3, -1e-20), (3e-3, 3e-20)])
    except hdkit.HDNonPositiveInputError:
        pass
    else:
        assert False
    try:
        fit_loglog_gradient([(1e-3, 1e-20), (2e-3, 2e-20)])
    except ValueError:
        pass
    else:
        assert False


def test_points_csv():
    points = read_points_csv(io.StringIO("i_total_a,variance\n1e-3,2e-20\n2e-3,4e-20\n"))
    assert points == [(1e-3, 2e-20), (2e-3, 4e-20)]
    try:
        read_points_csv(io.StringIO("current,var\n1,2\n"))
    except hdkit.HDConfigError:
        pass
    else:
        assert False


def test_cmrr():
    assert extract_cmrr(-40.0, -67.0) == 27.0
    assert extract_cmrr(-40.0, -40.0) == 0.0


def test_responsivity():
    npt.assert_allclose(extract_responsivity(1.871e-3, 10e-3, 4.0), 0.47, atol=1e-3)
    assert extract_responsivity(0.0, 10e-3, 4.0) == 0.0
    assert extract_responsivity(0.47, 1.0, 0.0) == 0.47
    try:
        extract_responsivity(1e-3, 0.0, 4.0)
    except ValueError:
        pass
    else:
        assert False


def test_grating_loss():
    assert grating_loss_from_loopback(8.0) == 4.0
    assert grating_loss_from_loopback(0.0) == 0.0


#
# closed loop
#

# 1.28 x oversampling of 26.5 GHz and 1024-sample segments put a periodogram bin on every point of BIN_GRID
F_HI = 26.5e9
SEGMENT = 1024
FS = 2 * 1.28 * F_HI
BIN_GRID = make_grid(F_HI / 400, F_HI, 400)


def _measured_density(psd_fn, rng, n_samples):
    record = synthesize_noise(psd_fn, n_samples, FS, rng)
    _, pxx = scipy.signal.welch(record, fs=FS, window='boxcar', nperseg=SEGMENT, noverlap=0, detrend=False,
                                scaling='density')
    return pxx[1:len(BIN_GRID) + 1]


def test_bandwidth_identifiable_from_records():
    rng = np.random.default_rng(2718)
    hits = 0
    for _ in range(200):
        f3 = rng.uniform(8e9, 20e9)
        y = _measured_density(lambda f: 1e-17 * gain_shape(f, f3), rng, 2 ** 16)
        res = fit_bandwidth(SpectrumTrace(BIN_GRID, y, unit='W/Hz'))
        hits += abs(res['f3db_hz'] - f3) <= 3 * res.std_errs['f3db_hz']
    assert hits >= 190


def test_clearance_identifiable_from_records():
    rng = np.random.default_rng(1414)
    hits = 0
    for _ in range(200):
        A = rng.uniform(20.0, 60.0)
        C = (A / 9.0 - 1) / F_HI ** 2 * rng.uniform(0.5, 1.5)
        y = _measured_density(lambda f: 1e-18 * (A / (1 + C * f ** 2) + 1), rng, 2 ** 18) / 1e-18
        res = fit_clearance(SpectrumTrace(BIN_GRID, y, unit='ratio'))
        hits += abs(res['A'] - A) <= 3 * res.std_errs['A'] and abs(res['C'] - C) <= 3 * res.std_errs['C']
    assert hits >= 190


def test_gradient_identifiable_from_campaign():
    campaign = run_lo_sweep(hdkit.reference_device(), LOSweep(n_points=64), seed=1)
    points = [(p.I_total, p.electronics_subtracted_variance) for p in variance_vs_photocurrent(campaign, 1e9)]
    rng = np.random.default_rng(99)
    hits = 0
    for _ in range(200):
        res = fit_loglog_gradient([(i, v * 10 ** rng.normal(0, 0.02)) for i, v in points])
        hits += abs(res['gradient'] - 1.0) <= 3 * res.std_errs['gradient']
    assert hits >= 190


if __name__ == '__main__':
    list(map(lambda x: x(), filter(lambda o: callable(o) and o.__module__ == '__main__' and o.__name__.startswith("test"), globals().values())))
