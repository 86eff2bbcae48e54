import io
import dataclasses

import numpy as np
import numpy.testing as npt

import hdkit
from hdkit import (OpticalFrontEnd, PhotocurrentPair, photocurrents, on_chip_power, balance_photocurrents,
                   balanced_frontend, rin_excess_psd, simulate_cmrr_experiment, cmrr_tones, extract_cmrr,
                   solve_detector, device_output_psd, analytic_esa_psd, analytic_esa_trace, danl_trace,
                   output_noise_psd, S21Trace, make_grid, subtract_noise_floor)
from hdkit.noise import LOAD_OHM
from hdkit.utils import dbm_to_watt

device = hdkit.reference_device()


def test_photocurrents():
    fe = OpticalFrontEnd(split_T=0.42, split_R=0.58, coupler_loss_db=0.0)
    pair = photocurrents(fe, 1e-3)
    npt.assert_allclose(pair.I_top, 0.2726e-3, rtol=1e-9)
    npt.assert_allclose(pair.I_bottom, 0.1974e-3, rtol=1e-9)
    npt.assert_allclose(pair.difference, 75.2e-6, rtol=1e-9)
    npt.assert_allclose(pair.total, 0.47e-3, rtol=1e-9)


def test_coupler_loss():
    npt.assert_allclose(on_chip_power(device.frontend, 1e-3), 1e-3 * 10 ** -0.4, rtol=1e-12)
    try:
        on_chip_power(device.frontend, -1.0)
    except ValueError:
        pass
    else:
        assert False


def test_photocurrents_are_linear_in_power():
    a = photocurrents(device.frontend, 1e-3)
    b = photocurrents(device.frontend, 3e-3)
    npt.assert_allclose([b.I_top, b.I_bottom], [3 * a.I_top, 3 * a.I_bottom], rtol=1e-12)


def test_balance_reference_device():
    scale = balance_photocurrents(device.frontend, 10e-3)
    npt.assert_allclose(scale, 0.724, atol=1e-3)
    npt.assert_allclose(scale, 0.42 / 0.58, rtol=1e-12)
    fe = balanced_frontend(device.frontend, 10e-3)
    npt.assert_allclose(photocurrents(fe, 10e-3).difference, 0.0, atol=1e-15)
    # balancing at one power balances every power
    npt.assert_allclose(photocurrents(fe, 1e-6).difference, 0.0, atol=1e-18)


def test_balance_is_idempotent():
    fe = balanced_frontend(device.frontend, 10e-3)
    assert balance_photocurrents(fe, 10e-3) == fe.qe_scale_bottom
    assert balanced_frontend(fe, 10e-3) == fe


def test_balance_needs_stronger_bottom_arm():
    fe = OpticalFrontEnd(split_T=0.42, split_R=0.58, top_arm='reflection')
    try:
        balance_photocurrents(fe, 10e-3)
    except hdkit.HDUnbalanceableError:
        pass
    else:
        assert False


def test_rin_excess():
    fe = OpticalFrontEnd(split_T=0.42, split_R=0.58, rin_dbchz=-155.0)
    pair = PhotocurrentPair(0.2726e-3, 0.1974e-3)
    npt.assert_allclose(rin_excess_psd(fe, pair, [0.0, 1e9]), 1.79e-24, rtol=2e-3)
    npt.assert_allclose(rin_excess_psd(dataclasses.replace(fe, rin_dbchz=None), pair, [1e9]), 0.0)
    npt.assert_allclose(rin_excess_psd(fe, PhotocurrentPair(1e-3, 1e-3), [1e9]), 0.0)


def test_cmrr_unbalanced():
    npt.assert_allclose(simulate_cmrr_experiment(device, 1e9, 0.1, 10e-3), 15.9, atol=0.1)
    npt.assert_allclose(simulate_cmrr_experiment(device, 1e9, 0.1, 10e-3, reference='strong'), 11.19, atol=0.01)
    npt.assert_allclose(simulate_cmrr_experiment(device, 1e9, 0.1, 10e-3, reference='weak'),
                        20 * np.log10(0.42 / 0.16), rtol=1e-9)


def test_cmrr_does_not_depend_on_power_or_depth():
    a = simulate_cmrr_experiment(device, 1e9, 0.1, 10e-3)
    b = simulate_cmrr_experiment(device, 1e9, 0.5, 1e-3)
    npt.assert_allclose(a, b, rtol=1e-9)


def test_cmrr_after_partial_balancing():
    qe = 0.42 / 0.58 * 1.09
    model = device.replace(frontend=dataclasses.replace(device.frontend, qe_scale_bottom=qe))
    pair = photocurrents(model.frontend, 10e-3)
    assert abs(pair.difference) / pair.total <= 0.045
    Z = solve_detector(model, [0.0, 2e9]).Z
    tones = cmrr_tones(model, Z, 1e9, 0.1, 10e-3)
    simulated = simulate_cmrr_experiment(model, 1e9, 0.1, 10e-3, Z=Z)
    assert simulated >= 27.0
    npt.assert_allclose(extract_cmrr(tones.single_dbm, tones.both_dbm), simulated, rtol=1e-9)


def test_cmrr_is_capped():
    model = device.replace(frontend=balanced_frontend(device.frontend, 10e-3))
    npt.assert_allclose(simulate_cmrr_experiment(model, 1e9, 0.1, 10e-3), 80.0, rtol=1e-12)


def test_cmrr_checks():
    for kwargs in ({'mod_depth': 0.0}, {'mod_depth': 1.5}, {'reference': 'left'}):
        args = dict(mod_freq=1e9, mod_depth=0.1, lo_power=10e-3)
        args.update(kwargs)
        try:
            simulate_cmrr_experiment(device, **args)
        except ValueError:
            pass
        else:
            assert False, kwargs


def test_analytic_trace():
    grid = make_grid(10e6, 26.5e9, 257)
    resp = solve_detector(device, grid)
    pair = PhotocurrentPair(1e-3, 1e-3)
    trace = analytic_esa_trace(device, resp.bias, resp.hpi, resp.Z, pair, grid, 100e3)
    assert trace.unit == 'dBm/Hz' and trace.stage == 'raw' and trace.rbw == 100e3
    shot, electronic = output_noise_psd(device, resp.bias, resp.hpi, resp.Z, 2e-3, grid)
    npt.assert_allclose(trace.linear(), shot + electronic + dbm_to_watt(device.esa_danl_dbm_hz), rtol=1e-9)


def test_trace_sits_above_floor():
    grid = make_grid(10e6, 26.5e9, 257)
    resp = solve_detector(device, grid)
    dark = analytic_esa_trace(device, resp.bias, resp.hpi, resp.Z, PhotocurrentPair(0.0, 0.0), grid, 100e3)
    lit = analytic_esa_trace(device, resp.bias, resp.hpi, resp.Z, PhotocurrentPair(1e-3, 1e-3), grid, 100e3)
    floor = danl_trace(device, grid, 100e3)
    assert np.all(dark.values > floor.values)
    assert np.all(lit.values > dark.values)


def test_s21_attenuates_device_noise():
    grid = make_grid(10e6, 26.5e9, 65)
    resp = solve_detector(device, grid)
    pair = PhotocurrentPair(1e-3, 1e-3)
    plain = device_output_psd(device, resp.bias, resp.hpi, resp.Z, pair, grid)
    lossy = device_output_psd(device, resp.bias, resp.hpi, resp.Z, pair, grid, s21=S21Trace.flat(grid, -3.0))
    npt.assert_allclose(lossy / plain, 10 ** -0.3, rtol=1e-12)
    total = analytic_esa_psd(device, resp.bias, resp.hpi, resp.Z, pair, grid, s21=S21Trace.flat(grid, -3.0))
    npt.assert_allclose(total - lossy, dbm_to_watt(device.esa_danl_dbm_hz), rtol=1e-6)


def test_trace_beyond_transimpedance_grid():
    resp = solve_detector(device, make_grid(10e6, 10e9, 65))
    try:
        analytic_esa_trace(device, resp.bias, resp.hpi, resp.Z, PhotocurrentPair(1e-3, 1e-3),
                           make_grid(10e6, 26.5e9, 65), 100e3)
    except hdkit.HDOutOfGridError:
        pass
    else:
        assert False


def test_floor_subtraction_leaves_shot_and_rin():
    model = device.replace(frontend=dataclasses.replace(device.frontend, rin_dbchz=-150.0))
    grid = make_grid(10e6, 26.5e9, 257)
    resp = solve_detector(model, grid)
    pair = photocurrents(model.frontend, 10e-3)
    raw = analytic_esa_trace(model, resp.bias, resp.hpi, resp.Z, pair, grid, 100e3)
    dark = analytic_esa_trace(model, resp.bias, resp.hpi, resp.Z, PhotocurrentPair(0.0, 0.0), grid, 100e3)
    floor = danl_trace(model, grid, 100e3)
    left = subtract_noise_floor(subtract_noise_floor(raw, floor), subtract_noise_floor(dark, floor))
    assert not np.any(left.mask)

    shot, _ = output_noise_psd(model, resp.bias, resp.hpi, resp.Z, pair.total, grid)
    rin = resp.Z.power_at(grid) * rin_excess_psd(model.frontend, pair, grid) / (4 * LOAD_OHM)
    assert np.all(rin > 0)
    npt.assert_allclose(left.linear(), shot + rin, rtol=1e-9)


def test_s21_csv():
    s21 = S21Trace.cascade(S21Trace.flat([0.0, 1e10, 2e10], -1.0), S21Trace.tilt([0.0, 3e10], -1e-10))
    npt.assert_allclose(s21.s21_db, [-1.0, -2.0, -3.0], rtol=1e-12)
    buf = io.StringIO()
    s21.to_csv(buf)
    assert S21Trace.from_csv(io.StringIO(buf.getvalue())) == s21


if __name__ == '__main__':
    list(map(lambda x: x(), filter(lambda o: callable(o) and o.__module__ == '__main__' and o.__name__.startswith("test"), globals().values())))
