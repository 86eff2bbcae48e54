import io
import math
import random
import dataclasses

import numpy as np
import numpy.testing as npt

import hdkit
from hdkit import (noise_budget, input_referred_noise_psd, shot_noise_current_psd, output_noise_psd,
                   clearance_from_budget, clearance_spectrum, shot_noise_efficiency, ClearanceModel,
                   PhysicalConstants, solve_detector, BiasPoint, small_signal_params)
from hdkit.utils import lin_to_db
from hdkit.noise import BUDGET_TERMS

device = hdkit.reference_device()
constants = PhysicalConstants()


def _detector():
    return solve_detector(device, np.linspace(0, 26.5e9, 101))


def test_johnson_term():
    resp = _detector()
    budget = noise_budget(device, resp.bias, resp.hpi)
    npt.assert_allclose(budget.johnson_feedback, 2.7613e-23, rtol=1e-4)
    npt.assert_allclose(budget.base_shot, 2 * constants.q * resp.bias.I_C / device.hbt.beta, rtol=1e-12)


def test_input_noise_at_dc_is_white():
    resp = _detector()
    budget = noise_budget(device, resp.bias, resp.hpi)
    npt.assert_allclose(input_referred_noise_psd(device, resp.bias, resp.hpi, 0.0), budget.white, rtol=1e-12)


def test_input_noise_grows_as_f_squared():
    resp = _detector()
    budget = noise_budget(device, resp.bias, resp.hpi)
    f = np.array([1e9, 2e9, 4e9])
    excess = input_referred_noise_psd(device, resp.bias, resp.hpi, f) - budget.white
    npt.assert_allclose(excess / f ** 2, budget.f2_coeff, rtol=1e-6)
    assert budget.f2_coeff > 0


def test_input_noise_is_non_negative_and_monotone():
    resp = _detector()
    f = np.linspace(0, 50e9, 501)
    s = input_referred_noise_psd(device, resp.bias, resp.hpi, f)
    assert np.all(s > 0)
    assert np.all(np.diff(s) > 0)


def _random_point(rng):
    inp = dataclasses.replace(device.input, C_pd_each=rng.uniform(1e-15, 50e-15),
                              C_interconnect=rng.uniform(0, 150e-15), C_amp_in=rng.uniform(20e-15, 200e-15))
    tia = dataclasses.replace(device.tia, R_F=rng.uniform(200, 2000))
    hbt = dataclasses.replace(device.hbt, beta=rng.uniform(50, 400), R_b=rng.uniform(1, 50))
    model = device.replace(input=inp, tia=tia, hbt=hbt, constants=PhysicalConstants(T=rng.uniform(4, 400)))
    bias = BiasPoint(I_C=rng.uniform(1e-3, 10e-3), V_CE=1.0, V_in_dc=0.9, V_out_dc=1.0)
    return model, bias, small_signal_params(model.hbt, bias, model.constants)


def test_input_noise_grows_with_every_source():
    rng = random.Random(5)
    f = np.linspace(1e8, 50e9, 51)
    for _ in range(50):
        model, bias, hpi = _random_point(rng)
        base = input_referred_noise_psd(model, bias, hpi, f)
        assert np.all(np.diff(base) > 0)
        k = rng.uniform(1.01, 2.0)
        hotter = model.replace(constants=PhysicalConstants(T=model.constants.T * k))
        more_current = dataclasses.replace(bias, I_C=bias.I_C * k)
        assert np.all(input_referred_noise_psd(hotter, bias, hpi, f) > base)
        assert np.all(input_referred_noise_psd(model, more_current, hpi, f) > base)
        for name in ('C_pd_each', 'C_interconnect', 'C_amp_in'):
            bigger = dataclasses.replace(model.input, **{name: getattr(model.input, name) * k + 1e-15})
            assert np.all(input_referred_noise_psd(model.replace(input=bigger), bias, hpi, f) > base), name


def test_clearance_model_matches_noise_ratio():
    rng = random.Random(6)
    f = np.linspace(0, 50e9, 101)
    for _ in range(50):
        model, bias, hpi = _random_point(rng)
        i_total = rng.uniform(0, 20e-3)
        electronic = input_referred_noise_psd(model, bias, hpi, f)
        shot = shot_noise_current_psd(i_total, model.constants)
        cm = clearance_from_budget(model, bias, hpi, i_total)
        npt.assert_allclose(clearance_spectrum(cm, f), (shot + electronic) / electronic, rtol=1e-12)


def test_negative_frequency():
    resp = _detector()
    try:
        input_referred_noise_psd(device, resp.bias, resp.hpi, -1.0)
    except ValueError:
        pass
    else:
        assert False


def test_budget_terms_sum():
    resp = _detector()
    budget = noise_budget(device, resp.bias, resp.hpi)
    f = np.linspace(0, 26.5e9, 11)
    terms = budget.terms(f)
    assert tuple(terms) == BUDGET_TERMS
    npt.assert_allclose(sum(terms.values()), budget.total(f), rtol=1e-12)


def test_budget_csv():
    resp = _detector()
    budget = noise_budget(device, resp.bias, resp.hpi)
    buf = io.StringIO()
    budget.to_csv(buf, [0.0, 1e9])
    lines = buf.getvalue().splitlines()
    assert lines[0] == 'freq_hz,term,value_a2_per_hz'
    assert len(lines) == 1 + 2 * len(BUDGET_TERMS)


def test_shot_noise():
    npt.assert_allclose(shot_noise_current_psd(1e-3, constants), 3.204e-22, rtol=1e-3)
    assert shot_noise_current_psd(0.0, constants) == 0.0
    try:
        shot_noise_current_psd(-1e-3, constants)
    except ValueError:
        pass
    else:
        assert False


def test_shot_noise_is_linear():
    i = np.logspace(-7, -2, 20)
    s = shot_noise_current_psd(i, constants)
    npt.assert_allclose(s / i, 2 * constants.q, rtol=1e-12)


def test_output_noise():
    resp = _detector()
    shot, electronic = output_noise_psd(device, resp.bias, resp.hpi, resp.Z, 1e-3, 0.0)
    z2 = abs(resp.Z.values[0]) ** 2
    npt.assert_allclose(shot, z2 * 2 * constants.q * 1e-3 / 200, rtol=1e-12)
    budget = noise_budget(device, resp.bias, resp.hpi)
    npt.assert_allclose(electronic, z2 * budget.white / 200 + constants.kT, rtol=1e-12)


def test_output_noise_out_of_grid():
    resp = _detector()
    try:
        output_noise_psd(device, resp.bias, resp.hpi, resp.Z, 1e-3, 30e9)
    except hdkit.HDOutOfGridError:
        pass
    else:
        assert False


def test_clearance_at_2ma():
    resp = _detector()
    cm = clearance_from_budget(device, resp.bias, resp.hpi, 2e-3)
    assert cm.B == 1.0
    assert cm.dc_db() > 10.0
    budget = noise_budget(device, resp.bias, resp.hpi)
    npt.assert_allclose(cm.A * budget.white, 6.41e-22, rtol=2e-3)


def test_clearance_in_the_dark():
    resp = _detector()
    cm = clearance_from_budget(device, resp.bias, resp.hpi, 0.0)
    npt.assert_allclose(clearance_spectrum(cm, np.linspace(0, 1e10, 5)), 1.0)


def test_clearance_is_decreasing():
    cm = ClearanceModel(A=30.62, B=1.0, C=3.42e-21)
    c = cm.at(np.linspace(0, 50e9, 101))
    assert np.all(np.diff(c) < 0)
    assert np.all(c > 1)


def test_clearance_crossings():
    a = 10 ** 1.5 - 1
    c = (a / 9.0 - 1) / 26.5e9 ** 2
    cm = ClearanceModel(A=a, B=1.0, C=c)
    npt.assert_allclose(cm.dc_db(), 15.0, rtol=1e-12)
    npt.assert_allclose(cm.frequency_at_db(10.0), 26.5e9, rtol=1e-9)
    npt.assert_allclose(float(lin_to_db(cm.at(26.5e9))), 10.0, rtol=1e-9)
    assert cm.frequency_at_db(20.0) == 0.0
    assert ClearanceModel(A=a, B=1.0, C=0.0).frequency_at_db(10.0) == math.inf


def test_clearance_model_checks():
    for bad in ((-1.0, 1.0, 0.0), (1.0, 0.0, 0.0), (1.0, 1.0, -1.0)):
        try:
            ClearanceModel(*bad)
        except ValueError:
            pass
        else:
            assert False, bad


def test_efficiency():
    npt.assert_allclose(shot_noise_efficiency(15.0), 0.968, atol=1e-3)
    assert shot_noise_efficiency(0.0) == 0.0
    assert isinstance(shot_noise_efficiency(10.0), float)
    npt.assert_allclose(shot_noise_efficiency(np.array([10.0, 20.0])), [0.9, 0.99], rtol=1e-12)
    try:
        shot_noise_efficiency(-1.0)
    except ValueError:
        pass
    else:
        assert False


if __name__ == '__main__':
    list(map(lambda x: x(), filter(lambda o: callable(o) and o.__module__ == '__main__' and o.__name__.startswith("test"), globals().values())))
