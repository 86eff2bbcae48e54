"""
Closed-form noise of the detector.

All power spectral densities are single-sided, as a spectrum analyzer displays them. Current densities are in
A^2/Hz referred to the amplifier input; output densities are in W/Hz delivered into the matched 50 Ohm termination,
i.e. |Z|^2 * S_i / (4 * 50) plus the termination's own thermal floor k_B*T.
"""
import csv
import math
import logging
from dataclasses import dataclass

import numpy as np

from .utils import stream_or_path, lin_to_db

__all__ = ('NoiseBudget', 'noise_budget', 'input_referred_noise_psd', 'shot_noise_current_psd', 'output_noise_psd',
           'ClearanceModel', 'clearance_spectrum', 'clearance_from_budget', 'shot_noise_efficiency',
           'LOAD_OHM', 'BUDGET_TERMS')

l = logging.getLogger('hdkit.noise')

LOAD_OHM = 50.0
BUDGET_TERMS = ('johnson_feedback', 'base_shot', 'collector_shot', 'base_resistance')


@dataclass(frozen=True)
class NoiseBudget:
    """
    The four terms of the input-referred current noise.

    :ivar johnson_feedback:         4 k_B T / R_F (A^2/Hz)
    :ivar base_shot:                2 q I_C / beta (A^2/Hz)
    :ivar collector_f2_coeff:       2 q I_C (2 pi C_T)^2 / g_m^2 (A^2/Hz per Hz^2)
    :ivar base_resistance_f2_coeff: 4 k_B T R_b (4 pi C_PD)^2 (A^2/Hz per Hz^2)
    """
    johnson_feedback: float
    base_shot: float
    collector_f2_coeff: float
    base_resistance_f2_coeff: float

    def __post_init__(self):
        for name in ('johnson_feedback', 'base_shot', 'collector_f2_coeff', 'base_resistance_f2_coeff'):
            if not getattr(self, name) >= 0:
                raise ValueError("noise term %s must be non-negative" % name)

    @property
    def white(self):
        return self.johnson_feedback + self.base_shot

    @property
    def f2_coeff(self):
        return self.collector_f2_coeff + self.base_resistance_f2_coeff

    def total(self, f):
        f = np.asarray(f, dtype=float)
        return self.white + self.f2_coeff * f ** 2

    def terms(self, f):
        """
        Every term evaluated at ``f``, keyed by the names in ``BUDGET_TERMS``.
        """
        f = np.asarray(f, dtype=float)
        return {
            'johnson_feedback': np.full(f.shape, self.johnson_feedback),
            'base_shot': np.full(f.shape, self.base_shot),
            'collector_shot': self.collector_f2_coeff * f ** 2,
            'base_resistance': self.base_resistance_f2_coeff * f ** 2,
        }

    def to_csv(self, dest, freqs):
        """
        Write one row per frequency and term: ``freq_hz,term,value_a2_per_hz``.
        """
        terms = self.terms(freqs)
        with stream_or_path(dest, 'w') as f:
            w = csv.writer(f, lineterminator='\n')
            w.writerow(('freq_hz', 'term', 'value_a2_per_hz'))
            for k, fr in enumerate(np.asarray(freqs, dtype=float)):
                for name in BUDGET_TERMS:
                    w.writerow((repr(float(fr)), name, repr(float(terms[name][k]))))


def noise_budget(model, bias, hpi):
    c = model.constants
    return NoiseBudget(
        johnson_feedback=4 * c.kT / model.tia.R_F,
        base_shot=2 * c.q * bias.I_C / model.hbt.beta,
        collector_f2_coeff=2 * c.q * bias.I_C * (2 * math.pi * model.input.C_T) ** 2 / hpi.g_m ** 2,
        base_resistance_f2_coeff=4 * c.kT * hpi.R_b * (4 * math.pi * model.input.C_PD) ** 2,
    )


def input_referred_noise_psd(model, bias, hpi, f):
    """
    Input-referred current noise of the amplifier (A^2/Hz):
    4kT/R_F + 2qI_C/beta + 2qI_C (2 pi C_T)^2 f^2 / g_m^2 + 4kT R_b (4 pi C_PD)^2 f^2.

    The fourth term keeps the 4 pi factor of the published expression; other amplifier noise references use 2 pi.
    """
    if np.any(np.asarray(f) < 0):
        raise ValueError("frequency must be non-negative")
    return noise_budget(model, bias, hpi).total(f)


def shot_noise_current_psd(I_total, constants):
    """
    2 q I, single-sided (A^2/Hz).
    """
    if np.any(np.asarray(I_total) < 0):
        raise ValueError("photocurrent must be non-negative")
    return 2 * constants.q * np.asarray(I_total, dtype=float)


def output_noise_psd(model, bias, hpi, Z, I_total, f):
    """
    Shot and electronic noise delivered into the 50 Ohm termination (W/Hz).

    :param ComplexSpectrum Z:   Transimpedance of the whole amplifier.
    :return:                    A tuple ``(shot, electronic)``; electronic includes the termination floor k_B T.
    :raises HDOutOfGridError:   if ``f`` is outside the grid of ``Z``.
    """
    z2 = Z.power_at(f)
    shot = z2 * shot_noise_current_psd(I_total, model.constants) / (4 * LOAD_OHM)
    electronic = z2 * input_referred_noise_psd(model, bias, hpi, f) / (4 * LOAD_OHM) + model.constants.kT
    return shot, electronic


@dataclass(frozen=True)
class ClearanceModel:
    """
    Shot-noise clearance A / (B + C f^2) + 1 as a linear power ratio.
    """
    A: float
    B: float
    C: float

    def __post_init__(self):
        if not self.A >= 0:
            raise ValueError("clearance scale A must be non-negative")
        if not self.B > 0:
            raise ValueError("white-noise scale B must be positive")
        if not self.C >= 0:
            raise ValueError("quadratic coefficient C must be non-negative")

    def at(self, f):
        return clearance_spectrum(self, f)

    def dc_db(self):
        return float(lin_to_db(self.A / self.B + 1.0))

    def frequency_at_db(self, level_db):
        """
        Frequency where the clearance falls to ``level_db``; 0 if it is already below at DC, inf if it never gets
        there.
        """
        target = 10.0 ** (level_db / 10.0) - 1.0
        if not level_db > 0:
            raise ValueError("clearance level must be positive")
        if self.A / self.B <= target:
            return 0.0
        if self.C == 0:
            return math.inf
        return math.sqrt((self.A / target - self.B) / self.C)


def clearance_spectrum(cm, f):
    if np.any(np.asarray(f) < 0):
        raise ValueError("frequency must be non-negative")
    f = np.asarray(f, dtype=float)
    return cm.A / (cm.B + cm.C * f ** 2) + 1.0


def clearance_from_budget(model, bias, hpi, I_total):
    """
    Clearance of the amplifier at photocurrent ``I_total``, normalized to B = 1.

    A = 2 q I_total, B = the white input noise, C = the f^2 coefficient, all divided by B so the ratio evaluates to
    (shot + electronic) / electronic at the amplifier input.
    """
    if I_total < 0:
        raise ValueError("photocurrent must be non-negative")
    budget = noise_budget(model, bias, hpi)
    a = float(shot_noise_current_psd(I_total, model.constants))
    return ClearanceModel(A=a / budget.white, B=1.0, C=budget.f2_coeff / budget.white)


def shot_noise_efficiency(clearance_db):
    """
    Equivalent detection efficiency of finite clearance: 1 - 10^(-clearance_db/10).
    """
    if np.any(np.asarray(clearance_db) < 0):
        raise ValueError("clearance must be at least 0 dB")
    out = 1.0 - np.power(10.0, -np.asarray(clearance_db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out
