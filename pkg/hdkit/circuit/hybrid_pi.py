import math
from dataclasses import dataclass

__all__ = ('HybridPiParams', 'small_signal_params')


@dataclass(frozen=True)
class HybridPiParams:
    """
    Small-signal hybrid-pi model of the transistor at its bias point.

    :ivar g_m:      Transconductance (S)
    :ivar r_pi:     Base-emitter resistance (Ohm)
    :ivar C_pi:     Base-emitter capacitance (F)
    :ivar C_mu:     Base-collector capacitance (F)
    :ivar R_b:      Base spreading resistance (Ohm)
    :ivar beta:     Current gain
    """
    g_m: float
    r_pi: float
    C_pi: float
    C_mu: float
    R_b: float
    beta: float

    @property
    def C_total(self):
        return self.C_pi + self.C_mu

    @property
    def f_T(self):
        return self.g_m / (2 * math.pi * self.C_total)


def small_signal_params(hbt, bias, constants):
    """
    Linearize the transistor at ``bias``: g_m = I_C/V_T, r_pi = beta/g_m, and C_pi + C_mu = g_m/(2 pi f_T), split by
    ``hbt.c_mu_fraction``.
    """
    if not bias.I_C > 0:
        raise ValueError("small-signal parameters need a positive collector current")
    g_m = bias.I_C / constants.V_T
    c_total = g_m / (2 * math.pi * hbt.f_T)
    c_mu = hbt.c_mu_fraction * c_total
    return HybridPiParams(g_m=g_m, r_pi=hbt.beta / g_m, C_pi=c_total - c_mu, C_mu=c_mu, R_b=hbt.R_b, beta=hbt.beta)
