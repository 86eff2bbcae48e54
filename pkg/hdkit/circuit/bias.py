import math
import logging
from dataclasses import dataclass

import numpy as np

from ..errors import HDNoConvergenceError, HDBreakdownError

__all__ = ('BiasPoint', 'ExponentialLaw', 'LinearLaw', 'dc_operating_point')

l = logging.getLogger('hdkit.circuit.bias')

# KCL residual tolerance (A)
_RESIDUAL_TOL = 1e-9
_MAX_ITER = 100
# largest junction-voltage change per Newton step (V)
_MAX_DU = 0.1


@dataclass(frozen=True)
class BiasPoint:
    """
    DC operating point of the first amplifier stage.

    :ivar I_C:      Collector current (A)
    :ivar V_CE:     Collector-emitter voltage (V)
    :ivar V_in_dc:  DC level of the amplifier input node (V)
    :ivar V_out_dc: DC level of the stage output, the collector (V)
    :ivar V_BE:     Internal base-emitter junction voltage (V)
    :ivar n_iter:   Newton iterations used
    """
    I_C: float
    V_CE: float
    V_in_dc: float
    V_out_dc: float
    V_BE: float = 0.0
    n_iter: int = 0

    @property
    def V_out(self):
        return (self.V_in_dc, self.V_out_dc)


class ExponentialLaw:
    """
    I_C = I_S * exp(V_BE / V_T), with I_S chosen so that V_BE = hbt.V_BE at hbt.I_C_opt.
    """

    __slots__ = ('I_S', 'V_T')

    def __init__(self, hbt, constants):
        self.V_T = constants.V_T
        self.I_S = hbt.I_C_opt * math.exp(-hbt.V_BE / self.V_T)

    def current(self, u):
        return self.I_S * math.exp(u / self.V_T)

    def slope(self, u):
        return self.current(u) / self.V_T

    def start(self, hbt):
        return hbt.V_BE


class LinearLaw:
    """
    I_C = g * (V_BE - V_on). Not a physical transistor; it makes the bias network linear so the operating point has a
    closed form.
    """

    __slots__ = ('g', 'V_on')

    def __init__(self, g, V_on=0.0):
        self.g = g
        self.V_on = V_on

    def current(self, u):
        return self.g * (u - self.V_on)

    def slope(self, u):
        return self.g

    def start(self, hbt):
        return self.V_on


def dc_operating_point(tia, hbt, constants, law=None, i_in=0.0):
    """
    Solve the DC network of the first stage: V_cc1 feeds the collector through R_C, R_F feeds back from the collector
    to the base, the emitter returns to ground through R_E and the base current flows through R_b.

    The unknowns are the internal junction voltage and the collector voltage; the solve is a damped Newton iteration
    on the two KCL residuals with an analytic Jacobian.

    :param TIADesign tia:               Resistors and supplies.
    :param HBTParams hbt:               Transistor parameters.
    :param PhysicalConstants constants: Physical constants.
    :param law:                         Collector current law; defaults to :class:`ExponentialLaw`.
    :param float i_in:                  DC current injected into the input node (A), e.g. a photocurrent difference.
    :rtype:                             BiasPoint
    :raises HDNoConvergenceError:       if the residual does not fall below 1 nA within 100 iterations.
    :raises HDBreakdownError:           if the solution has V_CE at or above the breakdown voltage.
    """
    if law is None:
        law = ExponentialLaw(hbt, constants)

    beta = hbt.beta
    R_F, R_C, R_E, R_b = tia.R_F, tia.R_C, tia.R_E, hbt.R_b
    # base terminal voltage per unit collector current, beyond the junction
    k_b = (1.0 + 1.0 / beta) * R_E + R_b / beta

    def residuals(u, v_c):
        i_c = law.current(u)
        v_b = u + i_c * k_b
        r1 = (tia.V_cc1 - v_c) / R_C - i_c - (v_c - v_b) / R_F
        r2 = (v_c - v_b) / R_F + i_in - i_c / beta
        return np.array((r1, r2)), i_c, v_b

    u = law.start(hbt)
    v_c = tia.V_cc1 / 2.0
    for n_iter in range(1, _MAX_ITER + 1):
        r, i_c, v_b = residuals(u, v_c)
        s = law.slope(u)
        dvb = 1.0 + s * k_b
        jac = np.array((
            (-s + dvb / R_F, -1.0 / R_C - 1.0 / R_F),
            (-dvb / R_F - s / beta, 1.0 / R_F),
        ))
        try:
            du, dvc = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            raise HDNoConvergenceError("singular bias Jacobian at V_BE = %g V" % u)
        if abs(du) > _MAX_DU:
            scale = _MAX_DU / abs(du)
            du *= scale
            dvc *= scale
        u += du
        v_c += dvc
        r, i_c, v_b = residuals(u, v_c)
        l.debug("bias iteration %d: V_BE=%.6f V_c=%.6f |r|=%.3e", n_iter, u, v_c, np.max(np.abs(r)))
        if np.max(np.abs(r)) < _RESIDUAL_TOL:
            break
    else:
        raise HDNoConvergenceError("bias solve did not converge in %d iterations (residual %.3e A)"
                                   % (_MAX_ITER, np.max(np.abs(r))))

    v_e = i_c * (1.0 + 1.0 / beta) * R_E
    v_ce = v_c - v_e
    if not i_c > 0 or not v_ce > 0:
        raise HDNoConvergenceError("no forward-active operating point (I_C = %g A, V_CE = %g V)" % (i_c, v_ce))
    if v_ce >= hbt.V_breakdown:
        raise HDBreakdownError("V_CE = %.3f V reaches breakdown %.3f V" % (v_ce, hbt.V_breakdown))
    return BiasPoint(I_C=float(i_c), V_CE=float(v_ce), V_in_dc=float(v_b), V_out_dc=float(v_c), V_BE=float(u),
                     n_iter=n_iter)
