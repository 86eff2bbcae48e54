import math
from dataclasses import dataclass

__all__ = ('HBTParams', 'TIADesign', 'InputNode', 'OpticalFrontEnd', 'ARMS')

ARMS = ('reflection', 'transmission')


def _positive(obj, prefix, names):
    return [(prefix + '.' + n, "must be positive") for n in names if not getattr(obj, n) > 0]


@dataclass(frozen=True)
class HBTParams:
    """
    Heterojunction bipolar transistor parameters.

    beta and R_b are not published for the monolithic device; the defaults are assumptions.

    :ivar f_T:              Transition frequency (Hz)
    :ivar beta:             DC current gain
    :ivar I_C_opt:          Collector current at which f_T peaks (A)
    :ivar V_BE:             Base-emitter voltage at I_C_opt (V), calibrates the saturation current
    :ivar R_b:              Base spreading resistance (Ohm)
    :ivar V_breakdown:      Collector-emitter breakdown voltage (V)
    :ivar C_ratio:          Input-to-load capacitance ratio C_I/C_L of the gain-bandwidth relation
    :ivar c_mu_fraction:    Share of the total transistor capacitance that is base-collector (C_mu)
    """
    f_T: float = 220e9
    beta: float = 200.0
    I_C_opt: float = 4.5e-3
    V_BE: float = 0.9
    R_b: float = 10.0
    V_breakdown: float = 1.7
    C_ratio: float = 0.9
    c_mu_fraction: float = 0.15

    def problems(self, prefix='hbt'):
        out = _positive(self, prefix, ('f_T', 'I_C_opt', 'V_BE', 'V_breakdown', 'C_ratio'))
        if not self.beta > 1:
            out.append((prefix + '.beta', "current gain must exceed 1"))
        if not self.R_b >= 0:
            out.append((prefix + '.R_b', "must be non-negative"))
        if not 0 <= self.c_mu_fraction < 1:
            out.append((prefix + '.c_mu_fraction', "must lie in [0, 1)"))
        return out


@dataclass(frozen=True)
class TIADesign:
    """
    Resistors and supplies of the two-stage amplifier: a common-emitter shunt-feedback stage followed by a
    unity-gain 50 Ohm buffer.
    """
    R_F: float = 600.0
    R_C: float = 250.0
    R_E: float = 35.0
    V_cc1: float = 2.2
    V_cc2: float = 1.65

    def problems(self, prefix='tia', hbt=None):
        # R_E = 0 is a legal design (no degeneration); the element is elided from the network
        out = _positive(self, prefix, ('R_F', 'R_C', 'V_cc1', 'V_cc2'))
        if not self.R_E >= 0:
            out.append((prefix + '.R_E', "must be non-negative"))
        if hbt is not None and not self.V_cc2 <= hbt.V_breakdown:
            out.append((prefix + '.V_cc2', "buffer supply %g V exceeds breakdown %g V" % (self.V_cc2, hbt.V_breakdown)))
        return out


@dataclass(frozen=True)
class InputNode:
    """
    Capacitances loading the amplifier input node (F).
    """
    C_pd_each: float = 9e-15
    C_interconnect: float = 7e-15
    C_amp_in: float = 100e-15

    @property
    def C_in(self):
        """
        Total input capacitance: both photodiodes, the interconnect and the amplifier input.
        """
        return math.fsum((2 * self.C_pd_each, self.C_interconnect, self.C_amp_in))

    @property
    def C_T(self):
        """
        Total capacitance of the collector shot-noise term; the same quantity as C_in.
        """
        return self.C_in

    @property
    def C_PD(self):
        return self.C_pd_each

    def problems(self, prefix='input'):
        return [(prefix + '.' + n, "capacitance must be non-negative")
                for n in ('C_pd_each', 'C_interconnect', 'C_amp_in') if not getattr(self, n) >= 0]


@dataclass(frozen=True)
class OpticalFrontEnd:
    """
    Grating couplers, beamsplitter and photodiodes.

    ``top_arm`` names the splitter arm that illuminates the top photodiode; the bottom photodiode sees the other
    one. ``rin_dbchz`` of None means a shot-noise-limited local oscillator.
    """
    coupler_loss_db: float = 4.0
    split_T: float = 0.5
    split_R: float = 0.5
    responsivity_top: float = 0.47
    responsivity_bottom: float = 0.47
    qe_scale_bottom: float = 1.0
    rin_dbchz: object = None
    top_arm: str = 'reflection'

    @property
    def top_fraction(self):
        return self.split_R if self.top_arm == 'reflection' else self.split_T

    @property
    def bottom_fraction(self):
        return self.split_T if self.top_arm == 'reflection' else self.split_R

    @property
    def coupler_transmission(self):
        return 10.0 ** (-self.coupler_loss_db / 10.0)

    def problems(self, prefix='frontend'):
        out = []
        if abs(self.split_T + self.split_R - 1.0) > 1e-12:
            out.append((prefix + '.split_T', "split fractions must sum to 1"))
        for n in ('split_T', 'split_R'):
            if not 0 < getattr(self, n) < 1:
                out.append((prefix + '.' + n, "split fraction must lie in (0, 1)"))
        if not 0 < self.qe_scale_bottom <= 1:
            out.append((prefix + '.qe_scale_bottom', "must lie in (0, 1]"))
        for n in ('responsivity_top', 'responsivity_bottom'):
            if not getattr(self, n) >= 0:
                out.append((prefix + '.' + n, "responsivity must be non-negative"))
        if not self.coupler_loss_db >= 0:
            out.append((prefix + '.coupler_loss_db', "loss must be non-negative"))
        if self.rin_dbchz is not None and not math.isfinite(self.rin_dbchz):
            out.append((prefix + '.rin_dbchz', "must be finite when given"))
        if self.top_arm not in ARMS:
            out.append((prefix + '.top_arm', "must be one of %s" % ', '.join(ARMS)))
        return out
