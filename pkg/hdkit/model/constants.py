from dataclasses import dataclass

__all__ = ('PhysicalConstants', 'ELEMENTARY_CHARGE', 'BOLTZMANN')

ELEMENTARY_CHARGE = 1.602176634e-19     # C, exact (SI 2019)
BOLTZMANN = 1.380649e-23                # J/K, exact (SI 2019)


@dataclass(frozen=True)
class PhysicalConstants:
    """
    Physical constants of the noise and bias formulas. All quantities are SI.

    :ivar q:    Elementary charge (C)
    :ivar k_B:  Boltzmann constant (J/K)
    :ivar T:    Absolute temperature (K)
    """
    q: float = ELEMENTARY_CHARGE
    k_B: float = BOLTZMANN
    T: float = 300.0

    @property
    def V_T(self):
        """
        Thermal voltage k_B*T/q (V). Always derived, never stored.
        """
        return self.k_B * self.T / self.q

    @property
    def kT(self):
        return self.k_B * self.T

    def problems(self, prefix='constants'):
        out = []
        if not self.T > 0:
            out.append((prefix + '.T', "temperature must be positive"))
        if not self.q > 0:
            out.append((prefix + '.q', "elementary charge must be positive"))
        if not self.k_B > 0:
            out.append((prefix + '.k_B', "Boltzmann constant must be positive"))
        return out
