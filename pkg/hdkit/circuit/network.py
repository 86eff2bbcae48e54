import logging

import numpy as np

from ..errors import HDNetworkError

__all__ = ('Element', 'Resistor', 'Capacitor', 'VCCS', 'CurrentSource', 'LinearNetwork', 'build_tia_network',
           'GROUND')

l = logging.getLogger('hdkit.circuit.network')

GROUND = 'gnd'


class Element:
    """
    A two-terminal linear element between nodes ``a`` and ``b``.
    """

    __slots__ = ('name', 'a', 'b', 'value')
    conducts = True

    def __init__(self, name, a, b, value):
        self.name = name
        self.a = a
        self.b = b
        self.value = float(value)

    @property
    def nodes(self):
        return (self.a, self.b)

    def __repr__(self):
        return '<%s %s %s-%s %g>' % (type(self).__name__, self.name, self.a, self.b, self.value)

    def stamp(self, G, C, idx):
        raise NotImplementedError()

    @staticmethod
    def _stamp_pair(M, idx, a, b, y):
        ia, ib = idx.get(a), idx.get(b)
        if ia is not None:
            M[ia, ia] += y
        if ib is not None:
            M[ib, ib] += y
        if ia is not None and ib is not None:
            M[ia, ib] -= y
            M[ib, ia] -= y


class Resistor(Element):
    __slots__ = ()

    def stamp(self, G, C, idx):
        self._stamp_pair(G, idx, self.a, self.b, 1.0 / self.value)


class Capacitor(Element):
    __slots__ = ()

    def stamp(self, G, C, idx):
        self._stamp_pair(C, idx, self.a, self.b, self.value)


class CurrentSource(Element):
    """
    An independent current source driving ``value`` amperes from node ``a`` through the source into node ``b``.
    """
    __slots__ = ()
    conducts = False

    def stamp(self, G, C, idx):
        pass

    def inject(self, i, idx):
        if self.a in idx:
            i[idx[self.a]] -= self.value
        if self.b in idx:
            i[idx[self.b]] += self.value


class VCCS(Element):
    """
    A voltage-controlled current source: ``value * (v[ctl_p] - v[ctl_n])`` flows from node ``a`` through the source
    into node ``b``.
    """
    __slots__ = ('ctl_p', 'ctl_n')

    def __init__(self, name, a, b, ctl_p, ctl_n, value):
        super().__init__(name, a, b, value)
        self.ctl_p = ctl_p
        self.ctl_n = ctl_n

    @property
    def nodes(self):
        return (self.a, self.b, self.ctl_p, self.ctl_n)

    def stamp(self, G, C, idx):
        for out, sign in ((self.a, 1.0), (self.b, -1.0)):
            if out not in idx:
                continue
            if self.ctl_p in idx:
                G[idx[out], idx[self.ctl_p]] += sign * self.value
            if self.ctl_n in idx:
                G[idx[out], idx[self.ctl_n]] -= sign * self.value


class LinearNetwork:
    """
    A linear small-signal network for nodal analysis.

    :ivar nodes:        Node names, ground first, in a fixed order.
    :ivar elements:     The elements, in a fixed order.
    :ivar input_node:   Node driven by the unit test current.
    :ivar output_node:  Node whose voltage is the response.
    :ivar buffer_pole:  Pole frequency (Hz) of a unity-gain buffer following the output node, or None.
    """

    def __init__(self, nodes, elements, input_node, output_node, buffer_pole=None):
        self.nodes = tuple(nodes)
        self.elements = tuple(elements)
        self.input_node = input_node
        self.output_node = output_node
        self.buffer_pole = buffer_pole
        self._check()
        self._index = {n: i for i, n in enumerate(self.nodes[1:])}
        self._G, self._C = self._assemble()

    def __repr__(self):
        return '<LinearNetwork %d nodes, %d elements>' % (len(self.nodes), len(self.elements))

    def _check(self):
        if not self.nodes or self.nodes[0] != GROUND:
            raise HDNetworkError("the first node must be ground (%r)" % GROUND)
        if len(set(self.nodes)) != len(self.nodes):
            raise HDNetworkError("duplicate node names")
        known = set(self.nodes)
        for el in self.elements:
            for n in el.nodes:
                if n not in known:
                    raise HDNetworkError("element %s references unknown node %r" % (el.name, n))
        for n in (self.input_node, self.output_node):
            if n not in known or n == GROUND:
                raise HDNetworkError("port node %r must be a non-ground node of the network" % n)

        # connectivity over conducting elements
        parent = {n: n for n in self.nodes}

        def find(n):
            while parent[n] != n:
                parent[n] = parent[parent[n]]
                n = parent[n]
            return n

        for el in self.elements:
            if el.conducts:
                parent[find(el.a)] = find(el.b)
        roots = {find(n) for n in self.nodes}
        if len(roots) != 1:
            raise HDNetworkError("network is not connected")

    def _assemble(self):
        n = len(self._index)
        G = np.zeros((n, n))
        C = np.zeros((n, n))
        for el in self.elements:
            el.stamp(G, C, self._index)
        return G, C

    @property
    def dimension(self):
        """
        Size of the nodal admittance matrix: one row per non-ground node.
        """
        return len(self._index)

    def index_of(self, node):
        return self._index[node]

    def element(self, name):
        for el in self.elements:
            if el.name == name:
                return el
        raise KeyError(name)

    def admittance(self, f):
        """
        The complex nodal admittance matrix Y = G + j 2 pi f C.
        """
        return self._G + 2j * np.pi * f * self._C

    def excitation(self):
        """
        The current injection vector: the network's own current sources, or a unit current into the input node if
        it has none.
        """
        i = np.zeros(self.dimension, dtype=complex)
        sources = [el for el in self.elements if isinstance(el, CurrentSource)]
        if not sources:
            i[self._index[self.input_node]] = 1.0
        for el in sources:
            el.inject(i, self._index)
        return i


def build_tia_network(tia, hpi, input, hbt=None):
    """
    The first amplifier stage as a small-signal network.

    Nodes are ``gnd, in, e, out``: the photodiode current and C_in drive ``in``, r_pi and C_pi join ``in`` to the
    emitter ``e`` which returns to ground through R_E, R_F feeds back from ``out`` to ``in``, and ``out`` carries the
    g_m source, R_C and the buffer input capacitance C_L. The buffer repeats the degenerated stage, so C_L is that
    stage's input capacitance (C_pi + C_mu)/(1 + g_m R_E) over C_ratio, which keeps the open-loop gain-bandwidth at
    C_ratio f_T. With R_E = 0 the emitter is ground and R_E is left out. The unity-gain buffer is a single pole at f_T
    on the output.

    :param TIADesign tia:           Amplifier resistors.
    :param HybridPiParams hpi:      Linearized transistor.
    :param InputNode input:         Input-node capacitances.
    :param HBTParams hbt:           Supplies C_ratio; a ratio of 1 is used when omitted.
    :rtype:                         LinearNetwork
    """
    c_ratio = 1.0 if hbt is None else hbt.C_ratio
    c_load = hpi.C_total / (1.0 + hpi.g_m * tia.R_E) / c_ratio
    degenerated = tia.R_E > 0
    e = 'e' if degenerated else GROUND
    nodes = (GROUND, 'in', 'e', 'out') if degenerated else (GROUND, 'in', 'out')

    elements = [
        CurrentSource('I_pd', GROUND, 'in', 1.0),
        Capacitor('C_in', 'in', GROUND, input.C_in),
        Resistor('r_pi', 'in', e, hpi.r_pi),
        Capacitor('C_pi', 'in', e, hpi.C_pi),
    ]
    if degenerated:
        elements.append(Resistor('R_E', 'e', GROUND, tia.R_E))
    elements.extend((
        Resistor('R_F', 'in', 'out', tia.R_F),
        VCCS('g_m', 'out', e, 'in', e, hpi.g_m),
        Resistor('R_C', 'out', GROUND, tia.R_C),
        Capacitor('C_L', 'out', GROUND, c_load),
    ))
    return LinearNetwork(nodes, elements, 'in', 'out', buffer_pole=hpi.f_T)
