import io
import os
import csv
import json
import logging
import operator
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict, fields

import numpy as np
import sortedcontainers

from ..circuit import solve_detector
from ..errors import HDCorruptCampaignError, HDFileNotFoundError, HDConfigError
from ..fit.processing import S21Trace
from ..model.config import dump_model, read_config
from ..model.trace import SpectrumTrace, make_grid
from ..utils import dbm_to_watt, dump_json, file_sha256, stream_or_path
from .esa import analytic_esa_trace, danl_trace, monte_carlo_trace
from .optics import PhotocurrentPair, photocurrents, balanced_frontend

__all__ = ('LOSweep', 'CampaignStep', 'CampaignResult', 'run_lo_sweep', 'VariancePoint', 'variance_vs_photocurrent',
           'write_variance_csv', 'MANIFEST', 'METHODS')

l = logging.getLogger('hdkit.simulate.campaign')

MANIFEST = 'manifest.json'
METHODS = ('analytic', 'montecarlo')
_FORMAT = 'hdkit-campaign/1'


@dataclass(frozen=True)
class LOSweep:
    """
    An LO power sweep and the analyzer settings used at every step.

    Powers are stepped evenly in dBm, i.e. logarithmically in watts, from ``power_start_dbm`` to ``power_stop_dbm``.
    """
    power_start_dbm: float = 13.5
    power_stop_dbm: float = -26.5
    n_steps: int = 9
    rbw: float = 100e3
    f_lo: float = 10e6
    f_hi: float = 26.5e9
    n_points: int = 4096
    balance: bool = False
    method: str = 'analytic'
    n_samples: int = 2 ** 16
    n_averages: int = 64

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("a sweep needs at least one step")
        if not self.f_hi > self.f_lo >= 0:
            raise ValueError("sweep span needs f_hi > f_lo >= 0")
        if not self.rbw > 0:
            raise ValueError("resolution bandwidth must be positive")
        if self.n_points < 2:
            raise ValueError("a sweep grid needs at least two points")
        if self.method not in METHODS:
            raise ValueError("unknown trace method %r" % self.method)

    @property
    def span(self):
        return (self.f_lo, self.f_hi)

    def powers_dbm(self):
        if self.n_steps == 1:
            return np.array([float(self.power_start_dbm)])
        return np.linspace(self.power_start_dbm, self.power_stop_dbm, self.n_steps)

    def powers_w(self):
        return dbm_to_watt(self.powers_dbm())

    def grid(self):
        return make_grid(self.f_lo, self.f_hi, self.n_points)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise HDConfigError("unknown sweep keys: %s" % ', '.join(sorted(unknown)))
        return cls(**d)


@dataclass(frozen=True)
class CampaignStep:
    """
    One power step: the LO power, the monitored photocurrents and the recorded trace.
    """
    index: int
    power_dbm: float
    pair: PhotocurrentPair
    trace: SpectrumTrace


class CampaignResult:
    """
    A simulated measurement campaign: one trace per sweep step plus the amplifier dark trace (LO off) and the
    analyzer floor, and the S21 of the cable and board when one was simulated.

    Steps are kept sorted by index regardless of the order they were produced in.
    """

    def __init__(self, model, sweep, seed, steps=(), dark=None, danl=None, s21=None, command=None):
        self.model = model
        self.sweep = sweep
        self.seed = seed
        self.steps = sortedcontainers.SortedKeyList(steps, key=operator.attrgetter('index'))
        self.dark = dark
        self.danl = danl
        self.s21 = s21
        self.command = command

    def __repr__(self):
        return '<CampaignResult %s, %d steps, seed %d>' % (self.model.name, len(self.steps), self.seed)

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    @property
    def traces(self):
        return [s.trace for s in self.steps]

    @property
    def pairs(self):
        return [s.pair for s in self.steps]

    def add_step(self, step):
        self.steps.add(step)

    #
    # Persistence
    #

    def save(self, directory, command=None):
        """
        Write the campaign to ``directory``: one CSV per trace and a ``manifest.json`` holding the model, the sweep,
        the seed and a SHA-256 of every file. The output depends only on the campaign contents.

        :return: The manifest as a dict.
        """
        from .. import __version__
        os.makedirs(directory, exist_ok=True)
        if command is not None:
            self.command = command

        files = {}

        def put(name, obj):
            path = os.path.join(directory, name)
            obj.to_csv(path)
            files[name] = file_sha256(path)
            return name

        steps = []
        for step in self.steps:
            steps.append({
                'index': step.index,
                'file': put('trace_%03d.csv' % step.index, step.trace),
                'power_dbm': float(step.power_dbm),
                'i_top': float(step.pair.I_top),
                'i_bottom': float(step.pair.I_bottom),
                'residual_difference': float(step.pair.difference),
                'rbw': step.trace.rbw,
                'stage': step.trace.stage,
            })
        extras = {}
        for name, trace in (('dark', self.dark), ('danl', self.danl)):
            if trace is not None:
                extras[name] = {'file': put(name + '.csv', trace), 'rbw': trace.rbw, 'stage': trace.stage}
        if self.s21 is not None:
            extras['s21'] = {'file': put('s21.csv', self.s21)}

        manifest = {
            'format': _FORMAT,
            'tool_version': '.'.join(str(x) for x in __version__),
            'command': list(self.command) if self.command else [],
            'seed': int(self.seed),
            'model': dump_model(self.model),
            'model_fingerprint': self.model.fingerprint(),
            'sweep': self.sweep.to_dict(),
            'steps': steps,
            'files': files,
        }
        manifest.update(extras)
        with open(os.path.join(directory, MANIFEST), 'w', newline='') as f:
            dump_json(manifest, f)
        l.info("saved campaign with %d steps to %s", len(steps), directory)
        return manifest

    @classmethod
    def load(cls, directory):
        """
        Read a campaign written by :meth:`save`, checking every file against its recorded hash.

        :raises HDFileNotFoundError:    if there is no manifest.
        :raises HDCorruptCampaignError: if a file is missing or does not match its hash.
        """
        path = os.path.join(directory, MANIFEST)
        if not os.path.isfile(path):
            raise HDFileNotFoundError("no campaign manifest in %s" % directory)
        try:
            with open(path) as f:
                manifest = json.load(f)
        except ValueError as e:
            raise HDCorruptCampaignError("unreadable manifest %s: %s" % (path, e))
        if manifest.get('format') != _FORMAT:
            raise HDCorruptCampaignError("%s is not an hdkit campaign manifest" % path)

        for name, digest in sorted(manifest['files'].items()):
            fpath = os.path.join(directory, name)
            if not os.path.isfile(fpath):
                raise HDCorruptCampaignError("campaign file %s is missing" % name)
            if file_sha256(fpath) != digest:
                raise HDCorruptCampaignError("campaign file %s does not match its recorded hash" % name)

        model, _ = read_config(io.StringIO(manifest['model']))
        sweep = LOSweep.from_dict(manifest['sweep'])

        def trace(entry):
            return SpectrumTrace.from_csv(os.path.join(directory, entry['file']), rbw=entry['rbw'],
                                          stage=entry['stage'])

        steps = [CampaignStep(index=s['index'], power_dbm=s['power_dbm'],
                              pair=PhotocurrentPair(s['i_top'], s['i_bottom']), trace=trace(s))
                 for s in manifest['steps']]
        dark = trace(manifest['dark']) if 'dark' in manifest else None
        danl = trace(manifest['danl']) if 'danl' in manifest else None
        s21 = S21Trace.from_csv(os.path.join(directory, manifest['s21']['file'])) if 's21' in manifest else None
        return cls(model, sweep, manifest['seed'], steps, dark=dark, danl=danl, s21=s21,
                   command=manifest.get('command') or None)


def _step_seed(seed, index):
    return np.random.SeedSequence(seed, spawn_key=(index,))


def run_lo_sweep(model, sweep=None, seed=0, s21=None, workers=1):
    """
    Simulate an LO power sweep.

    Every step computes the photocurrents at its power and records one analyzer trace. With ``sweep.balance`` the
    bottom photodiode is balanced once at the highest power and that setting is kept for the whole sweep. A dark
    trace (LO off) and the analyzer floor are recorded alongside.

    Each step draws from a seed derived from ``seed`` and its index, so the result does not depend on ``workers``.

    :param DetectorModel model: The detector.
    :param LOSweep sweep:       The sweep; :class:`LOSweep` defaults when omitted.
    :param int seed:            Campaign seed.
    :param S21Trace s21:        Cable and board loss between device and analyzer, if any.
    :param int workers:         Number of threads computing steps.
    :rtype:                     CampaignResult
    """
    if sweep is None:
        sweep = LOSweep()
    powers_dbm = sweep.powers_dbm()
    powers_w = sweep.powers_w()
    if sweep.balance:
        frontend = balanced_frontend(model.frontend, float(np.max(powers_w)))
        model = model.replace(frontend=frontend)

    grid = sweep.grid()
    resp = solve_detector(model, grid)

    def record(pair, index):
        if sweep.method == 'montecarlo':
            return monte_carlo_trace(model, resp.bias, resp.hpi, resp.Z, pair, grid, sweep.rbw,
                                     n_samples=sweep.n_samples, n_averages=sweep.n_averages,
                                     seed=_step_seed(seed, index), s21=s21)
        return analytic_esa_trace(model, resp.bias, resp.hpi, resp.Z, pair, grid, sweep.rbw, s21=s21)

    def run_step(index):
        pair = photocurrents(model.frontend, float(powers_w[index]))
        step = CampaignStep(index=index, power_dbm=float(powers_dbm[index]), pair=pair, trace=record(pair, index))
        l.info("step %d: %.2f dBm, I_total=%.4g A, difference %.4g A", index, step.power_dbm, pair.total,
               pair.difference)
        return step

    result = CampaignResult(model, sweep, seed, s21=s21)
    indices = range(sweep.n_steps)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for step in pool.map(run_step, indices):
                result.add_step(step)
    else:
        for index in indices:
            result.add_step(run_step(index))

    result.dark = record(PhotocurrentPair(0.0, 0.0), sweep.n_steps)
    result.danl = danl_trace(model, grid, sweep.rbw)
    return result


VariancePoint = namedtuple('VariancePoint', ('I_total', 'raw_variance', 'electronics_subtracted_variance'))


def variance_vs_photocurrent(campaign, f0):
    """
    Noise power density at ``f0`` of every step against its total photocurrent.

    The subtracted variance removes the dark trace, which carries both the amplifier noise and the analyzer floor.

    :return: A list of :class:`VariancePoint` in step order, densities in W/Hz.
    :raises HDOutOfGridError: if ``f0`` is outside the trace grid.
    """
    dark = float(campaign.dark.value_at(f0)) if campaign.dark is not None else 0.0
    out = []
    for step in campaign.steps:
        raw = float(step.trace.value_at(f0))
        out.append(VariancePoint(step.pair.total, raw, raw - dark))
    return out


def write_variance_csv(points, dest, column='electronics_subtracted_variance'):
    """
    Write ``i_total_a,variance`` rows for the chosen variance column.
    """
    with stream_or_path(dest, 'w') as f:
        w = csv.writer(f, lineterminator='\n')
        w.writerow(('i_total_a', 'variance'))
        for p in points:
            w.writerow((repr(float(p.I_total)), repr(float(getattr(p, column)))))
