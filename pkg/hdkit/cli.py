"""
Command-line interface.

Exit codes: 0 success, 2 bad usage or input, 3 I/O or integrity failure, 4 a fit did not converge.
"""
import os
import sys
import logging
import argparse
from dataclasses import dataclass

import numpy as np

from .circuit import solve_detector, f3db_butterworth_estimate, gain_bandwidth_product
from .design import (DesignConstraints, select_feedback_resistor, tune_bias_resistors, interconnect_tradeoff,
                     write_table_csv)
from .errors import (HDError, HDConfigError, HDInvalidModelError, HDFileNotFoundError, HDNonPositiveInputError,
                     HDGridMismatchError, HDCorruptCampaignError, HDNoConvergenceError, HDRankDeficientError)
from .fit import (fit_bandwidth, fit_clearance, fit_loglog_gradient, read_points_csv, extract_cmrr,
                  extract_responsivity, subtract_noise_floor, de_embed, clearance_trace, S21Trace)
from .model import SpectrumTrace, list_presets, find_preset, read_config, dump_model
from .noise import shot_noise_efficiency
from .simulate import LOSweep, CampaignResult, run_lo_sweep, variance_vs_photocurrent
from .utils import dump_json

__all__ = ('main', 'build_parser', 'EXIT_OK', 'EXIT_USAGE', 'EXIT_IO', 'EXIT_NO_CONVERGENCE')

l = logging.getLogger('hdkit.cli')

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NO_CONVERGENCE = 4

_USAGE_ERRORS = (HDConfigError, HDInvalidModelError, HDFileNotFoundError, HDNonPositiveInputError,
                 HDGridMismatchError, ValueError)
_IO_ERRORS = (HDCorruptCampaignError, OSError)


def _fit_exit(result):
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


#
# simulate
#

def cmd_simulate(args, out=sys.stdout):
    model, sweep_cfg = read_config(find_preset(args.config))
    sweep = dict(sweep_cfg or {})
    if args.method is not None:
        sweep['method'] = args.method
    if args.balance:
        sweep['balance'] = True
    sweep = LOSweep.from_dict(sweep)
    s21 = S21Trace.from_csv(args.s21) if args.s21 else None

    campaign = run_lo_sweep(model, sweep, seed=args.seed, s21=s21, workers=args.workers)
    # the output directory is not part of the recorded command, so reruns elsewhere are byte-identical
    command = ['simulate', args.config, '--seed', str(args.seed)]
    if args.method is not None:
        command += ['--method', args.method]
    if args.balance:
        command.append('--balance')
    if args.s21:
        command += ['--s21', os.path.basename(args.s21)]
    manifest = campaign.save(args.out, command=command)
    out.write(dump_json({'out': args.out, 'files': sorted(manifest['files']), 'steps': len(campaign)}))
    return EXIT_OK


#
# fit
#

def _load_trace(path):
    return SpectrumTrace.from_csv(path)


def cmd_fit(args, out=sys.stdout):
    kind = args.kind
    if kind == 'bandwidth':
        trace = _load_trace(args.trace)
        for floor in args.floor or ():
            trace = subtract_noise_floor(trace, _load_trace(floor))
        if args.s21:
            trace = de_embed(trace, S21Trace.from_csv(args.s21))
        result = fit_bandwidth(trace, shape=args.shape)
    elif kind == 'clearance':
        trace = _load_trace(args.trace)
        if args.dark:
            trace = clearance_trace(trace, _load_trace(args.dark), _load_trace(args.danl) if args.danl else None)
        result = fit_clearance(trace, fix_c_zero=args.c_zero)
    elif kind == 'gradient':
        result = fit_loglog_gradient(read_points_csv(args.points))
    elif kind == 'cmrr':
        out.write(dump_json({'cmrr_db': extract_cmrr(args.single, args.both)}))
        return EXIT_OK
    elif kind == 'responsivity':
        out.write(dump_json({'responsivity_a_per_w': extract_responsivity(args.current, args.power, args.loss_db)}))
        return EXIT_OK
    else:
        raise ValueError("unknown fit kind %r" % kind)
    out.write(result.to_json())
    return _fit_exit(result)


#
# design
#

def _print_table(rows, columns, out):
    out.write('  '.join('%-16s' % c for c in columns).rstrip() + '\n')
    for row in rows:
        out.write('  '.join('%-16.6g' % getattr(row, c) for c in columns).rstrip() + '\n')


def cmd_design(args, out=sys.stdout):
    if args.sub == 'rf':
        c = DesignConstraints(min_clearance_db=args.min_clearance_db, min_bandwidth=args.min_bandwidth,
                              A0fA=args.a0fa, C_in=args.c_in, base_shot=args.base_shot)
        rng = select_feedback_resistor(c, args.i_total)
        if not rng.feasible:
            out.write("infeasible: %s\n" % rng.binding)
        else:
            out.write("R_F range: %.6g .. %.6g Ohm\n" % (rng.lower, rng.upper))
        if args.csv:
            write_table_csv([rng], args.csv)
        return EXIT_OK

    model, _ = read_config(find_preset(args.config))
    if args.sub == 'bias':
        tuning = tune_bias_resistors(args.target, model.tia, model.hbt, model.constants)
        out.write("R_C = %.6g Ohm\nR_E = %.6g Ohm\nI_C = %.6g A\nV_CE = %.6g V\n"
                  % (tuning.R_C, tuning.R_E, tuning.bias.I_C, tuning.bias.V_CE))
        if args.csv:
            write_table_csv([_BiasRow(tuning.R_C, tuning.R_E, tuning.bias.I_C, tuning.bias.V_CE)], args.csv)
        return EXIT_OK
    if args.sub == 'interconnect':
        alts = _float_list(args.alts)
        rows = interconnect_tradeoff(model.input, alts)
        _print_table(rows, ('C_interconnect', 'C_in', 'ratio', 'speedup'), out)
        if args.csv:
            write_table_csv(rows, args.csv)
        return EXIT_OK
    raise ValueError("unknown design command %r" % args.sub)


@dataclass(frozen=True)
class _BiasRow:
    R_C: float
    R_E: float
    I_C: float
    V_CE: float


def _float_list(text):
    try:
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise ValueError("expected a comma-separated list of numbers, got %r" % text)


#
# report
#

def build_report(campaign, f0=1e9):
    """
    Run the characterization pipeline on a campaign and collect its figures of merit.

    The strongest step is DANL- and dark-subtracted (and de-embedded when the campaign carries an S21) for the
    bandwidth fit; its ratio to the dark trace gives the clearance fit; the variance at ``f0`` of every step gives
    the shot-noise gradient.
    """
    if not len(campaign) or campaign.dark is None or campaign.danl is None:
        raise HDConfigError("campaign needs at least one step plus dark and DANL traces")
    top = max(campaign.steps, key=lambda s: s.pair.total)
    electronics = subtract_noise_floor(campaign.dark, campaign.danl)
    shot = subtract_noise_floor(subtract_noise_floor(top.trace, campaign.danl), electronics)
    if campaign.s21 is not None:
        shot = de_embed(shot, campaign.s21)
    bandwidth = fit_bandwidth(shot)
    clearance = fit_clearance(clearance_trace(top.trace, campaign.dark, campaign.danl))

    points = variance_vs_photocurrent(campaign, f0)
    usable = [(p.I_total, p.electronics_subtracted_variance) for p in points
              if p.I_total > 0 and p.electronics_subtracted_variance > 0]
    gradient = fit_loglog_gradient(usable) if len(usable) >= 3 else None

    dc_db = clearance.extras['dc_clearance_db']
    return {
        'model': campaign.model.name,
        'model_fingerprint': campaign.model.fingerprint(),
        'seed': int(campaign.seed),
        'n_steps': len(campaign),
        'f0_hz': float(f0),
        'f3db_hz': bandwidth.params['f3db_hz'],
        'bandwidth': bandwidth.to_dict(),
        'clearance_dc_db': dc_db,
        'efficiency_dc': float(shot_noise_efficiency(dc_db)),
        'clearance': clearance.to_dict(),
        'gradient': gradient.params['gradient'] if gradient else None,
        'gradient_fit': gradient.to_dict() if gradient else None,
        'photocurrents': [{'power_dbm': s.power_dbm, 'i_top': s.pair.I_top, 'i_bottom': s.pair.I_bottom}
                          for s in campaign.steps],
    }


def cmd_report(args, out=sys.stdout):
    campaign = CampaignResult.load(args.campaign)
    report = build_report(campaign, f0=args.f0)
    text = dump_json(report)
    if args.out:
        with open(args.out, 'w', newline='') as f:
            f.write(text)
    out.write(text)
    return EXIT_OK


#
# preset
#

def cmd_preset(args, out=sys.stdout):
    if args.sub == 'list':
        for name, path in list_presets().items():
            out.write("%-16s %s\n" % (name, path))
        return EXIT_OK
    model, sweep = read_config(find_preset(args.name))
    out.write(dump_model(model, sweep))
    resp = solve_detector(model, np.linspace(0.0, 50e9, 2001))
    out.write("# I_C = %.4g A, V_CE = %.4g V, |Z(0)| = %.4g Ohm, feedback bandwidth estimate %.4g Hz\n"
              % (resp.bias.I_C, resp.bias.V_CE, abs(resp.Z.values[0]),
                 f3db_butterworth_estimate(gain_bandwidth_product(model.hbt), model.input.C_in, model.tia.R_F)))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog='hdkit', description="Homodyne detector design, simulation and "
                                                          "characterization toolkit.")
    p.add_argument('--log-level', default='WARNING', help="logging level (default: WARNING)")
    sub = p.add_subparsers(dest='command')
    sub.required = True

    s = sub.add_parser('simulate', help="simulate an LO power sweep campaign")
    s.add_argument('config', help="preset name or configuration file")
    s.add_argument('--seed', type=int, default=0, help="campaign seed (default: 0)")
    s.add_argument('--out', required=True, help="output directory")
    s.add_argument('--method', choices=('analytic', 'montecarlo'), default=None,
                   help="trace synthesis (default: the config's, else analytic)")
    s.add_argument('--balance', action='store_true', help="balance the photocurrents at the highest power")
    s.add_argument('--s21', default=None, help="S21 CSV of cable and board loss")
    s.add_argument('--workers', type=int, default=1, help="threads computing steps (default: 1)")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser('fit', help="fit a trace or derive a figure of merit")
    fsub = f.add_subparsers(dest='kind')
    fsub.required = True
    fb = fsub.add_parser('bandwidth')
    fb.add_argument('trace')
    fb.add_argument('--floor', action='append', help="floor trace to subtract; repeatable (DANL, then dark)")
    fb.add_argument('--s21', default=None, help="S21 CSV to de-embed")
    fb.add_argument('--shape', choices=('first_order', 'butterworth'), default='first_order')
    fc = fsub.add_parser('clearance')
    fc.add_argument('trace', help="clearance ratio trace, or the LO-on trace with --dark")
    fc.add_argument('--dark', default=None)
    fc.add_argument('--danl', default=None)
    fc.add_argument('--c-zero', action='store_true', help="fix C = 0 (flat clearance)")
    fg = fsub.add_parser('gradient')
    fg.add_argument('points', help="CSV with header i_total_a,variance")
    fm = fsub.add_parser('cmrr')
    fm.add_argument('--single', type=float, required=True, help="tone with one photodiode (dBm)")
    fm.add_argument('--both', type=float, required=True, help="tone with both photodiodes (dBm)")
    fr = fsub.add_parser('responsivity')
    fr.add_argument('--current', type=float, required=True, help="summed photocurrent (A)")
    fr.add_argument('--power', type=float, required=True, help="off-chip LO power (W)")
    fr.add_argument('--loss-db', type=float, default=4.0, help="grating coupler loss (default: 4.0 dB)")
    f.set_defaults(func=cmd_fit)

    d = sub.add_parser('design', help="design-space exploration")
    dsub = d.add_subparsers(dest='sub')
    dsub.required = True
    dr = dsub.add_parser('rf', help="feedback resistor range")
    dr.add_argument('--min-clearance-db', type=float, required=True)
    dr.add_argument('--min-bandwidth', type=float, required=True)
    dr.add_argument('--a0fa', type=float, required=True)
    dr.add_argument('--c-in', type=float, required=True)
    dr.add_argument('--i-total', type=float, required=True)
    dr.add_argument('--base-shot', type=float, default=0.0)
    dr.add_argument('--csv', default=None)
    db = dsub.add_parser('bias', help="tune R_C and R_E for a collector current")
    db.add_argument('--target', type=float, required=True)
    db.add_argument('--config', default='monolithic')
    db.add_argument('--csv', default=None)
    di = dsub.add_parser('interconnect', help="bandwidth against interconnect capacitance")
    di.add_argument('--alts', required=True, help="comma-separated interconnect capacitances (F)")
    di.add_argument('--config', default='monolithic')
    di.add_argument('--csv', default=None)
    d.set_defaults(func=cmd_design)

    r = sub.add_parser('report', help="figures of merit of a stored campaign")
    r.add_argument('campaign')
    r.add_argument('--f0', type=float, default=1e9, help="frequency of the variance points (default: 1 GHz)")
    r.add_argument('--out', default=None)
    r.set_defaults(func=cmd_report)

    pr = sub.add_parser('preset', help="list or show detector presets")
    psub = pr.add_subparsers(dest='sub')
    psub.required = True
    psub.add_parser('list')
    ps = psub.add_parser('show')
    ps.add_argument('name')
    pr.set_defaults(func=cmd_preset)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING), stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        return args.func(args, out=out)
    except _IO_ERRORS as e:
        l.error("%s", e)
        sys.stderr.write("error: %s\n" % e)
        return EXIT_IO
    except _USAGE_ERRORS as e:
        l.error("%s", e)
        sys.stderr.write("error: %s\n" % e)
        return EXIT_USAGE
    except (HDNoConvergenceError, HDRankDeficientError) as e:
        l.error("%s", e)
        sys.stderr.write("error: %s\n" % e)
        return EXIT_NO_CONVERGENCE
    except HDError as e:
        sys.stderr.write("error: %s\n" % e)
        return EXIT_USAGE
