"""
INI configuration of detector models.

A configuration file has one section per model component plus optional ``[metadata]`` and ``[sweep]`` sections::

    [detector]
    name = monolithic
    esa_danl_dbm_hz = -168.0

    [hbt]
    f_T = 220e9
    ...

Keys are case-sensitive and equal to the dataclass field names; missing keys take the field defaults.
"""
import io
import logging
import configparser
import dataclasses

from .constants import PhysicalConstants
from .components import HBTParams, TIADesign, InputNode, OpticalFrontEnd
from .detector import DetectorModel
from ..errors import HDConfigError, HDFileNotFoundError
from ..utils import stream_or_path

__all__ = ('read_config', 'load_model', 'dump_model', 'SWEEP_KEYS')

l = logging.getLogger('hdkit.model.config')

_SECTIONS = (
    ('constants', PhysicalConstants),
    ('hbt', HBTParams),
    ('tia', TIADesign),
    ('input', InputNode),
    ('frontend', OpticalFrontEnd),
)

_STRING_KEYS = {'top_arm'}
_OPTIONAL_KEYS = {'rin_dbchz'}

SWEEP_KEYS = {
    'power_start_dbm': float,
    'power_stop_dbm': float,
    'n_steps': int,
    'rbw': float,
    'f_lo': float,
    'f_hi': float,
    'n_points': int,
    'balance': None,        # boolean, parsed by configparser
    'method': str,
    'n_samples': int,
    'n_averages': int,
}


def _parser():
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    return cp


def _convert(section, key, raw):
    if key in _STRING_KEYS:
        return raw.strip()
    if key in _OPTIONAL_KEYS and raw.strip().lower() in ('', 'none'):
        return None
    try:
        return float(raw)
    except ValueError:
        raise HDConfigError("[%s] %s: %r is not a number" % (section, key, raw))


def _build(cp, section, cls):
    if not cp.has_section(section):
        return cls()
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, raw in cp.items(section):
        if key not in names:
            raise HDConfigError("[%s] unknown key %r" % (section, key))
        kwargs[key] = _convert(section, key, raw)
    return cls(**kwargs)


def _read_sweep(cp):
    if not cp.has_section('sweep'):
        return None
    out = {}
    for key in cp.options('sweep'):
        if key not in SWEEP_KEYS:
            raise HDConfigError("[sweep] unknown key %r" % key)
        try:
            if key == 'balance':
                out[key] = cp.getboolean('sweep', key)
            else:
                out[key] = SWEEP_KEYS[key](cp.get('sweep', key))
        except ValueError:
            raise HDConfigError("[sweep] %s: bad value %r" % (key, cp.get('sweep', key)))
    return out


def read_config(src):
    """
    Parse a configuration file.

    :param src:     A path, or a file-like object containing the INI text.
    :return:        A tuple ``(model, sweep)``; ``sweep`` is a dict of the ``[sweep]`` section or None.
    :raises HDConfigError: for syntax errors and unknown keys.
    :raises HDInvalidModelError: if the described model violates its invariants.
    """
    cp = _parser()
    try:
        with stream_or_path(src, 'r') as f:
            cp.read_file(f)
    except HDFileNotFoundError:
        raise
    except configparser.Error as e:
        raise HDConfigError("cannot parse configuration: %s" % e)

    known = {'detector', 'metadata', 'sweep'} | {s for s, _ in _SECTIONS}
    for section in cp.sections():
        if section not in known:
            raise HDConfigError("unknown section [%s]" % section)

    parts = {section: _build(cp, section, cls) for section, cls in _SECTIONS}
    kwargs = dict(parts)
    if cp.has_section('detector'):
        for key, raw in cp.items('detector'):
            if key == 'name':
                kwargs['name'] = raw.strip()
            elif key == 'esa_danl_dbm_hz':
                kwargs['esa_danl_dbm_hz'] = _convert('detector', key, raw)
            else:
                raise HDConfigError("[detector] unknown key %r" % key)
    if cp.has_section('metadata'):
        kwargs['metadata'] = tuple((k, v.strip()) for k, v in cp.items('metadata'))

    model = DetectorModel(**kwargs)
    l.debug("read model %s", model.name)
    return model, _read_sweep(cp)


def load_model(src):
    return read_config(src)[0]


def _fmt(value):
    if value is None:
        return 'none'
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_model(model, sweep=None):
    """
    Serialize ``model`` (and optionally a sweep dict) to configuration text that :func:`read_config` parses back
    into an equal model.
    """
    cp = _parser()
    cp['detector'] = {'name': model.name, 'esa_danl_dbm_hz': _fmt(float(model.esa_danl_dbm_hz))}
    for section, _ in _SECTIONS:
        part = getattr(model, section)
        cp[section] = {f.name: _fmt(getattr(part, f.name)) for f in dataclasses.fields(part)}
    if model.metadata:
        cp['metadata'] = dict(model.metadata)
    if sweep:
        cp['sweep'] = {k: _fmt(v) for k, v in sweep.items()}
    out = io.StringIO()
    cp.write(out)
    return out.getvalue()
