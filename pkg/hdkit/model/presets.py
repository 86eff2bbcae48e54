import os
import logging

import sortedcontainers

from .config import read_config
from ..errors import HDFileNotFoundError

__all__ = ('PRESET_PATH_ENV', 'ALL_PRESETS', 'register_preset', 'preset_search_path', 'find_preset',
           'list_presets', 'load_preset', 'reference_device')

l = logging.getLogger('hdkit.model.presets')

PRESET_PATH_ENV = 'HDKIT_PRESET_PATH'
_BUILTIN_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.realpath(__file__))), 'presets')

ALL_PRESETS = sortedcontainers.SortedDict()


def register_preset(name, path):
    """
    Make the configuration file at ``path`` available under ``name``. Later registrations win.
    """
    if not os.path.isfile(path):
        raise HDFileNotFoundError("preset file %s does not exist" % path)
    ALL_PRESETS[name] = os.path.realpath(path)


def preset_search_path():
    """
    Directories searched for ``<name>.ini``: those in $HDKIT_PRESET_PATH, then the presets shipped with hdkit.
    """
    dirs = [d for d in os.environ.get(PRESET_PATH_ENV, '').split(os.pathsep) if d]
    dirs.append(_BUILTIN_DIR)
    return dirs


def _possible_paths(name):
    for d in preset_search_path():
        fullpath = os.path.realpath(os.path.join(d, name + '.ini'))
        if os.path.isfile(fullpath):
            yield fullpath


def find_preset(name):
    """
    Resolve a preset name or a path to a configuration file.

    :raises HDFileNotFoundError: if nothing matches.
    """
    if name in ALL_PRESETS:
        return ALL_PRESETS[name]
    if os.path.isfile(name):
        return os.path.realpath(name)
    for path in _possible_paths(name):
        l.info("preset %s resolved to %s", name, path)
        return path
    raise HDFileNotFoundError("Could not find preset %s" % name)


def list_presets():
    """
    All preset names visible on the search path plus registered ones, sorted, mapped to their files. Earlier
    search-path entries shadow later ones.
    """
    found = sortedcontainers.SortedDict()
    for d in reversed(preset_search_path()):
        try:
            names = os.listdir(d)
        except OSError:
            continue
        for fname in names:
            if fname.endswith('.ini'):
                found[fname[:-4]] = os.path.realpath(os.path.join(d, fname))
    found.update(ALL_PRESETS)
    return found


def load_preset(name):
    """
    :return: ``(model, sweep)`` as :func:`hdkit.model.config.read_config` returns them.
    """
    return read_config(find_preset(name))


def reference_device():
    """
    The monolithic detector with its published component values. Photodiode and amplifier-input capacitances
    are literature orders of magnitude, not measurements of this device.
    """
    return load_preset('monolithic')[0]
