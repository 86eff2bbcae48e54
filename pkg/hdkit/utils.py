import os
import json
import hashlib
import contextlib

import numpy as np

from .errors import HDFileNotFoundError

__all__ = ('db_to_lin', 'lin_to_db', 'dbm_to_watt', 'watt_to_dbm', 'stream_or_path', 'file_sha256', 'dump_json')

# Levels are power ratios unless stated otherwise: dB = 10*log10(ratio).

def db_to_lin(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)

def lin_to_db(lin):
    return 10.0 * np.log10(np.asarray(lin, dtype=float))

def dbm_to_watt(dbm):
    """
    dBm (or dBm/Hz) to W (or W/Hz).
    """
    return 1e-3 * db_to_lin(dbm)

def watt_to_dbm(watt):
    """
    W (or W/Hz) to dBm (or dBm/Hz).
    """
    return lin_to_db(np.asarray(watt, dtype=float) / 1e-3)


@contextlib.contextmanager
def stream_or_path(obj, perms='r'):
    if hasattr(obj, 'read') or hasattr(obj, 'write'):
        if hasattr(obj, 'seek') and 'r' in perms:
            obj.seek(0)
        yield obj
    else:
        if 'r' in perms and not os.path.exists(obj):
            raise HDFileNotFoundError("%r is not a valid path" % obj)

        with open(obj, perms, newline='' if 'b' not in perms else None) as f:
            yield f


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            h.update(chunk)
    return h.hexdigest()


def dump_json(obj, stream=None):
    """
    Serialize ``obj`` deterministically (sorted keys, fixed indentation). Returns the text if ``stream`` is None.
    """
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if stream is None:
        return text
    stream.write(text)
    return text
