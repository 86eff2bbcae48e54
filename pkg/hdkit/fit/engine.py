"""
Damped least squares.

The solver works on parameters scaled by the magnitude of their initial values and damps the Gauss-Newton step
with lambda * diag(J^T J) (Marquardt scaling). lambda starts at 1e-3 and moves by a factor of ten: down after an
accepted step, up after a rejected one. The Jacobian is a central finite difference.
"""
import json
import math
import logging
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ..errors import HDNoConvergenceError, HDRankDeficientError

__all__ = ('FitResult', 'LMState', 'levenberg', 'jacobian', 'covariance', 'least_squares')

l = logging.getLogger('hdkit.fit.engine')

LAMBDA_START = 1e-3
LAMBDA_MAX = 1e16
MAX_ITER = 200
GTOL = 1e-10
# a relative cost gain of CTOL**2 is all that is left to take
CTOL = 1e-6
_FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)
# pivots below this fraction of the largest are finite-difference noise
_RANK_RTOL = 1e-8


def _clean(x):
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class FitResult:
    """
    Outcome of a fit.

    :ivar params:           Parameter estimates by name, in fit order.
    :ivar std_errs:         Standard errors by name, from the local quadratic approximation.
    :ivar residual_norm:    Sum of squared residuals at the optimum.
    :ivar converged:        Whether a convergence test was met.
    :ivar n_iter:           Trial steps taken.
    :ivar extras:           Derived quantities (extrapolations, flags) reported with the fit.
    """
    params: dict
    std_errs: dict
    residual_norm: float
    converged: bool
    n_iter: int
    extras: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.params[name]

    def to_dict(self):
        extras = {}
        for k, v in self.extras.items():
            if isinstance(v, dict):
                extras[k] = {str(kk): _clean(vv) for kk, vv in v.items()}
            elif isinstance(v, bool) or v is None or isinstance(v, str):
                extras[k] = v
            else:
                extras[k] = _clean(v)
        return {
            'params': {k: _clean(v) for k, v in self.params.items()},
            'std_errs': {k: _clean(v) for k, v in self.std_errs.items()},
            'residual_norm': _clean(self.residual_norm),
            'converged': bool(self.converged),
            'n_iter': int(self.n_iter),
            'extras': extras,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


LMState = namedtuple('LMState', ('params', 'cost', 'converged', 'n_iter'))


def jacobian(residual_fn, p, r0=None):
    """
    Central-difference Jacobian of ``residual_fn`` at ``p``.
    """
    p = np.asarray(p, dtype=float)
    if r0 is None:
        r0 = residual_fn(p)
    J = np.empty((len(r0), len(p)))
    for j in range(len(p)):
        h = _FD_STEP * max(1.0, abs(p[j]))
        up, dn = p.copy(), p.copy()
        up[j] += h
        dn[j] -= h
        J[:, j] = (residual_fn(up) - residual_fn(dn)) / (2 * h)
    return J


def _rank(J):
    if not np.all(np.isfinite(J)):
        return 0
    R = scipy.linalg.qr(J, mode='r', pivoting=True)[0]
    diag = np.abs(np.diag(R))
    if not len(diag) or diag[0] == 0:
        return 0
    return int(np.sum(diag > _RANK_RTOL * diag[0]))


def _max_cos(J, r):
    rn = np.linalg.norm(r)
    if rn == 0:
        return 0.0
    coln = np.linalg.norm(J, axis=0)
    live = coln > 0
    if not np.any(live):
        return 0.0
    return float(np.max(np.abs(J[:, live].T @ r) / (coln[live] * rn)))


def levenberg(residual_fn, p0, max_iter=MAX_ITER, gtol=GTOL, ctol=CTOL):
    """
    Minimize the sum of squares of ``residual_fn(p)``.

    Converged means the gradient J^T r, taken in the scaled parameters, has a norm below ``gtol``, or the largest
    cosine between a Jacobian column and the residual is below ``ctol``. The first test ends exact fits, whose
    residual shrinks to rounding noise; the second ends fits that leave a residual. A step is accepted only if it
    lowers the cost; when no step can, damping grows until it passes ``LAMBDA_MAX`` and the fit is returned as
    not converged.

    :rtype: LMState
    :raises HDRankDeficientError: if the Jacobian at ``p0`` does not have full column rank.
    """
    p0 = np.asarray(p0, dtype=float)
    if not np.all(np.isfinite(p0)):
        raise ValueError("initial parameters must be finite")
    scale = np.where(p0 != 0, np.abs(p0), 1.0)

    def R(z):
        return np.asarray(residual_fn(z * scale), dtype=float)

    z = p0 / scale
    r = R(z)
    if not np.all(np.isfinite(r)):
        raise ValueError("residuals are not finite at the initial parameters")
    if len(r) < len(z):
        raise ValueError("need at least as many residuals (%d) as parameters (%d)" % (len(r), len(z)))
    cost = float(r @ r)
    lam = LAMBDA_START
    n_iter = 0

    J = jacobian(R, z, r)
    if _rank(J) < len(z):
        raise HDRankDeficientError("Jacobian at the initial parameters is rank deficient")

    while True:
        g = J.T @ r
        if np.linalg.norm(g) < gtol or _max_cos(J, r) < ctol:
            return LMState(z * scale, cost, True, n_iter)
        if n_iter >= max_iter:
            return LMState(z * scale, cost, False, n_iter)
        A = J.T @ J
        D = np.diag(A).copy()
        D = np.maximum(D, 1e-12 * np.max(D))

        while True:
            n_iter += 1
            try:
                delta = scipy.linalg.solve(A + lam * np.diag(D), -g, assume_a='pos')
            except (scipy.linalg.LinAlgError, ValueError):
                delta = None
            if delta is not None:
                z_new = z + delta
                r_new = R(z_new)
                cost_new = float(r_new @ r_new) if np.all(np.isfinite(r_new)) else math.inf
            else:
                cost_new = math.inf
            if cost_new < cost:
                z, r, cost = z_new, r_new, cost_new
                lam = max(lam / 10.0, 1e-15)
                l.debug("iteration %d: cost %.6e accepted, lambda %.1e", n_iter, cost, lam)
                break
            lam *= 10.0
            l.debug("iteration %d: step rejected, lambda %.1e", n_iter, lam)
            if lam > LAMBDA_MAX or n_iter >= max_iter:
                return LMState(z * scale, cost, False, n_iter)
        J = jacobian(R, z, r)


def covariance(residual_fn, p, dof, scale=None):
    """
    Parameter covariance s^2 (J^T J)^-1 at ``p`` with s^2 = cost / dof. The Jacobian is taken in parameters divided
    by ``scale``, their typical magnitudes, which default to ``|p|`` (1 where ``p`` is zero). Pass a scale when a
    parameter may sit at or next to zero.

    :raises HDRankDeficientError: if J does not have full column rank.
    """
    p = np.asarray(p, dtype=float)
    if scale is None:
        scale = np.where(p != 0, np.abs(p), 1.0)
    else:
        scale = np.asarray(scale, dtype=float)
        if scale.shape != p.shape or not np.all(scale > 0):
            raise ValueError("scale must hold one positive magnitude per parameter")

    def R(z):
        return np.asarray(residual_fn(z * scale), dtype=float)

    z = p / scale
    r = R(z)
    J = jacobian(R, z, r)
    if _rank(J) < len(p):
        raise HDRankDeficientError("Jacobian at the optimum is rank deficient")
    s2 = float(r @ r) / max(dof, 1)
    return s2 * scipy.linalg.inv(J.T @ J) * np.outer(scale, scale)


def _unpack(data):
    if hasattr(data, 'freqs') and hasattr(data, 'linear'):
        return np.asarray(data.freqs, dtype=float), np.asarray(data.linear(), dtype=float)
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0], arr[:, 1]
    if arr.ndim == 2 and arr.shape[0] == 2:
        return arr[0], arr[1]
    raise ValueError("data must be a trace or a sequence of (x, y) points")


def least_squares(model_fn, data, init, sigma=None, relative=False, strict=False, max_iter=MAX_ITER):
    """
    Fit ``model_fn(x, *params)`` to ``data``.

    :param model_fn:    The model; called with the abscissae and one positional argument per parameter.
    :param data:        A SpectrumTrace (fitted in linear units against frequency) or ``(x, y)`` points.
    :param init:        Initial values: a dict by name, or a sequence (named ``p0``, ``p1``, ...).
    :param sigma:       Per-point standard deviations for absolute residuals.
    :param relative:    Use residuals y/m - 1, i.e. weights proportional to the model value.
    :param strict:      Raise instead of returning a result flagged as not converged.
    :rtype:             FitResult
    :raises HDNoConvergenceError: only with ``strict``.
    :raises HDRankDeficientError: if the Jacobian does not have full column rank.
    """
    x, y = _unpack(data)
    if isinstance(init, dict):
        names = list(init)
        p0 = [init[n] for n in names]
    else:
        p0 = list(init)
        names = ['p%d' % i for i in range(len(p0))]
    if len(y) < len(p0):
        raise ValueError("need at least as many points as parameters")
    w = None if sigma is None else 1.0 / np.broadcast_to(np.asarray(sigma, dtype=float), y.shape)

    def residuals(p):
        m = np.asarray(model_fn(x, *p), dtype=float)
        if relative:
            return y / m - 1.0
        return (y - m) if w is None else (y - m) * w

    state = levenberg(residuals, p0, max_iter=max_iter)
    cov = covariance(residuals, state.params, len(y) - len(p0))
    errs = np.sqrt(np.clip(np.diag(cov), 0, None))
    result = FitResult(params=dict(zip(names, map(float, state.params))), std_errs=dict(zip(names, map(float, errs))),
                       residual_norm=state.cost, converged=state.converged, n_iter=state.n_iter)
    if not state.converged:
        if strict:
            raise HDNoConvergenceError("fit did not converge in %d iterations" % state.n_iter)
        l.warning("fit did not converge in %d iterations (cost %.4e)", state.n_iter, state.cost)
    return result
