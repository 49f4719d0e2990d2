"""Hot kernels: beta-IRT negative log-likelihood and its gradient.

Two implementations with identical contracts live here. ``*_numba`` versions
are plain loops compiled with ``@njit``; ``*_numpy`` versions are vectorised
with scipy's special functions. ``loss_and_grad`` and ``loss_only`` point at
whichever backend :mod:`fairirt._accel` selected.

All kernels take the unconstrained surrogates: ``u`` (model logits, ability =
sigmoid(u)), ``v`` (individual logits, difficulty = sigmoid(v)) and the raw
discriminations ``a``. The loss is the negative *mean* beta log-density.
"""
import math

import numpy as np
from scipy.special import digamma as _sp_digamma
from scipy.special import gammaln as _sp_gammaln

from fairirt._accel import HAS_NUMBA, njit


# ---------------------------------------------------------------------------
# scalar helpers (numba-compilable)
# ---------------------------------------------------------------------------

@njit(cache=True, error_model="numpy")
def digamma_scalar(x):
    """Digamma for x > 0 via upward recurrence then the asymptotic series."""
    result = 0.0
    while x < 10.0:
        result -= 1.0 / x
        x += 1.0
    f = 1.0 / (x * x)
    series = f * (1.0 / 12.0 - f * (1.0 / 120.0 - f * (1.0 / 252.0 - f * (1.0 / 240.0
                                                                       - f * (1.0 / 132.0 - f * 691.0 / 32760.0)))))
    return result + math.log(x) - 0.5 / x - series


@njit(cache=True, error_model="numpy")
def log_sigmoid_scalar(z):
    if z >= 0.0:
        return -math.log1p(math.exp(-z))
    return z - math.log1p(math.exp(z))


@njit(cache=True, error_model="numpy")
def sigmoid_scalar(z):
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

@njit(cache=True, error_model="numpy")
def _loss_grad_loops(x, u, v, a, want_grad):
    n, m = x.shape
    gu = np.zeros(n)
    gv = np.zeros(m)
    ga = np.zeros(m)
    bad_i = -1
    bad_j = -1

    lt = np.empty(n)
    l1t = np.empty(n)
    th = np.empty(n)
    for i in range(n):
        lt[i] = log_sigmoid_scalar(u[i])
        l1t[i] = log_sigmoid_scalar(-u[i])
        th[i] = sigmoid_scalar(u[i])
    ld = np.empty(m)
    l1d = np.empty(m)
    de = np.empty(m)
    for j in range(m):
        ld[j] = log_sigmoid_scalar(v[j])
        l1d[j] = log_sigmoid_scalar(-v[j])
        de[j] = sigmoid_scalar(v[j])

    total = 0.0
    for i in range(n):
        for j in range(m):
            xij = x[i, j]
            lx = math.log(xij)
            l1x = math.log1p(-xij)
            da = lt[i] - ld[j]
            db = l1t[i] - l1d[j]
            alpha = math.exp(a[j] * da)
            beta = math.exp(a[j] * db)
            s = alpha + beta
            logpdf = ((alpha - 1.0) * lx + (beta - 1.0) * l1x
                      - math.lgamma(alpha) - math.lgamma(beta) + math.lgamma(s))
            if not math.isfinite(logpdf) and bad_i < 0:
                bad_i = i
                bad_j = j
            total += logpdf
            if want_grad:
                psi_s = digamma_scalar(s)
                # d logpdf / d log(alpha), d logpdf / d log(beta)
                g_la = alpha * (lx - digamma_scalar(alpha) + psi_s)
                g_lb = beta * (l1x - digamma_scalar(beta) + psi_s)
                gu[i] += a[j] * (g_la * (1.0 - th[i]) - g_lb * th[i])
                gv[j] += a[j] * (g_lb * de[j] - g_la * (1.0 - de[j]))
                ga[j] += g_la * da + g_lb * db
    k = float(n * m)
    for i in range(n):
        gu[i] = -gu[i] / k
    for j in range(m):
        gv[j] = -gv[j] / k
        ga[j] = -ga[j] / k
    return -total / k, gu, gv, ga, bad_i, bad_j


def loss_and_grad_numba(x, u, v, a):
    return _loss_grad_loops(x, u, v, a, True)


def loss_only_numba(x, u, v, a):
    return _loss_grad_loops(x, u, v, a, False)[0]


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------

def _log_sigmoid(z):
    return -np.logaddexp(0.0, -z)


def _sigmoid(z):
    return np.exp(_log_sigmoid(z))


def _cell_terms(x, u, v, a):
    lt, l1t = _log_sigmoid(u)[:, None], _log_sigmoid(-u)[:, None]
    ld, l1d = _log_sigmoid(v)[None, :], _log_sigmoid(-v)[None, :]
    da = lt - ld
    db = l1t - l1d
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        alpha = np.exp(a[None, :] * da)
        beta = np.exp(a[None, :] * db)
        s = alpha + beta
        lx = np.log(x)
        l1x = np.log1p(-x)
        logpdf = ((alpha - 1.0) * lx + (beta - 1.0) * l1x
                  - _sp_gammaln(alpha) - _sp_gammaln(beta) + _sp_gammaln(s))
    return logpdf, alpha, beta, s, lx, l1x, da, db


def _first_bad(logpdf):
    bad = np.argwhere(~np.isfinite(logpdf))
    if bad.size:
        return int(bad[0, 0]), int(bad[0, 1])
    return -1, -1


def loss_and_grad_numpy(x, u, v, a):
    n, m = x.shape
    k = float(n * m)
    logpdf, alpha, beta, s, lx, l1x, da, db = _cell_terms(x, u, v, a)
    bad_i, bad_j = _first_bad(logpdf)
    with np.errstate(over="ignore", invalid="ignore"):
        psi_s = _sp_digamma(s)
        g_la = alpha * (lx - _sp_digamma(alpha) + psi_s)
        g_lb = beta * (l1x - _sp_digamma(beta) + psi_s)
        th = _sigmoid(u)[:, None]
        de = _sigmoid(v)[None, :]
        aj = a[None, :]
        gu = (aj * (g_la * (1.0 - th) - g_lb * th)).sum(axis=1)
        gv = (aj * (g_lb * de - g_la * (1.0 - de))).sum(axis=0)
        ga = (g_la * da + g_lb * db).sum(axis=0)
    return -logpdf.sum() / k, -gu / k, -gv / k, -ga / k, bad_i, bad_j


def loss_only_numpy(x, u, v, a):
    return -_cell_terms(x, u, v, a)[0].sum() / float(x.size)


if HAS_NUMBA:
    loss_and_grad = loss_and_grad_numba
    loss_only = loss_only_numba
else:
    loss_and_grad = loss_and_grad_numpy
    loss_only = loss_only_numpy
