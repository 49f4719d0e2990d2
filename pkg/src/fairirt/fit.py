"""Gradient-based estimation of beta IRT parameters.

The objective is the negative mean beta log-likelihood of the observed
responses. Abilities and difficulties are optimised through logit
surrogates (``theta = sigmoid(u)``, ``delta = sigmoid(v)``); discriminations
are optimised directly. Updates are plain full-batch gradient descent with
a constant step, so a run is fully determined by (matrix, config).
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import expit

from fairirt import kernels
from fairirt.errors import FitError, InputError
from fairirt.irt import FitParameters, ResponseMatrix, icc_values

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitConfig:
    epochs: int = 3000
    learning_rate: float = 0.2
    seed: int = 0
    rasch: bool = False
    convergence_tol: float = 1e-8
    convergence_window: int = 50
    init_jitter: float = 0.05

    def __post_init__(self):
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise InputError(f"epochs must be a positive integer, got {self.epochs!r}")
        if not self.learning_rate > 0:
            raise InputError(f"learning rate must be positive, got {self.learning_rate!r}")
        if self.convergence_tol < 0 or self.init_jitter < 0:
            raise InputError("convergence_tol and init_jitter must be nonnegative")
        if self.convergence_window < 1:
            raise InputError("convergence_window must be at least 1")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class FitReport:
    parameters: FitParameters
    final_loss: float
    loss_trace: np.ndarray
    converged: bool
    epochs_run: int
    clamp_count: int
    config: FitConfig
    model_ids: tuple = field(default=())
    individual_ids: tuple = field(default=())

    def __post_init__(self):
        if len(self.loss_trace) != self.epochs_run:
            raise InputError(f"loss trace has {len(self.loss_trace)} entries for {self.epochs_run} epochs")
        if self.model_ids and len(self.model_ids) != self.parameters.n_models:
            raise InputError("model_ids do not match the fitted abilities")
        if self.individual_ids and len(self.individual_ids) != self.parameters.n_individuals:
            raise InputError("individual_ids do not match the fitted items")


# ---------------------------------------------------------------------------
# surrogate <-> parameter helpers
# ---------------------------------------------------------------------------

def _logit(p):
    return np.log(p) - np.log1p(-p)


def to_surrogates(params: FitParameters):
    return _logit(params.abilities), _logit(params.difficulties), np.array(params.discriminations, dtype=float)


def from_surrogates(u, v, a, rasch=False) -> FitParameters:
    theta, delta = expit(u), expit(v)
    try:
        return FitParameters.from_arrays(theta, delta, a, rasch_constrained=rasch)
    except InputError as exc:
        raise FitError(f"fitted parameters left the valid range ({exc}); try a smaller learning rate") from None


def _check_dims(matrix: ResponseMatrix, params: FitParameters):
    if (params.n_models, params.n_individuals) != matrix.shape:
        raise InputError(f"parameters are {params.n_models} x {params.n_individuals} "
                         f"but the matrix is {matrix.shape[0]} x {matrix.shape[1]}")


# ---------------------------------------------------------------------------
# public ops
# ---------------------------------------------------------------------------

def predicted_matrix(params: FitParameters, n_models=None, n_individuals=None) -> np.ndarray:
    """Expected response for every (model, individual) cell."""
    if n_models is not None and n_models != params.n_models:
        raise InputError(f"expected {n_models} models, parameters have {params.n_models}")
    if n_individuals is not None and n_individuals != params.n_individuals:
        raise InputError(f"expected {n_individuals} individuals, parameters have {params.n_individuals}")
    return icc_values(params.abilities[:, None], params.difficulties[None, :], params.discriminations[None, :])


def negative_loss(matrix: ResponseMatrix, params: FitParameters) -> float:
    """Negative mean beta log-likelihood of ``matrix`` under ``params``."""
    _check_dims(matrix, params)
    u, v, a = to_surrogates(params)
    return float(kernels.loss_only(matrix.values, u, v, a))


def surrogate_gradient(values, u, v, a):
    """(loss, d/du, d/dv, d/da) of the negative mean log-likelihood."""
    x = np.ascontiguousarray(values, dtype=float)
    loss, gu, gv, ga, _, _ = kernels.loss_and_grad(
        x, np.asarray(u, dtype=float), np.asarray(v, dtype=float), np.asarray(a, dtype=float))
    return float(loss), gu, gv, ga


def _initial_discriminations(x, rasch):
    m = x.shape[1]
    if rasch:
        return np.ones(m)
    # Start each item on the side of the reflection its column agrees with;
    # starting every item at +1 traps negative items in a mirrored optimum.
    row_mean = x.mean(axis=1)
    rc = row_mean - row_mean.mean()
    xc = x - x.mean(axis=0)
    cov = rc @ xc
    return np.where(cov < 0.0, -1.0, 1.0)


def fit_beta_irt(matrix: ResponseMatrix, config: FitConfig = FitConfig()) -> FitReport:
    """Estimate abilities, difficulties and discriminations for ``matrix``.

    With ``config.rasch`` every discrimination is pinned at exactly 1.
    Otherwise the result is canonicalised so that higher ability goes with
    higher observed mean response (the likelihood is invariant under
    ``theta -> 1-theta, delta -> 1-delta, a -> -a`` applied jointly).
    """
    x = np.ascontiguousarray(matrix.values, dtype=float)
    n, m = x.shape
    rng = np.random.default_rng(config.seed)
    jit = config.init_jitter
    u = rng.uniform(-jit, jit, n) if jit > 0 else np.zeros(n)
    v = rng.uniform(-jit, jit, m) if jit > 0 else np.zeros(m)
    a = _initial_discriminations(x, config.rasch)

    lr = float(config.learning_rate)
    window = config.convergence_window
    trace = np.empty(config.epochs)
    converged = False
    epochs_run = 0
    for epoch in range(config.epochs):
        loss, gu, gv, ga, bad_i, bad_j = kernels.loss_and_grad(x, u, v, a)
        if not np.isfinite(loss) or bad_i >= 0:
            i, j = (bad_i, bad_j) if bad_i >= 0 else (0, 0)
            raise FitError(f"non-finite loss at epoch {epoch + 1}, cell "
                           f"({matrix.model_ids[i]}, {matrix.individual_ids[j]})")
        for name, g, labels in (("ability", gu, matrix.model_ids), ("difficulty", gv, matrix.individual_ids),
                                ("discrimination", ga, matrix.individual_ids)):
            bad = np.flatnonzero(~np.isfinite(g))
            if bad.size:
                raise FitError(f"non-finite {name} gradient at epoch {epoch + 1} for {labels[bad[0]]}")
        trace[epoch] = loss
        epochs_run = epoch + 1
        u -= lr * gu
        v -= lr * gv
        if not config.rasch:
            a -= lr * ga
        if epoch >= window and trace[epoch - window] - loss < config.convergence_tol:
            converged = True
            break

    if not config.rasch:
        theta = expit(u)
        rm = x.mean(axis=1)
        if np.dot(theta - theta.mean(), rm - rm.mean()) < 0.0:
            u, v, a = -u, -v, -a

    params = from_surrogates(u, v, a, rasch=config.rasch)
    final_loss = float(kernels.loss_only(x, u, v, a))
    if not np.isfinite(final_loss):
        raise FitError("non-finite loss at the returned parameters")
    log.debug("fit %dx%d: %d epochs, loss %.6g, converged=%s", n, m, epochs_run, final_loss, converged)
    trace = trace[:epochs_run].copy()
    trace.setflags(write=False)
    return FitReport(
        parameters=params,
        final_loss=final_loss,
        loss_trace=trace,
        converged=converged,
        epochs_run=epochs_run,
        clamp_count=matrix.clamp_count,
        config=config,
        model_ids=tuple(matrix.model_ids),
        individual_ids=tuple(matrix.individual_ids),
    )
