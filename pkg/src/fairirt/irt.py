"""Beta IRT domain types and item characteristic curve math.

Respondents are predictive models (ability ``theta`` in (0, 1)); items are
individuals (difficulty ``delta`` in (0, 1), discrimination ``a`` real).
Every function here is pure and accepts scalars or broadcastable numpy
arrays; scalar inputs give python floats back.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

from fairirt.errors import InputError

CLAMP_EPS = 1e-6
# Values this far outside [0, 1] are treated as rounding noise, not errors.
RANGE_TOL = 1e-9


@dataclass(frozen=True)
class Ability:
    value: float

    def __post_init__(self):
        if not (0.0 < self.value < 1.0):
            raise InputError(f"ability must lie strictly inside (0, 1), got {self.value!r}")

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class ItemParams:
    difficulty: float
    discrimination: float

    def __post_init__(self):
        if not (0.0 < self.difficulty < 1.0):
            raise InputError(f"difficulty must lie strictly inside (0, 1), got {self.difficulty!r}")
        if not math.isfinite(self.discrimination):
            raise InputError(f"discrimination must be finite, got {self.discrimination!r}")


@dataclass(frozen=True)
class BetaShape:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise InputError(f"beta shape parameters must be positive, got ({self.alpha!r}, {self.beta!r})")


def clamp_responses(values):
    """Clip into [CLAMP_EPS, 1 - CLAMP_EPS]; returns (clipped, n_changed)."""
    values = np.asarray(values, dtype=float)
    clipped = np.clip(values, CLAMP_EPS, 1.0 - CLAMP_EPS)
    return clipped, int(np.count_nonzero(clipped != values))


def _check_labels(labels, n, axis):
    labels = tuple(str(x) for x in labels)
    if len(labels) != n:
        raise InputError(f"expected {n} {axis} labels, got {len(labels)}")
    if len(set(labels)) != n:
        seen, dup = set(), []
        for lab in labels:
            if lab in seen:
                dup.append(lab)
            seen.add(lab)
        raise InputError(f"duplicate {axis} labels: {sorted(set(dup))}")
    return labels


@dataclass(frozen=True, eq=False)
class ResponseMatrix:
    """N x M fairness responses; rows are models, columns are individuals.

    Build with :meth:`from_values`, which clamps into the open interval and
    records how many cells were moved. ``excluded_cells`` lists
    (model, individual) records that could not be scored (see
    :func:`fairirt.metrics.build_response_matrix`).
    """

    values: np.ndarray
    model_ids: tuple
    individual_ids: tuple
    clamp_count: int = 0
    excluded_cells: tuple = field(default=())

    def __post_init__(self):
        v = self.values
        if v.ndim != 2:
            raise InputError(f"response matrix must be 2-D, got shape {v.shape}")
        n, m = v.shape
        if n < 2 or m < 2:
            raise InputError(f"need at least 2 models and 2 individuals, got {n} x {m}")
        if not np.all((v >= CLAMP_EPS) & (v <= 1.0 - CLAMP_EPS)):
            raise InputError("response values must be clamped into [CLAMP_EPS, 1 - CLAMP_EPS]")
        _check_labels(self.model_ids, n, "model")
        _check_labels(self.individual_ids, m, "individual")

    @classmethod
    def from_values(cls, values, model_ids=None, individual_ids=None, excluded_cells=()):
        arr = np.array(values, dtype=float)
        if arr.ndim != 2:
            raise InputError(f"response matrix must be 2-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InputError("response matrix contains non-finite values")
        lo, hi = arr.min(), arr.max()
        if lo < -RANGE_TOL or hi > 1.0 + RANGE_TOL:
            bad = np.argwhere((arr < -RANGE_TOL) | (arr > 1.0 + RANGE_TOL))[0]
            raise InputError(f"response {arr[tuple(bad)]!r} at cell {tuple(int(b) for b in bad)} outside [0, 1]")
        n, m = arr.shape
        if model_ids is None:
            model_ids = [f"m{i}" for i in range(n)]
        if individual_ids is None:
            individual_ids = [f"j{j}" for j in range(m)]
        clipped, count = clamp_responses(arr)
        clipped.setflags(write=False)
        return cls(
            values=clipped,
            model_ids=_check_labels(model_ids, n, "model"),
            individual_ids=_check_labels(individual_ids, m, "individual"),
            clamp_count=count,
            excluded_cells=tuple(excluded_cells),
        )

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_models(self):
        return self.values.shape[0]

    @property
    def n_individuals(self):
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class FitParameters:
    """Per-model abilities and per-individual (difficulty, discrimination)."""

    abilities: np.ndarray
    difficulties: np.ndarray
    discriminations: np.ndarray
    rasch_constrained: bool = False

    def __post_init__(self):
        th, de, a = self.abilities, self.difficulties, self.discriminations
        if th.ndim != 1 or de.ndim != 1 or a.ndim != 1:
            raise InputError("fit parameters must be 1-D arrays")
        if de.shape != a.shape:
            raise InputError(f"{de.size} difficulties but {a.size} discriminations")
        if not np.all((th > 0.0) & (th < 1.0)):
            raise InputError("abilities must lie strictly inside (0, 1)")
        if not np.all((de > 0.0) & (de < 1.0)):
            raise InputError("difficulties must lie strictly inside (0, 1)")
        if not np.all(np.isfinite(a)):
            raise InputError("discriminations must be finite")
        if self.rasch_constrained and not np.all(a == 1.0):
            raise InputError("Rasch-constrained parameters must have every discrimination equal to 1")

    @classmethod
    def from_arrays(cls, abilities, difficulties, discriminations, rasch_constrained=False):
        arrs = [np.array(x, dtype=float).reshape(-1) for x in (abilities, difficulties, discriminations)]
        for arr in arrs:
            arr.setflags(write=False)
        return cls(*arrs, rasch_constrained=bool(rasch_constrained))

    @property
    def n_models(self):
        return self.abilities.size

    @property
    def n_individuals(self):
        return self.difficulties.size

    def item(self, j) -> ItemParams:
        return ItemParams(float(self.difficulties[j]), float(self.discriminations[j]))

    @property
    def items(self) -> list[ItemParams]:
        return [self.item(j) for j in range(self.n_individuals)]


# ---------------------------------------------------------------------------
# curve math
# ---------------------------------------------------------------------------

def _scalar_or_array(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _as_float(theta):
    if isinstance(theta, Ability):
        return theta.value
    return theta


def _logit(p):
    return np.log(p) - np.log1p(-p)


def beta_shapes(theta, item: ItemParams) -> BetaShape:
    """Beta shape parameters ``((theta/delta)**a, ((1-theta)/(1-delta))**a)``."""
    th = float(_as_float(theta))
    if not (0.0 < th < 1.0):
        raise InputError(f"ability must lie strictly inside (0, 1), got {th!r}")
    a, d = item.discrimination, item.difficulty
    alpha = math.exp(a * (math.log(th) - math.log(d)))
    beta = math.exp(a * (math.log1p(-th) - math.log1p(-d)))
    return BetaShape(alpha, beta)


def icc_values(theta, difficulty, discrimination):
    """Vectorised beta ICC; all three arguments broadcast together."""
    th = np.asarray(theta, dtype=float)
    z = np.asarray(discrimination, dtype=float) * (_logit(th) - _logit(np.asarray(difficulty, dtype=float)))
    return _scalar_or_array(expit(z))


def beta_icc(theta, item: ItemParams):
    """Expected response ``alpha / (alpha + beta)`` for ability ``theta``.

    Evaluated as ``sigmoid(a * (logit(theta) - logit(delta)))``, which is the
    same quantity without forming the two powers.
    """
    return icc_values(_as_float(theta), item.difficulty, item.discrimination)


def logistic_icc(theta, difficulty, discrimination):
    """Classical logistic ICC ``1 / (1 + exp(-a (theta - delta)))``.

    Here ``theta`` and ``difficulty`` live on the real line. Evaluation only.
    """
    z = np.asarray(discrimination, dtype=float) * (np.asarray(theta, dtype=float) - np.asarray(difficulty, dtype=float))
    return _scalar_or_array(expit(z))


def beta_log_density(response, shape: BetaShape):
    """log Beta(alpha, beta) density at ``response``, via log-gamma."""
    x = np.asarray(response, dtype=float)
    if np.any((x <= 0.0) | (x >= 1.0)):
        raise InputError("beta density is only defined for responses strictly inside (0, 1)")
    al, be = shape.alpha, shape.beta
    log_norm = math.lgamma(al + be) - math.lgamma(al) - math.lgamma(be)
    return _scalar_or_array((al - 1.0) * np.log(x) + (be - 1.0) * np.log1p(-x) + log_norm)


def icc_derivative_values(theta, difficulty, discrimination):
    th = np.asarray(theta, dtype=float)
    a = np.asarray(discrimination, dtype=float)
    z = a * (_logit(th) - _logit(np.asarray(difficulty, dtype=float)))
    # d/dtheta sigmoid(a*logit(theta) + c) = a f (1 - f) / (theta (1 - theta));
    # 1 - f is taken as sigmoid(-z) so saturated curves keep full precision
    return _scalar_or_array(a * expit(z) * expit(-z) / (th * (1.0 - th)))


def icc_derivative(theta, item: ItemParams):
    """Slope of the beta ICC with respect to ability; its sign is the sign of ``a``."""
    return icc_derivative_values(_as_float(theta), item.difficulty, item.discrimination)


def flatness_indicator(item: ItemParams, abilities: Sequence[float] | np.ndarray) -> float:
    """Sum of |ICC slope| over the given abilities. Small means a flat curve."""
    th = np.asarray([_as_float(t) for t in abilities] if not isinstance(abilities, np.ndarray) else abilities,
                    dtype=float).reshape(-1)
    if th.size == 0:
        raise InputError("no respondents: flatness needs at least one ability")
    if np.any((th <= 0.0) | (th >= 1.0)):
        raise InputError("abilities must lie strictly inside (0, 1)")
    return float(np.sum(np.abs(icc_derivative_values(th, item.difficulty, item.discrimination))))
