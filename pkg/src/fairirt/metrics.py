"""Per-(model, individual) fairness responses.

A response is one minus the disparity between a model's output for an
individual and its output for the same individual with the binary
sensitive attribute flipped. Classification compares probabilities;
regression compares predictions relative to the original one, scaled by a
factor ``lam`` that keeps scores inside [0, 1].

Which probability a classifier reports (positive class or predicted class)
is the caller's choice; the scalar in the input is used as given.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from fairirt.errors import GridError, InputError
from fairirt.irt import ResponseMatrix


class Fairness(str, Enum):
    FAIR = "fair"
    UNFAIR = "unfair"


TASKS = ("classification", "regression")
METRICS = ("sts", "es")
CONDITIONINGS = ("eodd", "eopp")


@dataclass(frozen=True)
class PredictionPairRecord:
    model_id: str
    individual_id: str
    value_original: float
    value_flipped: float
    label: Optional[int] = None


@dataclass(frozen=True)
class MetricConfig:
    """How raw prediction pairs become responses.

    ``lambda_mode`` is ``"auto"`` or a positive float. ``conditioning`` only
    matters for the equalised score: ``"eodd"`` keeps every labelled
    individual, ``"eopp"`` keeps only individuals with label 1.
    """

    task: str = "classification"
    metric: str = "sts"
    epsilon: float = 0.5
    lambda_mode: Union[str, float] = "auto"
    conditioning: str = "eodd"

    def __post_init__(self):
        if self.task not in TASKS:
            raise InputError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.metric not in METRICS:
            raise InputError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.conditioning not in CONDITIONINGS:
            raise InputError(f"conditioning must be one of {CONDITIONINGS}, got {self.conditioning!r}")
        if not (0.0 < self.epsilon < 1.0):
            raise InputError(f"epsilon must lie strictly inside (0, 1), got {self.epsilon!r}")
        if self.lambda_mode != "auto":
            lam = self.lambda_mode
            if isinstance(lam, bool) or not isinstance(lam, (int, float)) or not lam > 0 or not math.isfinite(lam):
                raise InputError(f"fixed lambda must be a positive number, got {lam!r}")


def _check_probability(p, what):
    if not (isinstance(p, (int, float, np.floating)) and 0.0 <= p <= 1.0):
        raise InputError(f"{what} must be a probability in [0, 1], got {p!r}")


def sts_classification(p_original: float, p_flipped: float) -> float:
    _check_probability(p_original, "p_original")
    _check_probability(p_flipped, "p_flipped")
    return 1.0 - abs(float(p_original) - float(p_flipped))


def relative_difference(y_original: float, y_flipped: float) -> float:
    if y_original == 0:
        raise InputError("undefined relative difference: original prediction is 0")
    return abs((float(y_original) - float(y_flipped)) / float(y_original))


def sts_regression(y_original: float, y_flipped: float, lam: float) -> float:
    if not lam > 0:
        raise InputError(f"lambda must be positive, got {lam!r}")
    return 1.0 - lam * relative_difference(y_original, y_flipped)


def auto_lambda(records: Iterable[PredictionPairRecord]) -> float:
    """``min(1, 1 / r_max)`` over all scorable records.

    ``r_max`` is the largest relative difference; the result keeps every
    regression score inside [0, 1] and is 1 when no scaling is needed.
    """
    r_max = None
    for rec in records:
        if rec.value_original == 0:
            continue
        r = relative_difference(rec.value_original, rec.value_flipped)
        r_max = r if r_max is None else max(r_max, r)
    if r_max is None:
        raise InputError("cannot choose lambda: every record has an original prediction of 0")
    if r_max <= 1.0:
        return 1.0
    return 1.0 / r_max


def equalised_score(p_original: float, p_flipped: float, label, config: MetricConfig,
                    lam: Optional[float] = None) -> float:
    """Situation-test arithmetic on predictions already conditioned on ``Y = label``.

    For regression the scale comes from ``lam``, else from a fixed
    ``config.lambda_mode``, else 1.
    """
    if label is None:
        raise InputError("equalised score needs the true label of the individual")
    if label not in (0, 1):
        raise InputError(f"label must be 0 or 1, got {label!r}")
    if config.task == "classification":
        return sts_classification(p_original, p_flipped)
    if lam is None:
        lam = 1.0 if config.lambda_mode == "auto" else float(config.lambda_mode)
    return sts_regression(p_original, p_flipped, lam)


def satisfies_individual_parity(p_original: float, p_flipped: float) -> bool:
    """Individual-level demographic parity: identical output under the flip."""
    return float(p_original) == float(p_flipped)


def fairness_flag(response: float, epsilon: float = 0.5) -> Fairness:
    """Fair iff ``response > epsilon``; a tie counts as unfair."""
    if not (0.0 < epsilon < 1.0):
        raise InputError(f"epsilon must lie strictly inside (0, 1), got {epsilon!r}")
    return Fairness.FAIR if response > epsilon else Fairness.UNFAIR


def _grid_order(records: Sequence[PredictionPairRecord]):
    models, individuals = {}, {}
    for rec in records:
        models.setdefault(rec.model_id, len(models))
        individuals.setdefault(rec.individual_id, len(individuals))
    return models, individuals


def build_response_matrix(records: Sequence[PredictionPairRecord], config: MetricConfig) -> ResponseMatrix:
    """Score every record and lay the scores out as a clamped N x M matrix.

    Rows follow first appearance of each model id, columns first appearance
    of each individual id. Every (model, individual) pair must appear exactly
    once.

    Cells that cannot be scored (regression records with an original
    prediction of 0; label-0 individuals under ``eopp``) are listed in
    ``excluded_cells`` and their whole individual column is dropped, so the
    matrix stays complete.
    """
    records = list(records)
    if not records:
        raise InputError("no records")
    models, individuals = _grid_order(records)
    seen = {}
    duplicates = []
    for rec in records:
        key = (rec.model_id, rec.individual_id)
        if key in seen:
            duplicates.append(key)
        seen[key] = rec
    if duplicates:
        raise GridError(f"duplicate (model, individual) cells: {duplicates[:10]}")
    missing = [(m, j) for m in models for j in individuals if (m, j) not in seen]
    if missing:
        shown = ", ".join(f"({m}, {j})" for m, j in missing[:10])
        more = f" and {len(missing) - 10} more" if len(missing) > 10 else ""
        raise GridError(f"missing (model, individual) cells: {shown}{more}")

    use_es = config.metric == "es"
    if use_es:
        labels = {}
        for rec in records:
            if rec.label is None:
                raise InputError(f"record ({rec.model_id}, {rec.individual_id}) has no label; "
                                 "equalised score needs labels")
            prev = labels.setdefault(rec.individual_id, rec.label)
            if prev != rec.label:
                raise InputError(f"individual {rec.individual_id} has conflicting labels {prev} and {rec.label}")

    excluded = []
    for rec in records:
        if config.task == "regression" and rec.value_original == 0:
            excluded.append((rec.model_id, rec.individual_id))
        elif use_es and config.conditioning == "eopp" and rec.label != 1:
            excluded.append((rec.model_id, rec.individual_id))
    dropped = {j for _, j in excluded}
    kept_individuals = [j for j in individuals if j not in dropped]
    model_order = list(models)

    lam = None
    if config.task == "regression":
        scored = [seen[(m, j)] for m in model_order for j in kept_individuals]
        lam = auto_lambda(scored) if config.lambda_mode == "auto" else float(config.lambda_mode)

    values = np.empty((len(model_order), len(kept_individuals)))
    for i, m in enumerate(model_order):
        for k, j in enumerate(kept_individuals):
            rec = seen[(m, j)]
            try:
                if use_es:
                    values[i, k] = equalised_score(rec.value_original, rec.value_flipped, rec.label, config, lam)
                elif config.task == "classification":
                    values[i, k] = sts_classification(rec.value_original, rec.value_flipped)
                else:
                    values[i, k] = sts_regression(rec.value_original, rec.value_flipped, lam)
            except InputError as exc:
                raise InputError(f"record ({m}, {j}): {exc}") from None
    if config.task == "regression" and config.lambda_mode != "auto":
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise InputError(f"fixed lambda {lam} puts regression scores outside [0, 1]; use lambda 'auto'")
    return ResponseMatrix.from_values(values, model_order, kept_individuals, excluded_cells=excluded)
