"""Post-fit analytics: rankings, special individuals, flatness, curves and
the additive unfairness decomposition of a Rasch-constrained fit."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import pearsonr, spearmanr

from fairirt.errors import ConstraintError, InputError
from fairirt.fit import FitReport, predicted_matrix
from fairirt.irt import ItemParams, ResponseMatrix, flatness_indicator, icc_values
from fairirt.metrics import Fairness

ICC_GRID_RANGE = (0.01, 0.99)


@dataclass(frozen=True)
class ModelSummary:
    model_id: str
    ability: float
    mean_fitted_response: float
    mean_observed_response: Optional[float] = None


@dataclass(frozen=True)
class IndividualSummary:
    individual_id: str
    difficulty: float
    discrimination: float
    flatness: float

    @property
    def special(self):
        return self.discrimination < 0


@dataclass(frozen=True)
class DisentangleRecord:
    model_id: str
    individual_id: str
    log_delta: float
    log_theta: float
    g_value: float
    flag: Fairness


def _ids(report: FitReport):
    p = report.parameters
    models = report.model_ids or tuple(f"m{i}" for i in range(p.n_models))
    individuals = report.individual_ids or tuple(f"j{j}" for j in range(p.n_individuals))
    return models, individuals


def model_summaries(report: FitReport, matrix: Optional[ResponseMatrix] = None) -> list[ModelSummary]:
    """One row per model: ability and the mean fitted response over individuals.

    Sorted by ability (descending), ties by model id.
    """
    p = report.parameters
    if matrix is not None and matrix.shape != (p.n_models, p.n_individuals):
        raise InputError(f"report is {p.n_models} x {p.n_individuals} but matrix is {matrix.shape}")
    fitted = predicted_matrix(p).mean(axis=1)
    observed = matrix.values.mean(axis=1) if matrix is not None else None
    models, _ = _ids(report)
    rows = [
        ModelSummary(models[i], float(p.abilities[i]), float(fitted[i]),
                     None if observed is None else float(observed[i]))
        for i in range(p.n_models)
    ]
    return sorted(rows, key=lambda r: (-r.ability, r.model_id))


def individual_summaries(report: FitReport, ability_grid: Optional[int] = None) -> list[IndividualSummary]:
    """Every individual with its flatness, in input order.

    Flatness sums over the fitted abilities unless ``ability_grid`` asks for
    a uniform grid of that many points over the ICC plotting range.
    """
    p = report.parameters
    if ability_grid is None:
        abilities = p.abilities
    else:
        if ability_grid < 1:
            raise InputError("ability_grid must be at least 1")
        abilities = np.linspace(*ICC_GRID_RANGE, ability_grid)
    _, individuals = _ids(report)
    out = []
    for j in range(p.n_individuals):
        item = p.item(j)
        out.append(IndividualSummary(individuals[j], item.difficulty, item.discrimination,
                                     flatness_indicator(item, abilities)))
    return out


def special_individuals(report: FitReport) -> list[IndividualSummary]:
    """Individuals with negative discrimination, most negative first."""
    rows = [r for r in individual_summaries(report) if r.special]
    return sorted(rows, key=lambda r: (r.discrimination, r.individual_id))


def flattest_individuals(report: FitReport, k: int = 5, ability_grid: Optional[int] = None) -> list[IndividualSummary]:
    m = report.parameters.n_individuals
    if not (1 <= k <= m):
        raise InputError(f"k must lie in [1, {m}], got {k}")
    rows = individual_summaries(report, ability_grid)
    return sorted(rows, key=lambda r: (r.flatness, r.individual_id))[:k]


def tabulate_icc(item: ItemParams, grid_size: int = 200) -> list[tuple[float, float]]:
    if grid_size < 2:
        raise InputError(f"grid_size must be at least 2, got {grid_size}")
    theta = np.linspace(*ICC_GRID_RANGE, grid_size)
    resp = icc_values(theta, item.difficulty, item.discrimination)
    return [(float(t), float(r)) for t, r in zip(theta, resp)]


def unfairness_split(log_delta: float, log_theta: float) -> tuple[float, Fairness]:
    """Combine individual and model log-odds of unfairness into ``g`` and a flag.

    ``g > 0`` (expected response below one half) is unfair; ``g == 0`` is
    also reported unfair.
    """
    g = log_delta + log_theta
    return g, (Fairness.FAIR if g < 0 else Fairness.UNFAIR)


def disentangle(rasch_report: FitReport) -> list[list[DisentangleRecord]]:
    """Per-cell decomposition of a Rasch fit; indexed ``[model][individual]``.

    ``log_delta = log(delta / (1 - delta))`` is the individual's share and
    ``log_theta = log((1 - theta) / theta)`` the model's share.
    """
    p = rasch_report.parameters
    if not p.rasch_constrained:
        raise ConstraintError("disentangling requires the Rasch-constrained fit")
    models, individuals = _ids(rasch_report)
    log_delta = np.log(p.difficulties) - np.log1p(-p.difficulties)
    log_theta = np.log1p(-p.abilities) - np.log(p.abilities)
    out = []
    for i in range(p.n_models):
        row = []
        for j in range(p.n_individuals):
            g, flag = unfairness_split(float(log_delta[j]), float(log_theta[i]))
            row.append(DisentangleRecord(models[i], individuals[j], float(log_delta[j]), float(log_theta[i]), g, flag))
        out.append(row)
    return out


def g_from_response(p: float) -> float:
    """``log(1 - p) - log(p)``; the decomposition's left-hand side."""
    return math.log1p(-p) - math.log(p)


def recovery_summary(truth, fitted, min_abs_discrimination: float = 0.5) -> dict:
    """Agreement between known generating parameters and a fit.

    Sign agreement is only judged on items whose true ``|a|`` is at least
    ``min_abs_discrimination``; weaker items are nearly flat and their sign
    is not reliably identifiable.
    """
    if (truth.n_models, truth.n_individuals) != (fitted.n_models, fitted.n_individuals):
        raise InputError("truth and fit have different dimensions")
    big = np.abs(truth.discriminations) >= min_abs_discrimination
    true_neg = np.flatnonzero(truth.discriminations < 0)
    fit_neg = np.flatnonzero(fitted.discriminations < 0)
    out = {
        "ability_pearson": float(pearsonr(truth.abilities, fitted.abilities)[0]),
        "ability_spearman": float(spearmanr(truth.abilities, fitted.abilities)[0]),
        "difficulty_pearson": float(pearsonr(truth.difficulties, fitted.difficulties)[0]),
        "sign_checked_items": int(big.sum()),
        "sign_agreement": float(np.mean(np.sign(truth.discriminations[big]) == np.sign(fitted.discriminations[big])))
        if big.any() else 1.0,
        "true_negative_items": [int(j) for j in true_neg],
        "fitted_negative_items": [int(j) for j in fit_neg],
    }
    if fitted.rasch_constrained or np.ptp(fitted.discriminations) == 0:
        out["discrimination_pearson"] = None
    else:
        out["discrimination_pearson"] = float(pearsonr(truth.discriminations, fitted.discriminations)[0])
    return out
