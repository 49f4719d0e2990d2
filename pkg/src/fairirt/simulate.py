"""Synthetic ground truth and beta-distributed response matrices.

Ground truth and responses use two independent child streams of the same
seed, so changing ``noiseless`` never changes the generated parameters.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from fairirt.errors import InputError
from fairirt.irt import FitParameters, ResponseMatrix, icc_values

DISCRIMINATION_MODES = ("mixed", "positive_only", "fixed")
MAGNITUDE_RANGE = (0.3, 3.0)


@dataclass(frozen=True)
class SimulationSpec:
    n_models: int = 20
    n_individuals: int = 50
    seed: int = 0
    ability_range: tuple = (0.2, 0.9)
    difficulty_range: tuple = (0.05, 0.95)
    discrimination: str = "mixed"
    negative_fraction: float = 0.15
    fixed_discrimination: float = 1.0
    noiseless: bool = False

    def __post_init__(self):
        if self.n_models < 2 or self.n_individuals < 2:
            raise InputError("simulation needs at least 2 models and 2 individuals")
        for name in ("ability_range", "difficulty_range"):
            lo, hi = getattr(self, name)
            if not (0.0 < lo <= hi < 1.0):
                raise InputError(f"{name} must lie strictly inside (0, 1), got {(lo, hi)}")
            object.__setattr__(self, name, (float(lo), float(hi)))
        if self.discrimination not in DISCRIMINATION_MODES:
            raise InputError(f"discrimination must be one of {DISCRIMINATION_MODES}, got {self.discrimination!r}")
        if not (0.0 <= self.negative_fraction <= 1.0):
            raise InputError(f"negative_fraction must lie in [0, 1], got {self.negative_fraction!r}")
        if not math.isfinite(self.fixed_discrimination):
            raise InputError("fixed_discrimination must be finite")

    @property
    def n_negative(self):
        if self.discrimination != "mixed":
            return 0
        # floor(0.15 * 50) = 7 negative items with the defaults
        return int(math.floor(self.negative_fraction * self.n_individuals + 1e-9))

    def to_dict(self):
        d = asdict(self)
        d["ability_range"] = list(self.ability_range)
        d["difficulty_range"] = list(self.difficulty_range)
        return d


def _streams(seed):
    truth_ss, response_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(truth_ss), np.random.default_rng(response_ss)


def model_labels(n):
    return [f"model_{i + 1}" for i in range(n)]


def individual_labels(m):
    return [f"ind_{j + 1}" for j in range(m)]


def generate_ground_truth(spec: SimulationSpec) -> FitParameters:
    rng, _ = _streams(spec.seed)
    theta = rng.uniform(*spec.ability_range, size=spec.n_models)
    delta = rng.uniform(*spec.difficulty_range, size=spec.n_individuals)
    if spec.discrimination == "fixed":
        a = np.full(spec.n_individuals, float(spec.fixed_discrimination))
    else:
        a = rng.uniform(*MAGNITUDE_RANGE, size=spec.n_individuals)
        negatives = rng.permutation(spec.n_individuals)[:spec.n_negative]
        a[negatives] = -a[negatives]
    return FitParameters.from_arrays(theta, delta, a)


def sample_responses(truth: FitParameters, spec: SimulationSpec) -> ResponseMatrix:
    """Draw one response per cell from Beta(alpha_ij, beta_ij), then clamp.

    In noiseless mode each cell is the ICC mean instead of a draw.
    """
    if (truth.n_models, truth.n_individuals) != (spec.n_models, spec.n_individuals):
        raise InputError("ground truth dimensions do not match the simulation spec")
    th = truth.abilities[:, None]
    de = truth.difficulties[None, :]
    a = truth.discriminations[None, :]
    if spec.noiseless:
        values = icc_values(th, de, a)
    else:
        _, rng = _streams(spec.seed)
        log_alpha = a * (np.log(th) - np.log(de))
        log_beta = a * (np.log1p(-th) - np.log1p(-de))
        values = rng.beta(np.exp(log_alpha), np.exp(log_beta))
    return ResponseMatrix.from_values(values, model_labels(spec.n_models), individual_labels(spec.n_individuals))


def simulate(spec: SimulationSpec):
    """Convenience: (ground truth, response matrix)."""
    truth = generate_ground_truth(spec)
    return truth, sample_responses(truth, spec)
