"""Fairness evaluation of model populations with beta item response theory."""
from fairirt._accel import backend_name
from fairirt.analysis import (
    DisentangleRecord,
    IndividualSummary,
    ModelSummary,
    disentangle,
    flattest_individuals,
    individual_summaries,
    model_summaries,
    recovery_summary,
    special_individuals,
    tabulate_icc,
    unfairness_split,
)
from fairirt.errors import ConstraintError, FairIRTError, FitError, FormatError, GridError, InputError
from fairirt.fit import FitConfig, FitReport, fit_beta_irt, negative_loss, predicted_matrix
from fairirt.irt import (
    Ability,
    BetaShape,
    FitParameters,
    ItemParams,
    ResponseMatrix,
    beta_icc,
    beta_log_density,
    beta_shapes,
    flatness_indicator,
    icc_derivative,
    logistic_icc,
)
from fairirt.metrics import (
    Fairness,
    MetricConfig,
    PredictionPairRecord,
    auto_lambda,
    build_response_matrix,
    equalised_score,
    fairness_flag,
    satisfies_individual_parity,
    sts_classification,
    sts_regression,
)
from fairirt.simulate import SimulationSpec, generate_ground_truth, sample_responses, simulate

__version__ = "0.1.0"
