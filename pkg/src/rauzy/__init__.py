"""Renormalization dynamics of interval exchange transformations: the
accelerated induction on length vectors, its symbolic coding and integer
matrix cocycle, the zippered-rectangle suspension, and Monte-Carlo
estimators for mixing rates and return-time tails.
"""

from .errors import (
    CapExceededError,
    DenominatorOverflowError,
    IncompatibleWordError,
    InsufficientDataError,
    NonGenericError,
    NotFoundError,
    RauzyError,
    RejectionBudgetError,
)
from .induction import (
    BOUNDARY,
    MINUS,
    PLUS,
    IetPoint,
    StepRecord,
    classify,
    cylinder_contains,
    encode_prefix,
    hilbert_metric,
    inverse_branch,
    is_compatible_point,
    orbit,
    rauzy_step,
    zorich_step,
)
from .kernel import OrbitData, run_orbit
from .matrices import (
    birkhoff_diameter,
    contraction_coefficient,
    det,
    elementary_matrix,
    is_positive,
    letter_matrix,
    matrix_norm,
    word_matrix,
)
from .permutations import (
    Permutation,
    RauzyClassGraph,
    apply_a,
    apply_b,
    is_irreducible,
    rauzy_class,
)
from .stats import (
    CorrelationSeries,
    ObservableSpec,
    ReturnRecord,
    birkhoff_mean,
    comparison_survey,
    correlation_series,
    cylinder_shrinkage,
    exp_moment,
    fit_exponential,
    holder_norm_estimate,
    pooled_return_survey,
    ratio_bound_check,
    return_time_survey,
    sample_simplex,
    tail_fit,
)
from .words import Letter, Word, concat, find_positive_word, letter_compat, parse_word, word_action
from .zippered import (
    ZipperedRectangle,
    area,
    elementary_return,
    first_return,
    flow,
    random_rectangle,
    rectangle_json,
    tau,
    validate,
    y_component,
    zip_step,
)

__version__ = "0.1.0"
