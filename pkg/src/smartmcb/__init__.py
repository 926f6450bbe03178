"""Design, analysis and sizing of two-stage SMARTs with binary outcomes.

The package estimates embedded dynamic treatment regime (EDTR) response
probabilities with conjugate beta posteriors, selects the "set of best"
EDTRs through rank-based simultaneous upper credible limits, and sizes
trials by Monte Carlo power over a grid of sample sizes.
"""

from .design import (
    ARM_MINUS,
    ARM_PLUS,
    CUSTOM,
    DESIGN1,
    GENERAL,
    EmbeddedDtr,
    SmartDesign,
    TreatmentSequence,
    builtin_design,
    load_design,
)
from .data import SUBJECT_COLUMNS, TrialData, aggregate_subjects, check_subject_rows
from .posterior import (
    DEFAULT_PRIOR,
    EPSILON,
    BetaPosterior,
    DrawMatrix,
    clamp_probability,
    compute_edtr_prob,
    draw_posterior,
    posterior_lambda,
    posterior_mean_edtr_probs,
    posterior_theta,
    select_reference,
)
from .mcb import McbResult, column_ranks, coverage_count, critical_rank, set_of_best, upper_limits
from .power import (
    DEFAULT_DATASETS_PER_N,
    DEFAULT_DRAWS_PER_DATASET,
    DESK_DATASETS_PER_N,
    DESK_DRAWS_PER_DATASET,
    PowerCurve,
    PowerPoint,
    PowerSpec,
    TruthEta,
    estimate_power,
    inferior_edtrs,
    sample_size_search,
    simulate_subjects,
    simulate_trial,
    true_best,
    true_delta,
    true_edtr_probs,
)
from .estimator import SmartMcbAnalyzer, resolve_seed
from .io import (
    DataFormatError,
    read_counts_json,
    read_power_config,
    read_subject_csv,
    read_trial_data,
    read_truth,
    write_subject_csv,
)
from .presets import design1_truth, engage_truth, general_truth

__version__ = "0.1.0"
