"""Paired-comparison choice-based conjoint workbench.

Design evaluation and generation by the D-criterion, logit estimation with
two-factor interactions, stratified respondent bootstrap, and
complement/substitute interpretation of interactions.
"""

from .core import (
    MPI_CATALOG,
    Attribute,
    AttributeCatalog,
    ChoicePair,
    ModelSpec,
    Profile,
    choice_probability,
    expand_features,
    log_likelihood,
    sample_choice,
    score_and_hessian,
    utility,
)
from .dataset import Dataset, Observation, load_dataset, load_design, save_dataset, save_design
from .design import (
    BlockedDesign,
    Design,
    block_design,
    d_criterion,
    feature_difference,
    generate_design,
    information_matrix,
    is_dominated,
    prune_dominated,
    relative_efficiency,
)
from .estimator import (
    FitResult,
    FitSettings,
    PipelineResult,
    backward_eliminate,
    compute_aic,
    detect_separation,
    fit_interactions,
    fit_mnl,
    run_pipeline,
    wald_significance,
)
from .reporter import build_report, classify_interaction, emit_interaction_graph, render_tables
from .resampler import BootstrapSummary, block_bootstrap, bootstrap_significance, stratified_resample, summarize_term
from .segments import Cell, Respondent, SegmentFilter, cell_of, filter_dataset, run_segment_pipeline
from .simulate import simulate_population

__version__ = "0.1.0"
