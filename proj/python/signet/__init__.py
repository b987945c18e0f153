"""Poisson NMF with formula-constrained mutational signatures."""

from ._signet import (
    CountMatrix,
    Fit,
    FitError,
    __version__,
    bic,
    bootstrap,
    cosine_similarity,
    design_matrix,
    downsample_counts,
    enumerate_mixtures,
    exposure_recovery,
    fit,
    load_counts,
    match_signatures,
    mutation_labels,
    normalize_formula,
    select,
    simulate_counts,
)

__all__ = [
    "CountMatrix",
    "Fit",
    "FitError",
    "__version__",
    "bic",
    "bootstrap",
    "cosine_similarity",
    "design_matrix",
    "downsample_counts",
    "enumerate_mixtures",
    "exposure_recovery",
    "fit",
    "load_counts",
    "match_signatures",
    "mutation_labels",
    "normalize_formula",
    "select",
    "simulate_counts",
]
