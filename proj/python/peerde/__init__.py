"""Differential evolution optimizer and peer-assessment measurement pipeline.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its public surface.
"""

from peerde._core import (  # noqa: F401
    DegenerateModelError,
    EmptyDataError,
    EvaluationError,
    InconsistentFitError,
    __version__,
    auc,
    binary_loglik,
    chi_square_sf,
    export_fixture,
    fit_csv,
    logistic_cdf,
    lr_test,
    optimize,
    optimize_test_function,
    ordered_loglik,
    report_csv,
    simulate,
)

__all__ = [
    "DegenerateModelError",
    "EmptyDataError",
    "EvaluationError",
    "InconsistentFitError",
    "__version__",
    "auc",
    "binary_loglik",
    "chi_square_sf",
    "export_fixture",
    "fit_csv",
    "logistic_cdf",
    "lr_test",
    "optimize",
    "optimize_test_function",
    "ordered_loglik",
    "report_csv",
    "simulate",
]
