"""Mean-matrix tests for transposable data."""

from ._core import (
    DEFAULT_SEED,
    SCHEMA_VERSION,
    InvalidArgument,
    TestResult,
    TestStatus,
    adjust_pvalues,
    anova_rowwise,
    g_statistic,
    gram,
    kruskal_rowwise,
    mean_matrix_test,
    preset_names,
    simulate_preset,
    t_statistic,
    test_known_difference,
    test_known_matrix,
)

__all__ = [
    "DEFAULT_SEED",
    "SCHEMA_VERSION",
    "InvalidArgument",
    "TestResult",
    "TestStatus",
    "adjust_pvalues",
    "anova_rowwise",
    "g_statistic",
    "gram",
    "kruskal_rowwise",
    "mean_matrix_test",
    "preset_names",
    "simulate_preset",
    "t_statistic",
    "test_known_difference",
    "test_known_matrix",
]
