//! Result analysis: relative errors, wins, Friedman ranks, Wilcoxon
//! signed-rank tests with Holm correction, budget-improvement and
//! variable-dimension tables.

mod matrix;
mod tables;
mod nonparametric;

pub use matrix::{ResultsMatrix, StatsError};
pub use tables::{
    budget_improvement, relative_error_rows, significance_table, summary_table,
    variable_dimension_table, write_csv, ImprovementRow, RelativeErrorRow, SignificanceRow,
    SummaryRow, VariableDimensionRow, ALL_METHODS, WIN_TOLERANCE,
};
pub use nonparametric::{
    friedman_ranks, holm_bonferroni, midranks, relative_errors, wilcoxon_signed_rank, wins, Wilcoxon,
    EXACT_LIMIT,
};
