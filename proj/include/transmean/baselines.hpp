#pragma once

// Competitor procedures: per-row univariate tests with multiplicity
// correction, and pairwise high-dimensional two-sample tests.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "transmean/core.hpp"
#include "transmean/engine.hpp"

namespace transmean {

enum class Adjustment { raw, fdr, bonferroni };

std::string to_string(Adjustment a);
Adjustment parse_adjustment(const std::string& text);

struct PValueVector {
    std::vector<double> values;
    Adjustment method = Adjustment::raw;
    /// Rows whose test was degenerate (no within-level variation); their p is 1.
    std::vector<std::size_t> flagged;
};

/// Per-row one-way ANOVA of the column levels inside each column group.
///
/// For row a the N subjects give N replicates per column. The F statistic
/// compares the spread of column means around their group mean
/// (c - g degrees of freedom) with the within-column spread (Nc - c degrees
/// of freedom). Singleton groups are dropped first. With one group this is
/// the ordinary one-way ANOVA across all c columns.
PValueVector anova_rowwise(const DataStack& stack, const GroupPartition& partition);

/// Per-row Kruskal-Wallis analogue of anova_rowwise. Ranks are taken within
/// each group (mid-ranks for ties, with the usual tie correction) and the
/// group statistics are summed; p-values come from chi-square(c - g).
PValueVector kruskal_rowwise(const DataStack& stack, const GroupPartition& partition);

/// Bonferroni: min(1, m p). FDR: Benjamini-Hochberg step-up adjusted values.
std::vector<double> adjust_pvalues(std::span<const double> raw, Adjustment method);
PValueVector adjust_pvalues(const PValueVector& raw, Adjustment method);

/// Family-wise decision used for the baselines: reject iff min p < alpha.
bool family_rejects(std::span<const double> adjusted, double alpha);

/// Two-sample test for equal high-dimensional means. Columns of each matrix
/// are the observations (r x n1 and r x n2), n1, n2 >= 4. One-sided like the
/// main test.
TestResult chen_qin_two_sample(const Matrix& group1, const Matrix& group2, double alpha = 0.05);

/// Same as chen_qin_two_sample, from the within- and cross-sample Gram matrices.
TestResult chen_qin_from_grams(const GramMatrix& within1, const GramMatrix& within2, const Matrix& cross,
                               double alpha = 0.05);

struct PairTest {
    std::size_t col_a = 0;
    std::size_t col_b = 0;
    TestResult result;
    double adjusted_p = 1.0;
};

struct PairwiseSummary {
    bool reject = false;
    double min_adjusted_p = 1.0;
    std::size_t n_flagged = 0;
    std::vector<PairTest> pairs;
};

/// Each column is a sample of N r-vectors; every pair of columns is tested
/// with chen_qin_two_sample and the p-values are Bonferroni-adjusted.
PairwiseSummary pairwise_cq_procedure(const DataStack& stack, double alpha = 0.05);

}  // namespace transmean
