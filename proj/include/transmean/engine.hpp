#pragma once

// The standardized mean-matrix test statistic and its variants.
//
// For subjects X_1..X_N and a projection P encoding the null grouping, let
// Y_i = vec(X_i P). The test works entirely through the Gram matrix
// a_ij = Y_i^T Y_j = tr(X_i^T X_j P):
//
//   G_N  = sum_{i != j} a_ij / (N (N-1))                 unbiased for tr(M^T M P)
//   T_N  = three U-statistic terms in a_ij                unbiased for tr(Omega^2)
//   G*_N = G_N / sqrt(2 T_N / (N (N-1)))                  ~ N(0,1) under the null
//
// with Omega = (P (x) I_r) Sigma (P (x) I_r). The null is rejected at level
// alpha iff G*_N >= z_alpha.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "transmean/core.hpp"
#include "transmean/covariance.hpp"

namespace transmean {

enum class Orientation { columns, rows };

enum class TestStatus {
    ok,
    /// T_N <= 0: the variance estimate is unusable, no statistic is reported.
    unstable_variance,
};

std::string to_string(Orientation o);
std::string to_string(TestStatus s);

struct TestResult {
    /// G*_N. Meaningless (set to 0) unless status == ok.
    double statistic = 0.0;
    /// 1 - Phi(statistic). Set to 1 unless status == ok.
    double p_value = 1.0;
    double g_n = 0.0;
    double t_n = 0.0;
    std::size_t n_used = 0;
    std::size_t r_used = 0;
    std::size_t c_used = 0;
    Orientation orientation = Orientation::columns;
    double alpha = 0.05;
    bool reject = false;
    TestStatus status = TestStatus::ok;
    std::string diagnostic;
    /// Original indices of singleton columns (or rows) removed before testing.
    std::vector<std::size_t> dropped;

    bool ok() const { return status == TestStatus::ok; }
};

/// N x N matrix of inner products a_ij = vec(X_i P)^T vec(X_j P).
class GramMatrix {
public:
    explicit GramMatrix(Matrix entries);

    std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
    double operator()(std::size_t i, std::size_t j) const {
        return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const Matrix& matrix() const { return entries_; }

private:
    Matrix entries_;
};

GramMatrix compute_gram(const DataStack& stack, const ProjectionMatrix& projection);

/// G_N. Requires N >= 2; may be negative.
double g_statistic(const GramMatrix& gram);

/// Raw sums over distinct ordered index tuples that make up T_N.
struct TraceSums {
    double pairs = 0.0;      // sum_{i != j} a_ij^2
    double triples = 0.0;    // sum over distinct i,j,k of a_ij a_ik
    double quadruples = 0.0; // sum over distinct i,j,k,l of a_ij a_kl
};

/// O(N^2) evaluation of the tuple sums.
TraceSums trace_sums(const GramMatrix& gram);

/// T_N by explicit enumeration of index tuples. O(N^4); reference use only.
double t_n_naive(const GramMatrix& gram);

/// T_N in O(N^2) from row sums of the off-diagonal Gram matrix.
double t_n_fast(const GramMatrix& gram);

/// Standardizes G_N by T_N. The gram must already include the projection.
TestResult test_from_gram(const GramMatrix& gram, double alpha);

/// Test that each row of M is constant within every group of the partition.
/// With Orientation::rows the subject matrices are transposed first and the
/// partition refers to rows. Singleton groups are dropped before testing.
TestResult mean_matrix_test(const DataStack& stack, const GroupPartition& partition, double alpha = 0.05,
                            Orientation orientation = Orientation::columns);

/// H0: M = m0. Centers the data and tests with P = I.
TestResult test_known_matrix(const DataStack& stack, const Matrix& m0, double alpha = 0.05);

/// H0: mu_a - mu_b = mu0 for columns col_a and col_b (0-based).
TestResult test_known_difference(const DataStack& stack, const Vector& mu0, std::size_t col_a, std::size_t col_b,
                                 double alpha = 0.05);

enum class PowerRegime {
    /// mean effect small relative to tr(Omega^2)/N
    condition5,
    /// mean effect dominates
    condition6,
};

/// Omega = (P (x) I_r) Sigma (P (x) I_r), materialized. Size-guarded like CovarianceSpec::materialize.
Matrix omega_matrix(const CovarianceSpec& sigma, const ProjectionMatrix& projection);

/// Leading-order asymptotic power.
double analytic_power(const Matrix& mean, const ProjectionMatrix& projection, const CovarianceSpec& sigma,
                      std::size_t n_subjects, double alpha, PowerRegime regime);

/// Closed form of the condition-5 power for Sigma = I and a mean with no row
/// effect (every row equals column_means).
double no_row_effect_power(std::span<const double> column_means, const GroupPartition& partition,
                           std::size_t n_rows, std::size_t n_subjects, double alpha);

/// tr(Omega^4) / tr(Omega^2)^2. Small values indicate the covariance is in
/// the class where the normal approximation applies.
double condition4_ratio(const CovarianceSpec& sigma, const ProjectionMatrix& projection);

}  // namespace transmean
