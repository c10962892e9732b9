#pragma once

// Generative model X_i = M + W_i with vec(W_i) = Sigma^{1/2} vec(Z_i), mean
// configurations calibrated to a fixed signal ratio, and a seeded Monte
// Carlo harness for empirical size and power.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "transmean/core.hpp"
#include "transmean/covariance.hpp"
#include "transmean/rng.hpp"

namespace transmean {

/// Distribution of the standardized noise entries Z_iab (mean 0, variance 1).
enum class NoiseScenario {
    normal,   // N(0, 1)
    gamma,    // (G - 8) / 4 with G ~ Gamma(shape 4, rate 0.5)
    mixture,  // normal in the upper floor(r/2) rows, gamma below
};

std::string to_string(NoiseScenario s);
/// Accepts the names above or the scenario numbers 1, 2, 3.
NoiseScenario parse_scenario(const std::string& text);

Matrix gen_noise(NoiseScenario scenario, std::size_t rows, std::size_t cols, Philox& rng);

struct MeanSpec {
    enum class Kind { zero, right_block, sparse, multiplicative };
    enum class Allocation { equal, linear };
    /// Denominator of the calibration ratio tr(M^T M) / d:
    /// identity -> d = sqrt(r (c - 1)); sigma -> d = sqrt(tr(Sigma^2)).
    enum class Calibration { identity, sigma };

    Kind kind = Kind::zero;
    /// right_block and sparse: leading zero columns, then effect columns.
    std::size_t effect_width = 0;
    double target = 0.0;
    Calibration calibration = Calibration::identity;
    /// sparse: fraction of zero entries in the effect vector.
    double proportion_zero = 0.0;
    Allocation allocation = Allocation::equal;
    /// multiplicative: M = [J, t J] with the last [fraction * c] columns scaled by t.
    double t = 1.0;
    double effect_fraction = 0.1;

    static MeanSpec zero();
    /// M = [0, t J_{r x effect_width}] with t solved from the target.
    static MeanSpec right_block(std::size_t effect_width, double target,
                                Calibration calibration = Calibration::identity);
    /// M = [0, mu 1^T_{effect_width}] where mu has the given proportion of zeros.
    static MeanSpec sparse(double proportion_zero, Allocation allocation, double target, std::size_t effect_width = 1,
                           Calibration calibration = Calibration::identity);
    static MeanSpec multiplicative(double t, double effect_fraction = 0.1);

    bool is_null() const { return kind == Kind::zero; }
    std::string describe() const;
};

/// Number of nonzero entries of a sparse effect vector of length r.
std::size_t sparse_nonzeros(double proportion_zero, std::size_t rows);

/// Denominator used by a calibration mode.
double calibration_denominator(MeanSpec::Calibration calibration, const CovarianceSpec& sigma);

/// Builds the mean matrix, solving the scale so that tr(M^T M) / d equals the
/// target exactly (up to rounding).
Matrix calibrate_mean(const MeanSpec& spec, std::size_t rows, std::size_t cols, const CovarianceSpec& sigma);

/// One competing procedure evaluated per replicate.
struct Method {
    enum class Kind { proposed, anova_fdr, anova_bon, kw_fdr, kw_bon, cq_bon };

    Kind kind = Kind::proposed;
    /// Group sizes for the proposed statistic; empty means one group of c.
    std::vector<int> sizes;

    /// "H10", "H7_3", "anova_fdr", ...; sizes are resolved against c.
    std::string label(std::size_t cols) const;
    static Method parse(const std::string& text);
};

struct SimConfig {
    std::size_t n_subjects = 50;
    std::size_t n_rows = 100;
    std::size_t n_cols = 10;
    NoiseScenario scenario = NoiseScenario::normal;
    CovarianceSpec covariance = CovarianceSpec::identity(100, 10);
    MeanSpec mean = MeanSpec::zero();
    /// Column grouping used by the row-wise baselines; empty means one group.
    std::vector<int> baseline_sizes;
    double alpha = 0.05;
    std::size_t replicates = 1000;
    std::uint64_t seed = 20150101;
    std::vector<Method> methods{Method{}};
    /// 0 = TRANSMEAN_THREADS environment variable, else hardware concurrency.
    unsigned threads = 0;

    /// Throws InvalidArgument on inconsistent dimensions or parameters.
    void validate() const;
};

struct MethodRate {
    std::string label;
    std::size_t rejections = 0;
    std::size_t valid = 0;
    std::size_t errors = 0;
    double rate = 0.0;
    /// sqrt(rate (1 - rate) / valid)
    double standard_error = 0.0;
};

struct RejectionReport {
    std::vector<MethodRate> methods;
    std::size_t replicates = 0;
    double elapsed_seconds = 0.0;

    const MethodRate& at(const std::string& label) const;
};

/// Draws one stack from the model. The mean and root are passed in so a
/// Monte Carlo run factors the covariance once.
DataStack gen_stack(const SimConfig& config, const CovarianceRoot& root, const Matrix& mean, Philox& rng);
DataStack gen_stack(const SimConfig& config, Philox& rng);

/// Thread count from TRANSMEAN_THREADS, falling back to hardware concurrency.
unsigned default_thread_count();

/// Runs config.replicates independent replicates; replicate k uses
/// Philox(seed, k). Results do not depend on the thread count. Throws if
/// more than 1% of replicates fail for any method.
RejectionReport monte_carlo(const SimConfig& config);

}  // namespace transmean
