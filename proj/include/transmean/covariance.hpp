#pragma once

// Covariance specifications for vec(X_i) and their symmetric square roots.
//
// vec() stacks columns, so entry (a, b) of an r x c matrix sits at index
// b * r + a. Under that ordering a Kronecker covariance Sigma_col (x) Sigma_row
// is sampled as Sigma_row^{1/2} Z Sigma_col^{1/2}.

#include <cstddef>
#include <string>
#include <vector>

#include "transmean/core.hpp"

namespace transmean {

/// A single square covariance factor.
struct FactorSpec {
    enum class Kind { identity, ar1, compound, dense };

    Kind kind = Kind::identity;
    std::size_t dim = 0;
    double rho = 0.0;
    Matrix entries;  // only for Kind::dense

    static FactorSpec identity(std::size_t dim);
    /// {rho^|a-b|}
    static FactorSpec ar1(std::size_t dim, double rho);
    /// Unit diagonal, rho off the diagonal: (1 - rho) I + rho J. rho = 0.5 gives 0.5 (I + J).
    static FactorSpec compound(std::size_t dim, double rho);
    static FactorSpec dense(Matrix entries);

    Matrix materialize() const;
    std::string describe() const;
};

class CovarianceSpec {
public:
    enum class Kind { identity, kronecker, block_diagonal, dense };

    static CovarianceSpec identity(std::size_t rows, std::size_t cols);
    /// Sigma = column_factor (x) row_factor.
    static CovarianceSpec kronecker(FactorSpec column_factor, FactorSpec row_factor);
    /// Blocks laid along vec(X); dimensions must add up to rows * cols.
    static CovarianceSpec block_diagonal(std::vector<FactorSpec> blocks, std::size_t rows, std::size_t cols);
    static CovarianceSpec dense(Matrix sigma, std::size_t rows, std::size_t cols);
    /// Compound symmetry on the full rc x rc covariance.
    static CovarianceSpec exchangeable(std::size_t rows, std::size_t cols, double rho);

    Kind kind() const { return kind_; }
    std::size_t n_rows() const { return rows_; }
    std::size_t n_cols() const { return cols_; }
    const FactorSpec& column_factor() const { return column_; }
    const FactorSpec& row_factor() const { return row_; }
    const std::vector<FactorSpec>& blocks() const { return blocks_; }
    const Matrix& dense_matrix() const { return dense_; }

    /// Full rc x rc matrix. Throws when rc exceeds kMaxMaterializedDim.
    Matrix materialize() const;
    std::string describe() const;

    static constexpr std::size_t kMaxMaterializedDim = 2500;

private:
    Kind kind_ = Kind::identity;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    FactorSpec column_;
    FactorSpec row_;
    std::vector<FactorSpec> blocks_;
    Matrix dense_;
};

/// Spectral square root of a symmetric positive-definite matrix.
/// Throws InvalidArgument if the smallest eigenvalue is <= 1e-10.
Matrix symmetric_sqrt(const Matrix& sigma);

/// Square-root factors of a CovarianceSpec, kept factored so that large
/// Kronecker and block-diagonal covariances are never materialized.
class CovarianceRoot {
public:
    /// Maps standardized noise Z (r x c) to W with vec(W) = Sigma^{1/2} vec(Z), in place.
    void apply(Matrix& noise) const;

    CovarianceSpec::Kind kind() const { return kind_; }
    bool is_identity() const { return kind_ == CovarianceSpec::Kind::identity; }
    /// Empty matrices stand for identity factors.
    const Matrix& row_root() const { return row_root_; }
    const Matrix& column_root() const { return column_root_; }
    const std::vector<Matrix>& block_roots() const { return block_roots_; }
    const Matrix& dense_root() const { return dense_root_; }

private:
    friend CovarianceRoot sqrt_factor(const CovarianceSpec& spec);

    CovarianceSpec::Kind kind_ = CovarianceSpec::Kind::identity;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Matrix row_root_;
    Matrix column_root_;
    std::vector<Matrix> block_roots_;
    std::vector<std::size_t> block_dims_;
    Matrix dense_root_;
};

CovarianceRoot sqrt_factor(const CovarianceSpec& spec);

}  // namespace transmean
