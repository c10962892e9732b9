#pragma once

// Partition and projection algebra for grouped-column mean hypotheses.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace transmean {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when an input violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Assignment of c columns (or rows) into g groups.
///
/// Group ids are 1-based and contiguous: every id in 1..g occurs at least
/// once. At least one group must have two or more members, since a
/// partition of singletons admits no within-group comparison.
class GroupPartition {
public:
    /// Throws InvalidArgument when the assignment breaks either rule.
    explicit GroupPartition(std::vector<int> assignment);

    /// Contiguous blocks of the given sizes, e.g. {7, 3} -> [1,1,1,1,1,1,1,2,2,2].
    static GroupPartition from_sizes(std::span<const int> sizes);

    /// All columns in one group.
    static GroupPartition single_group(std::size_t c);

    std::size_t n_columns() const { return assignment_.size(); }
    std::size_t n_groups() const { return sizes_.size(); }
    const std::vector<int>& assignment() const { return assignment_; }
    /// Size of group k (1-based id).
    int group_size(int k) const { return sizes_.at(static_cast<std::size_t>(k - 1)); }
    const std::vector<int>& sizes() const { return sizes_; }
    int group_of(std::size_t column) const { return assignment_.at(column); }
    bool has_singletons() const;

    bool operator==(const GroupPartition&) const = default;

private:
    std::vector<int> assignment_;
    std::vector<int> sizes_;
};

/// Symmetric idempotent c x c matrix P = I - H, with H averaging inside each group.
class ProjectionMatrix {
public:
    /// Projection induced by a valid partition.
    explicit ProjectionMatrix(const GroupPartition& partition);

    /// P = I_c. Used by the known-mean test, which needs no grouping.
    static ProjectionMatrix identity(std::size_t c);

    const Matrix& matrix() const { return entries_; }
    std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
    /// c - g; equals trace(P).
    std::size_t rank() const { return rank_; }
    bool is_identity() const { return identity_; }
    /// Group ids per column; empty for the identity projection.
    const std::vector<int>& assignment() const { return assignment_; }

private:
    ProjectionMatrix() = default;

    Matrix entries_;
    std::vector<int> assignment_;
    std::size_t rank_ = 0;
    bool identity_ = false;
};

ProjectionMatrix build_projection(const GroupPartition& partition);

/// N subject matrices sharing one r x c shape. Entries must be finite.
class DataStack {
public:
    DataStack() = default;
    /// Throws InvalidArgument on empty input, mixed shapes or non-finite entries.
    explicit DataStack(std::vector<Matrix> subjects);

    std::size_t n_subjects() const { return subjects_.size(); }
    std::size_t n_rows() const { return rows_; }
    std::size_t n_cols() const { return cols_; }
    const Matrix& operator[](std::size_t i) const { return subjects_[i]; }
    const std::vector<Matrix>& subjects() const { return subjects_; }

    DataStack transposed() const;
    /// Keeps the listed columns in the given order.
    DataStack select_columns(std::span<const std::size_t> columns) const;
    /// Keeps the listed rows in the given order.
    DataStack select_rows(std::span<const std::size_t> rows) const;

private:
    std::vector<Matrix> subjects_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
};

/// tr(M^T M P): squared Frobenius norm of MP. Zero iff every row of M is
/// constant inside each column group.
double deviation(const Matrix& mean, const ProjectionMatrix& projection);

struct ReducedData {
    DataStack stack;
    GroupPartition partition;
    /// Original (0-based) indices of the columns that were kept.
    std::vector<std::size_t> kept_columns;
    /// Original (0-based) indices of dropped singleton columns.
    std::vector<std::size_t> dropped_columns;
};

/// Removes columns that sit alone in their group and re-indexes the rest.
/// Returns the inputs unchanged when there are no singletons.
ReducedData drop_singletons(const DataStack& stack, const GroupPartition& partition);

}  // namespace transmean
