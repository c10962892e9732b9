#include "transmean/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace transmean {

GroupPartition::GroupPartition(std::vector<int> assignment) : assignment_(std::move(assignment)) {
    if (assignment_.empty()) {
        throw InvalidArgument("partition: assignment is empty");
    }
    const int g = *std::max_element(assignment_.begin(), assignment_.end());
    if (*std::min_element(assignment_.begin(), assignment_.end()) < 1) {
        throw InvalidArgument("partition: group ids must be >= 1");
    }
    sizes_.assign(static_cast<std::size_t>(g), 0);
    for (int k : assignment_) {
        ++sizes_[static_cast<std::size_t>(k - 1)];
    }
    for (std::size_t k = 0; k < sizes_.size(); ++k) {
        if (sizes_[k] == 0) {
            throw InvalidArgument("partition: group id " + std::to_string(k + 1) +
                                  " is unused; ids must cover 1..g");
        }
    }
    if (*std::max_element(sizes_.begin(), sizes_.end()) < 2) {
        throw InvalidArgument("partition: at least one c_q >= 2 is required (all groups are singletons)");
    }
}

GroupPartition GroupPartition::from_sizes(std::span<const int> sizes) {
    std::vector<int> assignment;
    int id = 0;
    for (int s : sizes) {
        if (s < 1) {
            throw InvalidArgument("partition: group sizes must be positive");
        }
        ++id;
        assignment.insert(assignment.end(), static_cast<std::size_t>(s), id);
    }
    return GroupPartition(std::move(assignment));
}

GroupPartition GroupPartition::single_group(std::size_t c) {
    return GroupPartition(std::vector<int>(c, 1));
}

bool GroupPartition::has_singletons() const {
    return std::find(sizes_.begin(), sizes_.end(), 1) != sizes_.end();
}

ProjectionMatrix::ProjectionMatrix(const GroupPartition& partition)
    : assignment_(partition.assignment()), rank_(partition.n_columns() - partition.n_groups()) {
    const auto c = static_cast<Eigen::Index>(partition.n_columns());
    entries_ = Matrix::Zero(c, c);
    for (Eigen::Index a = 0; a < c; ++a) {
        const int ka = assignment_[static_cast<std::size_t>(a)];
        const double w = 1.0 / partition.group_size(ka);
        for (Eigen::Index b = 0; b < c; ++b) {
            if (assignment_[static_cast<std::size_t>(b)] == ka) {
                entries_(a, b) = (a == b ? 1.0 : 0.0) - w;
            }
        }
    }
}

ProjectionMatrix ProjectionMatrix::identity(std::size_t c) {
    ProjectionMatrix p;
    p.entries_ = Matrix::Identity(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));
    p.rank_ = c;
    p.identity_ = true;
    return p;
}

ProjectionMatrix build_projection(const GroupPartition& partition) {
    return ProjectionMatrix(partition);
}

DataStack::DataStack(std::vector<Matrix> subjects) : subjects_(std::move(subjects)) {
    if (subjects_.empty()) {
        throw InvalidArgument("data stack: no subjects");
    }
    rows_ = static_cast<std::size_t>(subjects_.front().rows());
    cols_ = static_cast<std::size_t>(subjects_.front().cols());
    if (rows_ == 0 || cols_ == 0) {
        throw InvalidArgument("data stack: empty subject matrices");
    }
    for (std::size_t i = 0; i < subjects_.size(); ++i) {
        const auto& x = subjects_[i];
        if (static_cast<std::size_t>(x.rows()) != rows_ || static_cast<std::size_t>(x.cols()) != cols_) {
            throw InvalidArgument("data stack: subject " + std::to_string(i + 1) + " has shape " +
                                  std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                                  ", expected " + std::to_string(rows_) + "x" + std::to_string(cols_));
        }
        if (!x.allFinite()) {
            throw InvalidArgument("data stack: subject " + std::to_string(i + 1) + " has non-finite entries");
        }
    }
}

DataStack DataStack::transposed() const {
    std::vector<Matrix> out;
    out.reserve(subjects_.size());
    for (const auto& x : subjects_) {
        out.emplace_back(x.transpose());
    }
    return DataStack(std::move(out));
}

DataStack DataStack::select_columns(std::span<const std::size_t> columns) const {
    std::vector<Matrix> out;
    out.reserve(subjects_.size());
    for (const auto& x : subjects_) {
        Matrix y(x.rows(), static_cast<Eigen::Index>(columns.size()));
        for (std::size_t j = 0; j < columns.size(); ++j) {
            y.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(columns[j]));
        }
        out.push_back(std::move(y));
    }
    return DataStack(std::move(out));
}

DataStack DataStack::select_rows(std::span<const std::size_t> rows) const {
    std::vector<Matrix> out;
    out.reserve(subjects_.size());
    for (const auto& x : subjects_) {
        Matrix y(static_cast<Eigen::Index>(rows.size()), x.cols());
        for (std::size_t j = 0; j < rows.size(); ++j) {
            y.row(static_cast<Eigen::Index>(j)) = x.row(static_cast<Eigen::Index>(rows[j]));
        }
        out.push_back(std::move(y));
    }
    return DataStack(std::move(out));
}

double deviation(const Matrix& mean, const ProjectionMatrix& projection) {
    if (static_cast<std::size_t>(mean.cols()) != projection.dim()) {
        throw InvalidArgument("deviation: mean matrix has " + std::to_string(mean.cols()) +
                              " columns but projection is " + std::to_string(projection.dim()) + "x" +
                              std::to_string(projection.dim()));
    }
    if (projection.is_identity()) {
        return mean.squaredNorm();
    }
    return (mean * projection.matrix()).squaredNorm();
}

ReducedData drop_singletons(const DataStack& stack, const GroupPartition& partition) {
    if (stack.n_cols() != partition.n_columns()) {
        throw InvalidArgument("drop_singletons: partition covers " + std::to_string(partition.n_columns()) +
                              " columns but data has " + std::to_string(stack.n_cols()));
    }
    if (!partition.has_singletons()) {
        std::vector<std::size_t> all(stack.n_cols());
        std::iota(all.begin(), all.end(), std::size_t{0});
        return {stack, partition, std::move(all), {}};
    }

    std::vector<std::size_t> kept;
    std::vector<std::size_t> dropped;
    std::vector<int> remap(partition.n_groups() + 1, 0);
    std::vector<int> assignment;
    int next_id = 0;
    for (std::size_t b = 0; b < partition.n_columns(); ++b) {
        const int k = partition.group_of(b);
        if (partition.group_size(k) < 2) {
            dropped.push_back(b);
            continue;
        }
        if (remap[static_cast<std::size_t>(k)] == 0) {
            remap[static_cast<std::size_t>(k)] = ++next_id;
        }
        kept.push_back(b);
        assignment.push_back(remap[static_cast<std::size_t>(k)]);
    }
    return {stack.select_columns(kept), GroupPartition(std::move(assignment)), std::move(kept), std::move(dropped)};
}

}  // namespace transmean
