#include "transmean/engine.hpp"

#include <cmath>
#include <numeric>

#include "transmean/normal.hpp"

namespace transmean {

std::string to_string(Orientation o) {
    return o == Orientation::columns ? "columns" : "rows";
}

std::string to_string(TestStatus s) {
    return s == TestStatus::ok ? "ok" : "unstable_variance";
}

GramMatrix::GramMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) {
        throw InvalidArgument("gram matrix must be square");
    }
}

namespace {

void require_subjects(std::size_t n, std::size_t minimum, const char* what) {
    if (n < minimum) {
        throw InvalidArgument(std::string(what) + ": needs N >= " + std::to_string(minimum) + " subjects, got " +
                              std::to_string(n));
    }
}

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
}

// x <- x P: subtract each row's mean over the columns of the same group.
template <typename Derived>
void center_within_groups(Eigen::MatrixBase<Derived>& x, const std::vector<int>& assignment,
                          const std::vector<double>& counts) {
    Matrix means = Matrix::Zero(x.rows(), static_cast<Eigen::Index>(counts.size()));
    for (Eigen::Index b = 0; b < x.cols(); ++b) {
        means.col(assignment[static_cast<std::size_t>(b)] - 1) += x.col(b);
    }
    for (Eigen::Index k = 0; k < means.cols(); ++k) {
        means.col(k) /= counts[static_cast<std::size_t>(k)];
    }
    for (Eigen::Index b = 0; b < x.cols(); ++b) {
        x.col(b) -= means.col(assignment[static_cast<std::size_t>(b)] - 1);
    }
}

std::vector<double> group_counts_of(const std::vector<int>& assignment) {
    std::vector<double> counts;
    for (int k : assignment) {
        if (static_cast<std::size_t>(k) > counts.size()) counts.resize(static_cast<std::size_t>(k), 0.0);
        counts[static_cast<std::size_t>(k - 1)] += 1.0;
    }
    return counts;
}

// Columns of the result are Y_i = vec(X_i P).
Matrix projected_vectors(const DataStack& stack, const ProjectionMatrix& projection) {
    const std::vector<double> group_counts = group_counts_of(projection.assignment());
    const auto n = static_cast<Eigen::Index>(stack.n_subjects());
    const auto rc = static_cast<Eigen::Index>(stack.n_rows() * stack.n_cols());
    Matrix y(rc, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Matrix& x = stack[static_cast<std::size_t>(i)];
        if (projection.is_identity()) {
            y.col(i) = Eigen::Map<const Vector>(x.data(), rc);
        } else {
            Eigen::Map<Matrix> xp(y.col(i).data(), x.rows(), x.cols());
            xp = x;
            center_within_groups(xp, projection.assignment(), group_counts);
        }
    }
    return y;
}

}  // namespace

GramMatrix compute_gram(const DataStack& stack, const ProjectionMatrix& projection) {
    if (stack.n_cols() != projection.dim()) {
        throw InvalidArgument("compute_gram: data has " + std::to_string(stack.n_cols()) +
                              " columns but projection is " + std::to_string(projection.dim()) + "x" +
                              std::to_string(projection.dim()));
    }
    const Matrix y = projected_vectors(stack, projection);
    Matrix a = y.transpose() * y;
    // exact symmetry
    a = 0.5 * (a + a.transpose()).eval();
    return GramMatrix(std::move(a));
}

double g_statistic(const GramMatrix& gram) {
    const std::size_t n = gram.size();
    require_subjects(n, 2, "g_statistic");
    const Matrix& a = gram.matrix();
    const double off_diagonal = a.sum() - a.trace();
    return off_diagonal / (static_cast<double>(n) * static_cast<double>(n - 1));
}

TraceSums trace_sums(const GramMatrix& gram) {
    Matrix b = gram.matrix();
    b.diagonal().setZero();
    const Vector row_sums = b.rowwise().sum();
    const double s1 = row_sums.sum();
    const double s2 = b.squaredNorm();
    const double p3 = row_sums.squaredNorm() - s2;
    return {s2, p3, s1 * s1 - 2.0 * s2 - 4.0 * p3};
}

namespace {

double assemble_t_n(const TraceSums& sums, std::size_t n_subjects) {
    const auto n = static_cast<double>(n_subjects);
    const double d2 = n * (n - 1.0);
    const double d3 = d2 * (n - 2.0);
    const double d4 = d3 * (n - 3.0);
    return sums.pairs / d2 - 2.0 * sums.triples / d3 + sums.quadruples / d4;
}

}  // namespace

double t_n_naive(const GramMatrix& gram) {
    const std::size_t n = gram.size();
    require_subjects(n, 4, "t_n_naive");
    TraceSums sums;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sums.pairs += gram(i, j) * gram(i, j);
            for (std::size_t k = 0; k < n; ++k) {
                if (k == i || k == j) continue;
                sums.triples += gram(i, j) * gram(i, k);
                for (std::size_t l = 0; l < n; ++l) {
                    if (l == i || l == j || l == k) continue;
                    sums.quadruples += gram(i, j) * gram(k, l);
                }
            }
        }
    }
    return assemble_t_n(sums, n);
}

double t_n_fast(const GramMatrix& gram) {
    require_subjects(gram.size(), 4, "t_n_fast");
    return assemble_t_n(trace_sums(gram), gram.size());
}

TestResult test_from_gram(const GramMatrix& gram, double alpha) {
    require_alpha(alpha);
    const std::size_t n = gram.size();
    require_subjects(n, 4, "mean matrix test");

    TestResult result;
    result.alpha = alpha;
    result.n_used = n;
    result.g_n = g_statistic(gram);
    const TraceSums sums = trace_sums(gram);
    result.t_n = assemble_t_n(sums, n);

    // T_N is a difference of terms of size ~pairs/d2; anything below rounding
    // noise of that scale counts as non-positive.
    const double nn = static_cast<double>(n);
    const double scale = sums.pairs / (nn * (nn - 1.0));
    if (!(result.t_n > 1e-10 * scale) || !(result.t_n > 0.0)) {
        result.status = TestStatus::unstable_variance;
        result.diagnostic = "unstable variance estimate: T_N = " + std::to_string(result.t_n) +
                            " is not positive; the statistic cannot be standardized";
        result.statistic = 0.0;
        result.p_value = 1.0;
        result.reject = false;
        return result;
    }
    result.statistic = result.g_n / std::sqrt(2.0 * result.t_n / (nn * (nn - 1.0)));
    result.p_value = normal_sf(result.statistic);
    result.reject = result.statistic >= normal_upper_quantile(alpha);
    return result;
}

TestResult mean_matrix_test(const DataStack& stack, const GroupPartition& partition, double alpha,
                            Orientation orientation) {
    require_alpha(alpha);
    require_subjects(stack.n_subjects(), 4, "mean matrix test");
    const DataStack oriented = orientation == Orientation::rows ? stack.transposed() : stack;
    if (oriented.n_cols() != partition.n_columns()) {
        throw InvalidArgument("mean matrix test: partition covers " + std::to_string(partition.n_columns()) + " " +
                              (orientation == Orientation::rows ? "rows" : "columns") + " but the data has " +
                              std::to_string(oriented.n_cols()));
    }
    const ReducedData reduced = drop_singletons(oriented, partition);
    const ProjectionMatrix projection(reduced.partition);
    TestResult result = test_from_gram(compute_gram(reduced.stack, projection), alpha);
    result.orientation = orientation;
    result.r_used = reduced.stack.n_rows();
    result.c_used = reduced.stack.n_cols();
    result.dropped = reduced.dropped_columns;
    return result;
}

TestResult test_known_matrix(const DataStack& stack, const Matrix& m0, double alpha) {
    require_alpha(alpha);
    require_subjects(stack.n_subjects(), 4, "known-matrix test");
    if (static_cast<std::size_t>(m0.rows()) != stack.n_rows() || static_cast<std::size_t>(m0.cols()) != stack.n_cols()) {
        throw InvalidArgument("known-matrix test: M0 is " + std::to_string(m0.rows()) + "x" +
                              std::to_string(m0.cols()) + " but subjects are " + std::to_string(stack.n_rows()) +
                              "x" + std::to_string(stack.n_cols()));
    }
    std::vector<Matrix> centered;
    centered.reserve(stack.n_subjects());
    for (const auto& x : stack.subjects()) {
        centered.emplace_back(x - m0);
    }
    const DataStack shifted(std::move(centered));
    TestResult result = test_from_gram(compute_gram(shifted, ProjectionMatrix::identity(stack.n_cols())), alpha);
    result.r_used = stack.n_rows();
    result.c_used = stack.n_cols();
    return result;
}

TestResult test_known_difference(const DataStack& stack, const Vector& mu0, std::size_t col_a, std::size_t col_b,
                                 double alpha) {
    if (col_a == col_b) {
        throw InvalidArgument("known-difference test: the two columns must differ");
    }
    if (col_a >= stack.n_cols() || col_b >= stack.n_cols()) {
        throw InvalidArgument("known-difference test: column index out of range");
    }
    if (static_cast<std::size_t>(mu0.size()) != stack.n_rows()) {
        throw InvalidArgument("known-difference test: mu0 has " + std::to_string(mu0.size()) +
                              " entries but subjects have " + std::to_string(stack.n_rows()) + " rows");
    }
    std::vector<Matrix> pairs;
    pairs.reserve(stack.n_subjects());
    for (const auto& x : stack.subjects()) {
        Matrix y(x.rows(), 2);
        y.col(0) = x.col(static_cast<Eigen::Index>(col_a)) - mu0;
        y.col(1) = x.col(static_cast<Eigen::Index>(col_b));
        pairs.push_back(std::move(y));
    }
    TestResult result = mean_matrix_test(DataStack(std::move(pairs)), GroupPartition({1, 1}), alpha);
    result.dropped.clear();
    for (std::size_t b = 0; b < stack.n_cols(); ++b) {
        if (b != col_a && b != col_b) {
            result.dropped.push_back(b);
        }
    }
    return result;
}

namespace {

// Applies P (x) I_r to every column of m, viewing each column as vec of an r x c matrix.
Matrix left_apply_projection(const Matrix& m, const ProjectionMatrix& projection, std::size_t rows) {
    if (projection.is_identity()) {
        return m;
    }
    const auto r = static_cast<Eigen::Index>(rows);
    const auto c = static_cast<Eigen::Index>(projection.dim());
    const std::vector<double> counts = group_counts_of(projection.assignment());
    Matrix out = m;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        Eigen::Map<Matrix> block(out.col(j).data(), r, c);
        center_within_groups(block, projection.assignment(), counts);
    }
    return out;
}

}  // namespace

Matrix omega_matrix(const CovarianceSpec& sigma, const ProjectionMatrix& projection) {
    if (sigma.n_cols() != projection.dim()) {
        throw InvalidArgument("omega: covariance has " + std::to_string(sigma.n_cols()) +
                              " columns but projection is " + std::to_string(projection.dim()) + "x" +
                              std::to_string(projection.dim()));
    }
    const Matrix full = sigma.materialize();
    const Matrix half = left_apply_projection(full, projection, sigma.n_rows());
    Matrix omega = left_apply_projection(half.transpose(), projection, sigma.n_rows());
    return 0.5 * (omega + omega.transpose());
}

double analytic_power(const Matrix& mean, const ProjectionMatrix& projection, const CovarianceSpec& sigma,
                      std::size_t n_subjects, double alpha, PowerRegime regime) {
    require_alpha(alpha);
    if (static_cast<std::size_t>(mean.rows()) != sigma.n_rows() ||
        static_cast<std::size_t>(mean.cols()) != sigma.n_cols()) {
        throw InvalidArgument("analytic_power: mean and covariance dimensions differ");
    }
    const Matrix omega = omega_matrix(sigma, projection);
    const double dev = deviation(mean, projection);
    const double n = static_cast<double>(n_subjects);
    if (regime == PowerRegime::condition5) {
        const double tr_omega2 = omega.squaredNorm();
        if (!(tr_omega2 > 0.0)) {
            throw InvalidArgument("analytic_power: tr(Omega^2) is zero");
        }
        return normal_cdf(-normal_upper_quantile(alpha) + n * dev / std::sqrt(2.0 * tr_omega2));
    }
    const Eigen::Map<const Vector> vec_m(mean.data(), mean.size());
    const double quad = vec_m.dot(omega * vec_m);
    if (!(quad > 0.0)) {
        throw InvalidArgument("analytic_power: vec(M)^T Omega vec(M) is zero; the condition-6 regime does not apply");
    }
    return normal_cdf(std::sqrt(n) * dev / (2.0 * std::sqrt(quad)));
}

double no_row_effect_power(std::span<const double> column_means, const GroupPartition& partition, std::size_t n_rows,
                           std::size_t n_subjects, double alpha) {
    if (column_means.size() != partition.n_columns()) {
        throw InvalidArgument("no_row_effect_power: one mean per column is required");
    }
    std::vector<double> group_mean(partition.n_groups(), 0.0);
    for (std::size_t b = 0; b < column_means.size(); ++b) {
        const int k = partition.group_of(b);
        group_mean[static_cast<std::size_t>(k - 1)] += column_means[b] / partition.group_size(k);
    }
    double spread = 0.0;
    for (std::size_t b = 0; b < column_means.size(); ++b) {
        const double d = column_means[b] - group_mean[static_cast<std::size_t>(partition.group_of(b) - 1)];
        spread += d * d;
    }
    const double n = static_cast<double>(n_subjects);
    const double r = static_cast<double>(n_rows);
    const double free_columns = static_cast<double>(partition.n_columns() - partition.n_groups());
    return normal_cdf(-normal_upper_quantile(alpha) + std::sqrt(n * n * r / (2.0 * free_columns)) * spread);
}

double condition4_ratio(const CovarianceSpec& sigma, const ProjectionMatrix& projection) {
    const Matrix omega = omega_matrix(sigma, projection);
    const double tr2 = omega.squaredNorm();
    if (!(tr2 > 0.0)) {
        throw InvalidArgument("condition4_ratio: tr(Omega^2) is zero");
    }
    const Matrix omega2 = omega * omega;
    return omega2.squaredNorm() / (tr2 * tr2);
}

}  // namespace transmean
