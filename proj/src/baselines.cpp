#include "transmean/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>

#include "transmean/normal.hpp"

namespace transmean {

std::string to_string(Adjustment a) {
    switch (a) {
        case Adjustment::raw: return "raw";
        case Adjustment::fdr: return "fdr";
        case Adjustment::bonferroni: return "bonferroni";
    }
    return "raw";
}

Adjustment parse_adjustment(const std::string& text) {
    if (text == "fdr" || text == "bh") return Adjustment::fdr;
    if (text == "bonferroni" || text == "bon") return Adjustment::bonferroni;
    if (text == "raw" || text == "none") return Adjustment::raw;
    throw InvalidArgument("unknown p-value correction '" + text + "' (expected fdr or bonferroni)");
}

namespace {

struct RowLevels {
    DataStack stack;
    GroupPartition partition;
};

RowLevels prepare_levels(const DataStack& stack, const GroupPartition& partition, const char* what) {
    if (stack.n_cols() != partition.n_columns()) {
        throw InvalidArgument(std::string(what) + ": partition covers " + std::to_string(partition.n_columns()) +
                              " columns but data has " + std::to_string(stack.n_cols()));
    }
    if (stack.n_subjects() < 2) {
        throw InvalidArgument(std::string(what) + ": needs at least 2 subjects");
    }
    ReducedData reduced = drop_singletons(stack, partition);
    return {std::move(reduced.stack), std::move(reduced.partition)};
}

}  // namespace

PValueVector anova_rowwise(const DataStack& stack, const GroupPartition& partition) {
    const RowLevels levels = prepare_levels(stack, partition, "anova_rowwise");
    const std::size_t n = levels.stack.n_subjects();
    const std::size_t r = levels.stack.n_rows();
    const std::size_t c = levels.stack.n_cols();
    const std::size_t g = levels.partition.n_groups();
    const double df1 = static_cast<double>(c - g);
    const double df2 = static_cast<double>(n * c - c);
    const boost::math::fisher_f_distribution<double> f_dist(df1, df2);

    PValueVector out;
    out.values.assign(r, 1.0);
    std::vector<double> cell(n);
    std::vector<double> column_mean(c);
    std::vector<double> group_mean(g);
    for (std::size_t a = 0; a < r; ++a) {
        double within = 0.0;
        double magnitude = 0.0;
        for (std::size_t b = 0; b < c; ++b) {
            for (std::size_t i = 0; i < n; ++i) {
                cell[i] = levels.stack[i](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            }
            // sorted summation makes the result independent of subject order
            std::sort(cell.begin(), cell.end());
            const double mean = std::accumulate(cell.begin(), cell.end(), 0.0) / static_cast<double>(n);
            column_mean[b] = mean;
            for (double v : cell) {
                within += (v - mean) * (v - mean);
                magnitude += v * v;
            }
        }
        std::fill(group_mean.begin(), group_mean.end(), 0.0);
        for (std::size_t b = 0; b < c; ++b) {
            const int k = levels.partition.group_of(b);
            group_mean[static_cast<std::size_t>(k - 1)] += column_mean[b] / levels.partition.group_size(k);
        }
        double between = 0.0;
        for (std::size_t b = 0; b < c; ++b) {
            const double d = column_mean[b] - group_mean[static_cast<std::size_t>(levels.partition.group_of(b) - 1)];
            between += static_cast<double>(n) * d * d;
        }
        if (within <= 1e-13 * magnitude) {
            out.flagged.push_back(a);
            continue;
        }
        const double f = (between / df1) / (within / df2);
        out.values[a] = std::clamp(boost::math::cdf(boost::math::complement(f_dist, f)), 0.0, 1.0);
    }
    return out;
}

PValueVector kruskal_rowwise(const DataStack& stack, const GroupPartition& partition) {
    const RowLevels levels = prepare_levels(stack, partition, "kruskal_rowwise");
    const std::size_t n = levels.stack.n_subjects();
    const std::size_t r = levels.stack.n_rows();
    const std::size_t c = levels.stack.n_cols();
    const std::size_t g = levels.partition.n_groups();

    std::vector<std::vector<std::size_t>> members(g);
    for (std::size_t b = 0; b < c; ++b) {
        members[static_cast<std::size_t>(levels.partition.group_of(b) - 1)].push_back(b);
    }

    PValueVector out;
    out.values.assign(r, 1.0);
    std::vector<std::pair<double, std::size_t>> pooled;  // (value, level index within group)
    std::vector<double> rank_sums;
    for (std::size_t a = 0; a < r; ++a) {
        double h_total = 0.0;
        double df = 0.0;
        for (const auto& cols : members) {
            pooled.clear();
            for (std::size_t q = 0; q < cols.size(); ++q) {
                for (std::size_t i = 0; i < n; ++i) {
                    pooled.emplace_back(
                        levels.stack[i](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(cols[q])), q);
                }
            }
            std::sort(pooled.begin(), pooled.end());
            const std::size_t total = pooled.size();
            rank_sums.assign(cols.size(), 0.0);
            double tie_term = 0.0;
            for (std::size_t lo = 0; lo < total;) {
                std::size_t hi = lo;
                while (hi + 1 < total && pooled[hi + 1].first == pooled[lo].first) ++hi;
                const double mid_rank = 0.5 * static_cast<double>(lo + hi) + 1.0;
                for (std::size_t t = lo; t <= hi; ++t) {
                    rank_sums[pooled[t].second] += mid_rank;
                }
                const double ties = static_cast<double>(hi - lo + 1);
                tie_term += ties * ties * ties - ties;
                lo = hi + 1;
            }
            const double nt = static_cast<double>(total);
            const double correction = 1.0 - tie_term / (nt * nt * nt - nt);
            if (correction <= 0.0) {
                continue;  // every value in this group tied
            }
            double h = 0.0;
            for (double s : rank_sums) {
                h += s * s / static_cast<double>(n);
            }
            h = 12.0 / (nt * (nt + 1.0)) * h - 3.0 * (nt + 1.0);
            h_total += h / correction;
            df += static_cast<double>(cols.size() - 1);
        }
        if (df == 0.0) {
            out.flagged.push_back(a);
            continue;
        }
        const boost::math::chi_squared_distribution<double> chi(df);
        out.values[a] = std::clamp(boost::math::cdf(boost::math::complement(chi, std::max(h_total, 0.0))), 0.0, 1.0);
    }
    return out;
}

std::vector<double> adjust_pvalues(std::span<const double> raw, Adjustment method) {
    std::vector<double> out(raw.begin(), raw.end());
    for (double p : raw) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw InvalidArgument("adjust_pvalues: p-values must lie in [0, 1]");
        }
    }
    const auto m = static_cast<double>(raw.size());
    if (method == Adjustment::bonferroni) {
        for (double& p : out) {
            p = std::min(1.0, m * p);
        }
    } else if (method == Adjustment::fdr) {
        std::vector<std::size_t> order(raw.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return raw[x] < raw[y]; });
        double running = 1.0;
        for (std::size_t k = raw.size(); k-- > 0;) {
            const std::size_t idx = order[k];
            running = std::min(running, raw[idx] * m / static_cast<double>(k + 1));
            // never below the raw value, even by rounding
            out[idx] = std::clamp(running, raw[idx], 1.0);
        }
    }
    return out;
}

PValueVector adjust_pvalues(const PValueVector& raw, Adjustment method) {
    PValueVector out;
    out.values = adjust_pvalues(raw.values, method);
    out.method = method;
    out.flagged = raw.flagged;
    return out;
}

bool family_rejects(std::span<const double> adjusted, double alpha) {
    return !adjusted.empty() && *std::min_element(adjusted.begin(), adjusted.end()) < alpha;
}

TestResult chen_qin_from_grams(const GramMatrix& within1, const GramMatrix& within2, const Matrix& cross,
                               double alpha) {
    const std::size_t n1 = within1.size();
    const std::size_t n2 = within2.size();
    if (n1 < 4 || n2 < 4) {
        throw InvalidArgument("chen_qin_two_sample: both samples need at least 4 observations");
    }
    if (static_cast<std::size_t>(cross.rows()) != n1 || static_cast<std::size_t>(cross.cols()) != n2) {
        throw InvalidArgument("chen_qin_two_sample: cross gram has the wrong shape");
    }
    const double d1 = static_cast<double>(n1);
    const double d2 = static_cast<double>(n2);

    TestResult result;
    result.alpha = alpha;
    result.n_used = n1 + n2;
    result.g_n = g_statistic(within1) + g_statistic(within2) - 2.0 * cross.mean();

    const double tr11 = t_n_fast(within1);
    const double tr22 = t_n_fast(within2);
    // tr(S1 S2) with both samples centered: unbiased for tr(Sigma1 Sigma2)
    Matrix centered = cross;
    centered.colwise() -= cross.rowwise().mean();
    centered.rowwise() -= cross.colwise().mean();
    centered.array() += cross.mean();
    const double tr12 = centered.squaredNorm() / ((d1 - 1.0) * (d2 - 1.0));
    const double variance = 2.0 * tr11 / (d1 * (d1 - 1.0)) + 2.0 * tr22 / (d2 * (d2 - 1.0)) + 4.0 * tr12 / (d1 * d2);
    result.t_n = variance;

    const double scale = within1.matrix().squaredNorm() / (d1 * d1 * d1 * d1) +
                         within2.matrix().squaredNorm() / (d2 * d2 * d2 * d2);
    if (!(variance > 1e-10 * scale) || !(variance > 0.0)) {
        result.status = TestStatus::unstable_variance;
        result.diagnostic = "unstable variance estimate: two-sample variance estimate is not positive";
        return result;
    }
    result.statistic = result.g_n / std::sqrt(variance);
    result.p_value = normal_sf(result.statistic);
    result.reject = result.statistic >= normal_upper_quantile(alpha);
    return result;
}

TestResult chen_qin_two_sample(const Matrix& group1, const Matrix& group2, double alpha) {
    if (group1.rows() != group2.rows()) {
        throw InvalidArgument("chen_qin_two_sample: samples have different dimensions");
    }
    TestResult result = chen_qin_from_grams(GramMatrix(group1.transpose() * group1),
                                            GramMatrix(group2.transpose() * group2), group1.transpose() * group2,
                                            alpha);
    result.r_used = static_cast<std::size_t>(group1.rows());
    return result;
}

PairwiseSummary pairwise_cq_procedure(const DataStack& stack, double alpha) {
    const std::size_t n = stack.n_subjects();
    const std::size_t c = stack.n_cols();
    if (n < 4) {
        throw InvalidArgument("pairwise_cq_procedure: needs N >= 4");
    }
    if (c < 2) {
        throw InvalidArgument("pairwise_cq_procedure: needs at least two columns");
    }
    const auto ni = static_cast<Eigen::Index>(n);
    // column b of subject i goes to position b * n + i
    Matrix vectors(static_cast<Eigen::Index>(stack.n_rows()), static_cast<Eigen::Index>(n * c));
    for (std::size_t b = 0; b < c; ++b) {
        for (std::size_t i = 0; i < n; ++i) {
            vectors.col(static_cast<Eigen::Index>(b * n + i)) = stack[i].col(static_cast<Eigen::Index>(b));
        }
    }
    const Matrix gram = vectors.transpose() * vectors;
    std::vector<GramMatrix> within;
    within.reserve(c);
    for (std::size_t b = 0; b < c; ++b) {
        const auto off = static_cast<Eigen::Index>(b * n);
        within.emplace_back(Matrix(gram.block(off, off, ni, ni)));
    }

    PairwiseSummary summary;
    std::vector<double> raw;
    for (std::size_t a = 0; a < c; ++a) {
        for (std::size_t b = a + 1; b < c; ++b) {
            const Matrix cross = gram.block(static_cast<Eigen::Index>(a * n), static_cast<Eigen::Index>(b * n), ni, ni);
            PairTest pair{a, b, chen_qin_from_grams(within[a], within[b], cross, alpha), 1.0};
            pair.result.r_used = stack.n_rows();
            if (!pair.result.ok()) {
                ++summary.n_flagged;
            }
            raw.push_back(pair.result.p_value);
            summary.pairs.push_back(std::move(pair));
        }
    }
    const std::vector<double> adjusted = adjust_pvalues(raw, Adjustment::bonferroni);
    for (std::size_t k = 0; k < adjusted.size(); ++k) {
        summary.pairs[k].adjusted_p = adjusted[k];
    }
    summary.min_adjusted_p = *std::min_element(adjusted.begin(), adjusted.end());
    summary.reject = summary.min_adjusted_p < alpha;
    return summary;
}

}  // namespace transmean
