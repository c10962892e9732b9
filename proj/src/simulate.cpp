#include "transmean/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "transmean/baselines.hpp"
#include "transmean/engine.hpp"

namespace transmean {

std::string to_string(NoiseScenario s) {
    switch (s) {
        case NoiseScenario::normal: return "normal";
        case NoiseScenario::gamma: return "gamma";
        case NoiseScenario::mixture: return "mixture";
    }
    return "normal";
}

NoiseScenario parse_scenario(const std::string& text) {
    if (text == "normal" || text == "1") return NoiseScenario::normal;
    if (text == "gamma" || text == "2") return NoiseScenario::gamma;
    if (text == "mixture" || text == "3") return NoiseScenario::mixture;
    throw InvalidArgument("unknown noise scenario '" + text + "' (expected normal, gamma, mixture or 1-3)");
}

Matrix gen_noise(NoiseScenario scenario, std::size_t rows, std::size_t cols, Philox& rng) {
    const auto r = static_cast<Eigen::Index>(rows);
    const auto c = static_cast<Eigen::Index>(cols);
    Matrix z(r, c);
    std::normal_distribution<double> normal(0.0, 1.0);
    // shape 4, scale 2 (rate 0.5): mean 8, variance 16
    std::gamma_distribution<double> gamma(4.0, 2.0);
    const Eigen::Index normal_rows = scenario == NoiseScenario::normal    ? r
                                     : scenario == NoiseScenario::gamma ? 0
                                                                        : r / 2;
    for (Eigen::Index b = 0; b < c; ++b) {
        for (Eigen::Index a = 0; a < r; ++a) {
            z(a, b) = a < normal_rows ? normal(rng) : (gamma(rng) - 8.0) / 4.0;
        }
    }
    return z;
}

MeanSpec MeanSpec::zero() {
    return {};
}

MeanSpec MeanSpec::right_block(std::size_t effect_width, double target, Calibration calibration) {
    MeanSpec m;
    m.kind = Kind::right_block;
    m.effect_width = effect_width;
    m.target = target;
    m.calibration = calibration;
    return m;
}

MeanSpec MeanSpec::sparse(double proportion_zero, Allocation allocation, double target, std::size_t effect_width,
                          Calibration calibration) {
    MeanSpec m;
    m.kind = Kind::sparse;
    m.proportion_zero = proportion_zero;
    m.allocation = allocation;
    m.target = target;
    m.effect_width = effect_width;
    m.calibration = calibration;
    return m;
}

MeanSpec MeanSpec::multiplicative(double t, double effect_fraction) {
    MeanSpec m;
    m.kind = Kind::multiplicative;
    m.t = t;
    m.effect_fraction = effect_fraction;
    return m;
}

std::string MeanSpec::describe() const {
    std::ostringstream os;
    const char* cal = calibration == Calibration::identity ? "identity" : "sigma";
    switch (kind) {
        case Kind::zero: os << "zero"; break;
        case Kind::right_block: os << "right_block(" << effect_width << "," << target << "," << cal << ")"; break;
        case Kind::sparse:
            os << "sparse(" << proportion_zero << "," << (allocation == Allocation::equal ? "equal" : "linear") << ","
               << target << "," << effect_width << "," << cal << ")";
            break;
        case Kind::multiplicative: os << "multiplicative(" << t << "," << effect_fraction << ")"; break;
    }
    return os.str();
}

std::size_t sparse_nonzeros(double proportion_zero, std::size_t rows) {
    if (!(proportion_zero >= 0.0 && proportion_zero <= 1.0)) {
        throw InvalidArgument("sparse mean: proportion of zeros must lie in [0, 1]");
    }
    const double nonzero = (1.0 - proportion_zero) * static_cast<double>(rows);
    return std::min(rows, static_cast<std::size_t>(std::ceil(nonzero - 1e-9)));
}

double calibration_denominator(MeanSpec::Calibration calibration, const CovarianceSpec& sigma) {
    const auto r = static_cast<double>(sigma.n_rows());
    const auto c = static_cast<double>(sigma.n_cols());
    if (calibration == MeanSpec::Calibration::identity) {
        return std::sqrt(r * (c - 1.0));
    }
    switch (sigma.kind()) {
        case CovarianceSpec::Kind::identity:
            return std::sqrt(r * c);
        case CovarianceSpec::Kind::kronecker:
            return std::sqrt(sigma.row_factor().materialize().squaredNorm() *
                             sigma.column_factor().materialize().squaredNorm());
        case CovarianceSpec::Kind::block_diagonal: {
            double total = 0.0;
            for (const auto& b : sigma.blocks()) {
                total += b.materialize().squaredNorm();
            }
            return std::sqrt(total);
        }
        case CovarianceSpec::Kind::dense:
            return sigma.dense_matrix().norm();
    }
    return 1.0;
}

Matrix calibrate_mean(const MeanSpec& spec, std::size_t rows, std::size_t cols, const CovarianceSpec& sigma) {
    const auto r = static_cast<Eigen::Index>(rows);
    const auto c = static_cast<Eigen::Index>(cols);
    Matrix m = Matrix::Zero(r, c);
    switch (spec.kind) {
        case MeanSpec::Kind::zero:
            return m;
        case MeanSpec::Kind::multiplicative: {
            const auto scaled = static_cast<Eigen::Index>(std::floor(spec.effect_fraction * static_cast<double>(cols)));
            m.setOnes();
            m.rightCols(scaled).setConstant(spec.t);
            return m;
        }
        case MeanSpec::Kind::right_block:
        case MeanSpec::Kind::sparse:
            break;
    }
    if (!(spec.target > 0.0)) {
        throw InvalidArgument("calibrate_mean: target ratio must be positive");
    }
    if (spec.effect_width == 0 || spec.effect_width > cols) {
        throw InvalidArgument("calibrate_mean: effect width must lie in 1..c");
    }
    const auto width = static_cast<Eigen::Index>(spec.effect_width);
    Vector profile = Vector::Ones(r);
    if (spec.kind == MeanSpec::Kind::sparse) {
        const auto nonzero = static_cast<Eigen::Index>(sparse_nonzeros(spec.proportion_zero, rows));
        if (nonzero == 0) {
            throw InvalidArgument("calibrate_mean: sparse mean has no nonzero entries but the target is positive");
        }
        profile.setZero();
        for (Eigen::Index k = 0; k < nonzero; ++k) {
            profile(r - nonzero + k) = spec.allocation == MeanSpec::Allocation::linear ? static_cast<double>(k + 1) : 1.0;
        }
    }
    // tr(M^T M) = width * scale^2 * |profile|^2 = target * denominator
    const double wanted = spec.target * calibration_denominator(spec.calibration, sigma);
    const double scale = std::sqrt(wanted / (static_cast<double>(width) * profile.squaredNorm()));
    for (Eigen::Index b = c - width; b < c; ++b) {
        m.col(b) = scale * profile;
    }
    return m;
}

std::string Method::label(std::size_t cols) const {
    switch (kind) {
        case Kind::proposed: {
            std::string out = "H";
            if (sizes.empty()) {
                return out + std::to_string(cols);
            }
            for (std::size_t i = 0; i < sizes.size(); ++i) {
                out += (i ? "_" : "") + std::to_string(sizes[i]);
            }
            return out;
        }
        case Kind::anova_fdr: return "anova_fdr";
        case Kind::anova_bon: return "anova_bon";
        case Kind::kw_fdr: return "kw_fdr";
        case Kind::kw_bon: return "kw_bon";
        case Kind::cq_bon: return "cq_bon";
    }
    return "?";
}

Method Method::parse(const std::string& text) {
    if (text == "anova_fdr") return {Kind::anova_fdr, {}};
    if (text == "anova_bon") return {Kind::anova_bon, {}};
    if (text == "kw_fdr") return {Kind::kw_fdr, {}};
    if (text == "kw_bon") return {Kind::kw_bon, {}};
    if (text == "cq_bon") return {Kind::cq_bon, {}};
    if (text == "H" || text == "proposed") return {Kind::proposed, {}};
    if (text.size() > 1 && text[0] == 'H') {
        Method m{Kind::proposed, {}};
        std::stringstream ss(text.substr(1));
        std::string item;
        while (std::getline(ss, item, '_')) {
            try {
                std::size_t used = 0;
                const int v = std::stoi(item, &used);
                if (used != item.size() || v < 1) throw std::invalid_argument(item);
                m.sizes.push_back(v);
            } catch (const std::exception&) {
                throw InvalidArgument("bad method '" + text + "': expected H<size>_<size>...");
            }
        }
        return m;
    }
    throw InvalidArgument("unknown method '" + text + "' (expected H<sizes>, anova_fdr, anova_bon, kw_fdr, kw_bon, cq_bon)");
}

namespace {

GroupPartition resolve_partition(const std::vector<int>& sizes, std::size_t cols) {
    if (sizes.empty()) {
        return GroupPartition::single_group(cols);
    }
    const int total = std::accumulate(sizes.begin(), sizes.end(), 0);
    if (total != static_cast<int>(cols)) {
        throw InvalidArgument("group sizes sum to " + std::to_string(total) + " but c = " + std::to_string(cols));
    }
    return GroupPartition::from_sizes(sizes);
}

}  // namespace

void SimConfig::validate() const {
    if (n_subjects < 4) throw InvalidArgument("simulation: N must be >= 4");
    if (n_rows < 1 || n_cols < 2) throw InvalidArgument("simulation: need r >= 1 and c >= 2");
    if (covariance.n_rows() != n_rows || covariance.n_cols() != n_cols) {
        throw InvalidArgument("simulation: covariance is for " + std::to_string(covariance.n_rows()) + "x" +
                              std::to_string(covariance.n_cols()) + " matrices, config is " + std::to_string(n_rows) +
                              "x" + std::to_string(n_cols));
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("simulation: alpha must lie in (0, 1)");
    if (replicates < 100) throw InvalidArgument("simulation: at least 100 replicates are required");
    if (methods.empty()) throw InvalidArgument("simulation: no methods selected");
    if (mean.kind == MeanSpec::Kind::sparse && !(mean.proportion_zero >= 0.0 && mean.proportion_zero < 1.0)) {
        throw InvalidArgument("simulation: sparse proportion of zeros must lie in [0, 1)");
    }
    if (mean.kind == MeanSpec::Kind::multiplicative && !(mean.effect_fraction > 0.0 && mean.effect_fraction <= 1.0)) {
        throw InvalidArgument("simulation: multiplicative effect fraction must lie in (0, 1]");
    }
    if (mean.kind == MeanSpec::Kind::right_block || mean.kind == MeanSpec::Kind::sparse) {
        if (!(mean.target > 0.0)) throw InvalidArgument("simulation: mean target ratio must be positive");
        if (mean.effect_width < 1 || mean.effect_width > n_cols) {
            throw InvalidArgument("simulation: mean effect width must lie in 1..c");
        }
    }
    resolve_partition(baseline_sizes, n_cols);
    for (const auto& m : methods) {
        if (m.kind == Method::Kind::proposed) resolve_partition(m.sizes, n_cols);
    }
}

const MethodRate& RejectionReport::at(const std::string& label) const {
    for (const auto& m : methods) {
        if (m.label == label) return m;
    }
    throw InvalidArgument("report has no method '" + label + "'");
}

DataStack gen_stack(const SimConfig& config, const CovarianceRoot& root, const Matrix& mean, Philox& rng) {
    std::vector<Matrix> subjects;
    subjects.reserve(config.n_subjects);
    for (std::size_t i = 0; i < config.n_subjects; ++i) {
        Matrix x = gen_noise(config.scenario, config.n_rows, config.n_cols, rng);
        root.apply(x);
        x += mean;
        subjects.push_back(std::move(x));
    }
    return DataStack(std::move(subjects));
}

DataStack gen_stack(const SimConfig& config, Philox& rng) {
    return gen_stack(config, sqrt_factor(config.covariance),
                     calibrate_mean(config.mean, config.n_rows, config.n_cols, config.covariance), rng);
}

unsigned default_thread_count() {
    if (const char* env = std::getenv("TRANSMEAN_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

enum Outcome : std::uint8_t { kAccept = 0, kReject = 1, kError = 2 };

}  // namespace

RejectionReport monte_carlo(const SimConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();

    const CovarianceRoot root = sqrt_factor(config.covariance);
    const Matrix mean = calibrate_mean(config.mean, config.n_rows, config.n_cols, config.covariance);
    const GroupPartition baseline_partition = resolve_partition(config.baseline_sizes, config.n_cols);
    std::vector<GroupPartition> proposed_partitions;
    bool need_anova = false;
    bool need_kw = false;
    for (const auto& m : config.methods) {
        proposed_partitions.push_back(m.kind == Method::Kind::proposed ? resolve_partition(m.sizes, config.n_cols)
                                                                      : baseline_partition);
        need_anova |= m.kind == Method::Kind::anova_fdr || m.kind == Method::Kind::anova_bon;
        need_kw |= m.kind == Method::Kind::kw_fdr || m.kind == Method::Kind::kw_bon;
    }

    const std::size_t n_methods = config.methods.size();
    std::vector<std::uint8_t> outcomes(config.replicates * n_methods, kAccept);
    std::string first_error;
    std::mutex error_mutex;

    auto run_replicate = [&](std::size_t k) {
        Philox rng(config.seed, k);
        const DataStack stack = gen_stack(config, root, mean, rng);
        PValueVector anova;
        PValueVector kw;
        if (need_anova) anova = anova_rowwise(stack, baseline_partition);
        if (need_kw) kw = kruskal_rowwise(stack, baseline_partition);
        for (std::size_t m = 0; m < n_methods; ++m) {
            std::uint8_t outcome = kAccept;
            try {
                switch (config.methods[m].kind) {
                    case Method::Kind::proposed: {
                        const TestResult res = mean_matrix_test(stack, proposed_partitions[m], config.alpha);
                        if (!res.ok()) {
                            throw std::runtime_error(res.diagnostic);
                        }
                        outcome = res.reject ? kReject : kAccept;
                        break;
                    }
                    case Method::Kind::anova_fdr:
                        outcome = family_rejects(adjust_pvalues(anova.values, Adjustment::fdr), config.alpha);
                        break;
                    case Method::Kind::anova_bon:
                        outcome = family_rejects(adjust_pvalues(anova.values, Adjustment::bonferroni), config.alpha);
                        break;
                    case Method::Kind::kw_fdr:
                        outcome = family_rejects(adjust_pvalues(kw.values, Adjustment::fdr), config.alpha);
                        break;
                    case Method::Kind::kw_bon:
                        outcome = family_rejects(adjust_pvalues(kw.values, Adjustment::bonferroni), config.alpha);
                        break;
                    case Method::Kind::cq_bon:
                        outcome = pairwise_cq_procedure(stack, config.alpha).reject ? kReject : kAccept;
                        break;
                }
            } catch (const std::exception& e) {
                outcome = kError;
                const std::lock_guard lock(error_mutex);
                if (first_error.empty()) first_error = e.what();
            }
            outcomes[k * n_methods + m] = outcome;
        }
    };

    const unsigned threads =
        std::max(1u, std::min<unsigned>(config.threads ? config.threads : default_thread_count(),
                                        static_cast<unsigned>(config.replicates)));
    if (threads == 1) {
        for (std::size_t k = 0; k < config.replicates; ++k) run_replicate(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < config.replicates; k = next++) run_replicate(k);
            });
        }
    }

    RejectionReport report;
    report.replicates = config.replicates;
    for (std::size_t m = 0; m < n_methods; ++m) {
        MethodRate rate;
        rate.label = config.methods[m].label(config.n_cols);
        for (std::size_t k = 0; k < config.replicates; ++k) {
            switch (outcomes[k * n_methods + m]) {
                case kReject: ++rate.rejections; ++rate.valid; break;
                case kAccept: ++rate.valid; break;
                default: ++rate.errors; break;
            }
        }
        if (static_cast<double>(rate.errors) > 0.01 * static_cast<double>(config.replicates)) {
            throw std::runtime_error("monte_carlo: " + std::to_string(rate.errors) + " of " +
                                     std::to_string(config.replicates) + " replicates failed for " + rate.label +
                                     " (first error: " + first_error + ")");
        }
        if (rate.valid > 0) {
            rate.rate = static_cast<double>(rate.rejections) / static_cast<double>(rate.valid);
            rate.standard_error = std::sqrt(rate.rate * (1.0 - rate.rate) / static_cast<double>(rate.valid));
        }
        report.methods.push_back(std::move(rate));
    }
    report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace transmean
