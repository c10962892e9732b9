// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "transmean/commands.hpp"
#include "transmean/engine.hpp"
#include "transmean/sim_config.hpp"
#include "transmean/simulate.hpp"

using namespace transmean;
using transmean::testing::gaussian;
using transmean::testing::gaussian_stack;
using transmean::testing::relative_gap;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, a);
    return buf;
}

bool within(double value, double target, double tol) {
    return std::abs(value - target) <= tol + 1e-12;
}

/// Runs the preset cells matching the filter, optionally keeping only some methods.
std::vector<std::pair<PresetCell, RejectionReport>> run_cells(const std::string& preset_name, const std::string& filter,
                                                              std::size_t reps,
                                                              const std::vector<std::string>& keep = {}) {
    Preset preset = make_preset(preset_name, reps, kDefaultSeed);
    filter_cells(preset, filter);
    std::vector<std::pair<PresetCell, RejectionReport>> out;
    for (PresetCell cell : preset.cells) {
        if (!keep.empty()) {
            std::vector<Method> methods;
            std::vector<std::string> names;
            for (std::size_t m = 0; m < cell.config.methods.size(); ++m) {
                if (std::find(keep.begin(), keep.end(), cell.names[m]) != keep.end()) {
                    methods.push_back(cell.config.methods[m]);
                    names.push_back(cell.names[m]);
                }
            }
            cell.config.methods = methods;
            cell.names = names;
        }
        RejectionReport report = monte_carlo(cell.config);
        out.emplace_back(std::move(cell), std::move(report));
    }
    return out;
}

double rate_of(const PresetCell& cell, const RejectionReport& report, const std::string& name) {
    for (std::size_t m = 0; m < cell.names.size(); ++m) {
        if (cell.names[m] == name) return report.methods[m].rate;
    }
    throw InvalidArgument("no method " + name);
}

std::string key_of(const PresetCell& cell, const std::string& key) {
    for (const auto& [k, v] : cell.keys) {
        if (k == key) return v;
    }
    return "";
}

Outcome criterion1() {
    Outcome o{true, ""};
    for (const auto& [cell, report] : run_cells("table1", "r=100,N=50", 1000, {"H10"})) {
        const double rate = rate_of(cell, report, "H10");
        const bool power = cell.quantity == "power";
        const bool ok = power ? within(rate, 0.756, 0.04) : within(rate, 0.053, 0.03);
        o.pass = o.pass && ok;
        o.detail += (power ? "power " : "size ") + fmt("%.3f", rate) + (power ? " (0.756+-0.04) " : " (0.053+-0.03) ");
    }
    return o;
}

Outcome criterion2() {
    Outcome o{true, ""};
    const std::vector<std::pair<std::string, std::pair<double, double>>> targets{
        {"0", {0.944, 0.094}}, {"50", {0.943, 0.117}}, {"99", {0.949, 1.000}}};
    for (const auto& [zeros, expected] : targets) {
        for (const auto& [cell, report] : run_cells("table2", "N=50,zeros=" + zeros, 500, {"H10", "anova_fdr"})) {
            const double h = rate_of(cell, report, "H10");
            const double a = rate_of(cell, report, "anova_fdr");
            const bool ok = within(h, expected.first, 0.05) && within(a, expected.second, 0.05);
            o.pass = o.pass && ok;
            o.detail += zeros + "% zeros: H10 " + fmt("%.3f", h) + fmt(" (%.3f)", expected.first) + " ANOVA-FDR " +
                        fmt("%.3f", a) + fmt(" (%.3f); ", expected.second);
        }
    }
    return o;
}

Outcome criterion3() {
    const auto runs = run_cells("table3", "r=100,N=50,scenario=1", 1000);
    const double h = rate_of(runs[0].first, runs[0].second, "H10");
    const double cq = rate_of(runs[0].first, runs[0].second, "chen_qin");
    return {within(h, 0.057, 0.03) && cq >= 0.10,
            "H10 size " + fmt("%.3f", h) + " (0.057+-0.03), pairwise Chen-Qin " + fmt("%.3f", cq) + " (>= 0.10)"};
}

Outcome criterion4() {
    const auto runs = run_cells("table4", "N=50,r=100,c=10", 1000);
    const std::vector<std::pair<std::string, double>> targets{{"Hc", 0.058}, {"H0.7c_0.3c", 0.059}, {"H0.5c_0.2c_0.3c", 0.064}};
    Outcome o{true, ""};
    for (const auto& [name, target] : targets) {
        const double rate = rate_of(runs[0].first, runs[0].second, name);
        o.pass = o.pass && within(rate, target, 0.03);
        o.detail += name + " " + fmt("%.3f", rate) + fmt(" (%.3f) ", target);
    }
    return o;
}

Outcome criterion5() {
    const auto runs = run_cells("table5", "N=30,r=500,c=10,scenario=1", 500);
    const double rate = rate_of(runs[0].first, runs[0].second, "Hc");
    return {within(rate, 0.809, 0.05), "H10 power " + fmt("%.3f", rate) + " (0.809+-0.05)"};
}

Outcome criterion6() {
    const auto runs = run_cells("webtable2", "N=50,r=100", 500);
    Outcome o{true, ""};
    for (const std::string name : {"anova_fdr", "anova_bon", "kw_fdr", "kw_bon"}) {
        const double rate = rate_of(runs[0].first, runs[0].second, name);
        o.pass = o.pass && rate <= 0.01;
        o.detail += name + " " + fmt("%.3f ", rate);
    }
    o.detail += "(each <= 0.01)";
    return o;
}

Outcome criterion7() {
    Philox rng(kDefaultSeed, 7);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<Eigen::Index>(4 + trial % 5);
        const Matrix y = gaussian(n, 1 + trial % 9, rng);
        const GramMatrix gram(y * y.transpose());
        worst = std::max(worst, relative_gap(t_n_fast(gram), t_n_naive(gram)));
    }
    return {worst <= 1e-10, "max relative gap " + fmt("%.2e", worst) + " over 200 grams (<= 1e-10)"};
}

Outcome criterion8() {
    Philox rng(kDefaultSeed, 8);
    const GroupPartition part({1, 1, 1, 2, 2, 2});
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const DataStack stack = gaussian_stack(10, 20, 6, rng);
        const Matrix a = transmean::testing::random_orthogonal(20, rng);
        double scale = 0.0;
        while (std::abs(scale) < 0.05) scale = std::normal_distribution<double>(0.0, 2.0)(rng);
        const Matrix levels = gaussian(20, 2, rng);
        Matrix c(20, 6);
        for (int b = 0; b < 6; ++b) c.col(b) = levels.col(part.group_of(static_cast<std::size_t>(b)) - 1);
        std::vector<Matrix> moved;
        for (const Matrix& x : stack.subjects()) moved.push_back(scale * a * x + c);
        const double before = mean_matrix_test(stack, part).statistic;
        const double after = mean_matrix_test(DataStack(moved), part).statistic;
        worst = std::max(worst, relative_gap(before, after));
    }
    return {worst <= 1e-9, "max relative change of G* " + fmt("%.2e", worst) + " over 100 transformations (<= 1e-9)"};
}

Outcome criterion9() {
    Philox rng(kDefaultSeed, 9);
    const Matrix a = gaussian(20, 20, rng);
    const CovarianceSpec sigma = CovarianceSpec::dense(a * a.transpose() / 20.0 + 0.5 * Matrix::Identity(20, 20), 5, 4);
    const CovarianceRoot root = sqrt_factor(sigma);
    const Matrix mean = 0.3 * gaussian(5, 4, rng);
    const ProjectionMatrix p(GroupPartition({1, 1, 2, 2}));
    const Matrix omega = omega_matrix(sigma, p);
    const double target_g = deviation(mean, p);
    const double target_t = (omega * omega).trace();
    const int reps = 2000;
    double sg = 0, sg2 = 0, st = 0, st2 = 0;
    for (int rep = 0; rep < reps; ++rep) {
        std::vector<Matrix> xs;
        for (int i = 0; i < 6; ++i) {
            Matrix z = gaussian(5, 4, rng);
            root.apply(z);
            xs.push_back(z + mean);
        }
        const GramMatrix gram = compute_gram(DataStack(xs), p);
        const double g = g_statistic(gram), t = t_n_fast(gram);
        sg += g, sg2 += g * g, st += t, st2 += t * t;
    }
    const double mg = sg / reps, mt = st / reps;
    const double seg = std::sqrt((sg2 / reps - mg * mg) / (reps - 1));
    const double set = std::sqrt((st2 / reps - mt * mt) / (reps - 1));
    const double zg = (mg - target_g) / seg, zt = (mt - target_t) / set;
    return {std::abs(zg) <= 3.0 && std::abs(zt) <= 3.0,
            "G_N mean off by " + fmt("%.2f", zg) + " SE, T_N mean off by " + fmt("%.2f", zt) + " SE (|z| <= 3)"};
}

Outcome criterion10() {
    SimConfig config;
    config.n_subjects = 50;
    config.n_rows = 100;
    config.n_cols = 10;
    config.covariance = CovarianceSpec::identity(100, 10);
    const CovarianceRoot root = sqrt_factor(config.covariance);
    const Matrix zero = Matrix::Zero(100, 10);
    const GroupPartition part = GroupPartition::single_group(10);
    std::vector<double> stats;
    for (std::uint64_t k = 0; k < 2000; ++k) {
        Philox rng(kDefaultSeed + 10, k);
        stats.push_back(mean_matrix_test(gen_stack(config, root, zero, rng), part).statistic);
    }
    const double d = transmean::testing::ks_statistic_normal(stats);
    const double p = transmean::testing::kolmogorov_pvalue(d, stats.size());
    return {p > 0.01, "KS D = " + fmt("%.4f", d) + ", p = " + fmt("%.3f", p) + " (> 0.01)"};
}

Outcome criterion11() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("transmean_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    auto run = [&](unsigned threads, const std::string& file) {
        SimulateOptions o;
        o.preset = "table1";
        o.cell = "r=100,N=50";
        o.seed = kDefaultSeed;
        o.threads = threads;
        o.quiet = true;
        o.output = (dir / file).string();
        cmd_simulate(o);
        std::ifstream in(o.output);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string one = run(1, "one.csv");
    const std::string three = run(3, "three.csv");
    fs::remove_all(dir);
    return {!one.empty() && one == three,
            "threads 1 vs 3: " + std::to_string(one.size()) + " bytes, " + (one == three ? "identical" : "different")};
}

}  // namespace

// --expect-fail k,... names criteria known to miss their reference values.
// They still print FAIL; the exit status is 0 only when exactly those fail.
int main(int argc, char** argv) {
    std::set<std::size_t> expected;
    for (int k = 1; k + 1 < argc; ++k) {
        if (std::string(argv[k]) != "--expect-fail") continue;
        std::stringstream list(argv[k + 1]);
        std::string item;
        while (std::getline(list, item, ',')) expected.insert(std::stoul(item));
    }
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"table1 cell (power and size)", criterion1},
        {"table2 sparsity robustness", criterion2},
        {"table3 size contrast", criterion3},
        {"table4 Kronecker size", criterion4},
        {"table5 power cell", criterion5},
        {"webtable2 baseline collapse", criterion6},
        {"fast/naive trace oracle", criterion7},
        {"invariance suite", criterion8},
        {"unbiasedness suite", criterion9},
        {"null normality (KS)", criterion10},
        {"determinism across threads", criterion11},
    };
    std::set<std::size_t> failed;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) failed.insert(k + 1);
        std::printf("%s criterion %zu: %s | %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%zu of %zu criteria passed\n", criteria.size() - failed.size(), criteria.size());
    if (!expected.empty()) {
        std::printf("expected failures: %s\n", failed == expected ? "matched" : "NOT matched");
    }
    return failed == expected ? 0 : 1;
}
