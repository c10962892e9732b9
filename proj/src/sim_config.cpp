#include "transmean/sim_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "transmean/io.hpp"

namespace transmean {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw InvalidArgument(what + ": expected a number, got '" + s + "'");
}

std::uint64_t to_unsigned(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        if (!s.empty() && s[0] != '-') {
            const unsigned long long v = std::stoull(s, &used);
            if (used == s.size()) return v;
        }
    } catch (const std::exception&) {
    }
    throw InvalidArgument(what + ": expected a non-negative integer, got '" + s + "'");
}

// "name(a,b)" -> {"name", {"a", "b"}}; a bare "name" has no arguments.
std::pair<std::string, std::vector<std::string>> call(const std::string& text, char sep = ',') {
    const std::string t = trim(text);
    const auto open = t.find('(');
    if (open == std::string::npos) return {t, {}};
    if (t.back() != ')') throw InvalidArgument("unbalanced parentheses in '" + t + "'");
    const std::string inner = t.substr(open + 1, t.size() - open - 2);
    return {trim(t.substr(0, open)), inner.empty() ? std::vector<std::string>{} : split_on(inner, sep)};
}

FactorSpec parse_factor(const std::string& text, std::size_t dim) {
    const auto [name, args] = call(text);
    if (name == "identity" && args.empty()) return FactorSpec::identity(dim);
    if (name == "ar1" && args.size() == 1) return FactorSpec::ar1(dim, to_double(args[0], "ar1"));
    if (name == "compound" && args.size() == 1) return FactorSpec::compound(dim, to_double(args[0], "compound"));
    throw InvalidArgument("unknown covariance factor '" + text + "' (expected identity, ar1(rho), compound(rho))");
}

MeanSpec::Calibration parse_calibration(const std::string& s) {
    if (s == "identity") return MeanSpec::Calibration::identity;
    if (s == "sigma") return MeanSpec::Calibration::sigma;
    throw InvalidArgument("calibration must be identity or sigma, got '" + s + "'");
}

std::vector<int> parse_sizes(const std::string& text) {
    std::vector<int> sizes;
    for (const auto& item : split_on(text, ',')) {
        if (item.empty()) continue;
        sizes.push_back(static_cast<int>(to_unsigned(item, "baseline_sizes")));
    }
    return sizes;
}

}  // namespace

CovarianceSpec parse_covariance(const std::string& text, std::size_t rows, std::size_t cols) {
    const auto [name, args] = call(text, trim(text).rfind("kronecker", 0) == 0 ? ';' : ',');
    if (name == "identity" && args.empty()) return CovarianceSpec::identity(rows, cols);
    if (name == "kronecker" && args.size() == 2) {
        return CovarianceSpec::kronecker(parse_factor(args[0], cols), parse_factor(args[1], rows));
    }
    if (name == "exchangeable" && args.size() == 1) {
        return CovarianceSpec::exchangeable(rows, cols, to_double(args[0], "exchangeable"));
    }
    if (name == "block_ar1" && !args.empty()) {
        std::vector<FactorSpec> blocks;
        for (const auto& item : args) {
            const auto star = item.find('*');
            const double rho = to_double(trim(item.substr(0, star)), "block_ar1");
            const std::uint64_t count = star == std::string::npos ? 1 : to_unsigned(trim(item.substr(star + 1)), "block_ar1");
            for (std::uint64_t k = 0; k < count; ++k) blocks.push_back(FactorSpec::ar1(rows, rho));
        }
        if (blocks.size() != cols) {
            throw InvalidArgument("block_ar1 lists " + std::to_string(blocks.size()) + " blocks but c = " +
                                  std::to_string(cols));
        }
        return CovarianceSpec::block_diagonal(std::move(blocks), rows, cols);
    }
    throw InvalidArgument("unknown covariance '" + text +
                          "' (expected identity, kronecker(COL;ROW), block_ar1(rho*count,...), exchangeable(rho))");
}

MeanSpec parse_mean(const std::string& text) {
    const auto [name, args] = call(text);
    if (name == "zero" && args.empty()) return MeanSpec::zero();
    if (name == "right_block" && (args.size() == 2 || args.size() == 3)) {
        return MeanSpec::right_block(to_unsigned(args[0], "right_block width"), to_double(args[1], "right_block target"),
                                     args.size() == 3 ? parse_calibration(args[2]) : MeanSpec::Calibration::identity);
    }
    if (name == "sparse" && args.size() >= 3 && args.size() <= 5) {
        MeanSpec::Allocation alloc;
        if (args[1] == "equal") {
            alloc = MeanSpec::Allocation::equal;
        } else if (args[1] == "linear") {
            alloc = MeanSpec::Allocation::linear;
        } else {
            throw InvalidArgument("sparse allocation must be equal or linear, got '" + args[1] + "'");
        }
        return MeanSpec::sparse(to_double(args[0], "sparse proportion"), alloc, to_double(args[2], "sparse target"),
                                args.size() >= 4 ? to_unsigned(args[3], "sparse width") : 1,
                                args.size() == 5 ? parse_calibration(args[4]) : MeanSpec::Calibration::identity);
    }
    if (name == "multiplicative" && (args.size() == 1 || args.size() == 2)) {
        return MeanSpec::multiplicative(to_double(args[0], "multiplicative t"),
                                        args.size() == 2 ? to_double(args[1], "multiplicative fraction") : 0.1);
    }
    throw InvalidArgument("unknown mean '" + text + "'");
}

SimConfig parse_sim_config(std::istream& in, const std::string& source) {
    std::map<std::string, std::pair<std::string, int>> values;
    static const std::set<std::string> known{"N",     "r",          "c",    "scenario", "covariance", "mean",
                                             "alpha", "replicates", "seed", "methods",  "threads",    "baseline_sizes"};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string body = trim(line.substr(0, line.find('#')));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ParseError(source + ":" + std::to_string(number) + ": expected key=value");
        }
        const std::string key = trim(body.substr(0, eq));
        if (!known.count(key)) throw ParseError(source + ":" + std::to_string(number) + ": unknown key '" + key + "'");
        if (values.count(key)) throw ParseError(source + ":" + std::to_string(number) + ": duplicate key '" + key + "'");
        values[key] = {trim(body.substr(eq + 1)), number};
    }

    SimConfig config;
    auto with = [&](const std::string& key, auto&& apply) {
        const auto it = values.find(key);
        if (it == values.end()) return;
        try {
            apply(it->second.first);
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(source + ":" + std::to_string(it->second.second) + ": " + e.what());
        }
    };
    with("N", [&](const std::string& v) { config.n_subjects = to_unsigned(v, "N"); });
    with("r", [&](const std::string& v) { config.n_rows = to_unsigned(v, "r"); });
    with("c", [&](const std::string& v) { config.n_cols = to_unsigned(v, "c"); });
    config.covariance = CovarianceSpec::identity(config.n_rows, config.n_cols);
    with("scenario", [&](const std::string& v) { config.scenario = parse_scenario(v); });
    with("covariance", [&](const std::string& v) { config.covariance = parse_covariance(v, config.n_rows, config.n_cols); });
    with("mean", [&](const std::string& v) { config.mean = parse_mean(v); });
    with("alpha", [&](const std::string& v) { config.alpha = to_double(v, "alpha"); });
    with("replicates", [&](const std::string& v) { config.replicates = to_unsigned(v, "replicates"); });
    with("seed", [&](const std::string& v) { config.seed = to_unsigned(v, "seed"); });
    with("threads", [&](const std::string& v) { config.threads = static_cast<unsigned>(to_unsigned(v, "threads")); });
    with("baseline_sizes", [&](const std::string& v) { config.baseline_sizes = parse_sizes(v); });
    with("methods", [&](const std::string& v) {
        config.methods.clear();
        for (const auto& item : split_on(v, ',')) {
            if (!item.empty()) config.methods.push_back(Method::parse(item));
        }
    });
    try {
        config.validate();
    } catch (const std::exception& e) {
        throw ParseError(source + ": " + e.what());
    }
    return config;
}

SimConfig read_sim_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
    return parse_sim_config(in, path);
}

}  // namespace transmean
