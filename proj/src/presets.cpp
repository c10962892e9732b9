#include <algorithm>
#include <map>
#include <sstream>

#include "transmean/io.hpp"
#include "transmean/sim_config.hpp"

namespace transmean {

namespace {

using Keys = std::vector<std::pair<std::string, std::string>>;

std::uint64_t cell_seed(std::uint64_t seed, std::size_t index) {
    return seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
}

CovarianceSpec kronecker_design(std::size_t r, std::size_t c) {
    return CovarianceSpec::kronecker(FactorSpec::compound(c, 0.5), FactorSpec::ar1(r, 0.85));
}

// c blocks of r x r AR(1): rho = 0.5 in the first c/2 blocks, 0.4 elsewhere
CovarianceSpec block_ar_design(std::size_t r, std::size_t c) {
    std::vector<FactorSpec> blocks;
    for (std::size_t b = 0; b < c; ++b) blocks.push_back(FactorSpec::ar1(r, b < c / 2 ? 0.5 : 0.4));
    return CovarianceSpec::block_diagonal(std::move(blocks), r, c);
}

Method proposed(std::vector<int> sizes) {
    return {Method::Kind::proposed, std::move(sizes)};
}

std::vector<Method> baselines() {
    return {Method::parse("anova_fdr"), Method::parse("anova_bon"), Method::parse("kw_fdr"), Method::parse("kw_bon")};
}

int part(double fraction, std::size_t c) {
    return static_cast<int>(fraction * static_cast<double>(c) + 1e-9);
}

struct Builder {
    Preset preset;
    std::size_t replicates;
    std::uint64_t seed;

    void add(Keys keys, std::vector<std::string> row, std::string prefix, std::string quantity,
             std::vector<std::string> names, SimConfig config) {
        config.replicates = replicates;
        config.seed = cell_seed(seed, preset.cells.size());
        PresetCell cell;
        cell.index = preset.cells.size();
        cell.keys = std::move(keys);
        cell.row = std::move(row);
        cell.prefix = std::move(prefix);
        cell.quantity = std::move(quantity);
        cell.names = std::move(names);
        cell.config = std::move(config);
        preset.cells.push_back(std::move(cell));
    }
};

SimConfig base(std::size_t n, std::size_t r, std::size_t c, NoiseScenario scenario, CovarianceSpec sigma) {
    SimConfig config;
    config.n_subjects = n;
    config.n_rows = r;
    config.n_cols = c;
    config.scenario = scenario;
    config.covariance = std::move(sigma);
    return config;
}

std::vector<std::string> labels_of(const std::vector<Method>& methods, std::size_t c) {
    std::vector<std::string> out;
    for (const auto& m : methods) out.push_back(m.label(c));
    return out;
}

void table1(Builder& b) {
    b.preset.description = "H10 vs row-wise ANOVA/Kruskal-Wallis, Scenario 3, Sigma = I, c = 10";
    b.preset.row_keys = {"r", "N"};
    std::vector<Method> methods{proposed({10})};
    for (const auto& m : baselines()) methods.push_back(m);
    const auto names = labels_of(methods, 10);
    for (std::size_t r : {100, 500}) {
        for (std::size_t n : {10, 30, 50, 100}) {
            const Keys keys{{"r", std::to_string(r)}, {"N", std::to_string(n)}};
            SimConfig config = base(n, r, 10, NoiseScenario::mixture, CovarianceSpec::identity(r, 10));
            config.methods = methods;
            config.mean = MeanSpec::right_block(3, 0.1);
            b.add(keys, {std::to_string(r), std::to_string(n)}, "", "power", names, config);
            config.mean = MeanSpec::zero();
            b.add(keys, {std::to_string(r), std::to_string(n)}, "", "size", names, config);
        }
    }
}

void table2(Builder& b) {
    b.preset.description = "sparse linear-allocation mean, r = 1000, Scenario 3, Sigma = I, target 0.1";
    b.preset.row_keys = {"N", "zeros"};
    std::vector<Method> methods{proposed({10})};
    for (const auto& m : baselines()) methods.push_back(m);
    const auto names = labels_of(methods, 10);
    for (std::size_t n : {10, 30, 50, 100}) {
        for (int zeros : {99, 95, 75, 50, 25, 0}) {
            SimConfig config = base(n, 1000, 10, NoiseScenario::mixture, CovarianceSpec::identity(1000, 10));
            config.methods = methods;
            config.mean = MeanSpec::sparse(zeros / 100.0, MeanSpec::Allocation::linear, 0.1);
            b.add({{"N", std::to_string(n)}, {"zeros", std::to_string(zeros)}, {"r", "1000"}},
                  {std::to_string(n), std::to_string(zeros)}, "", "power", names, config);
        }
    }
}

void table3(Builder& b) {
    b.preset.description = "size of H10 and pairwise Chen-Qin (Bonferroni), block-diagonal AR(1) Sigma, c = 10";
    b.preset.row_keys = {"r", "N"};
    const std::vector<Method> methods{proposed({10}), Method::parse("cq_bon")};
    for (std::size_t r : {100, 500, 1000}) {
        for (std::size_t n : {10, 20, 30, 50}) {
            for (int s = 1; s <= 3; ++s) {
                SimConfig config = base(n, r, 10, parse_scenario(std::to_string(s)), block_ar_design(r, 10));
                config.methods = methods;
                b.add({{"r", std::to_string(r)}, {"N", std::to_string(n)}, {"scenario", std::to_string(s)}},
                      {std::to_string(r), std::to_string(n)}, "s" + std::to_string(s) + "_", "size",
                      {"H10", "chen_qin"}, config);
            }
        }
    }
}

void table4(Builder& b) {
    b.preset.description = "size of three groupings under Kronecker Sigma, Scenario 3";
    b.preset.row_keys = {"N", "r"};
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    for (std::size_t r : {100, 500, 1000}) {
        for (std::size_t c : {10, 100}) shapes.emplace_back(r, c);
    }
    for (std::size_t n : {10, 30, 50, 100}) {
        std::vector<std::pair<std::size_t, std::size_t>> all = shapes;
        for (std::size_t c : {100, 500}) all.emplace_back(10, c);
        for (const auto& [r, c] : all) {
            SimConfig config = base(n, r, c, NoiseScenario::mixture, kronecker_design(r, c));
            const int c7 = part(0.7, c), c5 = part(0.5, c), c2 = part(0.2, c);
            config.methods = {proposed({static_cast<int>(c)}), proposed({c7, static_cast<int>(c) - c7}),
                              proposed({c5, c2, static_cast<int>(c) - c5 - c2})};
            b.add({{"N", std::to_string(n)}, {"r", std::to_string(r)}, {"c", std::to_string(c)}},
                  {std::to_string(n), std::to_string(r)}, "c" + std::to_string(c) + "_", "size",
                  {"Hc", "H0.7c_0.3c", "H0.5c_0.2c_0.3c"}, config);
        }
    }
}

void table5(Builder& b) {
    b.preset.description = "power of Hc, multiplicative mean t = 1.15, Kronecker Sigma";
    b.preset.row_keys = {"N", "r"};
    for (std::size_t n : {10, 30, 50}) {
        for (std::size_t r : {100, 500, 1000}) {
            for (int s = 1; s <= 3; ++s) {
                for (std::size_t c : {10, 100}) {
                    SimConfig config = base(n, r, c, parse_scenario(std::to_string(s)), kronecker_design(r, c));
                    config.mean = MeanSpec::multiplicative(1.15);
                    config.methods = {proposed({static_cast<int>(c)})};
                    b.add({{"N", std::to_string(n)},
                           {"r", std::to_string(r)},
                           {"c", std::to_string(c)},
                           {"scenario", std::to_string(s)}},
                          {std::to_string(n), std::to_string(r)},
                          "s" + std::to_string(s) + "_c" + std::to_string(c) + "_", "power", {"Hc"}, config);
                }
            }
        }
    }
}

void webtable2(Builder& b) {
    b.preset.description = "size of row-wise ANOVA/Kruskal-Wallis under Kronecker Sigma, Scenario 3, c = 10";
    b.preset.row_keys = {"N", "r"};
    const auto methods = baselines();
    const auto names = labels_of(methods, 10);
    for (std::size_t n : {10, 30, 50, 100}) {
        for (std::size_t r : {100, 500}) {
            SimConfig config = base(n, r, 10, NoiseScenario::mixture, kronecker_design(r, 10));
            config.methods = methods;
            b.add({{"N", std::to_string(n)}, {"r", std::to_string(r)}}, {std::to_string(n), std::to_string(r)}, "",
                  "size", names, config);
        }
    }
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"table1", "table2", "table3", "table4", "table5", "webtable2"};
}

Preset make_preset(const std::string& name, std::size_t replicates, std::uint64_t seed) {
    Builder b{{}, replicates, seed};
    b.preset.name = name;
    if (name == "table1") {
        table1(b);
    } else if (name == "table2") {
        table2(b);
    } else if (name == "table3") {
        table3(b);
    } else if (name == "table4") {
        table4(b);
    } else if (name == "table5") {
        table5(b);
    } else if (name == "webtable2") {
        webtable2(b);
    } else {
        throw InvalidArgument("unknown preset '" + name + "' (expected table1..table5 or webtable2)");
    }
    return b.preset;
}

void filter_cells(Preset& preset, const std::string& filter) {
    std::vector<std::pair<std::string, std::string>> wanted;
    std::stringstream ss(filter);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw InvalidArgument("cell filter: expected key=value, got '" + item + "'");
        wanted.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    for (const auto& [key, value] : wanted) {
        const bool known = std::any_of(preset.cells.begin(), preset.cells.end(), [&](const PresetCell& cell) {
            return std::any_of(cell.keys.begin(), cell.keys.end(), [&](const auto& kv) { return kv.first == key; });
        });
        if (!known) throw InvalidArgument("cell filter: preset " + preset.name + " has no key '" + key + "'");
    }
    std::erase_if(preset.cells, [&](const PresetCell& cell) {
        for (const auto& [key, value] : wanted) {
            const auto it = std::find_if(cell.keys.begin(), cell.keys.end(), [&](const auto& kv) { return kv.first == key; });
            if (it == cell.keys.end() || it->second != value) return true;
        }
        return false;
    });
    if (preset.cells.empty()) throw InvalidArgument("cell filter '" + filter + "' matches no cell of " + preset.name);
}

std::string preset_csv(const Preset& preset, const std::vector<RejectionReport>& reports) {
    if (reports.size() != preset.cells.size()) throw InvalidArgument("preset_csv: one report per cell is required");
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::map<std::vector<std::string>, std::map<std::string, std::string>> values;
    for (std::size_t k = 0; k < preset.cells.size(); ++k) {
        const PresetCell& cell = preset.cells[k];
        if (!values.count(cell.row)) rows.push_back(cell.row);
        auto& line = values[cell.row];
        for (std::size_t m = 0; m < cell.names.size(); ++m) {
            const std::string column = cell.prefix + cell.names[m] + "_" + cell.quantity;
            if (std::find(columns.begin(), columns.end(), column) == columns.end()) columns.push_back(column);
            const MethodRate& rate = reports[k].methods.at(m);
            line[column] = format_double(rate.rate);
            line[column + "_se"] = format_double(rate.standard_error);
        }
    }
    std::ostringstream out;
    for (std::size_t i = 0; i < preset.row_keys.size(); ++i) out << (i ? "," : "") << preset.row_keys[i];
    for (const auto& column : columns) out << ',' << column << ',' << column << "_se";
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        const auto& line = values[row];
        for (const auto& column : columns) {
            const auto v = line.find(column);
            const auto se = line.find(column + "_se");
            out << ',' << (v == line.end() ? "" : v->second) << ',' << (se == line.end() ? "" : se->second);
        }
        out << '\n';
    }
    return out.str();
}

std::string report_csv(const RejectionReport& report) {
    std::ostringstream out;
    out << "method,rejections,valid,errors,rate,se\n";
    for (const auto& m : report.methods) {
        out << m.label << ',' << m.rejections << ',' << m.valid << ',' << m.errors << ',' << format_double(m.rate) << ','
            << format_double(m.standard_error) << '\n';
    }
    return out.str();
}

}  // namespace transmean
