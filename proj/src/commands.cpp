#include "transmean/commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "transmean/normal.hpp"
#include "transmean/sim_config.hpp"

namespace transmean {

namespace {

Json header(const std::string& command, const std::vector<std::string>& argv) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    j["argv"] = argv;
    return j;
}

Json nullable(double v, bool ok) {
    return ok ? Json(v) : Json(nullptr);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    out << text;
    if (!out) throw InvalidArgument("error writing '" + path + "'");
}

std::string result_csv(const TestResult& r) {
    std::ostringstream out;
    out << "statistic,p_value,g_n,t_n,alpha,reject,status,n_used,r_used,c_used,orientation\n";
    out << (r.ok() ? format_double(r.statistic) : "") << ',' << (r.ok() ? format_double(r.p_value) : "") << ','
        << format_double(r.g_n) << ',' << format_double(r.t_n) << ',' << format_double(r.alpha) << ','
        << (r.reject ? "true" : "false") << ',' << to_string(r.status) << ',' << r.n_used << ',' << r.r_used << ','
        << r.c_used << ',' << to_string(r.orientation) << '\n';
    return out.str();
}

Json partition_json(const GroupPartition& p, const std::vector<std::string>& labels) {
    Json groups = Json::array();
    for (std::size_t k = 1; k <= p.n_groups(); ++k) {
        Json members = Json::array();
        for (std::size_t b = 0; b < p.n_columns(); ++b) {
            if (static_cast<std::size_t>(p.assignment()[b]) == k) members.push_back(labels[b]);
        }
        groups.push_back(members);
    }
    return {{"assignment", p.assignment()}, {"groups", groups}};
}

std::size_t label_index(const std::vector<std::string>& labels, const std::string& label, const char* what) {
    const int idx = find_label(labels, label);
    if (idx < 0) throw InvalidArgument(std::string("unknown ") + what + " '" + label + "'");
    return static_cast<std::size_t>(idx);
}

int exit_for(const TestResult& r) {
    return r.ok() ? kExitOk : kExitDegenerate;
}

// Disjoint-set forest over column indices.
struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

Json result_json(const TestResult& r, const std::vector<std::string>& labels) {
    Json dropped = Json::array();
    for (std::size_t idx : r.dropped) dropped.push_back(idx < labels.size() ? labels[idx] : std::to_string(idx + 1));
    return {{"statistic", nullable(r.statistic, r.ok())},
            {"p_value", nullable(r.p_value, r.ok())},
            {"g_n", r.g_n},
            {"t_n", r.t_n},
            {"alpha", r.alpha},
            {"z_alpha", normal_upper_quantile(r.alpha)},
            {"reject", r.reject},
            {"status", to_string(r.status)},
            {"diagnostic", r.diagnostic},
            {"n_used", r.n_used},
            {"r_used", r.r_used},
            {"c_used", r.c_used},
            {"orientation", to_string(r.orientation)},
            {"dropped", dropped}};
}

Json data_json(const LoadedData& data, const std::string& path) {
    return {{"path", path},
            {"format", data.format},
            {"n_subjects", data.stack.n_subjects()},
            {"n_rows", data.stack.n_rows()},
            {"n_cols", data.stack.n_cols()},
            {"subject_ids", data.subject_ids},
            {"row_ids", data.row_ids},
            {"col_ids", data.col_ids}};
}

CommandOutput cmd_test(const TestOptions& o, const std::vector<std::string>& argv) {
    const int modes = (o.partition ? 1 : 0) + (o.m0 ? 1 : 0) + (o.diff_cols ? 1 : 0);
    if (modes != 1) throw UsageError("test: select exactly one of --partition, --m0, --diff-cols");
    if (o.mu0 && !o.diff_cols) throw UsageError("test: --mu0 requires --diff-cols");

    const LoadedData raw = read_data_file(o.data);
    const bool rows = o.orientation == Orientation::rows;
    const LoadedData data = rows ? transpose(raw) : raw;
    const auto& labels = data.col_ids;

    CommandOutput out{header("test", argv)};
    out.report["data"] = data_json(raw, o.data);
    Json warnings = Json::array();
    Json hypothesis;
    TestResult result;

    if (o.partition) {
        const GroupPartition partition = parse_partition(*o.partition, labels);
        hypothesis = {{"mode", "partition"}, {"spec", *o.partition}, {"partition", partition_json(partition, labels)}};
        result = mean_matrix_test(data.stack, partition, o.alpha);
        if (!result.dropped.empty()) {
            warnings.push_back(std::to_string(result.dropped.size()) + " singleton group(s) dropped before testing");
        }
    } else if (o.m0) {
        Matrix m0 = read_matrix_file(*o.m0);
        if (rows) m0.transposeInPlace();
        hypothesis = {{"mode", "known_matrix"}, {"m0", *o.m0}};
        result = test_known_matrix(data.stack, m0, o.alpha);
    } else {
        const auto comma = o.diff_cols->find(',');
        if (comma == std::string::npos) throw InvalidArgument("test: --diff-cols expects A,B");
        const std::string a = o.diff_cols->substr(0, comma), b = o.diff_cols->substr(comma + 1);
        const std::size_t ia = label_index(labels, a, rows ? "row" : "column");
        const std::size_t ib = label_index(labels, b, rows ? "row" : "column");
        Vector mu0 = Vector::Zero(static_cast<Eigen::Index>(data.stack.n_rows()));
        if (o.mu0) {
            mu0 = read_vector_file(*o.mu0);
        } else {
            warnings.push_back("no --mu0 given; testing equal means");
        }
        hypothesis = {{"mode", "known_difference"}, {"col_a", a}, {"col_b", b}, {"mu0", o.mu0 ? Json(*o.mu0) : Json(nullptr)}};
        result = test_known_difference(data.stack, mu0, ia, ib, o.alpha);
    }
    result.orientation = o.orientation;
    hypothesis["orientation"] = to_string(o.orientation);
    out.report["hypothesis"] = hypothesis;
    out.report["result"] = result_json(result, labels);
    if (!result.ok()) warnings.push_back(result.diagnostic);
    out.report["warnings"] = warnings;
    if (o.csv) write_text(*o.csv, result_csv(result));
    out.exit_code = exit_for(result);
    return out;
}

CommandOutput cmd_screen(const ScreenOptions& o, const std::vector<std::string>& argv) {
    const LoadedData data = read_data_file(o.data);
    const auto sets = read_row_sets_file(o.sets);
    const GroupPartition partition = parse_partition(o.partition, data.col_ids);
    if (o.correction == Adjustment::raw) throw InvalidArgument("screen: correction must be fdr or bonferroni");

    CommandOutput out{header("screen", argv)};
    out.report["data"] = data_json(data, o.data);
    out.report["partition"] = partition_json(partition, data.col_ids);
    Json warnings = Json::array();
    Json skipped = Json::array();

    struct Tested {
        const RowSet* set;
        std::size_t size;
        TestResult result;
    };
    std::vector<Tested> tested;
    for (const auto& set : sets) {
        std::vector<std::size_t> rows;
        for (const auto& id : set.row_ids) {
            const int idx = find_label(data.row_ids, id);
            if (idx < 0) {
                throw InvalidArgument(o.sets + ":" + std::to_string(set.line) + ": set '" + set.name +
                                      "' names unknown row '" + id + "'");
            }
            if (std::find(rows.begin(), rows.end(), static_cast<std::size_t>(idx)) == rows.end()) {
                rows.push_back(static_cast<std::size_t>(idx));
            }
        }
        if (rows.size() != set.row_ids.size()) {
            warnings.push_back("set '" + set.name + "' lists a row more than once; duplicates ignored");
        }
        if (rows.size() < o.min_size) {
            skipped.push_back({{"name", set.name},
                               {"size", rows.size()},
                               {"reason", "fewer than " + std::to_string(o.min_size) + " rows"}});
            continue;
        }
        tested.push_back({&set, rows.size(), mean_matrix_test(data.stack.select_rows(rows), partition, o.alpha)});
    }
    if (tested.empty()) throw InvalidArgument("screen: every set is below the minimum size of " + std::to_string(o.min_size));

    std::vector<double> raw;
    for (const auto& t : tested) raw.push_back(t.result.ok() ? t.result.p_value : 1.0);
    const auto adjusted = adjust_pvalues(raw, o.correction);

    Json results = Json::array();
    std::size_t rejected = 0;
    std::ostringstream csv;
    csv << "set,size,statistic,p_value,adjusted_p,reject,status\n";
    for (std::size_t k = 0; k < tested.size(); ++k) {
        const auto& t = tested[k];
        const bool reject = adjusted[k] < o.alpha;
        rejected += reject;
        if (!t.result.ok()) warnings.push_back("set '" + t.set->name + "': " + t.result.diagnostic + " (p taken as 1)");
        results.push_back({{"name", t.set->name},
                           {"size", t.size},
                           {"result", result_json(t.result, data.col_ids)},
                           {"adjusted_p", adjusted[k]},
                           {"reject", reject}});
        csv << t.set->name << ',' << t.size << ',' << (t.result.ok() ? format_double(t.result.statistic) : "") << ','
            << format_double(raw[k]) << ',' << format_double(adjusted[k]) << ',' << (reject ? "true" : "false") << ','
            << to_string(t.result.status) << '\n';
    }
    out.report["alpha"] = o.alpha;
    out.report["correction"] = to_string(o.correction);
    out.report["min_size"] = o.min_size;
    out.report["sets"] = results;
    out.report["skipped"] = skipped;
    out.report["n_tested"] = tested.size();
    out.report["n_rejected"] = rejected;
    out.report["warnings"] = warnings;
    if (o.csv) write_text(*o.csv, csv.str());
    return out;
}

namespace {

Json rates_json(const RejectionReport& report, const std::vector<std::string>& names) {
    Json methods = Json::array();
    for (std::size_t m = 0; m < report.methods.size(); ++m) {
        const auto& rate = report.methods[m];
        methods.push_back({{"label", rate.label},
                           {"name", m < names.size() ? names[m] : rate.label},
                           {"rate", rate.rate},
                           {"se", rate.standard_error},
                           {"rejections", rate.rejections},
                           {"valid", rate.valid},
                           {"errors", rate.errors}});
    }
    return methods;
}

Json config_json(const SimConfig& c) {
    Json methods = Json::array();
    for (const auto& m : c.methods) methods.push_back(m.label(c.n_cols));
    return {{"N", c.n_subjects},
            {"r", c.n_rows},
            {"c", c.n_cols},
            {"scenario", to_string(c.scenario)},
            {"covariance", c.covariance.describe()},
            {"mean", c.mean.describe()},
            {"alpha", c.alpha},
            {"replicates", c.replicates},
            {"seed", c.seed},
            {"methods", methods}};
}

}  // namespace

CommandOutput cmd_simulate(const SimulateOptions& o, const std::vector<std::string>& argv) {
    if (o.preset.has_value() == o.config.has_value()) throw UsageError("simulate: give exactly one of --preset, --config");
    if (o.cell && !o.preset) throw UsageError("simulate: --cell applies to presets only");
    if (o.output.empty()) throw UsageError("simulate: --output is required");
    const auto start = std::chrono::steady_clock::now();

    CommandOutput out{header("simulate", argv)};
    std::string csv;
    Json cells = Json::array();
    if (o.preset) {
        Preset preset = make_preset(*o.preset, o.replicates.value_or(1000), o.seed.value_or(kDefaultSeed));
        if (o.cell) filter_cells(preset, *o.cell);
        std::vector<RejectionReport> reports;
        for (std::size_t k = 0; k < preset.cells.size(); ++k) {
            PresetCell& cell = preset.cells[k];
            cell.config.threads = o.threads;
            reports.push_back(monte_carlo(cell.config));
            Json keys = Json::object();
            for (const auto& [key, value] : cell.keys) keys[key] = value;
            if (!o.quiet) {
                std::cerr << "[" << k + 1 << "/" << preset.cells.size() << "] " << keys.dump() << " " << cell.quantity
                          << " " << reports.back().elapsed_seconds << "s\n";
            }
            cells.push_back({{"index", cell.index},
                             {"keys", keys},
                             {"quantity", cell.quantity},
                             {"config", config_json(cell.config)},
                             {"methods", rates_json(reports.back(), cell.names)}});
        }
        csv = preset_csv(preset, reports);
        out.report["preset"] = preset.name;
        out.report["description"] = preset.description;
    } else {
        SimConfig config = read_sim_config_file(*o.config);
        if (o.replicates) config.replicates = *o.replicates;
        if (o.seed) config.seed = *o.seed;
        config.threads = o.threads;
        const RejectionReport report = monte_carlo(config);
        csv = report_csv(report);
        out.report["config_file"] = *o.config;
        cells.push_back({{"index", 0},
                         {"keys", Json::object()},
                         {"quantity", config.mean.is_null() ? "size" : "power"},
                         {"config", config_json(config)},
                         {"methods", rates_json(report, {})}});
    }
    write_text(o.output, csv);
    out.report["cells"] = cells;
    out.report["output"] = o.output;
    out.report["elapsed_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.report["warnings"] = Json::array();
    return out;
}

CommandOutput cmd_discover(const DiscoverOptions& o, const std::vector<std::string>& argv) {
    const LoadedData raw = read_data_file(o.data);
    const LoadedData data = o.orientation == Orientation::rows ? transpose(raw) : raw;
    const auto& labels = data.col_ids;
    const std::size_t c = data.stack.n_cols();
    if (c < 2) throw InvalidArgument("discover: needs at least 2 columns");

    CommandOutput out{header("discover", argv)};
    out.report["data"] = data_json(raw, o.data);
    out.report["alpha"] = o.alpha;
    out.report["orientation"] = to_string(o.orientation);
    Json warnings = Json::array();
    Json trace;

    // (a) no column effect at all
    TestResult step_a = mean_matrix_test(data.stack, GroupPartition::single_group(c), o.alpha);
    step_a.orientation = o.orientation;
    trace["step_a"] = result_json(step_a, labels);
    auto finish = [&](const std::string& conclusion, int code) {
        trace["conclusion"] = conclusion;
        out.report["trace"] = trace;
        out.report["conclusion"] = conclusion;
        out.report["warnings"] = warnings;
        out.exit_code = code;
        return out;
    };
    if (!step_a.ok()) {
        warnings.push_back(step_a.diagnostic);
        return finish("degenerate", kExitDegenerate);
    }
    if (!step_a.reject) return finish("column-independent mean", kExitOk);

    // (b) every pair of columns
    struct Pair {
        std::size_t a, b;
        TestResult result;
    };
    std::vector<Pair> pairs;
    std::vector<double> raw_p;
    for (std::size_t a = 0; a < c; ++a) {
        for (std::size_t b = a + 1; b < c; ++b) {
            std::vector<int> assignment(c);
            int next = 2;
            for (std::size_t k = 0; k < c; ++k) assignment[k] = (k == a || k == b) ? 1 : next++;
            TestResult r = mean_matrix_test(data.stack, GroupPartition(assignment), o.alpha);
            if (!r.ok()) {
                warnings.push_back("pair (" + labels[a] + ", " + labels[b] + "): " + r.diagnostic + " (p taken as 1)");
            }
            raw_p.push_back(r.ok() ? r.p_value : 1.0);
            pairs.push_back({a, b, std::move(r)});
        }
    }
    const auto fdr = adjust_pvalues(raw_p, Adjustment::fdr);
    const auto bon = adjust_pvalues(raw_p, Adjustment::bonferroni);
    Json pair_json = Json::array();
    std::vector<std::vector<Json>> matrix(c, std::vector<Json>(c, Json(nullptr)));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& p = pairs[k];
        pair_json.push_back({{"col_a", labels[p.a]},
                             {"col_b", labels[p.b]},
                             {"statistic", nullable(p.result.statistic, p.result.ok())},
                             {"p_value", raw_p[k]},
                             {"fdr", fdr[k]},
                             {"bonferroni", bon[k]},
                             {"status", to_string(p.result.status)}});
        matrix[p.a][p.b] = matrix[p.b][p.a] = fdr[k];
    }
    trace["pairs"] = pair_json;
    trace["fdr_matrix"] = matrix;

    // (c) merge pairs that are not significantly different
    UnionFind forest(c);
    bool all_different = true;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (fdr[k] >= o.alpha) {
            all_different = false;
            forest.unite(pairs[k].a, pairs[k].b);
        }
    }
    if (all_different) return finish("unstructured", kExitOk);

    std::vector<int> assignment(c);
    std::vector<std::size_t> roots;
    for (std::size_t k = 0; k < c; ++k) {
        const std::size_t root = forest.find(k);
        auto it = std::find(roots.begin(), roots.end(), root);
        if (it == roots.end()) {
            roots.push_back(root);
            it = roots.end() - 1;
        }
        assignment[k] = static_cast<int>(it - roots.begin()) + 1;
    }
    const GroupPartition grouping(assignment);
    trace["grouping"] = partition_json(grouping, labels);
    TestResult final_test = mean_matrix_test(data.stack, grouping, o.alpha);
    final_test.orientation = o.orientation;
    trace["final"] = result_json(final_test, labels);
    if (!final_test.ok()) {
        warnings.push_back("final test: " + final_test.diagnostic);
        return finish("grouped", kExitDegenerate);
    }
    return finish("grouped", kExitOk);
}

CommandOutput cmd_convert(const ConvertOptions& o, const std::vector<std::string>& argv) {
    const LoadedData data = read_data_file(o.data);
    std::ostringstream text;
    if (o.to == "stack") {
        write_stack(text, data.stack);
    } else if (o.to == "long") {
        write_long(text, data);
    } else {
        throw InvalidArgument("convert: --to must be stack or long");
    }
    write_text(o.output, text.str());
    CommandOutput out{header("convert", argv)};
    out.report["data"] = data_json(data, o.data);
    out.report["to"] = o.to;
    out.report["output"] = o.output;
    out.report["warnings"] = Json::array();
    return out;
}

}  // namespace transmean
