#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "transmean/baselines.hpp"
#include "transmean/commands.hpp"
#include "transmean/engine.hpp"
#include "transmean/io.hpp"
#include "transmean/sim_config.hpp"
#include "transmean/simulate.hpp"

namespace py = pybind11;
using namespace transmean;

namespace {

// (N, r, c) array, C order after forcecast
DataStack to_stack(const py::array_t<double, py::array::c_style | py::array::forcecast>& data) {
    if (data.ndim() != 3) throw InvalidArgument("data must be a 3-d array of shape (N, r, c)");
    const auto n = data.shape(0), r = data.shape(1), c = data.shape(2);
    const double* p = data.data();
    std::vector<Matrix> subjects;
    subjects.reserve(static_cast<std::size_t>(n));
    for (py::ssize_t i = 0; i < n; ++i) {
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        subjects.emplace_back(Eigen::Map<const RowMajor>(p + i * r * c, r, c));
    }
    return DataStack(std::move(subjects));
}

GroupPartition to_partition(const std::vector<int>& groups, std::size_t c) {
    if (groups.empty()) return GroupPartition::single_group(c);
    return GroupPartition(groups);
}

Orientation to_orientation(const std::string& text) {
    if (text == "columns") return Orientation::columns;
    if (text == "rows") return Orientation::rows;
    throw InvalidArgument("orientation must be 'columns' or 'rows'");
}

py::dict rate_dict(const MethodRate& m, const std::string& name) {
    py::dict d;
    d["label"] = m.label;
    d["name"] = name;
    d["rate"] = m.rate;
    d["se"] = m.standard_error;
    d["rejections"] = m.rejections;
    d["valid"] = m.valid;
    d["errors"] = m.errors;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Mean-matrix tests for transposable data";

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

    py::enum_<TestStatus>(m, "TestStatus")
        .value("ok", TestStatus::ok)
        .value("unstable_variance", TestStatus::unstable_variance);

    py::class_<TestResult>(m, "TestResult")
        .def_readonly("statistic", &TestResult::statistic)
        .def_readonly("p_value", &TestResult::p_value)
        .def_readonly("g_n", &TestResult::g_n)
        .def_readonly("t_n", &TestResult::t_n)
        .def_readonly("n_used", &TestResult::n_used)
        .def_readonly("r_used", &TestResult::r_used)
        .def_readonly("c_used", &TestResult::c_used)
        .def_readonly("alpha", &TestResult::alpha)
        .def_readonly("reject", &TestResult::reject)
        .def_readonly("status", &TestResult::status)
        .def_readonly("diagnostic", &TestResult::diagnostic)
        .def_readonly("dropped", &TestResult::dropped)
        .def_property_readonly("ok", &TestResult::ok)
        .def("__repr__", [](const TestResult& r) {
            return "TestResult(statistic=" + format_double(r.statistic) + ", p_value=" + format_double(r.p_value) +
                   ", reject=" + (r.reject ? "True" : "False") + ", status=" + to_string(r.status) + ")";
        });

    m.def(
        "mean_matrix_test",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data, const std::vector<int>& groups,
           double alpha, const std::string& orientation) {
            const DataStack stack = to_stack(data);
            const Orientation o = to_orientation(orientation);
            const std::size_t dim = o == Orientation::rows ? stack.n_rows() : stack.n_cols();
            return mean_matrix_test(stack, to_partition(groups, dim), alpha, o);
        },
        py::arg("data"), py::arg("groups") = std::vector<int>{}, py::arg("alpha") = 0.05,
        py::arg("orientation") = "columns",
        "Test that each row of the mean is constant within column groups. groups holds one 1-based id per "
        "column; empty means a single group.");

    m.def(
        "test_known_matrix",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data, const Matrix& m0,
           double alpha) { return test_known_matrix(to_stack(data), m0, alpha); },
        py::arg("data"), py::arg("m0"), py::arg("alpha") = 0.05);

    m.def(
        "test_known_difference",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data, const Vector& mu0,
           std::size_t col_a, std::size_t col_b, double alpha) {
            return test_known_difference(to_stack(data), mu0, col_a, col_b, alpha);
        },
        py::arg("data"), py::arg("mu0"), py::arg("col_a"), py::arg("col_b"), py::arg("alpha") = 0.05);

    m.def(
        "gram",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data, const std::vector<int>& groups) {
            const DataStack stack = to_stack(data);
            return compute_gram(stack, ProjectionMatrix(to_partition(groups, stack.n_cols()))).matrix();
        },
        py::arg("data"), py::arg("groups") = std::vector<int>{});
    m.def("g_statistic", [](const Matrix& a) { return g_statistic(GramMatrix(a)); }, py::arg("gram"));
    m.def(
        "t_statistic",
        [](const Matrix& a, bool naive) { return naive ? t_n_naive(GramMatrix(a)) : t_n_fast(GramMatrix(a)); },
        py::arg("gram"), py::arg("naive") = false);

    m.def(
        "anova_rowwise",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data, const std::vector<int>& groups) {
            const DataStack stack = to_stack(data);
            return anova_rowwise(stack, to_partition(groups, stack.n_cols())).values;
        },
        py::arg("data"), py::arg("groups") = std::vector<int>{});
    m.def(
        "kruskal_rowwise",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data, const std::vector<int>& groups) {
            const DataStack stack = to_stack(data);
            return kruskal_rowwise(stack, to_partition(groups, stack.n_cols())).values;
        },
        py::arg("data"), py::arg("groups") = std::vector<int>{});
    m.def(
        "adjust_pvalues",
        [](const std::vector<double>& raw, const std::string& method) {
            return adjust_pvalues(std::span<const double>(raw), parse_adjustment(method));
        },
        py::arg("p"), py::arg("method") = "fdr");

    m.def("preset_names", &preset_names);
    m.def(
        "simulate_preset",
        [](const std::string& name, const std::string& cell, std::size_t replicates, std::uint64_t seed,
           unsigned threads) {
            Preset preset = make_preset(name, replicates, seed);
            if (!cell.empty()) filter_cells(preset, cell);
            py::list out;
            for (PresetCell& c : preset.cells) {
                c.config.threads = threads;
                RejectionReport report;
                {
                    py::gil_scoped_release release;
                    report = monte_carlo(c.config);
                }
                py::dict keys;
                for (const auto& [k, v] : c.keys) keys[py::str(k)] = v;
                py::list methods;
                for (std::size_t j = 0; j < report.methods.size(); ++j) {
                    methods.append(rate_dict(report.methods[j], c.names[j]));
                }
                py::dict d;
                d["keys"] = keys;
                d["quantity"] = c.quantity;
                d["methods"] = methods;
                out.append(d);
            }
            return out;
        },
        py::arg("name"), py::arg("cell") = "", py::arg("replicates") = 1000, py::arg("seed") = kDefaultSeed,
        py::arg("threads") = 0u, "Monte Carlo rejection rates for the matching cells of a table preset.");

    m.attr("DEFAULT_SEED") = kDefaultSeed;
    m.attr("SCHEMA_VERSION") = kSchemaVersion;
}
