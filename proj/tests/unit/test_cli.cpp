#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "transmean/commands.hpp"
#include "transmean/sim_config.hpp"

using namespace transmean;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("transmean_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

std::string write_file(const std::string& path, const std::string& text) {
    std::ofstream(path) << text;
    return path;
}

std::string write_stack_file(const std::string& path, const DataStack& stack) {
    std::ofstream out(path);
    write_stack(out, stack);
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

DataStack blocks_stack(std::size_t n, Eigen::Index r, const std::vector<double>& column_levels, Philox& rng) {
    Matrix mean(r, static_cast<Eigen::Index>(column_levels.size()));
    for (std::size_t b = 0; b < column_levels.size(); ++b) mean.col(static_cast<Eigen::Index>(b)).setConstant(column_levels[b]);
    return transmean::testing::gaussian_stack(n, r, mean.cols(), rng, &mean);
}

}  // namespace

TEST(CmdTest, PartitionReport) {
    TempDir dir;
    Philox rng(1, 0);
    const std::string data = write_stack_file(dir.file("x.txt"), transmean::testing::gaussian_stack(8, 5, 7, rng));
    TestOptions o;
    o.data = data;
    o.partition = "groups=3:1,4:1,5:1,6:1,7:1";
    o.csv = dir.file("out.csv");
    const CommandOutput out = cmd_test(o, {"transmean", "test"});
    EXPECT_EQ(out.exit_code, kExitOk);
    const Json& r = out.report;
    EXPECT_EQ(r["schema_version"], kSchemaVersion);
    EXPECT_EQ(r["command"], "test");
    EXPECT_EQ(r["hypothesis"]["mode"], "partition");
    EXPECT_EQ(r["result"]["c_used"], 5);
    EXPECT_EQ(r["result"]["dropped"], Json::array({"1", "2"}));
    EXPECT_TRUE(r["result"]["statistic"].is_number());
    EXPECT_TRUE(r["warnings"].is_array());
    const TestResult direct = mean_matrix_test(read_data_file(data).stack, GroupPartition({1, 2, 3, 3, 3, 3, 3}));
    EXPECT_EQ(r["result"]["statistic"].get<double>(), direct.statistic);
    EXPECT_NE(slurp(*o.csv).find("statistic"), std::string::npos);
}

TEST(CmdTest, RowsOrientationEqualsTransposedFile) {
    TempDir dir;
    Philox rng(2, 0);
    const DataStack stack = transmean::testing::gaussian_stack(6, 5, 4, rng);
    TestOptions rows;
    rows.data = write_stack_file(dir.file("x.txt"), stack);
    rows.partition = "sizes=2,3";
    rows.orientation = Orientation::rows;
    TestOptions cols;
    cols.data = write_stack_file(dir.file("xt.txt"), stack.transposed());
    cols.partition = "sizes=2,3";
    const Json a = cmd_test(rows).report["result"];
    const Json b = cmd_test(cols).report["result"];
    EXPECT_EQ(a["statistic"], b["statistic"]);
    EXPECT_EQ(a["p_value"], b["p_value"]);
    EXPECT_EQ(a["orientation"], "rows");
}

TEST(CmdTest, IdenticalMatricesGiveDegenerateExit) {
    TempDir dir;
    Philox rng(3, 0);
    const Matrix x = transmean::testing::gaussian(3, 4, rng);
    TestOptions o;
    o.data = write_stack_file(dir.file("x.txt"), DataStack({x, x, x, x}));
    o.partition = "sizes=4";
    const CommandOutput out = cmd_test(o);
    EXPECT_EQ(out.exit_code, kExitDegenerate);
    EXPECT_TRUE(out.report["result"]["statistic"].is_null());
    EXPECT_EQ(out.report["result"]["status"], "unstable_variance");
    EXPECT_FALSE(out.report["warnings"].empty());
}

TEST(CmdTest, KnownMatrixAndDifferenceModes) {
    TempDir dir;
    Philox rng(4, 0);
    const DataStack stack = transmean::testing::gaussian_stack(8, 3, 3, rng);
    TestOptions o;
    o.data = write_stack_file(dir.file("x.txt"), stack);
    o.m0 = write_file(dir.file("m0.txt"), "0 0 0\n0 0 0\n0 0 0\n");
    EXPECT_EQ(cmd_test(o).report["result"]["statistic"].get<double>(),
              test_known_matrix(stack, Matrix::Zero(3, 3)).statistic);
    TestOptions d;
    d.data = o.data;
    d.diff_cols = "3,1";
    d.mu0 = write_file(dir.file("mu0.txt"), "0.5\n0\n-1\n");
    Vector mu0(3);
    mu0 << 0.5, 0, -1;
    EXPECT_EQ(cmd_test(d).report["result"]["statistic"].get<double>(),
              test_known_difference(stack, mu0, 2, 0).statistic);
}

TEST(CmdTest, ModeSelectionIsAUsageError) {
    TempDir dir;
    Philox rng(5, 0);
    TestOptions o;
    o.data = write_stack_file(dir.file("x.txt"), transmean::testing::gaussian_stack(5, 2, 3, rng));
    EXPECT_THROW(cmd_test(o), UsageError);
    o.partition = "sizes=3";
    o.diff_cols = "1,2";
    EXPECT_THROW(cmd_test(o), UsageError);
}

TEST(CmdTest, ParseErrorsSurface) {
    TempDir dir;
    TestOptions o;
    o.data = write_file(dir.file("bad.txt"), "1 2 2\n1 2\n3 oops\n");
    o.partition = "sizes=2";
    try {
        cmd_test(o);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("bad.txt:3:"), std::string::npos);
    }
}

TEST(CmdScreen, SingleFullSetMatchesTest) {
    TempDir dir;
    Philox rng(6, 0);
    const std::string data = write_stack_file(dir.file("x.txt"), transmean::testing::gaussian_stack(10, 9, 4, rng));
    ScreenOptions s;
    s.data = data;
    s.sets = write_file(dir.file("sets.txt"), "all 1 2 3 4 5 6 7 8 9\n");
    s.partition = "sizes=2,2";
    s.csv = dir.file("screen.csv");
    const CommandOutput out = cmd_screen(s);
    TestOptions t;
    t.data = data;
    t.partition = "sizes=2,2";
    const Json tested = cmd_test(t).report["result"];
    ASSERT_EQ(out.report["sets"].size(), 1u);
    EXPECT_EQ(out.report["sets"][0]["result"]["statistic"], tested["statistic"]);
    EXPECT_EQ(out.report["sets"][0]["adjusted_p"], tested["p_value"]);
    EXPECT_NE(slurp(*s.csv).find("all,"), std::string::npos);
}

TEST(CmdScreen, SmallSetsAreSkipped) {
    TempDir dir;
    Philox rng(7, 0);
    ScreenOptions s;
    s.data = write_stack_file(dir.file("x.txt"), transmean::testing::gaussian_stack(10, 12, 3, rng));
    s.sets = write_file(dir.file("sets.txt"), "big 1 2 3 4 5 6 7 8\nsmall 9 10 11 12\n");
    s.partition = "sizes=3";
    const Json r = cmd_screen(s).report;
    EXPECT_EQ(r["n_tested"], 1);
    ASSERT_EQ(r["skipped"].size(), 1u);
    EXPECT_EQ(r["skipped"][0]["name"], "small");
    s.sets = write_file(dir.file("bad.txt"), "big 1 2 3 99\n");
    s.min_size = 2;
    EXPECT_THROW(cmd_screen(s), InvalidArgument);
}

TEST(CmdScreen, ViolatingSetRejectedNullSetNot) {
    TempDir dir;
    Philox rng(8, 0);
    int correct = 0;
    const int reps = 50;
    for (int rep = 0; rep < reps; ++rep) {
        // rows 1-10 carry a column effect, rows 11-20 do not
        Matrix mean = Matrix::Zero(20, 5);
        mean.topRows(10).col(4).setConstant(0.8);
        const DataStack stack = transmean::testing::gaussian_stack(20, 20, 5, rng, &mean);
        ScreenOptions s;
        s.data = write_stack_file(dir.file("x.txt"), stack);
        s.sets = write_file(dir.file("sets.txt"), "A 1 2 3 4 5 6 7 8 9 10\nB 11 12 13 14 15 16 17 18 19 20\n");
        s.partition = "sizes=5";
        const Json sets = cmd_screen(s).report["sets"];
        correct += sets[0]["adjusted_p"].get<double>() < 0.05 && sets[1]["adjusted_p"].get<double>() >= 0.05;
    }
    EXPECT_GE(correct, 45);
}

TEST(CmdDiscover, NullStopsAtFirstStep) {
    TempDir dir;
    Philox rng(9, 0);
    int stopped = 0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
        DiscoverOptions o;
        o.data = write_stack_file(dir.file("x.txt"), transmean::testing::gaussian_stack(15, 10, 4, rng));
        const CommandOutput out = cmd_discover(o);
        stopped += out.report["conclusion"] == "column-independent mean";
    }
    EXPECT_NEAR(stopped / static_cast<double>(reps), 0.95, 0.04);
}

TEST(CmdDiscover, RecoversTwoBlocks) {
    TempDir dir;
    Philox rng(10, 0);
    int recovered = 0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
        DiscoverOptions o;
        o.data = write_stack_file(dir.file("x.txt"), blocks_stack(20, 20, {0.0, 0.0, 0.0, 0.6, 0.6}, rng));
        const CommandOutput out = cmd_discover(o);
        if (out.report["conclusion"] == "grouped" &&
            out.report["trace"]["grouping"]["assignment"] == Json::array({1, 1, 1, 2, 2})) {
            ++recovered;
        }
    }
    EXPECT_GE(recovered, 180);
}

TEST(CmdDiscover, TwoColumnsAreTerminal) {
    TempDir dir;
    Philox rng(11, 0);
    for (double effect : {0.0, 1.0}) {
        DiscoverOptions o;
        o.data = write_stack_file(dir.file("x.txt"), blocks_stack(12, 10, {0.0, effect}, rng));
        const CommandOutput out = cmd_discover(o);
        const std::string conclusion = out.report["conclusion"];
        EXPECT_TRUE(conclusion == "column-independent mean" || conclusion == "unstructured") << conclusion;
        if (conclusion == "unstructured") EXPECT_EQ(out.report["trace"]["pairs"].size(), 1u);
    }
}

TEST(CmdDiscover, TraceShape) {
    TempDir dir;
    Philox rng(12, 0);
    DiscoverOptions o;
    o.data = write_stack_file(dir.file("x.txt"), blocks_stack(15, 10, {0.0, 0.0, 1.0, 1.0}, rng));
    const Json r = cmd_discover(o).report;
    ASSERT_TRUE(r["trace"].contains("step_a"));
    EXPECT_EQ(r["trace"]["pairs"].size(), 6u);
    EXPECT_EQ(r["trace"]["fdr_matrix"].size(), 4u);
    EXPECT_TRUE(r["trace"]["fdr_matrix"][0][0].is_null());
    EXPECT_TRUE(r["trace"].contains("final"));
}

TEST(CmdSimulate, ConfigRunIsReproducible) {
    TempDir dir;
    SimulateOptions o;
    o.config = write_file(dir.file("cell.cfg"), "N = 10\nr = 8\nc = 4\nreplicates = 100\nseed = 3\nmethods = H4, kw_fdr\n");
    o.quiet = true;
    o.output = dir.file("a.csv");
    o.threads = 1;
    const CommandOutput first = cmd_simulate(o);
    o.output = dir.file("b.csv");
    o.threads = 3;
    cmd_simulate(o);
    EXPECT_EQ(slurp(dir.file("a.csv")), slurp(dir.file("b.csv")));
    EXPECT_EQ(first.report["cells"][0]["methods"].size(), 2u);
    EXPECT_EQ(slurp(dir.file("a.csv")).substr(0, 38), "method,rejections,valid,errors,rate,se");
}

TEST(CmdSimulate, PresetSelection) {
    TempDir dir;
    SimulateOptions o;
    o.output = dir.file("x.csv");
    EXPECT_THROW(cmd_simulate(o), UsageError);
    o.preset = "table1";
    o.config = "x.cfg";
    EXPECT_THROW(cmd_simulate(o), UsageError);
    o.config.reset();
    o.preset = "tableX";
    EXPECT_THROW(cmd_simulate(o), InvalidArgument);
}

TEST(CmdConvert, RoundTripIsByteIdentical) {
    TempDir dir;
    const std::string original = write_file(dir.file("in.csv"),
                                            "subject_id,row_id,col_id,value\n"
                                            "a,g1,t1,0.1\na,g1,t2,-3\na,g2,t1,2.5e-08\na,g2,t2,7\n"
                                            "b,g1,t1,1\nb,g1,t2,2\nb,g2,t1,3\nb,g2,t2,4\n");
    ConvertOptions to_stack{original, "stack", dir.file("s.txt")};
    cmd_convert(to_stack);
    ConvertOptions to_long{original, "long", dir.file("l.csv")};
    cmd_convert(to_long);
    EXPECT_EQ(slurp(dir.file("l.csv")), slurp(original));
    const LoadedData a = read_data_file(original), b = read_data_file(dir.file("s.txt"));
    for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(a.stack[i], b.stack[i]);
}
