#pragma once

// The CLI subcommands as library calls. Each returns the JSON report and the
// process exit status; tools/transmean.cpp only parses flags.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "transmean/baselines.hpp"
#include "transmean/engine.hpp"
#include "transmean/io.hpp"

namespace transmean {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1.0";

/// Exit statuses. A rejection is never a failure.
enum ExitCode : int {
    kExitOk = 0,
    kExitError = 1,
    kExitUsage = 2,
    kExitDegenerate = 3,
};

/// Bad flag combination; the CLI maps it to kExitUsage.
class UsageError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct CommandOutput {
    Json report;
    int exit_code = kExitOk;
};

/// statistic and p_value are null for flagged results.
Json result_json(const TestResult& result, const std::vector<std::string>& labels);
Json data_json(const LoadedData& data, const std::string& path);

struct TestOptions {
    std::string data;
    std::optional<std::string> partition;
    std::optional<std::string> m0;
    /// "A,B": test mean(A) - mean(B) = mu0
    std::optional<std::string> diff_cols;
    std::optional<std::string> mu0;
    Orientation orientation = Orientation::columns;
    double alpha = 0.05;
    std::optional<std::string> csv;
};
CommandOutput cmd_test(const TestOptions& options, const std::vector<std::string>& argv = {});

struct ScreenOptions {
    std::string data;
    std::string sets;
    std::string partition;
    double alpha = 0.05;
    Adjustment correction = Adjustment::fdr;
    std::size_t min_size = 8;
    std::optional<std::string> csv;
};
CommandOutput cmd_screen(const ScreenOptions& options, const std::vector<std::string>& argv = {});

struct SimulateOptions {
    std::optional<std::string> preset;
    std::optional<std::string> config;
    std::optional<std::string> cell;
    std::optional<std::size_t> replicates;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string output;
    bool quiet = false;
};
CommandOutput cmd_simulate(const SimulateOptions& options, const std::vector<std::string>& argv = {});

struct DiscoverOptions {
    std::string data;
    double alpha = 0.05;
    Orientation orientation = Orientation::columns;
};
CommandOutput cmd_discover(const DiscoverOptions& options, const std::vector<std::string>& argv = {});

struct ConvertOptions {
    std::string data;
    std::string to = "stack";
    std::string output;
};
CommandOutput cmd_convert(const ConvertOptions& options, const std::vector<std::string>& argv = {});

/// Default seed for simulate when neither flag nor config sets one.
inline constexpr std::uint64_t kDefaultSeed = 20150101;

}  // namespace transmean
