#pragma once

// Key=value simulation configs and the table-reproduction presets.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "transmean/simulate.hpp"

namespace transmean {

/// identity | kronecker(COL;ROW) | block_ar1(rho*count,...) | exchangeable(rho),
/// where COL/ROW are identity | ar1(rho) | compound(rho).
CovarianceSpec parse_covariance(const std::string& text, std::size_t rows, std::size_t cols);

/// zero | right_block(width,target[,identity|sigma])
///      | sparse(prop_zero,equal|linear,target[,width[,identity|sigma]])
///      | multiplicative(t[,fraction])
MeanSpec parse_mean(const std::string& text);

/// Keys: N r c scenario covariance mean baseline_sizes alpha replicates seed
/// methods threads. '#' starts a comment. Unknown keys are errors.
SimConfig parse_sim_config(std::istream& in, const std::string& source);
SimConfig read_sim_config_file(const std::string& path);

struct PresetCell {
    /// Index in the full preset; seeds derive from it so filtering never
    /// changes a cell's numbers.
    std::size_t index = 0;
    /// Every attribute a --cell filter may match (r, N, c, scenario, zeros).
    std::vector<std::pair<std::string, std::string>> keys;
    /// Values of the preset's row keys, in order.
    std::vector<std::string> row;
    /// Column-name prefix, e.g. "s2_" for a scenario block.
    std::string prefix;
    /// "power" or "size".
    std::string quantity;
    /// Column names parallel to config.methods.
    std::vector<std::string> names;
    SimConfig config;
};

struct Preset {
    std::string name;
    std::string description;
    std::vector<std::string> row_keys;
    std::vector<PresetCell> cells;
};

std::vector<std::string> preset_names();

/// Builds a preset with every cell at the given replicate count and base seed.
Preset make_preset(const std::string& name, std::size_t replicates, std::uint64_t seed);

/// Keeps cells matching every `key=value` pair of a comma-separated filter.
/// Throws if a key is unknown to the preset or nothing matches.
void filter_cells(Preset& preset, const std::string& filter);

/// Table-shaped CSV: one line per row key, `<prefix><name>_<quantity>` and
/// `..._se` columns. Cells missing after filtering are left out entirely.
std::string preset_csv(const Preset& preset, const std::vector<RejectionReport>& reports);

/// One line per method: label,rejections,valid,errors,rate,se.
std::string report_csv(const RejectionReport& report);

}  // namespace transmean
