#pragma once

// Text formats: stack files, long-format records, partition specs, row-set
// files and numeric matrices. Byte-level details are in docs/formats.md.

#include <iosfwd>
#include <string>
#include <vector>

#include "transmean/core.hpp"

namespace transmean {

/// Parse failure; the message carries "<source>:<line>: ".
class ParseError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct LoadedData {
    DataStack stack;
    std::string format;  // "stack" or "long"
    /// Labels in index order. Stack files get "1".."n".
    std::vector<std::string> subject_ids;
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;
};

/// Reads either format; a first line of exactly three integers selects the
/// stack format, anything else must be a long-format header.
LoadedData read_data(std::istream& in, const std::string& source);
LoadedData read_data_file(const std::string& path);

LoadedData read_stack(std::istream& in, const std::string& source);
LoadedData read_long(std::istream& in, const std::string& source);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

void write_stack(std::ostream& out, const DataStack& stack, char delimiter = '\t');
void write_long(std::ostream& out, const LoadedData& data, char delimiter = ',');

/// Data with every matrix transposed; row and column labels swap.
LoadedData transpose(const LoadedData& data);

/// `sizes=c1,c2,...` or `groups=label:gid,...`. Labels not listed under
/// groups= become singletons.
GroupPartition parse_partition(const std::string& spec, const std::vector<std::string>& labels);

struct RowSet {
    std::string name;
    std::vector<std::string> row_ids;
    int line = 0;
};

/// One set per line: name followed by row ids; '#' starts a comment.
std::vector<RowSet> read_row_sets(std::istream& in, const std::string& source);
std::vector<RowSet> read_row_sets_file(const std::string& path);

/// Rows of delimited numbers, all of equal length.
Matrix read_matrix(std::istream& in, const std::string& source);
Matrix read_matrix_file(const std::string& path);
/// All numbers in the file, in reading order.
Vector read_vector_file(const std::string& path);

/// Index of a label, or -1.
int find_label(const std::vector<std::string>& labels, const std::string& label);

}  // namespace transmean
