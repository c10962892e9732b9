#include "transmean/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace transmean {

namespace {

enum class Delim { whitespace, comma, tab };

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
    throw ParseError(source + ":" + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool skippable(const std::string& line) {
    const std::string t = trim(line);
    return t.empty() || t[0] == '#';
}

Delim detect(const std::string& line) {
    if (line.find('\t') != std::string::npos) return Delim::tab;
    if (line.find(',') != std::string::npos) return Delim::comma;
    return Delim::whitespace;
}

std::vector<std::string> split(const std::string& line, Delim d) {
    std::vector<std::string> out;
    if (d == Delim::whitespace) {
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) out.push_back(tok);
        return out;
    }
    const char sep = d == Delim::tab ? '\t' : ',';
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

bool parse_number(std::string tok, double& out) {
    if (!tok.empty() && tok[0] == '+') tok.erase(0, 1);
    if (tok.empty()) return false;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc() && res.ptr == tok.data() + tok.size() && std::isfinite(out);
}

bool parse_count(const std::string& tok, long& out) {
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc() && res.ptr == tok.data() + tok.size() && out >= 0;
}

double number_or_fail(const std::string& tok, const std::string& source, int line) {
    double v = 0.0;
    if (!parse_number(tok, v)) fail(source, line, "expected a finite number, got '" + tok + "'");
    return v;
}

std::vector<std::string> numbered(std::size_t n) {
    std::vector<std::string> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::to_string(i + 1);
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return s;
}

// Reads lines, tracking line numbers and skipping blanks and comments.
class LineReader {
public:
    LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& line) {
        while (std::getline(in_, line)) {
            ++number_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!skippable(line)) return true;
        }
        return false;
    }
    int number() const { return number_; }

private:
    std::istream& in_;
    int number_ = 0;
};

}  // namespace

int find_label(const std::vector<std::string>& labels, const std::string& label) {
    const auto it = std::find(labels.begin(), labels.end(), label);
    return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

LoadedData read_stack(std::istream& in, const std::string& source) {
    LineReader reader(in);
    std::string line;
    if (!reader.next(line)) fail(source, reader.number(), "empty input");
    const auto head = split(trim(line), detect(line));
    long n = 0, r = 0, c = 0;
    if (head.size() != 3 || !parse_count(head[0], n) || !parse_count(head[1], r) || !parse_count(head[2], c)) {
        fail(source, reader.number(), "stack header must be 'N r c'");
    }
    if (n < 1 || r < 1 || c < 1) fail(source, reader.number(), "N, r and c must be positive");

    std::vector<Matrix> subjects;
    subjects.reserve(static_cast<std::size_t>(n));
    Delim delim = Delim::whitespace;
    bool first = true;
    for (long i = 0; i < n; ++i) {
        Matrix x(r, c);
        for (long a = 0; a < r; ++a) {
            if (!reader.next(line)) {
                fail(source, reader.number(),
                     "unexpected end of input: expected " + std::to_string(n * r) + " data lines, got " +
                         std::to_string(i * r + a));
            }
            if (first) {
                delim = detect(line);
                first = false;
            }
            const auto toks = split(trim(line), delim);
            if (static_cast<long>(toks.size()) != c) {
                fail(source, reader.number(),
                     "expected " + std::to_string(c) + " values, got " + std::to_string(toks.size()));
            }
            for (long b = 0; b < c; ++b) x(a, b) = number_or_fail(toks[b], source, reader.number());
        }
        subjects.push_back(std::move(x));
    }
    if (reader.next(line)) fail(source, reader.number(), "trailing data after " + std::to_string(n) + " matrices");

    LoadedData out{DataStack(std::move(subjects)), "stack", numbered(n), numbered(r), numbered(c)};
    return out;
}

LoadedData read_long(std::istream& in, const std::string& source) {
    LineReader reader(in);
    std::string line;
    if (!reader.next(line)) fail(source, reader.number(), "empty input");
    const Delim delim = detect(line);
    const auto header = split(trim(line), delim);
    int col[4] = {-1, -1, -1, -1};
    const char* names[4] = {"subject_id", "row_id", "col_id", "value"};
    for (std::size_t k = 0; k < header.size(); ++k) {
        for (int f = 0; f < 4; ++f) {
            if (lower(header[k]) == names[f]) {
                if (col[f] >= 0) fail(source, reader.number(), std::string("duplicate header column ") + names[f]);
                col[f] = static_cast<int>(k);
            }
        }
    }
    for (int f = 0; f < 4; ++f) {
        if (col[f] < 0) {
            fail(source, reader.number(), std::string("long-format header is missing '") + names[f] +
                                              "' (expected subject_id,row_id,col_id,value)");
        }
    }

    struct Record {
        std::size_t i, a, b;
        double v;
        int line;
    };
    std::vector<Record> records;
    std::vector<std::string> ids[3];
    std::unordered_map<std::string, std::size_t> index[3];
    while (reader.next(line)) {
        const auto toks = split(trim(line), delim);
        if (toks.size() != header.size()) {
            fail(source, reader.number(),
                 "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(toks.size()));
        }
        std::size_t idx[3];
        for (int f = 0; f < 3; ++f) {
            const std::string& id = toks[col[f]];
            if (id.empty()) fail(source, reader.number(), std::string("empty ") + names[f]);
            const auto [it, inserted] = index[f].emplace(id, ids[f].size());
            if (inserted) ids[f].push_back(id);
            idx[f] = it->second;
        }
        records.push_back({idx[0], idx[1], idx[2], number_or_fail(toks[col[3]], source, reader.number()),
                           reader.number()});
    }
    if (records.empty()) fail(source, reader.number(), "no records");

    const std::size_t n = ids[0].size(), r = ids[1].size(), c = ids[2].size();
    std::vector<Matrix> subjects(n, Matrix(r, c));
    std::vector<int> seen(n * r * c, 0);
    for (const auto& rec : records) {
        const std::size_t key = (rec.i * r + rec.a) * c + rec.b;
        if (seen[key]) {
            fail(source, rec.line,
                 "duplicate cell (" + ids[0][rec.i] + ", " + ids[1][rec.a] + ", " + ids[2][rec.b] + "), first seen on line " +
                     std::to_string(seen[key]));
        }
        seen[key] = rec.line;
        subjects[rec.i](static_cast<Eigen::Index>(rec.a), static_cast<Eigen::Index>(rec.b)) = rec.v;
    }
    for (std::size_t key = 0; key < seen.size(); ++key) {
        if (!seen[key]) {
            const std::size_t b = key % c, a = (key / c) % r, i = key / (r * c);
            throw ParseError(source + ": incomplete grid: missing cell (" + ids[0][i] + ", " + ids[1][a] + ", " +
                             ids[2][b] + "); " + std::to_string(records.size()) + " of " +
                             std::to_string(n * r * c) + " cells present");
        }
    }
    return {DataStack(std::move(subjects)), "long", ids[0], ids[1], ids[2]};
}

LoadedData read_data(std::istream& in, const std::string& source) {
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    std::istringstream probe(text);
    LineReader reader(probe);
    std::string line;
    if (!reader.next(line)) fail(source, reader.number(), "empty input");
    const auto toks = split(trim(line), detect(line));
    long dummy = 0;
    const bool is_stack =
        toks.size() == 3 && std::all_of(toks.begin(), toks.end(), [&](const auto& t) { return parse_count(t, dummy); });
    std::istringstream body(text);
    return is_stack ? read_stack(body, source) : read_long(body, source);
}

LoadedData read_data_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open data file '" + path + "'");
    return read_data(in, path);
}

void write_stack(std::ostream& out, const DataStack& stack, char delimiter) {
    out << stack.n_subjects() << ' ' << stack.n_rows() << ' ' << stack.n_cols() << '\n';
    for (std::size_t i = 0; i < stack.n_subjects(); ++i) {
        const Matrix& x = stack[i];
        for (Eigen::Index a = 0; a < x.rows(); ++a) {
            for (Eigen::Index b = 0; b < x.cols(); ++b) {
                if (b) out << delimiter;
                out << format_double(x(a, b));
            }
            out << '\n';
        }
    }
}

void write_long(std::ostream& out, const LoadedData& data, char delimiter) {
    out << "subject_id" << delimiter << "row_id" << delimiter << "col_id" << delimiter << "value\n";
    const DataStack& s = data.stack;
    for (std::size_t i = 0; i < s.n_subjects(); ++i) {
        for (std::size_t a = 0; a < s.n_rows(); ++a) {
            for (std::size_t b = 0; b < s.n_cols(); ++b) {
                out << data.subject_ids[i] << delimiter << data.row_ids[a] << delimiter << data.col_ids[b] << delimiter
                    << format_double(s[i](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))) << '\n';
            }
        }
    }
}

LoadedData transpose(const LoadedData& data) {
    return {data.stack.transposed(), data.format, data.subject_ids, data.col_ids, data.row_ids};
}

GroupPartition parse_partition(const std::string& spec, const std::vector<std::string>& labels) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
        throw InvalidArgument("partition spec '" + spec + "' must start with sizes= or groups=");
    }
    const std::string kind = trim(spec.substr(0, eq));
    const auto items = split(spec.substr(eq + 1), Delim::comma);
    if (kind == "sizes") {
        std::vector<int> sizes;
        for (const auto& item : items) {
            long v = 0;
            if (!parse_count(item, v) || v < 1) throw InvalidArgument("partition sizes: bad size '" + item + "'");
            sizes.push_back(static_cast<int>(v));
        }
        long total = 0;
        for (int s : sizes) total += s;
        if (total != static_cast<long>(labels.size())) {
            throw InvalidArgument("partition sizes sum to " + std::to_string(total) + " but there are " +
                                  std::to_string(labels.size()) + " columns");
        }
        return GroupPartition::from_sizes(sizes);
    }
    if (kind != "groups") {
        throw InvalidArgument("partition spec '" + spec + "' must start with sizes= or groups=");
    }
    std::vector<std::string> group_of(labels.size());
    std::vector<bool> listed(labels.size(), false);
    for (const auto& item : items) {
        const auto colon = item.rfind(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == item.size()) {
            throw InvalidArgument("partition groups: expected label:group, got '" + item + "'");
        }
        const std::string label = trim(item.substr(0, colon));
        const int idx = find_label(labels, label);
        if (idx < 0) throw InvalidArgument("partition groups: unknown label '" + label + "'");
        if (listed[idx]) throw InvalidArgument("partition groups: label '" + label + "' listed twice");
        listed[idx] = true;
        group_of[idx] = trim(item.substr(colon + 1));
    }
    // group ids numbered by first appearance in label order; unlisted labels are singletons
    std::map<std::string, int> ids;
    std::vector<int> assignment(labels.size());
    int next = 1;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (!listed[k]) {
            assignment[k] = next++;
            continue;
        }
        const auto [it, inserted] = ids.emplace(group_of[k], next);
        if (inserted) ++next;
        assignment[k] = it->second;
    }
    return GroupPartition(assignment);
}

std::vector<RowSet> read_row_sets(std::istream& in, const std::string& source) {
    LineReader reader(in);
    std::vector<RowSet> out;
    std::string line;
    while (reader.next(line)) {
        const std::string body = trim(line.substr(0, line.find('#')));
        auto toks = split(body, detect(body));
        toks.erase(std::remove(toks.begin(), toks.end(), std::string()), toks.end());
        if (toks.empty()) continue;
        RowSet set{toks[0], {toks.begin() + 1, toks.end()}, reader.number()};
        if (set.row_ids.empty()) fail(source, reader.number(), "set '" + set.name + "' lists no rows");
        out.push_back(std::move(set));
    }
    if (out.empty()) throw ParseError(source + ": no row sets");
    return out;
}

std::vector<RowSet> read_row_sets_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open row-set file '" + path + "'");
    return read_row_sets(in, path);
}

Matrix read_matrix(std::istream& in, const std::string& source) {
    LineReader reader(in);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (reader.next(line)) {
        const auto toks = split(trim(line), detect(line));
        std::vector<double> row;
        for (const auto& t : toks) row.push_back(number_or_fail(t, source, reader.number()));
        if (!rows.empty() && row.size() != rows.front().size()) {
            fail(source, reader.number(),
                 "expected " + std::to_string(rows.front().size()) + " values, got " + std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(source + ": empty matrix");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < rows[a].size(); ++b) {
            m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = rows[a][b];
        }
    }
    return m;
}

Matrix read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open matrix file '" + path + "'");
    return read_matrix(in, path);
}

Vector read_vector_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open vector file '" + path + "'");
    LineReader reader(in);
    std::vector<double> values;
    std::string line;
    while (reader.next(line)) {
        for (const auto& t : split(trim(line), detect(line))) values.push_back(number_or_fail(t, path, reader.number()));
    }
    if (values.empty()) throw ParseError(path + ": empty vector");
    return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace transmean
