#include "obtree/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "obtree/error.hpp"

namespace obtree {
namespace {

// One logical CSV record; quoted fields may span physical lines.
struct RecordReader {
    std::istream& in;
    std::size_t line = 0; // physical line of the record start, 1-based

    // Returns false at end of input. Skips blank unquoted lines.
    bool next(std::vector<std::string>& fields) {
        fields.clear();
        int c = in.get();
        while (c == '\n' || c == '\r') { // tolerate blank lines between records
            if (c == '\n') ++line;
            c = in.get();
        }
        if (c == EOF) return false;
        ++line;
        std::string field;
        bool quoted = false;
        std::size_t start_line = line;
        while (true) {
            if (c == EOF) {
                if (quoted)
                    throw Error::user("csv: unterminated quote in record starting at line " +
                                      std::to_string(start_line));
                fields.push_back(std::move(field));
                return true;
            }
            char ch = static_cast<char>(c);
            if (quoted) {
                if (ch == '"') {
                    int peek = in.get();
                    if (peek == '"') {
                        field.push_back('"');
                    } else {
                        quoted = false;
                        c = peek;
                        continue;
                    }
                } else {
                    if (ch == '\n') ++line;
                    field.push_back(ch);
                }
            } else if (ch == '"' && field.empty()) {
                quoted = true;
            } else if (ch == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else if (ch == '\r') {
                int peek = in.get();
                if (peek != '\n' && peek != EOF) in.unget();
                fields.push_back(std::move(field));
                return true;
            } else if (ch == '\n') {
                fields.push_back(std::move(field));
                return true;
            } else {
                field.push_back(ch);
            }
            c = in.get();
        }
    }
};

std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_cell(const std::string& raw, std::size_t row, std::size_t col) {
    std::string s = trimmed(raw);
    auto fail = [&](const char* what) {
        throw Error::user("csv: " + std::string(what) + " at row " + std::to_string(row) +
                          ", column " + std::to_string(col + 1) + ": \"" + raw + "\"");
    };
    if (s.empty()) fail("empty cell");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) fail("unparseable value");
    if (!std::isfinite(v)) fail("non-finite value");
    return v;
}

// Column index for a header name, or a plain 0-based index. Index form is
// accepted with or without a header.
std::size_t resolve_target(const std::vector<std::string>& header, std::size_t ncols,
                           const std::string& target, bool has_header) {
    if (has_header) {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (trimmed(header[j]) == target) return j;
    }
    std::size_t idx = 0;
    auto [ptr, ec] = std::from_chars(target.data(), target.data() + target.size(), idx);
    if (ec == std::errc{} && ptr == target.data() + target.size()) {
        if (idx >= ncols)
            throw Error::user("csv: target column index " + target + " out of range (file has " +
                              std::to_string(ncols) + " columns)");
        return idx;
    }
    throw Error::user("csv: target column \"" + target + "\" not found");
}

RawData load_impl(const std::string& path, const std::string* target, bool has_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error::user("csv: cannot open \"" + path + "\"");
    RecordReader reader{in};

    std::vector<std::string> fields;
    std::vector<std::string> header;
    if (has_header) {
        if (!reader.next(fields)) throw Error::user("csv: no rows in \"" + path + "\"");
        header = fields;
    }

    std::vector<std::vector<double>> rows;
    std::size_t ncols = header.size();
    std::size_t row_no = 0;
    while (reader.next(fields)) {
        ++row_no;
        if (ncols == 0) ncols = fields.size();
        if (fields.size() != ncols)
            throw Error::user("csv: row " + std::to_string(row_no) + " has " +
                              std::to_string(fields.size()) + " columns, expected " +
                              std::to_string(ncols));
        std::vector<double> row(ncols);
        for (std::size_t j = 0; j < ncols; ++j) row[j] = parse_cell(fields[j], row_no, j);
        rows.push_back(std::move(row));
    }
    if (rows.empty() && target != nullptr) throw Error::user("csv: no rows in \"" + path + "\"");

    RawData out;
    std::size_t target_col = ncols; // past-the-end when feature-only
    if (target != nullptr) {
        target_col = resolve_target(header, ncols, *target, has_header);
        out.targets.reserve(rows.size());
    }
    std::size_t p = (target != nullptr) ? ncols - 1 : ncols;
    if (target != nullptr && ncols < 2)
        throw Error::user("csv: need at least one feature column besides the target");
    out.features = Matrix(rows.size(), p);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t jj = 0;
        for (std::size_t j = 0; j < ncols; ++j) {
            if (j == target_col)
                out.targets.push_back(rows[i][j]);
            else
                out.features(i, jj++) = rows[i][j];
        }
    }
    if (has_header) {
        for (std::size_t j = 0; j < ncols; ++j)
            if (j != target_col) out.feature_names.push_back(trimmed(header[j]));
    }
    return out;
}

} // namespace

RawData load_csv(const std::string& path, const std::string& target_column, bool has_header) {
    return load_impl(path, &target_column, has_header);
}

RawData load_feature_csv(const std::string& path, bool has_header) {
    return load_impl(path, nullptr, has_header);
}

} // namespace obtree
