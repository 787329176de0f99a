#ifndef OBTREE_CSV_HPP
#define OBTREE_CSV_HPP

#include <string>
#include <vector>

#include "obtree/matrix.hpp"

namespace obtree {

/// Unnormalized tabular data as read from disk.
struct RawData {
    Matrix features;                        // n x p
    std::vector<double> targets;            // length n (empty for feature-only files)
    std::vector<std::string> feature_names; // empty when the file had no header
};

/// Reads an RFC-4180 style CSV (UTF-8, '.' decimal separator, optional
/// quoting with "" escapes, LF or CRLF line ends). `target_column` is a
/// header name, or a 0-based column index when it parses as an integer or
/// the file has no header. Every cell must parse as a finite real.
///
/// Errors (as Error::user): missing/empty file, ragged rows, missing target
/// column, non-finite or unparseable cells (with row and column locations).
RawData load_csv(const std::string& path, const std::string& target_column, bool has_header);

/// Reads a feature-only CSV (no target column). Zero data rows are allowed;
/// the result then has an empty feature matrix.
RawData load_feature_csv(const std::string& path, bool has_header);

} // namespace obtree

#endif // OBTREE_CSV_HPP
