#pragma once

#include "pathode/moment.hpp"
#include "pathode/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace pathode {

/// Labelled dense data: labels in the first CSV column, features after it.
struct Dataset {
    Matrix features;
    Vector labels;
};

/// Parses the CSV dataset contract. An optional header row is detected by a
/// non-numeric first field. With `require_binary` labels must be -1 or +1.
/// Errors name the source and 1-based line.
Dataset parse_csv_dataset(std::istream& in, const std::string& source, bool require_binary = true);
Dataset load_csv_dataset(const std::string& path, bool standardize = false, bool require_binary = true);

/// Per-column zero mean and unit (population) variance; constant columns are only centered.
void standardize_columns(Matrix& features);

void write_csv_dataset(const Dataset& data, std::ostream& out);

/// Standard normal A (row-major draws) followed by standard normal b.
std::pair<Matrix, Vector> synthetic_quadratic(Index n, Index p, std::uint64_t seed);

/// Seeded logistic model: true weights w ~ N(0, I/p), then features ~ N(0, 1)
/// row-major, then one uniform per sample with y = +1 iff u < sigmoid(a_i . w).
Dataset synthetic_logistic(Index n, Index p, std::uint64_t seed);

MomentData load_moment_json(const std::string& path);
MomentData parse_moment_json(const std::string& text);
std::string moment_json(const MomentData& data);

}  // namespace pathode
