#include "pathode/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace pathode {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& value) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last && std::isfinite(value);
}

}  // namespace

Dataset parse_csv_dataset(std::istream& in, const std::string& source, bool require_binary) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        double probe;
        if (rows.empty() && width == 0 && !parse_double(fields.front(), probe)) {
            width = fields.size();  // header
            continue;
        }
        auto fail = [&](const std::string& why) {
            throw InvalidArgument(source + ":" + std::to_string(line_no) + ": " + why);
        };
        if (fields.size() < 2) fail("need a label and at least one feature");
        if (width != 0 && fields.size() != width) {
            fail("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
        }
        width = fields.size();
        std::vector<double> row(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (!parse_double(fields[j], row[j])) fail("field " + std::to_string(j + 1) + " is not a number");
        }
        if (require_binary && row[0] != 1.0 && row[0] != -1.0) {
            fail("label " + trim(fields[0]) + " is not -1 or +1");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidArgument(source + ": no data rows");
    Dataset d;
    d.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(width - 1));
    d.labels.resize(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        d.labels(static_cast<Index>(i)) = rows[i][0];
        for (std::size_t j = 1; j < width; ++j) {
            d.features(static_cast<Index>(i), static_cast<Index>(j - 1)) = rows[i][j];
        }
    }
    return d;
}

Dataset load_csv_dataset(const std::string& path, bool standardize, bool require_binary) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open dataset '" + path + "'");
    Dataset d = parse_csv_dataset(in, path, require_binary);
    if (standardize) standardize_columns(d.features);
    return d;
}

void standardize_columns(Matrix& features) {
    const double n = static_cast<double>(features.rows());
    for (Index j = 0; j < features.cols(); ++j) {
        auto col = features.col(j);
        const double mean = col.sum() / n;
        col.array() -= mean;
        const double sd = std::sqrt(col.squaredNorm() / n);
        if (sd > 0.0) col /= sd;
    }
}

void write_csv_dataset(const Dataset& data, std::ostream& out) {
    out << "label";
    for (Index j = 1; j <= data.features.cols(); ++j) out << ",a_" << j;
    out << '\n' << std::setprecision(17);
    for (Index i = 0; i < data.features.rows(); ++i) {
        out << (data.labels(i) > 0 ? "1" : "-1");
        for (Index j = 0; j < data.features.cols(); ++j) out << ',' << data.features(i, j);
        out << '\n';
    }
}

}  // namespace pathode
