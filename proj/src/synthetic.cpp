#include "pathode/dataset.hpp"

#include "pathode/random.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace pathode {

std::pair<Matrix, Vector> synthetic_quadratic(Index n, Index p, std::uint64_t seed) {
    if (n < 1 || p < 1) throw InvalidArgument("synthetic quadratic needs n, p >= 1");
    CounterRng rng(seed);
    Matrix A(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) A(i, j) = rng.normal();
    Vector b(n);
    for (Index i = 0; i < n; ++i) b(i) = rng.normal();
    return {A, b};
}

Dataset synthetic_logistic(Index n, Index p, std::uint64_t seed) {
    if (n < 1 || p < 1) throw InvalidArgument("synthetic logistic needs n, p >= 1");
    CounterRng rng(seed);
    Vector w(p);
    const double scale = 1.0 / std::sqrt(static_cast<double>(p));
    for (Index j = 0; j < p; ++j) w(j) = scale * rng.normal();
    Dataset d;
    d.features.resize(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) d.features(i, j) = rng.normal();
    d.labels.resize(n);
    for (Index i = 0; i < n; ++i) {
        const double z = d.features.row(i).dot(w);
        const double prob = 1.0 / (1.0 + std::exp(-z));
        d.labels(i) = rng.uniform() < prob ? 1.0 : -1.0;
    }
    return d;
}

MomentData parse_moment_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("moment JSON: ") + e.what());
    }
    auto vec = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_array()) throw InvalidArgument(std::string("moment JSON: missing array '") + key + "'");
        const auto& a = j[key];
        Vector v(static_cast<Index>(a.size()));
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!a[i].is_number()) throw InvalidArgument(std::string("moment JSON: non-number in '") + key + "'");
            v(static_cast<Index>(i)) = a[i].get<double>();
        }
        return v;
    };
    MomentData d;
    d.w = vec("w");
    d.x_true = vec("x_true");
    if (!j.contains("n_moments") || !j["n_moments"].is_number_integer()) {
        throw InvalidArgument("moment JSON: missing integer 'n_moments'");
    }
    d.n_moments = j["n_moments"].get<int>();
    if (d.w.size() != d.x_true.size()) throw InvalidArgument("moment JSON: w and x_true differ in length");
    return d;
}

MomentData load_moment_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open moment file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_moment_json(ss.str());
}

std::string moment_json(const MomentData& data) {
    nlohmann::json j;
    j["w"] = std::vector<double>(data.w.data(), data.w.data() + data.w.size());
    j["x_true"] = std::vector<double>(data.x_true.data(), data.x_true.data() + data.x_true.size());
    j["n_moments"] = data.n_moments;
    return j.dump(2) + "\n";
}

}  // namespace pathode
