#include "helpers.hpp"

#include "pathode/commands.hpp"
#include "pathode/dataset.hpp"
#include "pathode/theory.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

using namespace pathode;
using nlohmann::json;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

CliResult cli(std::initializer_list<std::string> args) {
    std::vector<std::string> storage{"pathode"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : storage) argv.push_back(s.c_str());
    std::ostringstream out, err;
    CliResult r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "pathode_bench_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        bool quoted = false;
        for (char ch : line) {
            if (ch == '"') {
                quoted = !quoted;
            } else if (ch == ',' && !quoted) {
                cells.push_back(cell);
                cell.clear();
            } else {
                cell += ch;
            }
        }
        cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

// Enough of JSON Schema for the shipped report schema.
class MiniValidator {
public:
    explicit MiniValidator(json root) : root_(std::move(root)) {}

    std::vector<std::string> validate(const json& doc, const std::string& def) const {
        std::vector<std::string> errors;
        check(doc, root_["definitions"][def], "$", errors);
        return errors;
    }

private:
    static bool type_ok(const json& v, const std::string& t) {
        if (t == "object") return v.is_object();
        if (t == "array") return v.is_array();
        if (t == "string") return v.is_string();
        if (t == "integer") return v.is_number_integer();
        if (t == "number") return v.is_number();
        if (t == "boolean") return v.is_boolean();
        if (t == "null") return v.is_null();
        return false;
    }

    void check(const json& v, const json& s, const std::string& at, std::vector<std::string>& errors) const {
        if (s.contains("$ref")) {
            const std::string ref = s["$ref"];
            check(v, root_["definitions"][ref.substr(ref.rfind('/') + 1)], at, errors);
            return;
        }
        if (s.contains("type")) {
            bool ok = false;
            if (s["type"].is_array()) {
                for (const auto& t : s["type"]) ok = ok || type_ok(v, t);
            } else {
                ok = type_ok(v, s["type"]);
            }
            if (!ok) {
                errors.push_back(at + ": wrong type");
                return;
            }
        }
        if (s.contains("const") && v != s["const"]) errors.push_back(at + ": const mismatch");
        if (s.contains("enum")) {
            bool found = false;
            for (const auto& e : s["enum"]) found = found || e == v;
            if (!found) errors.push_back(at + ": not in enum");
        }
        if (s.contains("minimum") && v.is_number() && v.get<double>() < s["minimum"].get<double>()) {
            errors.push_back(at + ": below minimum");
        }
        if (v.is_object()) {
            if (s.contains("required")) {
                for (const auto& key : s["required"]) {
                    if (!v.contains(key.get<std::string>())) errors.push_back(at + ": missing " + key.get<std::string>());
                }
            }
            const json props = s.value("properties", json::object());
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (props.contains(it.key())) {
                    check(it.value(), props[it.key()], at + "." + it.key(), errors);
                } else if (s.contains("additionalProperties") && s["additionalProperties"] == false) {
                    errors.push_back(at + ": unexpected " + it.key());
                }
            }
        }
        if (v.is_array() && s.contains("items")) {
            for (std::size_t i = 0; i < v.size(); ++i) check(v[i], s["items"], at + "[" + std::to_string(i) + "]", errors);
        }
    }

    json root_;
};

MiniValidator schema() {
    std::ifstream in(PATHODE_SCHEMA_PATH);
    REQUIRE(in.good());
    return MiniValidator(json::parse(in));
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("run reports the oracle counts of exact euler") {
    CliResult r = cli({"run", "--problem", "quadratic", "--synthetic", "n=30,p=20,seed=1", "--method", "euler", "--K",
                       "200", "--lambda-min", "0.01", "--lambda-max", "10"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["status"] == "ok");
    CHECK(j["K"] == 200);
    CHECK(j["K_source"] == "explicit");
    CHECK(j["counters"]["hess_builds"] == 200);
    CHECK(j["counters"]["linear_solves"] == 200);
    CHECK(j["counters"]["grad_f"] == 200);
    // knot residuals, then knots and midpoints for the accuracy
    CHECK(j["counters"]["metric_evals"] == 201 + 401);
    CHECK(j["problem"]["dim"] == 20);
    CHECK(j["h"].get<double>() == doctest::Approx(1.0 - std::pow(1e-3, 1.0 / 200.0)));
    CHECK(j["init"]["residual"].get<double>() <= 1e-12);
}

TEST_CASE("cg runs default delta to a quarter of eps") {
    CliResult r = cli({"run", "--problem", "quadratic", "--synthetic", "n=30,p=20,seed=1", "--method", "trapezoid-cg",
                       "--eps", "1e-4", "--delta", "auto", "--K", "100"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["delta"].get<double>() == 2.5e-5);
    CHECK(j["counters"]["linear_solves"] == 0);
    CHECK(j["counters"]["hessvec"].get<std::int64_t>() >= j["counters"]["cg_iters_total"].get<std::int64_t>());
    CliResult explicit_delta = cli({"run", "--method", "euler-cg", "--delta", "1e-3", "--K", "10"});
    REQUIRE(explicit_delta.code == 0);
    CHECK(json::parse(explicit_delta.out)["delta"].get<double>() == 1e-3);
}

TEST_CASE("identical flags give identical reports apart from wall time") {
    auto once = [] {
        CliResult r = cli({"run", "--problem", "logistic", "--synthetic", "n=60,p=5,seed=4", "--method", "rk4", "--K",
                           "30", "--lambda-min", "0.01", "--lambda-max", "10"});
        REQUIRE(r.code == 0);
        json j = json::parse(r.out);
        j.erase("wall_time_seconds");
        return j.dump();
    };
    CHECK(once() == once());
}

TEST_CASE("run without K uses the theoretical K") {
    CliResult r = cli({"run", "--problem", "quadratic", "--synthetic", "n=12,p=4,seed=2", "--method", "trapezoid",
                       "--eps", "1e-2", "--lambda-min", "0.5", "--lambda-max", "5"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["K_source"] == "theory");
    CHECK(j["passed"] == true);
    CliResult m = cli({"run", "--problem", "moment", "--synthetic", "p=5,seed=1", "--method", "euler", "--eps", "1e-3"});
    CHECK(m.code == 2);
    CHECK(m.err.find("--estimate") != std::string::npos);
}

TEST_CASE("exit codes") {
    CHECK(cli({"run", "--method", "leapfrog", "--K", "10"}).code == 2);
    CHECK(cli({"run", "--K", "10", "--lambda-min", "5", "--lambda-max", "1"}).code == 2);
    CHECK(cli({"run", "--K", "10", "--problem", "quadratic", "--synthetic", "n=3,q=2"}).code == 2);
    CHECK(cli({"run", "--K", "10", "--data", "/nonexistent/file.csv"}).code == 2);
    CHECK(cli({"bogus"}).code == 2);
    // trapezoid cannot realize a lambda ratio of 1e-3 in one step
    CliResult infeasible = cli({"run", "--method", "trapezoid", "--K", "1", "--lambda-min", "0.01", "--lambda-max", "10"});
    CHECK(infeasible.code == 2);
    CHECK(json::parse(infeasible.out)["status"] == "infeasible");
    CliResult stuck = cli({"doubling", "--method", "euler", "--eps", "1e-12", "--K0", "2", "--max-doublings", "1"});
    CHECK(stuck.code == 3);
    CHECK_FALSE(stuck.err.empty());
}

TEST_CASE("doubling") {
    ProblemSpec spec;
    spec.synthetic = "n=30,p=20,seed=1";
    LoadedProblem lp = load_problem(spec);
    RunSettings s;
    s.method = parse_method_choice("trapezoid");
    s.eps = 1e-4;
    s.lambda_min = 0.01;
    s.lambda_max = 10.0;
    const PreparedStart start = prepare_start(lp, s.lambda_max, "newton", s.eps);

    DoublingResult first = execute_doubling(lp, start, s, 4096, 10);
    CHECK(first.passed);
    CHECK(first.runs.size() == 1);

    DoublingResult d = execute_doubling(lp, start, s, 3, 20);
    REQUIRE(d.passed);
    const std::int64_t ratio = d.K_final / 3;
    CHECK(d.K_final % 3 == 0);
    CHECK((ratio & (ratio - 1)) == 0);
    for (std::size_t i = 0; i + 1 < d.runs.size(); ++i) CHECK_FALSE(d.runs[i].passed.value_or(false));

    // smallest passing K, then start one below it
    std::int64_t lo = d.K_final / 2, hi = d.K_final;
    while (hi - lo > 1) {
        const std::int64_t mid = (lo + hi) / 2;
        RunReport r = execute_run(lp, start, s, mid);
        (r.passed.value_or(false) ? hi : lo) = mid;
    }
    DoublingResult two = execute_doubling(lp, start, s, hi - 1, 20);
    CHECK(two.passed);
    CHECK(two.runs.size() == 2);
    CHECK(two.K_final == 2 * (hi - 1));

    CliResult r = cli({"doubling", "--method", "euler", "--eps", "1e-3", "--K0", "5"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["passed"] == true);
    CHECK(j["runs"].size() >= 1);
    CHECK(j["runs"].back()["K"] == j["K_final"]);
}

TEST_CASE("theory command") {
    CliResult r = cli({"theory", "--method", "trapezoid", "--eps", "0.01", "--L", "1", "--G", "1", "--mu", "0",
                       "--sigma", "1", "--lambda-min", "0.01", "--lambda-max", "1"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    BoundReport direct = k_trapezoid(TheoryConstants(0.0, 1.0, 1.0, 1.0, 0.01, 1.0), 0.01);
    CHECK(j["K_required"] == direct.K_required);
    CHECK(j["binding_term"] == direct.binding_term);

    CliResult grid = cli({"theory", "--method", "grid", "--eps", "0.01", "--L", "1", "--G", "1", "--lambda-min", "0.01",
                          "--lambda-max", "1"});
    REQUIRE(grid.code == 0);
    CHECK(json::parse(grid.out)["K_required"] == 4629);

    const auto out = scratch("theory.json");
    CliResult summary = cli({"theory", "--method", "grid", "--eps", "0.01", "--L", "1", "--G", "1", "--lambda-min",
                             "0.01", "--lambda-max", "1", "--out", out.string()});
    CHECK(summary.out.find("K_required=4629") != std::string::npos);
    CHECK(json::parse(slurp(out))["K_required"] == 4629);

    CHECK(cli({"theory", "--method", "trapezoid", "--eps", "0.01"}).code == 2);
    CHECK(cli({"theory", "--method", "euler", "--eps", "0.01", "--L", "1", "--G", "1", "--lambda-min", "0.01",
               "--lambda-max", "1"}).code == 2);

    CliResult est = cli({"theory", "--method", "trapezoid", "--eps", "0.01", "--estimate", "--problem", "quadratic",
                         "--synthetic", "n=30,p=20,seed=1"});
    REQUIRE(est.code == 0);
    json e = json::parse(est.out);
    auto [A, b] = synthetic_quadratic(30, 20, 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(A.transpose() * A);
    const double gram = es.eigenvalues().maxCoeff();
    CHECK(std::abs(e["estimate"]["hess_norm_max"].get<double>() - gram) <= 1e-4 * gram);
    CHECK(e["constants"]["estimated"] == true);
}

TEST_CASE("sweep writes one row per method and eps") {
    const auto out = scratch("sweep.csv");
    CliResult r = cli({"sweep", "--methods", "euler,trapezoid", "--eps-list", "1e-2,1e-3,1e-4", "--problem", "quadratic",
                       "--synthetic", "n=30,p=20,seed=1", "--out", out.string()});
    REQUIRE(r.code == 0);
    auto rows = csv_rows(slurp(out));
    REQUIRE(rows.size() == 7);
    CHECK(rows[0][0] == "method");
    CHECK(rows[0].size() == 14);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].size() == 14);
        CHECK(rows[i][3] == "true");
    }
    CHECK(rows[1][0] == "euler");
    CHECK(rows[4][0] == "trapezoid");

    CliResult bad = cli({"sweep", "--methods", "euler,moonwalk", "--eps-list", "1e-2"});
    CHECK(bad.code == 2);
    CliResult partial = cli({"sweep", "--methods", "euler", "--eps-list", "1e-2,1e-13", "--max-doublings", "6"});
    REQUIRE(partial.code == 0);
    auto prow = csv_rows(partial.out);
    REQUIRE(prow.size() == 3);
    CHECK(prow[1][3] == "true");
    CHECK(prow[2][3] == "false");
    CHECK_FALSE(prow[2][13].empty());
}

TEST_CASE("sweep K scales like 1/sqrt(eps) for the trapezoid") {
    CliResult r = cli({"sweep", "--methods", "trapezoid", "--eps-list", "1e-2,1e-4,1e-6", "--problem", "quadratic",
                       "--synthetic", "n=30,p=20,seed=1"});
    REQUIRE(r.code == 0);
    auto rows = csv_rows(r.out);
    std::vector<double> eps, K;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i][3] == "true");
        eps.push_back(std::stod(rows[i][1]));
        K.push_back(std::stod(rows[i][2]));
    }
    const double s = slope(eps, K);
    MESSAGE("trapezoid K-vs-eps slope " << s);
    CHECK(s == doctest::Approx(-0.5).epsilon(0.3));
}

TEST_CASE("sweep K scales like 1/eps for euler on a logistic problem") {
    CliResult r = cli({"sweep", "--methods", "euler", "--eps-list", "1e-4,1e-5,1e-6", "--problem", "logistic",
                       "--synthetic", "n=100,p=8,seed=3", "--lambda-min", "0.1", "--lambda-max", "10"});
    REQUIRE(r.code == 0);
    auto rows = csv_rows(r.out);
    std::vector<double> eps, K;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i][3] == "true");
        eps.push_back(std::stod(rows[i][1]));
        K.push_back(std::stod(rows[i][2]));
    }
    const double s = slope(eps, K);
    MESSAGE("euler K-vs-eps slope on logistic " << s);
    CHECK(std::abs(s + 1.0) <= 0.25);
}

TEST_CASE("euler on a quadratic is limited by interpolation") {
    // Exact at the knots on quadratics, so only the chord error remains and K ~ eps^-1/2.
    CliResult r = cli({"sweep", "--methods", "euler", "--eps-list", "1e-2,1e-4,1e-6", "--problem", "quadratic",
                       "--synthetic", "n=30,p=20,seed=1"});
    REQUIRE(r.code == 0);
    auto rows = csv_rows(r.out);
    std::vector<double> eps, K;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        eps.push_back(std::stod(rows[i][1]));
        K.push_back(std::stod(rows[i][2]));
    }
    const double s = slope(eps, K);
    MESSAGE("euler K-vs-eps slope on quadratic " << s);
    CHECK(std::abs(s + 0.5) <= 0.15);
}

TEST_CASE("csv dataset loader") {
    std::istringstream ok("label,a,b\n1,0.5,2\n-1,1.5,3\n1,2.5,7\n");
    Dataset d = parse_csv_dataset(ok, "ok.csv");
    CHECK(d.features.rows() == 3);
    CHECK(d.features.cols() == 2);
    CHECK(d.labels(1) == -1.0);
    CHECK(d.features(2, 1) == 7.0);

    std::istringstream bad("label,a\n1,0.5\n0,1.5\n");
    try {
        parse_csv_dataset(bad, "bad.csv");
        FAIL("expected a parse error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("bad.csv:3") != std::string::npos);
    }
    std::istringstream ragged("1,0.5,1\n-1,2\n");
    CHECK_THROWS_AS(parse_csv_dataset(ragged, "ragged.csv"), InvalidArgument);
    std::istringstream junk("1,abc\n");
    CHECK_THROWS_AS(parse_csv_dataset(junk, "junk.csv"), InvalidArgument);

    const auto path = scratch("std.csv");
    {
        std::ofstream f(path);
        f << "y,x1,x2\n1,1,10\n-1,2,30\n1,3,20\n-1,6,0\n";
    }
    Dataset s = load_csv_dataset(path.string(), true);
    for (Index j = 0; j < s.features.cols(); ++j) {
        CHECK(std::abs(s.features.col(j).mean()) <= 1e-12);
        const double var = (s.features.col(j).array() - s.features.col(j).mean()).square().sum() / 4.0;
        CHECK(var == doctest::Approx(1.0));
    }
}

TEST_CASE("generator verbs round-trip") {
    CliResult m = cli({"gen-moment", "--p", "6", "--seed", "3", "--n-moments", "4"});
    REQUIRE(m.code == 0);
    MomentData md = parse_moment_json(m.out);
    CHECK(md.n_moments == 4);
    auto [w, x] = generate_synthetic_moment_data(6, 3);
    CHECK(md.w == w);
    CHECK(md.x_true == x);
    CHECK(cli({"gen-moment", "--n-moments", "31"}).code == 2);

    const auto mpath = scratch("moment.json");
    REQUIRE(cli({"gen-moment", "--p", "6", "--seed", "3", "--out", mpath.string()}).code == 0);
    CliResult run = cli({"run", "--problem", "moment", "--data", mpath.string(), "--method", "trapezoid", "--K", "40"});
    CHECK(run.code == 0);

    const auto lpath = scratch("logistic.csv");
    REQUIRE(cli({"gen-logistic", "--n", "25", "--p", "4", "--seed", "2", "--out", lpath.string()}).code == 0);
    Dataset d = load_csv_dataset(lpath.string());
    Dataset ref = synthetic_logistic(25, 4, 2);
    CHECK(d.features.isApprox(ref.features, 1e-15));
    CHECK(d.labels == ref.labels);
    CliResult lr = cli({"run", "--problem", "logistic", "--data", lpath.string(), "--method", "euler", "--K", "20",
                        "--lambda-min", "0.1", "--lambda-max", "10"});
    CHECK(lr.code == 0);
}

TEST_CASE("reports validate against the shipped schema") {
    MiniValidator v = schema();
    const auto path_csv = scratch("path.csv");
    const auto diag_csv = scratch("diag.csv");
    for (const char* method : {"euler", "trapezoid-cg", "rk4", "grid-newton", "grid-agd"}) {
        CliResult r = cli({"run", "--problem", "logistic", "--synthetic", "n=40,p=4,seed=2", "--method", method, "--K",
                           "12", "--eps", "1e-2", "--lambda-min", "0.1", "--lambda-max", "10", "--path-out",
                           path_csv.string(), "--diagnostics-out", diag_csv.string()});
        INFO(method);
        REQUIRE(r.code == 0);
        auto errors = v.validate(json::parse(r.out), "run_report");
        for (const auto& e : errors) MESSAGE(e);
        CHECK(errors.empty());
    }
    CliResult failed = cli({"run", "--method", "trapezoid", "--K", "1"});
    CHECK(v.validate(json::parse(failed.out), "run_report").empty());
    CliResult d = cli({"doubling", "--method", "euler", "--eps", "1e-2"});
    CHECK(v.validate(json::parse(d.out), "doubling_report").empty());
    CliResult t = cli({"theory", "--method", "euler-cg", "--eps", "1e-2", "--estimate"});
    REQUIRE(t.code == 0);
    CHECK(v.validate(json::parse(t.out), "bound_report").empty());

    json broken = json::parse(failed.out);
    broken["counters"]["hess_builds"] = -1;
    broken["surprise"] = 1;
    CHECK(v.validate(broken, "run_report").size() == 2);
}

TEST_CASE("output files and per-stage diagnostics reconcile with the report") {
    const auto path_csv = scratch("trap_path.csv");
    const auto diag_csv = scratch("trap_diag.csv");
    CliResult r = cli({"run", "--problem", "quadratic", "--synthetic", "n=30,p=20,seed=1", "--method", "trapezoid-cg",
                       "--K", "25", "--eps", "1e-3", "--path-out", path_csv.string(), "--diagnostics-out",
                       diag_csv.string()});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["path_path"] == path_csv.string());
    auto path_rows = csv_rows(slurp(path_csv));
    CHECK(path_rows.size() == 27);
    CHECK(path_rows[0].size() == 21);
    auto diag = csv_rows(slurp(diag_csv));
    REQUIRE(diag.size() == 1 + 2 * 25);
    std::int64_t cg = 0;
    for (std::size_t i = 1; i < diag.size(); ++i) cg += std::stoll(diag[i][6]);
    CHECK(cg == j["counters"]["cg_iters_total"].get<std::int64_t>());
}

TEST_CASE("sweep worker count honours the environment") {
    setenv("PATHODE_THREADS", "3", 1);
    CHECK(sweep_workers(10) == 3);
    CHECK(sweep_workers(2) == 2);
    setenv("PATHODE_THREADS", "zero", 1);
    CHECK(sweep_workers(10) >= 1);
    unsetenv("PATHODE_THREADS");
}

}  // TEST_SUITE
