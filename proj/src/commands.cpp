#include "pathode/commands.hpp"

#include "pathode/dataset.hpp"
#include "pathode/moment.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace pathode {

namespace {

std::map<std::string, std::string> parse_synthetic(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw InvalidArgument("synthetic spec entry '" + item + "' is not key=value");
        }
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

std::int64_t spec_int(std::map<std::string, std::string>& spec, const std::string& key, std::int64_t fallback) {
    auto it = spec.find(key);
    if (it == spec.end()) return fallback;
    std::int64_t value = 0;
    try {
        std::size_t used = 0;
        value = std::stoll(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
        throw InvalidArgument("synthetic spec: '" + key + "' must be an integer");
    }
    spec.erase(it);
    return value;
}

void reject_leftovers(const std::map<std::string, std::string>& spec) {
    if (!spec.empty()) throw InvalidArgument("synthetic spec: unknown key '" + spec.begin()->first + "'");
}

std::string describe_synthetic(const std::string& kind, std::int64_t n, std::int64_t p, std::uint64_t seed) {
    std::ostringstream ss;
    ss << "synthetic:" << kind << ":n=" << n << ",p=" << p << ",seed=" << seed;
    return ss.str();
}

double now_seconds() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

std::string format_double(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

void write_diagnostics_csv(const PathRun& run, const std::string& path) {
    std::ostringstream out;
    out << "k,lambda_k,residual_r_k,stage,stage_lambda,direction_norm,cg_iterations,direction_residual,"
           "warm_start_residual,domain_splits\n";
    out << std::setprecision(17);
    for (const StepDiagnostics& d : run.diagnostics) {
        for (std::size_t s = 0; s < d.direction_norms.size(); ++s) {
            out << d.k << ',' << d.lambda_k << ',' << d.residual_r_k << ',' << s + 1 << ',' << d.stage_lambdas[s]
                << ',' << d.direction_norms[s] << ',' << d.cg_iterations[s] << ',' << d.direction_residuals[s]
                << ',' << d.warm_start_residuals[s] << ',' << d.domain_splits << '\n';
        }
    }
    write_file_atomic(path, out.str());
}

}  // namespace

LoadedProblem load_problem(const ProblemSpec& spec) {
    LoadedProblem out;
    out.kind = spec.kind;
    const std::uint64_t default_seed = spec.seed.value_or(1);
    if (!spec.data.empty() && !spec.synthetic.empty()) {
        throw InvalidArgument("give either --data or --synthetic, not both");
    }
    if (spec.kind == "quadratic") {
        out.default_lambda_min = 0.01;
        out.default_lambda_max = 10.0;
        if (!spec.data.empty()) {
            Dataset d = load_csv_dataset(spec.data, spec.standardize, false);
            out.problem = make_quadratic_ridge(std::move(d.features), std::move(d.labels));
            out.source = spec.data;
        } else {
            auto s = parse_synthetic(spec.synthetic);
            const auto n = spec_int(s, "n", 30);
            const auto p = spec_int(s, "p", 20);
            const auto seed = static_cast<std::uint64_t>(spec_int(s, "seed", static_cast<std::int64_t>(default_seed)));
            reject_leftovers(s);
            auto [A, b] = synthetic_quadratic(n, p, seed);
            if (spec.standardize) standardize_columns(A);
            out.problem = make_quadratic_ridge(std::move(A), std::move(b));
            out.source = describe_synthetic("quadratic", n, p, seed);
        }
    } else if (spec.kind == "logistic" || spec.kind == "logistic-reweighted") {
        const bool reweighted = spec.kind == "logistic-reweighted";
        out.default_lambda_min = reweighted ? 0.1 : 1e-4;
        out.default_lambda_max = reweighted ? 10.0 : 1e4;
        Dataset d;
        if (!spec.data.empty()) {
            d = load_csv_dataset(spec.data, spec.standardize, true);
            out.source = spec.data;
        } else {
            auto s = parse_synthetic(spec.synthetic);
            const auto n = spec_int(s, "n", 200);
            const auto p = spec_int(s, "p", 30);
            const auto seed = static_cast<std::uint64_t>(spec_int(s, "seed", static_cast<std::int64_t>(default_seed)));
            reject_leftovers(s);
            d = synthetic_logistic(n, p, seed);
            if (spec.standardize) standardize_columns(d.features);
            out.source = describe_synthetic("logistic", n, p, seed);
        }
        if (reweighted) {
            out.problem = make_logistic_reweighted(d.features, d.labels);
            out.allow_degenerate_sigma = true;
        } else {
            out.problem = make_logistic_ridge(std::move(d.features), std::move(d.labels));
        }
    } else if (spec.kind == "moment") {
        out.default_lambda_min = 1e-2;
        out.default_lambda_max = 1e2;
        MomentData data;
        if (!spec.data.empty()) {
            data = load_moment_json(spec.data);
            out.source = spec.data;
        } else {
            auto s = parse_synthetic(spec.synthetic);
            const auto p = spec_int(s, "p", 50);
            const auto seed = static_cast<std::uint64_t>(spec_int(s, "seed", static_cast<std::int64_t>(default_seed)));
            const auto m = spec_int(s, "n_moments", 5);
            reject_leftovers(s);
            if (p < 1 || p > 100000) throw InvalidArgument("synthetic moment: p out of range");
            auto [w, x_true] = generate_synthetic_moment_data(static_cast<int>(p), seed);
            data.w = std::move(w);
            data.x_true = std::move(x_true);
            data.n_moments = static_cast<int>(m);
            std::ostringstream ss;
            ss << "synthetic:moment:p=" << p << ",seed=" << seed << ",n_moments=" << m;
            out.source = ss.str();
        }
        MomentSystem sys = build_moment_problem(data.w, data.x_true, data.n_moments);
        out.problem = make_moment_matching(std::move(sys.A_prime), std::move(sys.b_prime));
    } else {
        throw InvalidArgument("unknown problem kind '" + spec.kind + "'");
    }
    return out;
}

MethodChoice parse_method_choice(const std::string& name) {
    MethodChoice m;
    m.name = name;
    if (name == "grid-newton" || name == "grid-agd") {
        m.grid = true;
        m.inner = name == "grid-newton" ? InnerSolver::newton : InnerSolver::agd;
        return m;
    }
    std::string base = name;
    const std::string suffix = "-cg";
    if (base.size() > suffix.size() && base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
        m.cg = true;
        base.resize(base.size() - suffix.size());
    }
    m.method = parse_method(base);
    return m;
}

PreparedStart prepare_start(const LoadedProblem& problem, double lambda_max, const std::string& init,
                            std::optional<double> eps) {
    PreparedStart s;
    s.method = init;
    if (init == "newton") {
        const double tol = eps ? std::min(*eps / 4.0, 1e-12) : 1e-12;
        NewtonInit n = initialize_by_newton(*problem.problem, lambda_max, tol, 100, &s.counters);
        s.x0 = std::move(n.x0);
        s.iterations = n.iterations;
        s.residual = n.residual;
        s.at_rounding_floor = n.at_rounding_floor;
    } else if (init == "omega") {
        OmegaInit o = initialize_from_omega(*problem.problem, lambda_max, std::nullopt, &s.counters);
        s.x0 = std::move(o.x0);
        s.iterations = 1;
        s.residual = problem.problem->F_grad(s.x0, lambda_max).norm();
    } else {
        throw InvalidArgument("unknown init '" + init + "' (newton or omega)");
    }
    return s;
}

std::optional<double> effective_delta(const RunSettings& settings) {
    if (settings.method.grid || !settings.method.cg) return std::nullopt;
    if (settings.delta) return settings.delta;
    if (settings.eps) return *settings.eps / 4.0;
    return std::nullopt;
}

RunReport execute_run(const LoadedProblem& problem, const PreparedStart& start, const RunSettings& settings,
                      std::int64_t K) {
    const Problem& p = *problem.problem;
    RunReport rep;
    rep.problem_kind = problem.kind;
    rep.problem_source = problem.source;
    rep.dim = p.dim();
    rep.method = settings.method.name;
    rep.K = K;
    rep.eps_target = settings.eps;
    rep.delta = effective_delta(settings);
    rep.lambda_min = settings.lambda_min;
    rep.lambda_max = settings.lambda_max;
    rep.init_method = start.method;
    rep.init_residual = start.residual;
    rep.init_iterations = start.iterations;
    rep.init_counters = start.counters;
    if (start.at_rounding_floor) {
        rep.warnings.push_back("initializer stopped at its rounding floor above the requested tolerance");
    }
    if (problem.allow_degenerate_sigma && p.info().sigma_degenerate) {
        rep.warnings.push_back("regularizer is not strongly convex; bounds do not apply");
    }
    if (rep.dim > 0 && settings.method.cg && !rep.delta) {
        rep.status = "failed";
        rep.error = "cg methods need --delta or --eps";
        return rep;
    }
    if (K < 1 || K > INT_MAX) {
        rep.status = "infeasible";
        rep.error = "K out of range";
        return rep;
    }
    const double t0 = now_seconds();

    auto finish_path = [&](const KnotPath& path) {
        rep.accuracy_midpoint = accuracy_midpoint(p, path, &rep.counters);
        double worst = 0.0;
        for (const PathKnot& k : path.knots()) worst = std::max(worst, k.residual);
        rep.knot_residual_max = worst;
        if (settings.eps) rep.passed = *rep.accuracy_midpoint <= *settings.eps;
        if (settings.path_out) {
            std::ostringstream csv;
            write_path_csv(path, csv);
            write_file_atomic(*settings.path_out, csv.str());
            rep.path_path = settings.path_out;
        }
    };

    if (settings.method.grid) {
        GridSearchConfig cfg;
        cfg.num_points = static_cast<int>(K);
        cfg.inner_solver = settings.method.inner;
        cfg.inner_tol = settings.eps ? *settings.eps / 2.0 : settings.inner_tol;
        cfg.lambda_min = settings.lambda_min;
        cfg.lambda_max = settings.lambda_max;
        cfg.allow_degenerate_sigma = problem.allow_degenerate_sigma;
        if (K < 2) {
            rep.status = "infeasible";
            rep.error = "grid search needs K >= 2";
            return rep;
        }
        rep.h = 1.0 - std::pow(settings.lambda_min / settings.lambda_max, 1.0 / static_cast<double>(K - 1));
        try {
            GridRun run = solve_grid(p, start.x0, cfg);
            rep.counters = run.counters;
            std::int64_t inner = 0;
            for (const GridPointStat& s : run.points) inner += s.inner_iterations;
            rep.grid_inner_iterations = inner;
            finish_path(run.path());
        } catch (const GridFailure& e) {
            rep.status = "failed";
            rep.error = e.what();
            rep.counters = e.partial().counters;
        } catch (const InvalidArgument& e) {
            rep.status = "infeasible";
            rep.error = e.what();
        } catch (const Error& e) {
            rep.status = "failed";
            rep.error = e.what();
        }
        rep.wall_time_seconds = now_seconds() - t0;
        return rep;
    }

    StepperConfig cfg;
    cfg.method = settings.method.method;
    cfg.direction_mode = settings.method.cg ? DirectionMode::cg : DirectionMode::exact;
    cfg.delta = rep.delta.value_or(0.0);
    cfg.K = static_cast<int>(K);
    cfg.lambda_min = settings.lambda_min;
    cfg.lambda_max = settings.lambda_max;
    cfg.record_diagnostics = settings.diagnostics_out.has_value();
    cfg.allow_degenerate_sigma = problem.allow_degenerate_sigma;
    try {
        cfg.validate();
        rep.h = cfg.h();
    } catch (const InvalidArgument& e) {
        rep.status = "infeasible";
        rep.error = e.what();
        return rep;
    }
    try {
        PathRun run = run_path(p, start.x0, cfg);
        rep.counters = run.counters;
        rep.domain_guard_events = run.domain_guard_events;
        if (run.domain_guard_events > 0) rep.warnings.push_back("domain guard split some steps");
        if (settings.diagnostics_out) {
            write_diagnostics_csv(run, *settings.diagnostics_out);
            rep.diagnostics_path = settings.diagnostics_out;
        }
        finish_path(PiecewiseLinearPath(run.knots));
    } catch (const PathFailure& e) {
        rep.status = "failed";
        rep.error = e.what();
        rep.counters = e.partial().counters;
        rep.domain_guard_events = e.partial().domain_guard_events;
    } catch (const Error& e) {
        rep.status = "failed";
        rep.error = e.what();
    }
    rep.wall_time_seconds = now_seconds() - t0;
    return rep;
}

DoublingResult execute_doubling(const LoadedProblem& problem, const PreparedStart& start,
                                const RunSettings& settings, std::int64_t K0, int max_doublings) {
    if (K0 < 1) throw InvalidArgument("K0 must be >= 1");
    if (!settings.eps) throw InvalidArgument("doubling needs eps");
    if (max_doublings < 0) throw InvalidArgument("max_doublings must be >= 0");
    DoublingResult out;
    std::int64_t K = K0;
    for (int i = 0; i <= max_doublings; ++i) {
        RunReport rep = execute_run(problem, start, settings, K);
        rep.K_source = "doubling";
        const bool ok = rep.status == "ok" && rep.passed.value_or(false);
        out.runs.push_back(std::move(rep));
        out.K_final = K;
        if (ok) {
            out.passed = true;
            break;
        }
        if (K > INT_MAX / 2) break;
        K *= 2;
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    static std::atomic<unsigned> counter{0};
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(counter.fetch_add(1)) + "." +
           std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidArgument("cannot write '" + path + "'");
        out << content;
        out.flush();
        if (!out) throw InvalidArgument("write to '" + path + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw InvalidArgument("cannot move output into place at '" + path + "': " + ec.message());
    }
}

int sweep_workers(std::size_t rows) {
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("PATHODE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) workers = static_cast<int>(std::min<long>(v, 1024));
    }
    return std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::size_t>(rows, 1))));
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct CommonArgs {
    ProblemSpec problem;
    std::string method = "euler";
    double eps = 0.0;
    std::int64_t K = 0;
    std::string delta = "auto";
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    std::uint64_t seed = 1;
    std::string out;
    std::string path_out;
    std::string diagnostics_out;
    bool estimate = false;
    int estimate_samples = 64;
    std::string init = "newton";
    std::int64_t max_K = 100000;
    int max_doublings = 20;
    double inner_tol = 1e-8;

    CLI::Option* eps_opt = nullptr;
    CLI::Option* K_opt = nullptr;
    CLI::Option* lmin_opt = nullptr;
    CLI::Option* lmax_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* delta_opt = nullptr;
};

void add_problem_flags(CLI::App* sub, CommonArgs& a) {
    sub->add_option("--problem", a.problem.kind, "quadratic | logistic | logistic-reweighted | moment")
        ->check(CLI::IsMember({"quadratic", "logistic", "logistic-reweighted", "moment"}));
    sub->add_option("--data", a.problem.data, "CSV dataset (JSON for moment problems)");
    sub->add_option("--synthetic", a.problem.synthetic, "synthetic spec, e.g. n=30,p=20,seed=1");
    sub->add_flag("--standardize", a.problem.standardize, "standardize feature columns");
    a.seed_opt = sub->add_option("--seed", a.seed, "seed for synthetic data and estimation");
    a.lmin_opt = sub->add_option("--lambda-min", a.lambda_min)->check(CLI::PositiveNumber);
    a.lmax_opt = sub->add_option("--lambda-max", a.lambda_max)->check(CLI::PositiveNumber);
    sub->add_option("--init", a.init, "newton | omega")->check(CLI::IsMember({"newton", "omega"}));
}

void add_run_flags(CLI::App* sub, CommonArgs& a) {
    add_problem_flags(sub, a);
    sub->add_option("--method", a.method)
        ->check(CLI::IsMember({"euler", "trapezoid", "rk4", "euler-cg", "trapezoid-cg", "rk4-cg", "grid-newton",
                               "grid-agd"}));
    a.eps_opt = sub->add_option("--eps", a.eps, "target path accuracy")->check(CLI::PositiveNumber);
    a.delta_opt = sub->add_option("--delta", a.delta, "cg residual target or 'auto' (eps/4)");
    sub->add_option("--out", a.out, "JSON report path (stdout when absent)");
    sub->add_option("--path-out", a.path_out, "path CSV output");
    sub->add_option("--diagnostics-out", a.diagnostics_out, "per-step diagnostics CSV");
    sub->add_flag("--estimate", a.estimate, "estimate constants numerically when no certificate exists");
    sub->add_option("--estimate-samples", a.estimate_samples)->check(CLI::PositiveNumber);
    sub->add_option("--inner-tol", a.inner_tol, "grid inner tolerance when --eps is absent")
        ->check(CLI::PositiveNumber);
}

std::optional<double> parse_delta(const CommonArgs& a) {
    if (a.delta == "auto") return std::nullopt;
    double v = 0.0;
    try {
        std::size_t used = 0;
        v = std::stod(a.delta, &used);
        if (used != a.delta.size()) throw std::invalid_argument("delta");
    } catch (const std::exception&) {
        throw InvalidArgument("--delta must be a positive number or 'auto'");
    }
    if (!(v > 0.0)) throw InvalidArgument("--delta must be positive");
    return v;
}

struct Prepared {
    LoadedProblem problem;
    RunSettings settings;
};

Prepared prepare(const CommonArgs& a) {
    ProblemSpec spec = a.problem;
    if (a.seed_opt->count()) spec.seed = a.seed;
    Prepared pr;
    pr.problem = load_problem(spec);
    pr.settings.method = parse_method_choice(a.method);
    if (a.eps_opt && a.eps_opt->count()) pr.settings.eps = a.eps;
    pr.settings.delta = parse_delta(a);
    pr.settings.lambda_min = a.lmin_opt->count() ? a.lambda_min : pr.problem.default_lambda_min;
    pr.settings.lambda_max = a.lmax_opt->count() ? a.lambda_max : pr.problem.default_lambda_max;
    if (!(pr.settings.lambda_min < pr.settings.lambda_max)) {
        throw InvalidArgument("need lambda_min < lambda_max");
    }
    pr.settings.inner_tol = a.inner_tol;
    if (!a.path_out.empty()) pr.settings.path_out = a.path_out;
    if (!a.diagnostics_out.empty()) pr.settings.diagnostics_out = a.diagnostics_out;
    if (pr.settings.method.cg && !pr.settings.delta && !pr.settings.eps) {
        throw InvalidArgument("cg methods need --eps or an explicit --delta");
    }
    return pr;
}

struct ResolvedConstants {
    TheoryConstants constants;
    double f_gap = 0.0;
    std::optional<ConstantEstimate> estimate;
};

std::optional<ResolvedConstants> resolve_constants(const Problem& problem, const Vector& x0, double lmin,
                                                   double lmax, bool estimate, int samples, std::uint64_t seed) {
    const auto gap = certified_f_gap(problem, x0);
    if (auto c = certified_constants(problem, x0, lmin, lmax); c && gap) {
        return ResolvedConstants{*c, *gap, std::nullopt};
    }
    if (!estimate) return std::nullopt;
    EstimateOptions opts;
    opts.sample_count = samples;
    opts.seed = seed;
    ConstantEstimate e = estimate_constants(problem, x0, lmin, lmax, opts);
    ResolvedConstants r{e.constants, gap.value_or(e.f_gap_hat), e};
    return r;
}

BoundReport bound_for(const MethodChoice& m, const TheoryConstants& c, double eps, double f_gap) {
    if (m.grid) return k_grid(c, eps);
    if (m.method == Method::euler) return m.cg ? k_euler_approx(c, eps, f_gap) : k_euler(c, eps, f_gap);
    BoundReport r = m.cg ? k_trapezoid_approx(c, eps) : k_trapezoid(c, eps);
    if (m.method == Method::rk4) r.warnings.push_back("rk4 has no bound of its own; using the trapezoid bound");
    return r;
}

void emit_json(const nlohmann::json& j, const std::string& path, std::ostream& out) {
    const std::string text = j.dump(2) + "\n";
    if (path.empty()) {
        out << text;
    } else {
        write_file_atomic(path, text);
    }
}

int cmd_run(const CommonArgs& a, std::ostream& out, std::ostream& err) {
    Prepared pr = prepare(a);
    const PreparedStart start = prepare_start(pr.problem, pr.settings.lambda_max, a.init, pr.settings.eps);
    std::int64_t K = a.K;
    std::string K_source = "explicit";
    std::vector<std::string> warnings;
    if (!a.K_opt->count()) {
        if (!pr.settings.eps) throw InvalidArgument("run needs --K or --eps");
        auto rc = resolve_constants(*pr.problem.problem, start.x0, pr.settings.lambda_min, pr.settings.lambda_max,
                                    a.estimate, a.estimate_samples, a.seed);
        if (!rc) throw InvalidArgument("no certified constants for this problem; pass --K or --estimate");
        const BoundReport b = bound_for(pr.settings.method, rc->constants, *pr.settings.eps, rc->f_gap);
        K = b.K_required;
        K_source = "theory";
        for (const auto& w : b.warnings) warnings.push_back(w);
        if (K > a.max_K) {
            warnings.push_back("theoretical K " + std::to_string(K) + " capped at " + std::to_string(a.max_K));
            K = a.max_K;
            K_source = "theory-capped";
        }
    }
    RunReport rep = execute_run(pr.problem, start, pr.settings, K);
    rep.K_source = K_source;
    rep.warnings.insert(rep.warnings.begin(), warnings.begin(), warnings.end());
    emit_json(report_json(rep), a.out, out);
    if (rep.status == "infeasible") {
        err << "pathode: " << rep.error.value_or("infeasible K") << "\n";
        return 2;
    }
    if (rep.status != "ok") {
        err << "pathode: " << rep.error.value_or("solver failure") << "\n";
        return 3;
    }
    return 0;
}

int cmd_doubling(const CommonArgs& a, std::ostream& out, std::ostream& err) {
    Prepared pr = prepare(a);
    if (!pr.settings.eps) throw InvalidArgument("doubling needs --eps");
    const PreparedStart start = prepare_start(pr.problem, pr.settings.lambda_max, a.init, pr.settings.eps);
    const std::int64_t K0 = a.K_opt->count() ? a.K : 4;
    DoublingResult d = execute_doubling(pr.problem, start, pr.settings, K0, a.max_doublings);
    nlohmann::json runs = nlohmann::json::array();
    for (const RunReport& r : d.runs) runs.push_back(report_json(r));
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["passed"] = d.passed;
    j["K0"] = K0;
    j["K_final"] = d.K_final;
    j["runs"] = runs;
    emit_json(j, a.out, out);
    if (!d.passed) {
        err << "pathode: doubling stopped at K=" << d.K_final << " without reaching eps\n";
        return 3;
    }
    return 0;
}

struct TheoryArgs {
    CommonArgs common;
    double mu = 0.0, sigma = 1.0, L = 0.0, G = 0.0, f_gap = 0.0;
    CLI::Option *mu_opt = nullptr, *sigma_opt = nullptr, *L_opt = nullptr, *G_opt = nullptr, *f_gap_opt = nullptr;
    std::string method = "euler";
};

int cmd_theory(TheoryArgs& t, std::ostream& out) {
    CommonArgs& a = t.common;
    if (!a.eps_opt->count()) throw InvalidArgument("theory needs --eps");
    const MethodChoice m = t.method == "grid" ? parse_method_choice("grid-newton") : parse_method_choice(t.method);
    nlohmann::json extra;
    std::optional<TheoryConstants> c;
    double f_gap = t.f_gap;
    if (a.estimate) {
        ProblemSpec spec = a.problem;
        if (a.seed_opt->count()) spec.seed = a.seed;
        LoadedProblem lp = load_problem(spec);
        const double lmin = a.lmin_opt->count() ? a.lambda_min : lp.default_lambda_min;
        const double lmax = a.lmax_opt->count() ? a.lambda_max : lp.default_lambda_max;
        const PreparedStart start = prepare_start(lp, lmax, a.init, a.eps);
        EstimateOptions opts;
        opts.sample_count = a.estimate_samples;
        opts.seed = a.seed;
        ConstantEstimate e = estimate_constants(*lp.problem, start.x0, lmin, lmax, opts);
        c = e.constants;
        if (!t.f_gap_opt->count()) f_gap = certified_f_gap(*lp.problem, start.x0).value_or(e.f_gap_hat);
        extra = {{"hess_norm_max", e.hess_norm_max},   {"hess_lipschitz_max", e.hess_lipschitz_max},
                 {"grad_norm_max", e.grad_norm_max},   {"mu_hat", e.mu_hat},
                 {"sigma_hat", e.sigma_hat},           {"f_gap_hat", e.f_gap_hat},
                 {"accepted_samples", e.accepted_samples}, {"reliable", e.reliable},
                 {"notes", e.notes},                   {"problem_source", lp.source}};
    } else {
        if (!t.L_opt->count() || !t.G_opt->count() || !a.lmin_opt->count() || !a.lmax_opt->count()) {
            throw InvalidArgument("theory needs --L, --G, --lambda-min and --lambda-max, or --estimate");
        }
        if (!m.grid && m.method == Method::euler && !t.f_gap_opt->count()) {
            throw InvalidArgument("euler bounds need --f-gap");
        }
        c = TheoryConstants(t.mu, t.sigma, t.L, t.G, a.lambda_min, a.lambda_max);
    }
    const BoundReport b = bound_for(m, *c, a.eps, f_gap);
    nlohmann::json j = bound_json(b);
    if (!extra.is_null()) j["estimate"] = extra;
    if (!m.grid && m.cg) {
        j["informational_total"] = m.method == Method::euler ? cg_euler_complexity_estimate(*c, a.eps, f_gap)
                                                             : cg_trapezoid_complexity_estimate(*c, a.eps);
    }
    if (a.out.empty()) {
        out << j.dump(2) << "\n";
    } else {
        write_file_atomic(a.out, j.dump(2) + "\n");
        out << "K_required=" << b.K_required << " binding_term=" << b.binding_term << "\n";
    }
    return 0;
}

struct SweepArgs {
    CommonArgs common;
    std::vector<std::string> methods;
    std::vector<double> eps_list;
};

int cmd_sweep(SweepArgs& s, std::ostream& out, std::ostream& err) {
    CommonArgs& a = s.common;
    if (s.methods.empty() || s.eps_list.empty()) throw InvalidArgument("sweep needs --methods and --eps-list");
    for (double e : s.eps_list) {
        if (!(e > 0.0)) throw InvalidArgument("--eps-list entries must be positive");
    }
    for (const auto& m : s.methods) (void)parse_method_choice(m);
    ProblemSpec spec = a.problem;
    if (a.seed_opt->count()) spec.seed = a.seed;
    const LoadedProblem lp = load_problem(spec);
    const double lmin = a.lmin_opt->count() ? a.lambda_min : lp.default_lambda_min;
    const double lmax = a.lmax_opt->count() ? a.lambda_max : lp.default_lambda_max;
    const double eps_min = *std::min_element(s.eps_list.begin(), s.eps_list.end());
    const PreparedStart start = prepare_start(lp, lmax, a.init, eps_min);
    const std::int64_t K0 = a.K_opt->count() ? a.K : 4;

    struct Row {
        std::string method;
        double eps;
        std::string line;
    };
    std::vector<Row> rows;
    for (const auto& m : s.methods)
        for (double e : s.eps_list) rows.push_back({m, e, ""});

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < rows.size(); i = next.fetch_add(1)) {
            Row& row = rows[i];
            std::ostringstream line;
            line << std::setprecision(17) << row.method << ',' << row.eps << ',';
            try {
                RunSettings settings;
                settings.method = parse_method_choice(row.method);
                settings.eps = row.eps;
                settings.lambda_min = lmin;
                settings.lambda_max = lmax;
                DoublingResult d = execute_doubling(lp, start, settings, K0, a.max_doublings);
                const RunReport& last = d.runs.back();
                const OracleCounters& c = last.counters;
                line << d.K_final << ',' << (d.passed ? "true" : "false") << ','
                     << (last.accuracy_midpoint ? format_double(*last.accuracy_midpoint) : "") << ',' << c.grad_f
                     << ',' << c.grad_omega << ',' << c.hess_builds << ',' << c.hessvec << ',' << c.linear_solves
                     << ',' << c.cg_iters_total << ',' << c.metric_evals << ',' << d.runs.size() << ',';
                if (!d.passed) line << '"' << last.error.value_or("eps not reached") << '"';
            } catch (const std::exception& e) {
                line << ",false,,,,,,,,,0,\"" << e.what() << '"';
            }
            row.line = line.str();
        }
    };
    const int n_workers = sweep_workers(rows.size());
    std::vector<std::thread> pool;
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::ostringstream csv;
    csv << "method,eps,K,passed,accuracy_midpoint,grad_f,grad_omega,hess_builds,hessvec,linear_solves,"
           "cg_iters_total,metric_evals,runs,error\n";
    for (const Row& r : rows) csv << r.line << '\n';
    if (a.out.empty()) {
        out << csv.str();
    } else {
        write_file_atomic(a.out, csv.str());
    }
    (void)err;
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Regularization path solvers and benchmarks", "pathode"};
    app.require_subcommand(1);

    CommonArgs run_args;
    CLI::App* run = app.add_subcommand("run", "run one method at one K");
    add_run_flags(run, run_args);
    run_args.K_opt = run->add_option("--K", run_args.K, "number of steps (grid points for grid methods)")
                         ->check(CLI::PositiveNumber);
    run->add_option("--max-K", run_args.max_K, "cap for K derived from theory")->check(CLI::PositiveNumber);

    CommonArgs dbl_args;
    CLI::App* dbl = app.add_subcommand("doubling", "double K until the path reaches eps");
    add_run_flags(dbl, dbl_args);
    dbl_args.K_opt = dbl->add_option("--K,--K0", dbl_args.K, "initial K (default 4)")->check(CLI::PositiveNumber);
    dbl->add_option("--max-doublings", dbl_args.max_doublings)->check(CLI::NonNegativeNumber);

    TheoryArgs th_args;
    CLI::App* th = app.add_subcommand("theory", "evaluate iteration bounds");
    add_problem_flags(th, th_args.common);
    th->add_option("--method", th_args.method)
        ->check(CLI::IsMember({"euler", "trapezoid", "rk4", "euler-cg", "trapezoid-cg", "rk4-cg", "grid"}));
    th_args.common.eps_opt = th->add_option("--eps", th_args.common.eps)->check(CLI::PositiveNumber);
    th_args.mu_opt = th->add_option("--mu", th_args.mu)->check(CLI::NonNegativeNumber);
    th_args.sigma_opt = th->add_option("--sigma", th_args.sigma)->check(CLI::PositiveNumber);
    th_args.L_opt = th->add_option("--L", th_args.L)->check(CLI::PositiveNumber);
    th_args.G_opt = th->add_option("--G", th_args.G)->check(CLI::PositiveNumber);
    th_args.f_gap_opt = th->add_option("--f-gap", th_args.f_gap)->check(CLI::NonNegativeNumber);
    th->add_flag("--estimate", th_args.common.estimate);
    th->add_option("--estimate-samples", th_args.common.estimate_samples)->check(CLI::PositiveNumber);
    th->add_option("--out", th_args.common.out);

    SweepArgs sw_args;
    CLI::App* sw = app.add_subcommand("sweep", "doubling runs over methods x eps, as CSV");
    add_problem_flags(sw, sw_args.common);
    sw->add_option("--methods", sw_args.methods)->delimiter(',')->required();
    sw->add_option("--eps-list", sw_args.eps_list)->delimiter(',')->required();
    sw_args.common.K_opt = sw->add_option("--K,--K0", sw_args.common.K)->check(CLI::PositiveNumber);
    sw->add_option("--max-doublings", sw_args.common.max_doublings)->check(CLI::NonNegativeNumber);
    sw->add_option("--out", sw_args.common.out);

    int gm_p = 50, gm_moments = 5;
    std::uint64_t gm_seed = 1;
    std::string gm_out;
    CLI::App* gm = app.add_subcommand("gen-moment", "write a synthetic moment-matching instance as JSON");
    gm->add_option("--p", gm_p)->check(CLI::PositiveNumber);
    gm->add_option("--seed", gm_seed);
    gm->add_option("--n-moments", gm_moments)->check(CLI::PositiveNumber);
    gm->add_option("--out", gm_out);

    std::int64_t gl_n = 569, gl_p = 30;
    std::uint64_t gl_seed = 1;
    std::string gl_out;
    CLI::App* gl = app.add_subcommand("gen-logistic", "write a synthetic logistic dataset as CSV");
    gl->add_option("--n", gl_n)->check(CLI::PositiveNumber);
    gl->add_option("--p", gl_p)->check(CLI::PositiveNumber);
    gl->add_option("--seed", gl_seed);
    gl->add_option("--out", gl_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(run_args, out, err);
        if (*dbl) return cmd_doubling(dbl_args, out, err);
        if (*th) return cmd_theory(th_args, out);
        if (*sw) return cmd_sweep(sw_args, out, err);
        if (*gm) {
            if (gm_moments > kMaxMoments) throw InvalidArgument("--n-moments exceeds " + std::to_string(kMaxMoments));
            auto [w, x_true] = generate_synthetic_moment_data(gm_p, gm_seed);
            MomentData d{std::move(w), std::move(x_true), gm_moments};
            const std::string text = moment_json(d);
            if (gm_out.empty()) out << text; else write_file_atomic(gm_out, text);
            return 0;
        }
        if (*gl) {
            Dataset d = synthetic_logistic(gl_n, gl_p, gl_seed);
            std::ostringstream csv;
            write_csv_dataset(d, csv);
            if (gl_out.empty()) out << csv.str(); else write_file_atomic(gl_out, csv.str());
            return 0;
        }
    } catch (const InvalidArgument& e) {
        err << "pathode: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "pathode: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "pathode: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

}  // namespace pathode
