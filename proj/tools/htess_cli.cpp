// Command-line front end: one subcommand per experiment, parameters from a JSON config.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "htess/experiments.hpp"
#include "htess/geometry.hpp"
#include "htess/report.hpp"
#include "htess/sketch.hpp"

namespace fs = std::filesystem;
using htess::Json;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 1;
    std::string config;
    std::string out = ".";
    std::string format = "json";
    std::optional<std::size_t> trials;
    std::size_t threads = 0;
};

/// Reads keys of a JSON object with defaults and rejects keys nobody asked for.
class Params {
public:
    Params(Json object, std::string where) : obj_(std::move(object)), where_(std::move(where)) {
        if (!obj_.is_object()) {
            throw std::invalid_argument(where_ + " must be a JSON object");
        }
    }

    template <typename T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!obj_.contains(key)) {
            return fallback;
        }
        try {
            return obj_.at(key).get<T>();
        } catch (const Json::exception& e) {
            throw std::invalid_argument(where_ + "." + key + ": " + e.what());
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key);
    }

    Json raw(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key) ? obj_.at(key) : Json::object();
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) {
                throw std::invalid_argument("unknown key \"" + it.key() + "\" in " + where_);
            }
        }
    }

private:
    Json obj_;
    std::string where_;
    std::set<std::string> seen_;
};

struct Config {
    Json params = Json::object();
    htess::PlannerConstants constants;
    std::size_t width_draws = 2000;
};

Config load_config(const std::string& path, const std::string& experiment) {
    Config cfg;
    if (path.empty()) {
        return cfg;
    }
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config " + path);
    }
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw std::runtime_error("config " + path + ": " + e.what());
    }
    Params top(doc, "config");
    const auto name = top.get<std::string>("experiment", experiment);
    if (name != experiment) {
        throw std::invalid_argument("config is for experiment \"" + name + "\", not \"" + experiment + "\"");
    }
    cfg.params = top.raw("params");
    Params constants(top.raw("constants"), "config.constants");
    cfg.constants.c0 = constants.get("c0", 1.0);
    cfg.constants.c1 = constants.get("c1", 1.0);
    cfg.constants.c2 = constants.get("c2", 1.0);
    constants.finish();
    Params widths(top.raw("widths"), "config.widths");
    cfg.width_draws = widths.get<std::size_t>("draws", cfg.width_draws);
    widths.finish();
    top.finish();
    return cfg;
}

htess::PointSet load_points(Params& p, std::uint64_t seed, const std::string& default_shape, std::size_t default_n,
                            std::size_t default_count) {
    Params spec(p.raw("points"), "params.points");
    const auto shape = spec.get<std::string>("shape", default_shape);
    const auto path = spec.get<std::string>("path", "");
    const auto n = spec.get<std::size_t>("n", default_n);
    const auto count = spec.get<std::size_t>("count", default_count);
    const auto radius = spec.get("radius", 1.0);
    const auto min_dist = spec.get("min_dist", 0.5);
    spec.finish();

    if (shape == "file") {
        std::ifstream in(path);
        if (!in) {
            throw std::runtime_error("cannot open point file " + path);
        }
        return htess::PointSet(Json::parse(in).get<std::vector<std::vector<double>>>());
    }
    htess::StreamHandle stream(seed, "points");
    if (shape == "separated") {
        return htess::separated_sphere_sample(n, count, min_dist, stream);
    }
    std::vector<double> coords;
    for (std::size_t i = 0; i < count; ++i) {
        auto v = shape == "ball"     ? htess::sample_ball(stream, n)
                 : shape == "sphere" ? htess::sample_sphere(stream, n)
                                     : throw std::invalid_argument("unknown point shape \"" + shape + "\"");
        for (double x : v) {
            coords.push_back(radius * x);
        }
    }
    return htess::PointSet(n, std::move(coords));
}

htess::CounterexampleSpec load_counterexample_spec(Params& p) {
    htess::CounterexampleSpec spec;
    spec.r = p.get("r", spec.r);
    spec.epsilon = p.get("epsilon", spec.epsilon);
    spec.eta = p.get("eta", spec.eta);
    spec.delta = p.get("delta", spec.delta);
    spec.sphere_samples_i = p.get("sphere_samples_i", spec.sphere_samples_i);
    spec.ball_samples_i = p.get("ball_samples_i", spec.ball_samples_i);
    spec.sphere_samples_j = p.get("sphere_samples_j", spec.sphere_samples_j);
    return spec;
}

class Runner {
public:
    Runner(std::string experiment, const GlobalOptions& g) : name_(std::move(experiment)), g_(g) {
        cfg_ = load_config(g.config, name_);
        params_.emplace(cfg_.params, "config.params");
        format_ = htess::parse_format(g.format);
    }

    Params& params() { return *params_; }
    const Config& config() const { return cfg_; }
    std::size_t trials(std::size_t fallback) {
        const auto from_config = params_->get<std::size_t>("trials", fallback);
        return g_.trials.value_or(from_config);
    }

    fs::path path_for(std::string_view ext) const {
        return fs::path(g_.out) / (name_ + "-" + std::to_string(g_.seed) + "." + std::string(ext));
    }

    template <typename Report>
    void emit(const Report& report) {
        params_->finish();
        const std::string text = htess::render_report(report, format_);
        if (g_.out == "-") {
            std::cout << text;
            return;
        }
        fs::create_directories(g_.out);
        const fs::path path = path_for(htess::extension(format_));
        htess::write_text_file(path, text);
        std::cerr << "wrote " << path.string() << "\n";
    }

private:
    std::string name_;
    GlobalOptions g_;
    Config cfg_;
    std::optional<Params> params_;
    htess::ReportFormat format_ = htess::ReportFormat::json;
};

htess::TessellationPlan plan_from(Runner& run, const htess::PointSet& points, double delta, std::uint64_t seed) {
    return htess::plan_for_set(points, delta, run.config().constants, run.config().width_draws,
                               htess::StreamHandle(seed, "plan/width"));
}

void cmd_plan(const GlobalOptions& g) {
    Runner run("plan", g);
    const auto points = load_points(run.params(), g.seed, "ball", 12, 150);
    const double delta = run.params().get("delta", 0.2);
    run.emit(plan_from(run, points, delta, g.seed));
}

void cmd_embed(const GlobalOptions& g) {
    Runner run("embed", g);
    const auto points = load_points(run.params(), g.seed, "ball", 12, 150);
    const double delta = run.params().get("delta", 0.2);
    const auto plan = plan_from(run, points, delta, g.seed);
    const auto set = htess::sketch_points(points, plan, g.seed);
    run.emit(plan);
    if (g.out != "-") {
        std::ofstream out(run.path_for("htsk"), std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot open " + run.path_for("htsk").string());
        }
        htess::write_sketch_set(set, out);
        std::cerr << "wrote " << run.path_for("htsk").string() << "\n";
    }
}

void cmd_verify(const GlobalOptions& g) {
    Runner run("verify", g);
    const auto sketch_path = run.params().get<std::string>("sketch", "");
    std::ifstream in(sketch_path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open sketch file \"" + sketch_path + "\" (set params.sketch)");
    }
    const auto set = htess::read_sketch_set(in);
    // Regenerated points must use the seed the sketch was made with.
    const auto points = load_points(run.params(), set.header.root_seed, "ball", set.header.n, set.codes.size());
    const double delta = run.params().get("delta", 0.2);
    run.emit(htess::verify_sketch_set(set, points, delta));
}

void cmd_sweep(const GlobalOptions& g) {
    Runner run("sweep", g);
    const auto points = load_points(run.params(), g.seed, "ball", 12, 150);
    const double delta = run.params().get("delta", 0.2);
    std::vector<std::size_t> grid;
    for (int e = 6; e <= 14; ++e) {
        grid.push_back(std::size_t{1} << e);
    }
    grid = run.params().get("m_grid", grid);
    const std::size_t trials = run.trials(20);
    run.emit(htess::run_sweep(points, delta, grid, trials, g.seed, run.config().constants, g.threads));
}

void cmd_counterexample(const GlobalOptions& g) {
    Runner run("counterexample", g);
    htess::CounterexampleConfig cfg;
    cfg.spec = load_counterexample_spec(run.params());
    cfg.lambda_constant = run.params().get("lambda_constant", cfg.lambda_constant);
    cfg.high_constant = run.params().get("high_constant", cfg.high_constant);
    cfg.width_draws = run.config().width_draws;
    cfg.seeds = run.trials(50);
    run.emit(htess::run_counterexample(cfg, g.seed, g.threads));
}

void cmd_adversary(const GlobalOptions& g) {
    Runner run("adversary", g);
    auto& p = run.params();
    const auto body_name = p.get<std::string>("body", "counterexample");
    const auto spec = load_counterexample_spec(p);
    const double lambda =
        p.get("lambda_constant", 1.0) * htess::sqrt_log_clamped(std::numbers::e / spec.delta);
    const auto m = p.get<std::size_t>("m", 1345);
    const auto k = p.get<std::size_t>("k", 64);
    htess::WitnessBody body = spec;
    std::size_t n = 0;
    if (body_name == "ball") {
        body = htess::BallBody{p.get("radius", 1.0)};
        n = p.get<std::size_t>("n", 2);
    } else if (body_name == "counterexample") {
        htess::validate(spec);
        n = spec.n();
    } else {
        throw std::invalid_argument("unknown body \"" + body_name + "\" (expected counterexample or ball)");
    }
    htess::StreamHandle a_stream(g.seed, "adversary/A");
    htess::StreamHandle tau_stream(g.seed, "adversary/tau");
    const auto a = htess::sample_gaussian_matrix(a_stream, m, n);
    const auto tau = htess::sample_dither(tau_stream, m, lambda);
    run.emit(htess::find_adversarial_pair(a, tau, body, spec.delta, k));
}

void cmd_minshift(const GlobalOptions& g) {
    Runner run("minshift", g);
    auto& p = run.params();
    const double norm_x = p.get("norm_x", 1.0);
    const double delta = p.get("delta", 0.05);
    const double lambda = p.get("lambda", 0.05);
    const auto m = p.get<std::size_t>("m", static_cast<std::size_t>(std::ceil(20.0 * lambda / delta)));
    const std::size_t trials = run.trials(200);
    run.emit(htess::run_minimal_shift(norm_x, delta, lambda, m, trials, g.seed, g.threads));
}

void cmd_orderstats(const GlobalOptions& g) {
    Runner run("orderstats", g);
    auto& p = run.params();
    const auto m = p.get<std::size_t>("m", 1000);
    const double lambda = p.get("lambda", 1.0);
    const auto k = p.get<std::size_t>("k", 100);
    const std::size_t trials = run.trials(1000);
    run.emit(htess::run_order_stats(m, lambda, k, trials, g.seed, g.threads));
}

void cmd_dvoretzky(const GlobalOptions& g) {
    Runner run("dvoretzky", g);
    const auto points = load_points(run.params(), g.seed, "sphere", 200, 4000);
    const auto s = run.params().get<std::size_t>("s", 3);
    const auto directions = run.params().get<std::size_t>("direction_count", 2000);
    const std::size_t trials = run.trials(50);
    run.emit(htess::run_dvoretzky_containment(points, s, directions, trials, g.seed, run.config().width_draws,
                                              g.threads));
}

void cmd_b1(const GlobalOptions& g) {
    Runner run("b1-separate", g);
    const auto points = load_points(run.params(), g.seed, "separated", 40, 64);
    const double delta = run.params().get("delta", 0.3);
    const auto k =
        run.params().get<std::size_t>("k", htess::b1_sample_count(points.dim(), delta, run.config().constants.c1));
    const std::size_t trials = run.trials(100);
    run.emit(htess::run_b1_separation(points, delta, k, trials, g.seed, g.threads));
}

void cmd_sep_prob(const GlobalOptions& g) {
    Runner run("sep-prob", g);
    auto& p = run.params();
    const auto lambdas = p.get("lambdas", std::vector<double>{0.5, 1.0, 2.0});
    const auto lo = p.get("grid_lo", -30);
    const auto hi = p.get("grid_hi", 30);
    const auto divisor = p.get("grid_divisor", 10);
    const auto samples = p.get<std::size_t>("samples", 1000000);
    run.emit(htess::run_sep_prob_grid(lambdas, htess::decimal_grid(lo, hi, divisor), samples, g.seed));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dithered hyperplane tessellation experiments"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--seed", g.seed, "Root seed")->capture_default_str();
    app.add_option("--config", g.config, "JSON config file");
    app.add_option("--out", g.out, "Output directory, or - for stdout")->capture_default_str();
    app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    app.add_option("--trials", g.trials, "Override the trial count");
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();

    struct Command {
        const char* name;
        const char* help;
        void (*run)(const GlobalOptions&);
    };
    const std::vector<Command> commands{
        {"plan", "Planner output (lambda, theta, m) for a point set", cmd_plan},
        {"embed", "Sketch a point set and write the .htsk file", cmd_embed},
        {"verify", "Re-encode points and compare with a sketch file", cmd_verify},
        {"sweep", "Success rate of the distortion bound over an m grid", cmd_sweep},
        {"counterexample", "Failure rates on the block body at m_low and m_high", cmd_counterexample},
        {"adversary", "Small-dither witness search for one (A, tau)", cmd_adversary},
        {"minshift", "Two-point failure with a too-small dither", cmd_minshift},
        {"orderstats", "Small-dither order statistics frequency", cmd_orderstats},
        {"dvoretzky", "Inradius of random s-dimensional projections", cmd_dvoretzky},
        {"b1-separate", "Pair separation by random sign vectors", cmd_b1},
        {"sep-prob", "Exact separation probability against Monte Carlo", cmd_sep_prob},
    };
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->fallthrough();
        sub->callback([fn = c.run, &g] { fn(g); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
