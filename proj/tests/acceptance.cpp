// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Point sets use the same streams as the CLI, so `htess <experiment> --seed 1` reproduces each line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "htess/experiments.hpp"
#include "htess/report.hpp"

using namespace htess;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Outcome {
    bool pass = false;
    std::string detail;
};

PointSet sample_points(std::uint64_t seed, std::size_t n, std::size_t count, bool sphere) {
    StreamHandle stream(seed, "points");
    std::vector<double> coords;
    for (std::size_t i = 0; i < count; ++i) {
        const auto v = sphere ? sample_sphere(stream, n) : sample_ball(stream, n);
        coords.insert(coords.end(), v.begin(), v.end());
    }
    return PointSet(n, std::move(coords));
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

// Criteria 1 and 2 share one grid run.
SepProbReport& sep_prob_grid() {
    static SepProbReport report = [] {
        const std::vector<double> lambdas{0.5, 1.0, 2.0};
        const auto grid = decimal_grid(-30, 30, 10);
        return run_sep_prob_grid(lambdas, grid, 1000000, kSeed);
    }();
    return report;
}

Outcome criterion1() {
    const auto& r = sep_prob_grid();
    double worst = 0;
    for (const auto& row : r.rows) {
        worst = std::max(worst, std::abs(row.monte_carlo - row.exact) / row.tolerance);
    }
    return {r.failures == 0, fmt("%zu/%zu grid points outside 4 sd + 1e-6, worst |mc - exact| / tol = %.3f",
                                 r.failures, r.rows.size(), worst)};
}

Outcome criterion2() {
    const auto& r = sep_prob_grid();
    bool pinned = false;
    for (const auto& row : r.rows) {
        if (row.lambda == 1.0 && row.a == -2.0 && row.b == 2.0) {
            pinned = row.lemma_lhs == 2.0 && row.lemma_rhs == 2.0;
        }
    }
    return {r.lemma_failures == 0 && r.lemma_equalities > 0 && pinned,
            fmt("%zu violations, %zu equality points, (lambda, a, b) = (1, -2, 2) lhs = rhs = 2: %s", r.lemma_failures,
                r.lemma_equalities, pinned ? "yes" : "no")};
}

Outcome criterion3() {
    const auto r = run_kappa_calibration(10000, 8, 200, kSeed);
    return {std::abs(r.mean - 1.0) <= 0.01, fmt("mean %.6f (se %.2e) over %zu matrices, tolerance 0.01", r.mean,
                                                r.std_error, r.matrices)};
}

Outcome criterion4() {
    const auto points = sample_points(kSeed, 12, 150, false);
    std::vector<std::size_t> grid;
    for (int e = 6; e <= 14; ++e) grid.push_back(std::size_t{1} << e);
    const double slack = 2.0 / std::sqrt(20.0);

    // Default constants (c1 = 1) for the record; the criterion is judged at the calibrated c1 = 2.
    const auto plain = run_sweep(points, 0.2, grid, 20, kSeed, PlannerConstants{});
    double plain_best = 0;
    for (double v : plain.success_rate) plain_best = std::max(plain_best, v);

    const auto curve = run_sweep(points, 0.2, grid, 20, kSeed, PlannerConstants{1.0, 2.0, 1.0});
    const std::size_t m_star = sweep_threshold(curve, 0.9);
    std::ostringstream rates;
    for (std::size_t i = 0; i < grid.size(); ++i) rates << (i ? " " : "") << curve.success_rate[i];
    const bool monotone = nondecreasing_within(curve.success_rate, slack);
    return {monotone && m_star != 0,
            fmt("c1 = 2, lambda = %.4f: rates [%s], nondecreasing within %.3f: %s, m* = %zu; "
                "c1 = 1 best rate %.2f",
                curve.lambda, rates.str().c_str(), slack, monotone ? "yes" : "no", m_star, plain_best)};
}

Outcome criterion5() {
    const double delta = 0.05, lambda = 0.05;
    const auto m = static_cast<std::size_t>(std::ceil(20.0 * lambda / delta));
    const auto r = run_minimal_shift(1.0, delta, lambda, m, 200, kSeed);
    return {r.failure_frequency >= 0.8,
            fmt("m = %zu, failure frequency %.3f over %zu trials (need >= 0.8)", m, r.failure_frequency, r.trials)};
}

Outcome criterion6() {
    const auto r = run_order_stats(1000, 1.0, 100, 1000, kSeed);
    return {r.frequency >= 0.99, fmt("frequency %.3f over %zu trials (need >= 0.99)", r.frequency, r.trials)};
}

Outcome criterion7() {
    const auto k = sample_points(kSeed, 200, 4000, true);
    const auto r = run_dvoretzky_containment(k, 3, 2000, 50, kSeed);
    const bool sigma = r.max_sigma_rel_error <= 0.05;
    const bool floor = r.min_ratio >= 0.5;
    const double spread = r.max_ratio / r.min_ratio;
    const bool conc = spread <= 1.5;
    return {sigma && floor && conc,
            fmt("(a) max |inradius - sigma_min| / sigma_min = %.3f (need <= 0.05): %s; "
                "(b) min inradius / width = %.3f (need >= 0.5): %s; (c) max/min = %.3f (need <= 1.5): %s; "
                "width %.3f, d* = %.2f",
                r.max_sigma_rel_error, sigma ? "pass" : "FAIL", r.min_ratio, floor ? "pass" : "FAIL", spread,
                conc ? "pass" : "FAIL", r.width.mean, r.dvoretzky_dim)};
}

Outcome criterion8() {
    CounterexampleConfig config;
    const auto r = run_counterexample(config, kSeed);
    return {r.separation >= 0.5,
            fmt("n = %zu, |E sample| = %zu, lambda = %.4f, width %.3f; m_low = %zu (k = %zu) failure %.2f; "
                "m_high = %zu (k = %zu) failure %.2f [scan %.2f, witness %.2f]; separation %.2f (need >= 0.5)",
                r.n, r.points, r.lambda, r.width.mean, r.m_low, r.low.k, r.low.failure_rate, r.m_high, r.high.k,
                r.high.failure_rate, r.high.scan_failure_rate, r.high.witness_failure_rate, r.separation)};
}

Outcome criterion9() {
    auto stream = derive_stream(kSeed, "acceptance/oracle");
    const auto a = sample_gaussian_matrix(stream, 64, 8);
    const auto x = sample_ball(stream, 8);
    const auto y = sample_ball(stream, 8);
    const auto r = run_oracle_consistency(a, x, y, 1.0, 1000, kSeed);
    return {r.pass, fmt("expected %.4f, mc mean %.4f, se %.4f, |diff| / se = %.2f", r.expected, r.mc_mean,
                        r.std_error, std::abs(r.mc_mean - r.expected) / r.std_error)};
}

Outcome criterion10() {
    const auto points = sample_points(kSeed, 12, 150, false);

    // Sketch file round trip.
    auto plan = plan_parameters(points, 0.2, PlannerConstants{}, 0.0, 0.0);
    plan.m = 1000;
    const auto set = sketch_points(points, plan, kSeed);
    const auto bytes = serialize_sketch_set(set);
    const bool round_trip = deserialize_sketch_set(bytes) == set && serialize_sketch_set(deserialize_sketch_set(bytes)) == bytes;

    // Reports at fixed seed, two runs and two thread counts.
    const std::vector<std::size_t> grid{64, 256, 1024};
    const auto sweep = [&](std::size_t threads) {
        return render_report(run_sweep(points, 0.2, grid, 10, kSeed, {}, threads), ReportFormat::json);
    };
    const auto minshift = [&](std::size_t threads) {
        return render_report(run_minimal_shift(1.0, 0.05, 0.05, 20, 200, kSeed, threads), ReportFormat::csv);
    };
    const auto orderstats = [&](std::size_t threads) {
        return render_report(run_order_stats(1000, 1.0, 100, 200, kSeed, threads), ReportFormat::json);
    };
    const auto kappa = [&](std::size_t threads) {
        return render_report(run_kappa_calibration(2000, 8, 20, kSeed, threads), ReportFormat::json);
    };
    const auto dvo = [&](std::size_t threads) {
        return render_report(run_dvoretzky_containment(sample_points(kSeed, 20, 300, true), 3, 200, 6, kSeed, 500,
                                                       threads),
                             ReportFormat::json);
    };
    const auto b1 = [&](std::size_t threads) {
        return render_report(
            run_b1_separation(separated_sphere_sample(10, 20, 0.5, StreamHandle(kSeed, "points")), 0.3, 30, 20,
                              kSeed, threads),
            ReportFormat::json);
    };
    std::size_t checked = 0, mismatched = 0;
    for (const auto& run : std::vector<std::function<std::string(std::size_t)>>{sweep, minshift, orderstats, kappa,
                                                                                dvo, b1}) {
        const auto reference = run(1);
        for (std::size_t threads : {1, 2, 4}) {
            ++checked;
            mismatched += run(threads) == reference ? 0 : 1;
        }
    }
    return {round_trip && mismatched == 0,
            fmt("sketch round trip byte-exact: %s (%zu bytes); %zu/%zu report reruns across 1, 2, 4 threads differ; "
                "invariant property tests run under the test_* ctest targets",
                round_trip ? "yes" : "no", bytes.size(), mismatched, checked)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
        {"exact separation probability vs Monte Carlo", criterion1},
        {"separation bound holds with equality somewhere", criterion2},
        {"kappa calibration", criterion3},
        {"desk-scale tessellation sweep", criterion4},
        {"minimal shift", criterion5},
        {"order statistics", criterion6},
        {"Dvoretzky containment", criterion7},
        {"conjecture falsification", criterion8},
        {"oracle vs embedding consistency", criterion9},
        {"engineering reproducibility", criterion10},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %2zu %s  %s: %s [%.1f s]\n", i + 1, out.pass ? "PASS" : "FAIL", criteria[i].first,
                    out.detail.c_str(), secs);
        std::fflush(stdout);
        failed += out.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
