#include "htess/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "htess/oracle.hpp"
#include "htess/parallel.hpp"

namespace htess {

namespace {

struct Embedding {
    GaussianMatrix a;
    DitherVector tau;
};

Embedding sample_embedding(std::uint64_t seed, const std::string& label, std::size_t m, std::size_t n,
                           double lambda) {
    StreamHandle a_stream(seed, label + "/A");
    StreamHandle tau_stream(seed, label + "/tau");
    Embedding e;
    e.a = sample_gaussian_matrix(a_stream, m, n);
    e.tau = sample_dither(tau_stream, m, lambda);
    return e;
}

Eigen::Map<const RowMatrix> as_matrix(const GaussianMatrix& a) {
    return {a.entries.data(), static_cast<Eigen::Index>(a.rows), static_cast<Eigen::Index>(a.cols)};
}

double median(std::vector<double> values) {
    if (values.empty()) {
        return 0.0;
    }
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

double fraction(std::size_t count, std::size_t total) {
    return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
}

bool sign_bit(double v) { return v >= 0.0; }

}  // namespace

// ---------------------------------------------------------------------------

std::vector<SketchCode> encode_points(const GaussianMatrix& a, const DitherVector& tau, const PointSet& points) {
    if (tau.size() != a.rows) {
        throw std::invalid_argument("encode_points: dither length does not match matrix rows");
    }
    std::vector<SketchCode> codes;
    codes.reserve(points.size());
    if (points.empty()) {
        return codes;
    }
    const RowMatrix proj = project(a, points);
    for (Eigen::Index i = 0; i < proj.rows(); ++i) {
        codes.push_back(encode_projected({proj.row(i).data(), a.rows}, tau));
    }
    return codes;
}

DistortionReport measure_distortion(const PointSet& points, std::span<const SketchCode> codes, double lambda,
                                    double delta) {
    if (codes.size() != points.size()) {
        throw std::invalid_argument("measure_distortion: one code per point required");
    }
    if (!(delta > 0.0)) {
        throw std::invalid_argument("measure_distortion: delta must be positive");
    }
    DistortionReport report;
    report.delta = delta;
    report.lambda = lambda;
    report.bin_width = delta / 10.0;
    report.m = codes.empty() ? 0 : codes.front().bits();
    const std::size_t count = points.size();
    report.pair_count = count * (count + 1) / 2;
    if (count == 0) {
        return report;
    }
    const double scale = distance_scale(lambda, report.m);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = i; j < count; ++j) {
            const double est = scale * static_cast<double>(hamming(codes[i], codes[j]));
            const double err = std::abs(est - distance(points.point(i), points.point(j)));
            const auto bin = static_cast<std::size_t>(err / report.bin_width);
            if (bin >= report.histogram.size()) {
                report.histogram.resize(bin + 1, 0);
            }
            ++report.histogram[bin];
            if (err > report.sup_distortion) {
                report.sup_distortion = err;
                report.witness = {i, j};
            }
        }
    }
    return report;
}

DistortionReport run_embedding_trial(const PointSet& points, const TessellationPlan& plan, std::uint64_t seed,
                                     const std::string& label) {
    if (plan.dim != 0 && plan.dim != points.dim()) {
        throw std::invalid_argument("run_embedding_trial: plan dimension " + std::to_string(plan.dim) +
                                    " does not match point dimension " + std::to_string(points.dim()));
    }
    if (std::abs(plan.radius - points.radius()) > 1e-9 * std::max(1.0, points.radius())) {
        throw std::invalid_argument("run_embedding_trial: plan radius does not match the point set");
    }
    if (points.dim() == 0) {
        throw std::invalid_argument("run_embedding_trial: empty point set");
    }
    const Embedding e = sample_embedding(seed, label, plan.m, points.dim(), plan.lambda);
    const auto codes = encode_points(e.a, e.tau, points);
    return measure_distortion(points, codes, plan.lambda, plan.delta);
}

SweepCurve run_sweep(const PointSet& points, double delta, std::span<const std::size_t> m_grid, std::size_t trials,
                     std::uint64_t seed, const PlannerConstants& constants, std::size_t threads) {
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
        if (m_grid[i] == 0 || (i > 0 && m_grid[i] < m_grid[i - 1])) {
            throw std::invalid_argument("run_sweep: m grid must be positive and ascending");
        }
    }
    const TessellationPlan base = plan_parameters(points, delta, constants, 0.0, 0.0);
    SweepCurve curve;
    curve.delta = delta;
    curve.lambda = base.lambda;
    curve.trials = trials;
    curve.m_values.assign(m_grid.begin(), m_grid.end());

    std::vector<double> sups(m_grid.size() * trials);
    parallel_for(sups.size(), threads, [&](std::size_t idx) {
        const std::size_t mi = idx / trials;
        const std::size_t t = idx % trials;
        TessellationPlan plan = base;
        plan.m = m_grid[mi];
        const std::string label = "sweep/m=" + std::to_string(plan.m) + "/trial=" + std::to_string(t);
        sups[idx] = run_embedding_trial(points, plan, seed, label).sup_distortion;
    });
    for (std::size_t mi = 0; mi < m_grid.size(); ++mi) {
        const auto first = sups.begin() + static_cast<std::ptrdiff_t>(mi * trials);
        std::vector<double> row(first, first + static_cast<std::ptrdiff_t>(trials));
        const auto ok = static_cast<std::size_t>(std::count_if(row.begin(), row.end(), [&](double s) {
            return s <= delta;
        }));
        curve.success_rate.push_back(fraction(ok, trials));
        curve.median_sup.push_back(median(std::move(row)));
    }
    return curve;
}

std::size_t sweep_threshold(const SweepCurve& curve, double level) {
    for (std::size_t i = 0; i < curve.m_values.size(); ++i) {
        if (curve.success_rate[i] >= level) {
            return curve.m_values[i];
        }
    }
    return 0;
}

bool nondecreasing_within(std::span<const double> values, double slack) {
    double best = -std::numeric_limits<double>::infinity();
    for (double v : values) {
        if (v < best - slack) {
            return false;
        }
        best = std::max(best, v);
    }
    return true;
}

// ---------------------------------------------------------------------------

SketchSet sketch_points(const PointSet& points, const TessellationPlan& plan, std::uint64_t seed) {
    if (points.dim() > std::numeric_limits<std::uint32_t>::max() ||
        plan.m > std::numeric_limits<std::uint32_t>::max()) {
        throw std::invalid_argument("sketch_points: n or m does not fit the file header");
    }
    const Embedding e = sample_embedding(seed, "embed", plan.m, points.dim(), plan.lambda);
    SketchSet set;
    set.header.n = static_cast<std::uint32_t>(points.dim());
    set.header.m = static_cast<std::uint32_t>(plan.m);
    set.header.lambda = plan.lambda;
    set.header.root_seed = seed;
    set.codes = encode_points(e.a, e.tau, points);
    return set;
}

VerifyReport verify_sketch_set(const SketchSet& set, const PointSet& points, double delta) {
    if (set.header.n != points.dim() || set.codes.size() != points.size()) {
        throw std::invalid_argument("verify_sketch_set: sketch file has n = " + std::to_string(set.header.n) +
                                    " and " + std::to_string(set.codes.size()) + " codes, points have n = " +
                                    std::to_string(points.dim()) + " and " + std::to_string(points.size()));
    }
    const Embedding e = sample_embedding(set.header.root_seed, "embed", set.header.m, set.header.n,
                                         set.header.lambda);
    const auto fresh = encode_points(e.a, e.tau, points);
    VerifyReport report;
    report.codes = set.codes.size();
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        if (!(fresh[i] == set.codes[i])) {
            ++report.mismatched;
        }
    }
    report.distortion = measure_distortion(points, set.codes, set.header.lambda, delta);
    return report;
}

// ---------------------------------------------------------------------------

std::size_t CounterexampleSpec::n() const {
    const double raw = eta * static_cast<double>(r) / (epsilon * epsilon);
    return static_cast<std::size_t>(std::floor(raw * (1.0 + 1e-9)));
}

void validate(const CounterexampleSpec& spec) {
    if (spec.r == 0) {
        throw std::invalid_argument("counterexample: r must be at least 1");
    }
    if (!(spec.epsilon > 0.0) || !(spec.eta > 0.0) || !(spec.delta > 0.0)) {
        throw std::invalid_argument("counterexample: epsilon, eta and delta must be positive");
    }
    if (!(spec.epsilon < spec.delta / 2.0)) {
        throw std::invalid_argument("counterexample: epsilon must be below delta/2");
    }
    if (spec.n() < spec.r + 1) {
        throw std::invalid_argument("counterexample: n = floor(eta r / eps^2) = " + std::to_string(spec.n()) +
                                    " leaves J empty");
    }
}

bool in_counterexample_body(const CounterexampleSpec& spec, std::span<const double> t, double tol) {
    if (t.size() != spec.n()) {
        return false;
    }
    return norm2(t.first(spec.r)) <= 1.0 + tol && norm2(t.subspan(spec.r)) <= spec.epsilon * (1.0 + tol);
}

PointSet build_counterexample_set(const CounterexampleSpec& spec, StreamHandle stream) {
    validate(spec);
    const std::size_t n = spec.n();
    const std::size_t nj = n - spec.r;

    std::vector<std::vector<double>> i_parts{std::vector<double>(spec.r, 0.0)};
    StreamHandle i_sphere = stream.child("I-sphere");
    for (std::size_t s = 0; s < spec.sphere_samples_i; ++s) {
        i_parts.push_back(sample_sphere(i_sphere, spec.r));
    }
    StreamHandle i_ball = stream.child("I-ball");
    for (std::size_t s = 0; s < spec.ball_samples_i; ++s) {
        i_parts.push_back(sample_ball(i_ball, spec.r));
    }
    std::vector<std::vector<double>> j_parts{std::vector<double>(nj, 0.0)};
    StreamHandle j_sphere = stream.child("J-sphere");
    for (std::size_t s = 0; s < spec.sphere_samples_j; ++s) {
        auto v = sample_sphere(j_sphere, nj);
        for (double& x : v) {
            x *= spec.epsilon;
        }
        j_parts.push_back(std::move(v));
    }

    std::vector<double> coords;
    coords.reserve(i_parts.size() * j_parts.size() * n);
    for (const auto& ip : i_parts) {
        for (const auto& jp : j_parts) {
            coords.insert(coords.end(), ip.begin(), ip.end());
            coords.insert(coords.end(), jp.begin(), jp.end());
        }
    }
    PointSet set(n, std::move(coords));
    for (std::size_t p = 0; p < set.size(); ++p) {
        if (!in_counterexample_body(spec, set.point(p), 1e-12)) {
            throw std::logic_error("build_counterexample_set: sample point left the body");
        }
    }
    return set;
}

double block_support(double g, double h, double epsilon, double rho) {
    double best = 0.0;
    auto consider = [&](double a, double b) {
        if (a < 0.0 || b < 0.0 || a > 1.0 * (1.0 + 1e-15) || b > epsilon * (1.0 + 1e-15) ||
            a * a + b * b > rho * rho * (1.0 + 1e-12)) {
            return;
        }
        best = std::max(best, a * g + b * h);
    };
    consider(std::min(1.0, rho), 0.0);
    consider(0.0, std::min(epsilon, rho));
    const double gn = std::hypot(g, h);
    if (gn > 0.0) {
        consider(rho * g / gn, rho * h / gn);
    }
    if (rho >= epsilon) {
        consider(std::min(1.0, std::sqrt(rho * rho - epsilon * epsilon)), epsilon);
    }
    if (rho >= 1.0) {
        consider(1.0, std::min(epsilon, std::sqrt(rho * rho - 1.0)));
    }
    consider(1.0, epsilon);
    return best;
}

BodyWidths counterexample_widths(const CounterexampleSpec& spec, double radius, std::size_t draws,
                                 StreamHandle stream) {
    validate(spec);
    if (draws < 2) {
        throw std::invalid_argument("counterexample_widths: need at least 2 draws");
    }
    if (!(radius > 0.0)) {
        throw std::invalid_argument("counterexample_widths: radius must be positive");
    }
    const std::size_t n = spec.n();
    std::vector<double> body(draws);
    std::vector<double> local(draws);
    for (std::size_t d = 0; d < draws; ++d) {
        double si = 0.0;
        double sj = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double g = stream.gaussian();
            (j < spec.r ? si : sj) += g * g;
        }
        const double gi = std::sqrt(si);
        const double gj = std::sqrt(sj);
        body[d] = gi + spec.epsilon * gj;
        local[d] = block_support(gi, gj, spec.epsilon, radius);
    }
    return {summarize_draws(body), summarize_draws(local), radius};
}

WitnessResult find_adversarial_pair(const GaussianMatrix& a, const DitherVector& tau, const WitnessBody& body,
                                    double delta, std::size_t k) {
    const std::size_t m = a.rows;
    const std::size_t n = a.cols;
    if (tau.size() != m) {
        throw std::invalid_argument("find_adversarial_pair: dither length does not match matrix rows");
    }
    if (k < 1 || k > m) {
        throw std::invalid_argument("find_adversarial_pair: k = " + std::to_string(k) + " outside [1, m]");
    }
    if (!(delta > 0.0)) {
        throw std::invalid_argument("find_adversarial_pair: delta must be positive");
    }
    if (const auto* spec = std::get_if<CounterexampleSpec>(&body); spec && spec->n() != n) {
        throw std::invalid_argument("find_adversarial_pair: body dimension " + std::to_string(spec->n()) +
                                    " does not match matrix columns " + std::to_string(n));
    }

    WitnessResult result;
    result.k = k;
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(tau.values[x]) < std::abs(tau.values[y]);
    });
    result.coordinates.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));

    if (k > n) {
        result.diagnostic = "restricted row map is rank deficient: k = " + std::to_string(k) + " rows in R^" +
                            std::to_string(n);
        return result;
    }
    RowMatrix rows(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(k));
    for (std::size_t r = 0; r < k; ++r) {
        const auto src = a.row(result.coordinates[r]);
        for (std::size_t j = 0; j < n; ++j) {
            rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = src[j];
        }
        rhs(static_cast<Eigen::Index>(r)) = -tau.values[result.coordinates[r]];
    }
    const Eigen::MatrixXd gram = rows * rows.transpose();
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    Eigen::VectorXd t0;
    if (llt.info() == Eigen::Success) {
        t0 = rows.transpose() * llt.solve(rhs);
    }
    if (llt.info() != Eigen::Success || (rows * t0 - rhs).norm() > 1e-8 * (rhs.norm() + 1.0)) {
        result.diagnostic = "restricted row map is rank deficient";
        return result;
    }
    const double t0_norm = t0.norm();
    if (!(t0_norm > 0.0)) {
        result.diagnostic = "selected dithers are all zero; no direction crosses them";
        return result;
    }

    double limit = std::numeric_limits<double>::infinity();
    if (const auto* spec = std::get_if<CounterexampleSpec>(&body)) {
        const double ni = t0.head(static_cast<Eigen::Index>(spec->r)).norm();
        const double nj = t0.tail(static_cast<Eigen::Index>(n - spec->r)).norm();
        if (ni > 0.0) {
            limit = std::min(limit, 1.0 / ni);
        }
        if (nj > 0.0) {
            limit = std::min(limit, spec->epsilon / nj);
        }
    } else {
        limit = std::get<BallBody>(body).radius / t0_norm;
    }
    const double scale = std::min({2.0, delta / t0_norm, limit});
    result.scale = scale;
    if (!(scale > 1.0)) {
        std::ostringstream msg;
        msg << "least-norm crossing needs scale > 1 within the norm and body budget, got " << scale;
        result.diagnostic = msg.str();
        return result;
    }

    const Eigen::VectorXd t_star = scale * t0;
    const Eigen::VectorXd at = as_matrix(a) * t_star;
    for (std::size_t i : result.coordinates) {
        const double v = at(static_cast<Eigen::Index>(i)) + tau.values[i];
        if (sign_bit(v) == sign_bit(tau.values[i])) {
            result.diagnostic = "coordinate " + std::to_string(i) + " did not flip";
            return result;
        }
    }
    std::size_t flips = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (sign_bit(at(static_cast<Eigen::Index>(i)) + tau.values[i]) != sign_bit(tau.values[i])) {
            ++flips;
        }
    }
    result.found = true;
    result.t_star.assign(t_star.data(), t_star.data() + t_star.size());
    result.norm = t_star.norm();
    result.flips = flips;
    result.distortion = std::abs(distance_scale(tau.lambda, m) * static_cast<double>(flips) - result.norm);
    return result;
}

std::size_t witness_k(std::size_t m, double local_width, double lambda, double delta) {
    const double md = static_cast<double>(m);
    const double raw = std::min(std::pow(md * local_width / lambda, 2.0 / 3.0),
                                local_width * local_width / (delta * delta));
    const auto k = static_cast<std::size_t>(std::llround(std::max(raw, 1.0)));
    return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(1, m / 2));
}

CounterexampleTrial run_counterexample_trial(const CounterexampleSpec& spec, const PointSet& sample, double lambda,
                                             std::size_t m, std::size_t k, std::uint64_t seed,
                                             const std::string& label) {
    const Embedding e = sample_embedding(seed, label, m, spec.n(), lambda);
    CounterexampleTrial trial;
    {
        const auto codes = encode_points(e.a, e.tau, sample);
        trial.scan_sup = measure_distortion(sample, codes, lambda, spec.delta).sup_distortion;
    }
    trial.scan_failed = trial.scan_sup > spec.delta;

    std::vector<std::size_t> ks{std::max<std::size_t>(1, k / 2), k, std::min(2 * k, m)};
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    bool have_best = false;
    for (std::size_t kk : ks) {
        WitnessResult w = find_adversarial_pair(e.a, e.tau, spec, spec.delta, kk);
        if (w.found) {
            trial.witness_found = true;
            trial.witness_failed = trial.witness_failed || w.distortion > spec.delta;
            if (!have_best || !trial.best.found || w.distortion > trial.best.distortion) {
                trial.best = std::move(w);
                have_best = true;
            }
        } else if (!have_best) {
            trial.best = std::move(w);
            have_best = true;
        }
    }
    return trial;
}

CounterexampleReport run_counterexample(const CounterexampleConfig& config, std::uint64_t seed,
                                        std::size_t threads) {
    const CounterexampleSpec& spec = config.spec;
    validate(spec);
    if (!(config.lambda_constant > 0.0) || !(config.high_constant > 0.0) || config.seeds == 0) {
        throw std::invalid_argument("run_counterexample: constants and seed count must be positive");
    }
    CounterexampleReport report;
    report.n = spec.n();
    const PointSet sample = build_counterexample_set(spec, StreamHandle(seed, "counterexample/set"));
    report.points = sample.size();
    report.lambda = config.lambda_constant * sqrt_log_clamped(std::numbers::e / spec.delta);
    const BodyWidths widths =
        counterexample_widths(spec, spec.delta, config.width_draws, StreamHandle(seed, "counterexample/width"));
    report.width = widths.body;
    report.local_width = widths.local;
    const double w2 = widths.body.mean * widths.body.mean;
    const double d = spec.delta;
    report.m_low = static_cast<std::size_t>(std::ceil(w2 / (d * d)));
    report.m_high = static_cast<std::size_t>(std::ceil(config.high_constant * report.lambda * w2 / (d * d * d)));

    auto run_row = [&](std::size_t m) {
        CounterexampleRow row;
        row.m = m;
        row.seeds = config.seeds;
        row.k = witness_k(m, widths.local.mean, report.lambda, d);
        std::vector<CounterexampleTrial> trials(config.seeds);
        parallel_for(config.seeds, threads, [&](std::size_t s) {
            const std::string label = "counterexample/m=" + std::to_string(m) + "/seed=" + std::to_string(s);
            trials[s] = run_counterexample_trial(spec, sample, report.lambda, m, row.k, seed, label);
        });
        std::size_t fail = 0, scan = 0, wit = 0, found = 0;
        std::vector<double> sups;
        for (const auto& t : trials) {
            fail += (t.scan_failed || t.witness_failed) ? 1 : 0;
            scan += t.scan_failed ? 1 : 0;
            wit += t.witness_failed ? 1 : 0;
            found += t.witness_found ? 1 : 0;
            sups.push_back(t.scan_sup);
        }
        row.failure_rate = fraction(fail, config.seeds);
        row.scan_failure_rate = fraction(scan, config.seeds);
        row.witness_failure_rate = fraction(wit, config.seeds);
        row.witness_found_rate = fraction(found, config.seeds);
        row.median_scan_sup = median(std::move(sups));
        return row;
    };
    report.low = run_row(report.m_low);
    report.high = run_row(report.m_high);
    report.separation = report.low.failure_rate - report.high.failure_rate;
    return report;
}

// ---------------------------------------------------------------------------

bool minimal_shift_fails(std::size_t hamming_distance, double lambda, std::size_t m, double delta) {
    const double est = distance_scale(lambda, m) * static_cast<double>(hamming_distance);
    return std::abs(est - 2.0 * delta) > delta;
}

MinimalShiftReport run_minimal_shift(double norm_x, double delta, double lambda, std::size_t m, std::size_t trials,
                                     std::uint64_t seed, std::size_t threads) {
    if (!(delta > 0.0 && delta < 0.25)) {
        throw std::invalid_argument("run_minimal_shift: delta must lie in (0, 1/4)");
    }
    if (!(norm_x >= 4.0 * delta)) {
        throw std::invalid_argument("run_minimal_shift: need ||x|| >= 4 delta");
    }
    if (!(lambda > 0.0) || m == 0) {
        throw std::invalid_argument("run_minimal_shift: lambda and m must be positive");
    }
    const std::vector<double> x{norm_x};
    const std::vector<double> y{(1.0 - 2.0 * delta / norm_x) * norm_x};
    std::vector<char> failed(trials, 0);
    parallel_for(trials, threads, [&](std::size_t t) {
        const Embedding e = sample_embedding(seed, "minshift/trial=" + std::to_string(t), m, 1, lambda);
        const std::size_t dh = hamming(encode(e.a, e.tau, x), encode(e.a, e.tau, y));
        failed[t] = minimal_shift_fails(dh, lambda, m, delta) ? 1 : 0;
    });
    MinimalShiftReport report{norm_x, delta, lambda, m, trials, 0, 0.0};
    report.failures = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
    report.failure_frequency = fraction(report.failures, trials);
    return report;
}

bool order_statistics_hold(const DitherVector& tau, std::size_t k) {
    const std::size_t m = tau.size();
    if (k == 0 || 2 * k > m) {
        throw std::invalid_argument("order_statistics_hold: need 1 <= k <= m/2");
    }
    std::vector<double> mags(m);
    std::transform(tau.values.begin(), tau.values.end(), mags.begin(), [](double v) { return std::abs(v); });
    std::sort(mags.begin(), mags.end());
    for (std::size_t i = (k + 1) / 2; i <= k; ++i) {
        if (i == 0) {
            continue;
        }
        if (mags[i - 1] / tau.lambda > 2.0 * static_cast<double>(i) / static_cast<double>(m)) {
            return false;
        }
    }
    return true;
}

OrderStatsReport run_order_stats(std::size_t m, double lambda, std::size_t k, std::size_t trials,
                                 std::uint64_t seed, std::size_t threads) {
    if (k == 0 || 2 * k > m) {
        throw std::invalid_argument("run_order_stats: need 1 <= k <= m/2");
    }
    std::vector<char> holds(trials, 0);
    parallel_for(trials, threads, [&](std::size_t t) {
        StreamHandle stream(seed, "orderstats/trial=" + std::to_string(t));
        holds[t] = order_statistics_hold(sample_dither(stream, m, lambda), k) ? 1 : 0;
    });
    OrderStatsReport report{m, lambda, k, trials, 0, 0.0};
    report.holding = static_cast<std::size_t>(std::count(holds.begin(), holds.end(), 1));
    report.frequency = fraction(report.holding, trials);
    return report;
}

double direction_net_inradius(const RowMatrix& image, const RowMatrix& directions) {
    if (directions.cols() != image.rows() || directions.rows() == 0 || image.cols() == 0) {
        throw std::invalid_argument("direction_net_inradius: shape mismatch");
    }
    const RowMatrix support = directions * image;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index u = 0; u < support.rows(); ++u) {
        best = std::min(best, support.row(u).cwiseAbs().maxCoeff());
    }
    return best;
}

DvoretzkyReport run_dvoretzky_containment(const PointSet& points, std::size_t s, std::size_t direction_count,
                                          std::size_t trials, std::uint64_t seed, std::size_t width_draws,
                                          std::size_t threads) {
    const std::size_t n = points.dim();
    if (s == 0 || s > n) {
        throw std::invalid_argument("run_dvoretzky_containment: s = " + std::to_string(s) + " outside [1, n = " +
                                    std::to_string(n) + "]");
    }
    if (s > 1 && direction_count == 0) {
        throw std::invalid_argument("run_dvoretzky_containment: direction_count must be positive");
    }
    DvoretzkyReport report;
    report.n = n;
    report.points = points.size();
    report.s = s;
    report.direction_count = s == 1 ? 2 : direction_count;
    report.width = gaussian_width(points, width_draws, StreamHandle(seed, "dvoretzky/width"));
    const double ratio_r = report.width.mean / points.radius();
    report.dvoretzky_dim = ratio_r * ratio_r;
    report.s_within_dimension = static_cast<double>(s) <= report.dvoretzky_dim;

    report.trials.resize(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
        StreamHandle stream(seed, "dvoretzky/trial=" + std::to_string(t));
        StreamHandle a_stream = stream.child("A");
        const GaussianMatrix a = sample_gaussian_matrix(a_stream, s, n);
        const RowMatrix image = as_matrix(a) * points.matrix().transpose();
        RowMatrix dirs;
        if (s == 1) {
            dirs.resize(2, 1);
            dirs << 1.0, -1.0;
        } else {
            StreamHandle d_stream = stream.child("directions");
            dirs.resize(static_cast<Eigen::Index>(direction_count), static_cast<Eigen::Index>(s));
            for (std::size_t u = 0; u < direction_count; ++u) {
                const auto v = sample_sphere(d_stream, s);
                for (std::size_t j = 0; j < s; ++j) {
                    dirs(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(j)) = v[j];
                }
            }
        }
        DvoretzkyTrial& out = report.trials[t];
        out.inradius = direction_net_inradius(image, dirs);
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(as_matrix(a));
        out.sigma_min = svd.singularValues().minCoeff();
        out.ratio = out.inradius / report.width.mean;
        out.sigma_rel_error = std::abs(out.inradius - out.sigma_min) / out.sigma_min;
    });
    if (trials > 0) {
        std::vector<double> ratios;
        for (const auto& t : report.trials) {
            ratios.push_back(t.ratio);
            report.max_sigma_rel_error = std::max(report.max_sigma_rel_error, t.sigma_rel_error);
        }
        report.min_ratio = *std::min_element(ratios.begin(), ratios.end());
        report.max_ratio = *std::max_element(ratios.begin(), ratios.end());
        report.median_ratio = median(std::move(ratios));
    }
    return report;
}

std::size_t b1_sample_count(std::size_t n, double delta, double c1) {
    const double nd = static_cast<double>(n);
    return static_cast<std::size_t>(std::ceil(std::exp(c1 * std::max(delta * delta * nd, std::log(nd)))));
}

PointSet separated_sphere_sample(std::size_t n, std::size_t count, double min_dist, StreamHandle stream,
                                 std::size_t max_attempts) {
    std::vector<double> coords;
    std::size_t accepted = 0;
    for (std::size_t attempt = 0; attempt < max_attempts && accepted < count; ++attempt) {
        const auto v = sample_sphere(stream, n);
        bool ok = true;
        for (std::size_t i = 0; i < accepted && ok; ++i) {
            ok = distance(v, std::span<const double>(coords.data() + i * n, n)) >= min_dist;
        }
        if (ok) {
            coords.insert(coords.end(), v.begin(), v.end());
            ++accepted;
        }
    }
    if (accepted < count) {
        throw std::runtime_error("separated_sphere_sample: only " + std::to_string(accepted) + " of " +
                                 std::to_string(count) + " points placed");
    }
    return PointSet(n, std::move(coords));
}

bool b1_separated(const PointSet& points, const RowMatrix& directions, double delta) {
    if (points.size() < 2) {
        return true;
    }
    const RowMatrix proj = directions * points.matrix().transpose();
    for (Eigen::Index i = 0; i < proj.cols(); ++i) {
        for (Eigen::Index j = i + 1; j < proj.cols(); ++j) {
            if ((proj.col(i) - proj.col(j)).cwiseAbs().maxCoeff() < delta) {
                return false;
            }
        }
    }
    return true;
}

B1Report run_b1_separation(const PointSet& points, double delta, std::size_t k, std::size_t trials,
                           std::uint64_t seed, std::size_t threads) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (std::abs(norm2(points.point(i)) - 1.0) > 1e-9) {
            throw std::invalid_argument("run_b1_separation: point " + std::to_string(i) + " is not a unit vector");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (distance(points.point(i), points.point(j)) < 0.5 - 1e-12) {
                throw std::invalid_argument("run_b1_separation: points " + std::to_string(j) + " and " +
                                            std::to_string(i) + " are closer than 1/2");
            }
        }
    }
    if (k == 0 || !(delta > 0.0)) {
        throw std::invalid_argument("run_b1_separation: k and delta must be positive");
    }
    const std::size_t n = points.dim();
    std::vector<char> ok(trials, 0);
    parallel_for(trials, threads, [&](std::size_t t) {
        StreamHandle stream(seed, "b1/trial=" + std::to_string(t));
        RowMatrix dirs(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < k; ++j) {
            const auto v = sample_sphere(stream, n);
            for (std::size_t c = 0; c < n; ++c) {
                dirs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = v[c];
            }
        }
        ok[t] = b1_separated(points, dirs, delta) ? 1 : 0;
    });
    B1Report report{n, points.size(), delta, k, trials, 0, 0.0};
    report.successes = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
    report.frequency = fraction(report.successes, trials);
    return report;
}

// ---------------------------------------------------------------------------

std::vector<double> decimal_grid(int lo, int hi, int divisor) {
    if (hi < lo || divisor <= 0) {
        throw std::invalid_argument("decimal_grid: need lo <= hi and a positive divisor");
    }
    std::vector<double> out;
    for (int i = lo; i <= hi; ++i) {
        out.push_back(static_cast<double>(i) / static_cast<double>(divisor));
    }
    return out;
}

SepProbReport run_sep_prob_grid(std::span<const double> lambdas, std::span<const double> grid, std::size_t samples,
                                std::uint64_t seed) {
    if (samples == 0) {
        throw std::invalid_argument("run_sep_prob_grid: samples must be positive");
    }
    SepProbReport report;
    report.samples = samples;
    const std::size_t words = (samples + 63) / 64;
    const double total = static_cast<double>(samples);
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        const double lambda = lambdas[li];
        StreamHandle stream(seed, "sepprob/lambda=" + std::to_string(li));
        const DitherVector tau = sample_dither(stream, samples, lambda);
        // One sign bitset per grid value: bit s is sign(v + tau_s).
        std::vector<std::vector<std::uint64_t>> signs(grid.size(), std::vector<std::uint64_t>(words, 0));
        for (std::size_t g = 0; g < grid.size(); ++g) {
            for (std::size_t s = 0; s < samples; ++s) {
                if (sign_bit(grid[g] + tau.values[s])) {
                    signs[g][s >> 6] |= std::uint64_t{1} << (s & 63);
                }
            }
        }
        for (std::size_t ia = 0; ia < grid.size(); ++ia) {
            for (std::size_t ib = 0; ib < grid.size(); ++ib) {
                std::size_t count = 0;
                for (std::size_t w = 0; w < words; ++w) {
                    count += static_cast<std::size_t>(std::popcount(signs[ia][w] ^ signs[ib][w]));
                }
                SepProbRow row;
                row.lambda = lambda;
                row.a = grid[ia];
                row.b = grid[ib];
                const auto exact = oracle::separation_probability(row.a, row.b, lambda);
                row.region = std::string(oracle::region_name(exact.region));
                row.exact = exact.probability;
                row.monte_carlo = static_cast<double>(count) / total;
                row.tolerance = 4.0 * std::sqrt(row.exact * (1.0 - row.exact) / total) + 1e-6;
                row.pass = std::abs(row.monte_carlo - row.exact) <= row.tolerance;
                const auto lemma = oracle::lemma_exp_bound(row.a, row.b, lambda);
                row.lemma_lhs = lemma.lhs;
                row.lemma_rhs = lemma.rhs;
                row.lemma_holds = lemma.holds;
                report.failures += row.pass ? 0 : 1;
                report.lemma_failures += row.lemma_holds ? 0 : 1;
                if (lemma.rhs > 0.0 && std::abs(lemma.lhs - lemma.rhs) <= 1e-12) {
                    ++report.lemma_equalities;
                }
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

OracleCheckReport run_oracle_consistency(const GaussianMatrix& a, std::span<const double> x,
                                         std::span<const double> y, double lambda, std::size_t dithers,
                                         std::uint64_t seed) {
    if (dithers < 2) {
        throw std::invalid_argument("run_oracle_consistency: need at least 2 dithers");
    }
    OracleCheckReport report;
    report.dithers = dithers;
    report.expected = oracle::expected_hamming(a, x, y, lambda);
    const PointSet pair(a.cols, [&] {
        std::vector<double> c(x.begin(), x.end());
        c.insert(c.end(), y.begin(), y.end());
        return c;
    }());
    const RowMatrix proj = project(a, pair);
    StreamHandle stream(seed, "oracle/dithers");
    std::vector<double> counts(dithers);
    for (std::size_t d = 0; d < dithers; ++d) {
        const DitherVector tau = sample_dither(stream, a.rows, lambda);
        const auto cx = encode_projected({proj.row(0).data(), a.rows}, tau);
        const auto cy = encode_projected({proj.row(1).data(), a.rows}, tau);
        counts[d] = static_cast<double>(hamming(cx, cy));
    }
    const WidthEstimate s = summarize_draws(counts);
    report.mc_mean = s.mean;
    report.std_error = s.std_error;
    const double gap = std::abs(report.mc_mean - report.expected);
    report.pass = report.std_error > 0.0 ? gap <= 4.0 * report.std_error : gap <= 1e-12;
    return report;
}

KappaReport run_kappa_calibration(std::size_t m, std::size_t n, std::size_t matrices, std::uint64_t seed,
                                  std::size_t threads) {
    if (m == 0 || n == 0 || matrices < 2) {
        throw std::invalid_argument("run_kappa_calibration: need m, n >= 1 and at least 2 matrices");
    }
    const Eigen::VectorXd t = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / std::sqrt(double(n)));
    std::vector<double> stats(matrices);
    parallel_for(matrices, threads, [&](std::size_t i) {
        StreamHandle stream(seed, "kappa/matrix=" + std::to_string(i));
        const GaussianMatrix a = sample_gaussian_matrix(stream, m, n);
        const Eigen::VectorXd at = as_matrix(a) * t;
        std::vector<double> mags(at.size());
        for (Eigen::Index r = 0; r < at.size(); ++r) {
            mags[static_cast<std::size_t>(r)] = std::abs(at(r));
        }
        stats[i] = kGaussianKappa / static_cast<double>(m) * pairwise_sum(mags);
    });
    const WidthEstimate s = summarize_draws(stats);
    return {m, n, matrices, s.mean, s.std_error};
}

GoodPositionReport run_good_position(const PointSet& points, std::size_t m, std::size_t k, std::size_t seeds,
                                     std::uint64_t seed, std::size_t width_draws, std::size_t threads) {
    if (k == 0 || k > m) {
        throw std::invalid_argument("run_good_position: need 1 <= k <= m");
    }
    GoodPositionReport report;
    report.m = m;
    report.k = k;
    report.seeds = seeds;
    report.width = gaussian_width(points, width_draws, StreamHandle(seed, "goodpos/width"));
    const double kd = static_cast<double>(k);
    const double denom =
        report.width.mean + points.radius() * std::sqrt(kd * std::log(std::numbers::e * static_cast<double>(m) / kd));
    report.ratios.resize(seeds);
    parallel_for(seeds, threads, [&](std::size_t s) {
        StreamHandle stream(seed, "goodpos/seed=" + std::to_string(s));
        const GaussianMatrix a = sample_gaussian_matrix(stream, m, points.dim());
        const RowMatrix proj = project(a, points);
        double sup = 0.0;
        for (Eigen::Index i = 0; i < proj.rows(); ++i) {
            sup = std::max(sup, knorm({proj.row(i).data(), m}, k));
        }
        report.ratios[s] = sup / denom;
    });
    for (double r : report.ratios) {
        report.max_ratio = std::max(report.max_ratio, r);
    }
    return report;
}

}  // namespace htess
