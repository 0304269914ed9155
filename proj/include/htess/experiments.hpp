#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "htess/geometry.hpp"
#include "htess/randkit.hpp"
#include "htess/sketch.hpp"

namespace htess {

// ---------------------------------------------------------------------------
// Distortion of one embedding and sweeps over m.

struct DistortionReport {
    double sup_distortion = 0.0;
    std::pair<std::size_t, std::size_t> witness{0, 0};
    /// |T|(|T|+1)/2: unordered pairs including x = y.
    std::size_t pair_count = 0;
    double delta = 0.0;
    double lambda = 0.0;
    std::size_t m = 0;
    /// histogram[b] counts pairs with |estimate - true| in [b w, (b+1) w), w = bin_width = delta/10.
    double bin_width = 0.0;
    std::vector<std::size_t> histogram;
};

/// Scan of every unordered pair (x = y included) of the codes against true distances.
DistortionReport measure_distortion(const PointSet& points, std::span<const SketchCode> codes, double lambda,
                                    double delta);

/// Codes of every point under one (A, tau).
std::vector<SketchCode> encode_points(const GaussianMatrix& a, const DitherVector& tau, const PointSet& points);

/// Samples A from stream (seed, label + "/A") and tau from (seed, label + "/tau"),
/// encodes T and scans all pairs.
DistortionReport run_embedding_trial(const PointSet& points, const TessellationPlan& plan, std::uint64_t seed,
                                     const std::string& label = "embed");

struct SweepCurve {
    double delta = 0.0;
    double lambda = 0.0;
    std::size_t trials = 0;
    std::vector<std::size_t> m_values;
    std::vector<double> success_rate;
    std::vector<double> median_sup;
};

/// For each m in the grid, `trials` trials with lambda from the planner and m overridden.
/// Trial t at grid value m uses label "sweep/m=<m>/trial=<t>".
SweepCurve run_sweep(const PointSet& points, double delta, std::span<const std::size_t> m_grid, std::size_t trials,
                     std::uint64_t seed, const PlannerConstants& constants = {}, std::size_t threads = 0);

/// Smallest m whose success rate reaches `level`; 0 when none does.
std::size_t sweep_threshold(const SweepCurve& curve, double level = 0.9);

/// True when every rate is at least every earlier rate minus `slack`.
bool nondecreasing_within(std::span<const double> values, double slack);

// ---------------------------------------------------------------------------
// Sketch files for the CLI.

/// Codes of T under the streams of run_embedding_trial(label = "embed").
SketchSet sketch_points(const PointSet& points, const TessellationPlan& plan, std::uint64_t seed);

struct VerifyReport {
    std::size_t codes = 0;
    std::size_t mismatched = 0;
    DistortionReport distortion;
};

/// Re-derives (A, tau) from the header seed, re-encodes T and compares with the stored codes.
VerifyReport verify_sketch_set(const SketchSet& set, const PointSet& points, double delta);

// ---------------------------------------------------------------------------
// Counterexample body E = B_2^I x eps B_2^J.

struct CounterexampleSpec {
    std::size_t r = 4;
    double epsilon = 0.04;
    double eta = 0.8;
    double delta = 0.1;
    std::size_t sphere_samples_i = 8;
    std::size_t ball_samples_i = 8;
    std::size_t sphere_samples_j = 8;

    /// floor(eta r / eps^2); a relative 1e-9 nudge keeps exact quotients from rounding down.
    std::size_t n() const;
};

/// Throws invalid_argument unless r >= 1, n >= r + 1, 0 < eps < delta / 2 and eta > 0.
void validate(const CounterexampleSpec& spec);

/// ||P_I t|| <= 1 and ||P_J t|| <= eps, with relative slack `tol`.
bool in_counterexample_body(const CounterexampleSpec& spec, std::span<const double> t, double tol = 1e-12);

/// Origin, I-sphere and I-ball samples, eps J-sphere samples, and all their products.
PointSet build_counterexample_set(const CounterexampleSpec& spec, StreamHandle stream);

/// Exact-support Monte Carlo widths of E and of E cap rho B, sharing one set of draws:
/// sup_{t in E} <G, t> = ||G_I|| + eps ||G_J||.
struct BodyWidths {
    WidthEstimate body;
    WidthEstimate local;
    double radius = 0.0;
};
BodyWidths counterexample_widths(const CounterexampleSpec& spec, double radius, std::size_t draws,
                                 StreamHandle stream);

/// max a g + b h over 0 <= a <= 1, 0 <= b <= eps, a^2 + b^2 <= rho^2 (g, h >= 0).
double block_support(double g, double h, double epsilon, double rho);

struct BallBody {
    double radius = 1.0;
};

using WitnessBody = std::variant<CounterexampleSpec, BallBody>;

struct WitnessResult {
    bool found = false;
    std::vector<double> t_star;
    double norm = 0.0;
    /// d_H(f(t*), f(0)) over all m coordinates.
    std::size_t flips = 0;
    std::vector<std::size_t> coordinates;
    std::size_t k = 0;
    /// t* = scale * t0, where t0 is the least-norm solution of (A t0)_I = -tau_I.
    double scale = 0.0;
    /// |sqrt(2 pi) lambda flips / m - ||t*||| for the pair (t*, 0).
    double distortion = 0.0;
    std::string diagnostic;
};

/// Small-dither witness: I = the k smallest |tau_i| (ties to the lower index), t0 the
/// least-norm solution of (A t)_I = -tau_I, and t* = c t0 with c = min(2, delta/||t0||,
/// body limit). A witness needs c > 1 so every i in I flips. Requires 1 <= k <= m.
WitnessResult find_adversarial_pair(const GaussianMatrix& a, const DitherVector& tau, const WitnessBody& body,
                                    double delta, std::size_t k);

/// min{(m w / lambda)^{2/3}, w^2 / delta^2} rounded, clamped to [1, floor(m/2)].
std::size_t witness_k(std::size_t m, double local_width, double lambda, double delta);

struct CounterexampleConfig {
    CounterexampleSpec spec;
    /// lambda = lambda_constant * sqrt(log(e / delta)).
    double lambda_constant = 1.0;
    /// m_high = ceil(high_constant * lambda * w^2 / delta^3).
    double high_constant = 1.0;
    std::size_t width_draws = 4000;
    std::size_t seeds = 50;
};

struct CounterexampleRow {
    std::size_t m = 0;
    std::size_t k = 0;
    std::size_t seeds = 0;
    double failure_rate = 0.0;
    double scan_failure_rate = 0.0;
    double witness_failure_rate = 0.0;
    double witness_found_rate = 0.0;
    double median_scan_sup = 0.0;
};

struct CounterexampleReport {
    std::size_t n = 0;
    std::size_t points = 0;
    double lambda = 0.0;
    WidthEstimate width;
    WidthEstimate local_width;
    std::size_t m_low = 0;
    std::size_t m_high = 0;
    CounterexampleRow low;
    CounterexampleRow high;
    /// low.failure_rate - high.failure_rate
    double separation = 0.0;
};

/// Failure rates on one fixed E sample at m_low = ceil(w^2/delta^2) and m_high. A seed
/// fails when the pair scan exceeds delta or a witness at k/2, k or 2k does.
CounterexampleReport run_counterexample(const CounterexampleConfig& config, std::uint64_t seed,
                                        std::size_t threads = 0);

/// One counterexample trial at a given m; exposed for tests and the adversary subcommand.
struct CounterexampleTrial {
    double scan_sup = 0.0;
    bool scan_failed = false;
    bool witness_found = false;
    bool witness_failed = false;
    WitnessResult best;
};
CounterexampleTrial run_counterexample_trial(const CounterexampleSpec& spec, const PointSet& sample, double lambda,
                                             std::size_t m, std::size_t k, std::uint64_t seed,
                                             const std::string& label);

// ---------------------------------------------------------------------------
// Minimal shift, order statistics, Dvoretzky containment, B1 separation.

struct MinimalShiftReport {
    double norm_x = 0.0;
    double delta = 0.0;
    double lambda = 0.0;
    std::size_t m = 0;
    std::size_t trials = 0;
    std::size_t failures = 0;
    double failure_frequency = 0.0;
};

/// Failure iff |sqrt(2 pi) lambda d_H / m - 2 delta| > delta.
bool minimal_shift_fails(std::size_t hamming_distance, double lambda, std::size_t m, double delta);

/// x = norm_x e1 and y = (1 - 2 delta / norm_x) x in R^1. Requires norm_x >= 4 delta, 0 < delta < 1/4.
MinimalShiftReport run_minimal_shift(double norm_x, double delta, double lambda, std::size_t m, std::size_t trials,
                                     std::uint64_t seed, std::size_t threads = 0);

struct OrderStatsReport {
    std::size_t m = 0;
    double lambda = 0.0;
    std::size_t k = 0;
    std::size_t trials = 0;
    std::size_t holding = 0;
    double frequency = 0.0;
};

/// With |tau| sorted ascending, sorted[i-1]/lambda <= 2i/m for all ceil(k/2) <= i <= k.
bool order_statistics_hold(const DitherVector& tau, std::size_t k);

OrderStatsReport run_order_stats(std::size_t m, double lambda, std::size_t k, std::size_t trials,
                                 std::uint64_t seed, std::size_t threads = 0);

struct DvoretzkyTrial {
    double inradius = 0.0;
    double sigma_min = 0.0;
    /// inradius / width estimate
    double ratio = 0.0;
    /// |inradius - sigma_min| / sigma_min
    double sigma_rel_error = 0.0;
};

struct DvoretzkyReport {
    std::size_t n = 0;
    std::size_t points = 0;
    std::size_t s = 0;
    std::size_t direction_count = 0;
    WidthEstimate width;
    double dvoretzky_dim = 0.0;
    bool s_within_dimension = false;
    std::vector<DvoretzkyTrial> trials;
    double min_ratio = 0.0;
    double median_ratio = 0.0;
    double max_ratio = 0.0;
    double max_sigma_rel_error = 0.0;
};

/// min over the direction net of max_{t in K} |<u, A t>|: the inradius of A conv(K u -K)
/// seen through the net. `image` is s x |K| (columns A t).
double direction_net_inradius(const RowMatrix& image, const RowMatrix& directions);

/// Directions are `direction_count` uniform points of S^{s-1}, or exactly {+1, -1} when s = 1.
DvoretzkyReport run_dvoretzky_containment(const PointSet& points, std::size_t s, std::size_t direction_count,
                                          std::size_t trials, std::uint64_t seed, std::size_t width_draws = 2000,
                                          std::size_t threads = 0);

struct B1Report {
    std::size_t n = 0;
    std::size_t points = 0;
    double delta = 0.0;
    std::size_t k = 0;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double frequency = 0.0;
};

/// ceil(exp(c1 max{delta^2 n, log n})).
std::size_t b1_sample_count(std::size_t n, double delta, double c1);

/// Greedy rejection sample of unit vectors at pairwise distance >= min_dist.
PointSet separated_sphere_sample(std::size_t n, std::size_t count, double min_dist, StreamHandle stream,
                                 std::size_t max_attempts = 1000000);

/// True iff every pair of T is delta-separated by some row of X (k x n).
bool b1_separated(const PointSet& points, const RowMatrix& directions, double delta);

B1Report run_b1_separation(const PointSet& points, double delta, std::size_t k, std::size_t trials,
                           std::uint64_t seed, std::size_t threads = 0);

// ---------------------------------------------------------------------------
// Oracle checks.

struct SepProbRow {
    double lambda = 0.0;
    double a = 0.0;
    double b = 0.0;
    std::string region;
    double exact = 0.0;
    double monte_carlo = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    double lemma_lhs = 0.0;
    double lemma_rhs = 0.0;
    bool lemma_holds = false;
};

struct SepProbReport {
    std::size_t samples = 0;
    std::vector<SepProbRow> rows;
    std::size_t failures = 0;
    std::size_t lemma_failures = 0;
    std::size_t lemma_equalities = 0;
};

/// Values lo/divisor, (lo+1)/divisor, ..., hi/divisor.
std::vector<double> decimal_grid(int lo, int hi, int divisor);

/// Exact separation probability against a Monte Carlo count over one shared dither
/// sample per lambda (stream "sepprob/lambda=<index>"). Tolerance 4 sqrt(p(1-p)/N) + 1e-6.
SepProbReport run_sep_prob_grid(std::span<const double> lambdas, std::span<const double> grid, std::size_t samples,
                                std::uint64_t seed);

struct OracleCheckReport {
    double expected = 0.0;
    double mc_mean = 0.0;
    double std_error = 0.0;
    std::size_t dithers = 0;
    bool pass = false;
};

/// Mean Hamming distance of (x, y) over fresh dithers with A fixed, against expected_hamming.
OracleCheckReport run_oracle_consistency(const GaussianMatrix& a, std::span<const double> x,
                                         std::span<const double> y, double lambda, std::size_t dithers,
                                         std::uint64_t seed);

struct KappaReport {
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t matrices = 0;
    double mean = 0.0;
    double std_error = 0.0;
};

/// Mean of (sqrt(pi/2)/m) ||A t||_1 over seeded m x n matrices, t = (1, ..., 1)/sqrt(n).
KappaReport run_kappa_calibration(std::size_t m, std::size_t n, std::size_t matrices, std::uint64_t seed,
                                  std::size_t threads = 0);

struct GoodPositionReport {
    std::size_t m = 0;
    std::size_t k = 0;
    std::size_t seeds = 0;
    WidthEstimate width;
    /// sup_t ||A t||_[k] / (width + R sqrt(k log(e m / k))), per seed.
    std::vector<double> ratios;
    double max_ratio = 0.0;
};

GoodPositionReport run_good_position(const PointSet& points, std::size_t m, std::size_t k, std::size_t seeds,
                                     std::uint64_t seed, std::size_t width_draws = 2000, std::size_t threads = 0);

}  // namespace htess
