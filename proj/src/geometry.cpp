#include "htess/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace htess {

namespace {

constexpr std::size_t kWidthChunk = 256;

double max_norm(std::size_t n, std::span<const double> coords) {
    double r = 0.0;
    for (std::size_t off = 0; off + n <= coords.size() && n > 0; off += n) {
        r = std::max(r, norm2(coords.subspan(off, n)));
    }
    return r;
}

// Rows of `chunk` are Gaussian draws; writes sup_t |<G, t>| for each row.
void sup_abs_projection(const RowMatrix& gaussians, const PointSet& points, std::vector<double>& out) {
    const RowMatrix proj = gaussians * points.matrix().transpose();
    for (Eigen::Index i = 0; i < proj.rows(); ++i) {
        out.push_back(proj.row(i).cwiseAbs().maxCoeff());
    }
}

}  // namespace

PointSet::PointSet(std::size_t n, std::vector<double> coords) : n_(n), coords_(std::move(coords)) {
    if (n_ == 0 && !coords_.empty()) {
        throw std::invalid_argument("PointSet: zero dimension with nonempty coordinates");
    }
    if (n_ != 0 && coords_.size() % n_ != 0) {
        throw std::invalid_argument("PointSet: coordinate count is not a multiple of the dimension");
    }
    for (double v : coords_) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("PointSet: non-finite coordinate");
        }
    }
    radius_ = max_norm(n_, coords_);
}

PointSet::PointSet(const std::vector<std::vector<double>>& points) {
    if (points.empty()) {
        return;
    }
    n_ = points.front().size();
    std::vector<double> coords;
    coords.reserve(points.size() * n_);
    for (const auto& p : points) {
        if (p.size() != n_) {
            throw std::invalid_argument("PointSet: points have different dimensions");
        }
        coords.insert(coords.end(), p.begin(), p.end());
    }
    *this = PointSet(n_, std::move(coords));
}

PointSet PointSet::scaled(double alpha) const {
    std::vector<double> coords(coords_);
    for (double& v : coords) {
        v *= alpha;
    }
    return PointSet(n_, std::move(coords));
}

PointSet PointSet::subset(std::span<const std::size_t> indices) const {
    std::vector<double> coords;
    coords.reserve(indices.size() * n_);
    for (std::size_t i : indices) {
        const auto p = point(i);
        coords.insert(coords.end(), p.begin(), p.end());
    }
    return PointSet(n_, std::move(coords));
}

PointSet PointSet::symmetrized() const {
    std::vector<double> coords(coords_);
    coords.reserve(2 * coords_.size());
    for (double v : coords_) {
        coords.push_back(-v);
    }
    return PointSet(n_, std::move(coords));
}

double norm2(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) {
        acc += v * v;
    }
    return std::sqrt(acc);
}

double distance(std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double acc = 0.0;
        for (double v : values) {
            acc += v;
        }
        return acc;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

RowMatrix project(const GaussianMatrix& a, const PointSet& points) {
    if (points.dim() != a.cols) {
        throw std::invalid_argument("project: point dimension " + std::to_string(points.dim()) +
                                    " does not match matrix columns " + std::to_string(a.cols));
    }
    const Eigen::Map<const RowMatrix> amat(a.entries.data(), static_cast<Eigen::Index>(a.rows),
                                           static_cast<Eigen::Index>(a.cols));
    return points.matrix() * amat.transpose();
}

WidthEstimate summarize_draws(std::span<const double> samples) {
    WidthEstimate est;
    est.draws = samples.size();
    if (samples.empty()) {
        return est;
    }
    const double n = static_cast<double>(samples.size());
    est.mean = pairwise_sum(samples) / n;
    if (samples.size() > 1) {
        std::vector<double> sq(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double d = samples[i] - est.mean;
            sq[i] = d * d;
        }
        const double var = pairwise_sum(sq) / (n - 1.0);
        est.std_error = std::sqrt(var / n);
    }
    return est;
}

double knorm(std::span<const double> v, std::size_t s) {
    if (s < 1 || s > v.size()) {
        throw std::invalid_argument("knorm: s = " + std::to_string(s) + " outside [1, " + std::to_string(v.size()) +
                                    "]");
    }
    std::vector<double> sq(v.size());
    std::transform(v.begin(), v.end(), sq.begin(), [](double x) { return x * x; });
    std::nth_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(s - 1), sq.end(), std::greater<>());
    std::sort(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(s), std::greater<>());
    double acc = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
        acc += sq[i];
    }
    return std::sqrt(acc);
}

WidthEstimate gaussian_width(const PointSet& points, std::size_t draws, StreamHandle stream) {
    if (points.empty()) {
        throw std::invalid_argument("gaussian_width: empty point set");
    }
    if (draws < 2) {
        throw std::invalid_argument("gaussian_width: need at least 2 draws");
    }
    const std::size_t n = points.dim();
    std::vector<double> samples;
    samples.reserve(draws);
    RowMatrix chunk;
    for (std::size_t done = 0; done < draws; done += kWidthChunk) {
        const std::size_t rows = std::min(kWidthChunk, draws - done);
        chunk.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < chunk.rows(); ++i) {
            for (Eigen::Index j = 0; j < chunk.cols(); ++j) {
                chunk(i, j) = stream.gaussian();
            }
        }
        sup_abs_projection(chunk, points, samples);
    }
    return summarize_draws(samples);
}

PointSet difference_set(const PointSet& points, double r) {
    if (!(r >= 0.0)) {
        throw std::invalid_argument("difference_set: r must be nonnegative");
    }
    const std::size_t n = points.dim();
    std::vector<double> coords(n, 0.0);
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto x = points.point(i);
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const auto y = points.point(j);
            for (std::size_t k = 0; k < n; ++k) {
                diff[k] = x[k] - y[k];
            }
            if (norm2(diff) <= r) {
                coords.insert(coords.end(), diff.begin(), diff.end());
            }
        }
    }
    return PointSet(n, std::move(coords));
}

WidthEstimate local_difference_width(const PointSet& points, double r, std::size_t draws, StreamHandle stream) {
    if (points.empty()) {
        throw std::invalid_argument("local_difference_width: empty point set");
    }
    return gaussian_width(difference_set(points, r), draws, std::move(stream));
}

NetResult greedy_net(const PointSet& points, double theta, std::size_t start) {
    if (!(theta > 0.0)) {
        throw std::invalid_argument("greedy_net: theta must be positive");
    }
    NetResult net;
    net.theta = theta;
    const std::size_t count = points.size();
    if (count == 0) {
        return net;
    }
    if (start >= count) {
        throw std::invalid_argument("greedy_net: start index out of range");
    }
    std::vector<double> nearest(count, std::numeric_limits<double>::infinity());
    net.assignment.assign(count, start);

    std::size_t next = start;
    while (true) {
        net.net_indices.push_back(next);
        const auto c = points.point(next);
        for (std::size_t i = 0; i < count; ++i) {
            const double d = distance(points.point(i), c);
            if (d < nearest[i]) {
                nearest[i] = d;
                net.assignment[i] = next;
            }
        }
        std::size_t far = 0;
        for (std::size_t i = 1; i < count; ++i) {
            if (nearest[i] > nearest[far]) {
                far = i;
            }
        }
        if (nearest[far] <= theta) {
            break;
        }
        next = far;
    }
    return net;
}

double sqrt_log_clamped(double x) { return std::sqrt(std::max(1.0, std::log(x))); }

double plan_lambda(double radius, double delta, const PlannerConstants& constants) {
    return constants.c1 * radius * sqrt_log_clamped(radius / delta);
}

double plan_theta(double lambda, double delta, const PlannerConstants& constants) {
    return constants.c0 * delta / sqrt_log_clamped(std::numbers::e * lambda / delta);
}

TessellationPlan plan_parameters(double radius, double delta, const PlannerConstants& constants, double log_cover,
                                 double local_width) {
    if (!(radius > 0.0)) {
        throw std::invalid_argument("plan_parameters: set radius must be positive");
    }
    if (!(delta > 0.0) || delta > radius / 2.0) {
        std::ostringstream msg;
        msg << "plan_parameters: delta = " << delta << " outside (0, R/2] with R = " << radius;
        throw std::invalid_argument(msg.str());
    }
    if (!(constants.c0 > 0.0 && constants.c1 > 0.0 && constants.c2 > 0.0)) {
        throw std::invalid_argument("plan_parameters: constants must be positive");
    }
    if (!(log_cover >= 0.0) || !(local_width >= 0.0)) {
        throw std::invalid_argument("plan_parameters: width inputs must be nonnegative");
    }
    TessellationPlan plan;
    plan.delta = delta;
    plan.radius = radius;
    plan.constants = constants;
    plan.kappa = kGaussianKappa;
    plan.log_cover = log_cover;
    plan.local_width = local_width;
    plan.lambda = plan_lambda(radius, delta, constants);
    plan.theta = plan_theta(plan.lambda, delta, constants);
    const double lam = plan.lambda;
    const double raw = constants.c2 * (lam * lam * log_cover / (delta * delta) +
                                       lam * local_width * local_width / (delta * delta * delta));
    plan.m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw)));
    return plan;
}

TessellationPlan plan_parameters(const PointSet& points, double delta, const PlannerConstants& constants,
                                 double log_cover, double local_width) {
    TessellationPlan plan = plan_parameters(points.radius(), delta, constants, log_cover, local_width);
    plan.dim = points.dim();
    return plan;
}

TessellationPlan plan_for_set(const PointSet& points, double delta, const PlannerConstants& constants,
                              std::size_t width_draws, StreamHandle stream) {
    if (!(points.radius() > 0.0)) {
        throw std::invalid_argument("plan_for_set: set radius must be positive");
    }
    const double lambda = plan_lambda(points.radius(), delta, constants);
    const double theta = plan_theta(lambda, delta, constants);
    const NetResult net = greedy_net(points, theta);
    const double log_cover = std::log(static_cast<double>(net.net_indices.size()));
    const WidthEstimate local = local_difference_width(points, theta, width_draws, std::move(stream));
    return plan_parameters(points, delta, constants, log_cover, local.mean);
}

L1Check check_l1_concentration(const GaussianMatrix& a, const PointSet& net_points, double delta) {
    const RowMatrix proj = project(a, net_points);
    const double scale = kGaussianKappa / static_cast<double>(a.rows);
    L1Check result;
    for (std::size_t i = 0; i < net_points.size(); ++i) {
        for (std::size_t j = i + 1; j < net_points.size(); ++j) {
            const double l1 = (proj.row(static_cast<Eigen::Index>(i)) - proj.row(static_cast<Eigen::Index>(j)))
                                  .cwiseAbs()
                                  .sum();
            const double dev = std::abs(scale * l1 - distance(net_points.point(i), net_points.point(j)));
            if (dev > result.deviation) {
                result.deviation = dev;
                result.witness = {i, j};
            }
        }
    }
    result.pass = result.deviation <= delta;
    return result;
}

RegularityReport check_well_spread(const GaussianMatrix& a, const PointSet& net_points, const PointSet& diff_points,
                                   double delta, double lambda) {
    if (!(lambda > 0.0) || !(delta > 0.0)) {
        throw std::invalid_argument("check_well_spread: delta and lambda must be positive");
    }
    const double raw_s = std::floor(delta * static_cast<double>(a.rows) / lambda);
    if (raw_s < 1.0) {
        std::ostringstream msg;
        msg << "check_well_spread: s = floor(delta m / lambda) = 0 for (delta, m, lambda) = (" << delta << ", "
            << a.rows << ", " << lambda << ")";
        throw std::invalid_argument(msg.str());
    }
    RegularityReport report;
    report.s = std::min<std::size_t>(static_cast<std::size_t>(raw_s), a.rows);
    const double inv_sqrt_s = 1.0 / std::sqrt(static_cast<double>(report.s));

    auto sup_knorm = [&](const PointSet& pts) {
        if (pts.empty()) {
            return 0.0;
        }
        const RowMatrix proj = project(a, pts);
        double best = 0.0;
        for (Eigen::Index i = 0; i < proj.rows(); ++i) {
            best = std::max(best, knorm({proj.row(i).data(), a.rows}, report.s));
        }
        return best * inv_sqrt_s;
    };
    report.bias_knorm = sup_knorm(net_points);
    report.osc_knorm = sup_knorm(diff_points);
    report.pass_bias = report.bias_knorm <= lambda;
    report.pass_osc = report.osc_knorm <= delta;
    return report;
}

RegularityReport check_regularity(const GaussianMatrix& a, const PointSet& net_points, const PointSet& diff_points,
                                  double delta, double lambda) {
    RegularityReport report = check_well_spread(a, net_points, diff_points, delta, lambda);
    const L1Check l1 = check_l1_concentration(a, net_points, delta);
    report.l1_deviation = l1.deviation;
    report.pass_a = l1.pass;
    return report;
}

double dvoretzky_dimension(const PointSet& points, std::size_t draws, StreamHandle stream) {
    if (points.empty() || !(points.radius() > 0.0)) {
        throw std::invalid_argument("dvoretzky_dimension: set radius must be positive");
    }
    const double ratio = gaussian_width(points, draws, std::move(stream)).mean / points.radius();
    return ratio * ratio;
}

std::vector<PsiPoint> psi_profile(const PointSet& points, std::span<const double> r_grid, std::size_t m,
                                  std::size_t draws, StreamHandle stream) {
    if (m == 0) {
        throw std::invalid_argument("psi_profile: m must be positive");
    }
    for (double r : r_grid) {
        if (!(r > 0.0)) {
            throw std::invalid_argument("psi_profile: grid radii must be positive");
        }
    }
    const double sqrt_m = std::sqrt(static_cast<double>(m));
    std::vector<PsiPoint> out;
    out.reserve(r_grid.size());
    for (double r : r_grid) {
        const WidthEstimate w = local_difference_width(points, r, draws, stream);
        out.push_back({r, w.mean / (sqrt_m * r), w.std_error / (sqrt_m * r)});
    }
    return out;
}

}  // namespace htess
