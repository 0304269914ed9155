#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "htess/randkit.hpp"

namespace htess {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Finite point set in R^n standing in for T; stored row-major.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::size_t n, std::vector<double> coords);
    explicit PointSet(const std::vector<std::vector<double>>& points);

    std::size_t dim() const noexcept { return n_; }
    std::size_t size() const noexcept { return n_ == 0 ? 0 : coords_.size() / n_; }
    bool empty() const noexcept { return size() == 0; }
    double radius() const noexcept { return radius_; }

    std::span<const double> point(std::size_t i) const { return {coords_.data() + i * n_, n_}; }
    std::span<const double> coords() const noexcept { return coords_; }

    Eigen::Map<const RowMatrix> matrix() const {
        return {coords_.data(), static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(n_)};
    }

    PointSet scaled(double alpha) const;
    PointSet subset(std::span<const std::size_t> indices) const;
    /// The set together with its reflection -T.
    PointSet symmetrized() const;

private:
    std::size_t n_ = 0;
    std::vector<double> coords_;
    double radius_ = 0.0;
};

double norm2(std::span<const double> x);
double distance(std::span<const double> x, std::span<const double> y);
/// Fixed-order pairwise summation; the result does not depend on how work was split.
double pairwise_sum(std::span<const double> values);

/// Rows of the result are A t for each t in T (size |T| x m).
RowMatrix project(const GaussianMatrix& a, const PointSet& points);

struct WidthEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t draws = 0;
};

/// Mean and standard error of per-draw samples.
WidthEstimate summarize_draws(std::span<const double> samples);

/// sqrt of the sum of the s largest squared entries of v (the [s]-norm).
double knorm(std::span<const double> v, std::size_t s);

/// Monte Carlo estimate of E sup_{t in T} |<G, t>|. The stream is taken by value;
/// equal handles give equal estimates.
WidthEstimate gaussian_width(const PointSet& points, std::size_t draws, StreamHandle stream);

/// {0} together with every x_i - x_j (i < j) of norm at most r.
PointSet difference_set(const PointSet& points, double r);

/// Width of (T - T) intersected with the radius-r ball.
WidthEstimate local_difference_width(const PointSet& points, double r, std::size_t draws, StreamHandle stream);

struct NetResult {
    std::vector<std::size_t> net_indices;
    /// assignment[i] is the index (into the point set) of the representative of point i.
    std::vector<std::size_t> assignment;
    double theta = 0.0;
};

/// Farthest-point greedy theta-net started at `start`. Ties go to the lower index;
/// each point is assigned to its nearest net member, ties to the earliest-added member.
NetResult greedy_net(const PointSet& points, double theta, std::size_t start = 0);

struct PlannerConstants {
    double c0 = 1.0;
    double c1 = 1.0;
    double c2 = 1.0;
};

struct TessellationPlan {
    double delta = 0.0;
    double theta = 0.0;
    double lambda = 0.0;
    std::size_t m = 0;
    double kappa = 0.0;
    PlannerConstants constants;
    double radius = 0.0;
    /// Ambient dimension of the planned set; 0 when planned from a bare radius.
    std::size_t dim = 0;
    double log_cover = 0.0;
    double local_width = 0.0;
};

/// Square root of the natural log, with the log clamped below at 1.
double sqrt_log_clamped(double x);
double plan_lambda(double radius, double delta, const PlannerConstants& constants);
double plan_theta(double lambda, double delta, const PlannerConstants& constants);

/// lambda = c1 R sqrt(log(R/delta)), theta = c0 delta / sqrt(log(e lambda/delta)),
/// m = ceil(c2 (lambda^2 log_cover / delta^2 + lambda local_width^2 / delta^3)).
TessellationPlan plan_parameters(double radius, double delta, const PlannerConstants& constants, double log_cover,
                                 double local_width);
TessellationPlan plan_parameters(const PointSet& points, double delta, const PlannerConstants& constants,
                                 double log_cover, double local_width);

/// Full planning: greedy net at the planned theta for log_cover and a Monte Carlo local width.
TessellationPlan plan_for_set(const PointSet& points, double delta, const PlannerConstants& constants,
                              std::size_t width_draws, StreamHandle stream);

inline constexpr double kGaussianKappa = 1.2533141373155002;  // sqrt(pi/2)

struct L1Check {
    double deviation = 0.0;
    bool pass = false;
    std::pair<std::size_t, std::size_t> witness{0, 0};
};

/// Exact sup over net pairs of |(sqrt(pi/2)/m) ||A(x-y)||_1 - ||x-y||_2|.
L1Check check_l1_concentration(const GaussianMatrix& a, const PointSet& net_points, double delta);

struct RegularityReport {
    double kappa = kGaussianKappa;
    double l1_deviation = 0.0;
    std::size_t s = 0;
    double bias_knorm = 0.0;
    double osc_knorm = 0.0;
    bool pass_a = false;
    bool pass_bias = false;
    bool pass_osc = false;
};

/// Bias and oscillation [s]-norm conditions with s = floor(delta m / lambda), capped at m.
RegularityReport check_well_spread(const GaussianMatrix& a, const PointSet& net_points, const PointSet& diff_points,
                                   double delta, double lambda);

/// Both the l1 concentration and the well-spread conditions.
RegularityReport check_regularity(const GaussianMatrix& a, const PointSet& net_points, const PointSet& diff_points,
                                  double delta, double lambda);

/// (width(T) / R)^2.
double dvoretzky_dimension(const PointSet& points, std::size_t draws, StreamHandle stream);

struct PsiPoint {
    double r = 0.0;
    double psi = 0.0;
    double std_error = 0.0;
};

/// psi(r) = width((T-T) cap r B) / (sqrt(m) r); every grid point reuses the same Gaussian draws.
std::vector<PsiPoint> psi_profile(const PointSet& points, std::span<const double> r_grid, std::size_t m,
                                  std::size_t draws, StreamHandle stream);

}  // namespace htess
