#include "htess/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace htess::oracle {

std::string_view region_name(SeparationRegion region) {
    switch (region) {
        case SeparationRegion::both_inside: return "both_inside";
        case SeparationRegion::same_side_out: return "same_side_out";
        case SeparationRegion::opposite_out: return "opposite_out";
        case SeparationRegion::a_out_b_in: return "a_out_b_in";
        case SeparationRegion::b_out_a_in: return "b_out_a_in";
        case SeparationRegion::a_negout_b_in: return "a_negout_b_in";
        case SeparationRegion::b_negout_a_in: return "b_negout_a_in";
    }
    return "unknown";
}

double phi_lambda(double x, double lambda) {
    const double ax = std::abs(x);
    return ax >= lambda ? ax - lambda : 0.0;
}

SeparationCase separation_probability(double a, double b, double lambda) {
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("separation_probability: lambda must be positive");
    }
    const double two_lambda = 2.0 * lambda;
    const bool a_in = std::abs(a) <= lambda;
    const bool b_in = std::abs(b) <= lambda;

    if (a_in && b_in) {
        return {SeparationRegion::both_inside, std::abs(a - b) / two_lambda};
    }
    if (a_in) {
        // b is outside the window
        return b > lambda ? SeparationCase{SeparationRegion::b_out_a_in, (lambda - a) / two_lambda}
                          : SeparationCase{SeparationRegion::b_negout_a_in, (lambda + a) / two_lambda};
    }
    if (b_in) {
        return a > lambda ? SeparationCase{SeparationRegion::a_out_b_in, (lambda - b) / two_lambda}
                          : SeparationCase{SeparationRegion::a_negout_b_in, (lambda + b) / two_lambda};
    }
    if ((a > lambda) == (b > lambda)) {
        return {SeparationRegion::same_side_out, 0.0};
    }
    return {SeparationRegion::opposite_out, 1.0};
}

double expected_hamming(const GaussianMatrix& a, std::span<const double> x, std::span<const double> y, double lambda) {
    if (x.size() != a.cols || y.size() != a.cols) {
        throw std::invalid_argument("expected_hamming: vectors must have " + std::to_string(a.cols) + " entries");
    }
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("expected_hamming: lambda must be positive");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        const auto row = a.row(i);
        double ax = 0.0;
        double ay = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) {
            ax += row[j] * x[j];
            ay += row[j] * y[j];
        }
        total += separation_probability(ax, ay, lambda).probability;
    }
    return total;
}

LemmaBound lemma_exp_bound(double a, double b, double lambda) {
    const double p = separation_probability(a, b, lambda).probability;
    LemmaBound bound;
    bound.lhs = std::abs(2.0 * lambda * p - std::abs(a - b));
    bound.rhs = phi_lambda(a, lambda) + phi_lambda(b, lambda);
    bound.holds = bound.lhs <= bound.rhs + 1e-12;
    return bound;
}

}  // namespace htess::oracle
