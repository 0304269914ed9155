#pragma once

#include <span>
#include <string_view>

#include "htess/randkit.hpp"

// Closed-form probabilities over a uniform dither tau ~ U[-lambda, lambda].
namespace htess::oracle {

/// Region of (a, b) relative to the window [-lambda, lambda]. "in" includes the boundary |x| = lambda.
enum class SeparationRegion {
    both_inside,    // |a|, |b| <= lambda
    same_side_out,  // a, b > lambda or a, b < -lambda
    opposite_out,   // one above lambda, the other below -lambda
    a_out_b_in,     // a > lambda, |b| <= lambda
    b_out_a_in,     // b > lambda, |a| <= lambda
    a_negout_b_in,  // a < -lambda, |b| <= lambda
    b_negout_a_in,  // b < -lambda, |a| <= lambda
};

std::string_view region_name(SeparationRegion region);

struct SeparationCase {
    SeparationRegion region = SeparationRegion::both_inside;
    double probability = 0.0;
};

/// (|x| - lambda) if |x| >= lambda, else 0.
double phi_lambda(double x, double lambda);

/// P(sign(a + tau) != sign(b + tau)).
SeparationCase separation_probability(double a, double b, double lambda);

/// E_tau d_H(f(x), f(y)) for fixed A: sum of per-row separation probabilities.
double expected_hamming(const GaussianMatrix& a, std::span<const double> x, std::span<const double> y, double lambda);

struct LemmaBound {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// |2 lambda p - |a - b|| <= phi_lambda(a) + phi_lambda(b), with 1e-12 slack.
LemmaBound lemma_exp_bound(double a, double b, double lambda);

}  // namespace htess::oracle
