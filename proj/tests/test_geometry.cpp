#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "htess/experiments.hpp"
#include "htess/geometry.hpp"

using namespace htess;

namespace {

const double kHalfNormalMean = std::sqrt(2.0 / std::numbers::pi);

// E max(|g1|, |g2|) from an independent 10^7-draw run (numpy, seed 20261016):
// 1.1286580 with standard error 1.9e-4.
constexpr double kMaxTwoHalfNormals = 1.1286580;
constexpr double kMaxTwoHalfNormalsSE = 1.9e-4;

// (E max_i |g_i|)^2 over 256 coordinates, same independent run: 9.27187, standard error 2.3e-3.
constexpr double kDStar256 = 9.27187;
constexpr double kDStar256SE = 2.3e-3;

PointSet ball_sample(std::uint64_t seed, std::size_t n, std::size_t count) {
    auto s = derive_stream(seed, "ball-sample");
    std::vector<double> c;
    for (std::size_t i = 0; i < count; ++i) {
        const auto v = sample_ball(s, n);
        c.insert(c.end(), v.begin(), v.end());
    }
    return PointSet(n, c);
}

PointSet basis(std::size_t n, std::vector<std::size_t> which) {
    std::vector<double> c;
    for (std::size_t i : which) {
        std::vector<double> e(n, 0.0);
        e[i] = 1.0;
        c.insert(c.end(), e.begin(), e.end());
    }
    return PointSet(n, c);
}

}  // namespace

TEST_CASE("PointSet invariants") {
    const PointSet t({{3.0, 4.0}, {1.0, 0.0}});
    CHECK(t.dim() == 2);
    CHECK(t.size() == 2);
    CHECK(t.radius() == 5.0);
    CHECK_THROWS_AS(PointSet({{1.0, 2.0}, {1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(PointSet(2, {1.0, NAN}), std::invalid_argument);
    CHECK_THROWS_AS(PointSet(2, {1.0, 2.0, 3.0}), std::invalid_argument);
    CHECK(t.symmetrized().size() == 4);
    CHECK(t.scaled(2.0).radius() == 10.0);
}

TEST_CASE("knorm examples") {
    const std::vector<double> v{3, 4, 0};
    CHECK(knorm(v, 1) == 4.0);
    CHECK(knorm(v, 2) == 5.0);
    CHECK(knorm(std::vector<double>{1, 1, 1, 1}, 4) == 2.0);
    CHECK_THROWS_AS(knorm(v, 0), std::invalid_argument);
    CHECK_THROWS_AS(knorm(v, 4), std::invalid_argument);
}

TEST_CASE("property: knorm monotone in s, full norm at s = m, homogeneous") {
    auto s = derive_stream(1, "knorm");
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t m = 1 + s.next_u64() % 40;
        std::vector<double> v(m);
        for (double& x : v) x = s.gaussian();
        double prev = 0;
        for (std::size_t k = 1; k <= m; ++k) {
            const double cur = knorm(v, k);
            CHECK(cur >= prev);
            prev = cur;
        }
        CHECK(knorm(v, m) == doctest::Approx(norm2(v)).epsilon(1e-14));
        const double alpha = -2.5;
        std::vector<double> w(v);
        for (double& x : w) x *= alpha;
        const std::size_t k = 1 + s.next_u64() % m;
        CHECK(knorm(w, k) == doctest::Approx(2.5 * knorm(v, k)).epsilon(1e-14));
    }
}

TEST_CASE("gaussian_width examples") {
    const auto e1 = gaussian_width(basis(3, {0}), 20000, derive_stream(2, "w"));
    CHECK(std::abs(e1.mean - kHalfNormalMean) <= 4.0 * e1.std_error);
    CHECK(e1.draws == 20000);

    const auto zero = gaussian_width(PointSet(3, {0, 0, 0}), 100, derive_stream(2, "w"));
    CHECK(zero.mean == 0.0);
    CHECK(zero.std_error == 0.0);

    const auto two = gaussian_width(basis(2, {0, 1}), 100000, derive_stream(3, "w2"));
    const double tol = 4.0 * std::hypot(two.std_error, kMaxTwoHalfNormalsSE);
    CHECK(std::abs(two.mean - kMaxTwoHalfNormals) <= tol);

    CHECK_THROWS_AS(gaussian_width(PointSet(), 10, derive_stream(1, "w")), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_width(basis(2, {0}), 1, derive_stream(1, "w")), std::invalid_argument);
}

TEST_CASE("gaussian_width: same handle, same estimate; exact scaling by powers of two") {
    const auto t = ball_sample(4, 6, 30);
    const auto h = derive_stream(4, "hom");
    const auto a = gaussian_width(t, 1000, h);
    const auto b = gaussian_width(t, 1000, h);
    CHECK(a.mean == b.mean);
    CHECK(gaussian_width(t.scaled(4.0), 1000, h).mean == 4.0 * a.mean);
    CHECK(gaussian_width(t.scaled(3.0), 1000, h).mean == doctest::Approx(3.0 * a.mean).epsilon(1e-13));
}

TEST_CASE("local_difference_width examples") {
    const auto t = ball_sample(5, 4, 12);
    const auto h = derive_stream(5, "local");
    const auto full = local_difference_width(t, 100.0, 500, h);
    CHECK(full.mean == gaussian_width(difference_set(t, 100.0), 500, h).mean);

    double min_dist = 1e9;
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = i + 1; j < t.size(); ++j) min_dist = std::min(min_dist, distance(t.point(i), t.point(j)));
    const auto tiny = local_difference_width(t, 0.5 * min_dist, 500, h);
    CHECK(tiny.mean == 0.0);

    const PointSet pair({{0.0, 0.0, 0.0}, {0.3, -0.4, 0.0}});
    const auto w = local_difference_width(pair, 0.5, 40000, h);
    CHECK(std::abs(w.mean - 0.5 * kHalfNormalMean) <= 4.0 * w.std_error);
}

TEST_CASE("greedy_net examples") {
    const PointSet t({{0.0}, {0.4}, {0.8}});
    const auto net = greedy_net(t, 0.5);
    CHECK(net.net_indices == std::vector<std::size_t>{0, 2});
    CHECK(net.assignment == std::vector<std::size_t>{0, 0, 2});

    CHECK(greedy_net(t, 1.0).net_indices.size() == 1);
    CHECK(greedy_net(t, 0.3).net_indices.size() == 3);
    CHECK_THROWS_AS(greedy_net(t, 0.0), std::invalid_argument);
}

TEST_CASE("property: greedy nets cover within theta and pack beyond theta") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto t = ball_sample(seed, 3, 80);
        const double theta = 0.2 + 0.05 * static_cast<double>(seed % 5);
        const auto net = greedy_net(t, theta);
        for (std::size_t i = 0; i < t.size(); ++i) {
            CHECK(distance(t.point(i), t.point(net.assignment[i])) <= theta);
        }
        for (std::size_t a = 0; a < net.net_indices.size(); ++a)
            for (std::size_t b = a + 1; b < net.net_indices.size(); ++b)
                CHECK(distance(t.point(net.net_indices[a]), t.point(net.net_indices[b])) > theta);
    }
}

TEST_CASE("plan_parameters examples") {
    PlannerConstants k;
    const auto plan = plan_parameters(1.0, 0.25, k, 10.0, 2.0);
    CHECK(plan.lambda == doctest::Approx(1.17741).epsilon(1e-5));
    CHECK(plan.theta == doctest::Approx(0.15657).epsilon(1e-4));
    CHECK(plan.m == 524);
    CHECK(plan.kappa == doctest::Approx(std::sqrt(std::numbers::pi / 2)));

    // R/delta < e: the log is clamped to 1
    CHECK(plan_lambda(1.0, 0.5, k) == 1.0);
    CHECK_THROWS_AS(plan_parameters(1.0, 0.6, k, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(plan_parameters(1.0, 0.0, k, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(plan_parameters(0.0, 0.1, k, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(plan_parameters(1.0, 0.1, PlannerConstants{1, 0, 1}, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("property: plans satisfy their invariants") {
    auto s = derive_stream(6, "plan");
    for (int trial = 0; trial < 500; ++trial) {
        const double r = 0.1 + 10.0 * s.uniform();
        const double delta = r / 2.0 * (0.01 + 0.99 * s.uniform());
        const PlannerConstants k{0.2 + s.uniform(), 0.2 + s.uniform(), 0.2 + s.uniform()};
        const auto p = plan_parameters(r, delta, k, 5.0 * s.uniform(), 3.0 * s.uniform());
        CHECK(p.m >= 1);
        CHECK(p.lambda >= k.c1 * r * std::sqrt(std::log(r / delta)) * (1 - 1e-12));
        CHECK(p.theta <= k.c0 * delta / std::sqrt(std::max(1.0, std::log(std::numbers::e * p.lambda / delta))) *
                             (1 + 1e-12));
    }
}

TEST_CASE("check_l1_concentration") {
    auto s = derive_stream(7, "l1");
    const auto a = sample_gaussian_matrix(s, 50, 3);
    const auto one = check_l1_concentration(a, PointSet({{0.1, 0.2, 0.3}}), 0.01);
    CHECK(one.deviation == 0.0);
    CHECK(one.pass);

    int good = 0;
    const PointSet pair({{1.0, 0.0, 0.0}, {0.2, 0.5, -0.3}});
    const double d = distance(pair.point(0), pair.point(1));
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto st = derive_stream(seed, "l1-pair");
        const auto big = sample_gaussian_matrix(st, 10000, 3);
        good += check_l1_concentration(big, pair, 0.1).deviation <= 0.05 * d ? 1 : 0;
    }
    CHECK(good >= 95);

    // One hyperplane at seed 1 misses the distance by far more than 0.01.
    auto pinned = derive_stream(1, "l1-tiny");
    const auto tiny = sample_gaussian_matrix(pinned, 1, 3);
    const auto bad = check_l1_concentration(tiny, pair, 0.01);
    CHECK_FALSE(bad.pass);
    CHECK(bad.witness == std::pair<std::size_t, std::size_t>{0, 1});
}

TEST_CASE("check_well_spread examples") {
    auto s = derive_stream(8, "ws");
    const auto a = sample_gaussian_matrix(s, 20, 4);
    const PointSet net({{0.5, -0.5, 0.1, 0.2}});
    const PointSet zero(4, std::vector<double>(4, 0.0));

    // s = floor(delta m / lambda) = m here, so the [s]-norm is the full norm
    const auto r = check_well_spread(a, net, zero, 1.0, 1.0);
    CHECK(r.s == 20);
    CHECK(r.osc_knorm == 0.0);
    CHECK(r.pass_osc);
    const auto proj = project(a, net);
    CHECK(r.bias_knorm == doctest::Approx(proj.row(0).norm() / std::sqrt(20.0)));
    CHECK(r.pass_bias == (r.bias_knorm <= 1.0));

    try {
        check_well_spread(a, net, zero, 0.01, 1.0);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("0.01") != std::string::npos);
        CHECK(msg.find("20") != std::string::npos);
    }
}

TEST_CASE("regularity holds on planner-sized instances") {
    // Calibrated c1 = 2: with c1 = 1 the bias condition fails in every seed.
    const PlannerConstants k{1.0, 2.0, 1.0};
    int bias = 0, osc = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto t = ball_sample(seed, 12, 150);
        auto s = derive_stream(seed, "regularity");
        const auto plan = plan_for_set(t, 0.2, k, 500, s.child("width"));
        const auto net = t.subset(greedy_net(t, plan.theta).net_indices);
        const auto diff = difference_set(t, plan.theta);
        const auto a = sample_gaussian_matrix(s, plan.m, 12);
        const auto r = check_regularity(a, net, diff, 0.2, plan.lambda);
        bias += r.pass_bias ? 1 : 0;
        osc += r.pass_osc ? 1 : 0;
    }
    CHECK(bias >= 45);
    CHECK(osc >= 45);
}

TEST_CASE("dvoretzky_dimension") {
    const double e1 = dvoretzky_dimension(basis(4, {0}), 40000, derive_stream(9, "d"));
    CHECK(e1 == doctest::Approx(2.0 / std::numbers::pi).epsilon(0.03));

    std::vector<double> c;
    for (std::size_t i = 0; i < 256; ++i) {
        std::vector<double> e(256, 0.0);
        e[i] = 1.0;
        c.insert(c.end(), e.begin(), e.end());
    }
    const PointSet axes(256, c);
    const auto w = gaussian_width(axes, 20000, derive_stream(9, "d256"));
    const double d = dvoretzky_dimension(axes, 20000, derive_stream(9, "d256"));
    CHECK(d == w.mean * w.mean);
    CHECK(std::abs(d - kDStar256) <= 4.0 * std::hypot(2.0 * w.mean * w.std_error, kDStar256SE));

    const auto t = ball_sample(10, 5, 40);
    const auto h = derive_stream(10, "scale");
    CHECK(dvoretzky_dimension(t.scaled(3.0), 2000, h) == doctest::Approx(dvoretzky_dimension(t, 2000, h)));
    CHECK_THROWS_AS(dvoretzky_dimension(PointSet(2, {0.0, 0.0}), 10, h), std::invalid_argument);
}

TEST_CASE("psi_profile") {
    const PointSet pair({{0.0, 0.0}, {0.6, 0.8}});
    const std::vector<double> grid{1.0, 2.0, 4.0};
    const auto psi = psi_profile(pair, grid, 16, 40000, derive_stream(11, "psi"));
    REQUIRE(psi.size() == 3);
    for (const auto& p : psi) {
        CHECK(std::abs(p.psi - kHalfNormalMean / (4.0 * p.r)) <= 4.0 * p.std_error);
    }
    // past the diameter the numerator is fixed, so psi falls like 1/r exactly
    CHECK(psi[0].psi > psi[1].psi);
    CHECK(psi[1].psi == doctest::Approx(psi[0].psi / 2.0).epsilon(1e-14));

    // Monotone on dense samples of convex sets, where T - T is close to star-shaped about 0.
    auto s = derive_stream(12, "psi-mono");
    std::vector<double> disc;
    for (int i = 0; i < 300; ++i) {
        const auto v = sample_ball(s, 2);
        disc.insert(disc.end(), v.begin(), v.end());
    }
    const std::vector<double> fine{0.2, 0.4, 0.8, 1.6, 3.2};
    const auto prof = psi_profile(PointSet(2, disc), fine, 100, 2000, derive_stream(12, "psi-draws"));
    for (std::size_t i = 1; i < prof.size(); ++i) {
        CHECK(prof[i].psi <= prof[i - 1].psi + 4.0 * std::hypot(prof[i].std_error, prof[i - 1].std_error));
    }

    // A sparse sample rises below its typical pair spacing, where (T - T) cap rB is nearly {0}.
    const auto sparse = psi_profile(ball_sample(12, 5, 40), std::vector<double>{0.2, 0.8}, 100, 2000,
                                    derive_stream(12, "psi-draws"));
    CHECK(sparse[0].psi < sparse[1].psi);
    CHECK_THROWS_AS(psi_profile(pair, std::vector<double>{0.0}, 10, 10, derive_stream(1, "p")), std::invalid_argument);
}

TEST_CASE("good-position inequality: the measured ratio stays bounded") {
    const auto t = ball_sample(13, 20, 100);
    const auto report = run_good_position(t, 500, 25, 100, 13, 2000, 1);
    MESSAGE("max ratio over 100 seeds: " << report.max_ratio);
    CHECK(report.ratios.size() == 100);
    CHECK(report.max_ratio > 0.0);
    CHECK(report.max_ratio <= 2.0);
}
