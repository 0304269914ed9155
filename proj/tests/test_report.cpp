#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "htess/report.hpp"

using namespace htess;

namespace {

PointSet small_set() {
    auto s = derive_stream(1, "report-set");
    std::vector<double> c;
    for (int i = 0; i < 15; ++i) {
        const auto v = sample_ball(s, 4);
        c.insert(c.end(), v.begin(), v.end());
    }
    return PointSet(4, c);
}

}  // namespace

TEST_CASE("format_number") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(-2.5) == "-2.5");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -1.7976931348623157e308}) {
        CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("parse_format") {
    CHECK(parse_format("csv") == ReportFormat::csv);
    CHECK(parse_format("json") == ReportFormat::json);
    CHECK(extension(ReportFormat::csv) == "csv");
    CHECK_THROWS(parse_format("xml"));
}

TEST_CASE("dump_json renders floats exactly and non-finite values as null") {
    Json j{{"a", 0.1}, {"b", std::numeric_limits<double>::quiet_NaN()}, {"c", 3}, {"d", "x"}};
    const auto text = dump_json(j);
    CHECK(text.find("0.10000000000000001") != std::string::npos);
    const auto back = Json::parse(text);
    CHECK(back["a"].get<double>() == 0.1);
    CHECK(back["b"].is_null());
    CHECK(back["c"].get<int>() == 3);
    CHECK(back["d"] == "x");
}

TEST_CASE("empty sweep curve gives a header-only CSV") {
    SweepCurve empty;
    const auto text = render_report(empty, ReportFormat::csv);
    CHECK(text == "m,success_rate,median_sup,trials,delta,lambda\n");
    const auto j = Json::parse(render_report(empty, ReportFormat::json));
    CHECK(j["points"].empty());
}

TEST_CASE("distortion report round-trips through JSON") {
    const auto t = small_set();
    auto plan = plan_parameters(t, 0.2, PlannerConstants{}, 0.0, 0.0);
    plan.m = 400;
    const auto r = run_embedding_trial(t, plan, 3);
    const auto j = Json::parse(render_report(r, ReportFormat::json));
    CHECK(j["sup_distortion"].get<double>() == r.sup_distortion);
    CHECK(j["lambda"].get<double>() == r.lambda);
    CHECK(j["pair_count"].get<std::size_t>() == r.pair_count);
    CHECK(j["histogram"].get<std::vector<std::size_t>>() == r.histogram);
    CHECK(j["witness_i"].get<std::size_t>() == r.witness.first);

    const auto csv = render_report(r, ReportFormat::csv);
    std::size_t lines = 0;
    for (char ch : csv) lines += ch == '\n' ? 1 : 0;
    CHECK(lines == r.histogram.size() + 1);
}

TEST_CASE("reports are byte-identical across reruns") {
    const auto t = small_set();
    const std::vector<std::size_t> grid{16, 64, 256};
    const auto a = render_report(run_sweep(t, 0.2, grid, 5, 9), ReportFormat::json);
    const auto b = render_report(run_sweep(t, 0.2, grid, 5, 9), ReportFormat::json);
    CHECK(a == b);
    CHECK(render_report(run_sweep(t, 0.2, grid, 5, 9), ReportFormat::csv) ==
          render_report(run_sweep(t, 0.2, grid, 5, 9), ReportFormat::csv));
}

TEST_CASE("every report type renders in both formats") {
    const auto t = small_set();
    CHECK_FALSE(render_report(plan_parameters(t, 0.2, {}, 1.0, 0.5), ReportFormat::json).empty());
    CHECK_FALSE(render_report(run_minimal_shift(1.0, 0.05, 0.05, 20, 5, 1), ReportFormat::csv).empty());
    CHECK_FALSE(render_report(run_order_stats(100, 1.0, 10, 5, 1), ReportFormat::csv).empty());
    CHECK_FALSE(render_report(run_kappa_calibration(100, 4, 5, 1), ReportFormat::json).empty());
    const std::vector<double> lambdas{1.0};
    const auto grid = decimal_grid(-2, 2, 1);
    const auto sp = run_sep_prob_grid(lambdas, grid, 1000, 1);
    const auto csv = render_report(sp, ReportFormat::csv);
    std::size_t lines = 0;
    for (char ch : csv) lines += ch == '\n' ? 1 : 0;
    CHECK(lines == sp.rows.size() + 1);
}

TEST_CASE("write_text_file errors name the path") {
    const auto dir = std::filesystem::temp_directory_path() / "htess-report-test";
    std::filesystem::create_directories(dir);
    const auto good = dir / "ok.txt";
    write_text_file(good, "hello\n");
    std::ifstream in(good);
    std::string line;
    std::getline(in, line);
    CHECK(line == "hello");

    const auto bad = dir / "missing-dir" / "out.json";
    try {
        write_text_file(bad, "x");
        FAIL("expected an error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find(bad.string()) != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}
