#include "htess/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace htess {

namespace {

void dump_value(const Json& v, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (v.type()) {
        case Json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) {
                    out += ",\n";
                }
                first = false;
                out += inner + Json(it.key()).dump() + ": ";
                dump_value(it.value(), out, indent + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case Json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i > 0) {
                    out += ",\n";
                }
                out += inner;
                dump_value(v[i], out, indent + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case Json::value_t::number_float: {
            const double d = v.get<double>();
            out += std::isfinite(d) ? format_number(d) : "null";
            return;
        }
        default:
            out += v.dump();
    }
}

std::string csv_cell(const Json& v) {
    switch (v.type()) {
        case Json::value_t::number_float: return format_number(v.get<double>());
        case Json::value_t::string: {
            const auto s = v.get<std::string>();
            if (s.find_first_of(",\"\n") == std::string::npos) {
                return s;
            }
            std::string quoted = "\"";
            for (char c : s) {
                quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
            }
            return quoted + "\"";
        }
        case Json::value_t::boolean: return v.get<bool>() ? "true" : "false";
        case Json::value_t::null: return "";
        default: return v.dump();
    }
}

Json width_json(const WidthEstimate& w) {
    return Json{{"mean", w.mean}, {"std_error", w.std_error}, {"draws", w.draws}};
}

/// Single-row table from a flat JSON object.
Table scalar_table(const Json& object) {
    Table t;
    std::vector<Json> row;
    for (auto it = object.begin(); it != object.end(); ++it) {
        if (it.value().is_structured()) {
            continue;
        }
        t.columns.push_back(it.key());
        row.push_back(it.value());
    }
    t.rows.push_back(std::move(row));
    return t;
}

}  // namespace

ReportFormat parse_format(std::string_view name) {
    if (name == "csv") {
        return ReportFormat::csv;
    }
    if (name == "json") {
        return ReportFormat::json;
    }
    throw std::invalid_argument("unknown report format \"" + std::string(name) + "\" (expected csv or json)");
}

std::string_view extension(ReportFormat format) { return format == ReportFormat::json ? "json" : "csv"; }

std::string format_number(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string dump_json(const Json& value) {
    std::string out;
    dump_value(value, out, 0);
    out += "\n";
    return out;
}

std::string dump_csv(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out += (i ? "," : "") + csv_cell(Json(table.columns[i]));
    }
    out += "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += (i ? "," : "") + csv_cell(row[i]);
        }
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------

Json to_json(const TessellationPlan& p) {
    return Json{{"delta", p.delta},
                {"theta", p.theta},
                {"lambda", p.lambda},
                {"m", p.m},
                {"kappa", p.kappa},
                {"c0", p.constants.c0},
                {"c1", p.constants.c1},
                {"c2", p.constants.c2},
                {"radius", p.radius},
                {"dim", p.dim},
                {"log_cover", p.log_cover},
                {"local_width", p.local_width}};
}

Table to_table(const TessellationPlan& p) { return scalar_table(to_json(p)); }

Json to_json(const DistortionReport& r) {
    return Json{{"sup_distortion", r.sup_distortion},
                {"witness_i", r.witness.first},
                {"witness_j", r.witness.second},
                {"pair_count", r.pair_count},
                {"delta", r.delta},
                {"lambda", r.lambda},
                {"m", r.m},
                {"bin_width", r.bin_width},
                {"histogram", r.histogram}};
}

Table to_table(const DistortionReport& r) {
    Table t;
    t.columns = {"bin", "lower", "upper", "count", "sup_distortion", "witness_i", "witness_j", "pair_count"};
    for (std::size_t b = 0; b < r.histogram.size(); ++b) {
        t.rows.push_back({b, static_cast<double>(b) * r.bin_width, static_cast<double>(b + 1) * r.bin_width,
                          r.histogram[b], r.sup_distortion, r.witness.first, r.witness.second, r.pair_count});
    }
    return t;
}

Json to_json(const SweepCurve& c) {
    Json points = Json::array();
    for (std::size_t i = 0; i < c.m_values.size(); ++i) {
        points.push_back(Json{{"m", c.m_values[i]}, {"success_rate", c.success_rate[i]}, {"median_sup", c.median_sup[i]}});
    }
    return Json{{"delta", c.delta},
                {"lambda", c.lambda},
                {"trials", c.trials},
                {"threshold_m", sweep_threshold(c)},
                {"points", std::move(points)}};
}

Table to_table(const SweepCurve& c) {
    Table t;
    t.columns = {"m", "success_rate", "median_sup", "trials", "delta", "lambda"};
    for (std::size_t i = 0; i < c.m_values.size(); ++i) {
        t.rows.push_back({c.m_values[i], c.success_rate[i], c.median_sup[i], c.trials, c.delta, c.lambda});
    }
    return t;
}

Json to_json(const VerifyReport& r) {
    return Json{{"codes", r.codes}, {"mismatched", r.mismatched}, {"distortion", to_json(r.distortion)}};
}

Table to_table(const VerifyReport& r) {
    Table t;
    t.columns = {"codes", "mismatched", "sup_distortion", "witness_i", "witness_j", "pair_count", "delta"};
    t.rows.push_back({r.codes, r.mismatched, r.distortion.sup_distortion, r.distortion.witness.first,
                      r.distortion.witness.second, r.distortion.pair_count, r.distortion.delta});
    return t;
}

Json to_json(const WitnessResult& w) {
    return Json{{"found", w.found},
                {"k", w.k},
                {"norm", w.norm},
                {"flips", w.flips},
                {"scale", w.scale},
                {"distortion", w.distortion},
                {"diagnostic", w.diagnostic},
                {"coordinates", w.coordinates},
                {"t_star", w.t_star}};
}

Table to_table(const WitnessResult& w) { return scalar_table(to_json(w)); }

namespace {

Json row_json(const CounterexampleRow& r) {
    return Json{{"m", r.m},
                {"k", r.k},
                {"seeds", r.seeds},
                {"failure_rate", r.failure_rate},
                {"scan_failure_rate", r.scan_failure_rate},
                {"witness_failure_rate", r.witness_failure_rate},
                {"witness_found_rate", r.witness_found_rate},
                {"median_scan_sup", r.median_scan_sup}};
}

}  // namespace

Json to_json(const CounterexampleReport& r) {
    return Json{{"n", r.n},
                {"points", r.points},
                {"lambda", r.lambda},
                {"width", width_json(r.width)},
                {"local_width", width_json(r.local_width)},
                {"m_low", r.m_low},
                {"m_high", r.m_high},
                {"separation", r.separation},
                {"low", row_json(r.low)},
                {"high", row_json(r.high)}};
}

Table to_table(const CounterexampleReport& r) {
    Table t;
    t.columns = {"regime", "m", "k", "seeds", "failure_rate", "scan_failure_rate", "witness_failure_rate",
                 "witness_found_rate", "median_scan_sup", "lambda", "width", "local_width", "separation"};
    for (const auto& [name, row] : {std::pair<const char*, const CounterexampleRow&>{"low", r.low}, {"high", r.high}}) {
        t.rows.push_back({name, row.m, row.k, row.seeds, row.failure_rate, row.scan_failure_rate,
                          row.witness_failure_rate, row.witness_found_rate, row.median_scan_sup, r.lambda,
                          r.width.mean, r.local_width.mean, r.separation});
    }
    return t;
}

Json to_json(const MinimalShiftReport& r) {
    return Json{{"norm_x", r.norm_x},     {"delta", r.delta},       {"lambda", r.lambda},
                {"m", r.m},               {"trials", r.trials},     {"failures", r.failures},
                {"failure_frequency", r.failure_frequency}};
}

Table to_table(const MinimalShiftReport& r) { return scalar_table(to_json(r)); }

Json to_json(const OrderStatsReport& r) {
    return Json{{"m", r.m},           {"lambda", r.lambda},   {"k", r.k},
                {"trials", r.trials}, {"holding", r.holding}, {"frequency", r.frequency}};
}

Table to_table(const OrderStatsReport& r) { return scalar_table(to_json(r)); }

Json to_json(const DvoretzkyReport& r) {
    Json trials = Json::array();
    for (const auto& t : r.trials) {
        trials.push_back(Json{{"inradius", t.inradius},
                              {"sigma_min", t.sigma_min},
                              {"ratio", t.ratio},
                              {"sigma_rel_error", t.sigma_rel_error}});
    }
    return Json{{"n", r.n},
                {"points", r.points},
                {"s", r.s},
                {"direction_count", r.direction_count},
                {"width", width_json(r.width)},
                {"dvoretzky_dim", r.dvoretzky_dim},
                {"s_within_dimension", r.s_within_dimension},
                {"min_ratio", r.min_ratio},
                {"median_ratio", r.median_ratio},
                {"max_ratio", r.max_ratio},
                {"max_sigma_rel_error", r.max_sigma_rel_error},
                {"trials", std::move(trials)}};
}

Table to_table(const DvoretzkyReport& r) {
    Table t;
    t.columns = {"trial", "inradius", "sigma_min", "ratio", "sigma_rel_error", "width", "s", "direction_count"};
    for (std::size_t i = 0; i < r.trials.size(); ++i) {
        const auto& d = r.trials[i];
        t.rows.push_back({i, d.inradius, d.sigma_min, d.ratio, d.sigma_rel_error, r.width.mean, r.s,
                          r.direction_count});
    }
    return t;
}

Json to_json(const B1Report& r) {
    return Json{{"n", r.n},           {"points", r.points},       {"delta", r.delta},        {"k", r.k},
                {"trials", r.trials}, {"successes", r.successes}, {"frequency", r.frequency}};
}

Table to_table(const B1Report& r) { return scalar_table(to_json(r)); }

Json to_json(const SepProbReport& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        rows.push_back(Json{{"lambda", row.lambda},
                            {"a", row.a},
                            {"b", row.b},
                            {"region", row.region},
                            {"exact", row.exact},
                            {"monte_carlo", row.monte_carlo},
                            {"tolerance", row.tolerance},
                            {"pass", row.pass},
                            {"lemma_lhs", row.lemma_lhs},
                            {"lemma_rhs", row.lemma_rhs},
                            {"lemma_holds", row.lemma_holds}});
    }
    return Json{{"samples", r.samples},
                {"failures", r.failures},
                {"lemma_failures", r.lemma_failures},
                {"lemma_equalities", r.lemma_equalities},
                {"rows", std::move(rows)}};
}

Table to_table(const SepProbReport& r) {
    Table t;
    t.columns = {"lambda", "a", "b", "region", "exact", "monte_carlo", "tolerance", "pass", "lemma_lhs", "lemma_rhs",
                 "lemma_holds"};
    for (const auto& row : r.rows) {
        t.rows.push_back({row.lambda, row.a, row.b, row.region, row.exact, row.monte_carlo, row.tolerance, row.pass,
                          row.lemma_lhs, row.lemma_rhs, row.lemma_holds});
    }
    return t;
}

Json to_json(const OracleCheckReport& r) {
    return Json{{"expected", r.expected},
                {"mc_mean", r.mc_mean},
                {"std_error", r.std_error},
                {"dithers", r.dithers},
                {"pass", r.pass}};
}

Table to_table(const OracleCheckReport& r) { return scalar_table(to_json(r)); }

Json to_json(const KappaReport& r) {
    return Json{{"m", r.m}, {"n", r.n}, {"matrices", r.matrices}, {"mean", r.mean}, {"std_error", r.std_error}};
}

Table to_table(const KappaReport& r) { return scalar_table(to_json(r)); }

Json to_json(const GoodPositionReport& r) {
    return Json{{"m", r.m},
                {"k", r.k},
                {"seeds", r.seeds},
                {"width", width_json(r.width)},
                {"max_ratio", r.max_ratio},
                {"ratios", r.ratios}};
}

Table to_table(const GoodPositionReport& r) {
    Table t;
    t.columns = {"seed", "ratio", "m", "k", "width"};
    for (std::size_t i = 0; i < r.ratios.size(); ++i) {
        t.rows.push_back({i, r.ratios[i], r.m, r.k, r.width.mean});
    }
    return t;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

}  // namespace htess
