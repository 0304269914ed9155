#pragma once

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "htess/experiments.hpp"
#include "htess/geometry.hpp"

namespace htess {

using Json = nlohmann::ordered_json;

enum class ReportFormat { csv, json };

ReportFormat parse_format(std::string_view name);
std::string_view extension(ReportFormat format);

/// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double value);

/// Flat table for CSV output: one header row, scalar cells.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Json>> rows;
};

/// Pretty-printed JSON with every float rendered by format_number; non-finite floats become null.
std::string dump_json(const Json& value);
std::string dump_csv(const Table& table);

Json to_json(const TessellationPlan& plan);
Json to_json(const DistortionReport& report);
Json to_json(const SweepCurve& curve);
Json to_json(const VerifyReport& report);
Json to_json(const WitnessResult& result);
Json to_json(const CounterexampleReport& report);
Json to_json(const MinimalShiftReport& report);
Json to_json(const OrderStatsReport& report);
Json to_json(const DvoretzkyReport& report);
Json to_json(const B1Report& report);
Json to_json(const SepProbReport& report);
Json to_json(const OracleCheckReport& report);
Json to_json(const KappaReport& report);
Json to_json(const GoodPositionReport& report);

Table to_table(const TessellationPlan& plan);
Table to_table(const DistortionReport& report);
Table to_table(const SweepCurve& curve);
Table to_table(const VerifyReport& report);
Table to_table(const WitnessResult& result);
Table to_table(const CounterexampleReport& report);
Table to_table(const MinimalShiftReport& report);
Table to_table(const OrderStatsReport& report);
Table to_table(const DvoretzkyReport& report);
Table to_table(const B1Report& report);
Table to_table(const SepProbReport& report);
Table to_table(const OracleCheckReport& report);
Table to_table(const KappaReport& report);
Table to_table(const GoodPositionReport& report);

template <typename Report>
std::string render_report(const Report& report, ReportFormat format) {
    return format == ReportFormat::json ? dump_json(to_json(report)) : dump_csv(to_table(report));
}

template <typename Report>
void emit_report(const Report& report, ReportFormat format, std::ostream& sink) {
    sink << render_report(report, format);
    sink.flush();
    if (!sink) {
        throw std::runtime_error("emit_report: write to sink failed");
    }
}

/// Writes `text` to `path`; failures name the path.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace htess
