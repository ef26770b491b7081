#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psg/core.hpp"

namespace psg {

inline constexpr const char* kTraceSchema = "psg-trace v1";

/// Run-level data stored alongside the per-iteration rows of a trace.
struct TraceMeta {
    double L = 0.0;
    double mu = 0.0;
    std::optional<double> J_star;
    std::optional<double> c_omega;
    double plateau_frac = 0.01;
    bool e_analytic = false;
    bool superiorized = false;
    Eigen::Index n = 0;
    Vector final_x;
};

struct Trace {
    TraceMeta meta;
    std::vector<IterationRecord> records;
};

/// Column names in file order for an n-dimensional run.
std::vector<std::string> trace_columns(bool superiorized, Eigen::Index n);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

void write_trace_csv(const std::string& path, const RunReport& report, const TraceMeta& meta);
std::string trace_csv(const RunReport& report, const TraceMeta& meta);

/// Throws parse-error on schema mismatch, malformed rows or an empty trace.
Trace read_trace_csv(const std::string& path);
Trace parse_trace_csv(const std::string& text);

std::string verdict_line(const std::string& name, const Verdict& v);

std::string report_json(const RunReport& report);
void write_report_json(const std::string& path, const RunReport& report);

} // namespace psg
