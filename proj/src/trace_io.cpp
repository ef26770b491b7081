#include "psg/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "psg/error.hpp"

namespace psg {

namespace {

const std::vector<std::string> kBaseColumns = {
    "k",          "tau",        "J",           "J_next",      "res_norm", "step_norm",
    "e_norm",     "theta_norm", "delta_norm",  "descent_lhs", "descent_rhs", "lambda",
};
const std::vector<std::string> kSupColumns = {"beta", "applied", "tv", "e_bound"};

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        fail(ErrorCode::parse_error, "trace line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

std::optional<double> parse_optional(const std::string& s, std::size_t line) {
    if (s.empty()) return std::nullopt;
    return parse_double(s, line);
}

void ensure_parent(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

void write_text(const std::string& path, const std::string& text) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::invalid_argument, "cannot write '" + path + "'");
    out << text;
}

nlohmann::json opt_json(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return *v;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

std::vector<std::string> trace_columns(bool superiorized, Eigen::Index n) {
    std::vector<std::string> cols = kBaseColumns;
    if (superiorized) cols.insert(cols.end(), kSupColumns.begin(), kSupColumns.end());
    for (Eigen::Index j = 0; j < n; ++j) cols.push_back("x_" + std::to_string(j));
    return cols;
}

std::string trace_csv(const RunReport& report, const TraceMeta& meta) {
    std::string out;
    out += "# ";
    out += kTraceSchema;
    out += ",L=" + format_double(meta.L) + ",mu=" + format_double(meta.mu);
    out += ",J_star=" + (meta.J_star ? format_double(*meta.J_star) : std::string());
    out += ",c_omega=" + (meta.c_omega ? format_double(*meta.c_omega) : std::string());
    out += ",plateau_frac=" + format_double(meta.plateau_frac);
    out += std::string(",e_analytic=") + (meta.e_analytic ? "1" : "0");
    out += std::string(",superiorized=") + (meta.superiorized ? "1" : "0");
    out += ",n=" + std::to_string(meta.n) + "\n";
    out += "# final_x";
    for (Eigen::Index j = 0; j < meta.final_x.size(); ++j) out += "," + format_double(meta.final_x(j));
    out += "\n";

    const auto cols = trace_columns(meta.superiorized, meta.n);
    for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "," : "") + cols[c];
    out += "\n";

    for (const auto& r : report.records) {
        out += std::to_string(r.k);
        for (double v : {r.tau, r.J, r.J_next, r.res_norm, r.step_norm, r.e_norm, r.theta_norm,
                         r.delta_norm, r.descent_lhs, r.descent_rhs})
            out += "," + format_double(v);
        out += "," + (r.lambda ? format_double(*r.lambda) : std::string());
        if (meta.superiorized) {
            const SuperiorizationInfo s = r.sup.value_or(SuperiorizationInfo{});
            out += "," + format_double(s.beta) + "," + (s.applied ? "1" : "0") + "," +
                   format_double(s.tv) + "," + format_double(s.e_bound);
        }
        if (r.x.size() != 0 && r.x.size() != meta.n)
            fail(ErrorCode::invalid_argument, "record dimension does not match the trace");
        for (Eigen::Index j = 0; j < meta.n; ++j)
            out += "," + (r.x.size() ? format_double(r.x(j)) : std::string());
        out += "\n";
    }
    return out;
}

void write_trace_csv(const std::string& path, const RunReport& report, const TraceMeta& meta) {
    write_text(path, trace_csv(report, meta));
}

Trace parse_trace_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    Trace trace;
    auto& meta = trace.meta;

    const std::string tag = std::string("# ") + kTraceSchema;
    if (!std::getline(in, line) || line.rfind(tag, 0) != 0)
        fail(ErrorCode::parse_error, "trace schema mismatch: expected '" + tag + "' header");
    ++lineno;
    bool have_n = false;
    for (const auto& field : split(line.substr(tag.size()), ',')) {
        if (field.empty()) continue;
        const auto eq = field.find('=');
        if (eq == std::string::npos) fail(ErrorCode::parse_error, "bad trace metadata '" + field + "'");
        const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
        if (key == "L") meta.L = parse_double(value, lineno);
        else if (key == "mu") meta.mu = parse_double(value, lineno);
        else if (key == "J_star") meta.J_star = parse_optional(value, lineno);
        else if (key == "c_omega") meta.c_omega = parse_optional(value, lineno);
        else if (key == "plateau_frac") meta.plateau_frac = parse_double(value, lineno);
        else if (key == "e_analytic") meta.e_analytic = value == "1";
        else if (key == "superiorized") meta.superiorized = value == "1";
        else if (key == "n") {
            meta.n = static_cast<Eigen::Index>(parse_double(value, lineno));
            have_n = true;
        } else fail(ErrorCode::parse_error, "unknown trace metadata key '" + key + "'");
    }
    if (!have_n || meta.n <= 0) fail(ErrorCode::parse_error, "trace metadata lacks n");

    if (!std::getline(in, line) || line.rfind("# final_x", 0) != 0)
        fail(ErrorCode::parse_error, "trace lacks the final_x line");
    ++lineno;
    {
        auto cells = split(line, ',');
        cells.erase(cells.begin());
        meta.final_x.resize(static_cast<Eigen::Index>(cells.size()));
        for (std::size_t j = 0; j < cells.size(); ++j)
            meta.final_x(static_cast<Eigen::Index>(j)) = parse_double(cells[j], lineno);
    }

    const auto expected = trace_columns(meta.superiorized, meta.n);
    if (!std::getline(in, line) || split(line, ',') != expected)
        fail(ErrorCode::parse_error, "trace schema mismatch: unexpected column header");
    ++lineno;

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != expected.size())
            fail(ErrorCode::parse_error, "trace line " + std::to_string(lineno) + " has " +
                                             std::to_string(cells.size()) + " fields, expected " +
                                             std::to_string(expected.size()));
        IterationRecord r;
        std::size_t c = 0;
        r.k = static_cast<std::size_t>(parse_double(cells[c++], lineno));
        for (double* f : {&r.tau, &r.J, &r.J_next, &r.res_norm, &r.step_norm, &r.e_norm,
                          &r.theta_norm, &r.delta_norm, &r.descent_lhs, &r.descent_rhs})
            *f = parse_double(cells[c++], lineno);
        r.lambda = parse_optional(cells[c++], lineno);
        if (meta.superiorized) {
            SuperiorizationInfo s;
            s.beta = parse_double(cells[c++], lineno);
            s.applied = cells[c++] == "1";
            s.tv = parse_double(cells[c++], lineno);
            s.e_bound = parse_double(cells[c++], lineno);
            r.sup = s;
        }
        if (!cells[c].empty()) {
            r.x.resize(meta.n);
            for (Eigen::Index j = 0; j < meta.n; ++j) r.x(j) = parse_double(cells[c++], lineno);
        }
        trace.records.push_back(std::move(r));
    }
    if (trace.records.empty()) fail(ErrorCode::parse_error, "trace has no iteration rows");
    return trace;
}

Trace read_trace_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::parse_error, "cannot open trace '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_trace_csv(buf.str());
}

std::string verdict_line(const std::string& name, const Verdict& v) {
    std::string out = name + ": " + to_string(v.status);
    if (v.k) out += " at k=" + std::to_string(*v.k);
    if (!v.detail.empty()) out += " (" + v.detail + ")";
    return out;
}

std::string report_json(const RunReport& r) {
    nlohmann::json doc;
    doc["termination"] = to_string(r.termination);
    if (!r.termination_detail.empty()) doc["termination_detail"] = r.termination_detail;
    doc["iterations"] = r.iterations;
    doc["final_J"] = r.final_J;
    doc["final_res_norm"] = r.final_res_norm;
    doc["final_x"] = std::vector<double>(r.final_x.data(), r.final_x.data() + r.final_x.size());
    doc["x0_projected"] = r.x0_projected;
    doc["L"] = r.L;
    doc["mu"] = r.mu;
    doc["tau_sup"] = r.tau_sup;
    doc["tau_inf"] = r.tau_inf;
    doc["eta1"] = r.eta1;
    doc["eta2"] = r.eta2;
    doc["plan"] = r.plan;
    doc["scaling"] = r.scaling;
    doc["J_star"] = opt_json(r.J_star);
    doc["c_omega"] = opt_json(r.c_omega);
    doc["final_tv"] = opt_json(r.final_tv);
    doc["baseline_tv"] = opt_json(r.baseline_tv);
    doc["baseline_distance"] = opt_json(r.baseline_distance);
    if (r.baseline_iterations) doc["baseline_iterations"] = *r.baseline_iterations;
    nlohmann::json certs = nlohmann::json::object();
    for (const auto& [name, v] : r.certificates) {
        nlohmann::json c;
        c["status"] = to_string(v.status);
        c["k"] = v.k ? nlohmann::json(*v.k) : nlohmann::json(nullptr);
        c["detail"] = v.detail;
        certs[name] = c;
    }
    doc["certificates"] = certs;
    doc["all_certificates_ok"] = r.all_certificates_ok();
    return doc.dump(2) + "\n";
}

void write_report_json(const std::string& path, const RunReport& report) {
    write_text(path, report_json(report));
}

} // namespace psg
