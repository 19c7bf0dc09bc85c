#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "relay/density.hpp"
#include "relay/errors.hpp"
#include "relay/executor.hpp"
#include "relay/expected_time.hpp"
#include "relay/optimizer.hpp"
#include "relay/subprocess.hpp"
#include "relay/timing.hpp"

namespace relay {

// All emitted numbers carry 12 significant digits.
inline std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace detail {

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

inline std::string json_number_or_null(const std::optional<double>& v) {
    return v ? fmt12(*v) : std::string("null");
}

}  // namespace detail

// --------------------------------------------------------- density specs

inline UnivariateDensity univariate_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "exponential")
        return ExponentialDensity{j.at("rate").get<double>()};
    if (type == "histogram") {
        HistogramDensity h;
        for (const auto& bin : j.at("bins"))
            h.bins.push_back({bin.at("lo").get<double>(),
                              bin.at("hi").get<double>(),
                              bin.at("height").get<double>()});
        return h;
    }
    if (type == "tabulated") {
        TabulatedDensity t;
        t.t = j.at("t").get<std::vector<double>>();
        t.p = j.at("p").get<std::vector<double>>();
        if (t.t.size() != t.p.size())
            throw parse_error("tabulated density: t and p differ in length");
        return t;
    }
    throw parse_error("unknown marginal density type '" + type + "'");
}

inline JointDensity density_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "box") {
        BoxDensity d;
        for (const auto& box : j.at("boxes"))
            d.boxes.push_back({box.at("k").get<double>(), box.at("a").get<double>(),
                               box.at("b").get<double>(), box.at("c").get<double>(),
                               box.at("d").get<double>()});
        return d;
    }
    if (type == "product") {
        ProductDensity d;
        for (const auto& factor : j.at("factors"))
            d.factors.push_back(univariate_from_json(factor));
        return d;
    }
    if (type == "exp_poly")
        return ExpPolyDensity{j.at("a").get<double>(), j.at("b").get<double>(),
                              j.at("c").get<double>(), j.at("d").get<double>()};
    if (type == "rational_series") {
        RationalSeriesDensity d;
        d.c = j.value("c", 0.0);
        if (j.contains("d"))
            d.dcoef = j.at("d").get<std::vector<std::vector<double>>>();
        return d;
    }
    if (type == "grid") {
        if (j.contains("expression")) {
            const auto f = builtin_expression(j.at("expression").get<std::string>());
            const double x_max = j.at("x_max").get<double>();
            const double y_max = j.at("y_max").get<double>();
            const int nx = j.at("nx").get<int>();
            const int ny = j.at("ny").get<int>();
            const double grading = j.value("grading", 1.0);
            if (nx < 1 || ny < 1 || !(x_max > 0.0) || !(y_max > 0.0))
                throw parse_error("grid spec: nx, ny, x_max, y_max must be positive");
            auto g = tabulate_expression(f, graded_knots(x_max, nx, grading),
                                         graded_knots(y_max, ny, grading));
            if (j.contains("t_max")) g.t_max = j.at("t_max").get<double>();
            return g;
        }
        GridDensity g;
        g.x_knots = j.at("x_knots").get<std::vector<double>>();
        g.y_knots = j.at("y_knots").get<std::vector<double>>();
        for (const auto& row : j.at("cells"))
            g.cells.push_back(row.get<std::vector<double>>());
        if (g.x_knots.size() < 2 || g.y_knots.size() < 2)
            throw parse_error("grid spec: each axis needs at least two knots");
        if (g.cells.size() != g.x_knots.size() - 1)
            throw parse_error("grid spec: cells must have one row per x cell");
        for (const auto& row : g.cells)
            if (row.size() != g.y_knots.size() - 1)
                throw parse_error("grid spec: every cells row needs one value per y cell");
        g.t_max = j.contains("t_max")
                      ? j.at("t_max").get<double>()
                      : std::max(g.x_knots.back(), g.y_knots.back());
        return g;
    }
    throw parse_error("unknown density type '" + type + "'");
}

inline JointDensity density_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("density spec is not valid JSON: ") + e.what());
    }
    try {
        return density_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("density spec is malformed: ") + e.what());
    }
}

inline std::string univariate_to_json(const UnivariateDensity& d) {
    std::ostringstream out;
    if (const auto* e = std::get_if<ExponentialDensity>(&d)) {
        out << "{\"type\": \"exponential\", \"rate\": " << fmt12(e->rate) << "}";
    } else if (const auto* h = std::get_if<HistogramDensity>(&d)) {
        out << "{\"type\": \"histogram\", \"bins\": [";
        for (std::size_t i = 0; i < h->bins.size(); ++i) {
            if (i) out << ", ";
            out << "{\"lo\": " << fmt12(h->bins[i].lo)
                << ", \"hi\": " << fmt12(h->bins[i].hi)
                << ", \"height\": " << fmt12(h->bins[i].height) << "}";
        }
        out << "]}";
    } else {
        const auto& t = std::get<TabulatedDensity>(d);
        out << "{\"type\": \"tabulated\", \"t\": [";
        for (std::size_t i = 0; i < t.t.size(); ++i)
            out << (i ? ", " : "") << fmt12(t.t[i]);
        out << "], \"p\": [";
        for (std::size_t i = 0; i < t.p.size(); ++i)
            out << (i ? ", " : "") << fmt12(t.p[i]);
        out << "]}";
    }
    return out.str();
}

inline std::string density_to_json(const JointDensity& d) {
    std::ostringstream out;
    if (const auto* b = std::get_if<BoxDensity>(&d)) {
        out << "{\n  \"type\": \"box\",\n  \"boxes\": [\n";
        for (std::size_t i = 0; i < b->boxes.size(); ++i) {
            const auto& box = b->boxes[i];
            out << "    {\"k\": " << fmt12(box.k) << ", \"a\": " << fmt12(box.a)
                << ", \"b\": " << fmt12(box.b) << ", \"c\": " << fmt12(box.c)
                << ", \"d\": " << fmt12(box.d) << "}"
                << (i + 1 < b->boxes.size() ? ",\n" : "\n");
        }
        out << "  ]\n}";
    } else if (const auto* p = std::get_if<ProductDensity>(&d)) {
        out << "{\n  \"type\": \"product\",\n  \"factors\": [\n";
        for (std::size_t i = 0; i < p->factors.size(); ++i)
            out << "    " << univariate_to_json(p->factors[i])
                << (i + 1 < p->factors.size() ? ",\n" : "\n");
        out << "  ]\n}";
    } else if (const auto* e = std::get_if<ExpPolyDensity>(&d)) {
        out << "{\"type\": \"exp_poly\", \"a\": " << fmt12(e->a)
            << ", \"b\": " << fmt12(e->b) << ", \"c\": " << fmt12(e->c)
            << ", \"d\": " << fmt12(e->d) << "}";
    } else if (const auto* r = std::get_if<RationalSeriesDensity>(&d)) {
        out << "{\"type\": \"rational_series\", \"c\": " << fmt12(r->c)
            << ", \"d\": [";
        for (std::size_t m = 0; m < r->dcoef.size(); ++m) {
            if (m) out << ", ";
            out << "[";
            for (std::size_t n = 0; n < r->dcoef[m].size(); ++n)
                out << (n ? ", " : "") << fmt12(r->dcoef[m][n]);
            out << "]";
        }
        out << "]}";
    } else {
        const auto& g = std::get<GridDensity>(d);
        auto knots = [&](const std::vector<double>& ks) {
            std::string s = "[";
            for (std::size_t i = 0; i < ks.size(); ++i)
                s += (i ? ", " : "") + fmt12(ks[i]);
            return s + "]";
        };
        out << "{\n  \"type\": \"grid\",\n  \"x_knots\": " << knots(g.x_knots)
            << ",\n  \"y_knots\": " << knots(g.y_knots) << ",\n  \"cells\": [\n";
        for (std::size_t i = 0; i < g.cells.size(); ++i) {
            out << "    [";
            for (std::size_t j = 0; j < g.cells[i].size(); ++j)
                out << (j ? ", " : "") << fmt12(g.cells[i][j]);
            out << "]" << (i + 1 < g.cells.size() ? ",\n" : "\n");
        }
        out << "  ],\n  \"t_max\": " << fmt12(g.t_max) << "\n}";
    }
    return out.str();
}

// ------------------------------------------------------------- timing CSV

inline constexpr const char* kTimingHeader = "task_id,t1,t2";

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

inline double parse_number(const std::string& s, std::size_t line_no,
                           const char* what) {
    try {
        std::size_t consumed = 0;
        const double v = std::stod(s, &consumed);
        if (consumed != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw parse_error("line " + std::to_string(line_no) + ": cannot parse " +
                          what + " from '" + s + "'");
    }
}

}  // namespace detail

// Reads `task_id,t1,t2` rows. An entirely empty stream is zero samples, not
// a parse failure; a wrong header is.
inline TimingSamples timings_from_csv(std::istream& in,
                                      std::vector<std::string>* task_ids = nullptr) {
    TimingSamples samples;
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
            line.pop_back();
        if (line.empty()) continue;
        if (!saw_header) {
            if (line != kTimingHeader)
                throw parse_error("timing CSV must start with header '" +
                                  std::string(kTimingHeader) + "', got '" + line +
                                  "'");
            saw_header = true;
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 3)
            throw parse_error("line " + std::to_string(line_no) +
                              ": expected 3 fields, got " +
                              std::to_string(fields.size()));
        const double t1 = detail::parse_number(fields[1], line_no, "t1");
        const double t2 = detail::parse_number(fields[2], line_no, "t2");
        samples.pairs.emplace_back(t1, t2);
        if (task_ids) task_ids->push_back(fields[0]);
    }
    return samples;
}

inline void timings_to_csv(std::ostream& out,
                           const std::vector<std::string>& task_ids,
                           const TimingSamples& samples) {
    if (task_ids.size() != samples.pairs.size())
        throw contract_error("timings_to_csv: ids and samples differ in length");
    for (const auto& id : task_ids)
        if (id.find(',') != std::string::npos || id.find('\n') != std::string::npos)
            throw contract_error("timings_to_csv: task id '" + id +
                                 "' contains a CSV delimiter");
    out << kTimingHeader << "\n";
    for (std::size_t i = 0; i < samples.pairs.size(); ++i)
        out << task_ids[i] << "," << fmt12(samples.pairs[i].first) << ","
            << fmt12(samples.pairs[i].second) << "\n";
}

// ---------------------------------------------------------------- ET curve

inline constexpr const char* kCurveHeader = "tau,et,method,stderr";

struct CurvePoint {
    double tau = 0.0;
    EtResult result;
};

// One row per tau. A divergent evaluation leaves et and stderr empty and
// appends a trailing `divergent` flag field.
inline void curve_to_csv(std::ostream& out, const std::vector<CurvePoint>& points) {
    out << kCurveHeader << "\n";
    for (const auto& p : points) {
        out << fmt12(p.tau) << ",";
        if (p.result.value) out << fmt12(*p.result.value);
        out << "," << to_string(p.result.method) << ",";
        if (p.result.standard_error) out << fmt12(*p.result.standard_error);
        if (p.result.divergent()) out << ",divergent";
        out << "\n";
    }
}

// ----------------------------------------------------------------- reports

inline std::string et_result_to_json(const EtResult& r) {
    std::ostringstream out;
    out << "{\n  \"et\": " << detail::json_number_or_null(r.value)
        << ",\n  \"method\": \"" << to_string(r.method) << "\""
        << ",\n  \"stderr\": " << detail::json_number_or_null(r.standard_error)
        << ",\n  \"divergent\": " << (r.divergent() ? "true" : "false") << "\n}";
    return out.str();
}

inline std::string report_to_json(const OptimizationReport& r) {
    std::ostringstream out;
    out << "{\n  \"tau_star\": " << fmt12(r.tau_star)
        << ",\n  \"et_star\": " << fmt12(r.et_star)
        << ",\n  \"e_pi1\": " << detail::json_number_or_null(r.e_pi1)
        << ",\n  \"e_pi2\": " << detail::json_number_or_null(r.e_pi2)
        << ",\n  \"relative_gain\": " << detail::json_number_or_null(r.relative_gain)
        << ",\n  \"candidates\": [";
    for (std::size_t i = 0; i < r.candidates.size(); ++i)
        out << (i ? ", " : "") << "[" << fmt12(r.candidates[i].first) << ", "
            << fmt12(r.candidates[i].second) << "]";
    out << "]\n}";
    return out.str();
}

inline std::string report_to_text(const OptimizationReport& r) {
    std::ostringstream out;
    out << "optimal switch time : " << fmt12(r.tau_star) << "\n"
        << "expected time       : " << fmt12(r.et_star) << "\n"
        << "mean of first alone : "
        << (r.e_pi1 ? fmt12(*r.e_pi1) : std::string("divergent")) << "\n"
        << "mean of second alone: "
        << (r.e_pi2 ? fmt12(*r.e_pi2) : std::string("divergent")) << "\n";
    if (r.relative_gain)
        out << "relative gain       : " << fmt12(100.0 * *r.relative_gain) << "%\n";
    return out.str();
}

inline std::string run_record_to_json(const RunRecord& r, int indent = 0) {
    const std::string pad(indent, ' ');
    std::ostringstream out;
    out << pad << "{\n"
        << pad << "  \"task\": \"" << detail::json_escape(r.task) << "\",\n"
        << pad << "  \"completing_id\": \"" << detail::json_escape(r.completing_id)
        << "\",\n"
        << pad << "  \"completing_index\": " << r.completing_index << ",\n"
        << pad << "  \"wall_elapsed\": " << fmt12(r.wall_elapsed) << ",\n"
        << pad << "  \"model_elapsed\": " << fmt12(r.model_elapsed) << ",\n"
        << pad << "  \"output\": \"" << detail::json_escape(r.output) << "\",\n"
        << pad << "  \"stages\": [";
    for (std::size_t i = 0; i < r.stages.size(); ++i) {
        const auto& s = r.stages[i];
        out << (i ? ", " : "") << "{\"id\": \"" << detail::json_escape(s.id)
            << "\", \"budget\": "
            << (std::isfinite(s.budget) ? fmt12(s.budget) : std::string("null"))
            << ", \"measured\": " << fmt12(s.measured)
            << ", \"completed\": " << (s.completed ? "true" : "false")
            << ", \"expired\": " << (s.expired ? "true" : "false") << "}";
    }
    out << "]\n" << pad << "}";
    return out.str();
}

// ---------------------------------------------------------------- manifest

struct ManifestEntry {
    std::string id;
    std::vector<std::string> command;
    OutputParse parse = OutputParse::trimmed;
};

struct Manifest {
    std::vector<ManifestEntry> candidates;
    std::vector<std::string> tasks;
};

inline Manifest manifest_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("manifest is not valid JSON: ") + e.what());
    }
    Manifest m;
    try {
        for (const auto& c : j.at("candidates")) {
            ManifestEntry entry;
            entry.id = c.at("id").get<std::string>();
            entry.command = c.at("command").get<std::vector<std::string>>();
            if (c.contains("parse"))
                entry.parse = parse_rule_from_name(c.at("parse").get<std::string>());
            m.candidates.push_back(std::move(entry));
        }
        if (j.contains("tasks"))
            m.tasks = j.at("tasks").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("manifest is malformed: ") + e.what());
    }
    if (m.candidates.empty()) throw parse_error("manifest lists no candidates");
    for (const auto& c : m.candidates)
        if (c.command.empty())
            throw parse_error("manifest candidate '" + c.id +
                              "' has an empty command");
    return m;
}

inline std::vector<CandidateAlgorithm> portfolio_from_manifest(const Manifest& m) {
    std::vector<CandidateAlgorithm> portfolio;
    portfolio.reserve(m.candidates.size());
    for (const auto& c : m.candidates)
        portfolio.push_back(command_candidate(c.id, c.command, c.parse));
    return portfolio;
}

}  // namespace relay
