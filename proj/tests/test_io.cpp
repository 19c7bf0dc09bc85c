#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "relay/io.hpp"

using namespace relay;

namespace {

JointDensity round_trip(const JointDensity& d) {
    return density_from_json_text(density_to_json(d));
}

void check_same_curve(const JointDensity& a, const JointDensity& b,
                      std::initializer_list<double> taus) {
    CHECK(total_mass(b) == Catch::Approx(total_mass(a)).margin(1e-9));
    for (double tau : taus) {
        const auto ra = et(a, tau);
        const auto rb = et(b, tau);
        REQUIRE(ra.value.has_value());
        REQUIRE(rb.value.has_value());
        CHECK(*rb.value == Catch::Approx(*ra.value).margin(1e-9));
    }
}

}  // namespace

TEST_CASE("density JSON round trips") {
    SECTION("box") {
        const BoxDensity d{{{1.0 / 12.0, 1.0, 3.0, 4.0, 7.0},
                            {1.0 / 12.0, 5.0, 8.0, 2.0, 4.0}}};
        check_same_curve(d, round_trip(d), {0.0, 2.0, 3.0, 6.0, 9.0});
    }
    SECTION("product of an exponential and a histogram") {
        const ProductDensity d{{ExponentialDensity{0.7},
                                HistogramDensity{{{0.0, 1.0, 0.25}, {1.0, 2.0, 0.75}}}}};
        check_same_curve(d, round_trip(d), {0.0, 0.5, 1.5, 4.0});
    }
    SECTION("product of a tabulated factor and an exponential") {
        const ProductDensity d{{TabulatedDensity{{0.0, 1.0, 2.0}, {0.0, 1.0, 0.0}},
                                ExponentialDensity{2.0}}};
        check_same_curve(d, round_trip(d), {0.0, 0.5, 1.0, 3.0});
    }
    SECTION("exponential with polynomial factors") {
        const ExpPolyDensity d{1.0, 2.0, 0.5, 0.25};
        check_same_curve(d, round_trip(d), {0.0, 0.7, 2.0});
    }
    SECTION("rational series") {
        const RationalSeriesDensity d{0.3, {{0.2}, {0.0, 0.5}}};
        check_same_curve(d, round_trip(d), {0.0, 1.5, 4.0});
    }
    SECTION("explicit grid keeps its extent marker") {
        GridDensity g;
        g.x_knots = {0.0, 1.0, 3.0, 5.0, 8.0};
        g.y_knots = {0.0, 2.0, 4.0, 7.0};
        g.cells = {{0.0, 0.0, 0.0},
                   {0.0, 0.0, 1.0 / 12.0},
                   {0.0, 0.0, 0.0},
                   {0.0, 1.0 / 12.0, 0.0}};
        g.t_max = 9.5;
        const auto back = round_trip(g);
        check_same_curve(g, back, {0.0, 2.0, 3.0, 6.0});
        CHECK(std::get<GridDensity>(back).t_max == Catch::Approx(9.5));
    }
}

TEST_CASE("grid expression form matches direct tabulation") {
    const std::string spec = R"({"type": "grid", "expression": "unit_exponential",
                                 "x_max": 30, "y_max": 30, "nx": 40, "ny": 40})";
    const auto parsed = density_from_json_text(spec);
    const auto direct = tabulate_expression(builtin_expression("unit_exponential"),
                                            graded_knots(30.0, 40),
                                            graded_knots(30.0, 40));
    const auto& g = std::get<GridDensity>(parsed);
    REQUIRE(g.cells.size() == direct.cells.size());
    for (std::size_t i = 0; i < g.cells.size(); ++i)
        for (std::size_t j = 0; j < g.cells[i].size(); ++j)
            CHECK(g.cells[i][j] == direct.cells[i][j]);
    CHECK(g.x_knots == direct.x_knots);
}

TEST_CASE("density parse failures") {
    CHECK_THROWS_AS(density_from_json_text("not json"), parse_error);
    CHECK_THROWS_AS(density_from_json_text(R"({"type": "mystery"})"), parse_error);
    CHECK_THROWS_AS(density_from_json_text(R"({"type": "box"})"), parse_error);
    CHECK_THROWS_AS(density_from_json_text(
                        R"({"type": "exp_poly", "a": 1, "b": 2, "c": 3})"),
                    parse_error);
    // ragged cell matrix
    CHECK_THROWS_AS(density_from_json_text(
                        R"({"type": "grid", "x_knots": [0, 1, 2], "y_knots": [0, 1],
                            "cells": [[0.5], [0.25, 0.25]]})"),
                    parse_error);
    // knot/value length mismatch inside a factor
    CHECK_THROWS_AS(density_from_json_text(
                        R"({"type": "product", "factors": [
                            {"type": "tabulated", "t": [0, 1, 2], "p": [1, 0]},
                            {"type": "exponential", "rate": 1}]})"),
                    parse_error);
    CHECK_THROWS_AS(density_from_json_text(
                        R"({"type": "grid", "expression": "no_such_curve",
                            "x_max": 1, "y_max": 1, "nx": 2, "ny": 2})"),
                    contract_error);
}

TEST_CASE("timing CSV") {
    SECTION("round trip with task ids") {
        TimingSamples samples{{{1.25, 2.5}, {0.001953125, 7.0}}};
        std::ostringstream out;
        timings_to_csv(out, {"alpha", "beta"}, samples);
        std::istringstream in(out.str());
        std::vector<std::string> ids;
        const auto back = timings_from_csv(in, &ids);
        CHECK(ids == std::vector<std::string>{"alpha", "beta"});
        REQUIRE(back.pairs.size() == 2);
        CHECK(back.pairs[0].first == 1.25);
        CHECK(back.pairs[0].second == 2.5);
        CHECK(back.pairs[1].first == 0.001953125);
    }
    SECTION("header is mandatory and exact") {
        std::istringstream in("task,first,second\nx,1,2\n");
        CHECK_THROWS_AS(timings_from_csv(in), parse_error);
    }
    SECTION("empty input is zero samples") {
        std::istringstream in("");
        CHECK(timings_from_csv(in).pairs.empty());
    }
    SECTION("header-only input is zero samples") {
        std::istringstream in("task_id,t1,t2\n");
        CHECK(timings_from_csv(in).pairs.empty());
    }
    SECTION("bad numbers name the line") {
        std::istringstream in("task_id,t1,t2\nx,1,2\ny,abc,2\n");
        try {
            timings_from_csv(in);
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SECTION("wrong field count is rejected") {
        std::istringstream in("task_id,t1,t2\nx,1\n");
        CHECK_THROWS_AS(timings_from_csv(in), parse_error);
    }
    SECTION("carriage returns and blank lines are tolerated") {
        std::istringstream in("task_id,t1,t2\r\n\r\nx,1,2\r\n");
        const auto s = timings_from_csv(in);
        REQUIRE(s.pairs.size() == 1);
        CHECK(s.pairs[0].first == 1.0);
    }
    SECTION("ids with delimiters cannot be written") {
        std::ostringstream out;
        CHECK_THROWS_AS(
            timings_to_csv(out, {"a,b"}, TimingSamples{{{1.0, 2.0}}}),
            contract_error);
        CHECK_THROWS_AS(timings_to_csv(out, {"a", "b"}, TimingSamples{{{1.0, 2.0}}}),
                        contract_error);
    }
}

TEST_CASE("curve CSV rows") {
    std::vector<CurvePoint> points;
    points.push_back({3.0, EtResult{4.0, EtMethod::closed_form, std::nullopt}});
    points.push_back({2.0, EtResult{std::nullopt, EtMethod::quadrature, std::nullopt}});
    points.push_back({1.0, EtResult{1.5, EtMethod::monte_carlo, 0.25}});
    std::ostringstream out;
    curve_to_csv(out, points);
    CHECK(out.str() ==
          "tau,et,method,stderr\n"
          "3,4,closed_form,\n"
          "2,,quadrature,,divergent\n"
          "1,1.5,monte_carlo,0.25\n");
}

TEST_CASE("result and report serialization") {
    SECTION("divergent result") {
        const std::string j =
            et_result_to_json({std::nullopt, EtMethod::quadrature, std::nullopt});
        CHECK(j.find("\"et\": null") != std::string::npos);
        CHECK(j.find("\"divergent\": true") != std::string::npos);
        CHECK(j.find("\"method\": \"quadrature\"") != std::string::npos);
    }
    SECTION("optimization report") {
        OptimizationReport r;
        r.tau_star = 3.0;
        r.et_star = 4.0;
        r.e_pi1 = 4.25;
        r.e_pi2 = 4.25;
        r.relative_gain = 1.0 - 4.0 / 4.25;
        r.candidates = {{0.0, 4.25}, {3.0, 4.0}};
        const std::string j = report_to_json(r);
        CHECK(j.find("\"tau_star\": 3") != std::string::npos);
        CHECK(j.find("\"et_star\": 4") != std::string::npos);
        CHECK(j.find("[3, 4]") != std::string::npos);
        const std::string text = report_to_text(r);
        CHECK(text.find("optimal switch time : 3") != std::string::npos);
        CHECK(text.find("%") != std::string::npos);
    }
    SECTION("divergent marginals print as such") {
        OptimizationReport r;
        r.tau_star = 1.0;
        r.et_star = 2.0;
        const std::string text = report_to_text(r);
        CHECK(text.find("divergent") != std::string::npos);
        CHECK(report_to_json(r).find("\"e_pi1\": null") != std::string::npos);
    }
}

TEST_CASE("run records serialize with null budgets on the final stage") {
    RunRecord r;
    r.task = "t\"quoted\"";
    r.completing_id = "b";
    r.completing_index = 2;
    r.wall_elapsed = 0.5;
    r.model_elapsed = 0.45;
    r.output = "answer";
    r.stages.push_back({"a", 0.25, 0.25, false, true});
    r.stages.push_back({"b", std::numeric_limits<double>::infinity(), 0.2, true, false});
    const std::string j = run_record_to_json(r);
    CHECK(j.find("\"budget\": null") != std::string::npos);
    CHECK(j.find("\"budget\": 0.25") != std::string::npos);
    CHECK(j.find("\\\"quoted\\\"") != std::string::npos);
    CHECK(j.find("\"completing_index\": 2") != std::string::npos);
}

TEST_CASE("portfolio manifests") {
    SECTION("well formed") {
        const auto m = manifest_from_json_text(R"({
            "candidates": [
                {"id": "fast", "command": ["/bin/echo", "{task}"]},
                {"id": "steady", "command": ["/bin/sort"], "parse": "last_line"}
            ],
            "tasks": ["t1", "t2"]
        })");
        REQUIRE(m.candidates.size() == 2);
        CHECK(m.candidates[0].id == "fast");
        CHECK(m.candidates[1].parse == OutputParse::last_line);
        CHECK(m.tasks == std::vector<std::string>{"t1", "t2"});
        const auto portfolio = portfolio_from_manifest(m);
        REQUIRE(portfolio.size() == 2);
        CHECK(portfolio[0].runner != nullptr);
    }
    SECTION("failures") {
        CHECK_THROWS_AS(manifest_from_json_text("{"), parse_error);
        CHECK_THROWS_AS(manifest_from_json_text(R"({"candidates": []})"), parse_error);
        CHECK_THROWS_AS(manifest_from_json_text(R"({"tasks": ["x"]})"), parse_error);
        CHECK_THROWS_AS(
            manifest_from_json_text(
                R"({"candidates": [{"id": "a", "command": []}]})"),
            parse_error);
        CHECK_THROWS(manifest_from_json_text(
            R"({"candidates": [{"id": "a", "command": ["/bin/true"], "parse": "json"}]})"));
    }
}

TEST_CASE("numbers print with twelve significant digits") {
    CHECK(fmt12(3.0) == "3");
    CHECK(fmt12(0.1) == "0.1");
    CHECK(fmt12(2.4921033538933720) == "2.49210335389");
    CHECK(fmt12(4.2604059953907036) == "4.26040599539");
    CHECK(fmt12(1e-300) == "1e-300");
}
