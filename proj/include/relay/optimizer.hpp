#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "relay/density.hpp"
#include "relay/errors.hpp"
#include "relay/expected_time.hpp"
#include "relay/timing.hpp"

namespace relay {

struct OptimizationReport {
    double tau_star = 0.0;
    double et_star = 0.0;
    std::optional<double> e_pi1;           // mean of the first algorithm alone
    std::optional<double> e_pi2;           // mean of the second algorithm alone
    std::optional<double> relative_gain;   // 1 - et_star / best single mean
    std::vector<std::pair<double, double>> candidates;  // (tau, et) examined
};

namespace detail {

inline void attach_marginals(OptimizationReport& report,
                             const JointDensity& density) {
    report.e_pi1 = marginal_mean(density, Axis::x);
    report.e_pi2 = marginal_mean(density, Axis::y);
    std::optional<double> best;
    for (const auto& m : {report.e_pi1, report.e_pi2})
        if (m && (!best || *m < *best)) best = *m;
    if (best && *best > 0.0)
        report.relative_gain = 1.0 - report.et_star / *best;
}

}  // namespace detail

// Step densities attain their optimum at a box edge (or at zero), so the
// exact optimum only needs the finite candidate set of edge abscissae.
// Ties resolve to the smallest switch time.
inline OptimizationReport optimize_box(const BoxDensity& density) {
    std::vector<double> taus{0.0};
    for (const auto& box : density.boxes) {
        taus.push_back(box.a);
        taus.push_back(box.b);
    }
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

    OptimizationReport report;
    report.et_star = std::numeric_limits<double>::infinity();
    for (double tau : taus) {
        const double v = et_box(density, tau);
        report.candidates.emplace_back(tau, v);
        if (v < report.et_star) {
            report.et_star = v;
            report.tau_star = tau;
        }
    }
    detail::attach_marginals(report, JointDensity{density});
    return report;
}

struct ScanConfig {
    int grid_points = 512;
    double refine_tol = 1e-4;  // final bracket width
    EtConfig et;
};

// Dense scan of ET over a switch-time range followed by golden-section
// refinement around the best grid point. Any divergent evaluation aborts:
// a partial optimum over a curve that does not exist is meaningless.
inline OptimizationReport optimize_scan(
    const JointDensity& density,
    std::optional<std::pair<double, double>> range = std::nullopt,
    const ScanConfig& cfg = {}) {
    if (cfg.grid_points < 2)
        throw contract_error("optimize_scan: needs at least two grid points");
    if (!(cfg.refine_tol > 0.0))
        throw contract_error("optimize_scan: refine_tol must be positive");
    double lo = 0.0;
    double hi = support_upper(density, Axis::x).value_or(cfg.et.truncation);
    if (range) {
        lo = range->first;
        hi = range->second;
    }
    if (!(lo >= 0.0) || !(hi > lo))
        throw contract_error("optimize_scan: range must satisfy 0 <= lo < hi");

    std::function<double(double)> eval;
    std::optional<GridEtEvaluator> grid;
    if (const auto* g = std::get_if<GridDensity>(&density)) {
        grid.emplace(*g, cfg.et);
        eval = [&](double tau) {
            const auto r = grid->evaluate(tau);
            if (r.divergent())
                throw divergent_error(
                    "optimize_scan: expected time diverges on this density");
            return *r.value;
        };
    } else {
        eval = [&](double tau) {
            const auto r = et(density, tau, cfg.et);
            if (r.divergent())
                throw divergent_error(
                    "optimize_scan: expected time diverges on this density");
            return *r.value;
        };
    }

    double best_tau = lo, best_et = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    const double step = (hi - lo) / double(cfg.grid_points - 1);
    std::vector<double> taus(cfg.grid_points);
    for (int i = 0; i < cfg.grid_points; ++i) {
        const double tau = i + 1 == cfg.grid_points ? hi : lo + step * i;
        taus[i] = tau;
        const double v = eval(tau);
        if (v < best_et) {
            best_et = v;
            best_tau = tau;
            best_index = std::size_t(i);
        }
    }

    double a = taus[best_index == 0 ? 0 : best_index - 1];
    double b = taus[std::min(best_index + 1, taus.size() - 1)];
    OptimizationReport report;
    report.candidates.emplace_back(a, eval(a));
    report.candidates.emplace_back(b, eval(b));

    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    while (b - a > cfg.refine_tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2);
        }
        if (f1 < best_et) {
            best_et = f1;
            best_tau = x1;
        }
        if (f2 < best_et) {
            best_et = f2;
            best_tau = x2;
        }
    }

    report.tau_star = best_tau;
    report.et_star = best_et;
    report.candidates.emplace_back(best_tau, best_et);
    detail::attach_marginals(report, density);
    return report;
}

// When one algorithm is at least as fast on every observed task, switching
// cannot help; report which one (1-based), preferring the first on ties.
inline std::optional<int> dominance_check(const TimingSamples& samples) {
    if (samples.pairs.empty()) return std::nullopt;
    bool first = true, second = true;
    for (const auto& [t1, t2] : samples.pairs) {
        if (t1 > t2) first = false;
        if (t2 > t1) second = false;
    }
    if (first) return 1;
    if (second) return 2;
    return std::nullopt;
}

}  // namespace relay
