#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relay/density.hpp"
#include "relay/errors.hpp"
#include "relay/quadrature.hpp"
#include "relay/schedule.hpp"

namespace relay {

enum class EtMethod { closed_form, quadrature, monte_carlo };

inline const char* to_string(EtMethod m) {
    switch (m) {
        case EtMethod::closed_form: return "closed_form";
        case EtMethod::quadrature: return "quadrature";
        default: return "monte_carlo";
    }
}

// Mean execution time of the derived algorithm; a missing value means the
// defining integral failed the convergence test and ET does not exist.
struct EtResult {
    std::optional<double> value;
    EtMethod method = EtMethod::closed_form;
    std::optional<double> standard_error;  // Monte Carlo only

    bool divergent() const { return !value.has_value(); }
};

struct EtConfig {
    double abs_tol = 1e-6;     // quadrature tolerance per truncated evaluation
    double truncation = 50.0;  // base T; convergence judged at T, 2T, 4T
    double growth_tol = 0.01;  // relative growth per doubling that flags divergence
    int max_intervals = 4000;
};

// ------------------------------------------------------------------ boxes

// Exact mean time for a step density: each box contributes one of three
// closed-form pieces depending on where tau sits relative to [a, b). The
// result is continuous and piecewise quadratic in tau.
inline double et_box(const BoxDensity& density, double tau) {
    double v = 0.0;
    for (const auto& box : density.boxes) {
        const double rate = box.k * (box.d - box.c);           // mass per unit x
        const double moment = 0.5 * box.k * (box.d * box.d - box.c * box.c);
        if (tau <= box.a) {
            v += (box.b - box.a) * (tau * rate + moment);
        } else if (tau < box.b) {
            v += -0.5 * tau * tau * rate + tau * (box.b * rate - moment) +
                 box.b * moment - 0.5 * box.a * box.a * rate;
        } else {
            v += 0.5 * (box.b * box.b - box.a * box.a) * rate;
        }
    }
    return v;
}

// ------------------------------------------------------------------ grids

namespace detail {

// Per-column reduction of a grid clipped to [0,T]^2: box arithmetic then
// collapses to O(columns) per tau.
struct GridColumns {
    std::vector<double> a, b;       // x-interval of each column
    std::vector<double> rate;       // sum of cell k * (y-extent)
    std::vector<double> moment;     // sum of cell k * (d^2 - c^2) / 2

    double et(double tau) const {
        double v = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (tau <= a[i]) {
                v += (b[i] - a[i]) * (tau * rate[i] + moment[i]);
            } else if (tau < b[i]) {
                v += -0.5 * tau * tau * rate[i] +
                     tau * (b[i] * rate[i] - moment[i]) + b[i] * moment[i] -
                     0.5 * a[i] * a[i] * rate[i];
            } else {
                v += 0.5 * (b[i] * b[i] - a[i] * a[i]) * rate[i];
            }
        }
        return v;
    }

    // completion/survival pieces used by the term-by-term decomposition
    double completion_before(double tau) const {
        double v = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double hi = std::min(b[i], tau);
            if (hi > a[i]) v += 0.5 * rate[i] * (hi * hi - a[i] * a[i]);
        }
        return v;
    }
    double survival(double tau) const {
        double v = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double lo = std::max(a[i], tau);
            if (b[i] > lo) v += rate[i] * (b[i] - lo);
        }
        return v;
    }
    double completion_after(double tau) const {
        double v = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double lo = std::max(a[i], tau);
            if (b[i] > lo) v += moment[i] * (b[i] - lo);
        }
        return v;
    }
};

inline GridColumns grid_columns(const GridDensity& g, double T) {
    GridColumns c;
    for (std::size_t i = 0; i + 1 < g.x_knots.size(); ++i) {
        const double lo = g.x_knots[i];
        const double hi = std::min(g.x_knots[i + 1], T);
        if (hi <= lo) break;
        double rate = 0.0, moment = 0.0;
        for (std::size_t j = 0; j + 1 < g.y_knots.size(); ++j) {
            const double clo = g.y_knots[j];
            const double chi = std::min(g.y_knots[j + 1], T);
            if (chi <= clo) break;
            rate += g.cells[i][j] * (chi - clo);
            moment += 0.5 * g.cells[i][j] * (chi * chi - clo * clo);
        }
        c.a.push_back(lo);
        c.b.push_back(hi);
        c.rate.push_back(rate);
        c.moment.push_back(moment);
    }
    return c;
}

}  // namespace detail

// Reusable grid evaluator: one pass over the cells, then O(columns) per tau,
// with the truncation ladder needed for the divergence verdict.
class GridEtEvaluator {
  public:
    explicit GridEtEvaluator(const GridDensity& g, const EtConfig& cfg = {})
        : cfg_(cfg) {
        const double extent = std::max(g.x_knots.back(), g.y_knots.back());
        const double T = cfg.truncation;
        t1_ = detail::grid_columns(g, std::min(T, extent));
        t2_ = detail::grid_columns(g, std::min(2.0 * T, extent));
        t4_ = detail::grid_columns(g, std::min(4.0 * T, extent));
        full_ = detail::grid_columns(g, extent);
    }

    EtResult evaluate(double tau, EtMethod tag = EtMethod::closed_form) const {
        const auto verdict = assess_truncation(t1_.et(tau), t2_.et(tau),
                                               t4_.et(tau), cfg_.growth_tol);
        if (verdict.divergent) return {std::nullopt, tag, std::nullopt};
        return {full_.et(tau), tag, std::nullopt};
    }

    const detail::GridColumns& full_columns() const { return full_; }

  private:
    EtConfig cfg_;
    detail::GridColumns t1_, t2_, t4_, full_;
};

// --------------------------------------------------------------- products

// ET for independent marginals: time spent on completions of the first
// algorithm plus, on survival, tau and the full mean of the second.
inline EtResult et_product(const ProductDensity& d, double tau) {
    if (d.factors.size() != 2)
        throw capability_error("et_product requires exactly two factors");
    const double spent = partial_first_moment(d.factors[0], tau);
    const double survive = tail_probability(d.factors[0], tau);
    const double epi2 = mean(d.factors[1]);
    return {spent + survive * (tau + epi2), EtMethod::closed_form, std::nullopt};
}

// ------------------------------------------------------------ closed forms

inline double et_exp_poly(const ExpPolyDensity& p, double tau) {
    return (1.0 + 2.0 * p.a + p.b + 6.0 * p.c + 2.0 * p.d -
            (2.0 * p.c * tau + p.a - p.b + 4.0 * p.c - 4.0 * p.d) *
                std::exp(-tau)) /
           p.norm();
}

inline double et_rational_series(const RationalSeriesDensity& d, double tau) {
    const double u = 1.0 + tau;
    double v = d.c * (std::log(u) + 1.0 / u);
    double um1 = std::pow(u, -1.0);  // u^{-(m+1)} running for m = 0, 1, ...
    for (std::size_t m = 0; m < d.dcoef.size(); ++m, um1 /= u) {
        double row = 0.0, inv = 0.0;
        for (std::size_t n = 0; n < d.dcoef[m].size(); ++n) {
            row += d.dcoef[m][n];
            inv += d.dcoef[m][n] / double(n + 1);
        }
        // per component: 1/(m+1) (1 - u^{-(m+1)}) + u^{-(m+2)} / (n+1)
        v += (row - row * um1) / double(m + 1) + inv * um1 / u;
    }
    return v;
}

// --------------------------------------------------------------- quadrature

namespace detail {

// One truncated evaluation of the defining double integral: x-completions up
// to tau plus (tau + y) on survivals, with the domain cut at x <= tau + T,
// y <= T (clamped to any bounded support).
template <class Pdf>
double et_truncated(Pdf&& f, double tau, double T, std::optional<double> xsup,
                    std::optional<double> ysup,
                    const std::vector<double>& bx, const std::vector<double>& by,
                    const EtConfig& cfg) {
    const double yhi = std::min(T, ysup.value_or(T));
    const double xhi = std::min(tau + T, xsup.value_or(tau + T));
    const QuadratureConfig outer{cfg.abs_tol, cfg.max_intervals};
    const QuadratureConfig inner{cfg.abs_tol * 0.01, cfg.max_intervals};
    double v = 0.0;
    const double xmid = std::min(tau, xhi);
    if (xmid > 0.0)
        v += integrate(
            [&](double x) {
                return x * integrate([&](double y) { return f(x, y); }, 0.0,
                                     yhi, inner, by);
            },
            0.0, xmid, outer, bx);
    if (xhi > tau)
        v += integrate(
            [&](double x) {
                return integrate([&](double y) { return (tau + y) * f(x, y); },
                                 0.0, yhi, inner, by);
            },
            tau, xhi, outer, bx);
    return v;
}

}  // namespace detail

// ET of an arbitrary first-quadrant pdf given as a callable; supports and
// breakpoints are optional hints.
inline EtResult et_quadrature(const Expression& f, double tau,
                              const EtConfig& cfg = {},
                              std::optional<double> x_support = std::nullopt,
                              std::optional<double> y_support = std::nullopt,
                              const std::vector<double>& x_breaks = {},
                              const std::vector<double>& y_breaks = {}) {
    if (!(tau >= 0.0))
        throw contract_error("et_quadrature: tau must be nonnegative");
    const double T = cfg.truncation;
    const double v1 = detail::et_truncated(f, tau, T, x_support, y_support,
                                           x_breaks, y_breaks, cfg);
    const double v2 = detail::et_truncated(f, tau, 2.0 * T, x_support, y_support,
                                           x_breaks, y_breaks, cfg);
    const double v3 = detail::et_truncated(f, tau, 4.0 * T, x_support, y_support,
                                           x_breaks, y_breaks, cfg);
    const auto verdict = assess_truncation(v1, v2, v3, cfg.growth_tol);
    if (verdict.divergent)
        return {std::nullopt, EtMethod::quadrature, std::nullopt};
    return {verdict.value, EtMethod::quadrature, std::nullopt};
}

// General-density ET by adaptive 2-D quadrature. The integral is evaluated on
// a ladder of truncated domains (T, 2T, 4T); growth that fails to contract is
// reported as divergence, a geometric tail is extrapolated out.
inline EtResult et_quadrature(const JointDensity& density, double tau,
                              const EtConfig& cfg = {}) {
    if (!(tau >= 0.0))
        throw contract_error("et_quadrature: tau must be nonnegative");
    if (auto violations = validate(density); !violations.empty())
        throw contract_error("et_quadrature: invalid density: " + violations.front());

    if (const auto* g = std::get_if<GridDensity>(&density))
        return GridEtEvaluator(*g, cfg).evaluate(tau, EtMethod::quadrature);

    const auto xsup = support_upper(density, Axis::x);
    const auto ysup = support_upper(density, Axis::y);
    const auto bx = breakpoints(density, Axis::x);
    const auto by = breakpoints(density, Axis::y);
    auto f = [&](double x, double y) { return pdf(density, x, y); };
    const double T = cfg.truncation;
    const double v1 = detail::et_truncated(f, tau, T, xsup, ysup, bx, by, cfg);
    const double v2 =
        detail::et_truncated(f, tau, 2.0 * T, xsup, ysup, bx, by, cfg);
    const double v3 =
        detail::et_truncated(f, tau, 4.0 * T, xsup, ysup, bx, by, cfg);
    const auto verdict = assess_truncation(v1, v2, v3, cfg.growth_tol);
    if (verdict.divergent)
        return {std::nullopt, EtMethod::quadrature, std::nullopt};
    return {verdict.value, EtMethod::quadrature, std::nullopt};
}

// ------------------------------------------------------------- monte carlo

// Draws joint runtimes, pushes each through the schedule semantics, and
// averages. Two-stage schedules accept any density; longer schedules need
// one independent factor per stage.
inline EtResult et_monte_carlo(const JointDensity& density,
                               const Schedule& schedule, std::size_t samples,
                               std::uint64_t seed) {
    validate(schedule);
    if (samples == 0)
        throw contract_error("et_monte_carlo: needs at least one sample");
    const std::size_t n = schedule.stages();
    double sum = 0.0, sumsq = 0.0;
    // a draw of exactly 0.0 (probability ~2^-53) would violate the strict
    // positivity contract of derived_time; nudge it into the open interval
    auto positive = [](double t) { return std::max(t, 1e-300); };
    if (n == 2) {
        auto pairs = sample(density, seed, samples);
        for (const auto& [x, y] : pairs) {
            const double t =
                derived_time({positive(x), positive(y)}, schedule).total_time;
            sum += t;
            sumsq += t * t;
        }
    } else {
        const auto* product = std::get_if<ProductDensity>(&density);
        if (!product || product->factors.size() != n)
            throw capability_error(
                "schedules with more than two stages need a product density "
                "with one factor per stage");
        SampleStream stream(seed);
        std::vector<double> times(n);
        for (std::size_t i = 0; i < samples; ++i) {
            for (std::size_t j = 0; j < n; ++j)
                times[j] = positive(quantile(product->factors[j], stream.uniform()));
            const double t = derived_time(times, schedule).total_time;
            sum += t;
            sumsq += t * t;
        }
    }
    const double mean = sum / double(samples);
    double se = 0.0;
    if (samples > 1) {
        const double var =
            std::max(0.0, (sumsq - sum * sum / double(samples)) /
                              double(samples - 1));
        se = std::sqrt(var / double(samples));
    }
    return {mean, EtMethod::monte_carlo, se};
}

// ------------------------------------------------- term-by-term decomposition

// The mean-time identity evaluated one branch at a time: completion terms
// (E pi_n restricted to the branch that stage n finishes) plus the budget
// charges tau_n P(S_n). Their sum must reproduce ET computed any other way.
struct Theorem1Terms {
    std::vector<double> survival;    // P(S_n), n = 1 .. N-1
    std::vector<double> completion;  // per-stage restricted expectations
    double tau_charge = 0.0;         // sum of tau_n P(S_n)
    double reassembled = 0.0;
};

inline Theorem1Terms theorem1_terms(const JointDensity& density,
                                    const Schedule& schedule,
                                    const EtConfig& cfg = {}) {
    validate(schedule);
    Theorem1Terms out;
    const std::size_t n = schedule.stages();

    if (const auto* product = std::get_if<ProductDensity>(&density);
        product && product->factors.size() == n) {
        // independent stages: survivals multiply, each completion term is a
        // truncated first moment scaled by the survival reaching that stage
        double reach = 1.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double tau = schedule.budgets[i];
            out.completion.push_back(
                reach * partial_first_moment(product->factors[i], tau));
            reach *= tail_probability(product->factors[i], tau);
            out.survival.push_back(reach);
            out.tau_charge += tau * reach;
        }
        out.completion.push_back(reach * mean(product->factors.back()));
        for (double c : out.completion) out.reassembled += c;
        out.reassembled += out.tau_charge;
        return out;
    }

    if (n != 2)
        throw capability_error(
            "term decomposition needs a two-stage schedule or a product "
            "density with one factor per stage");
    const double tau = schedule.budgets[0];

    auto fill = [&](double before, double survive, double after) {
        out.completion = {before, after};
        out.survival = {survive};
        out.tau_charge = tau * survive;
        out.reassembled = before + after + out.tau_charge;
    };

    if (const auto* b = std::get_if<BoxDensity>(&density)) {
        double before = 0.0, survive = 0.0, after = 0.0;
        for (const auto& box : b->boxes) {
            const double rate = box.k * (box.d - box.c);
            const double moment = 0.5 * box.k * (box.d * box.d - box.c * box.c);
            const double hi = std::min(box.b, tau);
            if (hi > box.a) before += 0.5 * rate * (hi * hi - box.a * box.a);
            const double lo = std::max(box.a, tau);
            if (box.b > lo) {
                survive += rate * (box.b - lo);
                after += moment * (box.b - lo);
            }
        }
        fill(before, survive, after);
        return out;
    }
    if (const auto* g = std::get_if<GridDensity>(&density)) {
        const auto cols = detail::grid_columns(
            *g, std::max(g->x_knots.back(), g->y_knots.back()));
        fill(cols.completion_before(tau), cols.survival(tau),
             cols.completion_after(tau));
        return out;
    }

    // generic two-stage density: quadrature at the widest truncation
    const double T = 4.0 * cfg.truncation;
    const auto xsup = support_upper(density, Axis::x);
    const auto ysup = support_upper(density, Axis::y);
    const auto bx = breakpoints(density, Axis::x);
    const auto by = breakpoints(density, Axis::y);
    const double yhi = std::min(T, ysup.value_or(T));
    const double xhi = std::min(tau + T, xsup.value_or(tau + T));
    const QuadratureConfig outer{cfg.abs_tol, cfg.max_intervals};
    const QuadratureConfig inner{cfg.abs_tol * 0.01, cfg.max_intervals};
    auto f = [&](double x, double y) { return pdf(density, x, y); };
    double before = 0.0, survive = 0.0, after = 0.0;
    if (std::min(tau, xhi) > 0.0)
        before = integrate(
            [&](double x) {
                return x * integrate([&](double y) { return f(x, y); }, 0.0,
                                     yhi, inner, by);
            },
            0.0, std::min(tau, xhi), outer, bx);
    if (xhi > tau) {
        survive = integrate(
            [&](double x) {
                return integrate([&](double y) { return f(x, y); }, 0.0, yhi,
                                 inner, by);
            },
            tau, xhi, outer, bx);
        after = integrate(
            [&](double x) {
                return integrate([&](double y) { return y * f(x, y); }, 0.0,
                                 yhi, inner, by);
            },
            tau, xhi, outer, bx);
    }
    fill(before, survive, after);
    return out;
}

// ------------------------------------------------------------------ front door

// Best available deterministic evaluation for a two-stage schedule.
inline EtResult et(const JointDensity& density, double tau,
                   const EtConfig& cfg = {}) {
    if (!(tau >= 0.0)) throw contract_error("et: tau must be nonnegative");
    if (const auto* b = std::get_if<BoxDensity>(&density))
        return {et_box(*b, tau), EtMethod::closed_form, std::nullopt};
    if (const auto* e = std::get_if<ExpPolyDensity>(&density))
        return {et_exp_poly(*e, tau), EtMethod::closed_form, std::nullopt};
    if (const auto* r = std::get_if<RationalSeriesDensity>(&density))
        return {et_rational_series(*r, tau), EtMethod::closed_form, std::nullopt};
    if (const auto* p = std::get_if<ProductDensity>(&density))
        return et_product(*p, tau);
    return GridEtEvaluator(std::get<GridDensity>(density), cfg).evaluate(tau);
}

}  // namespace relay
