#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "relay/errors.hpp"

namespace relay {

// One-dimensional execution-time densities on [0, inf). These are the
// factors of a product-form joint density and the carriers of per-stage
// marginals for schedules with more than two algorithms.

struct HistogramBin {
    double lo, hi, height;  // constant `height` on [lo, hi)
};

struct HistogramDensity {
    std::vector<HistogramBin> bins;
};

struct ExponentialDensity {
    double rate = 1.0;
};

// Linear interpolation between (t, p) knots, zero outside [t.front(), t.back()].
struct TabulatedDensity {
    std::vector<double> t;
    std::vector<double> p;
};

using UnivariateDensity =
    std::variant<HistogramDensity, ExponentialDensity, TabulatedDensity>;

inline constexpr double kUnivariateMassTol = 1e-6;

// ----------------------------------------------------------------- mass

inline double mass(const HistogramDensity& h) {
    double m = 0.0;
    for (const auto& bin : h.bins) m += bin.height * (bin.hi - bin.lo);
    return m;
}

inline double mass(const ExponentialDensity&) { return 1.0; }

inline double mass(const TabulatedDensity& d) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < d.t.size(); ++i)
        m += 0.5 * (d.p[i] + d.p[i + 1]) * (d.t[i + 1] - d.t[i]);
    return m;
}

inline double mass(const UnivariateDensity& u) {
    return std::visit([](const auto& v) { return mass(v); }, u);
}

// ----------------------------------------------------------------- pdf

inline double pdf(const HistogramDensity& h, double t) {
    double v = 0.0;
    for (const auto& bin : h.bins)
        if (bin.lo <= t && t < bin.hi) v += bin.height;
    return v;
}

inline double pdf(const ExponentialDensity& e, double t) {
    return t < 0.0 ? 0.0 : e.rate * std::exp(-e.rate * t);
}

inline double pdf(const TabulatedDensity& d, double t) {
    if (d.t.empty() || t < d.t.front() || t > d.t.back()) return 0.0;
    auto it = std::upper_bound(d.t.begin(), d.t.end(), t);
    if (it == d.t.begin()) return d.p.front();
    std::size_t i = static_cast<std::size_t>(it - d.t.begin()) - 1;
    if (i + 1 >= d.t.size()) return d.p.back();
    const double w = (t - d.t[i]) / (d.t[i + 1] - d.t[i]);
    return d.p[i] + w * (d.p[i + 1] - d.p[i]);
}

inline double pdf(const UnivariateDensity& u, double t) {
    return std::visit([t](const auto& v) { return pdf(v, t); }, u);
}

// ----------------------------------------------------------------- mean

inline double mean(const HistogramDensity& h) {
    double m = 0.0;
    for (const auto& bin : h.bins)
        m += 0.5 * bin.height * (bin.hi * bin.hi - bin.lo * bin.lo);
    return m;
}

inline double mean(const ExponentialDensity& e) { return 1.0 / e.rate; }

inline double mean(const TabulatedDensity& d) {
    // segment with p(x) = p0 + s (x - t0): int x p(x) dx has a closed form
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < d.t.size(); ++i) {
        const double t0 = d.t[i], t1 = d.t[i + 1];
        const double s = (d.p[i + 1] - d.p[i]) / (t1 - t0);
        const double c0 = d.p[i] - s * t0;
        m += c0 * (t1 * t1 - t0 * t0) / 2.0 + s * (t1 * t1 * t1 - t0 * t0 * t0) / 3.0;
    }
    return m;
}

inline double mean(const UnivariateDensity& u) {
    return std::visit([](const auto& v) { return mean(v); }, u);
}

// --------------------------------------------- partial first moment on [0, tau]

inline double partial_first_moment(const HistogramDensity& h, double tau) {
    double m = 0.0;
    for (const auto& bin : h.bins) {
        const double hi = std::min(bin.hi, tau);
        if (hi > bin.lo) m += 0.5 * bin.height * (hi * hi - bin.lo * bin.lo);
    }
    return m;
}

inline double partial_first_moment(const ExponentialDensity& e, double tau) {
    if (tau <= 0.0) return 0.0;
    const double l = e.rate;
    return 1.0 / l - std::exp(-l * tau) * (tau + 1.0 / l);
}

inline double partial_first_moment(const TabulatedDensity& d, double tau) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < d.t.size(); ++i) {
        const double t0 = d.t[i];
        double t1 = d.t[i + 1];
        if (tau <= t0) break;
        const double w = d.t[i + 1] - t0;
        const double s = (d.p[i + 1] - d.p[i]) / w;
        t1 = std::min(t1, tau);
        // p(x) = p0 + s (x - t0); int x p(x) dx on [t0, t1]
        const double c0 = d.p[i] - s * t0;
        m += c0 * (t1 * t1 - t0 * t0) / 2.0 + s * (t1 * t1 * t1 - t0 * t0 * t0) / 3.0;
    }
    return m;
}

inline double partial_first_moment(const UnivariateDensity& u, double tau) {
    return std::visit([tau](const auto& v) { return partial_first_moment(v, tau); }, u);
}

// --------------------------------------------------- tail probability P(tau < X)

inline double tail_probability(const HistogramDensity& h, double tau) {
    double p = 0.0;
    for (const auto& bin : h.bins) {
        const double lo = std::max(bin.lo, tau);
        if (bin.hi > lo) p += bin.height * (bin.hi - lo);
    }
    return p;
}

inline double tail_probability(const ExponentialDensity& e, double tau) {
    return tau <= 0.0 ? 1.0 : std::exp(-e.rate * tau);
}

inline double tail_probability(const TabulatedDensity& d, double tau) {
    double p = 0.0;
    for (std::size_t i = 0; i + 1 < d.t.size(); ++i) {
        const double t0 = d.t[i], t1 = d.t[i + 1];
        if (t1 <= tau) continue;
        if (tau <= t0) {
            p += 0.5 * (d.p[i] + d.p[i + 1]) * (t1 - t0);
        } else {
            const double ptau = pdf(d, tau);
            p += 0.5 * (ptau + d.p[i + 1]) * (t1 - tau);
        }
    }
    return p;
}

inline double tail_probability(const UnivariateDensity& u, double tau) {
    return std::visit([tau](const auto& v) { return tail_probability(v, tau); }, u);
}

inline double cdf(const UnivariateDensity& u, double t) {
    return mass(u) - tail_probability(u, t);
}

// --------------------------------------------------------------- support

// Upper end of the support; nullopt means unbounded.
inline std::optional<double> support_upper(const UnivariateDensity& u) {
    if (std::holds_alternative<ExponentialDensity>(u)) return std::nullopt;
    if (const auto* h = std::get_if<HistogramDensity>(&u)) {
        double hi = 0.0;
        for (const auto& bin : h->bins) hi = std::max(hi, bin.hi);
        return hi;
    }
    const auto& d = std::get<TabulatedDensity>(u);
    return d.t.empty() ? 0.0 : d.t.back();
}

// --------------------------------------------------------------- quantile

// Inverse CDF for u01 in [0, 1); exact per family. Used by samplers.
inline double quantile(const HistogramDensity& h, double u01) {
    std::vector<const HistogramBin*> order;
    order.reserve(h.bins.size());
    for (const auto& bin : h.bins) order.push_back(&bin);
    std::sort(order.begin(), order.end(),
              [](const auto* x, const auto* y) { return x->lo < y->lo; });
    double target = u01 * mass(h);
    for (const auto* bin : order) {
        const double m = bin->height * (bin->hi - bin->lo);
        if (target <= m && m > 0.0)
            return bin->lo + (target / m) * (bin->hi - bin->lo);
        target -= m;
    }
    return order.empty() ? 0.0 : order.back()->hi;
}

inline double quantile(const ExponentialDensity& e, double u01) {
    return -std::log1p(-u01) / e.rate;
}

inline double quantile(const TabulatedDensity& d, double u01) {
    double target = u01 * mass(d);
    for (std::size_t i = 0; i + 1 < d.t.size(); ++i) {
        const double t0 = d.t[i], t1 = d.t[i + 1];
        const double p0 = d.p[i], p1 = d.p[i + 1];
        const double m = 0.5 * (p0 + p1) * (t1 - t0);
        if (target > m) {
            target -= m;
            continue;
        }
        // solve p0 w + s w^2 / 2 = target for offset w, s = slope
        const double s = (p1 - p0) / (t1 - t0);
        if (std::abs(s) < 1e-300) return p0 > 0.0 ? t0 + target / p0 : t1;
        const double disc = p0 * p0 + 2.0 * s * target;
        const double w = (-p0 + std::sqrt(std::max(disc, 0.0))) / s;
        return t0 + std::clamp(w, 0.0, t1 - t0);
    }
    return d.t.empty() ? 0.0 : d.t.back();
}

inline double quantile(const UnivariateDensity& u, double u01) {
    return std::visit([u01](const auto& v) { return quantile(v, u01); }, u);
}

// --------------------------------------------------------------- validation

inline void validate_into(const HistogramDensity& h, const std::string& where,
                          std::vector<std::string>& out) {
    if (h.bins.empty()) {
        out.push_back(where + ": no bins");
        return;
    }
    for (const auto& bin : h.bins) {
        if (!(bin.lo >= 0.0)) out.push_back(where + ": bin lower bound below 0");
        if (!(bin.lo < bin.hi)) out.push_back(where + ": bin with lo >= hi");
        if (!(bin.height >= 0.0)) out.push_back(where + ": negative bin height");
    }
    auto sorted = h.bins;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& x, const auto& y) { return x.lo < y.lo; });
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        if (sorted[i].hi > sorted[i + 1].lo)
            out.push_back(where + ": overlapping bins");
    if (std::abs(mass(h) - 1.0) > kUnivariateMassTol)
        out.push_back(where + ": total mass differs from 1");
}

inline void validate_into(const ExponentialDensity& e, const std::string& where,
                          std::vector<std::string>& out) {
    if (!(e.rate > 0.0) || !std::isfinite(e.rate))
        out.push_back(where + ": rate must be positive and finite");
}

inline void validate_into(const TabulatedDensity& d, const std::string& where,
                          std::vector<std::string>& out) {
    if (d.t.size() < 2 || d.t.size() != d.p.size()) {
        out.push_back(where + ": needs at least two aligned (t, pdf) knots");
        return;
    }
    if (!(d.t.front() >= 0.0)) out.push_back(where + ": support below 0");
    for (std::size_t i = 0; i + 1 < d.t.size(); ++i)
        if (!(d.t[i] < d.t[i + 1]))
            out.push_back(where + ": knots not strictly increasing");
    for (double v : d.p)
        if (!(v >= 0.0)) out.push_back(where + ": negative pdf knot");
    if (std::abs(mass(d) - 1.0) > kUnivariateMassTol)
        out.push_back(where + ": total mass differs from 1");
}

inline void validate_into(const UnivariateDensity& u, const std::string& where,
                          std::vector<std::string>& out) {
    std::visit([&](const auto& v) { validate_into(v, where, out); }, u);
}

}  // namespace relay
