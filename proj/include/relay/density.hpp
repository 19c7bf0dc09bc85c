#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "relay/errors.hpp"
#include "relay/quadrature.hpp"
#include "relay/univariate.hpp"

namespace relay {

// ------------------------------------------------------------------ types

// Constant height k on the half-open rectangle [a,b) x [c,d).
struct Box {
    double k, a, b, c, d;
    double area() const { return (b - a) * (d - c); }
    double mass() const { return k * area(); }
    bool contains(double x, double y) const {
        return a <= x && x < b && c <= y && y < d;
    }
};

struct BoxDensity {
    std::vector<Box> boxes;
};

// Independent per-algorithm marginals. Two factors form the joint density
// f(x, y) = fx(x) fy(y); more factors extend the same product to N stages.
struct ProductDensity {
    std::vector<UnivariateDensity> factors;
};

// (1 + ax + by + cx^2 + dy^2) exp(-x - y) / (1 + a + b + 2c + 2d)
struct ExpPolyDensity {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    double norm() const { return 1.0 + a + b + 2.0 * c + 2.0 * d; }
};

// 2c/((1+x)^2 (1+y)^3) + sum d(m,n) (m+2)(n+2) / ((1+x)^{m+3} (1+y)^{n+3})
// with finite coefficient support dcoef[m][n].
struct RationalSeriesDensity {
    double c = 0.0;
    std::vector<std::vector<double>> dcoef;
};

// Piecewise-constant tabulation: value cells[i][j] on the half-open cell
// [x_knots[i], x_knots[i+1]) x [y_knots[j], y_knots[j+1]). Carries analytic
// examples numerically; t_max documents the truncation extent.
struct GridDensity {
    std::vector<double> x_knots;
    std::vector<double> y_knots;
    std::vector<std::vector<double>> cells;
    double t_max = 0.0;
};

using JointDensity = std::variant<BoxDensity, ProductDensity, ExpPolyDensity,
                                  RationalSeriesDensity, GridDensity>;

enum class Axis { x, y };

inline constexpr double kBoxMassTol = 1e-9;
inline constexpr double kSeriesMassTol = 1e-9;

// Controls the truncated-integral doubling test used wherever an integral
// over [0, inf) has to be judged convergent or not numerically.
struct DivergenceConfig {
    double base_truncation = 50.0;
    double growth_tol = 0.01;
};

// ------------------------------------------------------------------ mass

inline double total_mass(const BoxDensity& d) {
    double m = 0.0;
    for (const auto& box : d.boxes) m += box.mass();
    return m;
}

inline double total_mass(const RationalSeriesDensity& d) {
    double m = d.c;
    for (const auto& row : d.dcoef)
        for (double v : row) m += v;
    return m;
}

inline double total_mass(const GridDensity& g) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < g.x_knots.size(); ++i) {
        const double dx = g.x_knots[i + 1] - g.x_knots[i];
        for (std::size_t j = 0; j + 1 < g.y_knots.size(); ++j)
            m += g.cells[i][j] * dx * (g.y_knots[j + 1] - g.y_knots[j]);
    }
    return m;
}

inline double total_mass(const ProductDensity& d) {
    double m = 1.0;
    for (const auto& f : d.factors) m *= mass(f);
    return m;
}

inline double total_mass(const ExpPolyDensity&) {
    return 1.0;  // normalized by construction
}

inline double total_mass(const JointDensity& d) {
    return std::visit([](const auto& v) { return total_mass(v); }, d);
}

// ------------------------------------------------------------------ validate

inline std::vector<std::string> validate(const BoxDensity& d) {
    std::vector<std::string> out;
    if (d.boxes.empty()) out.push_back("box density has no boxes");
    for (std::size_t n = 0; n < d.boxes.size(); ++n) {
        const auto& box = d.boxes[n];
        const std::string where = "box " + std::to_string(n + 1);
        if (!(box.k > 0.0)) out.push_back(where + ": k must be positive");
        if (!(box.a >= 0.0 && box.a < box.b))
            out.push_back(where + ": requires 0 <= a < b");
        if (!(box.c >= 0.0 && box.c < box.d))
            out.push_back(where + ": requires 0 <= c < d");
    }
    for (std::size_t i = 0; i < d.boxes.size(); ++i)
        for (std::size_t j = i + 1; j < d.boxes.size(); ++j) {
            const auto& p = d.boxes[i];
            const auto& q = d.boxes[j];
            if (p.a < q.b && q.a < p.b && p.c < q.d && q.c < p.d)
                out.push_back("boxes " + std::to_string(i + 1) + " and " +
                              std::to_string(j + 1) + " overlap");
        }
    if (!d.boxes.empty() && std::abs(total_mass(d) - 1.0) > kBoxMassTol)
        out.push_back("total mass differs from 1 by more than 1e-9");
    return out;
}

inline std::vector<std::string> validate(const ProductDensity& d) {
    std::vector<std::string> out;
    if (d.factors.size() < 2) {
        out.push_back("product density needs at least two factors");
        return out;
    }
    for (std::size_t i = 0; i < d.factors.size(); ++i)
        validate_into(d.factors[i], "factor " + std::to_string(i + 1), out);
    return out;
}

inline std::vector<std::string> validate(const ExpPolyDensity& d) {
    std::vector<std::string> out;
    for (auto [v, name] : {std::pair{d.a, "a"}, {d.b, "b"}, {d.c, "c"}, {d.d, "d"}})
        if (!(v >= 0.0) || !std::isfinite(v))
            out.push_back(std::string("coefficient ") + name +
                          " must be nonnegative and finite");
    return out;
}

inline std::vector<std::string> validate(const RationalSeriesDensity& d) {
    std::vector<std::string> out;
    if (!(d.c >= 0.0)) out.push_back("weight c must be nonnegative");
    for (const auto& row : d.dcoef)
        for (double v : row)
            if (!(v >= 0.0)) out.push_back("d coefficients must be nonnegative");
    if (std::abs(total_mass(d) - 1.0) > kSeriesMassTol)
        out.push_back("c + sum of d coefficients differs from 1 by more than 1e-9");
    return out;
}

inline std::vector<std::string> validate(const GridDensity& g) {
    std::vector<std::string> out;
    auto check_knots = [&](const std::vector<double>& k, const char* name) {
        if (k.size() < 2) {
            out.push_back(std::string(name) + " needs at least two knots");
            return;
        }
        if (k.front() != 0.0) out.push_back(std::string(name) + " must start at 0");
        for (std::size_t i = 0; i + 1 < k.size(); ++i)
            if (!(k[i] < k[i + 1]))
                out.push_back(std::string(name) + " not strictly increasing");
    };
    check_knots(g.x_knots, "x knots");
    check_knots(g.y_knots, "y knots");
    const std::size_t nx = g.x_knots.size() >= 2 ? g.x_knots.size() - 1 : 0;
    const std::size_t ny = g.y_knots.size() >= 2 ? g.y_knots.size() - 1 : 0;
    if (g.cells.size() != nx) {
        out.push_back("cell rows do not match x knots");
        return out;
    }
    for (const auto& row : g.cells) {
        if (row.size() != ny) {
            out.push_back("cell columns do not match y knots");
            return out;
        }
        for (double v : row)
            if (!(v >= 0.0)) out.push_back("negative cell value");
    }
    if (nx && ny) {
        const double m = total_mass(g);
        if (m < 0.99 || m > 1.001)
            out.push_back("numeric mass " + std::to_string(m) +
                          " outside [0.99, 1.001]; tabulation too coarse or truncated");
        const double extent =
            std::max(g.x_knots.back(), g.y_knots.back());
        if (g.t_max != 0.0 && g.t_max + 1e-12 < extent)
            out.push_back("declared t_max smaller than the tabulated extent");
    }
    return out;
}

inline std::vector<std::string> validate(const JointDensity& d) {
    return std::visit([](const auto& v) { return validate(v); }, d);
}

// ------------------------------------------------------------------ pdf

inline double pdf(const BoxDensity& d, double x, double y) {
    double v = 0.0;
    for (const auto& box : d.boxes)
        if (box.contains(x, y)) v += box.k;
    return v;
}

inline double pdf(const ProductDensity& d, double x, double y) {
    if (d.factors.size() != 2)
        throw capability_error(
            "pdf(x, y) requires a two-factor product density");
    return pdf(d.factors[0], x) * pdf(d.factors[1], y);
}

inline double pdf(const ExpPolyDensity& d, double x, double y) {
    return (1.0 + d.a * x + d.b * y + d.c * x * x + d.d * y * y) / d.norm() *
           std::exp(-x - y);
}

inline double pdf(const RationalSeriesDensity& d, double x, double y) {
    const double ux = 1.0 + x, uy = 1.0 + y;
    double v = 2.0 * d.c / (ux * ux * uy * uy * uy);
    double px = ux * ux * ux;  // (1+x)^{m+3} running for m = 0, 1, ...
    for (std::size_t m = 0; m < d.dcoef.size(); ++m, px *= ux) {
        double py = uy * uy * uy;
        for (std::size_t n = 0; n < d.dcoef[m].size(); ++n, py *= uy)
            if (d.dcoef[m][n] != 0.0)
                v += d.dcoef[m][n] * double((m + 2) * (n + 2)) / (px * py);
    }
    return v;
}

namespace detail {
// Index of the half-open cell [k[i], k[i+1]) containing t, or npos.
inline std::size_t cell_index(const std::vector<double>& knots, double t) {
    if (knots.size() < 2 || t < knots.front() || t >= knots.back())
        return std::size_t(-1);
    return static_cast<std::size_t>(
               std::upper_bound(knots.begin(), knots.end(), t) - knots.begin()) -
           1;
}
}  // namespace detail

inline double pdf(const GridDensity& g, double x, double y) {
    const std::size_t i = detail::cell_index(g.x_knots, x);
    const std::size_t j = detail::cell_index(g.y_knots, y);
    if (i == std::size_t(-1) || j == std::size_t(-1)) return 0.0;
    return g.cells[i][j];
}

inline double pdf(const JointDensity& d, double x, double y) {
    if (x < 0.0 || y < 0.0)
        throw contract_error("pdf: coordinates must be nonnegative");
    return std::visit([&](const auto& v) { return pdf(v, x, y); }, d);
}

// --------------------------------------------------------- discontinuities

// Locations where the pdf jumps along one axis; quadrature splits there.
inline std::vector<double> breakpoints(const JointDensity& d, Axis axis) {
    std::vector<double> out;
    if (const auto* b = std::get_if<BoxDensity>(&d)) {
        for (const auto& box : b->boxes) {
            out.push_back(axis == Axis::x ? box.a : box.c);
            out.push_back(axis == Axis::x ? box.b : box.d);
        }
    } else if (const auto* g = std::get_if<GridDensity>(&d)) {
        out = axis == Axis::x ? g->x_knots : g->y_knots;
    } else if (const auto* p = std::get_if<ProductDensity>(&d)) {
        if (p->factors.size() == 2) {
            const auto& f = p->factors[axis == Axis::x ? 0 : 1];
            if (const auto* h = std::get_if<HistogramDensity>(&f)) {
                for (const auto& bin : h->bins) {
                    out.push_back(bin.lo);
                    out.push_back(bin.hi);
                }
            } else if (const auto* t = std::get_if<TabulatedDensity>(&f)) {
                out = t->t;
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Upper end of the support along an axis; nullopt when unbounded.
inline std::optional<double> support_upper(const JointDensity& d, Axis axis) {
    if (const auto* b = std::get_if<BoxDensity>(&d)) {
        double hi = 0.0;
        for (const auto& box : b->boxes)
            hi = std::max(hi, axis == Axis::x ? box.b : box.d);
        return hi;
    }
    if (const auto* g = std::get_if<GridDensity>(&d))
        return axis == Axis::x ? g->x_knots.back() : g->y_knots.back();
    if (const auto* p = std::get_if<ProductDensity>(&d)) {
        if (p->factors.size() >= 2)
            return support_upper(p->factors[axis == Axis::x ? 0 : 1]);
    }
    return std::nullopt;
}

// ------------------------------------------------------------ marginal mean

inline std::optional<double> marginal_mean(const BoxDensity& d, Axis axis) {
    double m = 0.0;
    for (const auto& box : d.boxes)
        m += box.mass() * 0.5 * (axis == Axis::x ? box.a + box.b : box.c + box.d);
    return m;
}

inline std::optional<double> marginal_mean(const ProductDensity& d, Axis axis) {
    return mean(d.factors[axis == Axis::x ? 0 : 1]);
}

inline std::optional<double> marginal_mean(const ExpPolyDensity& d, Axis axis) {
    // int t^k exp(-t) over [0, inf) is k!, so the moments are polynomial in
    // the coefficients.
    if (axis == Axis::x)
        return (1.0 + 2.0 * d.a + d.b + 6.0 * d.c + 2.0 * d.d) / d.norm();
    return (1.0 + d.a + 2.0 * d.b + 2.0 * d.c + 6.0 * d.d) / d.norm();
}

inline std::optional<double> marginal_mean(const RationalSeriesDensity& d,
                                           Axis axis) {
    // Component (m, n) has marginal means 1/(m+1) and 1/(n+1); the c part has
    // a finite y mean of 1 but a 1/(1+x)^2 x tail whose mean diverges.
    if (axis == Axis::x && d.c > 0.0) return std::nullopt;
    double m = axis == Axis::y ? d.c : 0.0;
    for (std::size_t i = 0; i < d.dcoef.size(); ++i)
        for (std::size_t j = 0; j < d.dcoef[i].size(); ++j)
            m += d.dcoef[i][j] / double((axis == Axis::x ? i : j) + 1);
    return m;
}

namespace detail {

// Exact first moment of the grid marginal on [0, T].
inline double grid_partial_moment(const GridDensity& g, Axis axis, double T) {
    const auto& knots = axis == Axis::x ? g.x_knots : g.y_knots;
    const auto& other = axis == Axis::x ? g.y_knots : g.x_knots;
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double lo = knots[i];
        const double hi = std::min(knots[i + 1], T);
        if (hi <= lo) break;
        double strip = 0.0;  // marginal density on this strip
        for (std::size_t j = 0; j + 1 < other.size(); ++j)
            strip += (axis == Axis::x ? g.cells[i][j] : g.cells[j][i]) *
                     (other[j + 1] - other[j]);
        m += strip * 0.5 * (hi * hi - lo * lo);
    }
    return m;
}

}  // namespace detail

inline std::optional<double> marginal_mean(const GridDensity& g, Axis axis,
                                           const DivergenceConfig& cfg = {}) {
    const double T = cfg.base_truncation;
    const double v1 = detail::grid_partial_moment(g, axis, T);
    const double v2 = detail::grid_partial_moment(g, axis, 2.0 * T);
    const double v3 = detail::grid_partial_moment(g, axis, 4.0 * T);
    if (assess_truncation(v1, v2, v3, cfg.growth_tol).divergent)
        return std::nullopt;
    const auto& knots = axis == Axis::x ? g.x_knots : g.y_knots;
    return detail::grid_partial_moment(g, axis, knots.back());
}

inline std::optional<double> marginal_mean(const JointDensity& d, Axis axis,
                                           const DivergenceConfig& cfg = {}) {
    if (const auto* g = std::get_if<GridDensity>(&d))
        return marginal_mean(*g, axis, cfg);
    if (const auto* b = std::get_if<BoxDensity>(&d)) return marginal_mean(*b, axis);
    if (const auto* p = std::get_if<ProductDensity>(&d))
        return marginal_mean(*p, axis);
    if (const auto* e = std::get_if<ExpPolyDensity>(&d))
        return marginal_mean(*e, axis);
    return marginal_mean(std::get<RationalSeriesDensity>(d), axis);
}

// ------------------------------------------------------------------ sampling

// Deterministic uniform stream: identical draws for a given seed on every
// platform (std::uniform_real_distribution is implementation-defined).
struct SampleStream {
    explicit SampleStream(std::uint64_t seed) : gen(seed) {}
    double uniform() { return double(gen() >> 11) * 0x1.0p-53; }
    std::mt19937_64 gen;
};

namespace detail {

struct CellTable {
    std::vector<double> cumulative;  // strictly increasing partial masses
    std::vector<std::size_t> index;  // source cell per table entry

    std::size_t pick(double u) const {
        const double target = u * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
        std::size_t i = static_cast<std::size_t>(it - cumulative.begin());
        if (i >= index.size()) i = index.size() - 1;
        return index[i];
    }
};

template <class MassOfCell>
CellTable build_cell_table(std::size_t count, MassOfCell&& mass_of) {
    CellTable t;
    double running = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double m = mass_of(i);
        if (m <= 0.0) continue;
        running += m;
        t.cumulative.push_back(running);
        t.index.push_back(i);
    }
    return t;
}

}  // namespace detail

inline std::vector<std::pair<double, double>> sample(const BoxDensity& d,
                                                     std::uint64_t seed,
                                                     std::size_t count) {
    auto table = detail::build_cell_table(
        d.boxes.size(), [&](std::size_t i) { return d.boxes[i].mass(); });
    SampleStream s(seed);
    std::vector<std::pair<double, double>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto& box = d.boxes[table.pick(s.uniform())];
        const double x = box.a + s.uniform() * (box.b - box.a);
        const double y = box.c + s.uniform() * (box.d - box.c);
        out.emplace_back(x, y);
    }
    return out;
}

inline std::vector<std::pair<double, double>> sample(const ProductDensity& d,
                                                     std::uint64_t seed,
                                                     std::size_t count) {
    if (d.factors.size() != 2)
        throw capability_error("pair sampling requires a two-factor product");
    SampleStream s(seed);
    std::vector<std::pair<double, double>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double x = quantile(d.factors[0], s.uniform());
        const double y = quantile(d.factors[1], s.uniform());
        out.emplace_back(x, y);
    }
    return out;
}

inline std::vector<std::pair<double, double>> sample(const GridDensity& g,
                                                     std::uint64_t seed,
                                                     std::size_t count) {
    const std::size_t ny = g.y_knots.size() - 1;
    auto table = detail::build_cell_table(
        (g.x_knots.size() - 1) * ny, [&](std::size_t flat) {
            const std::size_t i = flat / ny, j = flat % ny;
            return g.cells[i][j] * (g.x_knots[i + 1] - g.x_knots[i]) *
                   (g.y_knots[j + 1] - g.y_knots[j]);
        });
    SampleStream s(seed);
    std::vector<std::pair<double, double>> out;
    out.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        const std::size_t flat = table.pick(s.uniform());
        const std::size_t i = flat / ny, j = flat % ny;
        const double x =
            g.x_knots[i] + s.uniform() * (g.x_knots[i + 1] - g.x_knots[i]);
        const double y =
            g.y_knots[j] + s.uniform() * (g.y_knots[j + 1] - g.y_knots[j]);
        out.emplace_back(x, y);
    }
    return out;
}

// Rejection sampling against a product Exp(1/2) envelope. The polynomial
// factor is bounded term by term: sup t exp(-t/2) = 2/e, sup t^2 exp(-t/2)
// = 16/e^2, so M g dominates f everywhere.
inline std::vector<std::pair<double, double>> sample(const ExpPolyDensity& d,
                                                     std::uint64_t seed,
                                                     std::size_t count) {
    constexpr double e = 2.718281828459045235;
    const double H = 1.0 + (d.a + d.b) * (2.0 / e) +
                     (d.c + d.d) * (16.0 / (e * e));
    const double M = 4.0 * H / d.norm();
    SampleStream s(seed);
    std::vector<std::pair<double, double>> out;
    out.reserve(count);
    while (out.size() < count) {
        const double x = -2.0 * std::log1p(-s.uniform());
        const double y = -2.0 * std::log1p(-s.uniform());
        const double envelope = 0.25 * std::exp(-0.5 * (x + y));
        if (s.uniform() * M * envelope <= pdf(d, x, y)) out.emplace_back(x, y);
    }
    return out;
}

// Exact mixture sampling: pick a component by weight, then invert each
// factor's CDF. (1+t)^{-(m+2)} tails cannot be dominated by any exponential
// envelope, so rejection is not an option for this family.
inline std::vector<std::pair<double, double>> sample(
    const RationalSeriesDensity& d, std::uint64_t seed, std::size_t count) {
    // component list: index 0 is the c part, then (m, n) in row-major order
    std::vector<double> weights{d.c};
    std::vector<std::pair<int, int>> mn{{-1, -1}};
    for (std::size_t m = 0; m < d.dcoef.size(); ++m)
        for (std::size_t n = 0; n < d.dcoef[m].size(); ++n) {
            weights.push_back(d.dcoef[m][n]);
            mn.emplace_back(int(m), int(n));
        }
    auto table = detail::build_cell_table(
        weights.size(), [&](std::size_t i) { return weights[i]; });
    auto draw = [](double u, double power) {
        // X with pdf p (1+t)^{-(p+1)} has inverse CDF (1-u)^{-1/p} - 1
        return std::pow(1.0 - u, -1.0 / power) - 1.0;
    };
    SampleStream s(seed);
    std::vector<std::pair<double, double>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto [m, n] = mn[table.pick(s.uniform())];
        const double x = draw(s.uniform(), m < 0 ? 1.0 : double(m + 2));
        const double y = draw(s.uniform(), n < 0 ? 2.0 : double(n + 2));
        out.emplace_back(x, y);
    }
    return out;
}

inline std::vector<std::pair<double, double>> sample(const JointDensity& d,
                                                     std::uint64_t seed,
                                                     std::size_t count) {
    return std::visit(
        [&](const auto& v) { return sample(v, seed, count); }, d);
}

// --------------------------------------------------------- expression grids

using Expression = std::function<double(double, double)>;

// Closed-form densities shipped with the tool, tabulated on demand.
inline Expression builtin_expression(const std::string& name) {
    if (name == "xy_gauss_ridge")
        return [](double x, double y) {
            const double s = x + y;
            return 12.0 * x * y * std::exp(-s * s);
        };
    if (name == "rayleigh_pair")
        return [](double x, double y) {
            return 48.0 * x * y * std::exp(-4.0 * x * x - 3.0 * y * y);
        };
    if (name == "complementary_peaks")
        return [](double x, double y) {
            const double k = 0.022179119694367830844;
            auto bump = [](double t, double c) {
                return std::exp(-(t - c) * (t - c));
            };
            return k * x * y * (bump(x, 1) * bump(y, 7) + bump(x, 7) * bump(y, 1));
        };
    if (name == "unit_exponential")
        return [](double x, double y) { return std::exp(-x - y); };
    if (name == "pareto_tails")
        return [](double x, double y) {
            return 1.0 / ((1.0 + x) * (1.0 + x) * (1.0 + y) * (1.0 + y));
        };
    throw contract_error("unknown builtin expression: " + name);
}

// Knots 0..extent, optionally graded toward 0 by power `grading` (1 = even
// spacing; larger concentrates cells near the origin, leaving wider cells in
// the tail so heavy-tailed examples can reach large extents cheaply).
inline std::vector<double> graded_knots(double extent, std::size_t cells,
                                        double grading = 1.0) {
    if (!(extent > 0.0) || cells < 1)
        throw contract_error("grid knots need a positive extent and cells");
    std::vector<double> k(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i)
        k[i] = extent * std::pow(double(i) / double(cells), grading);
    k.front() = 0.0;
    k.back() = extent;
    return k;
}

inline GridDensity tabulate_expression(const Expression& f,
                                       std::vector<double> x_knots,
                                       std::vector<double> y_knots) {
    GridDensity g;
    g.x_knots = std::move(x_knots);
    g.y_knots = std::move(y_knots);
    g.t_max = std::max(g.x_knots.back(), g.y_knots.back());
    g.cells.assign(g.x_knots.size() - 1,
                   std::vector<double>(g.y_knots.size() - 1, 0.0));
    for (std::size_t i = 0; i + 1 < g.x_knots.size(); ++i) {
        const double mx = 0.5 * (g.x_knots[i] + g.x_knots[i + 1]);
        for (std::size_t j = 0; j + 1 < g.y_knots.size(); ++j) {
            const double my = 0.5 * (g.y_knots[j] + g.y_knots[j + 1]);
            g.cells[i][j] = f(mx, my);
        }
    }
    return g;
}

}  // namespace relay
