#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <span>
#include <vector>

#include "relay/errors.hpp"

namespace relay {

struct QuadratureConfig {
    double abs_tol = 1e-8;
    int max_intervals = 4000;
};

namespace detail {

// Gauss7/Kronrod15 nodes and weights on [-1,1] (positive half; symmetric).
inline constexpr std::array<double, 8> kK15Nodes = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};
inline constexpr std::array<double, 8> kK15Weights = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
inline constexpr std::array<double, 4> kG7Weights = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct Segment {
    double a, b;
    double integral;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod_15(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double fval[15];
    for (int i = 0; i < 7; ++i) {
        fval[i] = f(mid - half * kK15Nodes[i]);
        fval[14 - i] = f(mid + half * kK15Nodes[i]);
    }
    fval[7] = f(mid);

    double kronrod = 0.0;
    for (int i = 0; i < 7; ++i) kronrod += kK15Weights[i] * (fval[i] + fval[14 - i]);
    kronrod += kK15Weights[7] * fval[7];
    kronrod *= half;

    // Gauss-7 uses the odd-indexed Kronrod nodes.
    double gauss = kG7Weights[3] * fval[7];
    for (int i = 0; i < 3; ++i) gauss += kG7Weights[i] * (fval[2 * i + 1] + fval[13 - 2 * i]);
    gauss *= half;

    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

// Adaptive 1-D quadrature: globally refines the segment with the largest
// Gauss/Kronrod discrepancy until the summed error estimate meets abs_tol.
// Known discontinuity locations can be passed as breakpoints so step
// integrands are split exactly instead of hunted by bisection.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureConfig& cfg = {},
                 std::span<const double> breakpoints = {}) {
    if (!(a <= b)) throw contract_error("integrate: requires a <= b");
    if (a == b) return 0.0;

    std::vector<double> cuts;
    cuts.push_back(a);
    for (double p : breakpoints)
        if (p > a && p < b) cuts.push_back(p);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<detail::Segment> queue;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        auto seg = detail::gauss_kronrod_15(f, cuts[i], cuts[i + 1]);
        total += seg.integral;
        total_err += seg.error;
        queue.push(seg);
    }

    int intervals = static_cast<int>(cuts.size()) - 1;
    while (total_err > cfg.abs_tol && intervals < cfg.max_intervals) {
        detail::Segment worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) continue;  // interval at double resolution
        auto left = detail::gauss_kronrod_15(f, worst.a, mid);
        auto right = detail::gauss_kronrod_15(f, mid, worst.b);
        total += left.integral + right.integral - worst.integral;
        total_err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++intervals;
    }
    return total;
}

// Verdict on a sequence of truncated integrals v(T), v(2T), v(4T) of a
// nonnegative integrand. The increments of a convergent integral shrink as
// the domain doubles; log-or-worse growth keeps them level or rising.
// Flag divergence only when the latest relative step still exceeds
// growth_tol AND the increments are not contracting.
struct TruncationVerdict {
    bool divergent = false;
    double value = 0.0;  // tail-extrapolated when increments contract geometrically
};

inline TruncationVerdict assess_truncation(double v1, double v2, double v3,
                                           double growth_tol = 0.01) {
    const double d2 = v2 - v1;
    const double d3 = v3 - v2;
    const double scale = std::max({std::abs(v1), std::abs(v2), std::abs(v3), 1e-300});
    const double rel3 = std::abs(d3) / scale;

    const bool contracting = std::abs(d3) <= 0.75 * std::abs(d2);
    if (rel3 > growth_tol && !contracting) return {true, v3};

    TruncationVerdict out{false, v3};
    // Geometric tail extrapolation (Aitken): exact for 1/T truncation error,
    // a no-op when the increments have already vanished.
    if (std::abs(d2) > 0.0 && contracting && std::abs(d3) > 1e-15 * scale) {
        const double r = d3 / d2;
        if (r > 0.0 && r < 0.95) out.value = v3 + d3 * r / (1.0 - r);
    }
    return out;
}

}  // namespace relay
