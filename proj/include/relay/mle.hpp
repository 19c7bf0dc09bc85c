#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "relay/density.hpp"
#include "relay/errors.hpp"
#include "relay/timing.hpp"

namespace relay {

// A rectangle a sample may fall into; half-open on both axes, no height.
struct PartitionBox {
    double a = 0.0, b = 0.0;  // first-algorithm time interval [a, b)
    double c = 0.0, d = 0.0;  // second-algorithm time interval [c, d)

    double area() const { return (b - a) * (d - c); }
    bool contains(double x, double y) const {
        return a <= x && x < b && c <= y && y < d;
    }
};

struct BoxPartition {
    std::vector<PartitionBox> boxes;
};

struct BoxCounts {
    std::vector<std::size_t> S;  // per-box sample counts, aligned with boxes
    std::size_t P = 0;           // total samples, counted or not
};

inline std::vector<std::string> validate(const BoxPartition& partition) {
    std::vector<std::string> violations;
    const auto& boxes = partition.boxes;
    if (boxes.empty()) violations.push_back("partition has no boxes");
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const auto& box = boxes[i];
        const std::string where = "partition box " + std::to_string(i + 1);
        if (!(box.a >= 0.0 && box.c >= 0.0) || !std::isfinite(box.a) ||
            !std::isfinite(box.c))
            violations.push_back(where + " has a negative or non-finite corner");
        if (!(box.a < box.b) || !std::isfinite(box.b))
            violations.push_back(where + " needs a < b");
        if (!(box.c < box.d) || !std::isfinite(box.d))
            violations.push_back(where + " needs c < d");
    }
    for (std::size_t i = 0; i < boxes.size(); ++i)
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
            const auto& p = boxes[i];
            const auto& q = boxes[j];
            if (p.a < q.b && q.a < p.b && p.c < q.d && q.c < p.d)
                violations.push_back("partition boxes " + std::to_string(i + 1) +
                                     " and " + std::to_string(j + 1) +
                                     " overlap");
        }
    return violations;
}

// Half-open membership counts; samples covered by no box stay uncounted
// (disjointness guarantees at most one box claims a sample).
inline BoxCounts count_membership(const BoxPartition& partition,
                                  const TimingSamples& samples) {
    BoxCounts counts;
    counts.S.assign(partition.boxes.size(), 0);
    counts.P = samples.pairs.size();
    for (const auto& [x, y] : samples.pairs)
        for (std::size_t j = 0; j < partition.boxes.size(); ++j)
            if (partition.boxes[j].contains(x, y)) {
                ++counts.S[j];
                break;
            }
    return counts;
}

// Maximum-likelihood step density over a fixed partition: each box gets
// height S_j / (P * area_j); empty boxes are dropped so every kept height is
// strictly positive and the total mass is exactly 1.
inline BoxDensity fit_k(const BoxPartition& partition,
                        const TimingSamples& samples) {
    if (auto violations = validate(partition); !violations.empty())
        throw contract_error("fit_k: invalid partition: " + violations.front());
    validate(samples);
    for (std::size_t i = 0; i < samples.pairs.size(); ++i) {
        const auto& [x, y] = samples.pairs[i];
        const bool covered =
            std::any_of(partition.boxes.begin(), partition.boxes.end(),
                        [&](const PartitionBox& box) { return box.contains(x, y); });
        if (!covered)
            throw coverage_error("sample " + std::to_string(i + 1) + " at (" +
                                 std::to_string(x) + ", " + std::to_string(y) +
                                 ") is not covered by any partition box");
    }
    const auto counts = count_membership(partition, samples);
    std::size_t total = 0;
    for (std::size_t s : counts.S) total += s;
    if (total == 0)
        throw degenerate_data_error("fit_k: every partition box is empty");

    BoxDensity density;
    for (std::size_t j = 0; j < partition.boxes.size(); ++j) {
        if (counts.S[j] == 0) continue;
        const auto& box = partition.boxes[j];
        const double k =
            double(counts.S[j]) / (double(counts.P) * box.area());
        density.boxes.push_back({k, box.a, box.b, box.c, box.d});
    }
    return density;
}

// Log of the likelihood k_1^{S_1} ... k_N^{S_N}; -inf as soon as a sample
// falls where the density vanishes.
inline double log_likelihood(const BoxDensity& density,
                             const TimingSamples& samples) {
    double ll = 0.0;
    for (const auto& [x, y] : samples.pairs) {
        double k = 0.0;
        for (const auto& box : density.boxes)
            if (box.contains(x, y)) {
                k = box.k;
                break;
            }
        if (k <= 0.0) return -std::numeric_limits<double>::infinity();
        ll += std::log(k);
    }
    return ll;
}

// ---------------------------------------------------------- auto partition

struct PartitionSpec {
    enum class Kind { uniform, quantile };
    Kind kind = Kind::uniform;
    int nx = 1;
    int ny = 1;
};

namespace detail {

// Upper bounds get a hair of padding so the largest sample stays inside its
// half-open cell; degenerate spans still get a positive-width cell.
inline double span_pad(double lo, double hi) {
    const double span = hi - lo;
    if (span > 0.0) return 1e-9 * span;
    return 1e-9 * std::max(1.0, std::abs(hi));
}

inline std::vector<double> axis_edges(std::vector<double> values, int cells,
                                      PartitionSpec::Kind kind) {
    std::sort(values.begin(), values.end());
    const double lo = values.front();
    const double hi = values.back() + span_pad(values.front(), values.back());
    std::vector<double> edges{lo};
    if (kind == PartitionSpec::Kind::uniform) {
        for (int i = 1; i < cells; ++i)
            edges.push_back(lo + (hi - lo) * double(i) / double(cells));
    } else {
        for (int i = 1; i < cells; ++i) {
            const std::size_t rank = values.size() * std::size_t(i) / std::size_t(cells);
            edges.push_back(values[std::min(rank, values.size() - 1)]);
        }
    }
    edges.push_back(hi);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

}  // namespace detail

// Disjoint half-open grid covering every sample. The uniform strategy cuts
// each axis evenly; the quantile strategy cuts at empirical marginal
// quantiles so cells carry comparable counts (coincident cuts collapse).
inline BoxPartition auto_partition(const TimingSamples& samples,
                                   const PartitionSpec& spec) {
    if (spec.nx < 1 || spec.ny < 1)
        throw contract_error("auto_partition: cell counts must be at least 1");
    if (samples.pairs.empty())
        throw contract_error("auto_partition: needs at least one sample");
    validate(samples);
    std::vector<double> xs, ys;
    xs.reserve(samples.pairs.size());
    ys.reserve(samples.pairs.size());
    for (const auto& [x, y] : samples.pairs) {
        xs.push_back(x);
        ys.push_back(y);
    }
    const auto xe = detail::axis_edges(std::move(xs), spec.nx, spec.kind);
    const auto ye = detail::axis_edges(std::move(ys), spec.ny, spec.kind);
    BoxPartition partition;
    for (std::size_t i = 0; i + 1 < xe.size(); ++i)
        for (std::size_t j = 0; j + 1 < ye.size(); ++j)
            partition.boxes.push_back({xe[i], xe[i + 1], ye[j], ye[j + 1]});
    return partition;
}

// --------------------------------------------------------- empirical curve

// ET of the fitted density evaluated straight from the counts, without
// constructing the density: the fitted heights substituted into the box
// closed form and regrouped by which regime each box is in. Must agree with
// et_box(fit_k(...), tau1) to machine accuracy.
inline double et_empirical(double tau1, const BoxPartition& partition,
                           const BoxCounts& counts) {
    if (!(tau1 >= 0.0))
        throw contract_error("et_empirical: tau must be nonnegative");
    if (counts.P == 0)
        throw degenerate_data_error("et_empirical: no samples behind counts");
    if (counts.S.size() != partition.boxes.size())
        throw contract_error(
            "et_empirical: counts are not aligned with the partition");
    const double P = double(counts.P);
    double quad = 0.0;      // sum over straddled boxes of S/(b-a)
    double lin = 0.0;       // coefficient of tau1
    double straddle = 0.0;  // straddled-box constant pieces
    double below = 0.0;     // boxes entirely above tau1 (tau1 <= a)
    double above = 0.0;     // boxes entirely below tau1 (b <= tau1)
    for (std::size_t j = 0; j < partition.boxes.size(); ++j) {
        const auto& box = partition.boxes[j];
        const double S = double(counts.S[j]);
        if (tau1 <= box.a) {
            lin += S;
            below += S * (box.d + box.c);
        } else if (tau1 < box.b) {
            const double w = S / (box.b - box.a);
            quad += w;
            lin += w * (box.b - 0.5 * (box.d + box.c));
            straddle += w * (box.b * (box.d + box.c) - box.a * box.a);
        } else {
            above += S * (box.b + box.a);
        }
    }
    return -0.5 * tau1 * tau1 * quad / P + tau1 * lin / P +
           0.5 * (straddle + below + above) / P;
}

}  // namespace relay
