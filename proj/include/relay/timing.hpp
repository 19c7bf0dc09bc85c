#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "relay/errors.hpp"

namespace relay {

// Observed runtime pairs (x_j, y_j) for two algorithms over the same tasks.
struct TimingSamples {
    std::vector<std::pair<double, double>> pairs;

    std::size_t size() const { return pairs.size(); }
};

inline void validate(const TimingSamples& samples) {
    for (std::size_t j = 0; j < samples.pairs.size(); ++j) {
        const auto& [x, y] = samples.pairs[j];
        if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
            throw contract_error("timing sample " + std::to_string(j + 1) +
                                 " must have finite positive entries");
    }
}

}  // namespace relay
