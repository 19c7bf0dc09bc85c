#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "relay/errors.hpp"

namespace relay {

// Switch budgets (tau_1, ..., tau_{N-1}) for a portfolio of N algorithms:
// stage i is abandoned once the portfolio clock reaches tau_1 + ... + tau_i.
struct Schedule {
    std::vector<double> budgets;

    std::size_t stages() const { return budgets.size() + 1; }
};

inline void validate(const Schedule& s) {
    for (double tau : s.budgets)
        if (!(tau >= 0.0) || !std::isfinite(tau))
            throw contract_error("schedule budgets must be finite and >= 0");
}

struct DerivedOutcome {
    double total_time;
    std::size_t completing_index;  // 1-based stage that produced the output
};

// Realized total time of the derived algorithm for one task, given the
// per-algorithm runtimes. Survival past stage n requires tau_n strictly less
// than the runtime; a runtime exactly equal to its budget counts as a
// completion. An abandoned stage is charged exactly its budget.
inline DerivedOutcome derived_time(const std::vector<double>& times,
                                   const Schedule& schedule) {
    if (times.size() != schedule.budgets.size() + 1)
        throw contract_error(
            "derived_time: need exactly one more runtime than budgets (" +
            std::to_string(schedule.budgets.size() + 1) + " vs " +
            std::to_string(times.size()) + ")");
    validate(schedule);
    for (double t : times)
        if (!(t > 0.0) || !std::isfinite(t))
            throw contract_error("derived_time: runtimes must be finite and > 0");
    double charged = 0.0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        if (times[i] <= schedule.budgets[i]) return {charged + times[i], i + 1};
        charged += schedule.budgets[i];
    }
    return {charged + times.back(), times.size()};
}

}  // namespace relay
