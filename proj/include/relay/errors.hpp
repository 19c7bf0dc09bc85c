#pragma once

#include <stdexcept>
#include <string>

namespace relay {

// Misuse of an interface: mismatched lengths, bad arguments, invalid inputs.
struct contract_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// The requested operation is not supported for this density form.
struct capability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A timing sample falls outside every box of a partition.
struct coverage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// No usable data (empty sample set, all boxes empty).
struct degenerate_data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An expected-time evaluation failed to converge, so the quantity that
// depends on it (an optimum, a curve row) cannot be produced.
struct divergent_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file: bad JSON shape, wrong CSV header, unparseable number.
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace relay
