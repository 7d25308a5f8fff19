#pragma once

#include <stdexcept>

namespace rsq {

// Invalid identity, malformed spec, contract violation. CLI exit code 2.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Problem size exceeds an enumeration budget. CLI exit code 3.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace rsq
