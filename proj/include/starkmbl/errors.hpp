#pragma once

#include <stdexcept>
#include <string>

namespace starkmbl {

// Error taxonomy, mapped to CLI exit codes: config_error -> 2,
// resource_error -> 3, numeric_error -> 4.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace starkmbl
