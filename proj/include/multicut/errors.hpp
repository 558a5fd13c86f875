#pragma once

#include <stdexcept>
#include <string>

namespace multicut {

// Invalid argument values (label out of range, empty literal sets, ...).
struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Structurally broken or unrepresentable models.
struct model_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation called on the wrong kind of instance (e.g. terminal separation
// on an unsupervised instance).
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Request exceeds a documented capability (order caps, search-space caps).
struct unsupported_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed textual input (schedules, model files, edge lists).
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Contract violations inside the solver itself.
struct internal_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace multicut
