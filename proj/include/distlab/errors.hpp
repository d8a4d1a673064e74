#pragma once

#include <stdexcept>
#include <string>

namespace distlab {

// Error taxonomy. Every failure mode named by a module contract gets its own
// type so callers (and the CLI exit-code mapping) can dispatch on it.

struct grid_mismatch_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Mass escaping the top grid atom, sum-of-probabilities violations, or an
// environment whose cumulative cost exceeds 1.
struct normalization_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct weight_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct key_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct parameter_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A precondition of the learning algorithm itself was falsified at runtime
// (empty confidence set, non-realizable class, ...).
struct algorithm_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct instance_too_large : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace distlab
