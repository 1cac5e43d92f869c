#pragma once

#include <stdexcept>
#include <string>

namespace decon {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Model validation
struct CycleError : Error {
    using Error::Error;
};
struct RoleError : Error {
    using Error::Error;
};
struct PsdError : Error {
    using Error::Error;
};

// Generic bad argument (sample counts, parameter ranges, ...)
struct InputError : Error {
    using Error::Error;
};

// Regression
struct RankError : Error {
    using Error::Error;
};
struct SampleSizeError : Error {
    using Error::Error;
};

// Counterfactual generation
struct MissingColumnError : Error {
    using Error::Error;
};
struct ShapeError : Error {
    using Error::Error;
};

// Experiment harness
struct ParamSearchError : Error {
    using Error::Error;
};

// File formats
struct SchemaError : Error {
    using Error::Error;
};

}  // namespace decon
