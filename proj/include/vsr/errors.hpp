#pragma once

#include <stdexcept>
#include <string>

namespace vsr {

// Bad input: out-of-range states, malformed scenarios, degenerate fits.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Step-size underflow, step budget exhausted, probability negativity.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace vsr
