#pragma once

#include <stdexcept>
#include <string>

namespace silt {

/// Parameters outside an operation's domain or regime. Maps to CLI exit code 2.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The requested quantity is an integral known to diverge for these parameters.
class DivergenceError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Adaptive quadrature exhausted its budget without meeting tolerance. Exit code 3.
class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File read/write failures. Exit code 4.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace silt
