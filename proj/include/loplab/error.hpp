#pragma once

#include <stdexcept>
#include <string>

namespace loplab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Comparison graph is not weakly connected, so neither the LLSM nor the
/// EM weight vector is unique.
class NotConnected : public Error {
public:
    NotConnected()
        : Error("comparison graph is not weakly connected; the weight vector is not unique "
                "(uniqueness holds iff every pair of alternatives is compared directly or indirectly)") {}
};

class ParseError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace loplab
