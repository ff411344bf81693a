#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace pathode {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad caller input: shapes, ranges, labels, missing options.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Oracle evaluated outside the effective domain of f or Omega.
class DomainError : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

/// Non-finite values produced inside a numerical kernel.
class NumericError : public Error {
public:
    using Error::Error;
};

/// An iterative method hit its iteration cap.
class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

}  // namespace pathode
