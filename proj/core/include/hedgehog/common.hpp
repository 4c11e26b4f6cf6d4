#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace hedgehog {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Error categories. Callers catch by category; messages carry the detail.

/// Invalid mathematical input, e.g. coincident source and target.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Misuse of an API: bad parameters, missing preconditions.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Parametrization with vanishing Jacobian.
struct SingularParametrization : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Least-squares patch fit failed (rank deficiency).
struct FittingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A refinement loop hit its depth cap.
struct RefinementError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hedgehog
