#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ldp {

using Scalar = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Bad user input (config files, control files, out-of-band values).
/// The CLI maps this to exit code 2.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solver breakdown: Newton stall, contraction failure, non-finite state.
/// The CLI maps this to exit code 3.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A resource cap tripped (expected jump count, memory guard).
/// The CLI maps this to exit code 4.
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ldp
