#pragma once

#include "ldp/control.hpp"
#include "ldp/operators.hpp"
#include "ldp/spaces.hpp"

namespace ldp {

/// A fully assembled model: space, drift, jump coefficient, mark measure,
/// start state, and horizon.
struct Problem {
  GalerkinSpace space;
  DriftOperator drift;
  NoiseCoefficient noise;
  MarkSpace marks;
  Vector x0;
  double horizon = 1.0;
};

}  // namespace ldp
