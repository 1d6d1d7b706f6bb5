#pragma once

#include <stdexcept>
#include <string>

namespace treemass {

// Invalid distribution parameters (nonpositive shape/rate/scale, index outside (0,1)).
struct InvalidSpec : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Argument outside an operation's domain (negative x, negative s, bad counts).
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Closed-form convolution requested across families or across stable indices.
struct ClosureViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Density requested where no closed form exists (stable index != 1/2).
struct UnsupportedDensity : std::domain_error {
  using std::domain_error::domain_error;
};

// Tabulated densities on incompatible grids (spacing or anchor mismatch).
struct GridMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Normalization impossible: every conditioning draw came back zero.
struct DegenerateSum : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A bounded rejection or search loop hit its iteration cap.
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Adaptive quadrature could not reach the requested tolerance in budget.
struct QuadratureFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownVertex : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct UnknownParent : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Attachment that would violate birth-order: parent born in the same or a later step.
struct TimeViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// No vertex or cluster carries positive attachment weight.
struct NoEligibleTarget : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Too few distinct degrees to fit a tail slope.
struct InsufficientSupport : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace treemass
