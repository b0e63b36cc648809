#pragma once

#include <stdexcept>
#include <string>

namespace rsflow {

/// Violated precondition: bad arguments, mismatched grids, wrong degrees.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation left its domain of validity (non-positive density,
/// NaN after a step, folded flow map, Jacobi non-convergence, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rsflow
