#pragma once

#include <stdexcept>
#include <string>

namespace rmfkit {

/// A prime factor of the requested integer has no sampled value.
struct missing_prime_value : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Paper-faithful parameters requested but numerically unrepresentable.
struct infeasible_parameters : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A local Euler factor is too close to a pole to evaluate.
struct numeric_singularity : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The requested exact method is not available for this input.
struct unsupported_method : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No Monte Carlo trial satisfied the conditioning event.
struct insufficient_conditioning_mass : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A simulated process violated one of its declared invariants.
struct invalid_process : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rmfkit
