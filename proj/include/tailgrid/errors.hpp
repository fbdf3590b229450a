#pragma once

#include <stdexcept>
#include <string>

namespace tailgrid {

// Every precondition / numerical failure in the library throws GridError with
// a machine-checkable code. The message carries the human-readable detail.
enum class ErrorCode {
    invalid_argument,
    invalid_density,
    inconsistent_normalization,
    misaligned_window,
    lattice_mismatch,
    invalid_weights,
    degenerate_support,
    degenerate_measure,
    series_divergent,
    inversion_failed,
    grid_overflow,
    not_s_self_decomposable,
    invalid_function,
    no_negative_drift,
    ladder_not_converged,
    unreliable_oracle,
    numerical_failure,
};

class GridError : public std::runtime_error {
  public:
    GridError(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw GridError(code, what);
}

}  // namespace tailgrid
