#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "tailgrid/errors.hpp"

namespace tailgrid {

// Uniform grid on the real line. Cell k covers the half-open interval
// (origin + k*span, origin + (k+1)*span]; the cell's mass is carried as an
// atom at the right edge, so lattice arithmetic (convolution, shifts) is
// exact on atoms. Windows (x, x+c] with aligned endpoints are exact sums.
class Lattice {
  public:
    Lattice(double origin, double span, std::size_t len)
        : origin_(origin), span_(span), len_(len) {
        if (!(span > 0.0) || !std::isfinite(span) || !std::isfinite(origin))
            fail(ErrorCode::invalid_argument, "lattice span must be positive and finite");
        if (len < 1) fail(ErrorCode::invalid_argument, "lattice len must be >= 1");
    }

    double origin() const { return origin_; }
    double span() const { return span_; }
    std::size_t len() const { return len_; }

    // Cell edges; never computed by repeated addition.
    double left_edge(std::ptrdiff_t k) const { return origin_ + static_cast<double>(k) * span_; }
    double right_edge(std::ptrdiff_t k) const { return origin_ + static_cast<double>(k + 1) * span_; }

    // Atom position of cell k (its right edge).
    double position(std::ptrdiff_t k) const { return right_edge(k); }

    // Supremum of the grid's support.
    double sup() const { return right_edge(static_cast<std::ptrdiff_t>(len_) - 1); }

    double align_tol() const { return 1e-9 * span_; }

    bool aligned(double x) const {
        double steps = (x - origin_) / span_;
        return std::abs(steps - std::round(steps)) * span_ <= align_tol();
    }

    // Number of whole cells between origin and the aligned coordinate x.
    // Atoms with position <= x are exactly the indices k < boundary_index(x).
    std::ptrdiff_t boundary_index(double x) const {
        if (!aligned(x))
            fail(ErrorCode::misaligned_window,
                 "coordinate " + std::to_string(x) + " is not on a cell boundary");
        return static_cast<std::ptrdiff_t>(std::llround((x - origin_) / span_));
    }

    bool compatible_with(const Lattice& other) const {
        if (std::abs(span_ - other.span_) > 1e-12 * span_) return false;
        double steps = (other.origin_ - origin_) / span_;
        return std::abs(steps - std::round(steps)) * span_ <= align_tol();
    }

    bool operator==(const Lattice& other) const {
        return origin_ == other.origin_ && span_ == other.span_ && len_ == other.len_;
    }

  private:
    double origin_;
    double span_;
    std::size_t len_;
};

inline Lattice lattice_new(double origin, double span, std::size_t len) {
    return Lattice(origin, span, len);
}

// The window Delta = (0, c]. F(x + Delta) = F(x, x+c].
struct DeltaWindow {
    double c;

    explicit DeltaWindow(double width) : c(width) {
        if (!(width > 0.0) || !std::isfinite(width))
            fail(ErrorCode::invalid_argument, "window width must be positive");
    }

    // c must be an integer multiple of the lattice span so windows are exact.
    std::ptrdiff_t cells_on(const Lattice& lat) const {
        double steps = c / lat.span();
        double r = std::round(steps);
        if (std::abs(steps - r) * lat.span() > lat.align_tol() || r < 1.0)
            fail(ErrorCode::misaligned_window, "window width is not a multiple of the lattice span");
        return static_cast<std::ptrdiff_t>(r);
    }
};

}  // namespace tailgrid
