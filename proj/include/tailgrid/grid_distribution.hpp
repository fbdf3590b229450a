#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "tailgrid/lattice.hpp"

namespace tailgrid {

// Mass clamping floor: cell values in [-kNegFloor, 0) are treated as FFT /
// cancellation noise and clamped to zero; anything more negative is an error.
inline constexpr double kNegFloor = 1e-12;
// Tolerance on total probability mass.
inline constexpr double kMassTol = 1e-9;

namespace detail {

inline void clamp_small_negatives(std::vector<double>& mass, double floor_abs,
                                  const char* who) {
    for (double& m : mass) {
        if (m < 0.0) {
            if (m < -floor_abs)
                fail(ErrorCode::numerical_failure,
                     std::string(who) + ": cell mass " + std::to_string(m) +
                         " below clamp floor");
            m = 0.0;
        }
    }
}

}  // namespace detail

// Probability distribution on a lattice. Mass outside the grid is tracked
// explicitly in left_excess / right_excess so tail diagnostics can detect
// when a probed window draws on truncated bookkeeping instead of real cells.
class GridDistribution {
  public:
    GridDistribution(Lattice lattice, std::vector<double> mass, double left_excess,
                     double right_excess, double cross_excess = 0.0)
        : lattice_(lattice),
          mass_(std::move(mass)),
          left_excess_(left_excess),
          right_excess_(right_excess),
          cross_excess_(cross_excess) {
        if (mass_.size() != lattice_.len())
            fail(ErrorCode::invalid_argument, "mass vector length does not match lattice");
        if (left_excess_ < -kNegFloor || right_excess_ < -kNegFloor)
            fail(ErrorCode::invalid_argument, "negative excess mass");
        left_excess_ = std::max(left_excess_, 0.0);
        right_excess_ = std::max(right_excess_, 0.0);
        detail::clamp_small_negatives(mass_, kNegFloor, "GridDistribution");
        double total = std::accumulate(mass_.begin(), mass_.end(), 0.0) + left_excess_ +
                       right_excess_;
        if (std::abs(total - 1.0) > kMassTol)
            fail(ErrorCode::inconsistent_normalization,
                 "total mass " + std::to_string(total) + " is not 1");
    }

    const Lattice& lattice() const { return lattice_; }
    const std::vector<double>& mass() const { return mass_; }
    double left_excess() const { return left_excess_; }
    double right_excess() const { return right_excess_; }
    // Quality counter: mass whose placement was ambiguous (left x right excess
    // pairings in convolution, split series tails for two-sided jumps).
    double cross_excess() const { return cross_excess_; }

    double grid_mass() const {
        return std::accumulate(mass_.begin(), mass_.end(), 0.0);
    }

    // Mean of the on-grid part; excess mass has no location and is ignored.
    double grid_mean() const {
        double m = 0.0;
        for (std::size_t k = 0; k < mass_.size(); ++k)
            m += lattice_.position(static_cast<std::ptrdiff_t>(k)) * mass_[k];
        return m;
    }

    // Smallest atom position carrying mass; +inf if the grid is empty.
    double min_support() const {
        for (std::size_t k = 0; k < mass_.size(); ++k)
            if (mass_[k] > 0.0) return lattice_.position(static_cast<std::ptrdiff_t>(k));
        return std::numeric_limits<double>::infinity();
    }

    bool positive_half() const { return left_excess_ == 0.0 && min_support() > 0.0; }

  private:
    Lattice lattice_;
    std::vector<double> mass_;
    double left_excess_;
    double right_excess_;
    double cross_excess_;
};

// Finite measure on a lattice (Levy measures, the ladder measure). No excess
// bookkeeping: infinite-mass measures enter the library only via cutoffs.
class GridMeasure {
  public:
    GridMeasure(Lattice lattice, std::vector<double> mass)
        : lattice_(lattice), mass_(std::move(mass)) {
        if (mass_.size() != lattice_.len())
            fail(ErrorCode::invalid_argument, "mass vector length does not match lattice");
        detail::clamp_small_negatives(mass_, kNegFloor, "GridMeasure");
        total_ = std::accumulate(mass_.begin(), mass_.end(), 0.0);
        if (!std::isfinite(total_))
            fail(ErrorCode::invalid_argument, "measure total mass must be finite");
    }

    const Lattice& lattice() const { return lattice_; }
    const std::vector<double>& mass() const { return mass_; }
    double total() const { return total_; }

    GridMeasure scaled(double factor) const {
        if (!(factor >= 0.0))
            fail(ErrorCode::invalid_argument, "measure scale factor must be >= 0");
        std::vector<double> m = mass_;
        for (double& v : m) v *= factor;
        return GridMeasure(lattice_, std::move(m));
    }

    // Mass of atoms with position strictly above x (x aligned).
    double mass_above(double x) const {
        std::ptrdiff_t j0 = lattice_.boundary_index(x);
        double s = 0.0;
        for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(j0, 0);
             k < static_cast<std::ptrdiff_t>(mass_.size()); ++k)
            s += mass_[static_cast<std::size_t>(k)];
        return s;
    }

  private:
    Lattice lattice_;
    std::vector<double> mass_;
    double total_;
};

// Window query result: total mass in the window plus the part that came from
// excess buckets (windows overlapping a grid edge).
struct WindowMass {
    double total = 0.0;
    double from_excess = 0.0;
};

inline WindowMass interval_mass(const GridDistribution& f, double x, DeltaWindow w) {
    const Lattice& lat = f.lattice();
    std::ptrdiff_t j0 = lat.boundary_index(x);
    std::ptrdiff_t m = w.cells_on(lat);
    std::ptrdiff_t lo = std::max<std::ptrdiff_t>(j0, 0);
    std::ptrdiff_t hi = std::min<std::ptrdiff_t>(j0 + m, static_cast<std::ptrdiff_t>(lat.len()));
    WindowMass out;
    for (std::ptrdiff_t k = lo; k < hi; ++k) out.total += f.mass()[static_cast<std::size_t>(k)];
    if (j0 < 0) out.from_excess += f.left_excess();
    if (j0 + m > static_cast<std::ptrdiff_t>(lat.len())) out.from_excess += f.right_excess();
    out.total += out.from_excess;
    out.total = std::clamp(out.total, 0.0, 1.0);
    return out;
}

// F(x, x+c]: exact sum of cell masses in the window, plus the relevant excess
// when the window covers a grid edge. x must be lattice-aligned; there is no
// interpolation, misaligned windows are an error.
inline double interval_prob(const GridDistribution& f, double x, DeltaWindow w) {
    return interval_mass(f, x, w).total;
}

inline WindowMass interval_mass(const GridMeasure& nu, double x, DeltaWindow w) {
    const Lattice& lat = nu.lattice();
    std::ptrdiff_t j0 = lat.boundary_index(x);
    std::ptrdiff_t m = w.cells_on(lat);
    std::ptrdiff_t lo = std::max<std::ptrdiff_t>(j0, 0);
    std::ptrdiff_t hi = std::min<std::ptrdiff_t>(j0 + m, static_cast<std::ptrdiff_t>(lat.len()));
    WindowMass out;
    for (std::ptrdiff_t k = lo; k < hi; ++k) out.total += nu.mass()[static_cast<std::size_t>(k)];
    return out;
}

inline double interval_prob(const GridMeasure& nu, double x, DeltaWindow w) {
    return interval_mass(nu, x, w).total;
}

// Tail probability P(X > x) for aligned x: all atoms strictly above x plus
// right_excess (plus left_excess when x lies below the whole grid).
inline double tail_prob(const GridDistribution& f, double x) {
    const Lattice& lat = f.lattice();
    std::ptrdiff_t j0 = lat.boundary_index(x);
    double s = f.right_excess();
    if (j0 < 0) s += f.left_excess();
    for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(j0, 0);
         k < static_cast<std::ptrdiff_t>(lat.len()); ++k)
        s += f.mass()[static_cast<std::size_t>(k)];
    return std::clamp(s, 0.0, 1.0);
}

// Point mass at an aligned coordinate, represented on a single cell whose
// right edge is the atom.
inline GridDistribution delta_at(double position, double span) {
    return GridDistribution(Lattice(position - span, span, 1), {1.0}, 0.0, 0.0);
}

// Discretize a density: cell mass by composite Simpson with 9 nodes per cell.
// The caller supplies the analytic mass outside the grid, split by side; the
// result is renormalized to exactly 1 with excesses scaled proportionally.
inline GridDistribution from_density(const std::function<double(double)>& f, const Lattice& lat,
                                     double left_tail_hint, double right_tail_hint) {
    if (left_tail_hint < 0.0 || right_tail_hint < 0.0)
        fail(ErrorCode::invalid_argument, "tail mass hints must be >= 0");
    std::vector<double> mass(lat.len(), 0.0);
    const double h = lat.span() / 8.0;
    static constexpr double simpson_w[9] = {1, 4, 2, 4, 2, 4, 2, 4, 1};
    for (std::size_t k = 0; k < lat.len(); ++k) {
        double a = lat.left_edge(static_cast<std::ptrdiff_t>(k));
        double acc = 0.0;
        for (int j = 0; j <= 8; ++j) {
            double v = f(a + h * j);
            if (v < 0.0 || !std::isfinite(v))
                fail(ErrorCode::invalid_density,
                     "density is negative or non-finite at x=" + std::to_string(a + h * j));
            acc += simpson_w[j] * v;
        }
        mass[k] = acc * h / 3.0;
    }
    double total = std::accumulate(mass.begin(), mass.end(), 0.0) + left_tail_hint +
                   right_tail_hint;
    if (std::abs(total - 1.0) > 1e-3)
        fail(ErrorCode::inconsistent_normalization,
             "density plus tail hints integrate to " + std::to_string(total));
    double scale = 1.0 / total;
    for (double& m : mass) m *= scale;
    return GridDistribution(lat, std::move(mass), left_tail_hint * scale,
                            right_tail_hint * scale);
}

// Cellwise convex combination on the hull lattice; excesses combine linearly.
inline GridDistribution mix(const std::vector<double>& weights,
                            const std::vector<GridDistribution>& dists) {
    if (weights.empty() || weights.size() != dists.size())
        fail(ErrorCode::invalid_argument, "mix needs matching nonempty weights and distributions");
    double wsum = 0.0;
    for (double w : weights) {
        if (w < 0.0) fail(ErrorCode::invalid_weights, "mix weight is negative");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-6)
        fail(ErrorCode::invalid_weights, "mix weights sum to " + std::to_string(wsum));
    const Lattice& base = dists[0].lattice();
    double origin = base.origin();
    double top = base.sup();
    for (const auto& d : dists) {
        if (!base.compatible_with(d.lattice()))
            fail(ErrorCode::lattice_mismatch, "mix inputs on incompatible lattices");
        origin = std::min(origin, d.lattice().origin());
        top = std::max(top, d.lattice().sup());
    }
    double h = base.span();
    auto len = static_cast<std::size_t>(std::llround((top - origin) / h));
    Lattice hull(origin, h, len);
    std::vector<double> mass(len, 0.0);
    double lx = 0.0, rx = 0.0, cx = 0.0;
    for (std::size_t i = 0; i < dists.size(); ++i) {
        const auto& d = dists[i];
        auto off = static_cast<std::ptrdiff_t>(std::llround((d.lattice().origin() - origin) / h));
        for (std::size_t k = 0; k < d.mass().size(); ++k)
            mass[static_cast<std::size_t>(off + static_cast<std::ptrdiff_t>(k))] +=
                weights[i] * d.mass()[k];
        lx += weights[i] * d.left_excess();
        rx += weights[i] * d.right_excess();
        cx += weights[i] * d.cross_excess();
    }
    // Scale out any rounding in the weight sum so the invariant holds exactly.
    double scale = 1.0 / wsum;
    for (double& m : mass) m *= scale;
    return GridDistribution(hull, std::move(mass), lx * scale, rx * scale, cx * scale);
}

// Conditional distribution of F on (0, infinity). The normalizer is the mass
// strictly above zero; the cell whose atom sits at 0 belongs to the excluded
// part.
inline GridDistribution positive_conditional(const GridDistribution& f) {
    const Lattice& lat = f.lattice();
    double q = f.right_excess();
    for (std::size_t k = 0; k < f.mass().size(); ++k)
        if (lat.position(static_cast<std::ptrdiff_t>(k)) > 0.0) q += f.mass()[k];
    if (q <= 0.0)
        fail(ErrorCode::degenerate_support, "no mass strictly above zero");
    std::vector<double> mass(lat.len(), 0.0);
    for (std::size_t k = 0; k < f.mass().size(); ++k)
        if (lat.position(static_cast<std::ptrdiff_t>(k)) > 0.0) mass[k] = f.mass()[k] / q;
    return GridDistribution(lat, std::move(mass), 0.0, f.right_excess() / q, f.cross_excess());
}

// F^+: all mass at or below 0 (including left excess) collapses to an atom at
// 0; the tail above 0 is unchanged.
inline GridDistribution positive_truncated(const GridDistribution& f) {
    const Lattice& lat = f.lattice();
    double below = f.left_excess();
    for (std::size_t k = 0; k < f.mass().size(); ++k)
        if (lat.position(static_cast<std::ptrdiff_t>(k)) <= 0.0) below += f.mass()[k];
    if (below == 0.0) return f;
    double h = lat.span();
    // Cell containing 0: left edge < 0 <= right edge, kept on the same grid.
    auto k0 = static_cast<std::ptrdiff_t>(std::ceil(-lat.origin() / h - 0.5 * 1e-9)) - 1;
    double new_origin = std::min(lat.origin(), lat.left_edge(k0));
    double top = std::max(lat.sup(), lat.right_edge(k0));
    auto len = static_cast<std::size_t>(std::llround((top - new_origin) / h));
    Lattice hull(new_origin, h, len);
    std::vector<double> mass(len, 0.0);
    auto off = static_cast<std::ptrdiff_t>(std::llround((lat.origin() - new_origin) / h));
    for (std::size_t k = 0; k < f.mass().size(); ++k)
        if (lat.position(static_cast<std::ptrdiff_t>(k)) > 0.0)
            mass[static_cast<std::size_t>(off + static_cast<std::ptrdiff_t>(k))] = f.mass()[k];
    mass[static_cast<std::size_t>(off + k0)] += below;
    return GridDistribution(hull, std::move(mass), 0.0, f.right_excess(), f.cross_excess());
}

}  // namespace tailgrid
