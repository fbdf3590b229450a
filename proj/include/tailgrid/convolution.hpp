#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "tailgrid/fft.hpp"
#include "tailgrid/grid_distribution.hpp"

namespace tailgrid {

namespace detail {

inline std::vector<double> direct_convolve(const std::vector<double>& a,
                                           const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

// Shared excess bookkeeping: any pairing involving an excess goes to the
// corresponding excess; left x right pairings are ambiguous, so they are split
// evenly and recorded in the cross_excess quality counter.
inline GridDistribution assemble_convolution(const GridDistribution& f,
                                             const GridDistribution& g,
                                             std::vector<double> cells) {
    double lf = f.left_excess(), rf = f.right_excess();
    double lg = g.left_excess(), rg = g.right_excess();
    double mf = f.grid_mass(), mg = g.grid_mass();
    double cross = lf * rg + rf * lg;
    double left = lf * (lg + mg) + lg * mf + 0.5 * cross;
    double right = rf * (rg + mg) + rg * mf + 0.5 * cross;
    Lattice lat(f.lattice().origin() + g.lattice().origin() + f.lattice().span(),
                f.lattice().span(), cells.size());
    return GridDistribution(lat, std::move(cells), left, right,
                            f.cross_excess() + g.cross_excess() + cross);
}

}  // namespace detail

// Convolution by the O(n^2) definition; the oracle for the FFT path and the
// implementation used for small results.
inline GridDistribution convolve_direct(const GridDistribution& f, const GridDistribution& g) {
    if (!f.lattice().compatible_with(g.lattice()))
        fail(ErrorCode::lattice_mismatch, "convolve: incompatible lattices");
    return detail::assemble_convolution(f, g, detail::direct_convolve(f.mass(), g.mass()));
}

// FFT convolution with zero-padding to the next power of two; negative FFT
// artifacts above -1e-12 are clamped by the GridDistribution constructor.
inline GridDistribution convolve(const GridDistribution& f, const GridDistribution& g) {
    if (!f.lattice().compatible_with(g.lattice()))
        fail(ErrorCode::lattice_mismatch, "convolve: incompatible lattices");
    std::size_t out_len = f.mass().size() + g.mass().size() - 1;
    // Small results and near-delta factors go through the direct kernel: it is
    // faster there and keeps single-atom convolutions (shifts) exact.
    if (out_len < 64 || std::min(f.mass().size(), g.mass().size()) <= 8)
        return detail::assemble_convolution(f, g, detail::direct_convolve(f.mass(), g.mass()));
    return detail::assemble_convolution(f, g, detail::RealFft::convolve(f.mass(), g.mass()));
}

// Point mass representing F^{*0} on a cell of f's lattice: the cell of the
// (extended) grid that contains 0, so it acts as the convolution identity.
inline GridDistribution convolution_identity(const GridDistribution& f) {
    const Lattice& lat = f.lattice();
    double h = lat.span();
    auto k0 = static_cast<std::ptrdiff_t>(std::ceil(-lat.origin() / h - 0.5 * 1e-9)) - 1;
    return GridDistribution(Lattice(lat.left_edge(k0), h, 1), {1.0}, 0.0, 0.0);
}

// F^{*n} by binary exponentiation over convolve.
inline GridDistribution n_fold(const GridDistribution& f, long long n) {
    if (n < 0) fail(ErrorCode::invalid_argument, "n_fold: n must be >= 0");
    if (n == 0) return convolution_identity(f);
    GridDistribution base = f;
    std::unique_ptr<GridDistribution> acc;
    auto k = static_cast<unsigned long long>(n);
    while (true) {
        if (k & 1ULL) acc = std::make_unique<GridDistribution>(acc ? convolve(*acc, base) : base);
        k >>= 1ULL;
        if (k == 0) break;
        base = convolve(base, base);
    }
    return *acc;
}

// Truncate support above max_position (aligned); the removed mass moves to
// right_excess. For distributions with nonnegative support this is exact for
// every later query at or below the cap.
inline GridDistribution cap_right(const GridDistribution& f, double max_position) {
    const Lattice& lat = f.lattice();
    std::ptrdiff_t keep = lat.boundary_index(max_position);
    if (keep >= static_cast<std::ptrdiff_t>(lat.len())) return f;
    if (keep < 1) fail(ErrorCode::invalid_argument, "cap_right: cap below grid start");
    double spill = 0.0;
    std::vector<double> mass(f.mass().begin(), f.mass().begin() + keep);
    for (std::size_t k = static_cast<std::size_t>(keep); k < f.mass().size(); ++k)
        spill += f.mass()[k];
    return GridDistribution(Lattice(lat.origin(), lat.span(), static_cast<std::size_t>(keep)),
                            std::move(mass), f.left_excess(), f.right_excess() + spill,
                            f.cross_excess());
}

// Truncate support at or below min_position (aligned); removed mass moves to
// left_excess. Used for random-walk iterations where deeply negative paths
// cannot influence positive-part queries.
inline GridDistribution cap_left(const GridDistribution& f, double min_position) {
    const Lattice& lat = f.lattice();
    std::ptrdiff_t drop = lat.boundary_index(min_position);
    if (drop <= 0) return f;
    if (drop >= static_cast<std::ptrdiff_t>(lat.len()))
        fail(ErrorCode::invalid_argument, "cap_left: cap above grid end");
    double spill = 0.0;
    for (std::ptrdiff_t k = 0; k < drop; ++k) spill += f.mass()[static_cast<std::size_t>(k)];
    std::vector<double> mass(f.mass().begin() + drop, f.mass().end());
    return GridDistribution(
        Lattice(lat.left_edge(drop), lat.span(), lat.len() - static_cast<std::size_t>(drop)),
        std::move(mass), f.left_excess() + spill, f.right_excess(), f.cross_excess());
}

}  // namespace tailgrid
