#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "tailgrid/convolution.hpp"

namespace tailgrid {

namespace detail {

// Accumulates a (possibly signed) weighted sum of distributions on the hull
// of their lattices. Used by every series builder.
class SignedAccumulator {
  public:
    void add(double w, const GridDistribution& d) {
        const Lattice& lat = d.lattice();
        if (cells_.empty()) {
            span_ = lat.span();
            origin_ = lat.origin();
            cells_.assign(lat.len(), 0.0);
        } else {
            double new_origin = std::min(origin_, lat.origin());
            double new_top = std::max(top(), lat.sup());
            auto front = static_cast<std::size_t>(std::llround((origin_ - new_origin) / span_));
            auto new_len = static_cast<std::size_t>(std::llround((new_top - new_origin) / span_));
            if (front > 0 || new_len > cells_.size()) {
                std::vector<double> grown(new_len, 0.0);
                std::copy(cells_.begin(), cells_.end(), grown.begin() + front);
                cells_.swap(grown);
                origin_ = new_origin;
            }
        }
        auto off = static_cast<std::ptrdiff_t>(std::llround((lat.origin() - origin_) / span_));
        for (std::size_t k = 0; k < d.mass().size(); ++k)
            cells_[static_cast<std::size_t>(off + static_cast<std::ptrdiff_t>(k))] +=
                w * d.mass()[k];
        left_ += w * d.left_excess();
        right_ += w * d.right_excess();
        cross_ += w * d.cross_excess();
    }

    double top() const { return origin_ + span_ * static_cast<double>(cells_.size()); }

    // Clamp small negatives from alternating series, renormalize to total 1.
    // Returns the renormalization factor applied.
    double clamp_and_normalize(double neg_tol, const char* who) {
        for (double& c : cells_) {
            if (c < 0.0) {
                if (c < -neg_tol)
                    fail(ErrorCode::inversion_failed,
                         std::string(who) + ": negative mass below tolerance after clamping");
                c = 0.0;
            }
        }
        left_ = std::max(left_, 0.0);
        right_ = std::max(right_, 0.0);
        cross_ = std::max(cross_, 0.0);
        double total = left_ + right_;
        for (double c : cells_) total += c;
        if (!(total > 0.0))
            fail(ErrorCode::inversion_failed, std::string(who) + ": series sums to zero mass");
        double factor = 1.0 / total;
        for (double& c : cells_) c *= factor;
        left_ *= factor;
        right_ *= factor;
        return factor;
    }

    void add_left_excess(double w) { left_ += w; }
    void add_right_excess(double w) { right_ += w; }
    void add_cross(double w) { cross_ += w; }

    GridDistribution build() {
        Lattice lat(origin_, span_, cells_.size());
        return GridDistribution(lat, std::move(cells_), left_, right_, cross_);
    }

  private:
    double span_ = 0.0;
    double origin_ = 0.0;
    std::vector<double> cells_;
    double left_ = 0.0;
    double right_ = 0.0;
    double cross_ = 0.0;
};

constexpr double kNoCap = std::numeric_limits<double>::infinity();

// sum_n weights[n] * G^{*n} with a running convolution. `unassigned` is the
// truncated weight tail: it goes to right_excess when G lives on the positive
// half line, otherwise it is split evenly between the excesses and flagged.
inline GridDistribution weighted_nfold_series(const std::vector<double>& weights,
                                              const GridDistribution& jump, double unassigned,
                                              double support_cap) {
    SignedAccumulator acc;
    GridDistribution term = convolution_identity(jump);
    for (std::size_t n = 0; n < weights.size(); ++n) {
        if (n > 0) {
            term = convolve(term, jump);
            if (support_cap != kNoCap && term.lattice().sup() > support_cap)
                term = cap_right(term, support_cap);
        }
        acc.add(weights[n], term);
    }
    if (unassigned > 0.0) {
        if (jump.positive_half()) {
            acc.add_right_excess(unassigned);
        } else {
            acc.add_left_excess(0.5 * unassigned);
            acc.add_right_excess(0.5 * unassigned);
            acc.add_cross(unassigned);
        }
    }
    return acc.build();
}

}  // namespace detail

// mu = e^{-lambda} sum_n (lambda^n / n!) G^{*n}, truncated where the analytic
// Poisson weight tail drops below tol; the tail mass is kept as excess, never
// renormalized away.
inline GridDistribution compound_poisson(double lambda, const GridDistribution& jump, double tol,
                                         double support_cap = detail::kNoCap) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        fail(ErrorCode::invalid_argument, "compound_poisson: lambda must be > 0");
    if (!(tol > 0.0)) fail(ErrorCode::invalid_argument, "compound_poisson: tol must be > 0");
    std::vector<double> w;
    double wn = std::exp(-lambda);
    double cum = 0.0;
    for (std::size_t n = 0;; ++n) {
        w.push_back(wn);
        cum += wn;
        if (1.0 - cum < tol) break;
        if (n > 100000)
            fail(ErrorCode::numerical_failure, "compound_poisson: weight series did not converge");
        wn *= lambda / static_cast<double>(n + 1);
    }
    return detail::weighted_nfold_series(w, jump, std::max(1.0 - cum, 0.0), support_cap);
}

// sum_n (1-lambda) lambda^n G^{*n} with geometric weight tail below tol.
inline GridDistribution compound_geometric(double lambda, const GridDistribution& jump,
                                           double tol, double support_cap = detail::kNoCap) {
    if (!(lambda > 0.0) || !(lambda < 1.0))
        fail(ErrorCode::invalid_argument, "compound_geometric: lambda must be in (0,1)");
    if (!(tol > 0.0)) fail(ErrorCode::invalid_argument, "compound_geometric: tol must be > 0");
    std::vector<double> w;
    double wn = 1.0 - lambda;
    double tail = 1.0;  // lambda^{n} before adding term n
    for (std::size_t n = 0;; ++n) {
        w.push_back(wn);
        tail *= lambda;
        if (tail < tol) break;
        if (n > 2000000)
            fail(ErrorCode::numerical_failure,
                 "compound_geometric: weight series did not converge");
        wn *= lambda;
    }
    return detail::weighted_nfold_series(w, jump, tail, support_cap);
}

// F_a = sum_n binom(a+n-1, n) (1-lambda)^a lambda^n G^{*n}; generalized
// binomial coefficients via log-gamma.
inline GridDistribution compound_negative_binomial(double a, double lambda,
                                                   const GridDistribution& jump, double tol,
                                                   double support_cap = detail::kNoCap) {
    if (!(a > 0.0)) fail(ErrorCode::invalid_argument, "compound_negative_binomial: a must be > 0");
    if (!(lambda > 0.0) || !(lambda < 1.0))
        fail(ErrorCode::invalid_argument, "compound_negative_binomial: lambda must be in (0,1)");
    if (a == 1.0) return compound_geometric(lambda, jump, tol, support_cap);
    if (!(tol > 0.0))
        fail(ErrorCode::invalid_argument, "compound_negative_binomial: tol must be > 0");
    std::vector<double> w;
    double log1mlam = std::log1p(-lambda);
    double loglam = std::log(lambda);
    double lga = std::lgamma(a);
    double cum = 0.0;
    for (std::size_t n = 0;; ++n) {
        double dn = static_cast<double>(n);
        double logw = std::lgamma(a + dn) - lga - std::lgamma(dn + 1.0) + a * log1mlam +
                      dn * loglam;
        double wn = std::exp(logw);
        w.push_back(wn);
        cum += wn;
        if (1.0 - cum < tol) break;
        if (n > 2000000)
            fail(ErrorCode::numerical_failure,
                 "compound_negative_binomial: weight series did not converge");
    }
    return detail::weighted_nfold_series(w, jump, std::max(1.0 - cum, 0.0), support_cap);
}

// F^{*tau} = sum_n P(tau = n) F^{*n} for a finitely supported counting law.
inline GridDistribution randomly_stopped_sum(const std::vector<double>& tau_pmf,
                                             const GridDistribution& f,
                                             double support_cap = detail::kNoCap) {
    if (tau_pmf.empty()) fail(ErrorCode::invalid_weights, "randomly_stopped_sum: empty pmf");
    double sum = 0.0;
    for (double p : tau_pmf) {
        if (p < 0.0) fail(ErrorCode::invalid_weights, "randomly_stopped_sum: negative pmf value");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        fail(ErrorCode::invalid_weights, "randomly_stopped_sum: pmf does not sum to 1");
    return detail::weighted_nfold_series(tau_pmf, f, 0.0, support_cap);
}

struct InversionResult {
    GridDistribution jump;
    double renormalization = 1.0;
    std::size_t terms = 0;
};

// Recovers the single-jump law G1 from the zero-stripped compound Poisson
// mu10 via lambdaLambda1 * G1(x+Delta) = -sum_n n^{-1} (1 - e^{lambdaLambda1})^n
// mu10^{*n}(x+Delta). Requires lambdaLambda1 < log 2 so the alternating series
// has a geometric majorant.
inline InversionResult levy_inversion(const GridDistribution& mu10, double lambda_lambda1,
                                      double tol) {
    if (!(lambda_lambda1 > 0.0))
        fail(ErrorCode::invalid_argument, "levy_inversion: lambda*Lambda1 must be > 0");
    if (!(lambda_lambda1 < std::log(2.0)))
        fail(ErrorCode::series_divergent,
             "levy_inversion: lambda*Lambda1 >= log 2, inversion series diverges");
    if (!(tol > 0.0)) fail(ErrorCode::invalid_argument, "levy_inversion: tol must be > 0");
    double q = std::expm1(lambda_lambda1);  // |1 - e^{lambda Lambda1}|, in (0,1)
    std::size_t n_terms = 1;
    while (std::pow(q, static_cast<double>(n_terms + 1)) /
               (static_cast<double>(n_terms + 1) * (1.0 - q)) >=
           tol)
        ++n_terms;

    detail::SignedAccumulator acc;
    GridDistribution term = mu10;
    double cap = mu10.lattice().sup();
    double qn = q;
    for (std::size_t n = 1; n <= n_terms; ++n) {
        double coeff = ((n % 2 == 1) ? 1.0 : -1.0) * qn /
                       (static_cast<double>(n) * lambda_lambda1);
        acc.add(coeff, term);
        if (n < n_terms) {
            term = convolve(term, mu10);
            if (term.lattice().sup() > cap) term = cap_right(term, cap);
            qn *= q;
        }
    }
    double factor = acc.clamp_and_normalize(tol, "levy_inversion");
    return InversionResult{acc.build(), factor, n_terms};
}

// Strips the atom at zero from a compound construction:
// mu10 = (mu - w0 * delta_0) / (1 - w0).
inline GridDistribution strip_zero_atom(const GridDistribution& mu, double w0) {
    if (!(w0 > 0.0) || !(w0 < 1.0))
        fail(ErrorCode::invalid_argument, "strip_zero_atom: atom weight must be in (0,1)");
    const Lattice& lat = mu.lattice();
    std::ptrdiff_t k0 = lat.boundary_index(0.0) - 1;
    if (k0 < 0 || k0 >= static_cast<std::ptrdiff_t>(lat.len()) ||
        mu.mass()[static_cast<std::size_t>(k0)] < w0 - 1e-9)
        fail(ErrorCode::invalid_argument, "strip_zero_atom: no atom of that weight at zero");
    std::vector<double> mass = mu.mass();
    mass[static_cast<std::size_t>(k0)] -= w0;
    double scale = 1.0 / (1.0 - w0);
    for (double& m : mass) m *= scale;
    return GridDistribution(lat, std::move(mass), mu.left_excess() * scale,
                            mu.right_excess() * scale, mu.cross_excess());
}

}  // namespace tailgrid
