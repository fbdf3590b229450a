#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "tailgrid/compound.hpp"
#include "tailgrid/diagnostics.hpp"
#include "tailgrid/report_io.hpp"
#include "test_util.hpp"

using namespace tailgrid;
using test_util::exp_grid;
using test_util::grid_from_cdf;
using test_util::pareto_grid;

namespace {

ProbeSchedule doubling(double start, std::size_t count, double c = 1.0,
                       std::vector<double> shifts = {1.0, 2.0, 4.0}) {
    return ProbeSchedule::geometric(start, 2.0, count, std::move(shifts), c);
}

GridDistribution two_sided_mixture(double span = 0.02) {
    // 0.5 * Pareto(2,1) up + 0.5 * reflected Exp(1): heavy right, light left
    auto len_r = static_cast<std::size_t>(std::llround(1040.0 / span));
    auto len_l = static_cast<std::size_t>(std::llround(40.0 / span));
    Lattice lat(-40.0, span, len_l + len_r);
    auto cdf = [](double x) {
        double pos = x >= 1.0 ? 1.0 - std::pow(x, -2.0) : 0.0;
        double neg = x < 0.0 ? std::exp(x) : 1.0;
        return 0.5 * neg + 0.5 * pos;
    };
    return grid_from_cdf(cdf, lat);
}

}  // namespace

TEST(LongTailedDelta, pareto_passes) {
    auto f = pareto_grid(2.0, 1.0, 0.02, 51600);  // support to 1033
    auto rep = check_long_tailed_delta(f, doubling(8.0, 8), 0.05);
    EXPECT_EQ(rep.verdict, Verdict::pass);
    EXPECT_EQ(rep.trend, Trend::converging);
    EXPECT_NEAR(rep.limit_estimate, 1.0, 0.02);
    EXPECT_EQ(rep.dropped_probes, 0u);
    EXPECT_LT(rep.excess_contamination, 1e-12);
}

TEST(LongTailedDelta, exponential_fails_toward_exp_minus_y) {
    auto f = exp_grid(1.0, 0.01, 27000);  // support to 270
    auto rep = check_long_tailed_delta(f, doubling(2.0, 8), 0.05);
    EXPECT_EQ(rep.verdict, Verdict::fail);
    // the shift-1 column converges to e^{-1}
    EXPECT_NEAR(rep.ratios.back()[0], std::exp(-1.0), 1e-6);
}

TEST(LongTailedDelta, point_mass_is_degenerate) {
    auto d5 = delta_at(5.0, 1.0);
    auto rep = check_long_tailed_delta(d5, doubling(8.0, 8), 0.05);
    EXPECT_EQ(rep.verdict, Verdict::inconclusive);
    EXPECT_EQ(rep.probes.size(), 0u);
    EXPECT_EQ(rep.dropped_probes, 8u);
}

TEST(SubexpDelta, pareto_passes_toward_two) {
    auto f = pareto_grid(2.0, 1.0, 0.02, 51600);
    auto res = check_subexp_delta(f, doubling(8.0, 8), 0.05);
    EXPECT_EQ(res.verdict, Verdict::pass);
    EXPECT_NEAR(res.doubling.limit_estimate, 2.0, 0.1);
}

TEST(SubexpDelta, fft_ratio_matches_direct_oracle) {
    auto f = pareto_grid(2.0, 1.0, 0.25, 2100);  // coarse grid, direct is feasible
    auto f2_fft = convolve(f, f);
    auto f2_dir = convolve_direct(f, f);
    DeltaWindow c(1.0);
    for (double x : {64.0, 256.0, 512.0}) {
        double rf = interval_prob(f2_fft, x, c) / interval_prob(f, x, c);
        double rd = interval_prob(f2_dir, x, c) / interval_prob(f, x, c);
        EXPECT_NEAR(rf, rd, 1e-9);
    }
}

TEST(SubexpDelta, exponential_fails_divergent) {
    auto f = exp_grid(1.0, 0.01, 27000);
    auto res = check_subexp_delta(f, doubling(2.0, 8), 0.05);
    EXPECT_EQ(res.verdict, Verdict::fail);
    EXPECT_GT(res.doubling.ratios.back()[0], 10.0);
}

TEST(SubexpDelta, lattice_poisson_fails) {
    auto mu = compound_poisson(1.0, delta_at(1.0, 1.0), 1e-14);
    auto sched = doubling(1.0, 8, 1.0, {1.0, 2.0});
    auto res = check_subexp_delta(mu, sched, 0.05);
    EXPECT_EQ(res.verdict, Verdict::fail);
}

TEST(LocallySubexp, pareto_all_windows_pass) {
    auto f = pareto_grid(2.0, 1.0, 0.25, 4200);
    ProbeSchedule sched = doubling(8.0, 8, 1.0, {1.0, 2.0});
    auto res = check_locally_subexp(f, {0.5, 1.0, 2.0}, sched, 0.05);
    EXPECT_EQ(res.verdict, Verdict::pass);
    ASSERT_EQ(res.per_window.size(), 3u);
    for (const auto& r : res.per_window) EXPECT_EQ(r.verdict, Verdict::pass);
}

TEST(LocallySubexp, aggregate_fail_and_errors) {
    auto f = exp_grid(1.0, 0.01, 27000);
    ProbeSchedule sched = doubling(2.0, 8, 1.0, {1.0, 2.0});
    auto res = check_locally_subexp(f, {0.5, 1.0}, sched, 0.05);
    EXPECT_EQ(res.verdict, Verdict::fail);

    EXPECT_THROW(check_locally_subexp(f, {}, sched, 0.05), GridError);
}

TEST(LocallySubexp, misaligned_window_is_an_error) {
    // c = 0.5 is not a multiple of an integer lattice's span: the alignment
    // contract rejects it rather than silently interpolating.
    auto mu = compound_poisson(2.0, delta_at(1.0, 1.0), 1e-14);
    ProbeSchedule sched = doubling(1.0, 8, 1.0, {1.0});
    try {
        check_locally_subexp(mu, {0.5, 1.0}, sched, 0.05);
        FAIL() << "expected misaligned_window";
    } catch (const GridError& e) {
        EXPECT_EQ(e.code(), ErrorCode::misaligned_window);
    }
}

namespace {

FunctionSamples sample_function(const std::function<double(double)>& a, double from, double step,
                                std::size_t n) {
    FunctionSamples out;
    for (std::size_t i = 0; i < n; ++i) {
        double x = from + step * static_cast<double>(i);
        out.emplace_back(x, a(x));
    }
    return out;
}

}  // namespace

TEST(CheckAni, monotone_passes_exactly) {
    auto s = sample_function([](double x) { return std::pow(x, -2.0); }, 4.0, 0.5, 64);
    auto rep = check_ani(s, 4.0, 0.05);
    EXPECT_EQ(rep.verdict, Verdict::pass);
    for (const auto& row : rep.ratios) {
        EXPECT_DOUBLE_EQ(row[0], 1.0);
        EXPECT_DOUBLE_EQ(row[1], 1.0);
    }
}

TEST(CheckAni, bounded_oscillation_fails) {
    auto s = sample_function([](double x) { return std::pow(x, -2.0) * (2.0 + std::sin(x)); },
                             4.0, 0.5, 96);
    auto rep = check_ani(s, 4.0, 0.05);
    EXPECT_EQ(rep.verdict, Verdict::fail);
}

TEST(CheckAni, asymptotically_monotone_passes) {
    auto s = sample_function([](double x) { return std::pow(x, -2.0) * (1.0 + 1.0 / x); }, 4.0,
                             0.5, 96);
    auto rep = check_ani(s, 4.0, 0.05);
    EXPECT_EQ(rep.verdict, Verdict::pass);
}

TEST(CheckAni, input_validation) {
    auto s = sample_function([](double) { return 1.0; }, 4.0, 0.5, 16);
    EXPECT_THROW(check_ani(s, 4.0, 0.05), GridError);  // fewer than 32 samples

    auto bad = sample_function([](double x) { return x < 10 ? 1.0 : 0.0; }, 4.0, 0.5, 64);
    EXPECT_THROW(check_ani(bad, 4.0, 0.05), GridError);  // nonpositive above x0
}

TEST(CheckAld, monotone_certificate_is_one) {
    auto s = sample_function([](double x) { return std::pow(x, -2.0); }, 4.0, 0.5, 64);
    auto rep = check_ald(s, 4.0);
    EXPECT_EQ(rep.verdict, Verdict::pass);
    EXPECT_DOUBLE_EQ(*rep.certificate, 1.0);
}

TEST(CheckAld, bounded_oscillation_passes_with_certificate_near_three) {
    auto s = sample_function([](double x) { return std::pow(x, -2.0) * (2.0 + std::sin(x)); },
                             4.0, 0.25, 256);
    auto rep = check_ald(s, 4.0);
    EXPECT_EQ(rep.verdict, Verdict::pass);
    EXPECT_GT(*rep.certificate, 1.5);
    EXPECT_LT(*rep.certificate, 3.5);
}

TEST(CheckAld, unbounded_spikes_fail) {
    // alpha(2k) = 2^{-k}, alpha(2k+1) = k 2^{-k}: the pair ratio grows like k
    FunctionSamples s;
    for (int k = 1; k <= 40; ++k) {
        s.emplace_back(2.0 * k, std::pow(2.0, -k));
        s.emplace_back(2.0 * k + 1.0, k * std::pow(2.0, -k));
    }
    auto rep = check_ald(s, 1.0);
    EXPECT_EQ(rep.verdict, Verdict::fail);
}

TEST(AniImpliesAld, property) {
    // any sample set that passes the a.n.i. check passes the al.d. check with
    // a certificate close to 1
    std::vector<std::function<double(double)>> funcs = {
        [](double x) { return std::pow(x, -1.5); },
        [](double x) { return std::pow(x, -2.0) * (1.0 + 2.0 / x); },
        [](double x) { return std::exp(-0.3 * x) * (1.0 + 1.0 / (x * x)); },
    };
    for (const auto& f : funcs) {
        auto s = sample_function(f, 4.0, 0.5, 96);
        auto ani = check_ani(s, 4.0, 0.05);
        ASSERT_EQ(ani.verdict, Verdict::pass);
        auto ald = check_ald(s, 4.0);
        EXPECT_EQ(ald.verdict, Verdict::pass);
        EXPECT_LT(*ald.certificate, 1.1);
    }
}

TEST(AsymptoticRatio, equal_inputs_give_exact_one) {
    auto f = pareto_grid(2.0, 1.0, 0.25, 4200);
    auto rep = check_asymptotic_ratio(IntervalSource(f), IntervalSource(f), 1.0,
                                      doubling(8.0, 8), 0.05);
    EXPECT_EQ(rep.verdict, Verdict::pass);
    EXPECT_EQ(rep.limit_estimate, 1.0);
}

TEST(AsymptoticRatio, compound_poisson_ratio_hits_lambda) {
    auto g = pareto_grid(2.0, 1.0, 0.1, 20600);  // support to 2061
    auto mu = compound_poisson(2.0, g, 1e-10, g.lattice().sup());
    auto rep = check_asymptotic_ratio(IntervalSource(mu), IntervalSource(g), 2.0,
                                      doubling(16.0, 8, 1.0, {1.0, 2.0}), 0.05);
    EXPECT_EQ(rep.verdict, Verdict::pass);
    EXPECT_NEAR(rep.limit_estimate, 2.0, 0.1);
}

TEST(AsymptoticRatio, light_over_heavy_fails) {
    auto e = exp_grid(1.0, 0.02, 13000);
    auto p = pareto_grid(2.0, 1.0, 0.02, 13000);
    auto rep = check_asymptotic_ratio(IntervalSource(e), IntervalSource(p), 1.0,
                                      doubling(2.0, 8), 0.05);
    EXPECT_EQ(rep.verdict, Verdict::fail);
}

TEST(AsymptoticRatio, scale_free_in_power_of_two) {
    // scaling both sides by a power of two leaves every ratio bit-identical
    auto p = pareto_grid(2.0, 1.0, 0.02, 13000);
    std::vector<double> scaled = p.mass();
    for (double& v : scaled) v *= 4.0;
    GridMeasure num(p.lattice(), scaled);
    GridMeasure num1(p.lattice(), p.mass());
    std::vector<double> den_scaled = p.mass();
    for (double& v : den_scaled) v *= 4.0;
    GridMeasure den(p.lattice(), den_scaled);
    auto a = check_asymptotic_ratio(IntervalSource(num1), IntervalSource(num1), 1.0,
                                    doubling(2.0, 8), 0.05);
    auto b = check_asymptotic_ratio(IntervalSource(num), IntervalSource(den), 1.0,
                                    doubling(2.0, 8), 0.05);
    ASSERT_EQ(a.ratios.size(), b.ratios.size());
    for (std::size_t i = 0; i < a.ratios.size(); ++i) EXPECT_EQ(a.ratios[i][0], b.ratios[i][0]);
    EXPECT_EQ(a.verdict, b.verdict);
}

TEST(BoundedRatio, pareto_pair_is_comparable) {
    auto p = pareto_grid(2.0, 1.0, 0.02, 26000);
    auto q = pareto_grid(2.0, 2.0, 0.02, 26000);  // same exponent, shifted scale
    auto rep = check_bounded_ratio(IntervalSource(q), IntervalSource(p), doubling(8.0, 8), 100.0);
    EXPECT_EQ(rep.verdict, Verdict::pass);
}

TEST(Kesten, pareto_certificate_attained_early) {
    auto f = pareto_grid(2.0, 1.0, 0.05, 41100);  // support to 2056
    auto sched = doubling(16.0, 8, 1.0, {1.0});
    auto rep = kesten_certificate(f, sched, 0.5, 20);
    EXPECT_EQ(rep.verdict, Verdict::pass);
    EXPECT_FALSE(rep.hypothesis_unverified);
    ASSERT_TRUE(rep.certificate.has_value());
    EXPECT_GT(*rep.certificate, 0.0);
    EXPECT_LT(*rep.certificate, 50.0);
}

TEST(Kesten, light_tail_flagged_and_fails) {
    // probes stay below ~32 so the n-fold tails sit well above FFT noise
    auto f = exp_grid(1.0, 0.05, 800);
    auto sched = doubling(0.25, 8, 1.0, {1.0});
    auto rep = kesten_certificate(f, sched, 0.5, 12);
    EXPECT_TRUE(rep.hypothesis_unverified);
    EXPECT_EQ(rep.verdict, Verdict::fail);
}

TEST(Kesten, invalid_n_max) {
    auto f = pareto_grid(2.0, 1.0, 0.05, 2000);
    EXPECT_THROW(kesten_certificate(f, doubling(4.0, 8, 1.0, {1.0}), 0.5, 1), GridError);
}

TEST(Determinism, identical_inputs_identical_reports) {
    auto f = pareto_grid(2.0, 1.0, 0.05, 10800);
    auto sched = doubling(4.0, 8);
    auto a = check_long_tailed_delta(f, sched, 0.05);
    auto b = check_long_tailed_delta(f, sched, 0.05);
    ASSERT_EQ(a.ratios.size(), b.ratios.size());
    for (std::size_t i = 0; i < a.ratios.size(); ++i)
        for (std::size_t j = 0; j < a.ratios[i].size(); ++j)
            EXPECT_EQ(a.ratios[i][j], b.ratios[i][j]);
    EXPECT_EQ(a.limit_estimate, b.limit_estimate);
    EXPECT_EQ(a.verdict, b.verdict);
}

TEST(PositivePartAgreement, s_delta_verdicts_match) {
    // Prop-2.3-style battery at unit-test scale: a two-sided mixture passing
    // the al.d. gate has matching S_Delta verdicts for F, F_+ and F^+
    auto f = two_sided_mixture();
    auto samples = interval_samples(f, 4.0, 0.5, 128, DeltaWindow(1.0));
    auto ald = check_ald(samples, 4.0);
    ASSERT_EQ(ald.verdict, Verdict::pass);

    auto sched = doubling(8.0, 8);
    auto vf = check_subexp_delta(f, sched, 0.05).verdict;
    auto vc = check_subexp_delta(positive_conditional(f), sched, 0.05).verdict;
    auto vt = check_subexp_delta(positive_truncated(f), sched, 0.05).verdict;
    EXPECT_EQ(vf, vc);
    EXPECT_EQ(vf, vt);
    EXPECT_EQ(vf, Verdict::pass);
}

TEST(ReportIo, csv_shape) {
    auto f = pareto_grid(2.0, 1.0, 0.25, 4200);
    auto rep = check_long_tailed_delta(f, doubling(8.0, 8, 1.0, {1.0, 2.0}), 0.05);
    std::stringstream ss;
    write_report_csv(ss, rep);
    std::string text = ss.str();
    EXPECT_NE(text.find("probe,shift,ratio"), std::string::npos);
    EXPECT_NE(text.find("check,target,limit_estimate,trend,verdict,certificate,"
                        "excess_contamination"),
              std::string::npos);
    EXPECT_NE(text.find("l_delta,1,"), std::string::npos);
    // one trace row per probe/shift pair
    std::size_t rows = 0;
    for (char ch : text)
        if (ch == '\n') ++rows;
    EXPECT_EQ(rows, 8 * 2 + 3);
}
