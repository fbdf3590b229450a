#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "tailgrid/levy.hpp"
#include "tailgrid/triplet_io.hpp"
#include "test_util.hpp"

using namespace tailgrid;

namespace {

// Exact cell masses for a measure with primitive P: cell gets P(right)-P(left).
GridMeasure measure_from_primitive(const std::function<double(double)>& primitive,
                                   const Lattice& lat) {
    std::vector<double> mass(lat.len());
    for (std::size_t k = 0; k < lat.len(); ++k)
        mass[k] = primitive(lat.right_edge(static_cast<std::ptrdiff_t>(k))) -
                  primitive(lat.left_edge(static_cast<std::ptrdiff_t>(k)));
    return GridMeasure(lat, std::move(mass));
}

double total_variation(const GridDistribution& a, const GridDistribution& b) {
    double h = a.lattice().span();
    auto shift = static_cast<std::ptrdiff_t>(
        std::llround((a.lattice().origin() - b.lattice().origin()) / h));
    auto lo = std::min<std::ptrdiff_t>(shift, 0);
    auto hi = std::max<std::ptrdiff_t>(shift + static_cast<std::ptrdiff_t>(a.lattice().len()),
                                       static_cast<std::ptrdiff_t>(b.lattice().len()));
    double acc = 0.0;
    for (std::ptrdiff_t j = lo; j < hi; ++j) {
        std::ptrdiff_t ka = j - shift;
        double va = (ka >= 0 && ka < static_cast<std::ptrdiff_t>(a.lattice().len()))
                        ? a.mass()[static_cast<std::size_t>(ka)]
                        : 0.0;
        double vb = (j >= 0 && j < static_cast<std::ptrdiff_t>(b.lattice().len()))
                        ? b.mass()[static_cast<std::size_t>(j)]
                        : 0.0;
        acc += std::abs(va - vb);
    }
    acc += std::abs(a.left_excess() - b.left_excess());
    acc += std::abs(a.right_excess() - b.right_excess());
    return 0.5 * acc;
}

}  // namespace

TEST(NormalizedTailMeasure, inverse_square_density_matches_pareto) {
    // nu(dx) = x^{-2} dx on (0.1, 1000], exact cell masses via the primitive
    Lattice lat(0.1, 0.01, 99990);
    auto nu = measure_from_primitive([](double x) { return -1.0 / x; }, lat);
    auto n1 = normalized_tail_measure(nu);
    double norm = 1.0 - 1.0 / 1000.0;  // on-grid mass above 1
    for (double x : {1.0, 2.0, 10.0, 50.0}) {
        double expect = (1.0 / x - 1.0 / (x + 1.0)) / norm;
        EXPECT_NEAR(interval_prob(n1, x, DeltaWindow(1.0)), expect, 1e-8);
    }
}

TEST(NormalizedTailMeasure, degenerate_and_atom) {
    Lattice lat(0.0, 0.5, 8);  // atoms 0.5 .. 4.0
    std::vector<double> below(8, 0.0);
    below[0] = 0.3;  // atom at 0.5 only
    EXPECT_THROW(normalized_tail_measure(GridMeasure(lat, below)), GridError);

    std::vector<double> at2(8, 0.0);
    at2[3] = 0.25;  // atom at 2.0
    auto n1 = normalized_tail_measure(GridMeasure(lat, at2));
    EXPECT_DOUBLE_EQ(tail_prob(n1, 1.5), 1.0);
    EXPECT_DOUBLE_EQ(tail_prob(n1, 2.0), 0.0);
}

TEST(TruncatedCp, atom_measure) {
    Lattice lat(0.0, 0.5, 8);
    std::vector<double> m(8, 0.0);
    m[3] = 0.7;  // 0.7 * delta_2
    GridMeasure nu(lat, m);
    auto mu = truncated_cp(nu, 1.5, 1e-12);
    std::ptrdiff_t k0 = mu.lattice().boundary_index(0.0) - 1;
    EXPECT_NEAR(mu.mass()[static_cast<std::size_t>(k0)], std::exp(-0.7), 1e-12);

    EXPECT_THROW(truncated_cp(nu, 3.0, 1e-12), GridError);  // above the support
}

TEST(TruncatedCp, inverse_square_density) {
    Lattice lat(0.1, 0.01, 99990);
    auto nu = measure_from_primitive([](double x) { return -1.0 / x; }, lat);
    auto mu = truncated_cp(nu, 2.0, 1e-10, 50.0);
    // lambda = int_2^1000 x^{-2} = 1/2 - 1/1000
    double lambda = 0.5 - 1e-3;
    std::ptrdiff_t k0 = mu.lattice().boundary_index(0.0) - 1;
    EXPECT_NEAR(mu.mass()[static_cast<std::size_t>(k0)], std::exp(-lambda), 1e-10);
    EXPECT_NEAR(mu.mass()[static_cast<std::size_t>(k0)], std::exp(-0.5), 2e-3);
}

TEST(IdDistribution, pure_gaussian) {
    LevyTriplet t;
    t.drift = 0.0;
    t.gauss_var = 1.0;
    Lattice lat(-8.0, 0.01, 1600);
    auto mu = id_distribution(t, lat, 1e-9);
    for (double x : {-1.0, 0.0, 0.5, 2.0}) {
        double expect = oracles::normal_cdf(x + 1.0) - oracles::normal_cdf(x);
        EXPECT_NEAR(interval_prob(mu, x, DeltaWindow(1.0)), expect, 1e-9);
    }
}

TEST(IdDistribution, pure_compound_poisson_with_cancelling_drift) {
    Lattice mlat(-0.5, 0.25, 8);  // atoms -0.25 .. 1.5
    std::vector<double> m(8, 0.0);
    m[5] = 0.5;  // 0.5 * delta_1 (atom position is the cell's right edge)
    LevyTriplet t;
    t.jump_measure = GridMeasure(mlat, m);
    t.drift = 0.5;  // cancels the |y|<=1 compensation
    t.small_jump_cutoff = 0.25;
    Lattice lat(-2.0, 0.25, 48);
    auto mu = id_distribution(t, lat, 1e-12);
    std::ptrdiff_t k0 = mu.lattice().boundary_index(0.0) - 1;
    for (long long k = 0; k <= 5; ++k)
        EXPECT_NEAR(mu.mass()[static_cast<std::size_t>(k0 + 4 * k)],
                    oracles::poisson_pmf(k, 0.5), 1e-10)
            << "atom " << k;
}

TEST(IdDistribution, decomposition_consistency) {
    auto density = [](double x) { return x > 0.5 ? std::pow(x, -3.0) : 0.0; };
    Lattice lat(-4.0, 0.01, 3000);
    LevyTriplet t;
    t.drift = 0.3;
    t.gauss_var = 0.25;
    t.density = LevyDensity{density, 0.5, std::numeric_limits<double>::infinity()};
    t.small_jump_cutoff = 0.2;
    auto whole = id_distribution(t, lat, 1e-10);

    LevyTriplet t_big;  // jumps above c1 = 2 only: plain compound Poisson.
    // The restriction is given right-continuously; the lo bound keeps cells
    // below 2 out of it.
    t_big.density = LevyDensity{[](double x) { return x >= 2.0 ? std::pow(x, -3.0) : 0.0; }, 2.0,
                                std::numeric_limits<double>::infinity()};
    t_big.small_jump_cutoff = 0.2;
    LevyTriplet t_rest;
    t_rest.drift = 0.3;
    t_rest.gauss_var = 0.25;
    t_rest.density = LevyDensity{[&](double x) { return x <= 2.0 ? density(x) : 0.0; }, 0.5, 2.0};
    t_rest.small_jump_cutoff = 0.2;
    auto pieces = convolve(id_distribution(t_big, lat, 1e-10), id_distribution(t_rest, lat, 1e-10));

    double h = lat.span();
    auto shift = static_cast<std::ptrdiff_t>(
        std::llround((pieces.lattice().origin() - whole.lattice().origin()) / h));
    // compare well inside the grid; both constructions cap at the grid edges
    for (std::ptrdiff_t k = whole.lattice().boundary_index(-2.0);
         k < whole.lattice().boundary_index(20.0); ++k) {
        std::ptrdiff_t kp = k - shift;
        ASSERT_GE(kp, 0);
        ASSERT_NEAR(whole.mass()[static_cast<std::size_t>(k)],
                    pieces.mass()[static_cast<std::size_t>(kp)], 1e-8);
    }
}

TEST(IdDistribution, small_jump_refinement_is_monotone) {
    auto density = [](double x) {
        if (x <= 0.0) return 0.0;
        return x <= 1.0 ? std::pow(x, -1.5) : std::pow(x, -3.0);
    };
    // span 0.005 so every cutoff in {0.1, 0.05, 0.025} is cell-aligned
    Lattice lat(-12.0, 0.005, 8800);
    auto build = [&](double eps) {
        LevyTriplet t;
        t.gauss_var = 0.5;
        t.density = LevyDensity{density, 0.0, std::numeric_limits<double>::infinity()};
        t.small_jump_cutoff = eps;
        return id_distribution(t, lat, 1e-9);
    };
    auto mu_a = build(0.1);
    auto mu_b = build(0.05);
    auto mu_c = build(0.025);
    double d1 = total_variation(mu_a, mu_b);
    double d2 = total_variation(mu_b, mu_c);
    EXPECT_GT(d1, d2);
    EXPECT_LT(d2, 0.05);
}

TEST(IdDistribution, gaussian_grid_overflow) {
    LevyTriplet t;
    t.gauss_var = 1.0;
    Lattice narrow(-1.0, 0.01, 200);
    try {
        id_distribution(t, narrow, 1e-9);
        FAIL() << "expected grid_overflow";
    } catch (const GridError& e) {
        EXPECT_EQ(e.code(), ErrorCode::grid_overflow);
    }
}

TEST(SsdLevyMeasure, monotone_certificate) {
    Lattice lat(-5.0, 0.01, 1000);
    auto ok = s_sd_levy_measure([](double x) { return std::pow(std::max(x, 0.1), -2.0); },
                                [](double x) { return std::exp(x); }, lat, 0.1, 0.1);
    EXPECT_TRUE(ok.monotone_certificate);
}

TEST(SsdLevyMeasure, upward_jump_rejected) {
    Lattice lat(0.0, 0.01, 1000);
    auto bump = [](double x) { return std::pow(x, -2.0) + (x > 3.0 ? 1.0 : 0.0); };
    try {
        s_sd_levy_measure(bump, [](double) { return 0.0; }, lat, 0.1, 0.1);
        FAIL() << "expected not_s_self_decomposable";
    } catch (const GridError& e) {
        EXPECT_EQ(e.code(), ErrorCode::not_s_self_decomposable);
    }
}

TEST(SsdLevyMeasure, symmetric_exponential_total_mass) {
    // g(x) = e^{-|x|}/|x| truncated at |x| >= 0.1
    Lattice lat(-40.0, 0.01, 8000);
    auto ssd = s_sd_levy_measure([](double x) { return std::exp(-x) / x; },
                                 [](double x) { return std::exp(x) / (-x); }, lat, 0.1, 0.1);
    double expect = 2.0 * oracles::integrate([](double x) { return std::exp(-x) / x; }, 0.1, 40.0,
                                             1e-12);
    EXPECT_NEAR(expect, 3.6458479168387813, 1e-9);  // 2 * E1(0.1)
    EXPECT_NEAR(ssd.measure.total(), expect, 1e-6);
}

TEST(GridLevyMeasure, window_masses_match_analytic) {
    LevyTriplet t;
    t.density = LevyDensity{[](double x) { return x > 0.5 ? std::pow(x, -3.0) : 0.0; }, 0.5,
                            std::numeric_limits<double>::infinity()};
    t.small_jump_cutoff = 0.2;
    Lattice lat(-1.0, 0.01, 3100);
    auto nu = grid_levy_measure(t, lat);
    for (double x : {1.0, 4.0, 16.0}) {
        double expect = 0.5 * (1.0 / (x * x) - 1.0 / ((x + 1.0) * (x + 1.0)));
        EXPECT_NEAR(interval_prob(nu, x, DeltaWindow(1.0)), expect, 1e-9);
    }
}

TEST(TripletIo, density_round_trip) {
    TripletDoc doc;
    doc.a = 0.25;
    doc.b2 = 0.5;
    doc.cutoff = 0.05;
    doc.family = "powerlaw_split";
    doc.params = {{"small_exponent", 1.5}, {"tail_exponent", 3.0}, {"split", 1.0}};
    std::stringstream ss;
    write_triplet(ss, doc);
    auto parsed = parse_triplet(ss);
    EXPECT_EQ(parsed.a, doc.a);
    EXPECT_EQ(parsed.b2, doc.b2);
    EXPECT_EQ(parsed.cutoff, doc.cutoff);
    EXPECT_EQ(parsed.family, doc.family);
    EXPECT_EQ(parsed.params.at("tail_exponent"), 3.0);

    auto t = to_triplet(parsed);
    ASSERT_TRUE(t.density.has_value());
    EXPECT_DOUBLE_EQ(t.density->g(0.5), std::pow(0.5, -1.5));
    EXPECT_DOUBLE_EQ(t.density->g(2.0), std::pow(2.0, -3.0));
}

TEST(TripletIo, measure_reference_and_errors) {
    Lattice lat(0.0, 0.5, 4);
    GridMeasure nu(lat, {0.0, 0.1, 0.2, 0.3});
    std::string path = ::testing::TempDir() + "nu_ref.csv";
    write_csv_file(path, nu);

    TripletDoc doc;
    doc.a = 0.0;
    doc.b2 = 0.0;
    doc.cutoff = 0.5;
    doc.measure_csv = path;
    std::stringstream ss;
    write_triplet(ss, doc);
    auto parsed = parse_triplet(ss);
    auto t = to_triplet(parsed);
    ASSERT_TRUE(t.jump_measure.has_value());
    EXPECT_NEAR(t.jump_measure->total(), 0.6, 1e-15);

    std::stringstream bad("triplet {\n  bogus = 1\n}\n");
    EXPECT_THROW(parse_triplet(bad), GridError);
}
