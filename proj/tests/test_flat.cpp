#include "ebt/flat.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace ebt;

TEST_CASE("solver names round trip") {
    for (auto s : {W1Solver::exact_1d, W1Solver::exact_lp, W1Solver::sinkhorn, W1Solver::graph}) {
        CHECK(parse_w1_solver(to_string(s)) == s);
    }
    CHECK_THROWS_AS(parse_w1_solver("simplex"), std::invalid_argument);
}

TEST_CASE("rho distance") {
    CHECK(rho_distance(AtomicMeasure(1, {0.0}, {2.0}), AtomicMeasure(1, {1.0}, {1.0}),
                       W1Solver::exact_1d) == doctest::Approx(2.0));
    const auto mu = AtomicMeasure(2, {0.1, 0.2, 0.7, 0.3}, {0.2, 1.3});
    CHECK(rho_distance(mu, mu, W1Solver::exact_lp) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rho_distance(AtomicMeasure(1), AtomicMeasure(1, {0.0}, {3.0}), W1Solver::exact_1d) == 3.0);
    CHECK(rho_distance(AtomicMeasure(1, {0.4}, {0.0}), AtomicMeasure(1, {0.0}, {3.0}), W1Solver::exact_1d) ==
          3.0);
    CHECK_THROWS_AS(rho_distance(AtomicMeasure(1), AtomicMeasure(2), W1Solver::exact_lp), std::invalid_argument);
}

TEST_CASE("flat constant and sandwich") {
    CHECK(flat_constant(1.0) == doctest::Approx(1.0 / 3.0));
    CHECK(flat_constant(4.0) == doctest::Approx(1.0 / 6.0));
    CHECK(flat_constant(2.0) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(flat_constant(0.0), std::invalid_argument);

    const auto mu = AtomicMeasure(1, {0.1, 0.5}, {1.0, 2.0});
    const auto same = flat_sandwich(mu, mu, 1.0, {});
    CHECK(same.lower == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(same.upper == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("flat distance closed forms") {
    CHECK(flat_exact_lp(AtomicMeasure(1, {0.0}, {2.0}), AtomicMeasure(1, {0.0}, {0.5})) ==
          doctest::Approx(1.5));
    for (double d : {0.0, 0.3, 1.0, 1.9, 2.0, 3.5}) {
        CHECK(flat_exact_lp(AtomicMeasure(1, {0.0}, {1.0}), AtomicMeasure(1, {d}, {1.0})) ==
              doctest::Approx(std::min(d, 2.0)).epsilon(1e-11));
    }
    CHECK(flat_exact_lp(AtomicMeasure(2, {0.0, 0.0}, {1.0}), AtomicMeasure(2, {0.3, 0.4}, {1.0})) ==
          doctest::Approx(0.5));
    CHECK(flat_exact_lp(AtomicMeasure(1), AtomicMeasure(1, {0.7}, {3.0})) == doctest::Approx(3.0));
    CHECK(flat_exact_lp(AtomicMeasure(1), AtomicMeasure(1)) == 0.0);

    AtomicMeasure big(1);
    for (int k = 0; k < 201; ++k) {
        big.add(k * 0.01, 1.0);
    }
    CHECK_THROWS_AS(flat_exact_lp(big, AtomicMeasure(1)), SizeCapExceeded);
}

TEST_CASE("flat distance agrees with a dense simplex on the test-function LP") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 40; ++trial) {
        const int dim = 1 + trial % 2;
        const double extent = trial % 3 == 0 ? 4.0 : 1.0;
        const auto a = oracle::random_measure(rng, dim, 1 + trial % 6, extent, false);
        const auto b = oracle::random_measure(rng, dim, 1 + (trial / 2) % 6, extent, false);
        CHECK(flat_exact_lp(a, b) == doctest::Approx(oracle::flat_dual_simplex(a, b)).epsilon(1e-9));
    }
}

TEST_CASE("flat distance metric axioms") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = 1 + trial % 2;
        const auto a = oracle::random_measure(rng, dim, 1 + trial % 20, 3.0, false);
        const auto b = oracle::random_measure(rng, dim, 1 + (trial * 7) % 20, 3.0, false);
        const auto c = oracle::random_measure(rng, dim, 1 + (trial * 3) % 20, 3.0, false);
        CHECK(flat_exact_lp(a, a) <= 1e-12);
        CHECK(std::abs(flat_exact_lp(a, b) - flat_exact_lp(b, a)) <= 1e-9);
        CHECK(flat_exact_lp(a, c) <= flat_exact_lp(a, b) + flat_exact_lp(b, c) + 1e-9);
    }
}

TEST_CASE("flat distance respects the sandwich and the Dirac bound") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = 1 + trial % 2;
        const double extent = trial % 2 == 0 ? 1.0 : 5.0;
        const auto a = oracle::random_measure(rng, dim, 1 + trial % 20, extent, false);
        const auto b = oracle::random_measure(rng, dim, 1 + (trial * 5) % 20, extent, false);
        const double diameter = extent * (dim == 2 ? std::sqrt(2.0) : 1.0);
        W1Options opts;
        opts.solver = dim == 1 ? W1Solver::exact_1d : W1Solver::exact_lp;
        const auto br = flat_sandwich(a, b, diameter, opts);
        const double flat = flat_exact_lp(a, b);
        CHECK(br.lower <= flat + 1e-7);
        CHECK(flat <= br.upper + 1e-7);

        auto moved = a.coords();
        std::vector<double> w = a.weights();
        std::uniform_real_distribution<double> jitter(0.0, 0.2);
        for (double &x : moved) x += jitter(rng);
        for (double &v : w) v *= 0.5 + jitter(rng) * 5.0;
        const AtomicMeasure paired(dim, moved, w);
        CHECK(flat_exact_lp(a, paired) <= dirac_upper_bound(a, paired) + 1e-9);
    }
}
