#include "ebt/network_simplex.hpp"
#include "ebt/transport.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace ebt;

namespace {

AtomicMeasure dirac1(double x) { return AtomicMeasure(1, {x}, {1.0}); }

void check_marginals(const AtomicMeasure &p, const AtomicMeasure &q, const TransportPlan &plan) {
    const auto r = plan.row_sums();
    const auto c = plan.col_sums();
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(std::abs(r[i] - p.weight(i)) <= 1e-9);
    }
    for (std::size_t j = 0; j < q.size(); ++j) {
        CHECK(std::abs(c[j] - q.weight(j)) <= 1e-9);
    }
    for (const auto &e : plan.entries) {
        CHECK(e.mass >= 0.0);
    }
}

} // namespace

TEST_CASE("network simplex solves a small transshipment problem") {
    // 0 -> 1 -> 2 is cheaper than 0 -> 2.
    NetworkSimplex ns(3);
    const int a01 = ns.add_arc(0, 1, 1);
    const int a12 = ns.add_arc(1, 2, 2);
    const int a02 = ns.add_arc(0, 2, 5);
    ns.set_supply(0, 4);
    ns.set_supply(2, -4);
    REQUIRE(ns.run() == NetworkSimplex::Status::optimal);
    CHECK(ns.flow(a01) == 4);
    CHECK(ns.flow(a12) == 4);
    CHECK(ns.flow(a02) == 0);
    for (int e = 0; e < ns.arc_count(); ++e) {
        CHECK(ns.arc_cost(e) + ns.potential(ns.arc_source(e)) - ns.potential(ns.arc_target(e)) >= 0);
    }
}

TEST_CASE("network simplex reports infeasibility and bad input") {
    NetworkSimplex ns(2);
    ns.add_arc(1, 0, 1);
    ns.set_supply(0, 3);
    ns.set_supply(1, -3);
    CHECK(ns.run() == NetworkSimplex::Status::infeasible);

    NetworkSimplex unbalanced(2);
    unbalanced.set_supply(0, 1);
    CHECK_THROWS_AS(unbalanced.run(), std::invalid_argument);
    CHECK_THROWS_AS(unbalanced.add_arc(0, 5, 1), std::out_of_range);
    CHECK_THROWS_AS(unbalanced.add_arc(0, 1, -1), std::invalid_argument);
}

TEST_CASE("exact 1-D W1") {
    CHECK(w1_exact_1d(dirac1(0.0), dirac1(1.0)) == doctest::Approx(1.0));
    CHECK(w1_exact_1d(AtomicMeasure(1, {0.0, 1.0}, {0.5, 0.5}),
                      AtomicMeasure(1, {0.5, 1.5}, {0.5, 0.5})) == doctest::Approx(0.5));
    CHECK(w1_exact_1d(AtomicMeasure(1, {0.0, 2.0}, {0.5, 0.5}), dirac1(1.0)) ==
          doctest::Approx(1.0));
    CHECK_THROWS_AS(w1_exact_1d(AtomicMeasure(1, {0.0}, {2.0}), dirac1(1.0)), std::invalid_argument);
    CHECK_THROWS_AS(w1_exact_1d(AtomicMeasure(2, {0.0, 0.0}, {1.0}), AtomicMeasure(2, {1.0, 0.0}, {1.0})),
                    std::invalid_argument);
}

TEST_CASE("exact LP W1 basic cases") {
    const auto mu = AtomicMeasure(1, {0.0, 0.4, 1.0}, {0.2, 0.3, 0.5});
    const auto same = w1_exact_lp(mu, mu);
    CHECK(same.value == doctest::Approx(0.0).epsilon(1e-12));
    check_marginals(mu, mu, same.plan);
    for (const auto &e : same.plan.entries) {
        CHECK(e.row == e.col);
    }

    const auto diag = w1_exact_lp(AtomicMeasure(2, {0.0, 0.0}, {1.0}), AtomicMeasure(2, {1.0, 1.0}, {1.0}));
    CHECK(diag.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(w1_exact_lp(mu, mu, 8), SizeCapExceeded);
    CHECK_THROWS_AS(w1_exact_lp(AtomicMeasure(1, {0.0}, {0.5}), mu), std::invalid_argument);
}

TEST_CASE("exact LP agrees with the CDF formula in 1-D") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = oracle::random_measure(rng, 1, 5, 1.0, true);
        const auto q = oracle::random_measure(rng, 1, 1 + trial % 9, 2.0, true);
        const auto lp = w1_exact_lp(p, q);
        CHECK(std::abs(lp.value - w1_exact_1d(p, q)) <= 1e-8);
        check_marginals(p, q, lp.plan);
    }
}

TEST_CASE("exact LP agrees with permutation enumeration in 2-D") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> pos(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + trial % 7;
        AtomicMeasure p(2), q(2);
        for (std::size_t k = 0; k < n; ++k) {
            p.add(pos(rng), pos(rng), 1.0 / n);
            q.add(pos(rng), pos(rng), 1.0 / n);
        }
        CHECK(std::abs(w1_exact_lp(p, q).value - oracle::w1_uniform_permutations(p, q)) <= 1e-9);
    }
}

TEST_CASE("zero-weight atoms do not change W1") {
    auto p = AtomicMeasure(2, {0.0, 0.0, 1.0, 1.0}, {0.5, 0.5});
    auto q = AtomicMeasure(2, {0.5, 0.5}, {1.0});
    const double base = w1_exact_lp(p, q).value;
    p.add(5.0, 5.0, 0.0);
    q.add(9.0, 0.0, 0.0);
    CHECK(w1_exact_lp(p, q).value == doctest::Approx(base).epsilon(1e-12));
    CHECK(w1_sinkhorn(p, q) == doctest::Approx(base).epsilon(1e-6));
    CHECK(w1_graph(p, q) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("sinkhorn config validation") {
    SinkhornConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.epsilon_final = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.epsilon_decay = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.marginal_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("sinkhorn basic cases") {
    const auto mu = AtomicMeasure(2, {0.1, 0.2, 0.7, 0.3, 0.4, 0.9}, {0.2, 0.3, 0.5});
    CHECK(w1_sinkhorn(mu, mu) <= 1e-6);
    CHECK(std::abs(w1_sinkhorn(dirac1(0.0), dirac1(1.0)) - 1.0) <= 1e-4);
}

TEST_CASE("sinkhorn reports non-convergence with its residual") {
    std::mt19937_64 rng(1);
    const auto p = oracle::random_measure(rng, 2, 15, 1.0, true);
    const auto q = oracle::random_measure(rng, 2, 15, 1.0, true);
    SinkhornConfig cfg;
    cfg.max_iters = 3;
    try {
        (void)w1_sinkhorn(p, q, cfg);
        FAIL("expected non-convergence");
    } catch (const SinkhornNotConverged &e) {
        CHECK(e.residual() > cfg.marginal_tol);
    }
}

TEST_CASE("sinkhorn matches the exact LP on random instances") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const int dim = 1 + trial % 2;
        const auto p = oracle::random_measure(rng, dim, 1 + trial % 20, 1.0, true);
        const auto q = oracle::random_measure(rng, dim, 20 - trial % 20, 1.0, true);
        CHECK(std::abs(w1_sinkhorn(p, q) - w1_exact_lp(p, q).value) <= 1e-3);
    }
}

TEST_CASE("W1 of a rigid translation equals the shift") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p1 = oracle::random_measure(rng, 1, 8, 1.0, true);
        auto shifted1 = p1;
        shifted1 = AtomicMeasure(1, [&] {
            auto c = p1.coords();
            for (double &x : c) x += 0.3;
            return c;
        }(), p1.weights());
        CHECK(w1_exact_1d(p1, shifted1) == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(w1_exact_lp(p1, shifted1).value == doctest::Approx(0.3).epsilon(1e-9));

        const auto p2 = oracle::random_measure(rng, 2, 8, 1.0, true);
        auto c2 = p2.coords();
        for (std::size_t k = 0; k < c2.size(); k += 2) {
            c2[k] += 0.3;
            c2[k + 1] += 0.4;
        }
        const AtomicMeasure shifted2(2, c2, p2.weights());
        CHECK(w1_exact_lp(p2, shifted2).value == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(std::abs(w1_sinkhorn(p2, shifted2) - 0.5) <= 1e-3);
    }
}

TEST_CASE("graph W1 brackets the exact value") {
    std::mt19937_64 rng(13);
    for (int radius : {1, 2, 3}) {
        const double bound = graph_distortion_bound(radius);
        for (int trial = 0; trial < 20; ++trial) {
            const auto p = oracle::random_measure(rng, 2, 40, 1.0, true);
            const auto q = oracle::random_measure(rng, 2, 30, 1.0, true);
            const double exact = w1_exact_lp(p, q).value;
            const double approx = w1_graph(p, q, {0.0, radius});
            CHECK(approx >= exact - 1e-9);
            // Atoms sit anywhere inside their cells, so the angular bound holds only up to a
            // small off-lattice correction.
            CHECK(approx <= (bound + 0.02) * exact + 1e-9);
        }
    }
    CHECK(graph_distortion_bound(1) == doctest::Approx(1.0 / std::cos(std::numbers::pi / 8)));
    CHECK(graph_distortion_bound(2) < graph_distortion_bound(1));
}

TEST_CASE("graph W1 is exact in 1-D and bridges separated clusters") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = oracle::random_measure(rng, 1, 30, 1.0, true);
        const auto q = oracle::random_measure(rng, 1, 25, 3.0, true);
        CHECK(std::abs(w1_graph(p, q) - w1_exact_1d(p, q)) <= 1e-9);
    }
    const auto far_a = AtomicMeasure(2, {0.0, 0.0, 0.01, 0.0}, {0.5, 0.5});
    const auto far_b = AtomicMeasure(2, {10.0, 7.0, 10.0, 7.01}, {0.5, 0.5});
    const double bridged = w1_graph(far_a, far_b, {0.005, 1});
    const double exact = w1_exact_lp(far_a, far_b).value;
    CHECK(bridged >= exact - 1e-9);
    CHECK(bridged <= exact * 1.001);
}

TEST_CASE("mass quantization keeps the total") {
    const auto q = quantize_masses({0.1, 0.2, 0.7, 1e-15}, 1000);
    CHECK(q[0] + q[1] + q[2] + q[3] == 1000);
    CHECK(q[0] == 100);
    CHECK(q[2] == 700);
}
