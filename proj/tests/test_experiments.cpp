#include "ebt/experiments.hpp"

#include <doctest.h>

#include <cmath>

using namespace ebt;

namespace {

ExactSolution unit_densities() {
    ExactSolution e;
    e.male = [](double, double x) { return x < 1.0 ? 1.0 : 0.0; };
    e.female = e.male;
    e.couples = [](double, double x, double y) { return x < 1.0 && y < 1.0 ? 1.0 : 0.0; };
    e.t_min = 0.0;
    e.t_max = 1.0;
    e.support = [](double) { return 1.0; };
    return e;
}

AtomicMeasure shifted(const AtomicMeasure &mu, double s) {
    AtomicMeasure out(mu.dim());
    for (std::size_t k = 0; k < mu.size(); ++k) {
        if (mu.dim() == 1) {
            out.add(mu.coord(k, 0) + s, mu.weight(k));
        } else {
            out.add(mu.coord(k, 0) + s, mu.coord(k, 1) + s, mu.weight(k));
        }
    }
    return out;
}

} // namespace

TEST_CASE("atomize_exact integrates cells") {
    const StateMeasures a = atomize_exact(unit_densities(), 0.5, 0.1, 10);
    REQUIRE(a.male.size() == 10);
    REQUIRE(a.couples.size() == 100);
    for (std::size_t k = 0; k < 10; ++k) {
        CHECK(a.male.weight(k) == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(a.male.coord(k, 0) == doctest::Approx(0.1 * static_cast<double>(k) + 0.05));
    }
    CHECK(total_mass(a.couples) == doctest::Approx(1.0).epsilon(1e-12));

    const StateMeasures wide = atomize_exact(unit_densities(), 0.5, 0.1, 15);
    CHECK(wide.male.size() == 10);

    const Problem p = example2_problem();
    const StateMeasures e2 = atomize_exact(*p.exact, 0.0, 0.1, 10);
    CHECK(total_mass(e2.male) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));

    CHECK_THROWS_AS(atomize_exact(unit_densities(), 1.5, 0.1, 10), std::invalid_argument);
    CHECK_THROWS_AS(atomize_exact(unit_densities(), 0.5, 0.1, 9), std::invalid_argument);
}

TEST_CASE("pool_state aggregates pairs of cells") {
    const Problem p = example1_problem();
    const CohortState fine = attach_boundary(init_internal(p, Variant::simplified, 0.05));
    const StateMeasures coarse = pool_state(fine, 2);
    REQUIRE(coarse.male.size() == 10);
    REQUIRE(coarse.couples.size() == 100);
    for (std::size_t k = 0; k < 10; ++k) {
        CHECK(coarse.female.weight(k) == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(coarse.female.coord(k, 0) == doctest::Approx(0.1 * static_cast<double>(k) + 0.05));
    }
    CHECK(coarse.couples.weight(23) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(coarse.couples.coord(23, 0) == doctest::Approx(0.25));
    CHECK(coarse.couples.coord(23, 1) == doctest::Approx(0.35));

    const StateMeasures same = pool_state(fine, 1);
    CHECK(same.male.size() == 20);
    CHECK_THROWS_AS(pool_state(fine, 0), std::invalid_argument);
}

TEST_CASE("order estimates") {
    auto q = order_estimate({0.1, 0.05}, {2e-2, 1e-2});
    CHECK_FALSE(q[0].has_value());
    CHECK(*q[1] == doctest::Approx(1.0));
    q = order_estimate({0.1, 0.05}, {5.89e-2, 2.57e-2});
    CHECK(*q[1] == doctest::Approx(1.1965).epsilon(1e-4));
    q = order_estimate({0.1, 0.05}, {3e-2, 3e-2});
    CHECK(*q[1] == 0.0);
    q = order_estimate({0.1, 0.05}, {3e-2, 0.0});
    CHECK_FALSE(q[1].has_value());
    CHECK_THROWS_AS(order_estimate({0.1, 0.04}, {1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(order_estimate({0.1}, {1.0, 1.0}), std::invalid_argument);
    const auto dts = halving_list(0.1, 4);
    REQUIRE(dts.size() == 4);
    CHECK(dts[3] == doctest::Approx(0.0125));
    CHECK_THROWS_AS(halving_list(0.1, 0), std::invalid_argument);
}

TEST_CASE("measure_error vanishes on identical states and tracks rigid shifts") {
    const Problem p = example1_problem();
    StepConfig cfg;
    cfg.dt = 0.1;
    const StateMeasures m = to_measures(run(p, Variant::simplified, cfg));
    const MetricConfig metric;
    const ErrorPair self = measure_error(m, m, metric);
    CHECK(self.flat.total() <= 1e-12);
    CHECK(self.tv.total() == 0.0);

    const double s = 0.01;
    const StateMeasures moved{shifted(m.male, s), shifted(m.female, s), shifted(m.couples, s)};
    const ErrorPair e = measure_error(m, moved, metric);
    CHECK(e.flat.male <= dirac_upper_bound(m.male, moved.male) + 1e-12);
    CHECK(e.flat.male == doctest::Approx(s * total_mass(m.male)).epsilon(1e-9));
    CHECK(e.flat.couples > 0.0);
    CHECK(e.tv.male == doctest::Approx(2.0 * total_mass(m.male)));
}

TEST_CASE("convergence studies") {
    SUBCASE("exact reference") {
        StudyConfig cfg;
        cfg.dts = {0.1, 0.05};
        const StudyResult r = convergence_study(example2_problem(), cfg);
        CHECK(r.reference_kind == "exact");
        CHECK(r.reference_dt == 0.0);
        REQUIRE(r.rows.size() == 2);
        CHECK(r.rows[1].err_flat < r.rows[0].err_flat);
        CHECK(*r.rows[1].q > 0.8);
        CHECK(r.rows[0].err_flat == doctest::Approx(r.rows[0].parts.flat.total()));
    }
    SUBCASE("self-refined references") {
        StudyConfig cfg;
        cfg.dts = {0.1, 0.05};
        const StudyResult successive = convergence_study(example1_problem(), cfg);
        CHECK(successive.reference_kind == "self-refined");
        CHECK(successive.reference_dt == doctest::Approx(0.025));
        cfg.reference = ReferenceMode::fixed;
        const StudyResult fixed = convergence_study(example1_problem(), cfg);
        // The finest row compares against the same pooled run in both modes.
        CHECK(fixed.rows[1].err_flat == doctest::Approx(successive.rows[1].err_flat));
        CHECK(fixed.rows[0].err_flat > successive.rows[0].err_flat);
    }
    SUBCASE("concurrency does not change results") {
        StudyConfig cfg;
        cfg.dts = {0.1, 0.05};
        const StudyResult serial = convergence_study(example2_problem(), cfg);
        cfg.jobs = 3;
        const StudyResult parallel = convergence_study(example2_problem(), cfg);
        CHECK(table_csv(serial) == table_csv(parallel));
    }
    StudyConfig bad;
    bad.dts = {0.1, 0.04};
    CHECK_THROWS_AS(convergence_study(example2_problem(), bad), std::invalid_argument);
    bad.dts = {};
    CHECK_THROWS_AS(convergence_study(example2_problem(), bad), std::invalid_argument);
}

TEST_CASE("table formats") {
    StudyResult r;
    ConvergenceRow a;
    a.dt = 0.1;
    a.err_flat = 0.0589;
    a.err_tv = 3.5;
    ConvergenceRow b = a;
    b.dt = 0.05;
    b.err_flat = 0.0257;
    b.q = std::log2(0.0589 / 0.0257);
    r.rows = {a, b};
    CHECK(table_csv(r) == "dt,err_flat,err_tv,q\n0.1,0.0589,3.5,\n0.05,0.0257,3.5,1.196499275\n");
    const std::string text = table_text(r);
    CHECK(text.find("err_flat") != std::string::npos);
    CHECK(text.find("1.196499275") != std::string::npos);
    CHECK(text.find('-') != std::string::npos);
}
