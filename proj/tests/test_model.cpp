#include "ebt/model.hpp"
#include "ebt/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace ebt;

namespace {

// Marriage influx of the continuous model with singles obtained by quadrature.
double continuous_influx(const Problem &p, double t, double x, double y) {
    const auto &ex = *p.exact;
    const double top = t + 1.0;
    auto singles_m = [&](double a) {
        return ex.male(t, a) - integrate([&](double b) { return ex.couples(t, a, b); }, 0.0, top);
    };
    auto singles_f = [&](double b) {
        return ex.female(t, b) - integrate([&](double a) { return ex.couples(t, a, b); }, 0.0, top);
    };
    const double hs = integrate([&](double a) { return p.kernel.h(t, a) * singles_m(a); }, 0.0, top);
    const double gs = integrate([&](double b) { return p.kernel.g(t, b) * singles_f(b); }, 0.0, top);
    return p.kernel.theta(t, x, y) * p.kernel.h(t, x) * p.kernel.g(t, y) * singles_m(x) *
           singles_f(y) / (p.kernel.gamma + hs + gs);
}

} // namespace

TEST_CASE("example1 coefficients") {
    const Problem p = example1_problem();
    CHECK(p.rates.male_death(0.3, 0.7, nullptr) == doctest::Approx(0.1));
    CHECK(p.rates.female_death(0.0, 1.7, nullptr) == doctest::Approx(0.1));
    CHECK(p.rates.couple_loss(0.5, 0.2, 0.9, nullptr) == doctest::Approx(0.1));
    CHECK(p.rates.male_birth(0.5, 0.2, 0.9, nullptr) == doctest::Approx(10.0));
    CHECK(p.kernel.h(0.0, 0.05) == 0.0);
    CHECK(p.kernel.g(0.0, 1.5) == 0.0);
    CHECK(p.kernel.h(0.0, 0.5) == doctest::Approx(0.2));
    CHECK(p.kernel.theta(0.0, 0.5, 0.5) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(p.kernel.a0 == 0.1);
    CHECK(p.kernel.gamma == 1.0);
    CHECK(p.initial.male(0.3) == 1.0);
    CHECK(p.initial.couples(0.3, 0.9) == 1.0);
    CHECK_FALSE(p.exact.has_value());
}

TEST_CASE("example2 closed-form values") {
    const Problem p = example2_problem();
    REQUIRE(p.exact.has_value());
    CHECK(p.exact->male(0.0, 0.5) == doctest::Approx(0.75));
    CHECK(p.exact->male(0.5, 1.6) == 0.0);
    CHECK(p.exact->couples(0.5, 0.05, 0.5) == 0.0);
    CHECK(p.rates.couple_loss(0.3, 0.5, 0.5, nullptr) == doctest::Approx(0.1));
    CHECK(p.rates.male_death(0.0, 0.5, nullptr) == doctest::Approx(0.1));
    CHECK(p.horizon == 1.0);
    // b >= 0 up to the horizon.
    for (double t = 0.0; t <= 1.0; t += 0.125) {
        CHECK(p.rates.male_birth(t, 0.5, 0.5, nullptr) >= 0.0);
    }
    const double male0 = integrate([&](double x) { return p.initial.male(x); }, 0.0, 1.0);
    CHECK(male0 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("kernel cutoff below a0 by sampling") {
    for (const Problem &p : {example1_problem(), example2_problem()}) {
        for (double t = 0.0; t <= 1.0; t += 0.25) {
            for (double x = 0.0; x < p.kernel.a0; x += p.kernel.a0 / 97.0) {
                CHECK(p.kernel.h(t, x) == 0.0);
                CHECK(p.kernel.g(t, x) == 0.0);
            }
        }
    }
}

TEST_CASE("a0 override moves the cutoff") {
    const Problem p = make_problem("example1", ProblemOverrides{.a0 = 0.2});
    CHECK(p.kernel.h(0.0, 0.15) == 0.0);
    CHECK(p.kernel.h(0.0, 0.25) > 0.0);
}

TEST_CASE("example2 male density satisfies its transport equation") {
    const Problem p = example2_problem();
    const auto &u = p.exact->male;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ut(0.01, 0.99);
    constexpr double h = 1e-5;
    for (int k = 0; k < 100; ++k) {
        const double t = ut(rng);
        const double x = std::uniform_real_distribution<double>(0.01, t + 0.99)(rng);
        const double dt = (u(t + h, x) - u(t - h, x)) / (2 * h);
        const double dx = (u(t, x + h) - u(t, x - h)) / (2 * h);
        const double residual = dt + dx + p.rates.male_death(t, x, nullptr) * u(t, x);
        CHECK(std::abs(residual) <= 1e-3);
    }
}

TEST_CASE("example2 couples density satisfies its transport equation with the marriage influx") {
    const Problem p = example2_problem();
    const auto &u = p.exact->couples;
    constexpr double h = 1e-5;
    std::mt19937_64 rng(11);
    for (int k = 0; k < 6; ++k) {
        const double t = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
        std::uniform_real_distribution<double> age(0.15, t + 0.95);
        const double x = age(rng);
        const double y = age(rng);
        const double transport = (u(t + h, x + h, y + h) - u(t - h, x - h, y - h)) / (2 * h);
        const double rhs = -p.rates.couple_loss(t, x, y, nullptr) * u(t, x, y) +
                           continuous_influx(p, t, x, y);
        CHECK(transport == doctest::Approx(rhs).epsilon(1e-6).scale(1e-3));
    }
}

TEST_CASE("example2 newborn boundary condition") {
    const Problem p = example2_problem();
    for (double t : {0.0, 0.3, 0.8}) {
        const double births = integrate(
            [&](double x, double y) {
                return p.rates.male_birth(t, x, y, nullptr) * p.exact->couples(t, x, y);
            },
            0.1, t + 1.0, 0.1, t + 1.0);
        CHECK(births == doctest::Approx(p.exact->male(t, 0.0)).epsilon(1e-8));
    }
}

TEST_CASE("death rate derivative falls back to finite differences") {
    const AgeRate rate = [](double, double x, const PopulationMeasures *) { return x * x; };
    CHECK(death_rate_dx(rate, {}, 0.0, 0.5, nullptr) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(death_rate_dx(rate, {}, 0.0, 0.0, nullptr)) < 1e-5);
    const AgeRate exact = [](double, double, const PopulationMeasures *) { return 42.0; };
    CHECK(death_rate_dx(rate, exact, 0.0, 0.5, nullptr) == 42.0);
}

TEST_CASE("problem selection and overrides") {
    std::istringstream in("# knobs\ngamma = 2.5\nT = 0.5\n");
    const ProblemOverrides o = overrides_from(parse_key_values(in));
    const Problem p = make_problem("example1", o);
    CHECK(p.kernel.gamma == 2.5);
    CHECK(p.horizon == 0.5);
    CHECK_THROWS_AS(make_problem("example3"), std::invalid_argument);
    CHECK_THROWS_AS(make_problem("example2", ProblemOverrides{.gamma = 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_problem("example2", ProblemOverrides{.horizon = 12.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_problem("example1", ProblemOverrides{.gamma = -1.0}), std::invalid_argument);
    const Problem wide = make_problem("example1", ProblemOverrides{.domain = 2.0});
    CHECK(wide.initial.support == 2.0);
    CHECK(wide.initial.male(1.5) == 1.0);
    MarriageKernel k;
    CHECK_THROWS_AS(k.validate(), std::invalid_argument);
}
