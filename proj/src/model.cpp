#include "ebt/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ebt {

double death_rate_dx(const AgeRate &rate, const AgeRate &derivative, double t, double x,
                     const PopulationMeasures *mu) {
    if (derivative) {
        return derivative(t, x, mu);
    }
    constexpr double h = 1e-6;
    if (x < h) {
        return (rate(t, x + h, mu) - rate(t, x, mu)) / h;
    }
    return (rate(t, x + h, mu) - rate(t, x - h, mu)) / (2.0 * h);
}

void MarriageKernel::validate() const {
    if (!preference || !male_availability || !female_availability) {
        throw std::invalid_argument("marriage kernel: Theta, h and g must all be set");
    }
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("marriage kernel: gamma must be positive");
    }
    if (!(a0 > 0.0)) {
        throw std::invalid_argument("marriage kernel: a0 must be positive");
    }
}

namespace {

double quadratic_availability(double x) { return (0.1 - x) * (x - 1.0); }

bool in_closed(double x, double lo, double hi) { return x >= lo && x <= hi; }

} // namespace

Problem example1_problem(double gamma) {
    Problem p;
    p.name = "example1";
    auto constant = [](double value) { return [value](double, double, const PopulationMeasures *) { return value; }; };
    auto constant_pair = [](double value) {
        return [value](double, double, double, const PopulationMeasures *) { return value; };
    };
    p.rates.male_death = constant(0.1);
    p.rates.female_death = constant(0.1);
    p.rates.male_death_dx = constant(0.0);
    p.rates.female_death_dx = constant(0.0);
    p.rates.couple_loss = constant_pair(0.1);
    p.rates.male_birth = constant_pair(10.0);
    p.rates.female_birth = constant_pair(10.0);

    p.kernel.male_availability = [](double, double x) {
        return in_closed(x, 0.1, 1.0) ? quadratic_availability(x) : 0.0;
    };
    p.kernel.female_availability = p.kernel.male_availability;
    p.kernel.preference = [](double, double x, double y) {
        return in_closed(x, 0.1, 1.0) && in_closed(y, 0.1, 1.0)
                   ? 10.0 * quadratic_availability(x) * quadratic_availability(y)
                   : 0.0;
    };
    p.kernel.gamma = gamma;
    p.kernel.a0 = 0.1;

    p.domain = 1.0;
    p.horizon = 1.0;
    p.initial.support = p.domain;
    p.initial.male = [](double) { return 1.0; };
    p.initial.female = [](double) { return 1.0; };
    p.initial.couples = [](double, double) { return 1.0; };
    return p;
}

namespace {

// Closed-form ingredients of the second example. `single` is the male (or
// female) density profile, `pair_factor` one age factor of the couples density.
double ex2_single(double t, double x) {
    return x >= 0.0 && x <= t + 1.0 ? (1.0 - t / 10.0) * (t - x - 1.0) * (-t + x - 1.0) : 0.0;
}

double ex2_pair_factor(double t, double x) {
    const double a = x - 0.1;
    const double b = -t + x - 1.0;
    return a * a * b * b;
}

double ex2_couples(double t, double x, double y) {
    if (x < 0.1 || y < 0.1 || x > t + 1.0 || y > t + 1.0) {
        return 0.0;
    }
    return (1.0 - t / 10.0) * ex2_pair_factor(t, x) * ex2_pair_factor(t, y);
}

double ex2_singles_factor(double t, double x) {
    const double p = std::pow(10.0 * t + 9.0, 5);
    const double d = 1.0 - 10.0 * x;
    return (t - 10.0) * p * d * d * (-t + x - 1.0) / 3e9 + (1.0 - t / 10.0) * (t - x - 1.0);
}

double ex2_den(double t) {
    const double poly =
        ((((((((1e8 * t + 72e7) * t + 2268e6) * t + 40824e5) * t + 45927e5) * t + 3306744e3) * t +
           1488034800.0) *
              t +
          21382637520.0) *
             t -
         51056953279.0);
    return (t - 10.0) * std::pow(10.0 * t + 9.0, 4) * poly / 21e15 + 1.0;
}

double ex2_num(double t, double x, double y) {
    const double top = -t * (10.0 * x * (10.0 * y + 199.0) + 1990.0 * y - 399.0) / 10000.0 +
                       2.0 * x + 2.0 * y - 0.4;
    return top / (ex2_singles_factor(t, x) * ex2_singles_factor(t, y));
}

} // namespace

Problem example2_problem() {
    Problem p;
    p.name = "example2";
    auto on_support = [](double t, double x) { return x >= 0.0 && x <= t + 1.0; };
    auto pair_support = [](double t, double x, double y) {
        return x >= 0.1 && y >= 0.1 && x <= t + 1.0 && y <= t + 1.0;
    };
    p.rates.male_death = [on_support](double t, double x, const PopulationMeasures *) {
        return on_support(t, x) ? 1.0 / (10.0 - t) : 0.0;
    };
    p.rates.female_death = p.rates.male_death;
    p.rates.male_death_dx = [](double, double, const PopulationMeasures *) { return 0.0; };
    p.rates.female_death_dx = p.rates.male_death_dx;
    p.rates.couple_loss = [](double, double, double, const PopulationMeasures *) { return 0.1; };
    p.rates.male_birth = [pair_support](double t, double x, double y, const PopulationMeasures *) {
        return pair_support(t, x, y) ? -9e12 * (t - 1.0) * (t + 1.0) / std::pow(10.0 * t + 9.0, 10)
                                     : 0.0;
    };
    p.rates.female_birth = p.rates.male_birth;

    p.kernel.male_availability = [](double t, double x) {
        return x >= 0.1 && x <= t + 1.0 ? (0.1 - x) * (-t + x - 1.0) : 0.0;
    };
    p.kernel.female_availability = p.kernel.male_availability;
    // The preference is num * den: den(t) is the marriage denominator at gamma = 1,
    // so the quotient reproduces the couples influx of the closed-form solution.
    p.kernel.preference = [pair_support](double t, double x, double y) {
        return pair_support(t, x, y) ? ex2_num(t, x, y) * ex2_den(t) : 0.0;
    };
    p.kernel.gamma = 1.0;
    p.kernel.a0 = 0.1;

    p.initial.male = [](double x) { return ex2_single(0.0, x); };
    p.initial.female = p.initial.male;
    p.initial.couples = [](double x, double y) { return ex2_couples(0.0, x, y); };
    p.initial.support = 1.0;
    p.domain = 1.0;
    p.horizon = 1.0;

    ExactSolution exact;
    exact.male = ex2_single;
    exact.female = ex2_single;
    exact.couples = ex2_couples;
    exact.t_min = 0.0;
    exact.t_max = 10.0;
    exact.support = [](double t) { return t + 1.0; };
    p.exact = exact;
    return p;
}

ProblemOverrides overrides_from(const KeyValues &kv) {
    ProblemOverrides o;
    o.gamma = find_double(kv, "gamma");
    o.a0 = find_double(kv, "a0");
    o.horizon = find_double(kv, "T");
    o.domain = find_double(kv, "domain");
    return o;
}

Problem make_problem(const std::string &name, const ProblemOverrides &overrides) {
    Problem p;
    if (name == "example1") {
        p = example1_problem(overrides.gamma.value_or(1.0));
        if (overrides.domain) {
            if (!(*overrides.domain > 0.0)) {
                throw std::invalid_argument("domain must be positive");
            }
            p.domain = *overrides.domain;
            p.initial.support = p.domain;
            const double d = p.domain;
            p.initial.male = [d](double x) { return x < d ? 1.0 : 0.0; };
            p.initial.female = p.initial.male;
            p.initial.couples = [d](double x, double y) { return x < d && y < d ? 1.0 : 0.0; };
        }
    } else if (name == "example2") {
        p = example2_problem();
        if (overrides.gamma && *overrides.gamma != 1.0) {
            throw std::invalid_argument(
                "example2: the closed-form solution requires gamma = 1 (got " +
                std::to_string(*overrides.gamma) + ")");
        }
        if (overrides.domain) {
            if (*overrides.domain < p.initial.support) {
                throw std::invalid_argument("example2: domain must cover the initial support [0, 1]");
            }
            p.domain = *overrides.domain;
        }
    } else {
        throw std::invalid_argument("unknown problem '" + name + "' (expected example1 or example2)");
    }
    if (overrides.a0) {
        if (!(*overrides.a0 > 0.0)) {
            throw std::invalid_argument("a0 must be positive");
        }
        p.kernel.a0 = *overrides.a0;
    }
    if (overrides.horizon) {
        if (!(*overrides.horizon > 0.0)) {
            throw std::invalid_argument("T must be positive");
        }
        if (p.exact && *overrides.horizon >= p.exact->t_max) {
            throw std::invalid_argument(name + ": coefficients are valid only for t < " +
                                        std::to_string(p.exact->t_max));
        }
        p.horizon = *overrides.horizon;
    }
    if (overrides.gamma) {
        if (!(*overrides.gamma > 0.0)) {
            throw std::invalid_argument("gamma must be positive");
        }
    }
    return p;
}

} // namespace ebt
