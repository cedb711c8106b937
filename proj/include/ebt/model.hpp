#pragma once

#include "ebt/config.hpp"
#include "ebt/measure.hpp"

#include <functional>
#include <optional>
#include <string>

namespace ebt {

/// Current single-population measures handed to measure-dependent rates.
struct PopulationMeasures {
    AtomicMeasure male{1};
    AtomicMeasure female{1};
};

/// Rate depending on (t, age); the measures pointer is null unless the bundle asks for it.
using AgeRate = std::function<double(double t, double x, const PopulationMeasures *)>;
/// Rate depending on (t, male age, female age).
using PairRate = std::function<double(double t, double x, double y, const PopulationMeasures *)>;

/// Disappearance and birth rates of the two-sex model.
struct CoefficientBundle {
    AgeRate male_death;        ///< c^m
    AgeRate female_death;      ///< c^f
    PairRate couple_loss;      ///< c^c
    PairRate male_birth;       ///< b^m, offspring per couple
    PairRate female_birth;     ///< b^f
    AgeRate male_death_dx;     ///< optional d/dx c^m
    AgeRate female_death_dx;   ///< optional d/dx c^f
    bool uses_measures = false;
};

/// Age derivative of a death rate: the analytic one when present, else a central
/// difference with step 1e-6 (one-sided at age 0).
double death_rate_dx(const AgeRate &rate, const AgeRate &derivative, double t, double x,
                     const PopulationMeasures *mu);

/// Marriage function ingredients: preference Theta, availabilities h and g,
/// saturation gamma and the minimal marriage age a0.
struct MarriageKernel {
    std::function<double(double t, double x, double y)> preference;
    std::function<double(double t, double x)> male_availability;
    std::function<double(double t, double y)> female_availability;
    double gamma = 1.0;
    double a0 = 0.1;

    /// h with the cutoff h = 0 below a0 enforced.
    double h(double t, double x) const { return x < a0 ? 0.0 : male_availability(t, x); }
    double g(double t, double y) const { return y < a0 ? 0.0 : female_availability(t, y); }
    double theta(double t, double x, double y) const { return preference(t, x, y); }

    void validate() const;
};

struct InitialData {
    std::function<double(double x)> male;
    std::function<double(double y)> female;
    std::function<double(double x, double y)> couples;
    double support = 1.0; ///< all densities vanish at ages >= support
};

struct ExactSolution {
    std::function<double(double t, double x)> male;
    std::function<double(double t, double y)> female;
    std::function<double(double t, double x, double y)> couples;
    double t_min = 0.0;
    double t_max = 0.0;
    /// Age support at time t: densities vanish outside [0, support(t)].
    std::function<double(double t)> support;
};

struct Problem {
    std::string name;
    CoefficientBundle rates;
    MarriageKernel kernel;
    InitialData initial;
    std::optional<ExactSolution> exact;
    double horizon = 1.0;
    double domain = 1.0; ///< initial grid covers ages [0, domain)
};

/// Constant rates c = 0.1, b = 10, quadratic availabilities on [0.1, 1] and unit
/// initial densities on [0, domain).
Problem example1_problem(double gamma = 1.0);

/// Time-dependent rates with a closed-form solution; valid for t < 10.
Problem example2_problem();

struct ProblemOverrides {
    std::optional<double> gamma;
    std::optional<double> a0;
    std::optional<double> horizon;
    std::optional<double> domain;
};

/// Reads `gamma`, `a0`, `T` and `domain` keys.
ProblemOverrides overrides_from(const KeyValues &kv);

/// `example1` or `example2` with overrides applied.
Problem make_problem(const std::string &name, const ProblemOverrides &overrides = {});

} // namespace ebt
