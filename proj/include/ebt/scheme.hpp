#pragma once

#include "ebt/model.hpp"
#include "ebt/state.hpp"

#include <functional>
#include <string>
#include <vector>

namespace ebt {

/// How the original variant moves its boundary single cohorts.
enum class BoundaryRule {
    moment,        ///< location Pi / m with the moment ODE (the original scheme)
    characteristic ///< location moves with speed 1 as in the simplified scheme
};

BoundaryRule parse_boundary_rule(const std::string &name);
std::string to_string(BoundaryRule rule);

struct StepConfig {
    double dt = 0.1;  ///< macro step and cohort width
    int substeps = 8; ///< fixed integrator steps per macro step
    int order = 4;    ///< 1 = explicit Euler, 4 = classical Runge-Kutta
    bool clamp = true;
    BoundaryRule boundary_rule = BoundaryRule::moment;

    void validate() const;
};

/// Internal cohorts i = 1..J on cells [(i-1) dt, i dt) covering [0, domain);
/// masses are cell integrals of the initial densities and locations the cell
/// barycenters (0 for empty cells). Couples sit at (x_i, y_j). B = 1, so no
/// boundary cohort exists yet.
CohortState init_internal(const Problem &problem, Variant variant, double dt);

/// Prepends empty boundary cohorts with index B - 1.
CohortState attach_boundary(const CohortState &state);

/// Time derivative of the state vector. Entries without dynamics are 0; in the
/// original variant the boundary location slots are derived and also 0.
std::vector<double> rhs_simplified(const CohortState &state, double t, const Problem &problem);

/// The original scheme evaluates N_ij and Nbar_ij by expanding each row i into
/// atoms {(x_i, m_i)} and {(x_iw, -m_iw)} (columns alike) and summing
/// Theta h g w_a w_b over atom pairs, which is the four-sum regrouped. Atoms
/// closer than `merge_tol` are merged; couple locations x~/m trail the single
/// locations by integrator truncation error, so exact matching would split
/// coinciding atoms into cancelling pairs.
std::vector<double> rhs_original(const CohortState &state, double t, const Problem &problem,
                                 BoundaryRule rule = BoundaryRule::moment,
                                 double merge_tol = 1e-6);

/// Merge tolerance used by macro_step, as a fraction of dt.
inline constexpr double merge_fraction = 1e-3;

/// Integrates over [t_n, t_n + dt] and attaches fresh boundary cohorts.
CohortState macro_step(const CohortState &state, const Problem &problem, const StepConfig &cfg);

using StepObserver = std::function<void(const CohortState &)>;

/// init_internal + attach_boundary followed by T / dt macro steps. The observer,
/// when set, sees the state after every macro step.
CohortState run(const Problem &problem, Variant variant, const StepConfig &cfg,
                const StepObserver &observer = {});

/// Number of macro steps T / dt; throws unless T is a multiple of dt.
long macro_steps(double horizon, double dt);

} // namespace ebt
