#pragma once

#include "ebt/flat.hpp"
#include "ebt/model.hpp"
#include "ebt/scheme.hpp"
#include "ebt/state.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ebt {

/// Exact solution at time t as cell masses at cell barycenters on the cells
/// [(k-1) dt, k dt), k = 1..cells (the grid of a run's internal cohorts).
StateMeasures atomize_exact(const ExactSolution &exact, double t, double dt, std::size_t cells);

/// Aggregates a run at step dt / factor onto the cells of step dt: masses add
/// up and locations become mass-weighted barycenters. Empty cells are omitted.
StateMeasures pool_state(const CohortState &fine, int factor);

/// How Example-1-style studies without a closed form obtain references.
enum class ReferenceMode {
    fixed,     ///< one run at min(dt) / 2, pooled onto every row's grid
    successive ///< each row against the run at dt / 2, pooled onto its grid
};

ReferenceMode parse_reference_mode(const std::string &name);
std::string to_string(ReferenceMode mode);

struct MetricConfig {
    W1Solver singles = W1Solver::exact_1d;
    W1Solver couples = W1Solver::graph;
    W1Options options{};
};

struct PopulationErrors {
    double male = 0.0;
    double female = 0.0;
    double couples = 0.0;
    double total() const { return male + female + couples; }
};

struct ErrorPair {
    PopulationErrors flat; ///< rho per population
    PopulationErrors tv;
};

/// rho and TV distances per population, zero-mass atoms dropped first.
ErrorPair measure_error(const StateMeasures &numeric, const StateMeasures &reference,
                        const MetricConfig &metric);

/// q_k = log2(err_{k-1} / err_k); empty for the first row and for zero errors.
std::vector<std::optional<double>> order_estimate(const std::vector<double> &dts,
                                                  const std::vector<double> &errors);

struct ConvergenceRow {
    double dt = 0.0;
    double err_flat = 0.0;
    double err_tv = 0.0;
    std::optional<double> q;
    ErrorPair parts;
    double run_seconds = 0.0;
    double metric_seconds = 0.0;
};

struct StudyConfig {
    std::vector<double> dts;
    Variant variant = Variant::simplified;
    StepConfig step{};          ///< dt is overwritten per row
    int reference_substeps = 16;
    ReferenceMode reference = ReferenceMode::successive;
    MetricConfig metric{};
    unsigned jobs = 1;
};

struct StudyResult {
    std::vector<ConvergenceRow> rows;
    std::string reference_kind; ///< "exact" or "self-refined"
    double reference_dt = 0.0;  ///< finest self-refined run, 0 for exact references
    double reference_seconds = 0.0;
};

/// Default halving list 0.1, 0.05, ... with `rows` entries.
std::vector<double> halving_list(double first, int rows);

/// Runs every row (concurrently, at most cfg.jobs at a time) and evaluates the
/// errors at the horizon against the exact solution when the problem has one,
/// else against self-refined runs.
StudyResult convergence_study(const Problem &problem, const StudyConfig &cfg);

/// CSV with columns dt, err_flat, err_tv, q at 10 significant digits.
std::string table_csv(const StudyResult &result);
/// Aligned text rendering of the same table.
std::string table_text(const StudyResult &result);

} // namespace ebt
