#pragma once

#include "ebt/measure.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ebt {

struct PlanEntry {
    std::size_t row;
    std::size_t col;
    double mass;
    double cost;
};

/// Sparse coupling between two atomic measures; indices refer to the input atoms.
struct TransportPlan {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<PlanEntry> entries;

    std::vector<double> row_sums() const;
    std::vector<double> col_sums() const;
    double total_cost() const;
};

struct TransportResult {
    double value = 0.0;
    TransportPlan plan;
};

/// Thrown when an exact solver is asked to handle more entries than its cap.
class SizeCapExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Thrown when Sinkhorn misses the marginal tolerance within its iteration budget.
class SinkhornNotConverged : public std::runtime_error {
public:
    SinkhornNotConverged(const std::string &what, double residual, double epsilon)
        : std::runtime_error(what), residual_{residual}, epsilon_{epsilon} {}
    double residual() const noexcept { return residual_; }
    double epsilon() const noexcept { return epsilon_; }

private:
    double residual_;
    double epsilon_;
};

/// Entropic schedule. With `relative_to_max_cost` the epsilons are multiples of max c_ij.
struct SinkhornConfig {
    double epsilon_start = 0.1;
    double epsilon_final = 1e-4;
    double epsilon_decay = 0.5;
    double marginal_tol = 1e-8;
    long max_iters = 10000000; ///< shared by all stages
    bool relative_to_max_cost = true;

    void validate() const;
};

/// Sparse network-simplex W1 on a lattice-neighbourhood graph.
///
/// Arcs join atoms in lattice cells c and c + k d, where d ranges over primitive
/// directions with max(|d_x|, |d_y|) <= radius and k is the first step reaching an
/// occupied cell. Components the stencil leaves apart are joined by their
/// closest atom pair. Path lengths never undercut Euclidean distances and exceed
/// them by about 1 / cos(theta / 2), theta being the widest angular gap between
/// directions, plus an off-lattice correction because atoms sit anywhere inside
/// their cells.
struct GraphW1Config {
    double spacing = 0.0; ///< lattice cell size; 0 picks about two atoms per cell
    int radius = 2;
};

/// Mass tolerance for probability inputs.
inline constexpr double probability_tol = 1e-9;

/// Exact W1 in 1-D from the CDF difference.
double w1_exact_1d(const AtomicMeasure &p, const AtomicMeasure &q);

/// Exact transportation LP with Euclidean costs. `cap` bounds rows * cols.
TransportResult w1_exact_lp(const AtomicMeasure &p, const AtomicMeasure &q,
                            std::size_t cap = 1'000'000);

/// Log-domain entropic transport with epsilon scaling; returns sum c_ij gamma_ij.
double w1_sinkhorn(const AtomicMeasure &p, const AtomicMeasure &q,
                   const SinkhornConfig &cfg = {});

double w1_graph(const AtomicMeasure &p, const AtomicMeasure &q, const GraphW1Config &cfg = {});

/// Amplification bound 1 / cos(theta / 2) of the graph metric for a stencil radius.
double graph_distortion_bound(int radius);

/// Integer masses proportional to `w` summing to exactly `total` (largest remainder).
std::vector<long long> quantize_masses(const std::vector<double> &w, long long total);

} // namespace ebt
