#pragma once

#include "ebt/measure.hpp"
#include "ebt/transport.hpp"

#include <string>

namespace ebt {

enum class W1Solver { exact_1d, exact_lp, sinkhorn, graph };

W1Solver parse_w1_solver(const std::string &name);
std::string to_string(W1Solver solver);

struct W1Options {
    W1Solver solver = W1Solver::exact_lp;
    SinkhornConfig sinkhorn{};
    GraphW1Config graph{};
    std::size_t lp_cap = 1'000'000;
};

/// W1 between probability measures with the chosen solver.
double w1_distance(const AtomicMeasure &p, const AtomicMeasure &q, const W1Options &opts);

/// min(M1, M2) W1(mu1 / M1, mu2 / M2) + |M1 - M2|; only the mass gap if either mass is 0.
double rho_distance(const AtomicMeasure &mu1, const AtomicMeasure &mu2, const W1Options &opts);
double rho_distance(const AtomicMeasure &mu1, const AtomicMeasure &mu2, W1Solver solver);

/// C_K = min(1, 2 / K) / 3.
double flat_constant(double diameter);

struct FlatBracket {
    double lower = 0.0;
    double upper = 0.0;
};

/// (C_K rho, rho), which brackets the flat distance for supports of diameter <= K.
FlatBracket flat_sandwich(const AtomicMeasure &mu1, const AtomicMeasure &mu2, double diameter,
                          const W1Options &opts);

/// Exact flat (bounded-Lipschitz) distance via the transshipment dual of the
/// test-function LP. `cap` bounds the number of nonzero atoms in both inputs.
double flat_exact_lp(const AtomicMeasure &mu1, const AtomicMeasure &mu2, std::size_t cap = 200);

} // namespace ebt
