#pragma once

#include "ebt/measure.hpp"
#include "ebt/model.hpp"
#include "ebt/state.hpp"

#include <array>
#include <vector>

namespace ebt {

struct SinglesMasses {
    std::vector<double> male;   ///< m_i - sum_w m_iw, by storage index
    std::vector<double> female; ///< m_j - sum_v m_vj
};

/// Unclamped singles per cohort; entries may be slightly negative.
SinglesMasses singles_masses(const CohortState &state);

/// Simplified-scheme influx N_ij / D_ij for cohort indices i, j, with singles
/// clamped at zero. Couple locations are read from the state.
double marriage_quotient(const CohortState &state, const MarriageKernel &kernel, double t, int i,
                         int j);

/// Original-scheme marriage terms for one couple cohort.
struct OriginalMarriageTerms {
    double numerator = 0.0;                  ///< N_ij
    std::array<double, 2> moment{0.0, 0.0};  ///< Nbar_ij
    double denominator = 0.0;                ///< D_ij
};

/// Literal four-sum evaluation of N_ij, Nbar_ij and D_ij (O(n^2) per cohort).
OriginalMarriageTerms marriage_terms_original(const CohortState &state,
                                              const MarriageKernel &kernel, double t, int i,
                                              int j);

/// Product-measure marriage influx on atomic singles: atoms at every pair with
/// weight Theta h g s_i s_j / (gamma + sum h s^m + sum g s^f).
AtomicMeasure continuous_marriage_density(double t, const AtomicMeasure &singles_m,
                                          const AtomicMeasure &singles_f,
                                          const MarriageKernel &kernel);

} // namespace ebt
