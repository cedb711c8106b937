#pragma once

#include "ebt/measure.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ebt {

enum class Variant { simplified, original };

Variant parse_variant(const std::string &name);
std::string to_string(Variant variant);

/// Counters for mass excursions below zero observed at substep ends.
struct MassDiagnostics {
    double max_negative = 0.0;     ///< largest |m| over masses found < 0
    long long excursions = 0;      ///< excursions with |m| > negative_mass_tol
    long long substeps = 0;
};

inline constexpr double negative_mass_tol = 1e-10;

/// EBT state at one time instant.
///
/// Cohorts carry indices B..J; storage index k = i - B, so k = 0 is the
/// boundary cohort. All dynamic quantities live in one flat vector so that the
/// integrator can treat the state as a point of R^d. Layout, with n = J - B + 1:
///   male mass [n], male location [n], female mass [n], female location [n],
///   couple mass [n*n] (row = male index), then for the original variant
///   couple first moments x~ [n*n], y~ [n*n] and the boundary moments Pi^m, Pi^f.
/// In the simplified variant couple locations are not stored: cohort (i, j)
/// sits at (x_i, y_j) by construction.
/// In the original variant the boundary location slot holds Pi / m (0 if m = 0)
/// and is refreshed after every substep.
class CohortState {
public:
    CohortState() = default;
    CohortState(Variant variant, int boundary, int last, double t);

    Variant variant() const { return variant_; }
    double t = 0.0;
    int boundary() const { return boundary_; } ///< B
    int last() const { return last_; }         ///< J
    std::size_t size() const { return n_; }    ///< J - B + 1

    std::span<double> male_mass() { return slice(0, n_); }
    std::span<double> male_location() { return slice(n_, n_); }
    std::span<double> female_mass() { return slice(2 * n_, n_); }
    std::span<double> female_location() { return slice(3 * n_, n_); }
    std::span<double> couple_mass() { return slice(4 * n_, n_ * n_); }
    std::span<double> couple_moment_x();
    std::span<double> couple_moment_y();
    double &male_moment();
    double &female_moment();

    std::span<const double> male_mass() const { return slice(0, n_); }
    std::span<const double> male_location() const { return slice(n_, n_); }
    std::span<const double> female_mass() const { return slice(2 * n_, n_); }
    std::span<const double> female_location() const { return slice(3 * n_, n_); }
    std::span<const double> couple_mass() const { return slice(4 * n_, n_ * n_); }
    std::span<const double> couple_moment_x() const;
    std::span<const double> couple_moment_y() const;
    double male_moment() const;
    double female_moment() const;

    /// Couple cohort (k, l) in storage indices.
    double couple(std::size_t k, std::size_t l) const { return couple_mass()[k * n_ + l]; }
    double couple_x(std::size_t k, std::size_t l) const;
    double couple_y(std::size_t k, std::size_t l) const;

    /// Storage index of cohort index i; throws when i is outside [B, J].
    std::size_t index(int i) const;

    std::vector<double> &data() { return data_; }
    const std::vector<double> &data() const { return data_; }

    /// Original variant: recompute boundary locations from (m, Pi).
    void refresh_boundary_locations();

    MassDiagnostics diagnostics;

private:
    std::span<double> slice(std::size_t offset, std::size_t len) {
        return {data_.data() + offset, len};
    }
    std::span<const double> slice(std::size_t offset, std::size_t len) const {
        return {data_.data() + offset, len};
    }
    void require_original(const char *what) const;

    Variant variant_ = Variant::simplified;
    int boundary_ = 0;
    int last_ = -1;
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// Size of the flat data vector for n cohorts per population.
std::size_t state_length(Variant variant, std::size_t n);

struct StateMeasures {
    AtomicMeasure male{1};
    AtomicMeasure female{1};
    AtomicMeasure couples{2};
};

/// Dirac combinations of all cohorts; zero-mass atoms are kept.
StateMeasures to_measures(const CohortState &state);

} // namespace ebt
