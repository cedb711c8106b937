#include "ebt/state.hpp"

#include <stdexcept>

namespace ebt {

Variant parse_variant(const std::string &name) {
    if (name == "simplified") {
        return Variant::simplified;
    }
    if (name == "original") {
        return Variant::original;
    }
    throw std::invalid_argument("unknown variant '" + name + "' (expected simplified or original)");
}

std::string to_string(Variant variant) {
    return variant == Variant::simplified ? "simplified" : "original";
}

std::size_t state_length(Variant variant, std::size_t n) {
    const std::size_t base = 4 * n + n * n;
    return variant == Variant::simplified ? base : base + 2 * n * n + 2;
}

CohortState::CohortState(Variant variant, int boundary, int last, double time)
    : t{time}, variant_{variant}, boundary_{boundary}, last_{last} {
    if (last < boundary) {
        throw std::invalid_argument("cohort state needs B <= J");
    }
    n_ = static_cast<std::size_t>(last - boundary + 1);
    data_.assign(state_length(variant, n_), 0.0);
}

void CohortState::require_original(const char *what) const {
    if (variant_ != Variant::original) {
        throw std::logic_error(std::string(what) + " exists only in the original variant");
    }
}

std::span<double> CohortState::couple_moment_x() {
    require_original("couple moment");
    return slice(4 * n_ + n_ * n_, n_ * n_);
}

std::span<double> CohortState::couple_moment_y() {
    require_original("couple moment");
    return slice(4 * n_ + 2 * n_ * n_, n_ * n_);
}

std::span<const double> CohortState::couple_moment_x() const {
    require_original("couple moment");
    return slice(4 * n_ + n_ * n_, n_ * n_);
}

std::span<const double> CohortState::couple_moment_y() const {
    require_original("couple moment");
    return slice(4 * n_ + 2 * n_ * n_, n_ * n_);
}

double &CohortState::male_moment() {
    require_original("boundary moment");
    return data_[data_.size() - 2];
}

double &CohortState::female_moment() {
    require_original("boundary moment");
    return data_[data_.size() - 1];
}

double CohortState::male_moment() const {
    require_original("boundary moment");
    return data_[data_.size() - 2];
}

double CohortState::female_moment() const {
    require_original("boundary moment");
    return data_[data_.size() - 1];
}

double CohortState::couple_x(std::size_t k, std::size_t l) const {
    if (variant_ == Variant::simplified) {
        return male_location()[k];
    }
    const double m = couple(k, l);
    return m == 0.0 ? 0.0 : couple_moment_x()[k * n_ + l] / m;
}

double CohortState::couple_y(std::size_t k, std::size_t l) const {
    if (variant_ == Variant::simplified) {
        return female_location()[l];
    }
    const double m = couple(k, l);
    return m == 0.0 ? 0.0 : couple_moment_y()[k * n_ + l] / m;
}

std::size_t CohortState::index(int i) const {
    if (i < boundary_ || i > last_) {
        throw std::out_of_range("cohort index " + std::to_string(i) + " outside [" +
                                std::to_string(boundary_) + ", " + std::to_string(last_) + "]");
    }
    return static_cast<std::size_t>(i - boundary_);
}

void CohortState::refresh_boundary_locations() {
    require_original("boundary moment");
    const double mm = male_mass()[0];
    const double mf = female_mass()[0];
    male_location()[0] = mm == 0.0 ? 0.0 : male_moment() / mm;
    female_location()[0] = mf == 0.0 ? 0.0 : female_moment() / mf;
}

StateMeasures to_measures(const CohortState &state) {
    const std::size_t n = state.size();
    StateMeasures out;
    out.male.reserve(n);
    out.female.reserve(n);
    out.couples.reserve(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        out.male.add(state.male_location()[k], state.male_mass()[k]);
        out.female.add(state.female_location()[k], state.female_mass()[k]);
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            out.couples.add(state.couple_x(k, l), state.couple_y(k, l), state.couple(k, l));
        }
    }
    return out;
}

} // namespace ebt
