#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace ebt {

/// Nonnegative combination of Dirac masses in R_+ or R_+^2.
///
/// Points are stored flattened (`dim` coordinates per atom). Zero-weight atoms
/// are allowed; cohorts are created empty at the boundary.
class AtomicMeasure {
public:
    explicit AtomicMeasure(int dim = 1);
    AtomicMeasure(int dim, std::vector<double> coords, std::vector<double> weights);

    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return weights_.size(); }
    bool empty() const noexcept { return weights_.empty(); }

    std::span<const double> point(std::size_t k) const {
        return {coords_.data() + k * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    double coord(std::size_t k, int axis) const { return coords_[k * dim_ + axis]; }
    double weight(std::size_t k) const { return weights_[k]; }

    const std::vector<double> &coords() const noexcept { return coords_; }
    const std::vector<double> &weights() const noexcept { return weights_; }

    void add(double x, double w);
    void add(double x, double y, double w);
    void add(std::span<const double> p, double w);
    void reserve(std::size_t n);

private:
    int dim_;
    std::vector<double> coords_;
    std::vector<double> weights_;
};

double euclidean(std::span<const double> a, std::span<const double> b);

double total_mass(const AtomicMeasure &mu);

/// Weights divided by the total mass. Throws std::domain_error on a zero measure.
AtomicMeasure normalize(const AtomicMeasure &mu);

/// Copy with zero-weight atoms removed.
AtomicMeasure drop_zero_atoms(const AtomicMeasure &mu);

/// Sum_i ( |x_i - y_i| m_i + |m_i - n_i| ) for index-paired measures; bounds the
/// flat distance from above.
double dirac_upper_bound(const AtomicMeasure &mu, const AtomicMeasure &nu);

/// Total variation with atoms matched by location after rounding to 12 decimals.
double tv_distance(const AtomicMeasure &mu, const AtomicMeasure &nu);

struct BoundingBox {
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{0.0, 0.0};
    double diameter() const;
};

/// Smallest axis-aligned box containing the supports of both measures.
BoundingBox joint_bounding_box(const AtomicMeasure &mu, const AtomicMeasure &nu);

} // namespace ebt
