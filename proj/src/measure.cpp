#include "ebt/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace ebt {

namespace {

void check_atom(std::span<const double> p, double w) {
    if (!std::isfinite(w) || w < 0.0) {
        throw std::invalid_argument("atom weight must be finite and nonnegative, got " +
                                    std::to_string(w));
    }
    for (double c : p) {
        if (!std::isfinite(c) || c < 0.0) {
            throw std::invalid_argument("atom coordinate must be finite and nonnegative, got " +
                                        std::to_string(c));
        }
    }
}

std::array<long long, 2> location_key(const AtomicMeasure &mu, std::size_t k) {
    std::array<long long, 2> key{0, 0};
    for (int a = 0; a < mu.dim(); ++a) {
        key[a] = std::llround(mu.coord(k, a) * 1e12);
    }
    return key;
}

} // namespace

AtomicMeasure::AtomicMeasure(int dim) : dim_{dim} {
    if (dim != 1 && dim != 2) {
        throw std::invalid_argument("measure dimension must be 1 or 2");
    }
}

AtomicMeasure::AtomicMeasure(int dim, std::vector<double> coords, std::vector<double> weights)
    : AtomicMeasure(dim) {
    if (coords.size() != weights.size() * static_cast<std::size_t>(dim)) {
        throw std::invalid_argument("points and weights lengths differ");
    }
    coords_ = std::move(coords);
    weights_ = std::move(weights);
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        check_atom(point(k), weights_[k]);
    }
}

void AtomicMeasure::add(double x, double w) {
    const double p[1] = {x};
    add(std::span<const double>(p, 1), w);
}

void AtomicMeasure::add(double x, double y, double w) {
    const double p[2] = {x, y};
    add(std::span<const double>(p, 2), w);
}

void AtomicMeasure::add(std::span<const double> p, double w) {
    if (p.size() != static_cast<std::size_t>(dim_)) {
        throw std::invalid_argument("point dimension does not match measure dimension");
    }
    check_atom(p, w);
    coords_.insert(coords_.end(), p.begin(), p.end());
    weights_.push_back(w);
}

void AtomicMeasure::reserve(std::size_t n) {
    coords_.reserve(n * dim_);
    weights_.reserve(n);
}

double euclidean(std::span<const double> a, std::span<const double> b) {
    if (a.size() == 1) {
        return std::abs(a[0] - b[0]);
    }
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double total_mass(const AtomicMeasure &mu) {
    double sum = 0.0;
    for (double w : mu.weights()) {
        sum += w;
    }
    return sum;
}

AtomicMeasure normalize(const AtomicMeasure &mu) {
    const double mass = total_mass(mu);
    if (!(mass > 0.0)) {
        throw std::domain_error("cannot normalize a measure with zero total mass");
    }
    std::vector<double> w = mu.weights();
    for (double &v : w) {
        v /= mass;
    }
    return AtomicMeasure(mu.dim(), mu.coords(), std::move(w));
}

AtomicMeasure drop_zero_atoms(const AtomicMeasure &mu) {
    AtomicMeasure out(mu.dim());
    out.reserve(mu.size());
    for (std::size_t k = 0; k < mu.size(); ++k) {
        if (mu.weight(k) > 0.0) {
            out.add(mu.point(k), mu.weight(k));
        }
    }
    return out;
}

double dirac_upper_bound(const AtomicMeasure &mu, const AtomicMeasure &nu) {
    if (mu.dim() != nu.dim()) {
        throw std::invalid_argument("dirac_upper_bound: dimension mismatch");
    }
    if (mu.size() != nu.size()) {
        throw std::invalid_argument("dirac_upper_bound: atom counts differ (" +
                                    std::to_string(mu.size()) + " vs " +
                                    std::to_string(nu.size()) + ")");
    }
    double bound = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        bound += euclidean(mu.point(k), nu.point(k)) * mu.weight(k) +
                 std::abs(mu.weight(k) - nu.weight(k));
    }
    return bound;
}

double tv_distance(const AtomicMeasure &mu, const AtomicMeasure &nu) {
    if (mu.dim() != nu.dim()) {
        throw std::invalid_argument("tv_distance: dimension mismatch");
    }
    // Signed mass per canonical location; ordered map keeps the sum deterministic.
    std::map<std::array<long long, 2>, double> diff;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        diff[location_key(mu, k)] += mu.weight(k);
    }
    for (std::size_t k = 0; k < nu.size(); ++k) {
        diff[location_key(nu, k)] -= nu.weight(k);
    }
    double tv = 0.0;
    for (const auto &[key, d] : diff) {
        tv += std::abs(d);
    }
    return tv;
}

double BoundingBox::diameter() const { return std::hypot(hi[0] - lo[0], hi[1] - lo[1]); }

BoundingBox joint_bounding_box(const AtomicMeasure &mu, const AtomicMeasure &nu) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    BoundingBox box{{inf, inf}, {-inf, -inf}};
    bool any = false;
    for (const AtomicMeasure *m : {&mu, &nu}) {
        for (std::size_t k = 0; k < m->size(); ++k) {
            any = true;
            for (int a = 0; a < m->dim(); ++a) {
                box.lo[a] = std::min(box.lo[a], m->coord(k, a));
                box.hi[a] = std::max(box.hi[a], m->coord(k, a));
            }
        }
    }
    if (!any) {
        return BoundingBox{};
    }
    if (mu.dim() == 1) {
        box.lo[1] = box.hi[1] = 0.0;
    }
    return box;
}

} // namespace ebt
