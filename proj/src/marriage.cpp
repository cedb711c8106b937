#include "ebt/marriage.hpp"

#include <algorithm>
#include <stdexcept>

namespace ebt {

SinglesMasses singles_masses(const CohortState &state) {
    const std::size_t n = state.size();
    SinglesMasses s{{state.male_mass().begin(), state.male_mass().end()},
                    {state.female_mass().begin(), state.female_mass().end()}};
    const auto couples = state.couple_mass();
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            s.male[k] -= couples[k * n + l];
            s.female[l] -= couples[k * n + l];
        }
    }
    return s;
}

double marriage_quotient(const CohortState &state, const MarriageKernel &kernel, double t, int i,
                         int j) {
    const std::size_t k = state.index(i);
    const std::size_t l = state.index(j);
    const SinglesMasses s = singles_masses(state);
    const std::size_t n = state.size();
    // The denominator reads h at x_vj and g at y_iw, which coincide with the
    // single-cohort locations whenever the couple locations are consistent.
    double denominator = kernel.gamma;
    for (std::size_t v = 0; v < n; ++v) {
        denominator += kernel.h(t, state.couple_x(v, l)) * std::max(s.male[v], 0.0);
        denominator += kernel.g(t, state.couple_y(k, v)) * std::max(s.female[v], 0.0);
    }
    const double x = state.couple_x(k, l);
    const double y = state.couple_y(k, l);
    const double sm = std::max(s.male[k], 0.0);
    const double sf = std::max(s.female[l], 0.0);
    if (sm == 0.0 || sf == 0.0) {
        return 0.0;
    }
    const double hx = kernel.h(t, x);
    const double gy = kernel.g(t, y);
    if (hx == 0.0 || gy == 0.0) {
        return 0.0;
    }
    return kernel.theta(t, x, y) * hx * gy * sm * sf / denominator;
}

OriginalMarriageTerms marriage_terms_original(const CohortState &state,
                                              const MarriageKernel &kernel, double t, int i,
                                              int j) {
    const std::size_t k = state.index(i);
    const std::size_t l = state.index(j);
    const std::size_t n = state.size();
    const auto mm = state.male_mass();
    const auto mf = state.female_mass();
    const auto xm = state.male_location();
    const auto yf = state.female_location();

    auto add = [&](OriginalMarriageTerms &out, double x, double y, double w) {
        if (w == 0.0) {
            return;
        }
        const double f = kernel.theta(t, x, y) * kernel.h(t, x) * kernel.g(t, y) * w;
        out.numerator += f;
        out.moment[0] += x * f;
        out.moment[1] += y * f;
    };

    OriginalMarriageTerms out;
    add(out, xm[k], yf[l], mm[k] * mf[l]);
    for (std::size_t v = 0; v < n; ++v) {
        add(out, xm[k], state.couple_y(v, l), -mm[k] * state.couple(v, l));
    }
    for (std::size_t w = 0; w < n; ++w) {
        add(out, state.couple_x(k, w), yf[l], -mf[l] * state.couple(k, w));
    }
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t w = 0; w < n; ++w) {
            add(out, state.couple_x(k, w), state.couple_y(v, l),
                state.couple(v, l) * state.couple(k, w));
        }
    }

    out.denominator = kernel.gamma;
    for (std::size_t v = 0; v < n; ++v) {
        out.denominator += kernel.h(t, xm[v]) * mm[v] + kernel.g(t, yf[v]) * mf[v];
        for (std::size_t w = 0; w < n; ++w) {
            const double m = state.couple(v, w);
            if (m != 0.0) {
                out.denominator -= (kernel.h(t, state.couple_x(v, w)) +
                                    kernel.g(t, state.couple_y(v, w))) *
                                   m;
            }
        }
    }
    return out;
}

AtomicMeasure continuous_marriage_density(double t, const AtomicMeasure &singles_m,
                                          const AtomicMeasure &singles_f,
                                          const MarriageKernel &kernel) {
    if (singles_m.dim() != 1 || singles_f.dim() != 1) {
        throw std::invalid_argument("continuous_marriage_density expects 1-D singles measures");
    }
    AtomicMeasure out(2);
    if (singles_m.empty() || singles_f.empty()) {
        return out;
    }
    double denominator = kernel.gamma;
    for (std::size_t a = 0; a < singles_m.size(); ++a) {
        denominator += kernel.h(t, singles_m.coord(a, 0)) * singles_m.weight(a);
    }
    for (std::size_t b = 0; b < singles_f.size(); ++b) {
        denominator += kernel.g(t, singles_f.coord(b, 0)) * singles_f.weight(b);
    }
    for (std::size_t a = 0; a < singles_m.size(); ++a) {
        const double x = singles_m.coord(a, 0);
        const double hx = kernel.h(t, x) * singles_m.weight(a);
        if (hx == 0.0) {
            continue;
        }
        for (std::size_t b = 0; b < singles_f.size(); ++b) {
            const double y = singles_f.coord(b, 0);
            const double gy = kernel.g(t, y) * singles_f.weight(b);
            if (gy == 0.0) {
                continue;
            }
            out.add(x, y, kernel.theta(t, x, y) * hx * gy / denominator);
        }
    }
    return out;
}

} // namespace ebt
