#include "ebt/scheme.hpp"

#include "ebt/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace ebt {

BoundaryRule parse_boundary_rule(const std::string &name) {
    if (name == "moment") {
        return BoundaryRule::moment;
    }
    if (name == "characteristic") {
        return BoundaryRule::characteristic;
    }
    throw std::invalid_argument("unknown boundary rule '" + name +
                                "' (expected moment or characteristic)");
}

std::string to_string(BoundaryRule rule) {
    return rule == BoundaryRule::moment ? "moment" : "characteristic";
}

void StepConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("dt must be positive");
    }
    if (substeps < 1) {
        throw std::invalid_argument("substeps must be at least 1");
    }
    if (order != 1 && order != 4) {
        throw std::invalid_argument("integrator order must be 1 or 4");
    }
}

long macro_steps(double horizon, double dt) {
    const double ratio = horizon / dt;
    const long steps = std::lround(ratio);
    if (steps < 1 || std::abs(static_cast<double>(steps) * dt - horizon) > 1e-12 * std::max(1.0, horizon)) {
        throw std::invalid_argument("T = " + std::to_string(horizon) +
                                    " is not a positive multiple of dt = " + std::to_string(dt));
    }
    return steps;
}

CohortState init_internal(const Problem &problem, Variant variant, double dt) {
    if (problem.initial.support > problem.domain * (1.0 + 1e-12)) {
        throw std::invalid_argument("initial densities reach age " +
                                    std::to_string(problem.initial.support) +
                                    " beyond the grid [0, " + std::to_string(problem.domain) + ")");
    }
    const long cells = macro_steps(problem.domain, dt);
    CohortState s(variant, 1, static_cast<int>(cells), 0.0);
    const std::size_t n = s.size();
    auto mm = s.male_mass();
    auto mx = s.male_location();
    auto fm = s.female_mass();
    auto fx = s.female_location();
    for (std::size_t k = 0; k < n; ++k) {
        const double lo = static_cast<double>(k) * dt;
        const double hi = static_cast<double>(k + 1) * dt;
        const CellMoments1 male = cell_moments(problem.initial.male, lo, hi);
        const CellMoments1 female = cell_moments(problem.initial.female, lo, hi);
        mm[k] = male.mass;
        mx[k] = male.location;
        fm[k] = female.mass;
        fx[k] = female.location;
    }
    auto cm = s.couple_mass();
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            const double m = integrate(problem.initial.couples, static_cast<double>(k) * dt,
                                       static_cast<double>(k + 1) * dt,
                                       static_cast<double>(l) * dt,
                                       static_cast<double>(l + 1) * dt);
            cm[k * n + l] = std::max(m, 0.0);
        }
    }
    if (variant == Variant::original) {
        auto cx = s.couple_moment_x();
        auto cy = s.couple_moment_y();
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t l = 0; l < n; ++l) {
                cx[k * n + l] = cm[k * n + l] * mx[k];
                cy[k * n + l] = cm[k * n + l] * fx[l];
            }
        }
    }
    return s;
}

CohortState attach_boundary(const CohortState &state) {
    CohortState out(state.variant(), state.boundary() - 1, state.last(), state.t);
    out.diagnostics = state.diagnostics;
    const std::size_t n = state.size();
    const std::size_t m = out.size();
    std::copy(state.male_mass().begin(), state.male_mass().end(), out.male_mass().begin() + 1);
    std::copy(state.male_location().begin(), state.male_location().end(),
              out.male_location().begin() + 1);
    std::copy(state.female_mass().begin(), state.female_mass().end(),
              out.female_mass().begin() + 1);
    std::copy(state.female_location().begin(), state.female_location().end(),
              out.female_location().begin() + 1);
    auto shift_grid = [&](std::span<const double> from, std::span<double> to) {
        for (std::size_t k = 0; k < n; ++k) {
            std::copy(from.begin() + k * n, from.begin() + (k + 1) * n,
                      to.begin() + (k + 1) * m + 1);
        }
    };
    shift_grid(state.couple_mass(), out.couple_mass());
    if (state.variant() == Variant::original) {
        shift_grid(state.couple_moment_x(), out.couple_moment_x());
        shift_grid(state.couple_moment_y(), out.couple_moment_y());
    }
    return out;
}

namespace {

struct Atom {
    double location;
    double weight;
};

void merge_atom(std::vector<Atom> &atoms, double location, double weight, double tol) {
    if (weight == 0.0) {
        return;
    }
    for (Atom &a : atoms) {
        if (std::abs(a.location - location) <= tol) {
            a.weight += weight;
            return;
        }
    }
    atoms.push_back({location, weight});
}

std::optional<PopulationMeasures> exported_measures(const CohortState &s, const Problem &problem) {
    if (!problem.rates.uses_measures) {
        return std::nullopt;
    }
    PopulationMeasures mu;
    for (std::size_t k = 0; k < s.size(); ++k) {
        mu.male.add(std::max(s.male_location()[k], 0.0), std::max(s.male_mass()[k], 0.0));
        mu.female.add(std::max(s.female_location()[k], 0.0), std::max(s.female_mass()[k], 0.0));
    }
    return mu;
}

void rhs_simplified_into(const CohortState &s, double t, const Problem &problem,
                         std::vector<double> &out) {
    const std::size_t n = s.size();
    out.assign(s.data().size(), 0.0);
    const auto measures = exported_measures(s, problem);
    const PopulationMeasures *mu = measures ? &*measures : nullptr;
    const auto &rates = problem.rates;
    const auto &kernel = problem.kernel;

    const auto mm = s.male_mass();
    const auto mx = s.male_location();
    const auto fm = s.female_mass();
    const auto fx = s.female_location();
    const auto cm = s.couple_mass();
    double *dmm = out.data();
    double *dmx = dmm + n;
    double *dfm = dmm + 2 * n;
    double *dfx = dmm + 3 * n;
    double *dcm = dmm + 4 * n;

    for (std::size_t k = 0; k < n; ++k) {
        dmx[k] = 1.0;
        dfx[k] = 1.0;
        if (mm[k] != 0.0) {
            dmm[k] = -rates.male_death(t, mx[k], mu) * mm[k];
        }
        if (fm[k] != 0.0) {
            dfm[k] = -rates.female_death(t, fx[k], mu) * fm[k];
        }
    }

    std::vector<double> male_singles(mm.begin(), mm.end());
    std::vector<double> female_singles(fm.begin(), fm.end());
    double male_births = 0.0;
    double female_births = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            const double m = cm[k * n + l];
            if (m == 0.0) {
                continue;
            }
            male_singles[k] -= m;
            female_singles[l] -= m;
            male_births += rates.male_birth(t, mx[k], fx[l], mu) * m;
            female_births += rates.female_birth(t, mx[k], fx[l], mu) * m;
            dcm[k * n + l] = -rates.couple_loss(t, mx[k], fx[l], mu) * m;
        }
    }
    dmm[0] += male_births;
    dfm[0] += female_births;

    // h s^m and g s^f per cohort with clamped singles; they also form D.
    double denominator = kernel.gamma;
    for (std::size_t k = 0; k < n; ++k) {
        const double sm = std::max(male_singles[k], 0.0);
        male_singles[k] = sm == 0.0 ? 0.0 : kernel.h(t, mx[k]) * sm;
        denominator += male_singles[k];
        const double sf = std::max(female_singles[k], 0.0);
        female_singles[k] = sf == 0.0 ? 0.0 : kernel.g(t, fx[k]) * sf;
        denominator += female_singles[k];
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (male_singles[k] == 0.0) {
            continue;
        }
        for (std::size_t l = 0; l < n; ++l) {
            if (female_singles[l] == 0.0) {
                continue;
            }
            dcm[k * n + l] +=
                kernel.theta(t, mx[k], fx[l]) * male_singles[k] * female_singles[l] / denominator;
        }
    }
}

void rhs_original_into(const CohortState &s, double t, const Problem &problem, BoundaryRule rule,
                       double merge_tol, std::vector<double> &out) {
    const std::size_t n = s.size();
    const std::size_t nn = n * n;
    out.assign(s.data().size(), 0.0);
    const auto measures = exported_measures(s, problem);
    const PopulationMeasures *mu = measures ? &*measures : nullptr;
    const auto &rates = problem.rates;
    const auto &kernel = problem.kernel;

    const auto mm = s.male_mass();
    const auto fm = s.female_mass();
    const auto cm = s.couple_mass();
    const auto cx = s.couple_moment_x();
    const auto cy = s.couple_moment_y();
    std::vector<double> mx(s.male_location().begin(), s.male_location().end());
    std::vector<double> fx(s.female_location().begin(), s.female_location().end());
    const bool moment_rule = rule == BoundaryRule::moment;
    if (moment_rule) {
        mx[0] = mm[0] == 0.0 ? 0.0 : s.male_moment() / mm[0];
        fx[0] = fm[0] == 0.0 ? 0.0 : s.female_moment() / fm[0];
    }

    double *dmm = out.data();
    double *dmx = dmm + n;
    double *dfm = dmm + 2 * n;
    double *dfx = dmm + 3 * n;
    double *dcm = dmm + 4 * n;
    double *dcx = dcm + nn;
    double *dcy = dcx + nn;
    double &dpm = out[out.size() - 2];
    double &dpf = out[out.size() - 1];

    for (std::size_t k = moment_rule ? 1 : 0; k < n; ++k) {
        dmx[k] = 1.0;
        dfx[k] = 1.0;
        if (mm[k] != 0.0) {
            dmm[k] = -rates.male_death(t, mx[k], mu) * mm[k];
        }
        if (fm[k] != 0.0) {
            dfm[k] = -rates.female_death(t, fx[k], mu) * fm[k];
        }
    }
    if (moment_rule) {
        const double pm = s.male_moment();
        const double pf = s.female_moment();
        const double cm0 = rates.male_death(t, 0.0, mu);
        const double cf0 = rates.female_death(t, 0.0, mu);
        dmm[0] = -cm0 * mm[0] -
                 death_rate_dx(rates.male_death, rates.male_death_dx, t, 0.0, mu) * pm;
        dfm[0] = -cf0 * fm[0] -
                 death_rate_dx(rates.female_death, rates.female_death_dx, t, 0.0, mu) * pf;
        dpm = mm[0] - cm0 * pm;
        dpf = fm[0] - cf0 * pf;
    }

    // Row i expands s^m_i into +m_i at x_i and -m_iw at x_iw; column j likewise.
    std::vector<std::vector<Atom>> rows(n);
    std::vector<std::vector<Atom>> cols(n);
    for (std::size_t k = 0; k < n; ++k) {
        merge_atom(rows[k], mx[k], mm[k], merge_tol);
        merge_atom(cols[k], fx[k], fm[k], merge_tol);
    }
    double male_births = 0.0;
    double female_births = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            const std::size_t c = k * n + l;
            const double m = cm[c];
            if (m == 0.0) {
                continue;
            }
            const double x = cx[c] / m;
            const double y = cy[c] / m;
            merge_atom(rows[k], x, -m, merge_tol);
            merge_atom(cols[l], y, -m, merge_tol);
            male_births += rates.male_birth(t, x, y, mu) * m;
            female_births += rates.female_birth(t, x, y, mu) * m;
            const double loss = rates.couple_loss(t, x, y, mu);
            dcm[c] = -loss * m;
            dcx[c] = (1.0 - x * loss) * m;
            dcy[c] = (1.0 - y * loss) * m;
        }
    }
    dmm[0] += male_births;
    dfm[0] += female_births;

    // Weights become h(x) w and g(y) w; their sums are the non-gamma part of D.
    double denominator = kernel.gamma;
    auto weigh = [&](std::vector<Atom> &atoms, bool male) {
        std::vector<Atom> kept;
        for (const Atom &a : atoms) {
            const double w = (male ? kernel.h(t, a.location) : kernel.g(t, a.location)) * a.weight;
            denominator += w;
            if (w != 0.0) {
                kept.push_back({a.location, w});
            }
        }
        atoms.swap(kept);
    };
    for (std::size_t k = 0; k < n; ++k) {
        weigh(rows[k], true);
        weigh(cols[k], false);
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (rows[k].empty()) {
            continue;
        }
        for (std::size_t l = 0; l < n; ++l) {
            if (cols[l].empty()) {
                continue;
            }
            double num = 0.0;
            double num_x = 0.0;
            double num_y = 0.0;
            for (const Atom &a : rows[k]) {
                for (const Atom &b : cols[l]) {
                    const double f = kernel.theta(t, a.location, b.location) * a.weight * b.weight;
                    num += f;
                    num_x += a.location * f;
                    num_y += b.location * f;
                }
            }
            const std::size_t c = k * n + l;
            dcm[c] += num / denominator;
            dcx[c] += num_x / denominator;
            dcy[c] += num_y / denominator;
        }
    }
}

void evaluate(const CohortState &s, double t, const Problem &problem, const StepConfig &cfg,
              std::vector<double> &out) {
    if (s.variant() == Variant::simplified) {
        rhs_simplified_into(s, t, problem, out);
    } else {
        rhs_original_into(s, t, problem, cfg.boundary_rule, merge_fraction * cfg.dt, out);
    }
}

// Records negative masses, clamps them when asked and refreshes derived locations.
void finish_substep(CohortState &s, const StepConfig &cfg) {
    const std::size_t n = s.size();
    auto &diag = s.diagnostics;
    ++diag.substeps;
    auto visit = [&](double &m) -> bool {
        if (m >= 0.0) {
            return false;
        }
        diag.max_negative = std::max(diag.max_negative, -m);
        if (-m > negative_mass_tol) {
            ++diag.excursions;
        }
        if (cfg.clamp) {
            m = 0.0;
            return true;
        }
        return false;
    };
    const bool original = s.variant() == Variant::original;
    for (std::size_t k = 0; k < n; ++k) {
        visit(s.male_mass()[k]);
        visit(s.female_mass()[k]);
    }
    if (original && s.male_mass()[0] == 0.0) {
        s.male_moment() = 0.0;
    }
    if (original && s.female_mass()[0] == 0.0) {
        s.female_moment() = 0.0;
    }
    auto cm = s.couple_mass();
    for (std::size_t c = 0; c < n * n; ++c) {
        if (visit(cm[c]) && original) {
            s.couple_moment_x()[c] = 0.0;
            s.couple_moment_y()[c] = 0.0;
        }
    }
    if (original && cfg.boundary_rule == BoundaryRule::moment) {
        s.refresh_boundary_locations();
    }
}

void axpy(std::vector<double> &out, const std::vector<double> &y, double a,
          const std::vector<double> &k) {
    for (std::size_t q = 0; q < y.size(); ++q) {
        out[q] = y[q] + a * k[q];
    }
}

} // namespace

std::vector<double> rhs_simplified(const CohortState &state, double t, const Problem &problem) {
    if (state.variant() != Variant::simplified) {
        throw std::invalid_argument("rhs_simplified needs a simplified-variant state");
    }
    std::vector<double> out;
    rhs_simplified_into(state, t, problem, out);
    return out;
}

std::vector<double> rhs_original(const CohortState &state, double t, const Problem &problem,
                                 BoundaryRule rule, double merge_tol) {
    if (state.variant() != Variant::original) {
        throw std::invalid_argument("rhs_original needs an original-variant state");
    }
    std::vector<double> out;
    rhs_original_into(state, t, problem, rule, merge_tol, out);
    return out;
}

CohortState macro_step(const CohortState &state, const Problem &problem, const StepConfig &cfg) {
    cfg.validate();
    const double h = cfg.dt / cfg.substeps;
    CohortState y = state;
    CohortState stage = state;
    std::vector<double> k1, k2, k3, k4;
    auto &yd = y.data();
    auto &sd = stage.data();
    for (int step = 0; step < cfg.substeps; ++step) {
        const double t0 = state.t + step * h;
        evaluate(y, t0, problem, cfg, k1);
        if (cfg.order == 1) {
            axpy(yd, yd, h, k1);
        } else {
            axpy(sd, yd, 0.5 * h, k1);
            evaluate(stage, t0 + 0.5 * h, problem, cfg, k2);
            axpy(sd, yd, 0.5 * h, k2);
            evaluate(stage, t0 + 0.5 * h, problem, cfg, k3);
            axpy(sd, yd, h, k3);
            evaluate(stage, t0 + h, problem, cfg, k4);
            for (std::size_t q = 0; q < yd.size(); ++q) {
                yd[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
            }
        }
        finish_substep(y, cfg);
    }
    y.t = state.t + cfg.dt;
    // Internalization: the boundary cohort keeps its transported state and a
    // fresh empty boundary cohort is prepended.
    return attach_boundary(y);
}

CohortState run(const Problem &problem, Variant variant, const StepConfig &cfg,
                const StepObserver &observer) {
    cfg.validate();
    problem.kernel.validate();
    if (cfg.dt > problem.kernel.a0 * (1.0 + 1e-12)) {
        throw std::invalid_argument("dt exceeds a0: the scheme requires dt <= a0 (dt = " +
                                    std::to_string(cfg.dt) +
                                    ", a0 = " + std::to_string(problem.kernel.a0) + ")");
    }
    const long steps = macro_steps(problem.horizon, cfg.dt);
    CohortState state = attach_boundary(init_internal(problem, variant, cfg.dt));
    for (long step = 0; step < steps; ++step) {
        state = macro_step(state, problem, cfg);
        state.t = static_cast<double>(step + 1) * cfg.dt;
        if (observer) {
            observer(state);
        }
    }
    return state;
}

} // namespace ebt
