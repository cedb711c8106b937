#include "ebt/experiments.hpp"

#include "ebt/quadrature.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ebt {

StateMeasures atomize_exact(const ExactSolution &exact, double t, double dt, std::size_t cells) {
    if (t < exact.t_min || t > exact.t_max) {
        throw std::invalid_argument("exact solution is not valid at t = " + std::to_string(t));
    }
    if (exact.support(t) > static_cast<double>(cells) * dt * (1.0 + 1e-12)) {
        throw std::invalid_argument("exact support [0, " + std::to_string(exact.support(t)) +
                                    "] escapes the grid [0, " +
                                    std::to_string(static_cast<double>(cells) * dt) + ")");
    }
    StateMeasures out;
    auto lo = [dt](std::size_t k) { return static_cast<double>(k) * dt; };
    for (std::size_t k = 0; k < cells; ++k) {
        const CellMoments1 m = cell_moments([&](double x) { return exact.male(t, x); }, lo(k), lo(k + 1));
        const CellMoments1 f =
            cell_moments([&](double y) { return exact.female(t, y); }, lo(k), lo(k + 1));
        if (m.mass > 0.0) {
            out.male.add(m.location, m.mass);
        }
        if (f.mass > 0.0) {
            out.female.add(f.location, f.mass);
        }
    }
    const auto couples = [&](double x, double y) { return exact.couples(t, x, y); };
    for (std::size_t k = 0; k < cells; ++k) {
        for (std::size_t l = 0; l < cells; ++l) {
            const CellMoments2 c = cell_moments(couples, lo(k), lo(k + 1), lo(l), lo(l + 1));
            if (c.mass > 0.0) {
                out.couples.add(c.x, c.y, c.mass);
            }
        }
    }
    return out;
}

StateMeasures pool_state(const CohortState &fine, int factor) {
    if (factor < 1) {
        throw std::invalid_argument("pooling factor must be positive");
    }
    const std::size_t n = fine.size();
    // Storage index k >= 1 covers [(k-1) h, k h); coarse cell (k-1) / factor.
    const std::size_t cells = (n - 1 + factor - 1) / factor;
    auto coarse = [factor](std::size_t k) { return (k - 1) / static_cast<std::size_t>(factor); };
    std::vector<double> mm(cells, 0.0), mx(cells, 0.0), fm(cells, 0.0), fx(cells, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        const std::size_t c = coarse(k);
        mm[c] += fine.male_mass()[k];
        mx[c] += fine.male_mass()[k] * fine.male_location()[k];
        fm[c] += fine.female_mass()[k];
        fx[c] += fine.female_mass()[k] * fine.female_location()[k];
    }
    std::vector<double> cm(cells * cells, 0.0), cx(cells * cells, 0.0), cy(cells * cells, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        for (std::size_t l = 1; l < n; ++l) {
            const double m = fine.couple(k, l);
            if (m == 0.0) {
                continue;
            }
            const std::size_t c = coarse(k) * cells + coarse(l);
            cm[c] += m;
            cx[c] += m * fine.couple_x(k, l);
            cy[c] += m * fine.couple_y(k, l);
        }
    }
    StateMeasures out;
    for (std::size_t c = 0; c < cells; ++c) {
        if (mm[c] > 0.0) {
            out.male.add(mx[c] / mm[c], mm[c]);
        }
        if (fm[c] > 0.0) {
            out.female.add(fx[c] / fm[c], fm[c]);
        }
    }
    for (std::size_t c = 0; c < cells * cells; ++c) {
        if (cm[c] > 0.0) {
            out.couples.add(cx[c] / cm[c], cy[c] / cm[c], cm[c]);
        }
    }
    return out;
}

ReferenceMode parse_reference_mode(const std::string &name) {
    if (name == "fixed") {
        return ReferenceMode::fixed;
    }
    if (name == "successive") {
        return ReferenceMode::successive;
    }
    throw std::invalid_argument("unknown reference mode '" + name +
                                "' (expected fixed or successive)");
}

std::string to_string(ReferenceMode mode) {
    return mode == ReferenceMode::fixed ? "fixed" : "successive";
}

ErrorPair measure_error(const StateMeasures &numeric, const StateMeasures &reference,
                        const MetricConfig &metric) {
    const StateMeasures a{drop_zero_atoms(numeric.male), drop_zero_atoms(numeric.female),
                          drop_zero_atoms(numeric.couples)};
    const StateMeasures b{drop_zero_atoms(reference.male), drop_zero_atoms(reference.female),
                          drop_zero_atoms(reference.couples)};
    W1Options singles = metric.options;
    singles.solver = metric.singles;
    W1Options couples = metric.options;
    couples.solver = metric.couples;
    ErrorPair e;
    e.flat.male = rho_distance(a.male, b.male, singles);
    e.flat.female = rho_distance(a.female, b.female, singles);
    e.flat.couples = rho_distance(a.couples, b.couples, couples);
    e.tv.male = tv_distance(a.male, b.male);
    e.tv.female = tv_distance(a.female, b.female);
    e.tv.couples = tv_distance(a.couples, b.couples);
    return e;
}

std::vector<std::optional<double>> order_estimate(const std::vector<double> &dts,
                                                  const std::vector<double> &errors) {
    if (dts.size() != errors.size()) {
        throw std::invalid_argument("order_estimate: dt and error lists differ in length");
    }
    std::vector<std::optional<double>> q(errors.size());
    for (std::size_t k = 1; k < errors.size(); ++k) {
        if (std::abs(dts[k - 1] - 2.0 * dts[k]) > 1e-12 * dts[k - 1]) {
            throw std::invalid_argument("order_estimate: consecutive rows must halve dt");
        }
        if (errors[k] > 0.0 && errors[k - 1] > 0.0) {
            q[k] = std::log2(errors[k - 1] / errors[k]);
        }
    }
    return q;
}

std::vector<double> halving_list(double first, int rows) {
    if (rows < 1) {
        throw std::invalid_argument("row count must be positive");
    }
    std::vector<double> dts;
    double dt = first;
    for (int k = 0; k < rows; ++k) {
        dts.push_back(dt);
        dt /= 2.0;
    }
    return dts;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Runs tasks 0..count-1 on at most `jobs` threads; the first exception wins.
template <class Task> void run_parallel(std::size_t count, unsigned jobs, Task task) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            try {
                task(k);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (unsigned j = 0; j < jobs; ++j) {
            threads.emplace_back(worker);
        }
        for (auto &th : threads) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

void check_dt_list(const std::vector<double> &dts) {
    if (dts.empty()) {
        throw std::invalid_argument("convergence study needs at least one dt");
    }
    for (std::size_t k = 1; k < dts.size(); ++k) {
        if (std::abs(dts[k - 1] - 2.0 * dts[k]) > 1e-12 * dts[k - 1]) {
            throw std::invalid_argument("dt list must halve from row to row");
        }
    }
}

} // namespace

StudyResult convergence_study(const Problem &problem, const StudyConfig &cfg) {
    check_dt_list(cfg.dts);
    const bool exact = problem.exact.has_value();
    StudyResult result;
    result.reference_kind = exact ? "exact" : "self-refined";

    // Runs: every row, plus the half-step run finishing the self-refined chain.
    std::vector<double> run_dts = cfg.dts;
    if (!exact) {
        run_dts.push_back(cfg.dts.back() / 2.0);
        result.reference_dt = run_dts.back();
    }
    std::vector<CohortState> finals(run_dts.size());
    std::vector<double> run_seconds(run_dts.size(), 0.0);
    const std::size_t rows = cfg.dts.size();
    run_parallel(run_dts.size(), cfg.jobs, [&](std::size_t k) {
        StepConfig step = cfg.step;
        step.dt = run_dts[k];
        if (k == rows) {
            step.substeps = cfg.reference_substeps;
        }
        const auto start = std::chrono::steady_clock::now();
        finals[k] = run(problem, cfg.variant, step);
        run_seconds[k] = seconds_since(start);
    });
    if (!exact) {
        result.reference_seconds = run_seconds.back();
    }

    result.rows.resize(rows);
    run_parallel(rows, cfg.jobs, [&](std::size_t k) {
        ConvergenceRow &row = result.rows[k];
        row.dt = cfg.dts[k];
        row.run_seconds = run_seconds[k];
        const auto start = std::chrono::steady_clock::now();
        const CohortState &state = finals[k];
        StateMeasures reference;
        if (exact) {
            reference = atomize_exact(*problem.exact, state.t, row.dt, state.size() - 1);
        } else if (cfg.reference == ReferenceMode::fixed) {
            const int factor = static_cast<int>(std::lround(row.dt / result.reference_dt));
            reference = pool_state(finals.back(), factor);
        } else {
            reference = pool_state(finals[k + 1], 2);
        }
        row.parts = measure_error(to_measures(state), reference, cfg.metric);
        row.err_flat = row.parts.flat.total();
        row.err_tv = row.parts.tv.total();
        row.metric_seconds = seconds_since(start);
    });

    std::vector<double> errors;
    for (const auto &row : result.rows) {
        errors.push_back(row.err_flat);
    }
    const auto q = order_estimate(cfg.dts, errors);
    for (std::size_t k = 0; k < rows; ++k) {
        result.rows[k].q = q[k];
    }
    return result;
}

namespace {

std::string sig10(double v) {
    std::ostringstream out;
    out << std::setprecision(10) << v;
    return out.str();
}

} // namespace

std::string table_csv(const StudyResult &result) {
    std::ostringstream out;
    out << "dt,err_flat,err_tv,q\n";
    for (const auto &row : result.rows) {
        out << sig10(row.dt) << ',' << sig10(row.err_flat) << ',' << sig10(row.err_tv) << ','
            << (row.q ? sig10(*row.q) : "") << '\n';
    }
    return out.str();
}

std::string table_text(const StudyResult &result) {
    std::ostringstream out;
    out << std::setw(14) << "dt" << std::setw(18) << "err_flat" << std::setw(18) << "err_tv"
        << std::setw(16) << "q" << '\n';
    for (const auto &row : result.rows) {
        out << std::setw(14) << sig10(row.dt) << std::setw(18) << sig10(row.err_flat)
            << std::setw(18) << sig10(row.err_tv) << std::setw(16)
            << (row.q ? sig10(*row.q) : "-") << '\n';
    }
    return out.str();
}

} // namespace ebt
