// Acceptance report: one PASS/FAIL line per criterion with the measured values.
// Exit status is 0 whenever the report completes; failures are reported, not hidden.

#include "ebt/experiments.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

namespace {

using namespace ebt;

int passed = 0;
int total = 0;

void report(bool ok, const std::string &name, const std::string &detail) {
    ++total;
    passed += ok ? 1 : 0;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << detail << std::endl;
}

void info(const std::string &text) { std::cout << "       " << text << std::endl; }

std::string fmt(double v, int digits = 4) {
    std::ostringstream out;
    out << std::setprecision(digits) << v;
    return out.str();
}

std::string list(const std::vector<double> &v) {
    std::string s = "[";
    for (std::size_t k = 0; k < v.size(); ++k) {
        s += (k ? ", " : "") + fmt(v[k]);
    }
    return s + "]";
}

AtomicMeasure random_measure(std::mt19937_64 &rng, int dim, std::size_t atoms, double extent,
                             bool probability) {
    std::uniform_real_distribution<double> coord(0.0, extent), weight(0.05, 1.0);
    std::vector<double> c, w;
    for (std::size_t k = 0; k < atoms; ++k) {
        for (int d = 0; d < dim; ++d) {
            c.push_back(coord(rng));
        }
        w.push_back(weight(rng) * (probability ? 1.0 : 2.0));
    }
    if (probability) {
        const double s = std::accumulate(w.begin(), w.end(), 0.0);
        for (double &x : w) {
            x /= s;
        }
    }
    return AtomicMeasure(dim, std::move(c), std::move(w));
}

Problem zero_rate_problem() {
    Problem p = example1_problem();
    auto zero = [](double, double, const PopulationMeasures *) { return 0.0; };
    auto zero_pair = [](double, double, double, const PopulationMeasures *) { return 0.0; };
    p.rates.male_death = p.rates.female_death = zero;
    p.rates.male_death_dx = p.rates.female_death_dx = zero;
    p.rates.couple_loss = p.rates.male_birth = p.rates.female_birth = zero_pair;
    p.kernel.preference = [](double, double, double) { return 0.0; };
    return p;
}

std::vector<double> q_values(const StudyResult &r, std::size_t from) {
    std::vector<double> q;
    for (std::size_t k = from; k < r.rows.size(); ++k) {
        q.push_back(r.rows[k].q.value_or(std::nan("")));
    }
    return q;
}

bool all_within(const std::vector<double> &v, double lo, double hi) {
    return !v.empty() && std::all_of(v.begin(), v.end(), [&](double x) { return x >= lo && x <= hi; });
}

void print_table(const StudyResult &r) {
    std::istringstream text(table_text(r));
    for (std::string line; std::getline(text, line);) {
        info(line);
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void example1_order(int rows, unsigned jobs) {
    const std::vector<double> reference{5.89e-2, 2.57e-2, 1.2e-2, 5.9e-3, 2.93e-3};
    StudyConfig cfg;
    cfg.dts = halving_list(0.1, rows);
    cfg.jobs = jobs;
    const auto start = std::chrono::steady_clock::now();
    const StudyResult r = convergence_study(example1_problem(), cfg);
    const double seconds = seconds_since(start);
    print_table(r);
    const auto q = q_values(r, r.rows.size() > 3 ? r.rows.size() - 3 : 1);
    std::vector<double> ratio;
    for (std::size_t k = 0; k < r.rows.size(); ++k) {
        ratio.push_back(r.rows[k].err_flat / reference[k]);
    }
    const bool q_ok = all_within(q, 0.85, 1.15);
    const bool magnitude_ok = all_within(ratio, 1.0 / 3.0, 3.0);
    report(q_ok && magnitude_ok, "Example 1 order and magnitude",
           "q on last rows " + list(q) + (q_ok ? " in" : " outside") +
               " [0.85, 1.15]; err / reference value " + list(ratio) +
               (magnitude_ok ? " within" : " outside") + " factor 3; " + fmt(seconds, 3) +
               " s (reference " + to_string(cfg.reference) + ")");
}

StudyResult example2_order(int rows, unsigned jobs, bool quick) {
    StudyConfig cfg;
    cfg.dts = halving_list(0.1, rows);
    cfg.jobs = jobs;
    const auto start = std::chrono::steady_clock::now();
    const StudyResult r = convergence_study(example2_problem(), cfg);
    const double seconds = seconds_since(start);
    print_table(r);
    std::vector<double> q;
    for (const auto &row : r.rows) {
        // Quick sweeps stop at 2.5e-2; their last row stands in.
        if (row.dt <= 1.25e-2 + 1e-15 || (quick && &row == &r.rows.back())) {
            q.push_back(row.q.value_or(std::nan("")));
        }
    }
    const double ratio = r.rows[0].err_flat / 7.16e-2;
    const bool q_ok = all_within(q, 0.8, 1.1);
    const bool magnitude_ok = ratio >= 0.5 && ratio <= 2.0;
    report(q_ok && magnitude_ok, "Example 2 order and magnitude",
           "q for dt <= 1.25e-2 " + list(q) + (q_ok ? " in" : " outside") +
               " [0.8, 1.1]; err(0.1) = " + fmt(r.rows[0].err_flat) + ", " + fmt(ratio, 3) +
               "x the reference value" + (magnitude_ok ? " (within 2x); " : " (beyond 2x); ") +
               fmt(seconds, 3) + " s");
    return r;
}

void tv_nonconvergence(const StudyResult &r) {
    std::vector<double> tv;
    for (const auto &row : r.rows) {
        tv.push_back(row.err_tv);
    }
    const double floor = *std::min_element(tv.begin(), tv.end());
    report(floor >= 0.5 * tv.front(), "TV non-convergence (Example 2)",
           "TV column " + list(tv) + ", min / coarsest = " + fmt(floor / tv.front()));
}

void sandwich_suite() {
    std::mt19937_64 rng(101);
    const double extents[] = {0.5, 1.0, 3.0};
    int bad = 0;
    double worst = -1e300;
    for (int trial = 0; trial < 1000; ++trial) {
        const int dim = 1 + trial % 2;
        const double extent = extents[trial % 3];
        const auto a = random_measure(rng, dim, 1 + trial % 20, extent, false);
        const auto b = random_measure(rng, dim, 1 + (trial * 7) % 20, extent, false);
        const double K = joint_bounding_box(a, b).diameter();
        const FlatBracket br = flat_sandwich(a, b, K, W1Options{});
        const double flat = flat_exact_lp(a, b);
        const double violation = std::max(br.lower - flat, flat - br.upper);
        worst = std::max(worst, violation);
        bad += violation > 1e-7 ? 1 : 0;
    }
    report(bad == 0, "Flat sandwich C_K rho <= flat <= rho",
           "1000 random pairs, " + std::to_string(bad) + " violations, worst slack " + fmt(worst));
}

void dirac_suite() {
    std::mt19937_64 rng(202);
    int bad = 0;
    double worst = -1e300;
    for (int trial = 0; trial < 1000; ++trial) {
        const int dim = 1 + trial % 2;
        const std::size_t atoms = 1 + trial % 20;
        const auto a = random_measure(rng, dim, atoms, 2.0, false);
        const auto b = random_measure(rng, dim, atoms, 2.0, false);
        const double gap = flat_exact_lp(a, b) - dirac_upper_bound(a, b);
        worst = std::max(worst, gap);
        bad += gap > 1e-9 ? 1 : 0;
    }
    report(bad == 0, "Dirac bound flat <= sum of paired costs",
           "1000 index-paired pairs, " + std::to_string(bad) + " violations, max(flat - bound) " +
               fmt(worst));
}

void solver_oracles() {
    std::mt19937_64 rng(303);
    double worst_sinkhorn = 0.0;
    int sinkhorn_failures = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int dim = 1 + trial % 2;
        const auto p = random_measure(rng, dim, 1 + trial % 20, 1.0, true);
        const auto q = random_measure(rng, dim, 20 - trial % 20, 1.0, true);
        try {
            worst_sinkhorn =
                std::max(worst_sinkhorn, std::abs(w1_sinkhorn(p, q) - w1_exact_lp(p, q).value));
        } catch (const SinkhornNotConverged &) {
            ++sinkhorn_failures;
        }
    }
    double worst_1d = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = random_measure(rng, 1, 1 + trial % 20, 1.0, true);
        const auto q = random_measure(rng, 1, 1 + (trial * 3) % 20, 1.0, true);
        worst_1d = std::max(worst_1d, std::abs(w1_exact_1d(p, q) - w1_exact_lp(p, q).value));
    }
    report(worst_sinkhorn <= 1e-3 && sinkhorn_failures == 0 && worst_1d <= 1e-8,
           "Transport solver oracle equivalence",
           "max |sinkhorn - lp| = " + fmt(worst_sinkhorn) + " over 200 (" +
               std::to_string(sinkhorn_failures) + " unconverged), max |exact 1d - lp| = " +
               fmt(worst_1d) + " over 200");
}

struct Gap {
    double upper;       ///< rho per population, an upper bound of flat
    double singles_low; ///< C_K rho of the singles, a lower bound of flat
    double paired;      ///< cohort-paired Dirac bound
};

Gap variant_gap(BoundaryRule rule) {
    const Problem p = example1_problem();
    StepConfig cfg;
    cfg.dt = 0.05;
    cfg.substeps = 64;
    const StateMeasures s = to_measures(run(p, Variant::simplified, cfg));
    cfg.boundary_rule = rule;
    const StateMeasures o = to_measures(run(p, Variant::original, cfg));
    const MetricConfig metric;
    const ErrorPair e = measure_error(s, o, metric);
    Gap g{};
    g.upper = e.flat.total();
    const double K = joint_bounding_box(s.male, o.male).diameter();
    g.singles_low = flat_constant(K) * (e.flat.male + e.flat.female);
    g.paired = dirac_upper_bound(s.male, o.male) + dirac_upper_bound(s.female, o.female) +
               dirac_upper_bound(s.couples, o.couples);
    return g;
}

void scheme_equivalence() {
    const Gap moment = variant_gap(BoundaryRule::moment);
    report(std::min(moment.upper, moment.paired) <= 1e-6, "Scheme equivalence (Example 1, dt 0.05)",
           "summed rho = " + fmt(moment.upper) + ", paired bound = " + fmt(moment.paired) +
               ", flat >= " + fmt(moment.singles_low) + " from the singles alone; target 1e-6");
    const Gap edge = variant_gap(BoundaryRule::characteristic);
    info("with characteristic boundary cohorts in the original scheme: summed rho = " +
         fmt(edge.upper) + ", paired bound = " + fmt(edge.paired));
}

void conservation() {
    const Problem p = zero_rate_problem();
    double mass_drift = 0.0;
    double location_drift = 0.0;
    for (Variant v : {Variant::simplified, Variant::original}) {
        StepConfig cfg;
        cfg.dt = 0.05;
        const CohortState start = attach_boundary(init_internal(p, v, cfg.dt));
        const CohortState end = run(p, v, cfg);
        const std::size_t shift = end.size() - start.size();
        for (std::size_t k = 1; k < start.size(); ++k) {
            mass_drift = std::max({mass_drift,
                                   std::abs(end.male_mass()[k + shift] - start.male_mass()[k]),
                                   std::abs(end.female_mass()[k + shift] - start.female_mass()[k])});
            location_drift = std::max(
                {location_drift,
                 std::abs(end.male_location()[k + shift] - start.male_location()[k] - p.horizon),
                 std::abs(end.female_location()[k + shift] - start.female_location()[k] -
                          p.horizon)});
            for (std::size_t l = 1; l < start.size(); ++l) {
                mass_drift = std::max(mass_drift, std::abs(end.couple(k + shift, l + shift) -
                                                           start.couple(k, l)));
                location_drift = std::max(
                    location_drift, std::abs(end.couple_x(k + shift, l + shift) -
                                             start.couple_x(k, l) - p.horizon));
            }
        }
    }
    report(mass_drift <= 1e-12 && location_drift <= 1e-12, "Conservation under zero rates",
           "max cohort mass drift " + fmt(mass_drift) + ", max location error " +
               fmt(location_drift) + " (both variants, dt 0.05, T 1)");
}

void exact_residual() {
    const Problem p = example2_problem();
    const auto &u = p.exact->male;
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> ut(0.01, 0.99);
    constexpr double h = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double t = ut(rng);
        const double x = std::uniform_real_distribution<double>(0.01, t + 0.99)(rng);
        const double dt = (u(t + h, x) - u(t - h, x)) / (2 * h);
        const double dx = (u(t, x + h) - u(t, x - h)) / (2 * h);
        worst = std::max(worst, std::abs(dt + dx + p.rates.male_death(t, x, nullptr) * u(t, x)));
    }
    report(worst <= 1e-3, "Example 2 exact male density residual",
           "max |u_t + u_x + c u| = " + fmt(worst) + " at 100 interior points");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Acceptance report"};
    bool quick = false;
    unsigned jobs = 1;
    app.add_flag("--quick", quick, "three-row sweeps instead of five");
    app.add_option("--jobs", jobs, "maximal concurrent runs per sweep");
    CLI11_PARSE(app, argc, argv);
    const int rows = quick ? 3 : 5;
    if (quick) {
        info("quick mode: sweeps truncated to 3 rows; order criteria use the rows available");
    }
    try {
        example1_order(rows, jobs);
        const StudyResult ex2 = example2_order(rows, jobs, quick);
        tv_nonconvergence(ex2);
        sandwich_suite();
        dirac_suite();
        solver_oracles();
        scheme_equivalence();
        conservation();
        exact_residual();
    } catch (const std::exception &e) {
        std::cout << "acceptance aborted: " << e.what() << std::endl;
        return 2;
    }
    std::cout << passed << "/" << total << " criteria passed" << std::endl;
    return 0;
}
