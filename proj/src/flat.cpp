#include "ebt/flat.hpp"

#include "ebt/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ebt {

W1Solver parse_w1_solver(const std::string &name) {
    if (name == "exact-1d") {
        return W1Solver::exact_1d;
    }
    if (name == "exact-lp") {
        return W1Solver::exact_lp;
    }
    if (name == "sinkhorn") {
        return W1Solver::sinkhorn;
    }
    if (name == "graph") {
        return W1Solver::graph;
    }
    throw std::invalid_argument("unknown W1 solver '" + name +
                                "' (expected exact-1d, exact-lp, sinkhorn or graph)");
}

std::string to_string(W1Solver solver) {
    switch (solver) {
    case W1Solver::exact_1d:
        return "exact-1d";
    case W1Solver::exact_lp:
        return "exact-lp";
    case W1Solver::sinkhorn:
        return "sinkhorn";
    case W1Solver::graph:
        return "graph";
    }
    return "unknown";
}

double w1_distance(const AtomicMeasure &p, const AtomicMeasure &q, const W1Options &opts) {
    switch (opts.solver) {
    case W1Solver::exact_1d:
        return w1_exact_1d(p, q);
    case W1Solver::exact_lp:
        return w1_exact_lp(p, q, opts.lp_cap).value;
    case W1Solver::sinkhorn:
        return w1_sinkhorn(p, q, opts.sinkhorn);
    case W1Solver::graph:
        return w1_graph(p, q, opts.graph);
    }
    throw std::logic_error("unreachable W1 solver");
}

double rho_distance(const AtomicMeasure &mu1, const AtomicMeasure &mu2, const W1Options &opts) {
    if (mu1.dim() != mu2.dim()) {
        throw std::invalid_argument("rho_distance: dimension mismatch");
    }
    const AtomicMeasure a = drop_zero_atoms(mu1);
    const AtomicMeasure b = drop_zero_atoms(mu2);
    const double m1 = total_mass(a);
    const double m2 = total_mass(b);
    const double gap = std::abs(m1 - m2);
    if (m1 == 0.0 || m2 == 0.0) {
        return gap;
    }
    return std::min(m1, m2) * w1_distance(normalize(a), normalize(b), opts) + gap;
}

double rho_distance(const AtomicMeasure &mu1, const AtomicMeasure &mu2, W1Solver solver) {
    W1Options opts;
    opts.solver = solver;
    return rho_distance(mu1, mu2, opts);
}

double flat_constant(double diameter) {
    if (!(diameter > 0.0)) {
        throw std::invalid_argument("flat_constant: diameter must be positive");
    }
    return std::min(1.0, 2.0 / diameter) / 3.0;
}

FlatBracket flat_sandwich(const AtomicMeasure &mu1, const AtomicMeasure &mu2, double diameter,
                          const W1Options &opts) {
    const double ck = flat_constant(diameter);
    const double rho = rho_distance(mu1, mu2, opts);
    return {ck * rho, rho};
}

double flat_exact_lp(const AtomicMeasure &mu1, const AtomicMeasure &mu2, std::size_t cap) {
    if (mu1.dim() != mu2.dim()) {
        throw std::invalid_argument("flat_exact_lp: dimension mismatch");
    }
    const AtomicMeasure a = drop_zero_atoms(mu1);
    const AtomicMeasure b = drop_zero_atoms(mu2);
    if (a.size() + b.size() > cap) {
        throw SizeCapExceeded("flat_exact_lp: " + std::to_string(a.size() + b.size()) +
                              " atoms exceed the cap of " + std::to_string(cap));
    }
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    if (n + m == 0) {
        return 0.0;
    }

    // Test functions with |phi| <= 1 are pinned against a ghost node at potential 0
    // joined to every atom by unit-cost arcs; between atoms the cost is min(|x - y|, 2).
    const double scale = static_cast<double>(1LL << 40) / std::max(total_mass(a), total_mass(b));
    const double unit = 1e12 / 2.0;
    const int ghost = n + m;
    NetworkSimplex ns(n + m + 1);
    ns.reserve_arcs(static_cast<std::size_t>(n) * m + n + m);
    long long balance = 0;
    for (int i = 0; i < n; ++i) {
        const long long s = std::llround(a.weight(i) * scale);
        ns.set_supply(i, s);
        balance += s;
        for (int j = 0; j < m; ++j) {
            const double c = std::min(euclidean(a.point(i), b.point(j)), 2.0);
            ns.add_arc(i, n + j, std::llround(c * unit));
        }
        ns.add_arc(i, ghost, std::llround(unit));
    }
    for (int j = 0; j < m; ++j) {
        const long long s = std::llround(b.weight(j) * scale);
        ns.set_supply(n + j, -s);
        balance -= s;
        ns.add_arc(ghost, n + j, std::llround(unit));
    }
    ns.set_supply(ghost, -balance);
    if (ns.run() != NetworkSimplex::Status::optimal) {
        throw std::logic_error("flat_exact_lp: transshipment problem not solved to optimality");
    }

    long double value = 0.0L;
    for (int e = 0; e < ns.arc_count(); ++e) {
        if (ns.flow(e) == 0) {
            continue;
        }
        const int u = ns.arc_source(e);
        const int v = ns.arc_target(e);
        const double c = (u == ghost || v == ghost) ? 1.0
                                                    : std::min(euclidean(a.point(u), b.point(v - n)), 2.0);
        value += static_cast<long double>(ns.flow(e)) * c;
    }
    return static_cast<double>(value / scale);
}

} // namespace ebt
