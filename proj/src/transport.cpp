#include "ebt/transport.hpp"

#include "ebt/network_simplex.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace ebt {

namespace {

constexpr long long supply_scale = 1LL << 40;

void require_probability(const AtomicMeasure &mu, const char *who) {
    const double m = total_mass(mu);
    if (std::abs(m - 1.0) > probability_tol) {
        throw std::invalid_argument(std::string(who) + ": input must be a probability measure (mass " +
                                    std::to_string(m) + ")");
    }
}

void require_same_dim(const AtomicMeasure &p, const AtomicMeasure &q, const char *who) {
    if (p.dim() != q.dim()) {
        throw std::invalid_argument(std::string(who) + ": dimension mismatch");
    }
}

std::vector<std::size_t> nonzero_atoms(const AtomicMeasure &mu) {
    std::vector<std::size_t> idx;
    idx.reserve(mu.size());
    for (std::size_t k = 0; k < mu.size(); ++k) {
        if (mu.weight(k) > 0.0) {
            idx.push_back(k);
        }
    }
    return idx;
}

std::vector<double> gather_weights(const AtomicMeasure &mu, const std::vector<std::size_t> &idx) {
    std::vector<double> w(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        w[k] = mu.weight(idx[k]);
    }
    return w;
}

/// Integer cost unit such that node_count * max_cost stays far from overflow.
double cost_unit(double max_cost, std::size_t node_count) {
    const double cap = std::min(1e12, 1e17 / static_cast<double>(std::max<std::size_t>(node_count, 1)));
    return max_cost > 0.0 ? cap / max_cost : 1.0;
}

std::int64_t quantize_cost(double c, double unit) { return std::llround(c * unit); }

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

std::vector<std::array<int, 2>> stencil_directions(int dim, int radius) {
    std::vector<std::array<int, 2>> dirs;
    if (dim == 1) {
        dirs.push_back({1, 0});
        dirs.push_back({-1, 0});
        return dirs;
    }
    for (int a = -radius; a <= radius; ++a) {
        for (int b = -radius; b <= radius; ++b) {
            if ((a != 0 || b != 0) && std::gcd(std::abs(a), std::abs(b)) == 1) {
                dirs.push_back({a, b});
            }
        }
    }
    return dirs;
}

} // namespace

std::vector<double> TransportPlan::row_sums() const {
    std::vector<double> s(rows, 0.0);
    for (const auto &e : entries) {
        s[e.row] += e.mass;
    }
    return s;
}

std::vector<double> TransportPlan::col_sums() const {
    std::vector<double> s(cols, 0.0);
    for (const auto &e : entries) {
        s[e.col] += e.mass;
    }
    return s;
}

double TransportPlan::total_cost() const {
    long double sum = 0.0L;
    for (const auto &e : entries) {
        sum += static_cast<long double>(e.mass) * e.cost;
    }
    return static_cast<double>(sum);
}

void SinkhornConfig::validate() const {
    if (!(epsilon_start > 0.0) || !(epsilon_final > 0.0)) {
        throw std::invalid_argument("sinkhorn: epsilons must be positive");
    }
    if (epsilon_final > epsilon_start) {
        throw std::invalid_argument("sinkhorn: epsilon_final exceeds epsilon_start");
    }
    if (!(epsilon_decay > 0.0 && epsilon_decay < 1.0)) {
        throw std::invalid_argument("sinkhorn: epsilon_decay must lie in (0, 1)");
    }
    if (!(marginal_tol > 0.0)) {
        throw std::invalid_argument("sinkhorn: marginal_tol must be positive");
    }
    if (max_iters <= 0) {
        throw std::invalid_argument("sinkhorn: max_iters must be positive");
    }
}

std::vector<long long> quantize_masses(const std::vector<double> &w, long long total) {
    const long double sum = std::accumulate(w.begin(), w.end(), 0.0L);
    std::vector<long long> out(w.size(), 0);
    if (w.empty() || !(sum > 0.0L)) {
        return out;
    }
    std::vector<std::pair<long double, std::size_t>> frac(w.size());
    long long assigned = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const long double exact = static_cast<long double>(w[k]) / sum * total;
        const long double fl = std::floor(exact);
        out[k] = static_cast<long long>(fl);
        assigned += out[k];
        frac[k] = {exact - fl, k};
    }
    std::stable_sort(frac.begin(), frac.end(),
                     [](const auto &a, const auto &b) { return a.first > b.first; });
    for (long long r = total - assigned, k = 0; r > 0; --r, ++k) {
        ++out[frac[static_cast<std::size_t>(k) % frac.size()].second];
    }
    return out;
}

double w1_exact_1d(const AtomicMeasure &p, const AtomicMeasure &q) {
    require_same_dim(p, q, "w1_exact_1d");
    if (p.dim() != 1) {
        throw std::invalid_argument("w1_exact_1d: measures must be one-dimensional");
    }
    require_probability(p, "w1_exact_1d");
    require_probability(q, "w1_exact_1d");

    // Signed jumps of F_p - F_q at each location, swept left to right.
    std::vector<std::pair<double, double>> events;
    events.reserve(p.size() + q.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        events.emplace_back(p.coord(k, 0), p.weight(k));
    }
    for (std::size_t k = 0; k < q.size(); ++k) {
        events.emplace_back(q.coord(k, 0), -q.weight(k));
    }
    std::sort(events.begin(), events.end());
    long double diff = 0.0L;
    long double w1 = 0.0L;
    for (std::size_t k = 0; k + 1 < events.size(); ++k) {
        diff += events[k].second;
        w1 += std::abs(diff) * (events[k + 1].first - events[k].first);
    }
    return static_cast<double>(w1);
}

TransportResult w1_exact_lp(const AtomicMeasure &p, const AtomicMeasure &q, std::size_t cap) {
    require_same_dim(p, q, "w1_exact_lp");
    require_probability(p, "w1_exact_lp");
    require_probability(q, "w1_exact_lp");
    if (p.size() * q.size() > cap) {
        throw SizeCapExceeded("w1_exact_lp: " + std::to_string(p.size()) + " x " +
                              std::to_string(q.size()) + " entries exceed the cap of " +
                              std::to_string(cap) + "; use the Sinkhorn or graph solver");
    }

    const auto rows = nonzero_atoms(p);
    const auto cols = nonzero_atoms(q);
    const auto n = static_cast<int>(rows.size());
    const auto m = static_cast<int>(cols.size());

    std::vector<double> cost(static_cast<std::size_t>(n) * m);
    double max_cost = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const double c = euclidean(p.point(rows[i]), q.point(cols[j]));
            cost[static_cast<std::size_t>(i) * m + j] = c;
            max_cost = std::max(max_cost, c);
        }
    }

    const auto a = quantize_masses(gather_weights(p, rows), supply_scale);
    const auto b = quantize_masses(gather_weights(q, cols), supply_scale);
    const double unit = cost_unit(max_cost, static_cast<std::size_t>(n + m));

    NetworkSimplex ns(n + m);
    ns.reserve_arcs(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        ns.set_supply(i, a[i]);
        for (int j = 0; j < m; ++j) {
            ns.add_arc(i, n + j, quantize_cost(cost[static_cast<std::size_t>(i) * m + j], unit));
        }
    }
    for (int j = 0; j < m; ++j) {
        ns.set_supply(n + j, -b[j]);
    }
    if (ns.run() != NetworkSimplex::Status::optimal) {
        throw std::logic_error("w1_exact_lp: transportation problem not solved to optimality");
    }

    TransportResult result;
    result.plan.rows = p.size();
    result.plan.cols = q.size();
    for (int e = 0; e < ns.arc_count(); ++e) {
        if (ns.flow(e) > 0) {
            const int i = ns.arc_source(e);
            const int j = ns.arc_target(e) - n;
            result.plan.entries.push_back({rows[i], cols[j],
                                           static_cast<double>(ns.flow(e)) / supply_scale,
                                           cost[static_cast<std::size_t>(i) * m + j]});
        }
    }
    result.value = result.plan.total_cost();
    return result;
}

double w1_sinkhorn(const AtomicMeasure &p, const AtomicMeasure &q, const SinkhornConfig &cfg) {
    cfg.validate();
    require_same_dim(p, q, "w1_sinkhorn");
    require_probability(p, "w1_sinkhorn");
    require_probability(q, "w1_sinkhorn");

    const auto rows = nonzero_atoms(p);
    const auto cols = nonzero_atoms(q);
    const std::size_t n = rows.size();
    const std::size_t m = cols.size();
    const double mass_p = total_mass(p);
    const double mass_q = total_mass(q);

    std::vector<double> cost(n * m);
    double max_cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double c = euclidean(p.point(rows[i]), q.point(cols[j]));
            cost[i * m + j] = c;
            max_cost = std::max(max_cost, c);
        }
    }
    if (max_cost == 0.0) {
        return 0.0;
    }

    std::vector<double> a(n), b(m), log_a(n), log_b(m);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = p.weight(rows[i]) / mass_p;
        log_a[i] = std::log(a[i]);
    }
    for (std::size_t j = 0; j < m; ++j) {
        b[j] = q.weight(cols[j]) / mass_q;
        log_b[j] = std::log(b[j]);
    }

    const double scale = cfg.relative_to_max_cost ? max_cost : 1.0;
    const double eps_final = cfg.epsilon_final * scale;
    double eps = cfg.epsilon_start * scale;

    // Plan: gamma_ij = exp((f_i + g_j - c_ij) / eps).
    std::vector<double> f(n, 0.0), g(m, 0.0), row_lse(n), buf(std::max(n, m));

    auto log_sum_exp = [&](std::size_t len) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < len; ++k) {
            mx = std::max(mx, buf[k]);
        }
        double s = 0.0;
        for (std::size_t k = 0; k < len; ++k) {
            s += std::exp(buf[k] - mx);
        }
        return mx + std::log(s);
    };

    // One sweep: f-update (returning the row residual of the incoming state), then g-update.
    auto sweep = [&](double e) {
        double residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                buf[j] = (g[j] - cost[i * m + j]) / e;
            }
            const double lse = log_sum_exp(m);
            residual = std::max(residual, std::abs(std::exp(f[i] / e + lse) - a[i]));
            f[i] = e * (log_a[i] - lse);
        }
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                buf[i] = (f[i] - cost[i * m + j]) / e;
            }
            g[j] = e * (log_b[j] - log_sum_exp(n));
        }
        return residual;
    };

    long iters = 0;
    const double stage_tol = std::max(cfg.marginal_tol, 1e-6);
    while (true) {
        const bool final_stage = eps <= eps_final;
        if (final_stage) {
            eps = eps_final;
        }
        const double tol = final_stage ? cfg.marginal_tol : stage_tol;
        double residual = std::numeric_limits<double>::infinity();
        // The first sweep's residual describes the state left by the previous stage.
        bool first = true;
        while (iters < cfg.max_iters) {
            residual = sweep(eps);
            ++iters;
            if (!first && residual <= tol) {
                break;
            }
            first = false;
        }
        if (final_stage) {
            if (residual > tol) {
                throw SinkhornNotConverged("w1_sinkhorn: marginal residual " +
                                               std::to_string(residual) + " after " +
                                               std::to_string(iters) + " iterations",
                                           residual, eps);
            }
            break;
        }
        if (iters >= cfg.max_iters) {
            throw SinkhornNotConverged("w1_sinkhorn: iteration budget spent before final epsilon",
                                       residual, eps);
        }
        eps = std::max(eps * cfg.epsilon_decay, eps_final);
    }

    long double value = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double c = cost[i * m + j];
            value += c * std::exp((f[i] + g[j] - c) / eps);
        }
    }
    return static_cast<double>(value);
}

double graph_distortion_bound(int radius) {
    if (radius < 1) {
        throw std::invalid_argument("graph stencil radius must be at least 1");
    }
    std::vector<double> angles;
    for (const auto &d : stencil_directions(2, radius)) {
        angles.push_back(std::atan2(d[1], d[0]));
    }
    std::sort(angles.begin(), angles.end());
    double gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
    for (std::size_t k = 1; k < angles.size(); ++k) {
        gap = std::max(gap, angles[k] - angles[k - 1]);
    }
    return 1.0 / std::cos(gap / 2.0);
}

double w1_graph(const AtomicMeasure &p, const AtomicMeasure &q, const GraphW1Config &cfg) {
    require_same_dim(p, q, "w1_graph");
    require_probability(p, "w1_graph");
    require_probability(q, "w1_graph");
    if (cfg.radius < 1) {
        throw std::invalid_argument("w1_graph: radius must be at least 1");
    }
    const int dim = p.dim();

    struct Node {
        double x, y;
        long long cell;
    };
    std::vector<Node> nodes;
    std::vector<double> wp, wq;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p.weight(k) > 0.0) {
            nodes.push_back({p.coord(k, 0), dim == 2 ? p.coord(k, 1) : 0.0, 0});
            wp.push_back(p.weight(k));
        }
    }
    const std::size_t n_p = nodes.size();
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (q.weight(k) > 0.0) {
            nodes.push_back({q.coord(k, 0), dim == 2 ? q.coord(k, 1) : 0.0, 0});
            wq.push_back(q.weight(k));
        }
    }
    const auto n_nodes = static_cast<int>(nodes.size());

    const BoundingBox box = joint_bounding_box(p, q);
    const double wx = box.hi[0] - box.lo[0];
    const double wy = box.hi[1] - box.lo[1];
    if (wx == 0.0 && wy == 0.0) {
        return 0.0;
    }

    double h = cfg.spacing;
    if (!(h > 0.0)) {
        h = dim == 1 ? 2.0 * wx / n_nodes
                     : std::sqrt(2.0 * std::max(wx * wy, 1e-300) / n_nodes);
        h = std::max(h, std::max(wx, wy) / 4096.0);
    }
    auto cells_along = [&](double w) { return static_cast<long long>(std::floor(w / h)) + 1; };
    while (cells_along(wx) * cells_along(wy) > 50'000'000LL) {
        h *= 2.0;
    }
    const long long nx = cells_along(wx);
    const long long ny = cells_along(wy);
    auto cell_of = [&](double x, double y) {
        const long long ix = std::min(nx - 1, static_cast<long long>(std::floor((x - box.lo[0]) / h)));
        const long long iy = std::min(ny - 1, static_cast<long long>(std::floor((y - box.lo[1]) / h)));
        return iy * nx + ix;
    };
    for (auto &nd : nodes) {
        nd.cell = cell_of(nd.x, nd.y);
    }

    std::vector<int> order(n_nodes);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return nodes[a].cell < nodes[b].cell; });
    std::vector<int> cell_start(static_cast<std::size_t>(nx * ny) + 1, 0);
    for (const auto &nd : nodes) {
        ++cell_start[nd.cell + 1];
    }
    for (std::size_t c = 1; c < cell_start.size(); ++c) {
        cell_start[c] += cell_start[c - 1];
    }

    auto dist = [&](int u, int v) { return std::hypot(nodes[u].x - nodes[v].x, nodes[u].y - nodes[v].y); };

    std::vector<std::pair<int, int>> arcs;
    const auto dirs = stencil_directions(dim, cfg.radius);
    for (long long c = 0; c < nx * ny; ++c) {
        const int b0 = cell_start[c];
        const int b1 = cell_start[c + 1];
        if (b0 == b1) {
            continue;
        }
        for (int s = b0; s < b1; ++s) {
            for (int t = b0; t < b1; ++t) {
                if (s != t) {
                    arcs.emplace_back(order[s], order[t]);
                }
            }
        }
        const long long cx = c % nx;
        const long long cy = c / nx;
        for (const auto &d : dirs) {
            for (long long k = 1;; ++k) {
                const long long tx = cx + k * d[0];
                const long long ty = cy + k * d[1];
                if (tx < 0 || ty < 0 || tx >= nx || ty >= ny) {
                    break;
                }
                const long long tc = ty * nx + tx;
                if (cell_start[tc] == cell_start[tc + 1]) {
                    continue;
                }
                for (int s = b0; s < b1; ++s) {
                    for (int t = cell_start[tc]; t < cell_start[tc + 1]; ++t) {
                        arcs.emplace_back(order[s], order[t]);
                    }
                }
                break;
            }
        }
    }

    // Bridge components that the stencil left apart with their closest atom pair.
    UnionFind uf(n_nodes);
    int components = n_nodes;
    for (const auto &[u, v] : arcs) {
        if (uf.unite(u, v)) {
            --components;
        }
    }
    while (components > 1) {
        const int root = uf.find(0);
        double best = std::numeric_limits<double>::infinity();
        int bu = -1, bv = -1;
        for (int u = 0; u < n_nodes; ++u) {
            if (uf.find(u) != root) {
                continue;
            }
            for (int v = 0; v < n_nodes; ++v) {
                if (uf.find(v) != root) {
                    const double dd = dist(u, v);
                    if (dd < best) {
                        best = dd;
                        bu = u;
                        bv = v;
                    }
                }
            }
        }
        arcs.emplace_back(bu, bv);
        arcs.emplace_back(bv, bu);
        uf.unite(bu, bv);
        --components;
    }

    double max_cost = 0.0;
    for (const auto &[u, v] : arcs) {
        max_cost = std::max(max_cost, dist(u, v));
    }
    const double unit = cost_unit(max_cost, static_cast<std::size_t>(n_nodes));

    NetworkSimplex ns(n_nodes);
    ns.reserve_arcs(arcs.size());
    for (const auto &[u, v] : arcs) {
        ns.add_arc(u, v, quantize_cost(dist(u, v), unit));
    }
    arcs.clear();
    arcs.shrink_to_fit();
    const auto a = quantize_masses(wp, supply_scale);
    const auto b = quantize_masses(wq, supply_scale);
    for (std::size_t k = 0; k < n_p; ++k) {
        ns.set_supply(static_cast<int>(k), a[k]);
    }
    for (std::size_t k = 0; k < wq.size(); ++k) {
        ns.set_supply(static_cast<int>(n_p + k), -b[k]);
    }
    if (ns.run() != NetworkSimplex::Status::optimal) {
        throw std::logic_error("w1_graph: flow problem not solved to optimality");
    }
    long double value = 0.0L;
    for (int e = 0; e < ns.arc_count(); ++e) {
        if (ns.flow(e) > 0) {
            value += static_cast<long double>(ns.flow(e)) * dist(ns.arc_source(e), ns.arc_target(e));
        }
    }
    return static_cast<double>(value / supply_scale);
}

} // namespace ebt
