#include "ebt/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ebt {

namespace {

constexpr signed char state_tree = 0;
constexpr signed char state_lower = 1;
constexpr signed char dir_up = 1;
constexpr signed char dir_down = -1;
constexpr std::int64_t infinite_flow = std::numeric_limits<std::int64_t>::max();

} // namespace

NetworkSimplex::NetworkSimplex(int node_count) : node_num_{node_count} {
    if (node_count <= 0) {
        throw std::invalid_argument("network simplex needs at least one node");
    }
    supply_.assign(node_num_ + 1, 0);
}

void NetworkSimplex::reserve_arcs(std::size_t n) {
    source_.reserve(n + node_num_);
    target_.reserve(n + node_num_);
    cost_.reserve(n + node_num_);
}

int NetworkSimplex::add_arc(int source, int target, std::int64_t cost) {
    if (source < 0 || source >= node_num_ || target < 0 || target >= node_num_) {
        throw std::out_of_range("network simplex arc endpoint out of range");
    }
    if (cost < 0) {
        throw std::invalid_argument("network simplex arcs must have nonnegative cost");
    }
    source_.push_back(source);
    target_.push_back(target);
    cost_.push_back(cost);
    return arc_num_++;
}

void NetworkSimplex::set_supply(int node, std::int64_t supply) { supply_.at(node) = supply; }

void NetworkSimplex::init() {
    std::int64_t sum = 0;
    for (int u = 0; u < node_num_; ++u) {
        sum += supply_[u];
    }
    if (sum != 0) {
        throw std::invalid_argument("network simplex supplies must sum to zero");
    }

    all_arc_num_ = arc_num_ + node_num_;
    root_ = node_num_;
    const int n1 = node_num_ + 1;
    source_.resize(all_arc_num_);
    target_.resize(all_arc_num_);
    cost_.resize(all_arc_num_);
    flow_.assign(all_arc_num_, 0);
    state_.assign(all_arc_num_, state_lower);
    pi_.assign(n1, 0);
    parent_.assign(n1, -1);
    pred_.assign(n1, -1);
    thread_.assign(n1, 0);
    rev_thread_.assign(n1, 0);
    succ_num_.assign(n1, 0);
    last_succ_.assign(n1, 0);
    pred_dir_.assign(n1, dir_up);

    std::int64_t max_cost = 0;
    for (int e = 0; e < arc_num_; ++e) {
        max_cost = std::max(max_cost, cost_[e]);
    }
    // Big-M for artificial arcs; any path of real arcs is cheaper.
    const std::int64_t art_cost = (max_cost + 1) * static_cast<std::int64_t>(node_num_);
    if (max_cost > 0 && art_cost / node_num_ != max_cost + 1) {
        throw std::overflow_error("network simplex costs too large");
    }

    parent_[root_] = -1;
    pred_[root_] = -1;
    thread_[root_] = 0;
    rev_thread_[0] = root_;
    succ_num_[root_] = node_num_ + 1;
    last_succ_[root_] = root_ - 1;
    supply_[root_] = 0;
    pi_[root_] = 0;

    for (int u = 0, e = arc_num_; u != node_num_; ++u, ++e) {
        parent_[u] = root_;
        pred_[u] = e;
        thread_[u] = u + 1;
        rev_thread_[u + 1] = u;
        succ_num_[u] = 1;
        last_succ_[u] = u;
        state_[e] = state_tree;
        if (supply_[u] >= 0) {
            pred_dir_[u] = dir_up;
            pi_[u] = 0;
            source_[e] = u;
            target_[e] = root_;
            flow_[e] = supply_[u];
            cost_[e] = 0;
        } else {
            pred_dir_[u] = dir_down;
            pi_[u] = art_cost;
            source_[e] = root_;
            target_[e] = u;
            flow_[e] = -supply_[u];
            cost_[e] = art_cost;
        }
    }

    block_size_ = std::max(10, static_cast<int>(std::ceil(std::sqrt(double(arc_num_)))));
    next_arc_ = 0;
}

bool NetworkSimplex::find_entering_arc() {
    if (arc_num_ == 0) {
        return false;
    }
    std::int64_t min = 0;
    int cnt = block_size_;
    int e = next_arc_;
    for (int scanned = 0; scanned < arc_num_; ++scanned) {
        const std::int64_t c = state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]);
        if (c < min) {
            min = c;
            in_arc_ = e;
        }
        if (++e == arc_num_) {
            e = 0;
        }
        if (--cnt == 0) {
            if (min < 0) {
                break;
            }
            cnt = block_size_;
        }
    }
    if (min >= 0) {
        return false;
    }
    next_arc_ = e;
    return true;
}

void NetworkSimplex::find_join_node() {
    int u = source_[in_arc_];
    int v = target_[in_arc_];
    while (u != v) {
        if (succ_num_[u] < succ_num_[v]) {
            u = parent_[u];
        } else {
            v = parent_[v];
        }
    }
    join_ = u;
}

bool NetworkSimplex::find_leaving_arc() {
    // Entering arcs are always at their lower bound (no upper bounds exist).
    const int first = source_[in_arc_];
    const int second = target_[in_arc_];
    delta_ = infinite_flow;
    int result = 0;

    // Flow runs from the join node down to `first`.
    for (int u = first; u != join_; u = parent_[u]) {
        const std::int64_t d = pred_dir_[u] == dir_up ? flow_[pred_[u]] : infinite_flow;
        if (d < delta_) {
            delta_ = d;
            u_out_ = u;
            result = 1;
        }
    }
    // Flow runs from `second` up to the join node.
    for (int u = second; u != join_; u = parent_[u]) {
        const std::int64_t d = pred_dir_[u] == dir_down ? flow_[pred_[u]] : infinite_flow;
        if (d <= delta_) {
            delta_ = d;
            u_out_ = u;
            result = 2;
        }
    }

    if (result == 1) {
        u_in_ = first;
        v_in_ = second;
    } else {
        u_in_ = second;
        v_in_ = first;
    }
    return result != 0;
}

void NetworkSimplex::change_flow(bool change) {
    if (delta_ > 0) {
        const std::int64_t val = delta_;
        flow_[in_arc_] += val;
        for (int u = source_[in_arc_]; u != join_; u = parent_[u]) {
            flow_[pred_[u]] -= pred_dir_[u] * val;
        }
        for (int u = target_[in_arc_]; u != join_; u = parent_[u]) {
            flow_[pred_[u]] += pred_dir_[u] * val;
        }
    }
    if (change) {
        state_[in_arc_] = state_tree;
        state_[pred_[u_out_]] = state_lower;
    }
}

void NetworkSimplex::update_tree_structure() {
    const int old_rev_thread = rev_thread_[u_out_];
    const int old_succ_num = succ_num_[u_out_];
    const int old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];

    if (u_in_ == u_out_) {
        parent_[u_in_] = v_in_;
        pred_[u_in_] = in_arc_;
        pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? dir_up : dir_down;

        if (thread_[v_in_] != u_out_) {
            int after = thread_[old_last_succ];
            thread_[old_rev_thread] = after;
            rev_thread_[after] = old_rev_thread;
            after = thread_[v_in_];
            thread_[v_in_] = u_out_;
            rev_thread_[u_out_] = v_in_;
            thread_[old_last_succ] = after;
            rev_thread_[after] = old_last_succ;
        }
    } else {
        const int thread_continue =
            old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];

        // Re-hang the stem nodes between u_in and u_out.
        int stem = u_in_;
        int par_stem = v_in_;
        int next_stem = 0;
        int last = last_succ_[u_in_];
        int before = 0;
        int after = thread_[last];
        thread_[v_in_] = u_in_;
        dirty_revs_.clear();
        dirty_revs_.push_back(v_in_);
        while (stem != u_out_) {
            next_stem = parent_[stem];
            thread_[last] = next_stem;
            dirty_revs_.push_back(last);

            before = rev_thread_[stem];
            thread_[before] = after;
            rev_thread_[after] = before;

            parent_[stem] = par_stem;
            par_stem = stem;
            stem = next_stem;

            last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem]
                                                            : last_succ_[stem];
            after = thread_[last];
        }
        parent_[u_out_] = par_stem;
        thread_[last] = thread_continue;
        rev_thread_[thread_continue] = last;
        last_succ_[u_out_] = last;

        if (old_rev_thread != v_in_) {
            thread_[old_rev_thread] = after;
            rev_thread_[after] = old_rev_thread;
        }

        for (int u : dirty_revs_) {
            rev_thread_[thread_[u]] = u;
        }

        int tmp_sc = 0;
        const int tmp_ls = last_succ_[u_out_];
        for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
            pred_[u] = pred_[p];
            pred_dir_[u] = static_cast<signed char>(-pred_dir_[p]);
            tmp_sc += succ_num_[u] - succ_num_[p];
            succ_num_[u] = tmp_sc;
            last_succ_[p] = tmp_ls;
        }
        pred_[u_in_] = in_arc_;
        pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? dir_up : dir_down;
        succ_num_[u_in_] = old_succ_num;
    }

    const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
    const int last_succ_out = last_succ_[u_out_];
    for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) {
        last_succ_[u] = last_succ_out;
    }

    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
        for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
            last_succ_[u] = old_rev_thread;
        }
    } else if (last_succ_out != old_last_succ) {
        for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
            last_succ_[u] = last_succ_out;
        }
    }

    for (int u = v_in_; u != join_; u = parent_[u]) {
        succ_num_[u] += old_succ_num;
    }
    for (int u = v_out_; u != join_; u = parent_[u]) {
        succ_num_[u] -= old_succ_num;
    }
}

void NetworkSimplex::update_potential() {
    const std::int64_t sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost_[in_arc_];
    const int end = thread_[last_succ_[u_in_]];
    for (int u = u_in_; u != end; u = thread_[u]) {
        pi_[u] += sigma;
    }
}

NetworkSimplex::Status NetworkSimplex::run() {
    init();
    pivots_ = 0;
    while (find_entering_arc()) {
        find_join_node();
        const bool change = find_leaving_arc();
        if (delta_ == infinite_flow) {
            return Status::unbounded;
        }
        change_flow(change);
        if (change) {
            update_tree_structure();
            update_potential();
        }
        ++pivots_;
    }
    for (int e = arc_num_; e != all_arc_num_; ++e) {
        if (flow_[e] != 0) {
            return Status::infeasible;
        }
    }
    return Status::optimal;
}

} // namespace ebt
