#pragma once

#include <cstdint>
#include <vector>

namespace ebt {

/// Primal network simplex for uncapacitated minimum-cost flow with integer
/// supplies and costs.
///
/// Supplies must sum to zero. The spanning tree is stored with parent,
/// thread and successor-count arrays; entering arcs are chosen by block
/// search. Arcs carry no upper bound, which is all transport and
/// transshipment problems need.
class NetworkSimplex {
public:
    enum class Status { optimal, infeasible, unbounded };

    explicit NetworkSimplex(int node_count);

    /// Returns the arc index.
    int add_arc(int source, int target, std::int64_t cost);
    void set_supply(int node, std::int64_t supply);
    void reserve_arcs(std::size_t n);

    Status run();

    int node_count() const noexcept { return node_num_; }
    int arc_count() const noexcept { return arc_num_; }
    std::int64_t flow(int arc) const { return flow_[arc]; }
    /// Dual potential: cost + pi[source] - pi[target] >= 0 at optimum.
    std::int64_t potential(int node) const { return pi_[node]; }
    int arc_source(int arc) const { return source_[arc]; }
    int arc_target(int arc) const { return target_[arc]; }
    std::int64_t arc_cost(int arc) const { return cost_[arc]; }
    long long pivots() const noexcept { return pivots_; }

private:
    void init();
    bool find_entering_arc();
    void find_join_node();
    bool find_leaving_arc();
    void change_flow(bool change);
    void update_tree_structure();
    void update_potential();

    int node_num_;
    int arc_num_ = 0;
    int all_arc_num_ = 0;
    int root_ = 0;

    std::vector<int> source_, target_;
    std::vector<std::int64_t> cost_, flow_;
    std::vector<signed char> state_;
    std::vector<std::int64_t> supply_, pi_;

    std::vector<int> parent_, pred_, thread_, rev_thread_, succ_num_, last_succ_;
    std::vector<signed char> pred_dir_;
    std::vector<int> dirty_revs_;

    int in_arc_ = -1, join_ = -1, u_in_ = -1, v_in_ = -1, u_out_ = -1, v_out_ = -1;
    std::int64_t delta_ = 0;
    int block_size_ = 10;
    int next_arc_ = 0;
    long long pivots_ = 0;
};

} // namespace ebt
