#ifndef BISTOCH_COUPLING_HPP
#define BISTOCH_COUPLING_HPP

#include <algorithm>
#include <deque>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bistoch/linalg.hpp"
#include "bistoch/scalar.hpp"

namespace bistoch {

// Zero-diagonal nonnegative matrix with both marginals equal to p.
template <typename S>
struct CouplingMatrix {
  Matrix<S> q;
  std::vector<S> p;

  int size() const { return static_cast<int>(p.size()); }
};

template <typename S>
struct CouplingResult {
  std::optional<CouplingMatrix<S>> coupling;
  int violating_index = -1;  // index with p[i] > 1/2 when infeasible

  bool feasible() const { return coupling.has_value(); }
};

namespace detail {
template <typename S>
void require_probability_vector(const std::vector<S>& p) {
  if (p.size() < 2) throw std::invalid_argument("need at least two points");
  S total = ScalarTraits<S>::zero();
  for (const S& v : p) {
    if (v < ScalarTraits<S>::zero()) throw std::invalid_argument("negative probability entry");
    total += v;
  }
  if (!approx_equal(total, ScalarTraits<S>::one()))
    throw std::invalid_argument("entries do not sum to 1");
}

template <typename S>
int heaviest_index(const std::vector<S>& p) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(p.size()); ++i)
    if (p[i] > p[best]) best = i;
  return best;
}

// Edmonds-Karp with a fixed node order; exact over Rat, and over double each
// augmentation zeroes its bottleneck edge exactly, so termination is safe.
template <typename S>
class MaxFlow {
 public:
  explicit MaxFlow(int nodes) : graph_(nodes) {}

  void add_edge(int from, int to, const S& cap) {
    graph_[from].push_back({to, cap, static_cast<int>(graph_[to].size())});
    graph_[to].push_back({from, ScalarTraits<S>::zero(), static_cast<int>(graph_[from].size()) - 1});
  }

  S run(int source, int sink) {
    S total = ScalarTraits<S>::zero();
    while (true) {
      std::vector<int> prev_node(graph_.size(), -1), prev_edge(graph_.size(), -1);
      std::deque<int> queue{source};
      prev_node[source] = source;
      while (!queue.empty() && prev_node[sink] < 0) {
        const int x = queue.front();
        queue.pop_front();
        for (int e = 0; e < static_cast<int>(graph_[x].size()); ++e) {
          const Edge& edge = graph_[x][e];
          if (prev_node[edge.to] < 0 && edge.cap > ScalarTraits<S>::zero()) {
            prev_node[edge.to] = x;
            prev_edge[edge.to] = e;
            queue.push_back(edge.to);
          }
        }
      }
      if (prev_node[sink] < 0) return total;
      S bottleneck = graph_[prev_node[sink]][prev_edge[sink]].cap;
      for (int v = sink; v != source; v = prev_node[v])
        bottleneck = std::min(bottleneck, graph_[prev_node[v]][prev_edge[v]].cap);
      for (int v = sink; v != source; v = prev_node[v]) {
        Edge& edge = graph_[prev_node[v]][prev_edge[v]];
        edge.cap -= bottleneck;
        graph_[edge.to][edge.rev].cap += bottleneck;
      }
      total += bottleneck;
    }
  }

  // Flow pushed along from->to equals the reverse edge capacity.
  S flow_between(int from, int to) const {
    for (const Edge& edge : graph_[from])
      if (edge.to == to) return graph_[to][edge.rev].cap;
    return ScalarTraits<S>::zero();
  }

 private:
  struct Edge {
    int to;
    S cap;
    int rev;
  };
  std::vector<std::vector<Edge>> graph_;
};
}  // namespace detail

// A zero-diagonal coupling with marginals p exists iff no single entry
// exceeds half of the total mass: row i must fit into column budget 1 - p[i].
template <typename S>
bool feasibility_check(const std::vector<S>& p) {
  detail::require_probability_vector(p);
  const S half = ScalarTraits<S>::fraction(1, 2);
  const S tol = ScalarTraits<S>::tolerance();
  for (const S& v : p)
    if (v > half + tol) return false;
  return true;
}

// Deterministic solver. Uniform vectors take the symmetric-seed path
// q[i][j] = p_i / (k-1) off-diagonal; everything else goes through max-flow
// on the bipartite graph with the diagonal removed.
template <typename S>
CouplingResult<S> solve_coupling(const std::vector<S>& p) {
  detail::require_probability_vector(p);
  CouplingResult<S> result;
  if (!feasibility_check(p)) {
    result.violating_index = detail::heaviest_index(p);
    return result;
  }
  const int k = static_cast<int>(p.size());
  bool uniform = true;
  for (int i = 1; i < k; ++i)
    if (!(p[i] == p[0])) uniform = false;

  CouplingMatrix<S> coupling{zero_matrix<S>(k, k), p};
  if (uniform) {
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (i != j) coupling.q[i][j] = p[i] / ScalarTraits<S>::fraction(k - 1, 1);
    result.coupling = std::move(coupling);
    return result;
  }

  const int source = 0, sink = 2 * k + 1;
  detail::MaxFlow<S> flow(2 * k + 2);
  const S uncapped = ScalarTraits<S>::fraction(2, 1);  // above any feasible amount
  for (int i = 0; i < k; ++i) flow.add_edge(source, 1 + i, p[i]);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j) flow.add_edge(1 + i, 1 + k + j, uncapped);
  for (int j = 0; j < k; ++j) flow.add_edge(1 + k + j, sink, p[j]);
  const S value = flow.run(source, sink);
  if (!approx_equal(value, ScalarTraits<S>::one()))
    throw std::logic_error("max-flow failed on a feasible coupling instance");
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j) coupling.q[i][j] = flow.flow_between(1 + i, 1 + k + j);
  result.coupling = std::move(coupling);
  return result;
}

enum class BlockPolicy { AcceptResidual, Grow };

template <typename S>
struct CouplingBlock {
  std::vector<int> members;        // indices into the caller's weight list
  std::vector<S> weights;          // conditional weights, normalized within the block
  CouplingMatrix<S> coupling;
};

template <typename S>
struct BlockSystem {
  std::vector<CouplingBlock<S>> blocks;
  std::vector<int> residual;        // indices the perturbation leaves fixed
  S residual_mass = ScalarTraits<S>::zero();
  bool grow_requested = false;      // set under BlockPolicy::Grow when nothing groups
};

// Greedy grouping in descending weight order. A block closes as soon as it
// has min_block members and its heaviest member is covered by the rest; the
// light tail that cannot stand alone is folded into the last closed block,
// which stays feasible because tail weights never exceed block weights. When
// no block can form at all the whole index set becomes residual.
template <typename S>
BlockSystem<S> block_builder(const std::vector<S>& weights, int min_block,
                             BlockPolicy policy = BlockPolicy::AcceptResidual) {
  if (min_block < 2) throw std::invalid_argument("min_block must be >= 2");
  const int n = static_cast<int>(weights.size());
  S total = ScalarTraits<S>::zero();
  for (const S& w : weights) {
    if (!(w > ScalarTraits<S>::zero())) throw std::invalid_argument("weights must be positive");
    total += w;
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return weights[a] > weights[b]; });

  BlockSystem<S> system;
  std::vector<std::vector<int>> groups;
  std::vector<int> current;
  S cur_sum = ScalarTraits<S>::zero();
  S cur_max = ScalarTraits<S>::zero();
  for (int idx : order) {
    current.push_back(idx);
    cur_sum += weights[idx];
    cur_max = std::max(cur_max, weights[idx]);
    const bool feasible = cur_sum - cur_max >= cur_max - ScalarTraits<S>::tolerance();
    if (static_cast<int>(current.size()) >= min_block && feasible) {
      groups.push_back(std::move(current));
      current.clear();
      cur_sum = ScalarTraits<S>::zero();
      cur_max = ScalarTraits<S>::zero();
    }
  }
  if (!current.empty()) {
    if (!groups.empty()) {
      auto& last = groups.back();
      last.insert(last.end(), current.begin(), current.end());
    } else {
      system.residual = std::move(current);
      std::sort(system.residual.begin(), system.residual.end());
      for (int idx : system.residual) system.residual_mass += weights[idx] / total;
      system.grow_requested = (policy == BlockPolicy::Grow);
      return system;
    }
  }

  for (auto& members : groups) {
    std::sort(members.begin(), members.end());
    CouplingBlock<S> block;
    block.members = members;
    S mass = ScalarTraits<S>::zero();
    for (int idx : members) mass += weights[idx];
    for (int idx : members) block.weights.push_back(weights[idx] / mass);
    auto solved = solve_coupling(block.weights);
    if (!solved.feasible())
      throw std::logic_error("block_builder closed an infeasible block");
    block.coupling = std::move(*solved.coupling);
    system.blocks.push_back(std::move(block));
  }
  return system;
}

}  // namespace bistoch

#endif  // BISTOCH_COUPLING_HPP
