#ifndef CFSEAM_MAXFLOW_HPP
#define CFSEAM_MAXFLOW_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace cfseam {

/// Blocking-flow (Dinic) max-flow on a graph with explicit source and sink terminals.
///
/// Capacities are doubles; `infinity()` marks an uncuttable edge. Residuals
/// below a tiny fraction of an edge's own capacity count as saturated, so
/// rounding left over from subtraction does not open spurious paths.
/// Neighbor lists are scanned in insertion order, which makes the flow and
/// the returned minimum cut deterministic for a fixed construction order.
class MaxFlow {
 public:
  static constexpr double infinity() { return std::numeric_limits<double>::infinity(); }

  explicit MaxFlow(int nodes) : source_(nodes), sink_(nodes + 1), head_(static_cast<std::size_t>(nodes) + 2, -1) {}

  int source() const { return source_; }
  int sink() const { return sink_; }

  void add_edge(int u, int v, double cap_uv, double cap_vu) {
    const double scale = std::max(cap_uv, cap_vu);
    const double tol = std::isinf(scale) ? 0.0 : scale * kRelativeTolerance;
    push_arc(u, v, cap_uv, tol);
    push_arc(v, u, cap_vu, tol);
  }

  /// Adds source->v with `from_source` and v->sink with `to_sink`.
  void add_terminal(int v, double from_source, double to_sink) {
    if (from_source > 0.0) add_edge(source_, v, from_source, 0.0);
    if (to_sink > 0.0) add_edge(v, sink_, to_sink, 0.0);
  }

  double solve() {
    double flow = 0.0;
    finalize();
    while (build_levels()) {
      cursor_ = first_;
      flow += blocking_flow();
    }
    mark_source_side();
    return flow;
  }

  /// After `solve`, true when `v` is reachable from the source in the residual graph.
  bool source_side(int v) const { return reach_[static_cast<std::size_t>(v)] != 0; }

 private:
  static constexpr double kRelativeTolerance = 1e-12;

  struct Arc {
    int to;
    int next;
    double residual;
    double tol;
  };

  void push_arc(int u, int v, double cap, double tol) {
    arcs_.push_back({v, head_[static_cast<std::size_t>(u)], cap, tol});
    head_[static_cast<std::size_t>(u)] = static_cast<int>(arcs_.size()) - 1;
  }

  bool open(const Arc& a) const { return a.residual > a.tol; }

  // Rebuilds adjacency in insertion order (head_ is a LIFO list).
  void finalize() {
    const std::size_t n = head_.size();
    first_.assign(n, 0);
    adjacency_.clear();
    adjacency_.reserve(arcs_.size());
    std::vector<int> tmp;
    for (std::size_t u = 0; u < n; ++u) {
      first_[u] = static_cast<int>(adjacency_.size());
      tmp.clear();
      for (int e = head_[u]; e >= 0; e = arcs_[static_cast<std::size_t>(e)].next) tmp.push_back(e);
      adjacency_.insert(adjacency_.end(), tmp.rbegin(), tmp.rend());
    }
    first_.push_back(static_cast<int>(adjacency_.size()));
    last_.assign(first_.begin() + 1, first_.end());
    first_.pop_back();
  }

  bool build_levels() {
    level_.assign(head_.size(), -1);
    std::vector<int> queue;
    queue.reserve(head_.size());
    level_[static_cast<std::size_t>(source_)] = 0;
    queue.push_back(source_);
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const int u = queue[qi];
      for (int k = first_[static_cast<std::size_t>(u)]; k < last_[static_cast<std::size_t>(u)]; ++k) {
        const Arc& a = arcs_[static_cast<std::size_t>(adjacency_[static_cast<std::size_t>(k)])];
        if (open(a) && level_[static_cast<std::size_t>(a.to)] < 0) {
          level_[static_cast<std::size_t>(a.to)] = level_[static_cast<std::size_t>(u)] + 1;
          queue.push_back(a.to);
        }
      }
    }
    return level_[static_cast<std::size_t>(sink_)] >= 0;
  }

  // Iterative DFS augmenting along level-increasing arcs until no path remains.
  double blocking_flow() {
    double total = 0.0;
    std::vector<int> path;  // arc ids from the source
    int u = source_;
    while (true) {
      if (u == sink_) {
        double bottleneck = infinity();
        for (int e : path) bottleneck = std::min(bottleneck, arcs_[static_cast<std::size_t>(e)].residual);
        std::size_t cut_at = path.size();
        for (std::size_t i = 0; i < path.size(); ++i) {
          Arc& a = arcs_[static_cast<std::size_t>(path[i])];
          Arc& r = arcs_[static_cast<std::size_t>(path[i] ^ 1)];
          if (!std::isinf(a.residual)) a.residual -= bottleneck;
          if (!std::isinf(r.residual)) r.residual += bottleneck;
          if (!open(a) && cut_at == path.size()) cut_at = i;
        }
        total += bottleneck;
        // Resume from the tail of the first saturated arc.
        path.resize(cut_at);
        u = path.empty() ? source_ : arcs_[static_cast<std::size_t>(path.back())].to;
        continue;
      }
      int& k = cursor_[static_cast<std::size_t>(u)];
      bool advanced = false;
      for (; k < last_[static_cast<std::size_t>(u)]; ++k) {
        const int e = adjacency_[static_cast<std::size_t>(k)];
        const Arc& a = arcs_[static_cast<std::size_t>(e)];
        if (open(a) && level_[static_cast<std::size_t>(a.to)] == level_[static_cast<std::size_t>(u)] + 1) {
          path.push_back(e);
          u = a.to;
          advanced = true;
          break;
        }
      }
      if (advanced) continue;
      if (u == source_) break;
      // Dead end: retire u and step back.
      level_[static_cast<std::size_t>(u)] = -1;
      path.pop_back();
      u = path.empty() ? source_ : arcs_[static_cast<std::size_t>(path.back())].to;
      ++cursor_[static_cast<std::size_t>(u)];
    }
    return total;
  }

  void mark_source_side() {
    reach_.assign(head_.size(), 0);
    std::vector<int> stack{source_};
    reach_[static_cast<std::size_t>(source_)] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int k = first_[static_cast<std::size_t>(u)]; k < last_[static_cast<std::size_t>(u)]; ++k) {
        const Arc& a = arcs_[static_cast<std::size_t>(adjacency_[static_cast<std::size_t>(k)])];
        if (open(a) && !reach_[static_cast<std::size_t>(a.to)]) {
          reach_[static_cast<std::size_t>(a.to)] = 1;
          stack.push_back(a.to);
        }
      }
    }
  }

  int source_;
  int sink_;
  std::vector<int> head_;
  std::vector<Arc> arcs_;
  std::vector<int> adjacency_;
  std::vector<int> first_;
  std::vector<int> last_;
  std::vector<int> cursor_;
  std::vector<int> level_;
  std::vector<std::uint8_t> reach_;
};

}  // namespace cfseam

#endif  // CFSEAM_MAXFLOW_HPP
