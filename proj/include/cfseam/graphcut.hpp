#ifndef CFSEAM_GRAPHCUT_HPP
#define CFSEAM_GRAPHCUT_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfseam/core.hpp"
#include "cfseam/maxflow.hpp"

namespace cfseam {

/// Data cost that pins a pixel to the opposite label.
inline constexpr double kHardCost = 1e9;

/// Label 0 takes the reference image, label 1 the target.
enum Label : std::uint8_t { kReference = 0, kTarget = 1 };

/// Pairwise cost `weight * |l_p - l_q|` between two 4-adjacent nodes.
struct EnergyEdge {
  int p;
  int q;
  double weight;
};

/// Binary labeling energy over the overlap pixels: unary data costs plus
/// a cut cost on 4-adjacent pairs.
struct EnergyModel {
  Rect box;
  std::vector<Pixel> nodes;
  std::vector<double> data0;
  std::vector<double> data1;
  std::vector<EnergyEdge> edges;

  std::size_t size() const { return nodes.size(); }
};

/// Per-overlap-pixel labels stored over the overlap bounding box.
class Labeling {
 public:
  Labeling() = default;
  explicit Labeling(Rect box, std::uint8_t fill = kReference) : box_(box), labels_(box.area(), fill) {}

  const Rect& box() const { return box_; }
  std::uint8_t operator[](Pixel p) const { return labels_[box_.index(p)]; }
  std::uint8_t& operator[](Pixel p) { return labels_[box_.index(p)]; }
  const std::vector<std::uint8_t>& labels() const { return labels_; }

  friend bool operator==(const Labeling&, const Labeling&) = default;

 private:
  Rect box_;
  std::vector<std::uint8_t> labels_;
};

/// One seam crossing: 4-adjacent overlap pixels with p labeled 0 and q labeled 1.
struct Crossing {
  Pixel p;
  Pixel q;
  /// Connected cut component this crossing belongs to, in traversal order.
  int component = 0;

  friend bool operator==(const Crossing& a, const Crossing& b) { return a.p == b.p && a.q == b.q; }
};

/// Ordered cut; a crossing's position in `crossings` is its arc-length index.
struct Seam {
  std::vector<Crossing> crossings;

  std::size_t size() const { return crossings.size(); }
  bool empty() const { return crossings.empty(); }

  /// Distinct pixels touched by the seam (all p_i and q_i), row-major sorted.
  std::vector<Pixel> pixels() const {
    std::vector<Pixel> out;
    out.reserve(crossings.size() * 2);
    for (const Crossing& c : crossings) {
      out.push_back(c.p);
      out.push_back(c.q);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

// ---------------------------------------------------------------------------
// Energy
// ---------------------------------------------------------------------------

/// Builds the seam-cutting energy from a cost map.
///
/// Overlap pixels 4-adjacent to reference-only pixels are pinned to label 0,
/// those adjacent to target-only pixels to label 1. When neither exclusive
/// region touches the overlap (coincident footprints), the first and last
/// overlap bounding-box columns are pinned instead (rows if the box is one
/// column wide).
inline EnergyModel build_energy(const DifferenceMap& diff, const OverlapRegion& region) {
  if (diff.box() != region.bbox) throw Error(ErrorCode::DimensionMismatch, "difference map does not cover the overlap");

  EnergyModel m;
  m.box = region.bbox;
  m.nodes = region.pixels;
  m.data0.assign(m.nodes.size(), 0.0);
  m.data1.assign(m.nodes.size(), 0.0);

  bool any_forced = false;
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    const Pixel p = m.nodes[i];
    bool to_reference = false;
    bool to_target = false;
    for (const Pixel& d : kNeighbors4) {
      const Pixel n{p.x + d.x, p.y + d.y};
      if (!region.canvas.contains(n)) continue;
      to_reference = to_reference || region.reference_only[n] != 0;
      to_target = to_target || region.target_only[n] != 0;
    }
    if (to_reference && to_target) {
      throw Error(ErrorCode::ConstraintConflict,
                  "overlap pixel (" + std::to_string(p.x) + "," + std::to_string(p.y) + ") touches both exclusive regions");
    }
    if (to_reference) m.data1[i] = kHardCost;
    if (to_target) m.data0[i] = kHardCost;
    any_forced = any_forced || to_reference || to_target;
  }

  if (!any_forced) {
    const Rect& b = region.bbox;
    const bool by_columns = b.width >= 2;
    if (by_columns || b.height >= 2) {
      for (std::size_t i = 0; i < m.nodes.size(); ++i) {
        const Pixel p = m.nodes[i];
        const int pos = by_columns ? p.x - b.x : p.y - b.y;
        const int last = by_columns ? b.width - 1 : b.height - 1;
        if (pos == 0) m.data1[i] = kHardCost;
        if (pos == last) m.data0[i] = kHardCost;
      }
    }
  }

  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    const Pixel p = m.nodes[i];
    for (const Pixel& d : {Pixel{1, 0}, Pixel{0, 1}}) {
      const Pixel q{p.x + d.x, p.y + d.y};
      if (!region.in_overlap(q)) continue;
      const int j = region.index[q];
      m.edges.push_back({static_cast<int>(i), j, 0.5 * (diff[p] + diff[q])});
    }
  }
  return m;
}

/// Energy of per-node labels (indexed like `model.nodes`).
inline double energy(const EnergyModel& model, std::span<const std::uint8_t> node_labels) {
  double e = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) e += node_labels[i] ? model.data1[i] : model.data0[i];
  for (const EnergyEdge& edge : model.edges) {
    if (node_labels[static_cast<std::size_t>(edge.p)] != node_labels[static_cast<std::size_t>(edge.q)]) e += edge.weight;
  }
  return e;
}

inline std::vector<std::uint8_t> node_labels(const EnergyModel& model, const Labeling& labeling) {
  std::vector<std::uint8_t> out(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) out[i] = labeling[model.nodes[i]];
  return out;
}

inline double energy(const EnergyModel& model, const Labeling& labeling) {
  const auto labels = node_labels(model, labeling);
  return energy(model, std::span<const std::uint8_t>(labels));
}

/// Globally optimal labeling via s-t min cut. Nodes left on the source side
/// of the minimal residual cut take label 0. Data costs at or above
/// `kHardCost` are treated as uncuttable.
inline Labeling min_cut(const EnergyModel& model) {
  const int n = static_cast<int>(model.size());
  for (int i = 0; i < n; ++i) {
    if (model.data0[static_cast<std::size_t>(i)] >= kHardCost && model.data1[static_cast<std::size_t>(i)] >= kHardCost) {
      const Pixel p = model.nodes[static_cast<std::size_t>(i)];
      throw Error(ErrorCode::ConstraintConflict,
                  "node (" + std::to_string(p.x) + "," + std::to_string(p.y) + ") is pinned to both labels");
    }
  }

  auto capacity = [](double c) { return c >= kHardCost ? MaxFlow::infinity() : c; };
  MaxFlow flow(n);
  for (int i = 0; i < n; ++i) {
    // Source side = label 0, so s->i is cut when i takes label 1.
    double c1 = model.data1[static_cast<std::size_t>(i)];
    double c0 = model.data0[static_cast<std::size_t>(i)];
    if (c0 < kHardCost && c1 < kHardCost) {
      const double shared = std::min(c0, c1);
      c0 -= shared;
      c1 -= shared;
    }
    flow.add_terminal(i, capacity(c1), capacity(c0));
  }
  for (const EnergyEdge& e : model.edges) {
    if (e.weight > 0.0) flow.add_edge(e.p, e.q, e.weight, e.weight);
  }
  flow.solve();

  Labeling labeling(model.box);
  for (int i = 0; i < n; ++i) {
    labeling[model.nodes[static_cast<std::size_t>(i)]] = flow.source_side(i) ? kReference : kTarget;
  }
  return labeling;
}

// ---------------------------------------------------------------------------
// Seam extraction
// ---------------------------------------------------------------------------

namespace detail {

// Cut segments live on the corner lattice of the bounding box: corner (cx, cy)
// is the top-left corner of pixel (box.x + cx, box.y + cy).
enum Dir { kDown = 0, kRight = 1, kLeft = 2, kUp = 3 };

}  // namespace detail

/// Collects every label-discontinuous 4-adjacent overlap pair and orders
/// them by walking the cut on the dual (corner) lattice.
///
/// Components are visited in order of their smallest (row, column) endpoint,
/// each starting there. A walk prefers down, right, left, up at junctions;
/// branches left behind are walked afterwards from their own smallest endpoint.
inline Seam extract_seam(const Labeling& labeling, const OverlapRegion& region) {
  using namespace detail;
  const Rect& box = region.bbox;
  if (labeling.box() != box) throw Error(ErrorCode::DimensionMismatch, "labeling does not cover the overlap");

  struct Segment {
    Crossing crossing;
    int a;  // corner ids
    int b;
  };
  const int cw = box.width + 1;
  auto corner = [&](int cx, int cy) { return cy * cw + cx; };

  std::vector<Segment> segments;
  for (const Pixel& p : region.pixels) {
    for (const Pixel& d : {Pixel{1, 0}, Pixel{0, 1}}) {
      const Pixel q{p.x + d.x, p.y + d.y};
      if (!region.in_overlap(q) || labeling[p] == labeling[q]) continue;
      Crossing c = labeling[p] == kReference ? Crossing{p, q, 0} : Crossing{q, p, 0};
      const int cx = p.x - box.x;
      const int cy = p.y - box.y;
      if (d.x == 1) {
        segments.push_back({c, corner(cx + 1, cy), corner(cx + 1, cy + 1)});
      } else {
        segments.push_back({c, corner(cx, cy + 1), corner(cx + 1, cy + 1)});
      }
    }
  }
  if (segments.empty()) throw Error(ErrorCode::EmptySeam, "labeling is constant over the overlap");

  const std::size_t corners = static_cast<std::size_t>(cw) * static_cast<std::size_t>(box.height + 1);
  std::vector<std::array<int, 4>> at(corners, {-1, -1, -1, -1});
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const int a = segments[s].a;
    const int b = segments[s].b;
    // b is always right of or below a.
    const bool vertical = b - a == cw;
    at[static_cast<std::size_t>(a)][vertical ? kDown : kRight] = static_cast<int>(s);
    at[static_cast<std::size_t>(b)][vertical ? kUp : kLeft] = static_cast<int>(s);
  }

  std::vector<std::uint8_t> used(segments.size(), 0);
  auto remaining_degree = [&](int v) {
    int d = 0;
    for (int s : at[static_cast<std::size_t>(v)]) d += (s >= 0 && !used[static_cast<std::size_t>(s)]) ? 1 : 0;
    return d;
  };

  // Component labels over segments.
  std::vector<int> comp(segments.size(), -1);
  int ncomp = 0;
  for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
    if (comp[s0] >= 0) continue;
    std::vector<int> stack{static_cast<int>(s0)};
    comp[s0] = ncomp;
    while (!stack.empty()) {
      const Segment& seg = segments[static_cast<std::size_t>(stack.back())];
      stack.pop_back();
      for (int v : {seg.a, seg.b}) {
        for (int t : at[static_cast<std::size_t>(v)]) {
          if (t >= 0 && comp[static_cast<std::size_t>(t)] < 0) {
            comp[static_cast<std::size_t>(t)] = ncomp;
            stack.push_back(t);
          }
        }
      }
    }
    ++ncomp;
  }

  // Smallest-endpoint key per component: odd-degree corners first, any corner for closed loops.
  std::vector<std::pair<int, int>> order;  // (start corner, component)
  {
    std::vector<int> best_end(static_cast<std::size_t>(ncomp), -1);
    std::vector<int> best_any(static_cast<std::size_t>(ncomp), -1);
    for (std::size_t s = 0; s < segments.size(); ++s) {
      const int c = comp[s];
      for (int v : {segments[s].a, segments[s].b}) {
        int& any = best_any[static_cast<std::size_t>(c)];
        if (any < 0 || v < any) any = v;
        if (remaining_degree(v) % 2 == 1) {
          int& end = best_end[static_cast<std::size_t>(c)];
          if (end < 0 || v < end) end = v;
        }
      }
    }
    for (int c = 0; c < ncomp; ++c) {
      const int key = best_end[static_cast<std::size_t>(c)] >= 0 ? best_end[static_cast<std::size_t>(c)]
                                                                  : best_any[static_cast<std::size_t>(c)];
      order.emplace_back(key, c);
    }
    // Corner ids are row-major, so comparing ids compares (row, column).
    std::sort(order.begin(), order.end());
  }

  Seam seam;
  seam.crossings.reserve(segments.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const auto [start, c] = order[rank];
    std::vector<int> members;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      if (comp[s] == c) members.push_back(static_cast<int>(s));
    }
    int v = start;
    std::size_t left = members.size();
    while (left > 0) {
      // Walk until stuck.
      while (true) {
        int next = -1;
        for (int dir = 0; dir < 4; ++dir) {
          const int s = at[static_cast<std::size_t>(v)][static_cast<std::size_t>(dir)];
          if (s >= 0 && !used[static_cast<std::size_t>(s)]) {
            next = s;
            break;
          }
        }
        if (next < 0) break;
        used[static_cast<std::size_t>(next)] = 1;
        --left;
        Crossing cr = segments[static_cast<std::size_t>(next)].crossing;
        cr.component = static_cast<int>(rank);
        seam.crossings.push_back(cr);
        const Segment& seg = segments[static_cast<std::size_t>(next)];
        v = seg.a == v ? seg.b : seg.a;
      }
      if (left == 0) break;
      // Restart from the smallest corner with unused segments, preferring odd remaining degree.
      int odd = -1;
      int any = -1;
      for (int s : members) {
        if (used[static_cast<std::size_t>(s)]) continue;
        for (int u : {segments[static_cast<std::size_t>(s)].a, segments[static_cast<std::size_t>(s)].b}) {
          if (any < 0 || u < any) any = u;
          if (remaining_degree(u) % 2 == 1 && (odd < 0 || u < odd)) odd = u;
        }
      }
      v = odd >= 0 ? odd : any;
    }
  }
  return seam;
}

}  // namespace cfseam

#endif  // CFSEAM_GRAPHCUT_HPP
