#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <span>
#include <sstream>
#include <vector>

#include "weakkam/error.hpp"
#include "weakkam/model.hpp"
#include "weakkam/trig_poly.hpp"

namespace wkam {

/// Uniform periodic grid on T^dim with n nodes per coordinate.
struct TorusGrid {
  int dim = 1;
  int n = 8;
  double dx = kTwoPi / 8;
  double dt = 0.1;
  double vmax = 1.0;

  std::size_t node_count() const {
    return dim == 1 ? std::size_t(n) : std::size_t(n) * std::size_t(n);
  }

  // Row-major: the last coordinate varies fastest.
  std::array<int, 2> cell(std::size_t i) const {
    if (dim == 1) return {int(i), 0};
    return {int(i / std::size_t(n)), int(i % std::size_t(n))};
  }

  std::size_t index(std::array<int, 2> c) const {
    auto wrap = [this](int k) { return ((k % n) + n) % n; };
    if (dim == 1) return std::size_t(wrap(c[0]));
    return std::size_t(wrap(c[0])) * std::size_t(n) + std::size_t(wrap(c[1]));
  }

  Vec coord(std::size_t i) const {
    const auto c = cell(i);
    return {c[0] * dx, dim == 2 ? c[1] * dx : 0.0};
  }

  /// Nearest node to an arbitrary point.
  std::size_t nearest(const Vec& x) const {
    std::array<int, 2> c{0, 0};
    for (int d = 0; d < dim; ++d) c[d] = int(std::lround(wrap_angle(x[d]) / dx));
    return index(c);
  }

  /// Integer offsets of the velocity stencil: all minimal periodic
  /// representatives o with |o| dx <= vmax dt. At |o| = n/2 only the
  /// positive representative is kept.
  std::vector<std::array<int, 2>> stencil() const {
    const double radius = vmax * dt * (1.0 + 1e-12);
    const int lo = -((n - 1) / 2);
    const int hi = n / 2;
    std::vector<std::array<int, 2>> out;
    for (int a = lo; a <= hi; ++a) {
      if (dim == 1) {
        if (std::abs(a) * dx <= radius) out.push_back({a, 0});
        continue;
      }
      for (int b = lo; b <= hi; ++b)
        if (std::hypot(a * dx, b * dx) <= radius) out.push_back({a, b});
    }
    return out;
  }
};

inline TorusGrid build_grid(int dim, int n, double dt, double vmax) {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::BadGrid, what); };
  if (dim != 1 && dim != 2) bad("dim must be 1 or 2");
  if (n < 8) bad("n must be at least 8");
  if (!(dt > 0.0)) bad("dt must be positive");
  if (!(vmax > 0.0)) bad("vmax must be positive");
  TorusGrid g{dim, n, kTwoPi / n, dt, vmax};
  if (vmax * dt < g.dx * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "stencil radius vmax*dt = " << vmax * dt << " is below dx = " << g.dx;
    bad(msg.str());
  }
  return g;
}

struct Edge {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  Vec disp{0.0, 0.0};  // minimal periodic displacement x_to - x_from
  Vec vel{0.0, 0.0};   // disp / dt
  double cost = 0.0;   // dt * L(x_to, vel, 0)
};

/// Directed graph carrying the discrete action. Edges are stored sorted by
/// (to, from) so that the incoming edges of a node are contiguous.
class CostGraph {
 public:
  CostGraph() = default;

  CostGraph(int dim, double dx, double dt, std::vector<Vec> coords,
            std::vector<NodeCoupling> coupling, std::vector<Edge> edges)
      : dim_(dim), dx_(dx), dt_(dt), coords_(std::move(coords)),
        coupling_(std::move(coupling)), edges_(std::move(edges)) {
    const std::size_t n = coords_.size();
    if (coupling_.size() != n) throw Error(ErrorKind::BadGrid, "coupling table size mismatch");
    for (const auto& e : edges_)
      if (e.from >= n || e.to >= n) throw Error(ErrorKind::BadGrid, "edge endpoint out of range");
    std::stable_sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
      return a.to != b.to ? a.to < b.to : a.from < b.from;
    });
    in_offsets_.assign(n + 1, 0);
    out_offsets_.assign(n + 1, 0);
    for (const auto& e : edges_) {
      ++in_offsets_[e.to + 1];
      ++out_offsets_[e.from + 1];
    }
    std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());
    std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
    out_edges_.assign(edges_.size(), 0);
    std::vector<std::size_t> fill(out_offsets_.begin(), out_offsets_.end() - 1);
    for (std::size_t k = 0; k < edges_.size(); ++k) out_edges_[fill[edges_[k].from]++] = k;
    max_slope_ = 0.0;
    for (const auto& c : coupling_) max_slope_ = std::max(max_slope_, c.max_slope());
  }

  int dim() const { return dim_; }
  double dx() const { return dx_; }
  double dt() const { return dt_; }
  std::size_t node_count() const { return coords_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const Vec& coord(std::size_t i) const { return coords_[i]; }
  const NodeCoupling& coupling(std::size_t i) const { return coupling_[i]; }
  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(std::size_t k) const { return edges_[k]; }

  /// Incoming edges of j as a range of edge ids [first, last).
  std::pair<std::size_t, std::size_t> in_range(std::size_t j) const {
    return {in_offsets_[j], in_offsets_[j + 1]};
  }
  /// Ids of the outgoing edges of i.
  std::span<const std::size_t> out_edges(std::size_t i) const {
    return std::span<const std::size_t>(out_edges_).subspan(out_offsets_[i],
                                                              out_offsets_[i + 1] - out_offsets_[i]);
  }

  /// max_j (lambda_j + kappa_j * 9/8): bound of -dL/du over the whole graph.
  double max_coupling_slope() const { return max_slope_; }
  double min_lambda() const {
    double m = coupling_.empty() ? 0.0 : coupling_[0].lambda;
    for (const auto& c : coupling_) m = std::min(m, c.lambda);
    return m;
  }

 private:
  int dim_ = 1;
  double dx_ = 1.0;
  double dt_ = 1.0;
  std::vector<Vec> coords_;
  std::vector<NodeCoupling> coupling_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> in_offsets_, out_offsets_, out_edges_;
  double max_slope_ = 0.0;
};

/// Builds the stencil graph with endpoint-rule costs dt * L(x_j, v_ij, 0).
inline CostGraph build_cost_graph(const LagrangianModel& model, const TorusGrid& grid) {
  if (model.dim != grid.dim) throw Error(ErrorKind::BadGrid, "model and grid dimensions differ");
  const std::size_t n = grid.node_count();
  const auto stencil = grid.stencil();
  std::vector<Vec> coords(n);
  std::vector<NodeCoupling> coupling(n);
  for (std::size_t i = 0; i < n; ++i) {
    coords[i] = grid.coord(i);
    coupling[i] = model.coupling_at(coords[i]);
  }
  std::vector<Edge> edges;
  edges.reserve(n * stencil.size());
  for (std::size_t j = 0; j < n; ++j) {
    const auto cj = grid.cell(j);
    for (const auto& o : stencil) {
      Edge e;
      e.to = std::uint32_t(j);
      e.from = std::uint32_t(grid.index({cj[0] - o[0], cj[1] - o[1]}));
      e.disp = {o[0] * grid.dx, o[1] * grid.dx};
      e.vel = {e.disp[0] / grid.dt, e.disp[1] / grid.dt};
      e.cost = grid.dt * eval_L(model, coords[j], e.vel, 0.0);
      edges.push_back(e);
    }
  }
  return CostGraph(grid.dim, grid.dx, grid.dt, std::move(coords), std::move(coupling), std::move(edges));
}

/// Abstract graph with given base costs and couplings; nodes have no geometry.
struct SyntheticEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  double cost = 0.0;
};

inline CostGraph make_synthetic_graph(std::size_t nodes, double dt, const std::vector<SyntheticEdge>& list,
                                      std::vector<NodeCoupling> coupling) {
  std::vector<Vec> coords(nodes, Vec{0.0, 0.0});
  for (std::size_t i = 0; i < nodes; ++i) coords[i][0] = double(i);
  std::vector<Edge> edges;
  edges.reserve(list.size());
  for (const auto& s : list) {
    Edge e;
    e.from = std::uint32_t(s.from);
    e.to = std::uint32_t(s.to);
    e.cost = s.cost;
    edges.push_back(e);
  }
  return CostGraph(1, 1.0, dt, std::move(coords), std::move(coupling), std::move(edges));
}

/// True when every node reaches every other (one forward and one backward BFS).
inline bool strongly_connected(const CostGraph& g) {
  const std::size_t n = g.node_count();
  if (n == 0) return true;
  auto sweep = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::deque<std::size_t> queue{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      auto visit = [&](std::size_t k) {
        if (!seen[k]) {
          seen[k] = 1;
          ++count;
          queue.push_back(k);
        }
      };
      if (forward) {
        for (std::size_t id : g.out_edges(i)) visit(g.edge(id).to);
      } else {
        auto [lo, hi] = g.in_range(i);
        for (std::size_t id = lo; id < hi; ++id) visit(g.edge(id).from);
      }
    }
    return count == n;
  };
  return sweep(true) && sweep(false);
}

}  // namespace wkam
