// Lattice shortest paths for the metric engine.  Nodes are implicit: an
// integer triple (i, j, k) maps to origin + (i sx, j sy, k st) and lives in a
// hash map only once reached.

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <cstdint>
#include <queue>
#include <unordered_map>

#include "fwq/errors.hpp"
#include "fwq/metric_engine.hpp"

namespace fwq {

namespace {

using Idx = std::array<int, 3>;

constexpr int kBits = 21;
constexpr int kOff = 1 << (kBits - 1);

std::uint64_t pack(const Idx& a) {
  return (std::uint64_t(a[0] + kOff) << (2 * kBits)) | (std::uint64_t(a[1] + kOff) << kBits) |
         std::uint64_t(a[2] + kOff);
}

Idx unpack(std::uint64_t k) {
  const std::uint64_t mask = (1ull << kBits) - 1;
  return {int((k >> (2 * kBits)) & mask) - kOff, int((k >> kBits) & mask) - kOff, int(k & mask) - kOff};
}

struct Node {
  double g;
  std::uint64_t parent;
  bool closed;
};

struct Lattice {
  Vec3 origin;
  Vec3 step;
  Idx lo, hi;  // inclusive index box

  Vec3 at(const Idx& a) const {
    return origin + Vec3(a[0] * step.x(), a[1] * step.y(), a[2] * step.z());
  }
  bool inside(const Idx& a) const {
    for (int c = 0; c < 3; ++c)
      if (a[c] < lo[c] || a[c] > hi[c]) return false;
    return true;
  }
  bool on_rim(const Idx& a) const {
    for (int c = 0; c < 3; ++c)
      if (a[c] == lo[c] || a[c] == hi[c]) return true;
    return false;
  }
};

Vec3 frame_steps(const Vec3& at, const MetricField& m, double h) {
  const Mat3 G = m.tensor_at(at);
  return Vec3(h / std::sqrt(G(0, 0)), h / std::sqrt(G(1, 1)), h);
}

Lattice make_lattice(const Vec3& origin, const Vec3& step, const Vec3& lo, const Vec3& hi) {
  Lattice L{origin, step, {}, {}};
  for (int c = 0; c < 3; ++c) {
    double a = std::floor((lo[c] - origin[c]) / step[c]);
    double b = std::ceil((hi[c] - origin[c]) / step[c]);
    const double lim = double(kOff - 2);
    L.lo[c] = int(std::max(a, -lim));
    L.hi[c] = int(std::min(b, lim));
  }
  return L;
}

const std::array<Idx, 26>& stencil() {
  static const std::array<Idx, 26> s = [] {
    std::array<Idx, 26> out{};
    int n = 0;
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b)
        for (int c = -1; c <= 1; ++c)
          if (a || b || c) out[n++] = {a, b, c};
    return out;
  }();
  return s;
}

struct SearchResult {
  std::vector<Vec3> nodes;  // from the source to the reached target node
  double graph_value;
  bool touched_rim;
};

// Multi-purpose A*: stops at the first closed node accepted by is_goal.
template <class Goal>
SearchResult search(const Lattice& L, const MetricField& m, const GridOptions& opt,
                    const std::function<double(const Vec3&)>& heur, Goal is_goal) {
  using QE = std::pair<double, std::uint64_t>;
  std::priority_queue<QE, std::vector<QE>, std::greater<QE>> open;
  std::unordered_map<std::uint64_t, Node> nodes;
  nodes.reserve(1 << 16);
  const Idx start{0, 0, 0};
  const std::uint64_t sk = pack(start);
  nodes[sk] = {0.0, sk, false};
  open.push({heur ? heur(L.at(start)) : 0.0, sk});
  const bool solv = m.kind() == MetricKind::solv;
  const double LL = m.log_lambda();
  while (!open.empty()) {
    const auto [f, key] = open.top();
    open.pop();
    Node& nd = nodes[key];
    if (nd.closed) continue;
    nd.closed = true;
    const Idx a = unpack(key);
    const Vec3 pa = L.at(a);
    if (is_goal(a, pa)) {
      SearchResult r{{}, nd.g, false};
      std::uint64_t k = key;
      for (;;) {
        const Idx ia = unpack(k);
        r.touched_rim = r.touched_rim || L.on_rim(ia);
        r.nodes.push_back(L.at(ia));
        if (k == sk) break;
        k = nodes[k].parent;
      }
      std::reverse(r.nodes.begin(), r.nodes.end());
      return r;
    }
    const double ga = nd.g;
    for (const Idx& d : stencil()) {
      const Idx b{a[0] + d[0], a[1] + d[1], a[2] + d[2]};
      if (!L.inside(b)) continue;
      const Vec3 v(d[0] * L.step.x(), d[1] * L.step.y(), d[2] * L.step.z());
      double w;
      if (solv) {
        const double e = std::exp(2.0 * (pa.z() + 0.5 * v.z()) * LL);
        w = std::sqrt(v.x() * v.x() / e + e * v.y() * v.y() + v.z() * v.z());
      } else {
        w = m.norm(pa + 0.5 * v, v);
      }
      const double gb = ga + w;
      const std::uint64_t kb = pack(b);
      auto it = nodes.find(kb);
      if (it != nodes.end() && (it->second.closed || it->second.g <= gb)) continue;
      const Vec3 pb = L.at(b);
      if (opt.excluded && opt.excluded(pb)) continue;
      if (nodes.size() >= opt.max_nodes)
        throw Error(Errc::DomainError, "grid search exceeded the node budget of " + std::to_string(opt.max_nodes));
      nodes[kb] = {gb, key, false};
      open.push({gb + (heur ? heur(pb) : 0.0), kb});
    }
  }
  throw Error(Errc::Unreachable, "target not reachable inside the search box");
}

std::function<double(const Vec3&)> yt_bound_to(const Vec3& q, double lambda) {
  return [q, lambda](const Vec3& a) {
    return 0.999 * yt_distance(Vec3(0, a.y(), a.z()), Vec3(0, q.y(), q.z()), lambda);
  };
}

}  // namespace

DistanceResult grid_distance(const Vec3& p, const Vec3& q, const MetricField& m, const GridOptions& opt) {
  DistanceResult res;
  res.grid_h = opt.h;
  res.kappa = opt.kappa;
  res.witness.points = {p, q};
  if (p == q) return res;
  if (!(opt.h > 0)) throw Error(Errc::DomainError, "grid spacing must be positive");

  const Vec3 step = frame_steps(0.5 * (p + q), m, opt.h);
  const auto heur = opt.heuristic ? opt.heuristic : yt_bound_to(q, m.lambda());
  const double est = segment_length(p, q, m, 1e-4);
  Idx target;
  for (int c = 0; c < 3; ++c) target[c] = int(std::lround((q[c] - p[c]) / step[c]));

  double pad = opt.pad_factor * (1.0 + est);
  SearchResult sr;
  for (int attempt = 0;; ++attempt) {
    Vec3 lo, hi;
    if (opt.box) {
      lo = opt.box->lo;
      hi = opt.box->hi;
    } else {
      const Mat3 G = m.tensor_at(0.5 * (p + q));
      const Vec3 padv(pad / std::sqrt(G(0, 0)), pad / std::sqrt(G(1, 1)), pad);
      lo = p.cwiseMin(q) - padv;
      hi = p.cwiseMax(q) + padv;
    }
    const Lattice L = make_lattice(p, step, lo, hi);
    if (!L.inside(target)) throw Error(Errc::BoxTooSmall, "query endpoint lies outside the search box");
    sr = search(L, m, opt, heur, [&](const Idx& a, const Vec3&) { return a == target; });
    if (!sr.touched_rim) break;
    if (attempt == 1 || opt.box) throw Error(Errc::BoxTooSmall, "lattice geodesic touches the search box");
    pad *= 2.0;
  }

  Polyline3 w;
  w.points = sr.nodes;
  const double snap_gap = (w.points.back() - q).norm();
  if (snap_gap > 0) w.points.push_back(q);
  res.graph_value = sr.graph_value + (snap_gap > 0 ? segment_length(sr.nodes.back(), q, m, 1e-4) : 0.0);
  if (opt.refine) w = refine_path(w, m);
  res.witness = w;
  res.value = res.upper_bound = length(w, m);
  res.lower_bound = res.upper_bound / (1.0 + opt.kappa);
  return res;
}

DistanceResult point_to_surface_distance(const Vec3& q, const Surface& s, const MetricField& m,
                                         const GridOptions& opt) {
  DistanceResult res;
  res.grid_h = opt.h;
  res.kappa = opt.kappa;
  if (s.gauge(q) <= 1.0) {
    res.witness.points = {q, q};
    return res;
  }
  const Vec3 step = frame_steps(q, m, opt.h);
  Vec3 lo, hi;
  if (opt.box) {
    lo = opt.box->lo;
    hi = opt.box->hi;
  } else {
    // the flow segment down to the surface is always a competitor
    const Vec2 par = s.param(q);
    const Vec3 foot = s.point(par.x(), par.y());
    const double est = std::abs(q.z() - foot.z()) + 1.0;
    const Mat3 G = m.tensor_at(q);
    const double pad = opt.pad_factor * (1.0 + est);
    const Vec3 padv(pad / std::sqrt(G(0, 0)), pad / std::sqrt(G(1, 1)), pad);
    lo = q - padv;
    hi = q + padv;
  }
  const Lattice L = make_lattice(q, step, lo, hi);
  const SearchResult sr =
      search(L, m, opt, opt.heuristic, [&](const Idx&, const Vec3& x) { return s.gauge(x) <= 1.0; });
  if (sr.touched_rim && !opt.box) throw Error(Errc::BoxTooSmall, "lattice path to the surface touches the search box");

  Polyline3 w;
  w.points = sr.nodes;
  const Vec2 par = s.param(w.points.back());
  w.points.back() = s.point(par.x(), par.y());
  if (w.points.size() < 2) w.points.insert(w.points.begin(), q);
  res.graph_value = length(w, m, 1e-4);
  if (opt.refine) {
    RefineOptions ro;
    ro.end_surface = &s;
    const Polyline3 r = refine_path(w, m, ro);
    if (length(r, m) < res.graph_value) w = r;
  }
  res.witness = w;
  res.value = res.upper_bound = length(w, m);
  res.lower_bound = res.upper_bound / (1.0 + opt.kappa);
  return res;
}

}  // namespace fwq
