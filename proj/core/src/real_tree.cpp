#include "ctree/real_tree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <json.hpp>
#include <limits>

#include "ctree/error.hpp"

namespace ctree {

PiecewiseLinear PiecewiseLinear::from_grid(const PathGrid& g) {
  PiecewiseLinear f;
  f.times.resize(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) f.times[k] = g.dt * static_cast<double>(k);
  f.values = g.values;
  return f;
}

double PiecewiseLinear::value_at(double t) const {
  if (times.empty() || t < times.front() || t > times.back()) return 0.0;
  if (t == times.back()) return values.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
  if (t == times[i]) return values[i];
  double w = (t - times[i]) / (times[i + 1] - times[i]);
  return values[i] + w * (values[i + 1] - values[i]);
}

CodedTree::CodedTree(PiecewiseLinear g) : g_(std::move(g)) {
  if (g_.times.size() != g_.values.size() || g_.times.empty())
    throw Error(ErrorCode::OutOfRange, "coding function needs matching, nonempty breakpoints");
  sparse_.push_back(g_.values);
  for (std::size_t w = 1; 2 * w <= g_.values.size(); w *= 2) {
    const auto& prev = sparse_.back();
    std::vector<double> level(prev.size() - w);
    for (std::size_t i = 0; i < level.size(); ++i) level[i] = std::min(prev[i], prev[i + w]);
    sparse_.push_back(std::move(level));
  }
}

double CodedTree::breakpoint_min(std::size_t lo, std::size_t hi) const {
  std::size_t len = hi - lo + 1;
  int k = std::bit_width(len) - 1;
  return std::min(sparse_[k][lo], sparse_[k][hi + 1 - (std::size_t{1} << k)]);
}

double CodedTree::min_between(double s, double t) const {
  if (s > t) std::swap(s, t);
  double m = std::min(g_.value_at(s), g_.value_at(t));
  const auto& ts = g_.times;
  std::size_t lo = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), s) - ts.begin());
  std::size_t hi = static_cast<std::size_t>(std::lower_bound(ts.begin(), ts.end(), t) - ts.begin());
  if (lo < hi) m = std::min(m, breakpoint_min(lo, hi - 1));
  return m;
}

double CodedTree::distance(double s, double t) const {
  return g_.value_at(s) + g_.value_at(t) - 2.0 * min_between(s, t);
}

namespace {

void check_time(double span, double t) {
  if (!(t >= 0 && t <= span)) throw Error(ErrorCode::OutOfRange, "time outside the coding interval");
}

}  // namespace

double d_g(const PathGrid& g, double s, double t) {
  check_time(g.span(), s);
  check_time(g.span(), t);
  if (s > t) std::swap(s, t);
  double m = std::min(g.value_at(s), g.value_at(t));
  auto k0 = static_cast<std::size_t>(std::floor(s / g.dt)) + 1;
  for (std::size_t k = k0; k < g.size() && g.dt * static_cast<double>(k) < t; ++k) m = std::min(m, g.values[k]);
  return g.value_at(s) + g.value_at(t) - 2.0 * m;
}

double d_g(const PiecewiseLinear& g, double s, double t) {
  check_time(g.span(), s);
  check_time(g.span(), t);
  return CodedTree(g).distance(s, t);
}

PiecewiseLinear reroot(const PiecewiseLinear& g, double s0) {
  const double sigma = g.span();
  check_time(sigma, s0);
  if (g.times.front() != 0.0 || g.values.front() != 0.0 || g.values.back() != 0.0)
    throw Error(ErrorCode::OutOfRange, "re-rooting needs g(0) = g(span) = 0");
  const double g0 = g.value_at(s0);
  const auto& ts = g.times;
  const auto& vs = g.values;
  std::vector<std::pair<double, double>> pts;  // (s, g'(s))

  // Forward: r in [s0, sigma], s = r - s0, running minimum over [s0, r].
  {
    double m = g0, rp = s0, vp = g0;
    pts.emplace_back(0.0, 0.0);
    for (std::size_t i = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), s0) - ts.begin());
         i < ts.size(); ++i) {
      if (vp > m && vs[i] < m) {
        double rc = rp + (m - vp) / (vs[i] - vp) * (ts[i] - rp);
        pts.emplace_back(rc - s0, g0 - m);
      }
      m = std::min(m, vs[i]);
      pts.emplace_back(ts[i] - s0, g0 + vs[i] - 2.0 * m);
      rp = ts[i];
      vp = vs[i];
    }
  }
  // Backward: r in [0, s0), s = r + sigma - s0, minimum over [r, s0].
  std::vector<std::pair<double, double>> back;
  {
    double m = g0, rp = s0, vp = g0;
    std::size_t end = static_cast<std::size_t>(std::lower_bound(ts.begin(), ts.end(), s0) - ts.begin());
    for (std::size_t i = end; i-- > 0;) {
      if (vp > m && vs[i] < m) {
        double rc = rp + (m - vp) / (vs[i] - vp) * (ts[i] - rp);
        back.emplace_back(rc + sigma - s0, g0 - m);
      }
      m = std::min(m, vs[i]);
      back.emplace_back(ts[i] + sigma - s0, g0 + vs[i] - 2.0 * m);
      rp = ts[i];
      vp = vs[i];
    }
  }
  std::reverse(back.begin(), back.end());
  pts.insert(pts.end(), back.begin(), back.end());
  pts.emplace_back(sigma, 0.0);

  PiecewiseLinear out;
  for (const auto& [s, v] : pts) {
    if (!out.times.empty() && s <= out.times.back()) continue;
    out.times.push_back(s);
    out.values.push_back(v);
  }
  return out;
}

PiecewiseLinear reroot(const PathGrid& g, double s0) { return reroot(PiecewiseLinear::from_grid(g), s0); }

double MarkedTree::total_length() const {
  double l = 0;
  for (double h : marks) l += h;
  return l;
}

std::string to_json(const MarkedTree& tree) {
  nlohmann::json j;
  j["skeleton"] = to_text(tree.skeleton);
  j["marks"] = tree.marks;
  return j.dump();
}

MarkedTree marked_tree_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidTree, std::string("bad marked-tree JSON: ") + e.what());
  }
  if (!j.contains("skeleton") || !j.contains("marks"))
    throw Error(ErrorCode::InvalidTree, "marked tree needs 'skeleton' and 'marks'");
  MarkedTree t;
  t.skeleton = parse_tree(j["skeleton"].get<std::string>());
  t.marks = j["marks"].get<std::vector<double>>();
  if (t.marks.size() != t.skeleton.size()) throw Error(ErrorCode::InvalidTree, "one mark per vertex is required");
  for (double h : t.marks)
    if (!(h >= 0)) throw Error(ErrorCode::InvalidTree, "marks must be nonnegative");
  return t;
}

MarkedTree extract_marked_tree(const CodedTree& g, std::span<const double> times) {
  const std::size_t p = times.size();
  if (p == 0) throw Error(ErrorCode::OutOfRange, "at least one time is needed");
  for (std::size_t i = 0; i < p; ++i) {
    check_time(g.function().span(), times[i]);
    if (i && times[i] < times[i - 1]) throw Error(ErrorCode::OutOfRange, "times must be sorted");
  }
  std::vector<double> value(p), link(p ? p - 1 : 0);
  for (std::size_t i = 0; i < p; ++i) value[i] = g.value(times[i]);
  for (std::size_t i = 0; i + 1 < p; ++i) link[i] = g.min_between(times[i], times[i + 1]);

  std::vector<int> counts;
  std::vector<double> marks;
  auto build = [&](auto&& self, std::size_t lo, std::size_t hi, double base) -> void {
    if (lo == hi) {
      counts.push_back(0);
      marks.push_back(value[lo] - base);
      return;
    }
    double m = *std::min_element(link.begin() + static_cast<std::ptrdiff_t>(lo),
                                 link.begin() + static_cast<std::ptrdiff_t>(hi));
    std::size_t self_at = counts.size();
    counts.push_back(0);
    marks.push_back(m - base);
    std::size_t start = lo;
    for (std::size_t i = lo; i < hi; ++i) {
      if (link[i] == m) {
        ++counts[self_at];
        self(self, start, i, m);
        start = i + 1;
      }
    }
    ++counts[self_at];
    self(self, start, hi, m);
  };
  build(build, 0, p - 1, 0.0);
  return {OrderedTree::from_counts(std::move(counts)), std::move(marks)};
}

MarkedTree extract_marked_tree(const PathGrid& g, std::span<const double> times) {
  return extract_marked_tree(CodedTree(g), times);
}

FiniteRootedMetric metric_from_marked_tree(const MarkedTree& tree, bool include_branch_points) {
  const auto& sk = tree.skeleton;
  const std::size_t n = sk.size();
  std::vector<std::size_t> parent(n, n);
  std::vector<double> top(n, 0.0);
  std::vector<int> depth(n, 0);
  {
    std::vector<std::pair<std::size_t, int>> stack;  // (vertex, children left)
    top[0] = tree.marks[0];
    stack.emplace_back(0, sk.children(0));
    for (std::size_t v = 1; v < n; ++v) {
      while (stack.back().second == 0) stack.pop_back();
      --stack.back().second;
      std::size_t u = stack.back().first;
      parent[v] = u;
      depth[v] = depth[u] + 1;
      top[v] = top[u] + tree.marks[v];
      stack.emplace_back(v, sk.children(v));
    }
  }
  std::vector<std::size_t> pts;
  for (std::size_t v = 0; v < n; ++v)
    if (sk.children(v) == 0) pts.push_back(v);
  if (include_branch_points)
    for (std::size_t v = 0; v < n; ++v)
      if (sk.children(v) > 0) pts.push_back(v);

  auto lca_top = [&](std::size_t a, std::size_t b) {
    while (a != b) {
      if (depth[a] >= depth[b]) a = parent[a];
      else b = parent[b];
    }
    return top[a];
  };
  FiniteRootedMetric m;
  const std::size_t k = pts.size() + 1;
  m.distance.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    m.distance[0][i + 1] = m.distance[i + 1][0] = top[pts[i]];
    for (std::size_t j = 0; j < i; ++j) {
      double d = top[pts[i]] + top[pts[j]] - 2.0 * lca_top(pts[i], pts[j]);
      m.distance[i + 1][j + 1] = m.distance[j + 1][i + 1] = d;
    }
  }
  return m;
}

FiniteRootedMetric metric_from_coded(const CodedTree& g, std::span<const double> times) {
  std::vector<double> ts{0.0};
  ts.insert(ts.end(), times.begin(), times.end());
  FiniteRootedMetric m;
  m.distance.assign(ts.size(), std::vector<double>(ts.size(), 0.0));
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) m.distance[i][j] = m.distance[j][i] = g.distance(ts[i], ts[j]);
  return m;
}

std::string to_csv(const FiniteRootedMetric& m) {
  std::string s;
  for (const auto& row : m.distance) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) s += ',';
      s += format_double(row[j]);
    }
    s += '\n';
  }
  return s;
}

bool satisfies_triangle(const FiniteRootedMetric& m, std::size_t i, std::size_t j, std::size_t k) {
  return m(i, k) <= m(i, j) + m(j, k);
}

bool satisfies_four_point(const FiniteRootedMetric& m, std::size_t x, std::size_t y, std::size_t z,
                          std::size_t w) {
  double a = m(x, y) + m(z, w), b = m(x, z) + m(y, w), c = m(x, w) + m(y, z);
  // The two largest of the three sums coincide.
  double hi = std::max({a, b, c});
  double lo = std::min({a, b, c});
  double mid = a + b + c - hi - lo;
  return mid == hi;
}

double gh_upper_bound(const PiecewiseLinear& g, const PiecewiseLinear& h) {
  std::vector<double> ts = g.times;
  ts.insert(ts.end(), h.times.begin(), h.times.end());
  double sup = 0;
  for (double t : ts) sup = std::max(sup, std::abs(g.value_at(t) - h.value_at(t)));
  return 2.0 * sup;
}

double gh_upper_bound(const PathGrid& g, const PathGrid& h) {
  return gh_upper_bound(PiecewiseLinear::from_grid(g), PiecewiseLinear::from_grid(h));
}

double distortion(const FiniteRootedMetric& a, const FiniteRootedMetric& b, const Relation& r) {
  double d = 0;
  for (const auto& [x, y] : r)
    for (const auto& [u, v] : r) d = std::max(d, std::abs(a(x, u) - b(y, v)));
  return d;
}

namespace {

// Is there a correspondence containing the root pair with distortion <= delta?
// Every point of A picks a partner, then every point of B not yet covered
// picks one; all chosen pairs must be mutually compatible.
bool correspondence_within(const FiniteRootedMetric& a, const FiniteRootedMetric& b, double delta) {
  const std::size_t na = a.size(), nb = b.size();
  Relation chosen{{a.root, b.root}};
  std::vector<int> covered(nb, 0);
  covered[b.root] = 1;
  auto ok = [&](std::size_t x, std::size_t y) {
    for (const auto& [u, v] : chosen)
      if (std::abs(a(x, u) - b(y, v)) > delta) return false;
    return true;
  };
  std::vector<std::size_t> order_a;
  for (std::size_t x = 0; x < na; ++x)
    if (x != a.root) order_a.push_back(x);
  std::function<bool(std::size_t)> assign_b;
  std::function<bool(std::size_t)> assign_a = [&](std::size_t i) -> bool {
    if (i == order_a.size()) return assign_b(0);
    std::size_t x = order_a[i];
    for (std::size_t y = 0; y < nb; ++y) {
      if (!ok(x, y)) continue;
      chosen.emplace_back(x, y);
      ++covered[y];
      bool done = assign_a(i + 1);
      --covered[y];
      chosen.pop_back();
      if (done) return true;
    }
    return false;
  };
  assign_b = [&](std::size_t y) -> bool {
    while (y < nb && covered[y]) ++y;
    if (y == nb) return true;
    for (std::size_t x = 0; x < na; ++x) {
      if (!ok(x, y)) continue;
      chosen.emplace_back(x, y);
      ++covered[y];
      bool done = assign_b(y + 1);
      --covered[y];
      chosen.pop_back();
      if (done) return true;
    }
    return false;
  };
  return assign_a(0);
}

}  // namespace

double gh_by_enumeration(const FiniteRootedMetric& a, const FiniteRootedMetric& b) {
  const std::size_t na = a.size(), nb = b.size(), cells = na * nb;
  if (cells == 0) throw Error(ErrorCode::OutOfRange, "empty metric space");
  if (cells > 20) throw Error(ErrorCode::TooLarge, "enumeration is limited to 20 point pairs");
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << cells); ++mask) {
    if (!(mask >> (a.root * nb + b.root) & 1u)) continue;
    Relation r;
    std::vector<int> ca(na, 0), cb(nb, 0);
    for (std::size_t c = 0; c < cells; ++c)
      if (mask >> c & 1u) {
        r.emplace_back(c / nb, c % nb);
        ca[c / nb] = cb[c % nb] = 1;
      }
    if (std::count(ca.begin(), ca.end(), 0) || std::count(cb.begin(), cb.end(), 0)) continue;
    best = std::min(best, distortion(a, b, r));
  }
  return 0.5 * best;
}

double gh_exact(const FiniteRootedMetric& a, const FiniteRootedMetric& b, std::size_t max_points) {
  if (a.size() > max_points || b.size() > max_points)
    throw Error(ErrorCode::TooLarge, "exact GH search is limited to " + std::to_string(max_points) + " points");
  if (a.size() == 0 || b.size() == 0) throw Error(ErrorCode::OutOfRange, "empty metric space");
  std::vector<double> cand{0.0};
  for (std::size_t x = 0; x < a.size(); ++x)
    for (std::size_t u = 0; u < a.size(); ++u)
      for (std::size_t y = 0; y < b.size(); ++y)
        for (std::size_t v = 0; v < b.size(); ++v) cand.push_back(std::abs(a(x, u) - b(y, v)));
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  std::size_t lo = 0, hi = cand.size() - 1;  // cand[hi] is always feasible
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (correspondence_within(a, b, cand[mid])) hi = mid;
    else lo = mid + 1;
  }
  return 0.5 * cand[lo];
}

FiniteRootedMetric segment_metric(double length, std::size_t points) {
  FiniteRootedMetric m;
  m.distance.assign(points, std::vector<double>(points, 0.0));
  for (std::size_t i = 0; i < points; ++i)
    for (std::size_t j = 0; j < points; ++j)
      m.distance[i][j] = points > 1 ? length * std::abs(static_cast<double>(i) - static_cast<double>(j)) /
                                          static_cast<double>(points - 1)
                                    : 0.0;
  return m;
}

void quantize_dyadic(PathGrid& g, int bits) {
  const double scale = std::ldexp(1.0, bits);
  for (double& v : g.values) v = std::round(v * scale) / scale;
}

}  // namespace ctree
