#include "ctree/snake.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ctree/crt.hpp"
#include "ctree/error.hpp"
#include "ctree/excursion.hpp"
#include "ctree/parallel.hpp"
#include "ctree/stats.hpp"
#include "ctree/trees.hpp"

namespace ctree::snake {

namespace {

using boost::math::quadrature::gauss_kronrod;

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Probability that the Brownian bridge over one step between two points at
// distances ma, mb > 0 from a flat boundary touches it.
double bridge_cross(double ma, double mb, double step) { return std::exp(-2.0 * ma * mb / step); }

// Lifetime walk on {0, ..., cap}: forced up from 1 until it first reaches m
// (Doob transform of the walk killed at 0, up with probability (j+1)/(2j)),
// then a fair walk folded at cap, until it returns to 0.
//
// push(j) creates the node at depth j and returns false to stop the snake;
// step(from, to) follows every move; pop(j) removes the node at depth j.
// After an early stop the walk continues without spatial work until the
// height is settled against `resolve` (max depth >= resolve or back to 0).
template <class Push, class Pop, class Step>
int run_lattice(int m, int cap, int resolve, Rng& rng, Push&& push, Pop&& pop, Step&& step) {
  int j = 0, top = 0;
  bool reached = false, live = true;
  auto up_next = [&] {
    if (j == 0) return true;
    if (j >= cap) return false;
    if (!reached) return rng.uniform() * 2.0 * j < j + 1.0;
    return rng.coin();
  };
  do {
    if (up_next()) {
      if (live && !push(j + 1)) live = false;
      ++j;
      if (live) step(j - 1, j);
    } else {
      if (live) step(j, j - 1);
      if (live) pop(j);
      --j;
    }
    top = std::max(top, j);
    if (j >= m) reached = true;
    if (!live && (top >= resolve || j == 0)) break;
  } while (j > 0);
  return top;
}

// Time-weighted overlap of one lifetime move between depths `from` and `to`
// with the band (tau, tau + eps), divided by eps.
double band_weight(int from, int to, double tau, double eps, double step, double dt) {
  double lo = std::min(from, to) * step, hi = std::max(from, to) * step;
  double overlap = std::min(hi, tau + eps) - std::max(lo, tau);
  return overlap > 0 ? dt * overlap / (step * eps) : 0.0;
}

struct ExitState {
  int depth = 0;  // 0 while W_s has not left D
  double tau = 0;
  Point position;
};

// Decides whether the branch step from `a` (inside) to `b` leaves D.
// `dom` is the shifted domain used for the decision; atoms go to the
// nearest point of `boundary`.
bool exits_between(const Domain& dom, const Domain& boundary, std::span<const double> a, std::span<const double> b,
                   double uniform, double step, int depth, ExitState& out) {
  double ma = dom.margin(a), mb = dom.margin(b);
  if (mb <= 0) {
    double frac = ma / (ma - mb);
    Point y(a.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] + frac * (b[i] - a[i]);
    out = {depth, (depth - 1 + frac) * step, boundary.project(y)};
    return true;
  }
  if (uniform < bridge_cross(ma, mb, step)) {
    out = {depth, (depth - 0.5) * step, boundary.project(ma < mb ? a : b)};
    return true;
  }
  return false;
}

double effective_outer(double a, double b, double q) {
  return 0.5 * (a + b + std::sqrt((a - b) * (a - b) + 4 * q));
}
double effective_inner(double a, double b, double q) {
  return std::max(0.0, 0.5 * (a + b - std::sqrt((a - b) * (a - b) + 4 * q)));
}

Estimate to_estimate(const std::vector<double>& xs) {
  auto m = stats::mean_se(xs);
  return {m.mean, m.se};
}

}  // namespace

void SpatialConfig::validate() const {
  if (dimension < 1) throw Error(ErrorCode::OutOfRange, "dimension must be at least 1");
  if (!(step > 0)) throw Error(ErrorCode::OutOfRange, "step must be positive");
}

void advance(const SpatialConfig& cfg, std::span<double> x, double duration, Rng& rng) {
  const double s = std::sqrt(duration);
  switch (cfg.motion) {
    case Motion::Brownian:
      for (double& v : x) v += s * rng.normal();
      break;
  }
}

std::vector<int> parents_of(const OrderedTree& tree) {
  std::vector<int> parent(tree.size(), -1);
  std::vector<std::pair<int, int>> open;  // vertex, children still to visit
  for (std::size_t v = 0; v < tree.size(); ++v) {
    while (!open.empty() && open.back().second == 0) open.pop_back();
    if (!open.empty()) {
      parent[v] = open.back().first;
      --open.back().second;
    }
    open.emplace_back(static_cast<int>(v), tree.children(v));
  }
  return parent;
}

SnakeMarginal sample_snake_marginal(const Point& x, const MarkedTree& tree, const SpatialConfig& cfg, Rng& rng) {
  cfg.validate();
  if (static_cast<int>(x.size()) != cfg.dimension) throw Error(ErrorCode::OutOfRange, "start point has wrong dimension");
  SnakeMarginal out{tree, std::vector<std::vector<Point>>(tree.skeleton.size()), {}};
  auto parent = parents_of(tree.skeleton);
  for (std::size_t v = 0; v < tree.skeleton.size(); ++v) {
    Point cur = parent[v] < 0 ? x : out.segments[parent[v]].back();
    auto& seg = out.segments[v];
    seg.push_back(cur);
    const double h = tree.marks[v];
    const auto n = static_cast<std::size_t>(std::ceil(h / cfg.step - 1e-9));
    for (std::size_t k = 0; k < n; ++k) {
      advance(cfg, cur, k + 1 < n ? cfg.step : h - static_cast<double>(n - 1) * cfg.step, rng);
      seg.push_back(cur);
    }
    if (tree.skeleton.children(v) == 0) out.endpoints.push_back(seg.back());
  }
  return out;
}

std::size_t concatenation_violations(const SnakeMarginal& m, double tol) {
  auto parent = parents_of(m.tree.skeleton);
  std::size_t bad = 0, leaf = 0;
  for (std::size_t v = 0; v < m.segments.size(); ++v) {
    if (parent[v] >= 0 && dist(m.segments[v].front(), m.segments[parent[v]].back()) > tol) ++bad;
    if (m.tree.skeleton.children(v) == 0) {
      if (leaf >= m.endpoints.size() || dist(m.endpoints[leaf], m.segments[v].back()) > tol) ++bad;
      ++leaf;
    }
  }
  return bad + (leaf != m.endpoints.size());
}

std::vector<Point> sample_ise(int p, const Point& x, const SpatialConfig& cfg, Rng& rng) {
  if (p < 1) throw Error(ErrorCode::OutOfRange, "p must be positive");
  auto tree = sample_marginal_direct(p, rng);
  return sample_snake_marginal(x, tree, cfg, rng).endpoints;
}

double ise_moment_constant(int p) {
  if (p < 1) throw Error(ErrorCode::OutOfRange, "p must be positive");
  double per_shape = orthant_integral([](double l) { return l * std::exp(-2 * l * l); }, 2 * p - 1);
  return 1.0 / (static_cast<double>(catalan(p - 1)) * per_shape);
}

Domain Domain::whole(int dimension) { return {Kind::Whole, Point(dimension, 0.0), 0}; }
Domain Domain::ball(Point center, double radius) {
  if (!(radius > 0)) throw Error(ErrorCode::OutOfRange, "radius must be positive");
  return {Kind::Ball, std::move(center), radius};
}
Domain Domain::exterior(Point center, double radius) {
  if (!(radius > 0)) throw Error(ErrorCode::OutOfRange, "radius must be positive");
  return {Kind::Exterior, std::move(center), radius};
}

double Domain::margin(std::span<const double> y) const {
  switch (kind) {
    case Kind::Whole:
      return std::numeric_limits<double>::infinity();
    case Kind::Ball:
      return radius - dist(y, center);
    case Kind::Exterior:
      return dist(y, center) - radius;
  }
  return 0;
}

Point Domain::project(std::span<const double> y) const {
  Point out(y.begin(), y.end());
  if (kind == Kind::Whole) return out;
  double r = dist(y, center);
  if (r == 0) {
    out = center;
    out[0] += radius;
    return out;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = center[i] + (y[i] - center[i]) * radius / r;
  return out;
}

Domain Domain::shrunk(double by) const {
  Domain out = *this;
  if (kind == Kind::Ball) out.radius -= by;
  if (kind == Kind::Exterior) out.radius += by;
  if (kind != Kind::Whole && !(out.radius > 0)) throw Error(ErrorCode::OutOfRange, "domain vanishes after the shift");
  return out;
}

std::string Domain::describe() const {
  std::ostringstream s;
  s.precision(17);
  switch (kind) {
    case Kind::Whole:
      return "whole space, d=" + std::to_string(dimension());
    case Kind::Ball:
      s << "ball";
      break;
    case Kind::Exterior:
      s << "exterior of ball";
      break;
  }
  s << " center=(";
  for (std::size_t i = 0; i < center.size(); ++i) s << (i ? "," : "") << center[i];
  s << ") radius=" << radius;
  return s.str();
}

void SnakeRun::validate() const {
  space.validate();
  if (static_cast<int>(origin.size()) != space.dimension) throw Error(ErrorCode::OutOfRange, "origin has wrong dimension");
  if (!(h0 > 0)) throw Error(ErrorCode::OutOfRange, "h0 must be positive");
  if (!(level_cap >= h0)) throw Error(ErrorCode::OutOfRange, "level cap must be at least h0");
}

int SnakeRun::h0_steps() const { return std::max(1, static_cast<int>(std::lround(h0 / space.step))); }
int SnakeRun::cap_steps() const {
  return std::max(h0_steps(), static_cast<int>(std::floor(level_cap / space.step + 1e-9)));
}

double GridSnake::height() const {
  return lifetime.empty() ? 0.0 : *std::max_element(lifetime.begin(), lifetime.end()) * run.space.step;
}

std::span<const double> GridSnake::position(std::uint32_t node) const {
  const auto d = static_cast<std::size_t>(run.space.dimension);
  return {node_position.data() + node * d, d};
}

std::vector<Point> GridSnake::path(std::size_t k) const {
  std::vector<Point> out(static_cast<std::size_t>(lifetime.at(k)) + 1);
  std::uint32_t node = tip[k];
  for (std::size_t i = out.size(); i-- > 0;) {
    auto p = position(node);
    out[i].assign(p.begin(), p.end());
    node = node_parent[node];
  }
  return out;
}

GridSnake grid_snake(const SnakeRun& run, Rng& rng, std::size_t memory_budget) {
  run.validate();
  const auto d = static_cast<std::size_t>(run.space.dimension);
  const double sd = std::sqrt(run.space.step);
  GridSnake gs{run, {0}, run.origin, {0}, {1.0}, {0}};
  std::vector<std::uint32_t> stack{0};
  auto check_budget = [&] {
    std::size_t bytes = gs.node_position.size() * sizeof(double) + gs.node_parent.size() * 12 + gs.tip.size() * 8;
    if (bytes > memory_budget) throw Error(ErrorCode::MemoryBudget, "grid snake exceeds its memory budget");
  };
  run_lattice(
      run.h0_steps(), run.cap_steps(), 0, rng,
      [&](int j) {
        auto node = static_cast<std::uint32_t>(gs.node_parent.size());
        std::uint32_t parent = stack[j - 1];
        for (std::size_t i = 0; i < d; ++i) gs.node_position.push_back(gs.node_position[parent * d + i] + sd * rng.normal());
        gs.node_parent.push_back(parent);
        gs.node_uniform.push_back(rng.uniform());
        stack.resize(j);
        stack.push_back(node);
        return true;
      },
      [](int) {},
      [&](int, int to) {
        gs.lifetime.push_back(to);
        gs.tip.push_back(stack[to]);
        if ((gs.tip.size() & 0xfff) == 0) check_budget();
      });
  check_budget();
  return gs;
}

double ExitMeasureEstimate::total_mass() const {
  double s = 0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

double ExitMeasureEstimate::integrate(const std::function<double(std::span<const double>)>& g) const {
  double s = 0;
  for (const auto& a : atoms) s += a.weight * g(a.position);
  return s;
}

std::string ExitMeasureEstimate::to_csv() const {
  std::string out;
  std::size_t d = atoms.empty() ? domain.center.size() : atoms.front().position.size();
  for (std::size_t i = 0; i < d; ++i) out += "x" + std::to_string(i + 1) + ",";
  out += "weight\n";
  for (const auto& a : atoms) {
    for (double v : a.position) out += format_double(v) + ",";
    out += format_double(a.weight) + "\n";
  }
  return out;
}

double default_band(const SpatialConfig& cfg) { return 4 * cfg.step; }

ExitMeasureEstimate exit_measure(const GridSnake& gs, const Domain& domain, double eps) {
  if (!(eps > 0)) throw Error(ErrorCode::OutOfRange, "eps must be positive");
  if (!domain.contains(gs.run.origin)) throw Error(ErrorCode::OutOfRange, "the snake must start inside D");
  ExitMeasureEstimate out{domain, eps, {}};
  const Domain inner = domain.shrunk(gs.run.shift());
  if (!inner.contains(gs.run.origin)) throw Error(ErrorCode::OutOfRange, "the snake starts within the boundary shift");
  const double step = gs.run.space.step, dt = gs.dt();
  std::vector<std::uint32_t> stack{0};
  ExitState exit;
  double weight = 0;
  auto finish = [&] {
    if (weight > 0) out.atoms.push_back({exit.position, weight});
    exit.depth = 0;
    weight = 0;
  };
  for (std::size_t k = 1; k < gs.times(); ++k) {
    int from = gs.lifetime[k - 1], to = gs.lifetime[k];
    if (to > from) {
      stack.resize(to);
      stack.push_back(gs.tip[k]);
      if (exit.depth == 0) {
        std::uint32_t node = gs.tip[k];
        exits_between(inner, domain, gs.position(gs.node_parent[node]), gs.position(node), gs.node_uniform[node], step,
                      to, exit);
      }
    }
    if (exit.depth > 0) weight += band_weight(from, to, exit.tau, eps, step, dt);
    if (to < from && from == exit.depth) finish();
  }
  finish();
  return out;
}

ExcursionValue sample_occupation(const SnakeRun& run, const std::function<double(std::span<const double>)>& g,
                                 Rng& rng) {
  run.validate();
  const auto d = static_cast<std::size_t>(run.space.dimension);
  const double sd = std::sqrt(run.space.step), dt = run.space.lifetime_dt();
  std::vector<double> stack((run.cap_steps() + 1) * d);
  std::copy(run.origin.begin(), run.origin.end(), stack.begin());
  double total = 0;
  int top = run_lattice(
      run.h0_steps(), run.cap_steps(), 0, rng,
      [&](int j) {
        for (std::size_t i = 0; i < d; ++i) stack[j * d + i] = stack[(j - 1) * d + i] + sd * rng.normal();
        return true;
      },
      [](int) {},
      [&](int, int to) { total += dt * g(std::span<const double>(stack.data() + to * d, d)); });
  return {total, top * run.space.step};
}

ExcursionValue sample_exit_integral(const SnakeRun& run, const Domain& domain, double eps,
                                    const std::function<double(std::span<const double>)>& g, Rng& rng) {
  run.validate();
  if (!(eps > 0)) throw Error(ErrorCode::OutOfRange, "eps must be positive");
  if (!domain.contains(run.origin)) throw Error(ErrorCode::OutOfRange, "the snake must start inside D");
  const Domain inner = domain.shrunk(run.shift());
  if (!inner.contains(run.origin)) throw Error(ErrorCode::OutOfRange, "the snake starts within the boundary shift");
  const auto d = static_cast<std::size_t>(run.space.dimension);
  const double step = run.space.step, sd = std::sqrt(step), dt = run.space.lifetime_dt();
  std::vector<double> stack((run.cap_steps() + 1) * d);
  std::copy(run.origin.begin(), run.origin.end(), stack.begin());
  ExitState exit;
  double gval = 0, total = 0;
  auto at = [&](int j) { return std::span<const double>(stack.data() + j * d, d); };
  int top = run_lattice(
      run.h0_steps(), run.cap_steps(), 0, rng,
      [&](int j) {
        if (exit.depth > 0) return true;  // positions above the exit are never read
        for (std::size_t i = 0; i < d; ++i) stack[j * d + i] = stack[(j - 1) * d + i] + sd * rng.normal();
        double ma = inner.margin(at(j - 1)), mb = inner.margin(at(j));
        double u = (mb > 0 && bridge_cross(ma, mb, step) > 1e-300) ? rng.uniform() : 1.0;
        if (exits_between(inner, domain, at(j - 1), at(j), u, step, j, exit)) gval = g(exit.position);
        return true;
      },
      [&](int j) {
        if (j == exit.depth) exit.depth = 0;
      },
      [&](int from, int to) {
        if (exit.depth > 0) total += gval * band_weight(from, to, exit.tau, eps, step, dt);
      });
  return {total, top * step};
}

ExcursionValue sample_outer_reach(const SnakeRun& run, double stop, Rng& rng) {
  run.validate();
  const auto d = static_cast<std::size_t>(run.space.dimension);
  const double step = run.space.step, sd = std::sqrt(step);
  std::vector<double> stack((run.cap_steps() + 1) * d);
  std::copy(run.origin.begin(), run.origin.end(), stack.begin());
  std::vector<double> radius(run.cap_steps() + 1, 0.0);
  double reach = 0;
  stop -= run.shift();
  int top = run_lattice(
      run.h0_steps(), run.cap_steps(), run.h0_steps(), rng,
      [&](int j) {
        double* y = stack.data() + j * d;
        const double* prev = y - d;
        for (std::size_t i = 0; i < d; ++i) y[i] = prev[i] + sd * rng.normal();
        radius[j] = dist({y, d}, run.origin);
        double a = radius[j - 1], b = radius[j];
        if (std::max(a, b) >= reach) {
          reach = effective_outer(a, b, -0.5 * step * std::log(rng.uniform()));
        } else {
          double p = std::exp(-2 * (reach - a) * (reach - b) / step);
          if (p > 1e-300) {
            double u = rng.uniform();
            if (u < p) reach = effective_outer(a, b, -0.5 * step * std::log(u));
          }
        }
        return reach < stop;
      },
      [](int) {}, [](int, int) {});
  return {reach + run.shift(), top * step};
}

ExcursionValue sample_inner_reach(const SnakeRun& run, const Point& center, double stop, Rng& rng) {
  run.validate();
  const auto d = static_cast<std::size_t>(run.space.dimension);
  if (center.size() != d) throw Error(ErrorCode::OutOfRange, "center has wrong dimension");
  const double step = run.space.step, sd = std::sqrt(step);
  std::vector<double> stack((run.cap_steps() + 1) * d);
  std::copy(run.origin.begin(), run.origin.end(), stack.begin());
  std::vector<double> radius(run.cap_steps() + 1, dist(run.origin, center));
  double reach = radius[0];
  stop += run.shift();
  int top = run_lattice(
      run.h0_steps(), run.cap_steps(), run.h0_steps(), rng,
      [&](int j) {
        double* y = stack.data() + j * d;
        const double* prev = y - d;
        for (std::size_t i = 0; i < d; ++i) y[i] = prev[i] + sd * rng.normal();
        radius[j] = dist({y, d}, center);
        double a = radius[j - 1], b = radius[j];
        if (d == 1 && (y[0] - center[0]) * (prev[0] - center[0]) <= 0) {
          reach = 0;  // the step passes over the center
        } else if (std::min(a, b) <= reach) {
          reach = std::min(reach, effective_inner(a, b, -0.5 * step * std::log(rng.uniform())));
        } else {
          double p = std::exp(-2 * (a - reach) * (b - reach) / step);
          if (p > 1e-300) {
            double u = rng.uniform();
            if (u < p) reach = effective_inner(a, b, -0.5 * step * std::log(u));
          }
        }
        return reach > stop;
      },
      [](int) {}, [](int, int) {});
  return {std::max(0.0, reach - run.shift()), top * step};
}

HalvedEstimate estimate_halved(const SnakeRun& run, std::size_t reps, std::uint64_t seed,
                               const std::function<ExcursionValue(const SnakeRun&, Rng&)>& sampler,
                               const std::function<double(double)>& transform) {
  run.validate();
  if (reps < 2) throw Error(ErrorCode::OutOfRange, "need at least two replicates");
  const int m = 2 * std::max(1, static_cast<int>(std::lround(run.h0 / (2 * run.space.step))));
  SnakeRun half = run;
  half.h0 = (m / 2) * run.space.step;
  const double h0 = m * run.space.step;
  std::vector<double> fine(reps), coarse(reps), extra(reps);
  for_replicates(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    auto s = sampler(half, rng);
    double y = transform(s.value) / h0;  // weight 1 / (2 (h0 / 2))
    fine[i] = y;
    coarse[i] = s.height >= h0 - 0.5 * run.space.step ? y : 0.0;
    extra[i] = 2 * fine[i] - coarse[i];
  });
  return {to_estimate(coarse), to_estimate(fine), to_estimate(extra), h0, reps};
}

HalvedEstimate occupation_moment(const SnakeRun& run, const std::function<double(std::span<const double>)>& g,
                                 int power, std::size_t reps, std::uint64_t seed) {
  if (power < 1) throw Error(ErrorCode::OutOfRange, "power must be positive");
  return estimate_halved(
      run, reps, seed, [&](const SnakeRun& r, Rng& rng) { return sample_occupation(r, g, rng); },
      [power](double y) { return std::pow(y, power); });
}

HalvedEstimate exit_first_moment(const SnakeRun& run, const Domain& domain, double eps,
                                 const std::function<double(std::span<const double>)>& g, std::size_t reps,
                                 std::uint64_t seed) {
  return estimate_halved(
      run, reps, seed, [&](const SnakeRun& r, Rng& rng) { return sample_exit_integral(r, domain, eps, g, rng); },
      [](double z) { return z; });
}

HalvedEstimate u_hat(const SnakeRun& run, const Domain& domain, double eps,
                     const std::function<double(std::span<const double>)>& g, std::size_t reps,
                     std::uint64_t seed) {
  return estimate_halved(
      run, reps, seed, [&](const SnakeRun& r, Rng& rng) { return sample_exit_integral(r, domain, eps, g, rng); },
      [](double z) { return -std::expm1(-z); });
}

Estimate hitting_probability(double eps, int dimension, std::size_t reps, std::uint64_t seed, double step,
                             double boundary_shift) {
  if (!(eps > 0)) throw Error(ErrorCode::OutOfRange, "eps must be positive");
  if (step == 0) step = eps * eps / 400;
  SnakeRun run{Point(dimension, 0.0), {dimension, step}, eps * eps / 16, 4 * eps * eps, boundary_shift};
  run.validate();
  std::vector<double> y(reps);
  for_replicates(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    y[i] = sample_outer_reach(run, eps, rng).value >= eps ? run.weight() : 0.0;
  });
  return to_estimate(y);
}

std::vector<Estimate> point_hitting(const Point& x, std::span<const double> radii, const PointHittingParams& params,
                                    std::uint64_t seed) {
  if (radii.empty()) throw Error(ErrorCode::OutOfRange, "no radii given");
  const Point center(x.size(), 0.0);
  const double norm = dist(x, center);
  for (double r : radii)
    if (!(r > 0 && r < norm)) throw Error(ErrorCode::OutOfRange, "radii must lie in (0, |x|)");
  SnakeRun run{x, {static_cast<int>(x.size()), params.step}, params.h0, params.level_cap, params.boundary_shift};
  run.validate();
  const double smallest = *std::min_element(radii.begin(), radii.end());
  std::vector<double> reach(params.reps);
  for_replicates(params.reps, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    reach[i] = sample_inner_reach(run, center, smallest, rng).value;
  });
  std::vector<Estimate> out;
  for (double r : radii) {
    std::vector<double> y(params.reps);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = reach[i] <= r ? run.weight() : 0.0;
    out.push_back(to_estimate(y));
  }
  return out;
}

Estimate step_richardson(const Estimate& coarse, const Estimate& fine) {
  return {(4 * fine.value - coarse.value) / 3, std::sqrt(16 * fine.se * fine.se + coarse.se * coarse.se) / 3};
}

double extrapolate_radius(std::span<const double> radii, std::span<const double> values, double kappa) {
  if (radii.size() != 3 || values.size() != 3) throw Error(ErrorCode::OutOfRange, "need three radii");
  // Lagrange interpolation in x = r^kappa, evaluated at x = 0.
  double x[3], c = 0;
  for (int i = 0; i < 3; ++i) x[i] = std::pow(radii[i], kappa);
  for (int i = 0; i < 3; ++i) {
    double l = 1;
    for (int j = 0; j < 3; ++j)
      if (j != i) l *= x[j] / (x[j] - x[i]);
    c += values[i] * l;
  }
  return c;
}

double point_correction_exponent(int dimension) {
  if (dimension < 1 || dimension > 3) throw Error(ErrorCode::OutOfRange, "points are polar for d >= 4");
  double c = 2 - dimension / 2.0, e = dimension - 2.0;
  return 0.5 * (e + std::sqrt(e * e + 32 * c)) - 2;
}

// u'^2 = (8/3)(u^3 - m^3) with m = u(0). Writing u = m + w^2 gives
// |x| = X(w) = int_0^w 2 / sqrt((8/3)(3 m^2 + 3 m v^2 + v^4)) dv, smooth in v.
namespace {

double position_of(double m, double w) {
  auto f = [m](double v) { return 2.0 / std::sqrt((8.0 / 3.0) * (3 * m * m + 3 * m * v * v + v * v * v * v)); };
  if (w == 0) return 0.0;
  return gauss_kronrod<double, 61>::integrate(f, 0.0, w, 12, 1e-15);
}

double solve_increasing(const std::function<double(double)>& f, double lo, double hi) {
  std::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  if (iters >= 200) throw Error(ErrorCode::NoConvergence, "root finder did not converge");
  return 0.5 * (a + b);
}

}  // namespace

OdeOracle1d::OdeOracle1d(double lambda) : lambda_(lambda), center_(0) {
  if (!(lambda >= 0)) throw Error(ErrorCode::OutOfRange, "lambda must be nonnegative");
  if (lambda == 0) return;
  // X(sqrt(lambda - m)) = 1 decides m; it runs from +inf at m = 0 to 0 at m = lambda.
  auto f = [&](double m) { return 1.0 - position_of(m, std::sqrt(lambda - m)); };
  double lo = lambda * 1e-12;
  if (f(lo) >= 0) throw Error(ErrorCode::NoConvergence, "boundary value too small to bracket");
  center_ = solve_increasing(f, lo, lambda);
}

double OdeOracle1d::operator()(double x) const {
  if (!(std::abs(x) <= 1)) throw Error(ErrorCode::OutOfRange, "x must lie in [-1, 1]");
  if (lambda_ == 0) return 0.0;
  double wmax = std::sqrt(lambda_ - center_), ax = std::abs(x);
  if (ax == 0) return center_;
  if (ax == 1) return lambda_;
  double w = solve_increasing([&](double v) { return position_of(center_, v) - ax; }, 0.0, wmax);
  return center_ + w * w;
}

std::vector<double> OdeOracle1d::values(std::span<const double> xs) const {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back((*this)(x));
  return out;
}

double OdeOracle1d::green_residual(double x) const {
  auto sq = [&](double y) {
    double u = (*this)(y);
    return u * u;
  };
  double left = gauss_kronrod<double, 31>::integrate([&](double y) { return (1 + y) * (1 - x) * sq(y); }, -1.0, x, 8,
                                                     1e-14);
  double right = gauss_kronrod<double, 31>::integrate([&](double y) { return (1 + x) * (1 - y) * sq(y); }, x, 1.0, 8,
                                                      1e-14);
  return (*this)(x) + 2 * (left + right) - lambda_;
}

double interval_exit_reference(double x, double g_left, double g_right, double cap) {
  if (!(std::abs(x) < 1)) throw Error(ErrorCode::OutOfRange, "x must lie in (-1, 1)");
  if (!(cap > 0)) throw Error(ErrorCode::OutOfRange, "cap must be positive");
  // Survivors at time cap, weighted by where they would exit: sine series of
  // the killed heat kernel against (1 + y)/2 and (1 - y)/2.
  const double pi = std::numbers::pi;
  double right = (1 + x) / 2, left = (1 - x) / 2;
  for (int k = 1; k < 10000; ++k) {
    double decay = std::exp(-k * k * pi * pi * cap / 8);
    if (decay < 1e-18) break;
    double phi = std::sin(k * pi * (x + 1) / 2) * decay;
    right -= phi * 2 * (k % 2 ? 1.0 : -1.0) / (k * pi);
    left -= phi * 2 / (k * pi);
  }
  return g_left * left + g_right * right;
}

namespace {

// P(|x + B_t - c| < rho) in d = 3 with |x - c| = D.
double ball_probability(double D, double rho, double t) {
  if (t <= 0) return D < rho ? 1.0 : 0.0;
  double s = std::sqrt(t);
  if (D < 1e-9) return boost::math::gamma_p(1.5, rho * rho / (2 * t));
  auto Phi = [](double z) { return 0.5 * boost::math::erfc(-z / std::numbers::sqrt2); };
  auto gauss = [&](double z) { return std::exp(-z * z / (2 * t)); };
  const double root = std::sqrt(2 * std::numbers::pi * t);
  double i1 = -t * (gauss(rho - D) - gauss(-D)) + D * root * (Phi((rho - D) / s) - Phi(-D / s));
  double i2 = -t * (gauss(rho + D) - gauss(D)) - D * root * (Phi((rho + D) / s) - Phi(D / s));
  return std::clamp((i1 - i2) / (D * root), 0.0, 1.0);
}

// Density of |x + B_a - c| at r in d = 3.
double radial_density(double D, double a, double r) {
  double root = std::sqrt(2 * std::numbers::pi * a);
  if (D < 1e-9) return 2 * r * r / (a * root) * std::exp(-r * r / (2 * a));
  return r / (D * root) * (std::exp(-(r - D) * (r - D) / (2 * a)) - std::exp(-(r + D) * (r + D) / (2 * a)));
}

}  // namespace

double ball_occupation_reference(double distance, double rho, double cap) {
  if (!(distance >= 0) || !(rho > 0) || !(cap > 0)) throw Error(ErrorCode::OutOfRange, "bad ball occupation input");
  return gauss_kronrod<double, 31>::integrate([&](double t) { return ball_probability(distance, rho, t); }, 0.0, cap,
                                              10, 1e-10);
}

double ball_occupation_second_reference(double distance, double rho, double cap) {
  if (!(distance >= 0) || !(rho > 0) || !(cap > 0)) throw Error(ErrorCode::OutOfRange, "bad ball occupation input");
  auto v = [&](double r, double T) {
    if (T <= 0) return 0.0;
    return gauss_kronrod<double, 15>::integrate([&](double t) { return ball_probability(r, rho, t); }, 0.0, T, 4,
                                                1e-7);
  };
  auto inner = [&](double a) {
    if (a <= 0) return 0.0;
    double lo = std::max(0.0, distance - 9 * std::sqrt(a)), hi = distance + 9 * std::sqrt(a);
    return gauss_kronrod<double, 15>::integrate(
        [&](double r) {
          double x = v(r, cap - a);
          return radial_density(distance, a, r) * x * x;
        },
        lo, hi, 4, 1e-7);
  };
  return 4 * gauss_kronrod<double, 15>::integrate(inner, 0.0, cap, 5, 1e-6);
}

double interval_hitting_constant() {
  // v = 1 + s^2 turns dv / sqrt(v^3 - 1) into 2 ds / sqrt(3 + 3 s^2 + s^4).
  auto f = [](double s) { return 2.0 / std::sqrt(3 + 3 * s * s + s * s * s * s); };
  double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double t) {
        double s = t / (1 - t);  // maps [0, 1) onto [0, inf)
        return f(s) / ((1 - t) * (1 - t));
      },
      0.0, 1.0, 15, 1e-15);
  return 0.375 * integral * integral;
}

double point_hitting_reference(int dimension, double radius) {
  if (!(radius > 0 && radius < 1)) throw Error(ErrorCode::OutOfRange, "radius must lie in (0, 1)");
  if (dimension == 1) return 1.5 / ((1 - radius) * (1 - radius));
  const double kappa = point_correction_exponent(dimension), c = 2 - dimension / 2.0, beta = kappa + 2;
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 2>;
  // One solution decaying like c s^-2 + s^-beta, integrated inwards; the
  // others are its rescalings lambda^2 u(lambda s).
  const double far = 1e4;
  auto rhs = [&](const State& y, State& dy, double s) {
    dy[0] = y[1];
    dy[1] = 4 * y[0] * y[0] - (dimension - 1) / s * y[1];
  };
  auto start = [&] {
    return State{c / (far * far) + std::pow(far, -beta), -2 * c / (far * far * far) - beta * std::pow(far, -beta - 1)};
  };
  auto stepper = odeint::make_controlled(1e-14, 1e-12, odeint::runge_kutta_dopri5<State>());
  // Pass 1: locate the blow-up point, where u ~ 1.5 / (s - s*)^2.
  State y = start();
  double s = far, ds = -1e-3 * far, blow = 0;
  for (int it = 0; it < 10'000'000; ++it) {
    if (stepper.try_step(rhs, y, s, ds) == odeint::fail) continue;
    if (y[0] > 1e10) {
      blow = s - std::sqrt(1.5 / y[0]);
      break;
    }
    if (s <= 0) break;
    ds = std::max(ds, -0.5 * s);
  }
  if (!(blow > 0)) throw Error(ErrorCode::NoConvergence, "radial solution did not blow up");
  const double target = blow / radius;
  if (target >= far) throw Error(ErrorCode::OutOfRange, "radius too small for the radial oracle");
  // Pass 2: value at s = blow / radius, rescaled to a blow-up at radius.
  y = start();
  odeint::integrate_adaptive(odeint::make_controlled(1e-14, 1e-12, odeint::runge_kutta_dopri5<State>()), rhs, y, far,
                             target, -1e-3 * far);
  return y[0] * blow * blow / (radius * radius);
}

}  // namespace ctree::snake
