#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ctree/real_tree.hpp"
#include "ctree/rng.hpp"

namespace ctree::snake {

using Point = std::vector<double>;

enum class Motion { Brownian };

// Spatial motion and the step used along branches. The lattice snake moves
// its lifetime by +-step in time step^2, so `step` also fixes the time grid.
struct SpatialConfig {
  int dimension = 1;
  double step = 1e-3;
  Motion motion = Motion::Brownian;

  void validate() const;
  double lifetime_dt() const { return step * step; }
};

// Moves x by the spatial motion run for `duration`.
void advance(const SpatialConfig& cfg, std::span<double> x, double duration, Rng& rng);

struct SnakeMarginal {
  MarkedTree tree;
  // Branch of vertex v (depth-first order) on the step grid, both ends included.
  std::vector<std::vector<Point>> segments;
  std::vector<Point> endpoints;  // leaves in depth-first order
};

// Independent spatial motions along the branches of `tree`, started at x.
SnakeMarginal sample_snake_marginal(const Point& x, const MarkedTree& tree, const SpatialConfig& cfg, Rng& rng);
// Parent of each skeleton vertex in depth-first order (root gets -1).
std::vector<int> parents_of(const OrderedTree& tree);
// Violations of "each branch starts where its parent branch ends" and
// "endpoints are the ends of the leaf branches".
std::size_t concatenation_violations(const SnakeMarginal& m, double tol = 0.0);

// p endpoints under the normalized excursion: a reduced CRT tree from the
// direct sampler carried through sample_snake_marginal.
std::vector<Point> sample_ise(int p, const Point& x, const SpatialConfig& cfg, Rng& rng);

// Constant c_p with E<Z, g>^p = c_p sum over ordered binary shapes of
// int L e^{-2L^2} Pi^theta(prod g), fixed by g = 1. Evaluates to p! 2^{p+1}.
double ise_moment_constant(int p);

struct Domain {
  enum class Kind { Whole, Ball, Exterior };
  Kind kind = Kind::Whole;
  Point center;
  double radius = 0;

  static Domain whole(int dimension);
  static Domain ball(Point center, double radius);      // an interval in d = 1
  static Domain exterior(Point center, double radius);  // complement of the closed ball

  int dimension() const { return static_cast<int>(center.size()); }
  // Distance to the boundary, positive inside and negative outside.
  double margin(std::span<const double> y) const;
  bool contains(std::span<const double> y) const { return margin(y) > 0; }
  Point project(std::span<const double> y) const;
  // The same domain with its boundary moved inwards by `by`.
  Domain shrunk(double by) const;
  std::string describe() const;
};

// The lattice tree has no subtrees shorter than one step, so its range
// falls short of the continuum range by about this many sqrt(step) near a
// boundary (calibrated on N_0(range leaves (-1, 1)), whose exact value is
// interval_hitting_constant()). Hitting functionals move boundaries in by
// that much. Exit functionals are left alone: the missing subtrees carry
// almost no exit local time, and their bias, linear in step, is removed by
// step_richardson instead.
inline constexpr double kLatticeBoundaryShift = 1.6;

// Lattice lifetime: an excursion of the +-step walk conditioned to reach
// h0 (rounded to whole steps), folded at level_cap.
struct SnakeRun {
  Point origin;
  SpatialConfig space;
  double h0 = 0.05;
  double level_cap = 8.0;
  double boundary_shift = 0;  // in units of sqrt(step)

  void validate() const;
  int h0_steps() const;
  int cap_steps() const;
  double effective_h0() const { return h0_steps() * space.step; }
  double weight() const { return 0.5 / effective_h0(); }
  double shift() const { return boundary_shift * std::sqrt(space.step); }
};

// Whole snake trajectory. Paths share prefixes: node k stores its position,
// its parent and the uniform used for bridge-crossing decisions, and each
// grid time only records the node at the tip of W_s.
struct GridSnake {
  SnakeRun run;
  std::vector<int> lifetime;  // depth in steps at grid time k
  std::vector<double> node_position;
  std::vector<std::uint32_t> node_parent;
  std::vector<double> node_uniform;
  std::vector<std::uint32_t> tip;

  std::size_t times() const { return lifetime.size(); }
  double dt() const { return run.space.lifetime_dt(); }
  double weight() const { return run.weight(); }
  double height() const;
  std::span<const double> position(std::uint32_t node) const;
  std::vector<Point> path(std::size_t k) const;  // W_s on the step grid, root first
};

GridSnake grid_snake(const SnakeRun& run, Rng& rng, std::size_t memory_budget = std::size_t{1} << 28);

struct ExitAtom {
  Point position;
  double weight = 0;
};

struct ExitMeasureEstimate {
  Domain domain;
  double eps = 0;
  std::vector<ExitAtom> atoms;

  double total_mass() const;
  double integrate(const std::function<double(std::span<const double>)>& g) const;
  std::string to_csv() const;
};

// Band width used when none is given: four lifetime steps.
double default_band(const SpatialConfig& cfg);

// Atoms at the first exit of W_s from D, weighted by (1/eps) times the time
// the lifetime spends in (tau, tau + eps). The exit time is taken at the
// first grid node outside D, or inside a branch step when the Brownian
// bridge between two inside nodes crosses the boundary.
ExitMeasureEstimate exit_measure(const GridSnake& gs, const Domain& domain, double eps);

// Per-excursion functionals from a streaming simulation that keeps only the
// current path. `height` is the maximum of the lifetime.
struct ExcursionValue {
  double value = 0;
  double height = 0;
};

ExcursionValue sample_occupation(const SnakeRun& run, const std::function<double(std::span<const double>)>& g,
                                 Rng& rng);
ExcursionValue sample_exit_integral(const SnakeRun& run, const Domain& domain, double eps,
                                    const std::function<double(std::span<const double>)>& g, Rng& rng);
// Largest r such that the range leaves the open ball B(origin, r), with
// bridge corrections between nodes. Stops once it passes `stop`.
ExcursionValue sample_outer_reach(const SnakeRun& run, double stop, Rng& rng);
// Smallest r such that the range meets the closed ball B(center, r).
ExcursionValue sample_inner_reach(const SnakeRun& run, const Point& center, double stop, Rng& rng);

// Weighted Monte Carlo under the excursion measure. Samples are drawn
// conditioned on height > h0 / 2; `fine` uses all of them, `coarse` only
// those above h0, and `extrapolated` = 2 fine - coarse.
struct Estimate {
  double value = 0;
  double se = 0;
};
struct HalvedEstimate {
  Estimate coarse;
  Estimate fine;
  Estimate extrapolated;
  double h0 = 0;
  std::size_t reps = 0;
};

// `transform` maps a per-excursion value to the integrand (identity,
// square, 1 - exp(-x), an indicator, ...).
HalvedEstimate estimate_halved(const SnakeRun& run, std::size_t reps, std::uint64_t seed,
                               const std::function<ExcursionValue(const SnakeRun&, Rng&)>& sampler,
                               const std::function<double(double)>& transform);

// N_x(int_0^sigma g(W^_s) ds) and N_x((int g)^2).
HalvedEstimate occupation_moment(const SnakeRun& run, const std::function<double(std::span<const double>)>& g,
                                 int power, std::size_t reps, std::uint64_t seed);
// N_x(<Z^D, g>).
HalvedEstimate exit_first_moment(const SnakeRun& run, const Domain& domain, double eps,
                                 const std::function<double(std::span<const double>)>& g, std::size_t reps,
                                 std::uint64_t seed);
// N_x(1 - exp(-<Z^D, g>)).
HalvedEstimate u_hat(const SnakeRun& run, const Domain& domain, double eps,
                     const std::function<double(std::span<const double>)>& g, std::size_t reps,
                     std::uint64_t seed);

// N_0(range leaves B(0, eps)), simulated with h0 = eps^2 / 16 and level cap
// 4 eps^2. A zero step means eps^2 / 400 (spatial steps of eps / 20).
Estimate hitting_probability(double eps, int dimension, std::size_t reps, std::uint64_t seed, double step = 0,
                             double boundary_shift = kLatticeBoundaryShift);

// Exit functionals carry a bias linear in step (measured on u_hat against
// the ODE oracle for steps 0.005 to 0.16). Combines runs at steps s and s / 4.
Estimate step_richardson(const Estimate& coarse, const Estimate& fine);

struct PointHittingParams {
  double step = 0.01;
  double h0 = 0.0625;
  double level_cap = 8.0;
  std::size_t reps = 10000;
  double boundary_shift = kLatticeBoundaryShift;
};
// N_x(range meets B(0, r)) for each radius, all from one set of snakes.
std::vector<Estimate> point_hitting(const Point& x, std::span<const double> radii, const PointHittingParams& params,
                                    std::uint64_t seed);
// Fits value = c + A r^kappa + B r^{2 kappa} through three radii and returns c.
double extrapolate_radius(std::span<const double> radii, std::span<const double> values, double kappa);
// Exponent of the leading radius correction near a point in dimension d.
double point_correction_exponent(int dimension);

// Reference values.

// Solution of u'' = 4 u^2 on (-1, 1) with u(+-1) = lambda.
class OdeOracle1d {
 public:
  explicit OdeOracle1d(double lambda);
  double lambda() const { return lambda_; }
  double center_value() const { return center_; }
  double operator()(double x) const;
  std::vector<double> on_grid(std::span<const double> xs) const { return values(xs); }
  // u(x) + 2 int G(x, y) u(y)^2 dy - lambda with G(x, y) = (1 - max)(1 + min).
  double green_residual(double x) const;

 private:
  std::vector<double> values(std::span<const double> xs) const;
  double lambda_;
  double center_;
};

// Pi_x(1{tau < cap} g(xi_tau)) for D = (-1, 1), x in D.
double interval_exit_reference(double x, double g_left, double g_right, double cap);
// int_0^cap P(|xi_t - c| < rho) dt in d = 3 with |x - c| = distance.
double ball_occupation_reference(double distance, double rho, double cap);
// 4 int_0^cap da Pi_x[v_{cap - a}(xi_a)^2], v_T the reference above.
double ball_occupation_second_reference(double distance, double rho, double cap);
// N_0(range leaves (-1, 1)) = (3/8) (int_1^inf dv / sqrt(v^3 - 1))^2.
double interval_hitting_constant();
// N_x(range meets B(0, r)) for |x| = 1 and d <= 3, from the radial form of
// u'' + (d-1) u' / s = 4 u^2 blowing up at r and decaying at infinity.
double point_hitting_reference(int dimension, double radius);

}  // namespace ctree::snake
