#include "ctree/crt.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "ctree/error.hpp"
#include "ctree/gw.hpp"

namespace ctree {

namespace {

void require_binary(const MarkedTree& t) {
  if (!t.skeleton.is_binary()) throw Error(ErrorCode::NonBinarySkeleton, "skeleton must be binary");
  if (t.marks.size() != t.skeleton.size()) throw Error(ErrorCode::InvalidTree, "one mark per vertex is required");
}

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

double density_normalized(const MarkedTree& tree) {
  require_binary(tree);
  const int p = static_cast<int>(tree.leaf_count());
  const double l = tree.total_length();
  return factorial(p) * std::ldexp(1.0, p + 1) * l * std::exp(-2.0 * l * l);
}

double hitting_time_density(double a, double t) {
  if (t <= 0) return 0.0;
  return a / std::sqrt(2.0 * std::numbers::pi) * std::exp(-a * a / (2.0 * t) - 1.5 * std::log(t));
}

double density_ito_joint(const MarkedTree& tree, double s) {
  require_binary(tree);
  const int p = static_cast<int>(tree.leaf_count());
  return std::ldexp(1.0, p - 1) * hitting_time_density(2.0 * tree.total_length(), s);
}

MarkedTree sample_marginal_direct(int p, Rng& rng) {
  if (p < 1) throw Error(ErrorCode::OutOfRange, "p must be positive");
  // Binary Galton-Watson trees with 2p - 1 vertices are uniform over shapes.
  MarkedTree t;
  t.skeleton = sample_conditioned_size(OffspringLaw::binary(), static_cast<std::size_t>(2 * p - 1), rng);
  // L^2 ~ Gamma(shape p, rate 2); marks uniform on the simplex of size L.
  const double l = std::sqrt(std::gamma_distribution<double>(p, 0.5)(rng.engine()));
  t.marks.resize(t.skeleton.size());
  double total = 0;
  for (double& h : t.marks) total += (h = rng.exponential());
  for (double& h : t.marks) h *= l / total;
  return t;
}

MarkedTree sample_marginal_via_excursion(int p, double dt, Rng& rng) {
  if (p < 1) throw Error(ErrorCode::OutOfRange, "p must be positive");
  PathGrid e = vervaat_excursion(dt, rng);
  std::vector<double> times(static_cast<std::size_t>(p));
  for (double& t : times) t = rng.uniform();
  std::sort(times.begin(), times.end());
  return extract_marked_tree(e, times);
}

double orthant_integral(const std::function<double(double)>& f, int dim) {
  boost::math::quadrature::exp_sinh<double> integrator;
  const double norm = factorial(dim - 1);
  return integrator.integrate(
      [&](double l) {
        if (l <= 0) return 0.0;
        double v = f(l);
        // f underflows long before the power overflows for the densities used here.
        return v == 0.0 ? 0.0 : v * std::pow(l, dim - 1) / norm;
      },
      1e-14);
}

double normalization_by_quadrature(int p) {
  const double per_shape = orthant_integral([](double l) { return l * std::exp(-2.0 * l * l); }, 2 * p - 1);
  return factorial(p) * std::ldexp(1.0, p + 1) * static_cast<double>(count_binary_skeletons(p)) * per_shape;
}

double AldousNormalization::density(std::span<const double> marks) const {
  double l = 0;
  for (double h : marks) l += h;
  return static_cast<double>(count) * l * std::exp(-0.5 * l * l);
}

AldousNormalization aldous_normalization(int p) {
  if (p < 2) throw Error(ErrorCode::OutOfRange, "p must be at least 2");
  return {count_labelled_binary(p)};
}

}  // namespace ctree
