#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "ctree/real_tree.hpp"
#include "ctree/rng.hpp"

namespace ctree {

// Density of the p-point reduced tree of the CRT coded by the normalized
// excursion: p! 2^{p+1} L e^{-2 L^2}, L = total length, with respect to
// Lebesgue measure on marks summed over binary shapes with p leaves.
double density_normalized(const MarkedTree& tree);

// q_a(t) = a / sqrt(2 pi t^3) exp(-a^2 / (2t)), the law of the hitting time of a.
double hitting_time_density(double a, double t);

// Joint density of (reduced tree, excursion duration s) under the Ito
// measure with p ordered uniform-free times: 2^{p-1} q_{2L}(s).
double density_ito_joint(const MarkedTree& tree, double s);

MarkedTree sample_marginal_direct(int p, Rng& rng);
MarkedTree sample_marginal_via_excursion(int p, double dt, Rng& rng);

// Integral of f(sum of coordinates) over the nonnegative orthant of R^dim,
// reduced to the one-dimensional integral of f(L) L^{dim-1} / (dim-1)!.
double orthant_integral(const std::function<double(double)>& f, int dim);

// Integral of density_normalized over all binary shapes and marks.
double normalization_by_quadrature(int p);

struct AldousNormalization {
  std::uint64_t count = 0;  // b_p labelled unordered binary shapes
  // b_p L exp(-L^2 / 2) on the marks of one labelled shape.
  double density(std::span<const double> marks) const;
};
AldousNormalization aldous_normalization(int p);

}  // namespace ctree
