#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ctree/gw.hpp"
#include "ctree/stats.hpp"

namespace ctree::limits {

// p-values above kAlpha pass; moment checks pass within kSeBand standard errors.
inline constexpr double kAlpha = 0.01;
inline constexpr double kSeBand = 3.0;

struct CheckReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> params;
  // "ks", "ks2", "chi2", "chi2_2": value is a p-value, pass iff value > threshold.
  // "z": value is |estimate - target| / se, pass iff value <= threshold.
  // "rel": value is |estimate - target| / |target|, pass iff value <= threshold.
  // "exact": value is the number of violations, pass iff value == 0.
  // "all": pass iff every part passes.
  std::string kind;
  double value = 0;
  double threshold = 0;
  bool pass = false;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double estimate = 0;  // z and rel checks only
  double target = 0;
  double se = 0;
  std::vector<CheckReport> parts;
};

std::string to_json(const CheckReport& r);

CheckReport pvalue_report(std::string name, const stats::TestResult& t, std::string kind);
CheckReport z_report(std::string name, const stats::MeanSE& m, double target);
// z-score for the difference of two independent estimates.
CheckReport z_report(std::string name, const stats::MeanSE& a, const stats::MeanSE& b);
CheckReport relative_report(std::string name, double estimate, double target, double tolerance, double se = 0);
CheckReport exact_report(std::string name, std::size_t violations, std::size_t n);
CheckReport all_of(std::string name, std::vector<CheckReport> parts);

// Limit laws used as oracles.
double half_normal_cdf(double x, double scale);  // P(scale |N| <= x)
double chi3_cdf(double x);
// E exp(-lambda zeta) for the duration of an excursion conditioned to reach sigma / 2.
double conditioned_duration_laplace(double sigma, double lambda);

// P(max e <= x) for the normalized excursion, by its theta series.
double excursion_max_cdf(double x);
// Exact P(height <= h), h = 0..n-1, for a uniform ordered tree with n
// vertices (Dyck paths of length 2(n-1) kept below h).
std::vector<double> uniform_tree_height_cdf(std::size_t n);
// Kolmogorov distance between the exact law of height / sqrt(n) of a uniform
// ordered tree and sqrt(2) max e, its limit.
double uniform_tree_height_distance(std::size_t n);

// H_p / sqrt(p) against (2/sigma)|N|.
CheckReport check_height_marginal(const OffspringLaw& law, std::size_t p, std::size_t reps, std::uint64_t seed);
// C_p / sqrt(p), the contour at time 2p t with t = 1/2, against (2/sigma)|beta_{1/2}|.
CheckReport check_contour_marginal(const OffspringLaw& law, std::size_t p, std::size_t reps, std::uint64_t seed);
// Lambda_p / sqrt(p) against sigma |N|, plus the joint law of
// (sigma H_p / 2, Lambda_p / sigma) / sqrt(p) through r = sum ~ chi(3) and
// the second coordinate over r ~ uniform.
CheckReport check_local_time_joint(const OffspringLaw& law, std::size_t p, std::size_t reps, std::uint64_t seed);
// The three checks above on one set of forests.
std::vector<CheckReport> check_forest_marginals(const OffspringLaw& law, std::size_t p, std::size_t reps,
                                                std::uint64_t seed);

// Lambda_n = 1 - I_n and the walk formula for H_n against a stack-based
// height, on `forests` sampled forests of `steps` vertices.
CheckReport check_forest_identities(const OffspringLaw& law, std::size_t steps, std::size_t forests,
                                    std::uint64_t seed);

// max H / sqrt(n) of size-conditioned trees against (2/sigma) max e.
CheckReport check_conditioned_size(const OffspringLaw& law, std::size_t n, std::size_t reps,
                                   std::size_t brownian_reps, double dt, std::uint64_t seed);

// Laplace transform of #tree / p^2 for trees conditioned on height >= p, at
// each lambda, plus KS of height / p against P(> y) = 1 / y.
CheckReport check_conditioned_height(const OffspringLaw& law, int p, std::size_t reps,
                                     const std::vector<double>& lambdas, std::uint64_t seed);

// Occupation time of [0, a] by reflected BM up to local time 1/2 against
// int_0^a X with X Feller (sigma = 2, X_0 = 1): means and variances compared
// with each other and with a and 4 a^3 / 3.
CheckReport check_ray_knight(std::size_t reps, double dt, const std::vector<double>& levels, std::uint64_t seed);

// Z^p started at p: mean p and E Z_n^2 - p^2 = sigma^2 n p at generation n,
// and Z_p / p against the Feller diffusion at time 1 (two-sample KS).
CheckReport check_feller_limit(const OffspringLaw& law, std::size_t p, std::size_t n, std::size_t reps,
                               double dt, std::uint64_t seed);

}  // namespace ctree::limits
