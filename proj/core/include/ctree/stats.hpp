#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ctree::stats {

struct TestResult {
  std::string test;
  double statistic = 0;
  double pvalue = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

std::string to_json(const TestResult& r);

double normal_cdf(double x);
// P(sqrt(n) D > lambda) in the Kolmogorov limit.
double kolmogorov_survival(double lambda);

TestResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf);
TestResult two_sample_ks(std::span<const double> a, std::span<const double> b);

// Pearson test of counts against cell probabilities; dof = cells - 1 - fitted.
TestResult chi_square(std::span<const double> observed, std::span<const double> probabilities,
                      int fitted = 0);
// Two-sample homogeneity test on a contingency table of two count vectors.
TestResult chi_square_two_sample(std::span<const double> a, std::span<const double> b);
// Merges adjacent cells (left to right) until every expected count reaches
// min_expected; returns the merged observed and probability vectors.
void merge_sparse_cells(std::vector<double>& observed, std::vector<double>& probabilities,
                        double total, double min_expected = 5.0);

struct MeanSE {
  double mean = 0;
  double se = 0;
  double variance = 0;
  std::size_t n = 0;
  // |mean - target| <= k * se
  bool within(double target, double k = 3.0) const;
};
MeanSE mean_se(std::span<const double> xs);

}  // namespace ctree::stats
