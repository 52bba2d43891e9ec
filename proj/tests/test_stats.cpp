#include <doctest.h>

#include <cmath>
#include <random>

#include "ctree/error.hpp"
#include "ctree/rng.hpp"
#include "ctree/stats.hpp"

using namespace ctree;

TEST_CASE("Kolmogorov distribution") {
  // Reference values of P(K > x).
  CHECK(stats::kolmogorov_survival(0.5) == doctest::Approx(0.963945).epsilon(1e-5));
  CHECK(stats::kolmogorov_survival(1.0) == doctest::Approx(0.269999).epsilon(1e-5));
  CHECK(stats::kolmogorov_survival(1.36) == doctest::Approx(0.049440).epsilon(1e-4));
  CHECK(stats::kolmogorov_survival(2.0) == doctest::Approx(0.000671).epsilon(1e-3));
  CHECK(stats::kolmogorov_survival(0.2) == doctest::Approx(1.0).epsilon(1e-9));
  // The two series agree where they switch.
  CHECK(stats::kolmogorov_survival(1 - 1e-9) == doctest::Approx(stats::kolmogorov_survival(1 + 1e-9)).epsilon(1e-7));
}

TEST_CASE("KS p-values are roughly uniform under the null") {
  Rng rng(1);
  int small = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> xs(200);
    for (auto& x : xs) x = rng.uniform();
    if (stats::ks_test(xs, [](double x) { return x; }).pvalue < 0.05) ++small;
  }
  CHECK(small > 8);
  CHECK(small < 35);
  std::vector<double> a(2000), b(2000);
  for (auto& x : a) x = rng.normal();
  for (auto& x : b) x = rng.normal() + 0.2;
  CHECK(stats::two_sample_ks(a, b).pvalue < 1e-3);
  for (auto& x : b) x = rng.normal();
  CHECK(stats::two_sample_ks(a, b).pvalue > 1e-4);
}

TEST_CASE("KS on discrete data uses the cdf at atoms") {
  // All mass at integers; the exact cdf gives D close to 0.
  Rng rng(2);
  std::vector<double> xs(5000);
  for (auto& x : xs) x = rng.coin() ? 1.0 : 0.0;
  auto r = stats::ks_test(xs, [](double x) { return x < 0 ? 0.0 : x < 1 ? 0.5 : 1.0; });
  CHECK(r.statistic < 0.03);
}

TEST_CASE("chi-square") {
  std::vector<double> obs{50, 50}, probs{0.5, 0.5};
  auto r = stats::chi_square(obs, probs);
  CHECK(r.statistic == 0);
  CHECK(r.pvalue == doctest::Approx(1.0));
  std::vector<double> obs2{60, 40};
  auto r2 = stats::chi_square(obs2, probs);
  CHECK(r2.statistic == doctest::Approx(4.0));
  CHECK(r2.pvalue == doctest::Approx(0.0455003).epsilon(1e-5));
  std::vector<double> a{30, 70}, b{30, 70};
  CHECK(stats::chi_square_two_sample(a, b).pvalue == doctest::Approx(1.0));

  std::vector<double> o{100, 50, 3, 1, 1}, p{0.6, 0.3, 0.05, 0.03, 0.02};
  stats::merge_sparse_cells(o, p, 155);
  CHECK(o.size() == 4);
  CHECK(o.back() == 2);
  CHECK(p.back() == doctest::Approx(0.05));
}

TEST_CASE("mean and standard error") {
  std::vector<double> xs{1, 2, 3, 4};
  auto m = stats::mean_se(xs);
  CHECK(m.mean == 2.5);
  CHECK(m.variance == doctest::Approx(5.0 / 3));
  CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 12)));
  CHECK(m.within(3.0, 1));
  std::vector<double> none;
  CHECK_THROWS_AS(stats::mean_se(none), Error);
  CHECK(stats::normal_cdf(0) == 0.5);
  CHECK(stats::normal_cdf(1.96) == doctest::Approx(0.9750021));
}

TEST_CASE("json output") {
  stats::TestResult r{"ks", 0.5, 0.25, 10, 7};
  auto s = stats::to_json(r);
  CHECK(s.find("\"test\":\"ks\"") != std::string::npos);
  CHECK(s.find("\"seed\":7") != std::string::npos);
}
