#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <numbers>

#include "ctree/crt.hpp"
#include "ctree/error.hpp"
#include "ctree/stats.hpp"

using namespace ctree;

namespace {

MarkedTree cherry(double a, double b, double c) { return {OrderedTree::from_counts({2, 0, 0}), {a, b, c}}; }

MarkedTree random_binary(int p, Rng& rng) {
  auto t = sample_marginal_direct(p, rng);
  for (double& h : t.marks) h = 2 * rng.uniform();
  return t;
}

}  // namespace

TEST_CASE("density values") {
  MarkedTree stick{OrderedTree::single_vertex(), {0.5}};
  CHECK(density_normalized(stick) == doctest::Approx(4 * 0.5 * std::exp(-0.5)).epsilon(1e-14));
  CHECK(density_normalized(stick) == doctest::Approx(1.2131).epsilon(1e-4));
  CHECK(density_normalized(cherry(0, 0, 0)) == 0.0);
  MarkedTree ternary{OrderedTree::from_counts({3, 0, 0, 0}), {1, 1, 1, 1}};
  CHECK_THROWS_AS(density_normalized(ternary), Error);
  CHECK(density_ito_joint(stick, 1.0) == doctest::Approx(std::exp(-0.5) / std::sqrt(2 * std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("hitting-time density is a probability density") {
  boost::math::quadrature::exp_sinh<double> integrator;
  for (double a : {0.3, 1.0, 2.5}) CHECK(integrator.integrate([&](double t) { return hitting_time_density(a, t); }) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("Ito joint density conditioned on duration 1 gives the normalized density") {
  Rng rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    int p = 1 + static_cast<int>(rng.below(6));
    auto t = random_binary(p, rng);
    double ratio = density_ito_joint(t, 1.0) / (0.5 / std::sqrt(2 * std::numbers::pi));
    CHECK(ratio == doctest::Approx(density_normalized(t) / std::tgamma(p + 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("normalization") {
  for (int p = 1; p <= 5; ++p) CHECK(normalization_by_quadrature(p) == doctest::Approx(1.0).epsilon(1e-9));
  // The orthant reduction against a direct triple integral (p = 2).
  boost::math::quadrature::gauss_kronrod<double, 31> gk;
  auto f = [](double l) { return l * std::exp(-2 * l * l); };
  const double cut = 6.0;
  double triple = gk.integrate(
      [&](double x) {
        return gk.integrate(
            [&](double y) { return gk.integrate([&](double z) { return f(x + y + z); }, 0.0, cut, 0, 1e-12); }, 0.0,
            cut, 0, 1e-12);
      },
      0.0, cut, 0, 1e-12);
  CHECK(triple == doctest::Approx(orthant_integral(f, 3)).epsilon(1e-9));
  CHECK(orthant_integral(f, 3) == doctest::Approx(1.0 / 16).epsilon(1e-12));
}

TEST_CASE("Aldous normalization") {
  CHECK(aldous_normalization(2).count == 1);
  CHECK(aldous_normalization(3).count == 3);
  CHECK(aldous_normalization(5).count == 105);
  CHECK_THROWS_AS(aldous_normalization(1), Error);
  for (int p = 2; p <= 6; ++p) {
    auto a = aldous_normalization(p);
    const int dim = 2 * p - 1;
    double total = orthant_integral(
        [&](double l) {
          std::vector<double> marks(static_cast<std::size_t>(dim), l / dim);
          return a.density(marks);
        },
        dim);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
  // Doubling the marks of the normalized tree: c_p times the transformed
  // density of one ordered shape is the Aldous density of the marks.
  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    int p = 2 + static_cast<int>(rng.below(5));
    auto t = random_binary(p, rng);
    MarkedTree half = t;
    for (double& h : half.marks) h /= 2;
    double transformed = density_normalized(half) * std::ldexp(1.0, -(2 * p - 1)) *
                         static_cast<double>(count_binary_skeletons(p));
    CHECK(transformed == doctest::Approx(aldous_normalization(p).density(t.marks)).epsilon(1e-12));
  }
}

TEST_CASE("direct sampler") {
  Rng rng(3);
  const int n = 20000;
  std::vector<double> l1(n), l2(n), root_share(n);
  for (int i = 0; i < n; ++i) {
    auto t1 = sample_marginal_direct(1, rng);
    REQUIRE(t1.skeleton == OrderedTree::single_vertex());
    l1[i] = t1.total_length();
    auto t2 = sample_marginal_direct(2, rng);
    REQUIRE(t2.skeleton.counts() == std::vector<int>{2, 0, 0});
    l2[i] = t2.total_length();
    root_share[i] = t2.marks[0] / l2[i];
  }
  CHECK(stats::ks_test(l1, [](double x) { return x <= 0 ? 0.0 : 1 - std::exp(-2 * x * x); }).pvalue > 1e-3);
  CHECK(stats::ks_test(l2, [](double x) { return x <= 0 ? 0.0 : 1 - std::exp(-2 * x * x) * (1 + 2 * x * x); }).pvalue > 1e-3);
  // One coordinate of a uniform point on the 2-simplex is Beta(1, 2).
  CHECK(stats::ks_test(root_share, [](double x) { return 1 - (1 - x) * (1 - x); }).pvalue > 1e-3);

  std::map<std::vector<int>, double> shapes;
  for (int i = 0; i < 10000; ++i) shapes[sample_marginal_direct(4, rng).skeleton.counts()] += 1;
  REQUIRE(shapes.size() == 5);
  std::vector<double> obs, probs(5, 0.2);
  for (const auto& [k, v] : shapes) obs.push_back(v);
  CHECK(stats::chi_square(obs, probs).pvalue > 1e-3);
}

TEST_CASE("excursion sampler agrees with the direct sampler") {
  Rng rng(4);
  const int n = 1500;
  for (int p : {1, 2, 3}) {
    CAPTURE(p);
    std::vector<double> la(n), lb(n);
    std::map<std::vector<int>, std::pair<double, double>> shapes;
    for (int i = 0; i < n; ++i) {
      auto a = sample_marginal_via_excursion(p, 1e-4, rng);
      auto b = sample_marginal_direct(p, rng);
      la[i] = a.total_length();
      lb[i] = b.total_length();
      shapes[a.skeleton.counts()].first += 1;
      shapes[b.skeleton.counts()].second += 1;
    }
    CHECK(stats::two_sample_ks(la, lb).pvalue > 1e-3);
    if (p == 3) {
      REQUIRE(shapes.size() == 2);
      std::vector<double> ca, cb;
      for (const auto& [k, v] : shapes) {
        ca.push_back(v.first);
        cb.push_back(v.second);
      }
      CHECK(stats::chi_square_two_sample(ca, cb).pvalue > 1e-3);
    }
  }
}
