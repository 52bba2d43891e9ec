#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ctree/error.hpp"
#include "ctree/excursion.hpp"
#include "ctree/stats.hpp"

using namespace ctree;

TEST_CASE("Brownian grid") {
  Rng rng(1);
  std::vector<double> ends(20000);
  for (auto& e : ends) e = sample_bm(0.01, 2.0, rng).values.back();
  auto m = stats::mean_se(ends);
  CHECK(m.within(0.0, 4));
  CHECK(m.variance == doctest::Approx(2.0).epsilon(0.05));
  CHECK_THROWS_AS(sample_bm(0.3, 1.0, rng), Error);
  auto p = sample_bm(0.5, 1.0, rng, 3.0);
  CHECK(p.size() == 3);
  CHECK(p.values[0] == 3.0);
  CHECK(p.span() == 1.0);
  PathGrid g{0.5, {0.0, 1.0, 3.0}};
  CHECK(g.value_at(0.25) == 0.5);
  CHECK(g.value_at(0.75) == 2.0);
  CHECK(g.value_at(5.0) == 3.0);
  CHECK(g.max() == 3.0);
  CHECK(to_csv(g) == "time,value\n0,0\n0.5,1\n1,3\n");
}

TEST_CASE("reflected path and its local time") {
  Rng rng(2);
  auto r = reflected_bm_with_local_time(1e-3, 1.0, rng);
  for (std::size_t k = 0; k < r.path.size(); ++k) {
    CHECK(r.path.values[k] >= 0);
    if (k > 0) {
      CHECK(r.ltime[k] >= r.ltime[k - 1]);
      if (r.ltime[k] > r.ltime[k - 1]) CHECK(r.path.values[k] == 0);
    }
  }
  // E L_1 = sqrt(2 / pi)
  std::vector<double> l(20000);
  for (auto& v : l) v = reflected_bm_with_local_time(1e-2, 1.0, rng).ltime.back();
  CHECK(stats::mean_se(l).mean == doctest::Approx(std::sqrt(2 / std::numbers::pi)).epsilon(0.04));

  auto until = reflected_until_local_time(1e-3, 0.5, 2.0, rng);
  CHECK(until.ltime.back() >= 0.5);
  CHECK(until.ltime[until.ltime.size() - 2] < 0.5);
  CHECK(until.path.max() <= 2.0);
}

TEST_CASE("Levy pair at time 1 has the reflection-principle joint law") {
  // With r = path + ltime, r is chi(3) and ltime / r is uniform, independently.
  Rng rng(12);
  std::vector<double> r(4000), share(4000);
  for (std::size_t i = 0; i < r.size(); ++i) {
    auto p = reflected_bm_with_local_time(1e-4, 1.0, rng);
    r[i] = p.path.values.back() + p.ltime.back();
    share[i] = p.ltime.back() / r[i];
  }
  auto chi3 = [](double x) {
    return x <= 0 ? 0.0 : std::erf(x / std::sqrt(2.0)) - std::sqrt(2 / std::numbers::pi) * x * std::exp(-x * x / 2);
  };
  CHECK(stats::ks_test(r, chi3).pvalue > 1e-3);
  CHECK(stats::ks_test(share, [](double x) { return std::clamp(x, 0.0, 1.0); }).pvalue > 1e-3);
}

TEST_CASE("signs and local time by excursion counts") {
  Rng rng(3);
  PathGrid refl{1.0, {0, 1, 2, 0, 0, 3, 1, 0}};
  auto s = random_signs(refl, rng);
  for (std::size_t k = 0; k < refl.size(); ++k) CHECK(std::abs(s.values[k]) == refl.values[k]);
  CHECK(s.values[1] * s.values[2] > 0);
  CHECK(s.values[5] * s.values[6] > 0);

  PathGrid signed_path{1.0, {0, 1, 0, -1, 0, 0.5, 0, 2, 1, 0, 3}};
  // Completed positive excursions of height >= 1: [0,1,0] and [0,2,1,0].
  CHECK(local_time_via_counts(signed_path, 1.0) == 4.0);
  CHECK(local_time_via_counts(signed_path, 0.5) == 3.0);

  CHECK(local_time_via_counts(PathGrid{1.0, {0, 0, 0}}, 0.1) == 0.0);
  CHECK(local_time_via_counts(PathGrid{1.0, {0, 1, 0}}, 0.5) == 1.0);
}

TEST_CASE("excursion counts approach the Levy local time as eps halves") {
  Rng rng(13);
  const std::vector<double> eps{0.1, 0.05, 0.025};
  std::vector<double> mad(eps.size(), 0.0);
  const int paths = 150;
  for (int i = 0; i < paths; ++i) {
    auto r = reflected_bm_with_local_time(1e-6, 1.0, rng);
    auto signed_path = random_signs(r.path, rng);
    for (std::size_t e = 0; e < eps.size(); ++e)
      mad[e] += std::abs(local_time_via_counts(signed_path, eps[e]) - r.ltime.back()) / paths;
  }
  CAPTURE(mad);
  CHECK(mad[1] < mad[0]);
  CHECK(mad[2] < mad[1]);
}

TEST_CASE("normalized excursion") {
  Rng rng(4);
  const double dt = 1e-4;
  std::vector<double> area(1500), height(1500);
  for (std::size_t i = 0; i < area.size(); ++i) {
    auto e = vervaat_excursion(dt, rng);
    REQUIRE(e.size() == 10001);
    CHECK(e.values.front() == 0);
    CHECK(e.values.back() == 0);
    CHECK(*std::min_element(e.values.begin(), e.values.end()) == 0);
    double a = 0;
    for (double v : e.values) a += v * dt;
    area[i] = a;
    height[i] = e.max();
  }
  std::vector<double> third(1500), two_thirds(1500);
  for (std::size_t i = 0; i < third.size(); ++i) {
    auto e = vervaat_excursion(1e-3, rng);
    third[i] = e.value_at(1.0 / 3);
    two_thirds[i] = e.value_at(2.0 / 3);
  }
  CHECK(stats::two_sample_ks(third, two_thirds).pvalue > 1e-3);
  // E int e = sqrt(pi / 8), E max e = sqrt(pi / 2); the grid max is biased low by about 0.58 sqrt(dt).
  CHECK(stats::mean_se(area).within(std::sqrt(std::numbers::pi / 8), 4));
  CHECK(stats::mean_se(height).within(std::sqrt(std::numbers::pi / 2) - 0.5826 * std::sqrt(dt), 4));
}

TEST_CASE("excursion conditioned on its height") {
  Rng rng(5);
  const int reps = 2000;
  int above = 0, capped = 0;
  std::vector<double> laplace;
  for (int i = 0; i < reps; ++i) {
    try {
      auto e = excursion_height_gt(1.0, 1e-3, rng, 2'000'000);
      CHECK(e.weight == 0.5);
      CHECK(e.path.max() >= 1.0);
      CHECK(e.path.values.front() == 0);
      CHECK(e.path.values.back() == 0);
      if (e.path.max() > 2.0) ++above;
      laplace.push_back(std::exp(-e.path.span()));
    } catch (const Error& err) {
      // The return time from height h has tail ~ h / sqrt(T); a capped run
      // has duration above 2000, so its Laplace weight is 0.
      CHECK(err.code() == ErrorCode::BudgetExceeded);
      ++capped;
      laplace.push_back(0.0);
    }
  }
  CHECK(capped < reps / 25);
  // N(sup > 2 | sup > 1) = 1/2
  double frac = above / double(reps - capped);
  CHECK(std::abs(frac - 0.5) < 4 * std::sqrt(0.25 / reps) + 0.02);
  // E exp(-D) = sqrt(2) e^{-sqrt 2} / sinh(sqrt 2) at h = 1
  const double r2 = std::sqrt(2.0);
  auto m = stats::mean_se(laplace);
  CHECK(std::abs(m.mean - r2 * std::exp(-r2) / std::sinh(r2)) < 4 * m.se + 0.01);
}

TEST_CASE("Feller diffusion") {
  Rng rng(6);
  std::vector<double> x(4000), dead(4000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto p = feller_diffusion(2.0, 1.0, 1e-3, 1.0, rng);
    x[i] = p.values.back();
    dead[i] = p.values.back() == 0 ? 1.0 : 0.0;
    for (double v : p.values) CHECK(v >= 0);
  }
  CHECK(stats::mean_se(x).within(1.0, 4));
  CHECK(stats::mean_se(x).variance == doctest::Approx(4.0).epsilon(0.1));
  CHECK(feller_diffusion(2.0, 0.0, 0.1, 1.0, rng).max() == 0.0);
  // P(X_1 = 0) = exp(-2 x0 / (sigma^2 t)); the Euler scheme absorbs slightly late.
  CHECK(stats::mean_se(dead).mean == doctest::Approx(std::exp(-0.5)).epsilon(0.06));
  CHECK_THROWS_AS(feller_diffusion(2.0, 1.0, 0.3, 1.0, rng), Error);
}
