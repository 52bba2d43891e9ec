#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "ctree/excursion.hpp"
#include "ctree/limits.hpp"

using namespace ctree;
using namespace ctree::limits;

TEST_CASE("oracle formulas") {
  CHECK(conditioned_duration_laplace(2.0, 1.0) == doctest::Approx(0.177678).epsilon(1e-5));
  CHECK(conditioned_duration_laplace(2.0, 0.0) == 1.0);
  CHECK(conditioned_duration_laplace(std::sqrt(2.0), 1.0) == doctest::Approx(0.313035).epsilon(1e-5));
  CHECK(half_normal_cdf(0.0, 1.0) == 0.0);
  CHECK(half_normal_cdf(1.959964, 1.0) == doctest::Approx(0.95).epsilon(1e-6));
  CHECK(chi3_cdf(1.5382) == doctest::Approx(0.5).epsilon(1e-3));
  // E max e = sqrt(pi / 2), from the cdf by integrating the survival function.
  double mean = 0, dx = 1e-4;
  for (double x = dx / 2; x < 6; x += dx) mean += (1 - excursion_max_cdf(x)) * dx;
  CHECK(excursion_max_cdf(0.999999) == doctest::Approx(excursion_max_cdf(1.0)).epsilon(1e-5));
  CHECK(mean == doctest::Approx(std::sqrt(std::numbers::pi / 2)).epsilon(1e-6));
}

TEST_CASE("exact height law of uniform ordered trees") {
  // n = 4: the five trees have heights 1, 2, 2, 2, 3.
  auto cdf = uniform_tree_height_cdf(4);
  CHECK(cdf[0] == 0.0);
  CHECK(cdf[1] == doctest::Approx(1.0 / 5));
  CHECK(cdf[2] == doctest::Approx(4.0 / 5));
  CHECK(cdf[3] == doctest::Approx(1.0));
  for (int n = 2; n <= 9; ++n) {
    std::vector<double> count(n, 0.0);
    auto trees = enumerate_trees(n);
    for (const auto& t : trees) {
      auto h = height_of(t);
      count[*std::max_element(h.begin(), h.end())] += 1;
    }
    auto exact = uniform_tree_height_cdf(n);
    double acc = 0;
    for (int h = 0; h < n; ++h) {
      acc += count[h] / trees.size();
      CHECK(exact[h] == doctest::Approx(acc).epsilon(1e-12));
    }
  }
  // The distance to the limit shrinks like n^{-1/2}.
  double d200 = uniform_tree_height_distance(200), d800 = uniform_tree_height_distance(800);
  CHECK(d800 < d200);
  CHECK(d800 / d200 == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("report plumbing") {
  auto z = z_report("z", stats::MeanSE{1.0, 0.5, 0.25, 10}, 2.0);
  CHECK(z.value == doctest::Approx(2.0));
  CHECK(z.pass);
  auto bad = z_report("z", stats::MeanSE{1.0, 0.1, 0.01, 10}, 2.0);
  CHECK_FALSE(bad.pass);
  auto all = all_of("both", {z, bad});
  CHECK_FALSE(all.pass);
  CHECK(all.value == 1);
  auto j = nlohmann::json::parse(to_json(all));
  CHECK(j["parts"].size() == 2);
  CHECK(j["parts"][0]["kind"] == "z");
  CHECK(exact_report("e", 0, 5).pass);
  CHECK_FALSE(exact_report("e", 1, 5).pass);
}

TEST_CASE("forest identities hold exactly") {
  for (const auto& law : {OffspringLaw::geometric(), OffspringLaw::poisson(), OffspringLaw::binary()}) {
    auto r = check_forest_identities(law, 2000, 20, 1);
    CHECK(r.pass);
  }
}

TEST_CASE("forest marginals at moderate size") {
  for (const auto& law : {OffspringLaw::geometric(), OffspringLaw::poisson(), OffspringLaw::binary()}) {
    CAPTURE(law.name());
    auto r = check_forest_marginals(law, 2500, 2000, 7);
    for (const auto& c : r) {
      CAPTURE(to_json(c));
      CHECK(c.pass);
    }
  }
  // Reports are determined by the seed.
  CHECK(to_json(check_height_marginal(OffspringLaw::geometric(), 100, 200, 3)) ==
        to_json(check_height_marginal(OffspringLaw::geometric(), 100, 200, 3)));
}

TEST_CASE("universality: heights of different laws agree after sigma scaling") {
  std::vector<std::vector<double>> h;
  std::uint64_t seed = 100;
  for (const auto& law : {OffspringLaw::geometric(), OffspringLaw::poisson(), OffspringLaw::binary()}) {
    std::vector<double> v(2000);
    for (std::size_t i = 0; i < v.size(); ++i) {
      Rng rng = Rng::stream(seed, i);
      auto f = forest_height_process(law, 2501, rng);
      v[i] = law.sigma() * f.height[2500] / 50.0;
    }
    h.push_back(std::move(v));
    ++seed;
  }
  CHECK(stats::two_sample_ks(h[0], h[1]).pvalue > 1e-3);
  CHECK(stats::two_sample_ks(h[0], h[2]).pvalue > 1e-3);
}

TEST_CASE("geometric contour moves like a simple walk away from 0") {
  Rng rng(8);
  auto f = forest_height_process(OffspringLaw::geometric(), 200000, rng);
  auto c = contour_from_height(f.height, f.index);
  double up = 0, moves = 0;
  for (std::size_t t = 1; t + 1 < c.size(); ++t) {
    if (c[t] <= 0) continue;
    moves += 1;
    up += c[t + 1] > c[t];
  }
  double frac = up / moves;
  CHECK(std::abs(frac - 0.5) < 4 * std::sqrt(0.25 / moves));
}

TEST_CASE("height-conditioned trees: simulation against the exact discrete transform") {
  const auto law = OffspringLaw::geometric();
  const int p = 40;
  auto r = check_conditioned_height(law, p, 3000, {1.0}, 9);
  REQUIRE(r.parts.size() == 2);
  const auto& lap = r.parts[0];
  double exact = conditioned_height_size_transform(law, p, std::exp(-1.0 / (p * p)));
  CHECK(std::abs(lap.estimate - exact) < 4 * lap.se);
  CHECK(r.parts[1].pass);
}

TEST_CASE("Ray-Knight and Feller checks at small scale") {
  auto rk = check_ray_knight(300, 1e-4, {0.5}, 4);
  CAPTURE(to_json(rk));
  CHECK(rk.pass);
  auto fl = check_feller_limit(OffspringLaw::poisson(), 50, 20, 2000, 1e-3, 5);
  CAPTURE(to_json(fl));
  CHECK(fl.parts[0].pass);
  CHECK(fl.parts[1].pass);
  CHECK(fl.parts[2].pass);
}

TEST_CASE("conditioned size check runs and reports a p-value") {
  auto r = check_conditioned_size(OffspringLaw::binary(), 201, 300, 300, 1e-3, 6);
  CHECK(r.kind == "ks2");
  CHECK(r.value >= 0.0);
  CHECK(r.value <= 1.0);
  CHECK(r.n == 600);
}
