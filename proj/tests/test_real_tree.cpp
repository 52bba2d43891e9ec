#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ctree/error.hpp"
#include "ctree/excursion.hpp"
#include "ctree/real_tree.hpp"

using namespace ctree;

namespace {

// Random excursion-like function on the grid 0..n with dyadic values.
PathGrid random_dyadic_excursion(std::size_t n, Rng& rng) {
  PathGrid g{1.0, std::vector<double>(n + 1, 0.0)};
  for (std::size_t k = 1; k < n; ++k) g.values[k] = static_cast<double>(rng.below(64)) / 16.0;
  return g;
}

FiniteRootedMetric random_tree_metric(std::size_t points, Rng& rng) {
  // Reduced tree of a random dyadic excursion at random grid times.
  auto g = random_dyadic_excursion(12, rng);
  std::vector<double> times;
  for (std::size_t i = 1; i < points; ++i) times.push_back(static_cast<double>(1 + rng.below(11)));
  std::sort(times.begin(), times.end());
  return metric_from_coded(CodedTree(g), times);
}

}  // namespace

TEST_CASE("d_g on a tent") {
  PathGrid tent{1.0, {0.0, 1.0, 0.0}};
  CHECK(d_g(tent, 0.3, 1.6) == doctest::Approx(0.1));
  CHECK(d_g(tent, 1.6, 0.3) == doctest::Approx(0.1));
  CHECK(d_g(tent, 0.7, 0.7) == 0.0);
  CHECK(d_g(tent, 0.0, 2.0) == 0.0);
  CHECK_THROWS_AS(d_g(tent, 0.0, 2.5), Error);
  CHECK_THROWS_AS(d_g(tent, -0.1, 1.0), Error);
  PiecewiseLinear valley{{0, 1, 2, 3, 4}, {0, 0.5, 0.2, 0.8, 0}};
  CHECK(d_g(valley, 0.6, 3.5) == doctest::Approx(0.3 + 0.4 - 0.4));
  CodedTree coded(valley);
  CHECK(coded.min_between(0.6, 3.5) == doctest::Approx(0.2));
  CHECK(coded.distance(1.0, 3.0) == doctest::Approx(0.9));
}

TEST_CASE("d_g is a tree metric on random grid times") {
  Rng rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    auto e = vervaat_excursion(1.0 / 1024, rng);
    quantize_dyadic(e);
    CodedTree g(e);
    std::vector<double> times;
    for (int i = 0; i < 7; ++i) times.push_back(static_cast<double>(rng.below(1025)) / 1024);
    std::sort(times.begin(), times.end());
    auto m = metric_from_coded(g, times);
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(m(i, i) == 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(m(i, j) == m(j, i));
        CHECK(m(i, j) >= 0.0);
        for (std::size_t k = 0; k < n; ++k) CHECK(satisfies_triangle(m, i, j, k));
      }
    }
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        for (std::size_t c = b + 1; c < n; ++c)
          for (std::size_t d = c + 1; d < n; ++d) CHECK(satisfies_four_point(m, a, b, c, d));
  }
}

TEST_CASE("re-rooting") {
  PathGrid tent{1.0, {0.0, 1.0, 0.0}};
  auto same = reroot(tent, 0.0);
  for (double t : {0.0, 0.5, 1.0, 1.5, 2.0}) CHECK(same.value_at(t) == tent.value_at(t));
  auto top = reroot(tent, 1.0);
  CHECK(top.value_at(0.0) == 0.0);
  CHECK(top.value_at(0.5) == doctest::Approx(0.5));
  CHECK(top.value_at(1.5) == doctest::Approx(0.5));
  CHECK(top.value_at(2.0) == 0.0);
  CHECK_THROWS_AS(reroot(tent, 2.5), Error);

  // d_{g'}(s, t) = d_g(s0 + s, s0 + t) cyclically, exactly at grid times.
  Rng rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 4 + rng.below(20);
    auto g = random_dyadic_excursion(n, rng);
    const double s0 = static_cast<double>(rng.below(n));
    auto h = reroot(g, s0);
    REQUIRE(h.span() == g.span());
    CHECK(h.value_at(0.0) == 0.0);
    CHECK(h.value_at(h.span()) == 0.0);
    auto wrap = [&](double t) { return std::fmod(s0 + t, static_cast<double>(n)); };
    for (std::size_t s = 0; s <= n; ++s)
      for (std::size_t t = 0; t <= n; ++t)
        CHECK(d_g(h, double(s), double(t)) == d_g(g, wrap(double(s)), wrap(double(t))));
    // Re-rooting back at the old root recovers d_g.
    auto back = reroot(h, std::fmod(static_cast<double>(n) - s0, static_cast<double>(n)));
    for (std::size_t s = 0; s <= n; ++s)
      for (std::size_t t = 0; t <= n; ++t) CHECK(d_g(back, double(s), double(t)) == d_g(g, double(s), double(t)));
  }
}

TEST_CASE("reduced trees") {
  PathGrid tent{1.0, {0.0, 1.0, 0.0}};
  std::vector<double> one{0.25};
  auto single = extract_marked_tree(tent, one);
  CHECK(single.skeleton == OrderedTree::single_vertex());
  CHECK(single.marks == std::vector<double>{0.25});

  CodedTree valley(PiecewiseLinear{{0, 1, 2, 3, 4}, {0, 0.5, 0.2, 0.8, 0}});
  std::vector<double> two{0.6, 3.5};
  auto t2 = extract_marked_tree(valley, two);
  CHECK(t2.skeleton.counts() == std::vector<int>{2, 0, 0});
  CHECK(t2.marks[0] == doctest::Approx(0.2));
  CHECK(t2.marks[1] == doctest::Approx(0.1));
  CHECK(t2.marks[2] == doctest::Approx(0.2));
  CHECK(t2.leaf_count() == 2);
  CHECK(t2.total_length() == doctest::Approx(0.5));

  // Equal minima give a vertex with three children.
  PathGrid comb{1.0, {0, 1, 0.5, 1, 0.5, 1, 0}};
  std::vector<double> peaks{1, 3, 5};
  auto t3 = extract_marked_tree(comb, peaks);
  CHECK(t3.skeleton.counts() == std::vector<int>{3, 0, 0, 0});
  CHECK(t3.marks == std::vector<double>{0.5, 0.5, 0.5, 0.5});

  std::vector<double> unsorted{1, 0.5};
  CHECK_THROWS_AS(extract_marked_tree(comb, unsorted), Error);
  std::vector<double> none;
  CHECK_THROWS_AS(extract_marked_tree(comb, none), Error);
}

TEST_CASE("reduced-tree distances equal d_g") {
  Rng rng(3);
  int binary = 0;
  for (int rep = 0; rep < 200; ++rep) {
    auto e = vervaat_excursion(1.0 / 4096, rng);
    CodedTree g(e);
    std::vector<double> times;
    for (int i = 0; i < 3 + static_cast<int>(rng.below(4)); ++i) times.push_back(rng.uniform());
    std::sort(times.begin(), times.end());
    auto tree = extract_marked_tree(g, times);
    CHECK(tree.leaf_count() == times.size());
    for (double h : tree.marks) CHECK(h >= 0.0);
    if (tree.skeleton.is_binary()) ++binary;
    auto from_tree = metric_from_marked_tree(tree);
    auto from_g = metric_from_coded(g, times);
    REQUIRE(from_tree.size() == from_g.size());
    for (std::size_t i = 0; i < from_g.size(); ++i)
      for (std::size_t j = 0; j < from_g.size(); ++j) CHECK(from_tree(i, j) == doctest::Approx(from_g(i, j)).epsilon(1e-12));
  }
  CHECK(binary == 200);
}

TEST_CASE("metric of a marked tree") {
  MarkedTree seg{OrderedTree::single_vertex(), {1.5}};
  auto m1 = metric_from_marked_tree(seg);
  CHECK(m1.size() == 2);
  CHECK(m1(0, 1) == 1.5);
  MarkedTree cherry{OrderedTree::from_counts({2, 0, 0}), {1, 2, 3}};
  auto m2 = metric_from_marked_tree(cherry);
  CHECK(m2(1, 2) == 5);
  CHECK(m2(0, 1) == 3);
  CHECK(m2(0, 2) == 4);
  auto m3 = metric_from_marked_tree(cherry, true);
  CHECK(m3.size() == 4);
  CHECK(m3(0, 3) == 1);
  CHECK(m3(1, 3) == 2);
  CHECK(to_csv(m2) == "0,3,4\n3,0,5\n4,5,0\n");

  auto back = marked_tree_from_json(to_json(cherry));
  CHECK(back.skeleton == cherry.skeleton);
  CHECK(back.marks == cherry.marks);
  CHECK_THROWS_AS(marked_tree_from_json("{\"skeleton\":\"2 0 0\",\"marks\":[1]}"), Error);
  CHECK_THROWS_AS(marked_tree_from_json("{\"skeleton\":\"0\",\"marks\":[-1]}"), Error);
  CHECK_THROWS_AS(marked_tree_from_json("not json"), Error);
}

TEST_CASE("Gromov-Hausdorff distances") {
  PathGrid a{1.0, {0, 1, 0}}, b{1.0, {0, 3, 0}};
  CHECK(gh_upper_bound(a, a) == 0.0);
  CHECK(gh_upper_bound(a, b) == 4.0);

  auto s1 = segment_metric(1.0, 3), s2 = segment_metric(2.0, 3);
  CHECK(gh_exact(s1, s1) == 0.0);
  CHECK(gh_exact(s1, s2) == doctest::Approx(0.5));
  CHECK(gh_exact(s1, s2) == gh_by_enumeration(s1, s2));
  CHECK_THROWS_AS(gh_exact(segment_metric(1.0, 8), s1), Error);

  Rng rng(4);
  std::vector<FiniteRootedMetric> spaces;
  for (int i = 0; i < 8; ++i) spaces.push_back(random_tree_metric(2 + rng.below(2), rng));
  for (const auto& x : spaces)
    for (const auto& y : spaces) {
      double d = gh_exact(x, y);
      CHECK(d == gh_by_enumeration(x, y));
      CHECK(d == gh_exact(y, x));
      for (const auto& z : spaces) CHECK(d <= gh_exact(x, z) + gh_exact(z, y) + 1e-12);
    }

  // Sup-norm bound on coded pairs: exact distance of the sampled subtrees
  // never exceeds 2 sup |g - h|.
  for (int rep = 0; rep < 30; ++rep) {
    auto g = random_dyadic_excursion(10, rng);
    auto h = g;
    for (std::size_t k = 1; k + 1 < h.size(); ++k) h.values[k] = std::max(0.0, h.values[k] + (rng.coin() ? 0.25 : -0.25));
    std::vector<double> times{2, 5, 8};
    auto mg = metric_from_coded(CodedTree(g), times), mh = metric_from_coded(CodedTree(h), times);
    CHECK(gh_exact(mg, mh) <= gh_upper_bound(g, h));
  }
}

TEST_CASE("isometric copies are at distance zero") {
  // The same 3-leaf tree with leaves listed in a different order.
  MarkedTree t{OrderedTree::from_counts({2, 0, 2, 0, 0}), {0.5, 1, 0.25, 0.5, 0.75}};
  auto m = metric_from_marked_tree(t);
  FiniteRootedMetric p = m;
  std::vector<std::size_t> perm{0, 3, 1, 2};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) p.distance[i][j] = m(perm[i], perm[j]);
  CHECK(gh_exact(m, p) == 0.0);
  // Moving the root changes the rooted distance.
  FiniteRootedMetric moved = m;
  moved.root = 1;
  CHECK(gh_exact(m, moved) > 0.0);
}
