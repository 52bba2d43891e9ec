#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "ctree/error.hpp"
#include "ctree/trees.hpp"

using namespace ctree;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ctree::Error");
  return ErrorCode::InvalidTree;
}

// Binomial coefficients from Pascal's triangle, independent of catalan().
std::uint64_t catalan_pascal(int n) {
  std::vector<std::vector<std::uint64_t>> c(2 * n + 1);
  for (int i = 0; i <= 2 * n; ++i) {
    c[i].assign(i + 1, 1);
    for (int j = 1; j < i; ++j) c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
  }
  return c[2 * n][n] / (n + 1);
}

}  // namespace

TEST_CASE("labels to counts and back") {
  auto t = tree_from_labels({{}, {1}, {2}});
  CHECK(t.counts() == std::vector<int>{2, 0, 0});
  auto chain = tree_from_labels({{}, {1}, {1, 1}});
  CHECK(chain.counts() == std::vector<int>{1, 1, 0});
  CHECK(tree_from_labels({{}}).counts() == std::vector<int>{0});
  CHECK(labels_of(t) == std::vector<Label>{{}, {1}, {2}});
  auto big = tree_from_labels({{}, {1}, {2}, {2, 1}, {2, 2}, {2, 2, 1}, {3}});
  CHECK(tree_from_labels(labels_of(big)) == big);
}

TEST_CASE("label errors") {
  CHECK(code_of([] { tree_from_labels({{1}}); }) == ErrorCode::MissingRoot);
  CHECK(code_of([] { tree_from_labels({{}, {1, 1}}); }) == ErrorCode::MissingParent);
  CHECK(code_of([] { tree_from_labels({{}, {2}}); }) == ErrorCode::GapInChildren);
}

TEST_CASE("Lukasiewicz path, height and contour of small trees") {
  auto t = OrderedTree::from_counts({2, 0, 0});
  CHECK(lukasiewicz_of(t) == std::vector<std::int64_t>{0, 1, 0, -1});
  CHECK(height_of(t) == std::vector<int>{0, 1, 1});
  CHECK(contour_of(t) == std::vector<int>{0, 1, 0, 1, 0, 0});

  auto chain = OrderedTree::from_counts({1, 1, 0});
  CHECK(lukasiewicz_of(chain) == std::vector<std::int64_t>{0, 0, 0, -1});
  CHECK(height_of(chain) == std::vector<int>{0, 1, 2});
  CHECK(contour_of(chain) == std::vector<int>{0, 1, 2, 1, 0, 0});

  CHECK(contour_of(OrderedTree::single_vertex()) == std::vector<int>{0, 0});
}

TEST_CASE("path decoding errors") {
  std::vector<std::int64_t> early{0, -1, 0, -1};
  CHECK(code_of([&] { tree_from_lukasiewicz(early); }) == ErrorCode::InvalidPath);
  std::vector<std::int64_t> jump{0, 2, -1};
  CHECK(code_of([&] { tree_from_lukasiewicz(jump); }) == ErrorCode::InvalidPath);
  std::vector<std::int64_t> no_end{0, 1, 0};
  CHECK(code_of([&] { tree_from_lukasiewicz(no_end); }) == ErrorCode::InvalidPath);
  CHECK(code_of([] { OrderedTree::from_counts({0, 1}); }) == ErrorCode::InvalidTree);
}

TEST_CASE("contour from height, forests and inconsistent input") {
  std::vector<int> h{0, 1, 1};
  std::vector<std::int64_t> idx{0, 0, 0};
  CHECK(contour_from_height(h, idx) == std::vector<int>{0, 1, 0, 1, 0, 0});

  std::vector<int> h2{0, 0};
  std::vector<std::int64_t> idx2{0, -1};
  CHECK(contour_from_height(h2, idx2) == std::vector<int>{0, 0, 0, 0});

  std::vector<int> jump{0, 2};
  std::vector<std::int64_t> z{0, 0};
  CHECK(code_of([&] { contour_from_height(jump, z); }) == ErrorCode::InconsistentInput);
  std::vector<int> roots{0, 0};
  CHECK(code_of([&] { contour_from_height(roots, z); }) == ErrorCode::InconsistentInput);
  std::vector<int> bad_start{1};
  std::vector<std::int64_t> z1{0};
  CHECK(code_of([&] { contour_from_height(bad_start, z1); }) == ErrorCode::InconsistentInput);
}

TEST_CASE("continuous contour agrees with the integer contour inside each tree") {
  // Forest of the trees "2 0 0", "0", "1 1 0".
  std::vector<int> h{0, 1, 1, 0, 0, 1, 2};
  std::vector<std::int64_t> idx{0, 0, 0, -1, -2, -2, -2};
  auto j = contour_times(h, idx);
  CHECK(j == std::vector<std::int64_t>{0, 1, 3, 5, 6, 7, 8, 11});
  std::vector<int> expected{0, 1, 0, 1, 0, 0, 0, 1, 2, 1, 0, 0};
  for (int t = 0; t < 12; ++t) CHECK(contour_value_at(h, j, t) == doctest::Approx(expected[t]));
  CHECK(contour_value_at(h, j, 0.5) == doctest::Approx(0.5));
  CHECK(contour_value_at(h, j, 7.25) == doctest::Approx(1.25));
}

TEST_CASE("enumeration matches golden files and Catalan numbers") {
  for (int p = 1; p <= 6; ++p) {
    std::ifstream in(std::string(CTREE_GOLDEN_DIR) + "/trees_p" + std::to_string(p) + ".txt");
    REQUIRE(in.good());
    std::vector<std::string> golden;
    for (std::string line; std::getline(in, line);)
      if (!line.empty()) golden.push_back(line);
    auto trees = enumerate_trees(p);
    REQUIRE(trees.size() == golden.size());
    for (std::size_t i = 0; i < trees.size(); ++i) CHECK(to_text(trees[i]) == golden[i]);
  }
  for (int p = 1; p <= 12; ++p) CHECK(enumerate_trees(p).size() == catalan_pascal(p - 1));
  CHECK(enumerate_trees(8).size() == 429);
  CHECK(code_of([] { enumerate_trees(13); }) == ErrorCode::TooLarge);
}

TEST_CASE("round trips and contour zero count over all small trees") {
  for (int p = 1; p <= 8; ++p) {
    for (const auto& t : enumerate_trees(p)) {
      auto x = lukasiewicz_of(t);
      CHECK(tree_from_lukasiewicz(x) == t);
      CHECK(height_from_lukasiewicz(x) == height_of(t));
      CHECK(tree_from_labels(labels_of(t)) == t);
      auto c = contour_of(t);
      CHECK(tree_from_contour(c) == t);
      std::vector<std::int64_t> idx(t.size(), 0);
      CHECK(contour_from_height(height_of(t), idx) == c);
      CHECK(std::count(c.begin(), c.end(), 0) == t.children(0) + 2);
    }
  }
}

TEST_CASE("binary counts") {
  for (int p = 1; p <= 12; ++p) CHECK(count_binary_skeletons(p) == catalan_pascal(p - 1));
  CHECK(count_labelled_binary(1) == 1);
  CHECK(count_labelled_binary(2) == 1);
  CHECK(count_labelled_binary(3) == 3);
  for (int p = 1; p <= 15; ++p) {
    // b_p = p! 2^{-(p-1)} c_p
    long double f = 1;
    for (int k = 2; k <= p; ++k) f *= k;
    long double v = f / std::pow(2.0L, p - 1) * static_cast<long double>(count_binary_skeletons(p));
    CHECK(static_cast<double>(count_labelled_binary(p)) == doctest::Approx(static_cast<double>(v)));
  }
  // Binary shapes with p leaves, counted directly from the enumeration.
  for (int p = 1; p <= 6; ++p) {
    auto all = enumerate_trees(2 * p - 1);
    auto binary = std::count_if(all.begin(), all.end(), [](const OrderedTree& t) { return t.is_binary(); });
    CHECK(static_cast<std::uint64_t>(binary) == count_binary_skeletons(p));
  }
  CHECK(code_of([] { catalan(40); }) == ErrorCode::Overflow);
  CHECK(code_of([] { count_labelled_binary(40); }) == ErrorCode::Overflow);
}

TEST_CASE("text format") {
  CHECK(to_text(parse_tree("2 0 0")) == "2 0 0");
  CHECK(code_of([] { parse_tree("2 0"); }) == ErrorCode::InvalidTree);
}
