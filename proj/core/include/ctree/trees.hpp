#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctree {

// A finite rooted ordered tree, stored as the children counts of its vertices
// listed in lexicographic (depth-first) order of their Ulam-Harris labels.
class OrderedTree {
 public:
  // Throws Error(InvalidTree) unless the counts describe exactly one tree.
  static OrderedTree from_counts(std::vector<int> counts);
  static OrderedTree single_vertex() { return OrderedTree({0}); }

  const std::vector<int>& counts() const { return counts_; }
  std::size_t size() const { return counts_.size(); }
  int children(std::size_t vertex) const { return counts_[vertex]; }
  std::size_t leaves() const;
  bool is_binary() const;  // every vertex has 0 or 2 children

  friend bool operator==(const OrderedTree&, const OrderedTree&) = default;
  friend auto operator<=>(const OrderedTree&, const OrderedTree&) = default;

 private:
  explicit OrderedTree(std::vector<int> counts) : counts_(std::move(counts)) {}
  std::vector<int> counts_;
};

using Label = std::vector<int>;  // empty label is the root; children numbered from 1

OrderedTree tree_from_labels(const std::vector<Label>& labels);
std::vector<Label> labels_of(const OrderedTree& tree);

// x_0 = 0, x_n = sum_{i<n} (k_i - 1); length size()+1, ends at -1.
std::vector<std::int64_t> lukasiewicz_of(const OrderedTree& tree);
OrderedTree tree_from_lukasiewicz(std::span<const std::int64_t> path);

// Generation of each vertex, computed from the tree structure.
std::vector<int> height_of(const OrderedTree& tree);

// h(n) = #{j < n : x_j = min_{j <= l <= n} x_l} for n < path.size() - 1.
// Valid for a single tree and for concatenated forests alike.
std::vector<int> height_from_lukasiewicz(std::span<const std::int64_t> path);

// Contour sequence of length 2p: the depth-first exploration C_0..C_{2p-2}
// followed by one trailing 0.
std::vector<int> contour_of(const OrderedTree& tree);
OrderedTree tree_from_contour(std::span<const int> contour);

// J_n = 2n - H_n + I_n, with one extra entry for the root that would follow
// the last vertex.
std::vector<std::int64_t> contour_times(std::span<const int> height,
                                        std::span<const std::int64_t> tree_index);

// Contour of a forest rebuilt from its height sequence and the index sequence
// I (0 on the first tree, decreasing by one at every new root). Each tree
// contributes its closed window [J_first, J_next_root], i.e. 2p values.
std::vector<int> contour_from_height(std::span<const int> height,
                                     std::span<const std::int64_t> tree_index);

// Value of the continuous forest contour at real time t >= 0, given J from
// contour_times. Times beyond the last tree clamp to 0.
double contour_value_at(std::span<const int> height, std::span<const std::int64_t> times,
                        double t);

// All trees with p vertices in increasing lexicographic order of counts.
std::vector<OrderedTree> enumerate_trees(int p, int max_p = 12);

// Number of binary ordered shapes with p leaves: Catalan(p-1).
std::uint64_t count_binary_skeletons(int p);
// 1 * 3 * ... * (2p-3) (and 1 for p = 1): binary shapes with labelled leaves,
// unordered.
std::uint64_t count_labelled_binary(int p);
std::uint64_t catalan(int n);

std::string to_text(const OrderedTree& tree);
OrderedTree parse_tree(std::string_view text);

}  // namespace ctree
