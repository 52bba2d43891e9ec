#include "ctree/trees.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "ctree/error.hpp"

namespace ctree {

namespace {

bool valid_counts(const std::vector<int>& counts) {
  if (counts.empty()) return false;
  std::int64_t x = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) return false;
    x += counts[i] - 1;
    if (i + 1 < counts.size() && x < 0) return false;
  }
  return x == -1;
}

}  // namespace

OrderedTree OrderedTree::from_counts(std::vector<int> counts) {
  if (!valid_counts(counts)) throw Error(ErrorCode::InvalidTree, "children counts do not code a tree");
  return OrderedTree(std::move(counts));
}

std::size_t OrderedTree::leaves() const {
  return static_cast<std::size_t>(std::count(counts_.begin(), counts_.end(), 0));
}

bool OrderedTree::is_binary() const {
  return std::all_of(counts_.begin(), counts_.end(), [](int k) { return k == 0 || k == 2; });
}

OrderedTree tree_from_labels(const std::vector<Label>& labels) {
  // std::set orders labels lexicographically, which is depth-first order.
  std::set<Label> set(labels.begin(), labels.end());
  if (!set.contains(Label{})) throw Error(ErrorCode::MissingRoot, "label set has no root");
  std::map<Label, int> kids;
  for (const Label& u : set) {
    kids.emplace(u, 0);
    if (u.empty()) continue;
    if (u.back() < 1) throw Error(ErrorCode::InvalidTree, "labels use positive integers");
    Label parent(u.begin(), u.end() - 1);
    if (!set.contains(parent)) throw Error(ErrorCode::MissingParent, "parent of a label is absent");
    int& k = kids[parent];
    k = std::max(k, u.back());
  }
  std::vector<int> counts;
  counts.reserve(set.size());
  for (const Label& u : set) {
    int k = kids[u];
    Label child = u;
    child.push_back(0);
    for (int j = 1; j <= k; ++j) {
      child.back() = j;
      if (!set.contains(child)) throw Error(ErrorCode::GapInChildren, "children are not numbered 1..k");
    }
    counts.push_back(k);
  }
  return OrderedTree::from_counts(std::move(counts));
}

std::vector<Label> labels_of(const OrderedTree& tree) {
  std::vector<Label> out;
  out.reserve(tree.size());
  // Stack of (label of parent, next child number, children total).
  struct Frame {
    Label label;
    int next;
    int total;
  };
  std::vector<Frame> stack;
  out.push_back({});
  stack.push_back({{}, 1, tree.children(0)});
  for (std::size_t n = 1; n < tree.size(); ++n) {
    while (stack.back().next > stack.back().total) stack.pop_back();
    Frame& top = stack.back();
    Label u = top.label;
    u.push_back(top.next++);
    out.push_back(u);
    stack.push_back({std::move(u), 1, tree.children(n)});
  }
  return out;
}

std::vector<std::int64_t> lukasiewicz_of(const OrderedTree& tree) {
  std::vector<std::int64_t> x(tree.size() + 1, 0);
  for (std::size_t i = 0; i < tree.size(); ++i) x[i + 1] = x[i] + tree.children(i) - 1;
  return x;
}

OrderedTree tree_from_lukasiewicz(std::span<const std::int64_t> path) {
  if (path.size() < 2 || path[0] != 0) throw Error(ErrorCode::InvalidPath, "path must start at 0");
  std::vector<int> counts(path.size() - 1);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    std::int64_t step = path[i + 1] - path[i];
    if (step < -1) throw Error(ErrorCode::InvalidPath, "increment below -1");
    if (i + 1 < path.size() - 1 && path[i + 1] < 0)
      throw Error(ErrorCode::InvalidPath, "path hits -1 before its end");
    counts[i] = static_cast<int>(step + 1);
  }
  if (path.back() != -1) throw Error(ErrorCode::InvalidPath, "path must end at -1");
  return OrderedTree::from_counts(std::move(counts));
}

std::vector<int> height_of(const OrderedTree& tree) {
  std::vector<int> h(tree.size(), 0);
  std::vector<int> pending;  // children still to visit, per open ancestor
  pending.push_back(tree.children(0));
  for (std::size_t n = 1; n < tree.size(); ++n) {
    while (pending.back() == 0) pending.pop_back();
    --pending.back();
    h[n] = static_cast<int>(pending.size());
    pending.push_back(tree.children(n));
  }
  return h;
}

std::vector<int> height_from_lukasiewicz(std::span<const std::int64_t> path) {
  if (path.empty()) return {};
  std::vector<int> h(path.size() - 1);
  // Indices j < n with x_j <= x_l for every l in (j, n]; their count is h(n).
  std::vector<std::int64_t> stack;
  stack.reserve(64);
  for (std::size_t n = 0; n + 1 < path.size(); ++n) {
    while (!stack.empty() && stack.back() > path[n]) stack.pop_back();
    h[n] = static_cast<int>(stack.size());
    stack.push_back(path[n]);
  }
  return h;
}

std::vector<int> contour_of(const OrderedTree& tree) {
  const std::size_t p = tree.size();
  std::vector<int> c;
  c.reserve(2 * p);
  std::vector<int> pending{tree.children(0)};
  c.push_back(0);
  std::size_t next = 1;
  while (!pending.empty()) {
    if (pending.back() > 0) {
      --pending.back();
      pending.push_back(tree.children(next++));
    } else {
      pending.pop_back();
      if (pending.empty()) break;
    }
    c.push_back(static_cast<int>(pending.size()) - 1);
  }
  c.push_back(0);
  return c;
}

OrderedTree tree_from_contour(std::span<const int> contour) {
  const std::size_t len = contour.size();
  if (len < 2 || len % 2 != 0 || contour.front() != 0 || contour.back() != 0)
    throw Error(ErrorCode::InvalidPath, "contour must have even length and start/end at 0");
  const std::size_t p = len / 2;
  std::vector<int> counts{0};
  std::vector<std::size_t> ancestors{0};
  for (std::size_t t = 1; t <= 2 * (p - 1); ++t) {
    int step = contour[t] - contour[t - 1];
    if (step == 1) {
      ++counts[ancestors.back()];
      ancestors.push_back(counts.size());
      counts.push_back(0);
    } else if (step == -1 && ancestors.size() > 1) {
      ancestors.pop_back();
    } else {
      throw Error(ErrorCode::InvalidPath, "contour steps must be +-1 and stay nonnegative");
    }
  }
  if (counts.size() != p) throw Error(ErrorCode::InvalidPath, "contour length does not match vertex count");
  return OrderedTree::from_counts(std::move(counts));
}

namespace {

void check_height_index(std::span<const int> height, std::span<const std::int64_t> index) {
  if (height.size() != index.size())
    throw Error(ErrorCode::InconsistentInput, "height and index sequences differ in length");
  if (height.empty()) return;
  if (height[0] != 0 || index[0] != 0)
    throw Error(ErrorCode::InconsistentInput, "sequences must start with H_0 = 0 and I_0 = 0");
  for (std::size_t n = 1; n < height.size(); ++n) {
    if (height[n] < 0 || height[n] > height[n - 1] + 1)
      throw Error(ErrorCode::InconsistentInput, "height increments must be at most +1");
    std::int64_t expected = height[n] == 0 ? index[n - 1] - 1 : index[n - 1];
    if (index[n] != expected)
      throw Error(ErrorCode::InconsistentInput, "index must drop by exactly one at each new root");
  }
}

}  // namespace

std::vector<std::int64_t> contour_times(std::span<const int> height,
                                        std::span<const std::int64_t> tree_index) {
  check_height_index(height, tree_index);
  const std::size_t n = height.size();
  std::vector<std::int64_t> j(n + 1);
  for (std::size_t i = 0; i < n; ++i)
    j[i] = 2 * static_cast<std::int64_t>(i) - height[i] + tree_index[i];
  j[n] = 2 * static_cast<std::int64_t>(n) + (n ? tree_index[n - 1] - 1 : -1);
  return j;
}

namespace {

// Contour on [J_n, J_{n+1}] for vertex n followed by a vertex of height next_h.
double contour_piece(std::int64_t jn, std::int64_t jn1, int hn, int next_h, double t) {
  if (t <= static_cast<double>(jn1 - 1)) return hn - (t - static_cast<double>(jn));
  return std::max(0.0, next_h - (static_cast<double>(jn1) - t));
}

}  // namespace

std::vector<int> contour_from_height(std::span<const int> height,
                                     std::span<const std::int64_t> tree_index) {
  auto j = contour_times(height, tree_index);
  const std::size_t n = height.size();
  std::vector<int> c;
  c.reserve(2 * n);
  std::size_t first = 0;
  while (first < n) {
    std::size_t end = first + 1;
    while (end < n && height[end] != 0) ++end;
    for (std::size_t v = first; v < end; ++v) {
      int next_h = v + 1 < n ? height[v + 1] : 0;
      std::int64_t last = v + 1 == end ? j[v + 1] : j[v + 1] - 1;
      for (std::int64_t t = j[v]; t <= last; ++t)
        c.push_back(static_cast<int>(contour_piece(j[v], j[v + 1], height[v], next_h, static_cast<double>(t))));
    }
    first = end;
  }
  return c;
}

double contour_value_at(std::span<const int> height, std::span<const std::int64_t> times, double t) {
  const std::size_t n = height.size();
  if (n == 0 || t >= static_cast<double>(times[n]) || t < 0) return 0.0;
  auto it = std::upper_bound(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(n) + 1,
                             static_cast<std::int64_t>(std::floor(t)));
  std::size_t v = static_cast<std::size_t>(it - times.begin()) - 1;
  int next_h = v + 1 < n ? height[v + 1] : 0;
  return contour_piece(times[v], times[v + 1], height[v], next_h, t);
}

std::vector<OrderedTree> enumerate_trees(int p, int max_p) {
  if (p < 1) throw Error(ErrorCode::InvalidTree, "p must be positive");
  if (p > max_p) throw Error(ErrorCode::TooLarge, "enumeration is capped at p = " + std::to_string(max_p));
  std::vector<OrderedTree> out;
  std::vector<int> counts(static_cast<std::size_t>(p));
  // Depth-first over counts in increasing order; x is the walk before vertex i.
  auto rec = [&](auto&& self, int i, int x) -> void {
    int remaining = p - i;
    if (i == p) {
      if (x == -1) out.push_back(OrderedTree::from_counts(counts));
      return;
    }
    // After vertex i the walk is x + k - 1; it must stay >= 0 until the last
    // vertex and be able to come down to -1 with the remaining vertices.
    for (int k = 0; k <= remaining; ++k) {
      int nx = x + k - 1;
      if (i + 1 < p && nx < 0) continue;
      if (nx + 1 > remaining - 1) break;
      counts[static_cast<std::size_t>(i)] = k;
      self(self, i + 1, nx);
    }
  };
  rec(rec, 0, 0);
  return out;
}

namespace {
__extension__ typedef unsigned __int128 u128;
}

std::uint64_t catalan(int n) {
  if (n < 0) throw Error(ErrorCode::OutOfRange, "negative Catalan index");
  u128 c = 1;
  for (int k = 0; k < n; ++k) {
    c = c * static_cast<unsigned>(2 * (2 * k + 1)) / static_cast<unsigned>(k + 2);
    if (c > UINT64_MAX) throw Error(ErrorCode::Overflow, "Catalan number exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(c);
}

std::uint64_t count_binary_skeletons(int p) {
  if (p < 1) throw Error(ErrorCode::OutOfRange, "p must be positive");
  return catalan(p - 1);
}

std::uint64_t count_labelled_binary(int p) {
  if (p < 1) throw Error(ErrorCode::OutOfRange, "p must be positive");
  u128 b = 1;
  for (int k = 3; k <= 2 * p - 3; k += 2) {
    b *= static_cast<unsigned>(k);
    if (b > UINT64_MAX) throw Error(ErrorCode::Overflow, "count exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(b);
}

std::string to_text(const OrderedTree& tree) {
  std::string s;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(tree.children(i));
  }
  return s;
}

OrderedTree parse_tree(std::string_view text) {
  std::vector<int> counts;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == ',')) ++i;
    if (i >= text.size()) break;
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), v);
    if (ec != std::errc{}) throw Error(ErrorCode::InvalidTree, "unparseable children count");
    counts.push_back(v);
    i = static_cast<std::size_t>(ptr - text.data());
  }
  return OrderedTree::from_counts(std::move(counts));
}

}  // namespace ctree
