#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctree/excursion.hpp"
#include "ctree/trees.hpp"

namespace ctree {

// Continuous nonnegative function given by breakpoints (times strictly
// increasing) and linear in between. Zero outside [times.front(), times.back()].
struct PiecewiseLinear {
  std::vector<double> times;
  std::vector<double> values;

  static PiecewiseLinear from_grid(const PathGrid& g);
  double span() const { return times.empty() ? 0.0 : times.back(); }
  double value_at(double t) const;
};

// Range-minimum index over a piecewise-linear coding function, for repeated
// d_g queries.
class CodedTree {
 public:
  explicit CodedTree(PiecewiseLinear g);
  explicit CodedTree(const PathGrid& g) : CodedTree(PiecewiseLinear::from_grid(g)) {}

  const PiecewiseLinear& function() const { return g_; }
  double value(double t) const { return g_.value_at(t); }
  // min of g over [min(s,t), max(s,t)]
  double min_between(double s, double t) const;
  double distance(double s, double t) const;

 private:
  double breakpoint_min(std::size_t lo, std::size_t hi) const;  // inclusive range
  PiecewiseLinear g_;
  std::vector<std::vector<double>> sparse_;
};

// d_g(s,t) = g(s) + g(t) - 2 min_{[s,t]} g. Throws OutOfRange outside [0, span].
double d_g(const PathGrid& g, double s, double t);
double d_g(const PiecewiseLinear& g, double s, double t);

// Coding function of the same tree re-rooted at s0: g'(s) = g(s0) + g(r) -
// 2 min_{[s0, r]} g with r = s0 + s taken cyclically on [0, span]. The
// result contains every shifted breakpoint plus the points where the
// running minimum starts following g, so it is exact as a function.
PiecewiseLinear reroot(const PiecewiseLinear& g, double s0);
PiecewiseLinear reroot(const PathGrid& g, double s0);

struct MarkedTree {
  OrderedTree skeleton = OrderedTree::single_vertex();
  std::vector<double> marks;  // one per vertex, depth-first order

  double total_length() const;
  std::size_t leaf_count() const { return skeleton.leaves(); }
};

std::string to_json(const MarkedTree& tree);
MarkedTree marked_tree_from_json(std::string_view text);

// Reduced tree spanned by the root and the points t_1 <= ... <= t_p of the
// tree coded by g. Ties among the successive minima give vertices with more
// than two children.
MarkedTree extract_marked_tree(const CodedTree& g, std::span<const double> times);
MarkedTree extract_marked_tree(const PathGrid& g, std::span<const double> times);

struct FiniteRootedMetric {
  std::vector<std::vector<double>> distance;
  std::size_t root = 0;

  std::size_t size() const { return distance.size(); }
  double operator()(std::size_t i, std::size_t j) const { return distance[i][j]; }
};

// Points: the root, then the leaves in depth-first order, then (optionally)
// the top of every internal vertex.
FiniteRootedMetric metric_from_marked_tree(const MarkedTree& tree, bool include_branch_points = false);
// Points: the root (time 0), then the given times, with distances d_g.
FiniteRootedMetric metric_from_coded(const CodedTree& g, std::span<const double> times);

std::string to_csv(const FiniteRootedMetric& m);

bool satisfies_triangle(const FiniteRootedMetric& m, std::size_t i, std::size_t j, std::size_t k);
bool satisfies_four_point(const FiniteRootedMetric& m, std::size_t x, std::size_t y, std::size_t z,
                          std::size_t w);

// 2 sup |g - g'|, an upper bound for the rooted Gromov-Hausdorff distance.
double gh_upper_bound(const PiecewiseLinear& g, const PiecewiseLinear& h);
double gh_upper_bound(const PathGrid& g, const PathGrid& h);

using Relation = std::vector<std::pair<std::size_t, std::size_t>>;
double distortion(const FiniteRootedMetric& a, const FiniteRootedMetric& b, const Relation& r);
// Half the least distortion over correspondences containing the root pair.
// Throws TooLarge if either space has more than max_points points.
double gh_exact(const FiniteRootedMetric& a, const FiniteRootedMetric& b, std::size_t max_points = 7);

// The same quantity by enumerating every subset of A x B, for spaces with at
// most 20 point pairs. Slow; kept as an independent oracle for gh_exact.
double gh_by_enumeration(const FiniteRootedMetric& a, const FiniteRootedMetric& b);

// Points 0, L/(k-1), ..., L of a segment rooted at 0.
FiniteRootedMetric segment_metric(double length, std::size_t points);

// Round values to multiples of 2^-bits so that sums of a few distances are
// exact in double precision.
void quantize_dyadic(PathGrid& g, int bits = 40);

}  // namespace ctree
