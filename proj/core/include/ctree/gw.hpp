#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctree/rng.hpp"
#include "ctree/trees.hpp"

namespace ctree {

// Offspring distribution with mean <= 1 and mu(1) < 1.
class OffspringLaw {
 public:
  enum class Kind { Geometric, Poisson, Binary, Table };

  static OffspringLaw geometric();  // mu(k) = 2^{-k-1}
  static OffspringLaw poisson();    // mean 1
  static OffspringLaw binary();     // (delta_0 + delta_2) / 2
  static OffspringLaw table(std::vector<double> pmf);
  // "geometric" | "poisson" | "binary" | "table:p0,p1,..."
  static OffspringLaw parse(std::string_view text);

  Kind kind() const { return kind_; }
  std::string name() const;
  double pmf(int k) const { return k >= 0 && k < static_cast<int>(pmf_.size()) ? pmf_[k] : 0.0; }
  // Probabilities up to the point where the remaining tail is below 1e-18.
  const std::vector<double>& pmf_table() const { return pmf_; }
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double sigma() const;
  bool critical() const;

  double generating(double s) const;
  // 1 - f(1 - q), evaluated without cancellation for small q.
  double one_minus_generating(double q) const;
  // Walk jump law nu(j) = mu(j + 1), j >= -1; tail nu([k, inf)).
  double jump_tail(int k) const;

  int sample(Rng& rng) const;
  // Sum of `count` independent draws.
  std::uint64_t sample_sum(std::uint64_t count, Rng& rng) const;
  // gcd of the support of mu; conditioned sizes n need n = 1 mod this.
  int support_gcd() const;

 private:
  OffspringLaw(Kind kind, std::vector<double> pmf);
  Kind kind_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double mean_ = 0;
  double variance_ = 0;
};

inline constexpr std::size_t kDefaultVertexCap = 10'000'000;

OrderedTree sample_gw(const OffspringLaw& law, Rng& rng, std::size_t vertex_cap = kDefaultVertexCap);

struct ForestProcess {
  std::vector<std::int64_t> walk;    // S_0..S_n
  std::vector<int> height;           // H_0..H_{n-1}
  std::vector<std::int64_t> index;   // I_0..I_{n-1}, running infimum of S
  std::vector<std::int64_t> trees;   // Lambda_k = 1 - I_k: trees visited up to vertex k
};

// First n vertices of an infinite i.i.d. forest, with H from the walk formula.
ForestProcess forest_height_process(const OffspringLaw& law, std::size_t n, Rng& rng);

// Whether a tree with exactly n vertices has positive probability.
bool size_supported(const OffspringLaw& law, std::size_t n);

// Uniform-on-increments rejection until sum(k_i - 1) = -1, then cycle-lemma
// rotation. Exactly distributed as the tree conditioned on n vertices.
OrderedTree sample_conditioned_size(const OffspringLaw& law, std::size_t n, Rng& rng,
                                    std::size_t max_attempts = 100'000'000);
// Rotation step on its own: counts with sum(k_i - 1) = -1 are rotated to
// start right after the first minimum of the partial sums.
std::vector<int> cycle_lemma_rotate(const std::vector<int>& counts);

// First tree of an i.i.d. sequence whose height is at least hmin.
OrderedTree sample_conditioned_height(const OffspringLaw& law, int hmin, Rng& rng,
                                      std::size_t max_attempts = 10'000'000,
                                      std::size_t vertex_cap = kDefaultVertexCap);

struct HeightAndSize {
  int height = 0;
  std::uint64_t size = 0;
  bool size_capped = false;    // size reached size_cap and stopped counting
  bool height_capped = false;  // simulation stopped at generation height_cap
};
// Height and total progeny of the first tree with height >= hmin, simulated
// generation by generation. The size stops counting at size_cap and the
// simulation stops at generation height_cap (which must exceed hmin).
HeightAndSize sample_height_conditioned_sizes(const OffspringLaw& law, int hmin, Rng& rng,
                                              std::uint64_t size_cap,
                                              int height_cap = std::numeric_limits<int>::max());

// P(h(tree) >= n) = 1 - f^{(n)}(0).
double survival_prob(const OffspringLaw& law, int n);

// Exact E[s^{#tree} ; h >= hmin] / P(h >= hmin) from generating functions.
double conditioned_height_size_transform(const OffspringLaw& law, int hmin, double s);

struct LadderStatistics {
  std::optional<std::int64_t> first;       // S_{T_1}, if T_1 <= steps
  std::vector<std::int64_t> increments;    // S_{T_j} - S_{T_{j-1}} for completed epochs
  std::size_t steps = 0;
};
// Weak ascending ladder epochs T_j = inf{n > T_{j-1} : S_n = max_{k<=n} S_k}
// of the jump walk, observed for at most `steps` steps.
LadderStatistics ladder_statistics(const OffspringLaw& law, std::size_t steps, Rng& rng,
                                   bool stop_after_first = false);

// Generation sizes Z_0 = start, ..., Z_generations of a Galton-Watson process.
std::vector<std::uint64_t> generation_sizes(const OffspringLaw& law, std::uint64_t start,
                                            int generations, Rng& rng);

}  // namespace ctree
