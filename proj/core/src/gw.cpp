#include "ctree/gw.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "ctree/error.hpp"

namespace ctree {

namespace {

std::vector<double> truncated_pmf(auto&& term) {
  std::vector<double> pmf;
  double total = 0;
  for (int k = 0; k < 200; ++k) {
    double v = term(k);
    pmf.push_back(v);
    total += v;
    if (1.0 - total < 1e-18 && v < 1e-18) break;
  }
  return pmf;
}

}  // namespace

OffspringLaw::OffspringLaw(Kind kind, std::vector<double> probs) : kind_(kind), pmf_(std::move(probs)) {
  double total = 0, m = 0, m2 = 0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    if (!(pmf_[k] >= 0)) throw Error(ErrorCode::InvalidLaw, "probabilities must be nonnegative");
    total += pmf_[k];
    m += static_cast<double>(k) * pmf_[k];
    m2 += static_cast<double>(k * k) * pmf_[k];
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::InvalidLaw, "probabilities must sum to 1");
  if (m > 1.0 + 1e-12) throw Error(ErrorCode::InvalidLaw, "supercritical laws are not supported");
  if (pmf_.size() > 1 && pmf_[1] >= 1.0) throw Error(ErrorCode::InvalidLaw, "mu(1) = 1 gives an infinite line");
  cdf_.resize(pmf_.size());
  std::partial_sum(pmf_.begin(), pmf_.end(), cdf_.begin());
  switch (kind_) {
    case Kind::Geometric: mean_ = 1; variance_ = 2; break;
    case Kind::Poisson: mean_ = 1; variance_ = 1; break;
    case Kind::Binary: mean_ = 1; variance_ = 1; break;
    case Kind::Table: mean_ = m; variance_ = m2 - m * m; break;
  }
}

OffspringLaw OffspringLaw::geometric() {
  return {Kind::Geometric, truncated_pmf([](int k) { return std::ldexp(1.0, -k - 1); })};
}

OffspringLaw OffspringLaw::poisson() {
  return {Kind::Poisson, truncated_pmf([](int k) { return std::exp(-1.0 - std::lgamma(k + 1.0)); })};
}

OffspringLaw OffspringLaw::binary() { return {Kind::Binary, {0.5, 0.0, 0.5}}; }

OffspringLaw OffspringLaw::table(std::vector<double> pmf) {
  if (pmf.empty()) throw Error(ErrorCode::InvalidLaw, "empty table");
  return {Kind::Table, std::move(pmf)};
}

OffspringLaw OffspringLaw::parse(std::string_view text) {
  if (text == "geometric") return geometric();
  if (text == "poisson") return poisson();
  if (text == "binary") return binary();
  if (text.starts_with("table:")) {
    std::vector<double> pmf;
    std::string rest(text.substr(6));
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      std::size_t comma = rest.find(',', pos);
      std::string item = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      try {
        std::size_t used = 0;
        pmf.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidLaw, "bad table entry '" + item + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return table(std::move(pmf));
  }
  throw Error(ErrorCode::InvalidLaw, "unknown law '" + std::string(text) + "'");
}

std::string OffspringLaw::name() const {
  switch (kind_) {
    case Kind::Geometric: return "geometric";
    case Kind::Poisson: return "poisson";
    case Kind::Binary: return "binary";
    case Kind::Table: break;
  }
  std::string s = "table:";
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    if (k) s += ',';
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, pmf_[k]);
    s.append(buf, end);
  }
  return s;
}

double OffspringLaw::sigma() const { return std::sqrt(variance_); }

bool OffspringLaw::critical() const { return std::abs(mean_ - 1.0) < 1e-12; }

double OffspringLaw::generating(double s) const {
  switch (kind_) {
    case Kind::Geometric: return 1.0 / (2.0 - s);
    case Kind::Poisson: return std::exp(s - 1.0);
    case Kind::Binary: return 0.5 * (1.0 + s * s);
    case Kind::Table: break;
  }
  double v = 0;
  for (std::size_t k = pmf_.size(); k-- > 0;) v = v * s + pmf_[k];
  return v;
}

double OffspringLaw::one_minus_generating(double q) const {
  switch (kind_) {
    case Kind::Geometric: return q / (1.0 + q);
    case Kind::Poisson: return -std::expm1(-q);
    case Kind::Binary: return q - 0.5 * q * q;
    case Kind::Table: break;
  }
  if (q >= 1.0) return 1.0 - pmf_[0];
  const double l = std::log1p(-q);
  double v = 0;
  for (std::size_t k = 1; k < pmf_.size(); ++k) v += pmf_[k] * -std::expm1(static_cast<double>(k) * l);
  return v;
}

double OffspringLaw::jump_tail(int k) const {
  if (k <= -1) return 1.0;
  if (kind_ == Kind::Geometric) return std::ldexp(1.0, -(k + 1));
  double v = 0;
  for (std::size_t j = pmf_.size(); j-- > static_cast<std::size_t>(k + 1);) v += pmf_[j];
  return v;
}

int OffspringLaw::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::Geometric: {
      std::uint64_t w;
      do w = rng(); while (w == 0);
      return std::countr_zero(w);
    }
    case Kind::Binary: return rng.coin() ? 2 : 0;
    default: break;
  }
  double u = rng.uniform();
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<int>(it - cdf_.begin());
}

std::uint64_t OffspringLaw::sample_sum(std::uint64_t count, Rng& rng) const {
  if (count == 0) return 0;
  switch (kind_) {
    case Kind::Geometric:
      if (count <= 16) {
        std::uint64_t total = 0;
        for (std::uint64_t i = 0; i < count; ++i) total += static_cast<std::uint64_t>(sample(rng));
        return total;
      }
      return static_cast<std::uint64_t>(
          std::negative_binomial_distribution<long long>(static_cast<long long>(count), 0.5)(rng.engine()));
    case Kind::Poisson:
      return static_cast<std::uint64_t>(
          std::poisson_distribution<long long>(static_cast<double>(count))(rng.engine()));
    case Kind::Binary:
      return 2 * static_cast<std::uint64_t>(
                     std::binomial_distribution<long long>(static_cast<long long>(count), 0.5)(rng.engine()));
    case Kind::Table: break;
  }
  std::uint64_t total = 0;
  for (std::uint64_t i = 0; i < count; ++i) total += static_cast<std::uint64_t>(sample(rng));
  return total;
}

int OffspringLaw::support_gcd() const {
  if (kind_ == Kind::Geometric || kind_ == Kind::Poisson) return 1;
  int g = 0;
  for (std::size_t k = 1; k < pmf_.size(); ++k)
    if (pmf_[k] > 0) g = std::gcd(g, static_cast<int>(k));
  return g;
}

OrderedTree sample_gw(const OffspringLaw& law, Rng& rng, std::size_t vertex_cap) {
  std::vector<int> counts;
  std::int64_t x = 0;
  while (x >= 0) {
    if (counts.size() >= vertex_cap)
      throw Error(ErrorCode::BudgetExceeded, "tree exceeds " + std::to_string(vertex_cap) + " vertices");
    int k = law.sample(rng);
    counts.push_back(k);
    x += k - 1;
  }
  return OrderedTree::from_counts(std::move(counts));
}

ForestProcess forest_height_process(const OffspringLaw& law, std::size_t n, Rng& rng) {
  ForestProcess f;
  f.walk.resize(n + 1);
  f.walk[0] = 0;
  for (std::size_t i = 0; i < n; ++i) f.walk[i + 1] = f.walk[i] + law.sample(rng) - 1;
  f.height = height_from_lukasiewicz(f.walk);
  f.index.resize(n);
  f.trees.resize(n);
  std::int64_t inf = 0;
  for (std::size_t i = 0; i < n; ++i) {
    inf = std::min(inf, f.walk[i]);
    f.index[i] = inf;
    f.trees[i] = 1 - inf;
  }
  return f;
}

bool size_supported(const OffspringLaw& law, std::size_t n) {
  if (n == 0) return false;
  if (n == 1 || law.pmf(1) > 0) return true;
  const std::size_t target = n - 1;
  const int g = law.support_gcd();
  if (g == 0 || target % static_cast<std::size_t>(g) != 0) return false;
  // Fewest positive parts from the support summing to n - 1; the remaining
  // parts are zeros, so n parts suffice iff that minimum is at most n.
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> parts(target + 1, kInf);
  parts[0] = 0;
  for (std::size_t s = 1; s <= target; ++s)
    for (std::size_t k = 1; k < law.pmf_table().size() && k <= s; ++k)
      if (law.pmf(static_cast<int>(k)) > 0 && parts[s - k] != kInf)
        parts[s] = std::min(parts[s], parts[s - k] + 1);
  return parts[target] <= n;
}

std::vector<int> cycle_lemma_rotate(const std::vector<int>& counts) {
  std::int64_t x = 0, best = std::numeric_limits<std::int64_t>::max();
  std::size_t at = 0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    x += counts[j] - 1;
    if (x < best) {
      best = x;
      at = j + 1;
    }
  }
  if (x != -1) throw Error(ErrorCode::InvalidPath, "rotation needs increments summing to -1");
  std::vector<int> out;
  out.reserve(counts.size());
  out.insert(out.end(), counts.begin() + static_cast<std::ptrdiff_t>(at % counts.size()), counts.end());
  out.insert(out.end(), counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(at % counts.size()));
  return out;
}

OrderedTree sample_conditioned_size(const OffspringLaw& law, std::size_t n, Rng& rng,
                                    std::size_t max_attempts) {
  if (!size_supported(law, n))
    throw Error(ErrorCode::Unsupported, "no tree with " + std::to_string(n) + " vertices has positive probability");
  std::vector<int> counts(n);
  const std::int64_t target = static_cast<std::int64_t>(n) - 1;
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    std::int64_t sum = 0;
    std::size_t i = 0;
    for (; i < n && sum <= target; ++i) {
      counts[i] = law.sample(rng);
      sum += counts[i];
    }
    if (i == n && sum == target) return OrderedTree::from_counts(cycle_lemma_rotate(counts));
  }
  throw Error(ErrorCode::RejectionBudget, "sum conditioning exceeded the attempt cap");
}

OrderedTree sample_conditioned_height(const OffspringLaw& law, int hmin, Rng& rng,
                                      std::size_t max_attempts, std::size_t vertex_cap) {
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    OrderedTree t = sample_gw(law, rng, vertex_cap);
    auto h = height_of(t);
    if (*std::max_element(h.begin(), h.end()) >= hmin) return t;
  }
  throw Error(ErrorCode::BudgetExceeded, "no tree reached the requested height");
}

HeightAndSize sample_height_conditioned_sizes(const OffspringLaw& law, int hmin, Rng& rng,
                                              std::uint64_t size_cap, int height_cap) {
  if (height_cap <= hmin) throw Error(ErrorCode::OutOfRange, "height cap must exceed hmin");
  for (;;) {
    HeightAndSize r;
    std::uint64_t z = 1;
    r.size = 1;
    int gen = 0;
    while (gen < height_cap) {
      z = law.sample_sum(z, rng);
      if (z == 0) break;
      ++gen;
      if (!r.size_capped) {
        r.size += z;
        if (r.size >= size_cap) r.size_capped = true;
      }
    }
    r.height = gen;
    r.height_capped = gen == height_cap;
    if (gen >= hmin) return r;
  }
}

double survival_prob(const OffspringLaw& law, int n) {
  double q = 1.0;
  for (int i = 0; i < n; ++i) q = law.one_minus_generating(q);
  return q;
}

double conditioned_height_size_transform(const OffspringLaw& law, int hmin, double s) {
  double f = 0.0;
  for (int m = 0; m < hmin; ++m) f = s * law.generating(f);
  double g = f;
  for (long it = 0; it < 100'000'000; ++it) {
    double next = s * law.generating(g);
    if (next == g) break;
    g = next;
  }
  return (g - f) / survival_prob(law, hmin);
}

LadderStatistics ladder_statistics(const OffspringLaw& law, std::size_t steps, Rng& rng,
                                   bool stop_after_first) {
  LadderStatistics out;
  std::int64_t s = 0, max = 0, last = 0;
  for (std::size_t n = 1; n <= steps; ++n) {
    s += law.sample(rng) - 1;
    out.steps = n;
    if (s >= max) {
      max = s;
      out.increments.push_back(s - last);
      if (!out.first) out.first = s;
      last = s;
      if (stop_after_first) break;
    }
  }
  return out;
}

std::vector<std::uint64_t> generation_sizes(const OffspringLaw& law, std::uint64_t start,
                                            int generations, Rng& rng) {
  std::vector<std::uint64_t> z(static_cast<std::size_t>(generations) + 1);
  z[0] = start;
  for (int g = 0; g < generations; ++g) z[g + 1] = law.sample_sum(z[g], rng);
  return z;
}

}  // namespace ctree
