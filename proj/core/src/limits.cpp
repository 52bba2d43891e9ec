#include "ctree/limits.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>

#include "ctree/error.hpp"
#include "ctree/excursion.hpp"
#include "ctree/parallel.hpp"

namespace ctree::limits {

namespace {

// Replicate streams of the two sides of a comparison must not overlap.
constexpr std::uint64_t kSecondSide = std::uint64_t{1} << 40;

std::string num(double v) { return format_double(v); }

nlohmann::ordered_json as_json(const CheckReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  j["params"] = params;
  j["kind"] = r.kind;
  j["value"] = r.value;
  j["threshold"] = r.threshold;
  j["pass"] = r.pass;
  j["seed"] = r.seed;
  j["n"] = r.n;
  if (r.kind == "z" || r.kind == "rel") {
    j["estimate"] = r.estimate;
    j["target"] = r.target;
    j["se"] = r.se;
  }
  if (!r.parts.empty()) {
    j["parts"] = nlohmann::ordered_json::array();
    for (const auto& p : r.parts) j["parts"].push_back(as_json(p));
  }
  return j;
}

// Sample variance with the delta-method standard error sqrt((m4 - s^4) / n).
stats::MeanSE variance_estimate(const std::vector<double>& xs) {
  auto m = stats::mean_se(xs);
  double m4 = 0;
  for (double x : xs) m4 += std::pow(x - m.mean, 4);
  m4 /= static_cast<double>(xs.size());
  stats::MeanSE v;
  v.mean = m.variance;
  v.n = xs.size();
  v.se = std::sqrt(std::max(0.0, m4 - m.variance * m.variance) / static_cast<double>(xs.size()));
  return v;
}

void stamp(CheckReport& r, std::uint64_t seed, std::vector<std::pair<std::string, std::string>> params) {
  r.seed = seed;
  r.params = std::move(params);
  for (auto& p : r.parts) p.seed = seed;
}

struct ForestSample {
  double height = 0;   // H_p / sqrt(p)
  double contour = 0;  // C_p / sqrt(p)
  double trees = 0;    // Lambda_p / sqrt(p)
};

ForestSample sample_forest(const OffspringLaw& law, std::size_t p, Rng& rng) {
  // p + 1 vertices give H_p and Lambda_p; the contour at time p needs J_n > p,
  // which holds unless the forest is unusually high.
  std::size_t n = p + 1;
  for (;;) {
    auto f = forest_height_process(law, n, rng);
    auto j = contour_times(f.height, f.index);
    if (static_cast<double>(j.back()) > static_cast<double>(p)) {
      const double root = std::sqrt(static_cast<double>(p));
      return {f.height[p] / root, contour_value_at(f.height, j, static_cast<double>(p)) / root,
              static_cast<double>(f.trees[p]) / root};
    }
    n *= 2;
  }
}

}  // namespace

std::string to_json(const CheckReport& r) { return as_json(r).dump(); }

CheckReport pvalue_report(std::string name, const stats::TestResult& t, std::string kind) {
  CheckReport r;
  r.name = std::move(name);
  r.kind = std::move(kind);
  r.value = t.pvalue;
  r.threshold = kAlpha;
  r.pass = t.pvalue > kAlpha;
  r.n = t.n;
  return r;
}

CheckReport z_report(std::string name, const stats::MeanSE& m, double target) {
  CheckReport r;
  r.name = std::move(name);
  r.kind = "z";
  r.estimate = m.mean;
  r.target = target;
  r.se = m.se;
  r.value = m.se > 0 ? std::abs(m.mean - target) / m.se : (m.mean == target ? 0.0 : INFINITY);
  r.threshold = kSeBand;
  r.pass = r.value <= kSeBand;
  r.n = m.n;
  return r;
}

CheckReport z_report(std::string name, const stats::MeanSE& a, const stats::MeanSE& b) {
  stats::MeanSE diff;
  diff.mean = a.mean - b.mean;
  diff.se = std::hypot(a.se, b.se);
  diff.n = a.n + b.n;
  return z_report(std::move(name), diff, 0.0);
}

CheckReport relative_report(std::string name, double estimate, double target, double tolerance, double se) {
  CheckReport r;
  r.name = std::move(name);
  r.kind = "rel";
  r.estimate = estimate;
  r.target = target;
  r.se = se;
  r.value = std::abs(estimate - target) / std::abs(target);
  r.threshold = tolerance;
  r.pass = r.value <= tolerance;
  r.n = 1;
  return r;
}

CheckReport exact_report(std::string name, std::size_t violations, std::size_t n) {
  CheckReport r;
  r.name = std::move(name);
  r.kind = "exact";
  r.value = static_cast<double>(violations);
  r.threshold = 0;
  r.pass = violations == 0;
  r.n = n;
  return r;
}

CheckReport all_of(std::string name, std::vector<CheckReport> parts) {
  CheckReport r;
  r.name = std::move(name);
  r.kind = "all";
  r.pass = std::all_of(parts.begin(), parts.end(), [](const CheckReport& p) { return p.pass; });
  r.value = static_cast<double>(std::count_if(parts.begin(), parts.end(), [](const CheckReport& p) { return !p.pass; }));
  for (const auto& p : parts) r.n = std::max(r.n, p.n);
  r.parts = std::move(parts);
  return r;
}

double half_normal_cdf(double x, double scale) {
  return x <= 0 ? 0.0 : std::erf(x / (scale * std::numbers::sqrt2));
}

double chi3_cdf(double x) {
  if (x <= 0) return 0.0;
  return std::erf(x / std::numbers::sqrt2) - std::sqrt(2 / std::numbers::pi) * x * std::exp(-x * x / 2);
}

double conditioned_duration_laplace(double sigma, double lambda) {
  if (lambda < 0) throw Error(ErrorCode::OutOfRange, "lambda must be nonnegative");
  const double a = sigma * std::sqrt(2 * lambda) / 2;
  if (a == 0) return 1.0;
  return a / std::sinh(a) * std::exp(-a);
}

double excursion_max_cdf(double x) {
  if (x <= 0) return 0.0;
  if (x < 1) {
    // Dual series after Poisson summation; the direct one cancels badly here.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0;
    for (int k = 1; k < 50; ++k) {
      double term = static_cast<double>(k) * k * std::exp(-pi2 * k * k / (2 * x * x));
      sum += term;
      if (term < 1e-300 || term < 1e-18 * sum) break;
    }
    return std::clamp(std::sqrt(2 * std::numbers::pi) * pi2 / (x * x * x) * sum, 0.0, 1.0);
  }
  double sum = 1;
  for (int k = 1; k < 200; ++k) {
    double k2x2 = static_cast<double>(k) * k * x * x;
    double term = 2 * (1 - 4 * k2x2) * std::exp(-2 * k2x2);
    sum += term;
    if (std::abs(term) < 1e-18 && k > 2) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

std::vector<double> uniform_tree_height_cdf(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::OutOfRange, "n must be positive");
  const std::size_t steps = 2 * (n - 1);
  // Probability that a fair +-1 walk of `steps` steps stays in [0, h] and
  // ends at 0; h = n - 1 gives the unconstrained Dyck probability.
  auto kept = [&](std::size_t h) {
    std::vector<double> w(h + 2, 0.0), next(h + 2, 0.0);
    w[0] = 1;
    for (std::size_t t = 0; t < steps; ++t) {
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t j = 0; j <= h; ++j) {
        if (w[j] == 0) continue;
        if (j + 1 <= h) next[j + 1] += 0.5 * w[j];
        if (j > 0) next[j - 1] += 0.5 * w[j];
      }
      std::swap(w, next);
    }
    return w[0];
  };
  const double total = kept(n - 1);
  std::vector<double> cdf(n, 1.0);
  for (std::size_t h = 0; h + 1 < n; ++h) {
    cdf[h] = kept(h) / total;
    if (cdf[h] > 1 - 1e-15) break;
  }
  return cdf;
}

double uniform_tree_height_distance(std::size_t n) {
  auto cdf = uniform_tree_height_cdf(n);
  const double root = std::sqrt(static_cast<double>(n));
  double d = 0, below = 0;
  for (std::size_t h = 0; h < cdf.size(); ++h) {
    double f = excursion_max_cdf(static_cast<double>(h) / root / std::numbers::sqrt2);
    d = std::max({d, std::abs(cdf[h] - f), std::abs(below - f)});
    below = cdf[h];
    if (below == 1.0 && f > 1 - 1e-15) break;
  }
  return d;
}

std::vector<CheckReport> check_forest_marginals(const OffspringLaw& law, std::size_t p, std::size_t reps,
                                                std::uint64_t seed) {
  if (p == 0 || reps == 0) throw Error(ErrorCode::OutOfRange, "p and reps must be positive");
  std::vector<ForestSample> s(reps);
  for_replicates(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    s[i] = sample_forest(law, p, rng);
  });
  const double sigma = law.sigma();
  std::vector<double> h(reps), c(reps), l(reps), r(reps), share(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    h[i] = s[i].height;
    c[i] = s[i].contour;
    l[i] = s[i].trees;
    double y = sigma * s[i].height / 2, lt = s[i].trees / sigma;
    r[i] = y + lt;
    share[i] = lt / r[i];
  }
  std::vector<std::pair<std::string, std::string>> params{
      {"law", law.name()}, {"p", std::to_string(p)}, {"reps", std::to_string(reps)}};

  auto height = pvalue_report("height_marginal",
                              stats::ks_test(h, [&](double x) { return half_normal_cdf(x, 2 / sigma); }), "ks");
  stamp(height, seed, params);
  auto contour = pvalue_report(
      "contour_marginal",
      stats::ks_test(c, [&](double x) { return half_normal_cdf(x, 2 / sigma * std::sqrt(0.5)); }), "ks");
  stamp(contour, seed, params);
  auto marginal = pvalue_report("tree_count_marginal",
                                stats::ks_test(l, [&](double x) { return half_normal_cdf(x, sigma); }), "ks");
  auto radial = pvalue_report("joint_radius", stats::ks_test(r, chi3_cdf), "ks");
  auto angular = pvalue_report("joint_share",
                               stats::ks_test(share, [](double x) { return std::clamp(x, 0.0, 1.0); }), "ks");
  auto joint = all_of("local_time_joint", {marginal, radial, angular});
  stamp(joint, seed, params);
  return {height, contour, joint};
}

CheckReport check_height_marginal(const OffspringLaw& law, std::size_t p, std::size_t reps, std::uint64_t seed) {
  return check_forest_marginals(law, p, reps, seed)[0];
}

CheckReport check_contour_marginal(const OffspringLaw& law, std::size_t p, std::size_t reps, std::uint64_t seed) {
  return check_forest_marginals(law, p, reps, seed)[1];
}

CheckReport check_local_time_joint(const OffspringLaw& law, std::size_t p, std::size_t reps, std::uint64_t seed) {
  return check_forest_marginals(law, p, reps, seed)[2];
}

CheckReport check_forest_identities(const OffspringLaw& law, std::size_t steps, std::size_t forests,
                                    std::uint64_t seed) {
  std::vector<std::size_t> bad_height(forests), bad_count(forests);
  for_replicates(forests, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    auto f = forest_height_process(law, steps, rng);
    // Depth-first stack of children still to visit, one entry per ancestor.
    std::vector<std::int64_t> pending;
    std::int64_t roots = 0;
    for (std::size_t n = 0; n < steps; ++n) {
      while (!pending.empty() && pending.back() == 0) pending.pop_back();
      int h = static_cast<int>(pending.size());
      if (!pending.empty()) --pending.back();
      pending.push_back(f.walk[n + 1] - f.walk[n] + 1);
      if (h == 0) ++roots;
      if (f.height[n] != h) ++bad_height[i];
      if (f.trees[n] != roots || f.trees[n] != 1 - f.index[n]) ++bad_count[i];
    }
  });
  std::size_t bh = 0, bc = 0;
  for (std::size_t i = 0; i < forests; ++i) {
    bh += bad_height[i];
    bc += bad_count[i];
  }
  auto r = all_of("forest_identities", {exact_report("height_walk_formula", bh, forests * steps),
                                        exact_report("tree_count_infimum", bc, forests * steps)});
  stamp(r, seed, {{"law", law.name()}, {"steps", std::to_string(steps)}, {"forests", std::to_string(forests)}});
  return r;
}

CheckReport check_conditioned_size(const OffspringLaw& law, std::size_t n, std::size_t reps,
                                   std::size_t brownian_reps, double dt, std::uint64_t seed) {
  const double root = std::sqrt(static_cast<double>(n));
  std::vector<double> trees(reps), brownian(brownian_reps);
  for_replicates(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    auto h = height_of(sample_conditioned_size(law, n, rng));
    trees[i] = *std::max_element(h.begin(), h.end()) / root;
  });
  const double scale = 2 / law.sigma();
  for_replicates(brownian_reps, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, kSecondSide + i);
    brownian[i] = scale * vervaat_excursion(dt, rng).max();
  });
  auto r = pvalue_report("conditioned_size_height", stats::two_sample_ks(trees, brownian), "ks2");
  stamp(r, seed, {{"law", law.name()}, {"n", std::to_string(n)}, {"reps", std::to_string(reps)},
                  {"brownian_reps", std::to_string(brownian_reps)}, {"dt", num(dt)}});
  return r;
}

CheckReport check_conditioned_height(const OffspringLaw& law, int p, std::size_t reps,
                                     const std::vector<double>& lambdas, std::uint64_t seed) {
  if (p < 1) throw Error(ErrorCode::OutOfRange, "p must be positive");
  const double p2 = static_cast<double>(p) * p;
  // exp(-lambda size / p^2) underflows well before size = 800 p^2, and
  // P(height > 1000 p) = 1e-3 only shifts the KS comparison above y = 1000.
  const auto size_cap = static_cast<std::uint64_t>(800 * p2);
  const int height_cap = 1000 * p;
  std::vector<HeightAndSize> s(reps);
  for_replicates(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    s[i] = sample_height_conditioned_sizes(law, p, rng, size_cap, height_cap);
  });
  std::vector<CheckReport> parts;
  for (double lambda : lambdas) {
    std::vector<double> v(reps);
    for (std::size_t i = 0; i < reps; ++i)
      v[i] = s[i].size_capped ? 0.0 : std::exp(-lambda * static_cast<double>(s[i].size) / p2);
    parts.push_back(z_report("laplace_lambda_" + num(lambda), stats::mean_se(v),
                             conditioned_duration_laplace(law.sigma(), lambda)));
  }
  std::vector<double> heights(reps);
  for (std::size_t i = 0; i < reps; ++i) heights[i] = s[i].height / static_cast<double>(p);
  parts.push_back(pvalue_report("height_over_p",
                                stats::ks_test(heights, [](double y) { return y < 1 ? 0.0 : 1 - 1 / y; }), "ks"));
  std::string ls;
  for (double l : lambdas) ls += (ls.empty() ? "" : ",") + num(l);
  auto r = all_of("conditioned_height", std::move(parts));
  stamp(r, seed, {{"law", law.name()}, {"p", std::to_string(p)}, {"reps", std::to_string(reps)}, {"lambdas", ls}});
  return r;
}

CheckReport check_ray_knight(std::size_t reps, double dt, const std::vector<double>& levels, std::uint64_t seed) {
  if (levels.empty()) throw Error(ErrorCode::OutOfRange, "at least one level is needed");
  const double top = *std::max_element(levels.begin(), levels.end());
  const std::size_t k = levels.size();
  std::vector<std::vector<double>> occ(k, std::vector<double>(reps)), feller(k, std::vector<double>(reps));
  for_replicates(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    // Occupation below `top` is unaffected by folding the path at `top`.
    auto r = reflected_until_local_time(dt, 0.5, top, rng);
    const auto& x = r.path.values;
    for (std::size_t j = 0; j < k; ++j) {
      std::size_t below = 0;
      for (std::size_t t = 1; t < x.size(); ++t) below += x[t] <= levels[j];
      occ[j][i] = dt * static_cast<double>(below);
    }
  });
  for_replicates(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, kSecondSide + i);
    auto x = feller_diffusion(2.0, 1.0, dt, top, rng);
    for (std::size_t j = 0; j < k; ++j) {
      double integral = 0;
      for (std::size_t t = 0; t + 1 < x.size() && (t + 1) * dt <= levels[j] + 1e-12; ++t)
        integral += 0.5 * dt * (x.values[t] + x.values[t + 1]);
      feller[j][i] = integral;
    }
  });
  std::vector<CheckReport> parts;
  for (std::size_t j = 0; j < k; ++j) {
    const double a = levels[j];
    auto mo = stats::mean_se(occ[j]), mf = stats::mean_se(feller[j]);
    auto vo = variance_estimate(occ[j]), vf = variance_estimate(feller[j]);
    std::string tag = "_a" + num(a);
    parts.push_back(z_report("mean_cross" + tag, mo, mf));
    parts.push_back(z_report("mean_target" + tag, mo, a));
    parts.push_back(z_report("variance_cross" + tag, vo, vf));
    parts.push_back(z_report("variance_target" + tag, vo, 4 * a * a * a / 3));
  }
  std::string ls;
  for (double l : levels) ls += (ls.empty() ? "" : ",") + num(l);
  auto r = all_of("ray_knight", std::move(parts));
  stamp(r, seed, {{"reps", std::to_string(reps)}, {"dt", num(dt)}, {"levels", ls}});
  return r;
}

CheckReport check_feller_limit(const OffspringLaw& law, std::size_t p, std::size_t n, std::size_t reps,
                               double dt, std::uint64_t seed) {
  const int gens = static_cast<int>(std::max(n, p));
  std::vector<double> zn(reps), second(reps), scaled(reps), diffusion(reps);
  std::vector<std::size_t> start_bad(reps);
  for_replicates(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    auto z = generation_sizes(law, p, gens, rng);
    start_bad[i] = z[0] != p;
    const double v = static_cast<double>(z[n]);
    zn[i] = v;
    second[i] = v * v - static_cast<double>(p) * static_cast<double>(p);
    scaled[i] = static_cast<double>(z[p]) / static_cast<double>(p);
  });
  for_replicates(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, kSecondSide + i);
    diffusion[i] = feller_diffusion(law.sigma(), 1.0, dt, 1.0, rng).values.back();
  });
  std::size_t bad = 0;
  for (auto b : start_bad) bad += b;
  const double pd = static_cast<double>(p);
  auto r = all_of("feller_limit",
                  {exact_report("start_at_p", bad, reps), z_report("mean", stats::mean_se(zn), pd),
                   z_report("second_moment", stats::mean_se(second), law.variance() * static_cast<double>(n) * pd),
                   pvalue_report("diffusion_time_1", stats::two_sample_ks(scaled, diffusion), "ks2")});
  stamp(r, seed, {{"law", law.name()}, {"p", std::to_string(p)}, {"n", std::to_string(n)},
                  {"reps", std::to_string(reps)}, {"dt", num(dt)}});
  return r;
}

}  // namespace ctree::limits
