#include "ctree/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <json.hpp>
#include <map>
#include <numbers>
#include <sstream>

#include "ctree/crt.hpp"
#include "ctree/error.hpp"
#include "ctree/excursion.hpp"
#include "ctree/gw.hpp"
#include "ctree/parallel.hpp"
#include "ctree/real_tree.hpp"
#include "ctree/snake.hpp"
#include "ctree/trees.hpp"

namespace ctree::lab {

using limits::CheckReport;

// ---------------------------------------------------------------- settings

Settings::Settings(std::vector<std::pair<std::string, std::string>> defaults) : entries_(std::move(defaults)) {}

void Settings::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = value;
      return;
    }
  throw Error(ErrorCode::ConfigError, "unknown setting '" + key + "'");
}

bool Settings::has(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

const std::string& Settings::text(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw Error(ErrorCode::ConfigError, "missing setting '" + key + "'");
}

double Settings::real(const std::string& key) const {
  const auto& v = text(key);
  double out = 0;
  auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size() || !std::isfinite(out))
    throw Error(ErrorCode::ConfigError, "setting '" + key + "' is not a number: '" + v + "'");
  return out;
}

long long Settings::integer(const std::string& key) const {
  const auto& v = text(key);
  long long out = 0;
  auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size())
    throw Error(ErrorCode::ConfigError, "setting '" + key + "' is not an integer: '" + v + "'");
  return out;
}

std::size_t Settings::count(const std::string& key) const {
  auto v = integer(key);
  if (v < 1) throw Error(ErrorCode::ConfigError, "setting '" + key + "' must be at least 1");
  return static_cast<std::size_t>(v);
}

std::vector<double> Settings::reals(const std::string& key) const {
  std::vector<double> out;
  std::stringstream in(text(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    Settings one({{key, item}});
    out.push_back(one.real(key));
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "setting '" + key + "' is empty");
  return out;
}

std::uint64_t Settings::seed() const {
  if (!has("seed") || text("seed").empty()) throw Error(ErrorCode::ConfigError, "a seed is required (--seed)");
  auto v = integer("seed");
  if (v < 0) throw Error(ErrorCode::ConfigError, "seed must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

void apply_config_text(Settings& settings, std::string_view text) {
  std::stringstream in{std::string(text)};
  std::string line;
  int number = 0;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigError, "config line " + std::to_string(number) + " has no '='");
    settings.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

Settings Experiment::settings() const {
  auto d = defaults;
  if (stochastic && std::none_of(d.begin(), d.end(), [](const auto& e) { return e.first == "seed"; }))
    d.emplace_back("seed", "");
  return Settings(std::move(d));
}

namespace {

std::string num(double v) { return format_double(v); }

std::vector<OffspringLaw> laws_from(const std::string& text) {
  if (text == "all") return {OffspringLaw::geometric(), OffspringLaw::poisson(), OffspringLaw::binary()};
  try {
    return {OffspringLaw::parse(text)};
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

void stamp(CheckReport& r, const Settings& s) {
  r.params = s.entries();
  if (s.has("seed") && !s.text("seed").empty()) r.seed = s.seed();
}

// Independent master seeds for the parts of one experiment.
std::uint64_t part_seed(std::uint64_t seed, std::uint64_t part) { return seed * 1'000'003 + part; }

CheckReport all_parts(std::string name, std::vector<CheckReport> parts, const Settings& s) {
  auto r = limits::all_of(std::move(name), std::move(parts));
  stamp(r, s);
  return r;
}

// ---------------------------------------------------------------- codings

Outcome codings_roundtrip(const Settings& s) {
  const auto pmax = s.integer("pmax");
  if (pmax < 1 || pmax > 12) throw Error(ErrorCode::ConfigError, "pmax must be in 1..12");
  Outcome out;
  out.table = "p,trees,catalan,violations\n";
  std::vector<CheckReport> parts;
  for (int p = 1; p <= pmax; ++p) {
    auto trees = enumerate_trees(p);
    std::size_t bad = trees.size() == catalan(p - 1) ? 0 : 1;
    for (const auto& t : trees) {
      auto x = lukasiewicz_of(t);
      auto h = height_of(t);
      bad += tree_from_lukasiewicz(x) != t;
      bad += height_from_lukasiewicz(x) != h;
      bad += tree_from_labels(labels_of(t)) != t;
      auto c = contour_of(t);
      bad += tree_from_contour(c) != t;
      std::vector<std::int64_t> index(t.size(), 0);
      bad += contour_from_height(h, index) != c;
      // the contour visits vertex n at time J_n, at height H_n
      auto j = contour_times(h, index);
      for (std::size_t n = 0; n < t.size(); ++n)
        bad += contour_value_at(h, j, static_cast<double>(j[n])) != static_cast<double>(h[n]);
    }
    parts.push_back(limits::exact_report("p" + std::to_string(p), bad, trees.size()));
    out.table += std::to_string(p) + "," + std::to_string(trees.size()) + "," + std::to_string(catalan(p - 1)) + "," +
                 std::to_string(bad) + "\n";
    out.notes.push_back("p=" + std::to_string(p) + ": " + std::to_string(trees.size()) + " trees verified");
  }
  out.report = all_parts("coding_round_trips", std::move(parts), s);
  return out;
}

// ---------------------------------------------------------------- gw

Outcome gw_forest_identities(const Settings& s) {
  std::vector<CheckReport> parts;
  std::uint64_t k = 0;
  for (const auto& law : laws_from(s.text("law")))
    parts.push_back(limits::check_forest_identities(law, s.count("steps"), s.count("forests"), part_seed(s.seed(), k++)));
  return {all_parts("forest_identities", std::move(parts), s), {}, {}};
}

Outcome gw_uniformity(const Settings& s) {
  const auto n = s.count("n");
  const auto reps = s.count("reps");
  const auto seed = s.seed();
  if (n > 12) throw Error(ErrorCode::ConfigError, "n must be at most 12");
  auto law = OffspringLaw::geometric();
  auto trees = enumerate_trees(static_cast<int>(n));
  std::map<std::vector<int>, std::size_t> index;
  for (std::size_t i = 0; i < trees.size(); ++i) index[trees[i].counts()] = i;
  std::vector<std::size_t> hit(reps);
  for_replicates(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    hit[i] = index.at(sample_conditioned_size(law, n, rng).counts());
  });
  std::vector<double> obs(trees.size(), 0.0), probs(trees.size(), 1.0 / static_cast<double>(trees.size()));
  for (auto h : hit) obs[h] += 1;
  Outcome out;
  out.table = "tree,count\n";
  for (std::size_t i = 0; i < trees.size(); ++i) out.table += to_text(trees[i]) + "," + num(obs[i]) + "\n";
  auto r = limits::pvalue_report("uniform_over_" + std::to_string(trees.size()) + "_trees", stats::chi_square(obs, probs), "chi2");
  stamp(r, s);
  out.report = r;
  return out;
}

Outcome gw_survival(const Settings& s) {
  const auto nmax = s.integer("nmax");
  const auto reps = s.count("reps");
  const auto seed = s.seed();
  auto geo = OffspringLaw::geometric();
  std::size_t bad = 0;
  double worst = 0;
  for (int n = 1; n <= nmax; ++n) {
    double err = std::abs(survival_prob(geo, n) - 1.0 / (n + 1));
    worst = std::max(worst, err);
    bad += err > 1e-12;
  }
  std::vector<CheckReport> parts{limits::exact_report("exact_one_over_n_plus_1", bad, static_cast<std::size_t>(nmax))};
  const std::vector<int> gens{2, 5, 10};
  std::vector<std::vector<double>> alive(gens.size(), std::vector<double>(reps));
  for_replicates(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    auto z = generation_sizes(geo, 1, gens.back(), rng);
    for (std::size_t g = 0; g < gens.size(); ++g) alive[g][i] = z[gens[g]] > 0 ? 1.0 : 0.0;
  });
  for (std::size_t g = 0; g < gens.size(); ++g)
    parts.push_back(limits::z_report("mc_n" + std::to_string(gens[g]), stats::mean_se(alive[g]), 1.0 / (gens[g] + 1)));
  parts.push_back(limits::relative_report("ratio_n100", survival_prob(geo, 100) * geo.variance() * 100 / 2, 1.0, 0.05));
  Outcome out;
  out.notes.push_back("largest |P(h >= n) - 1/(n+1)| for n <= " + std::to_string(nmax) + ": " + num(worst));
  for (const auto& law : {OffspringLaw::poisson(), OffspringLaw::binary()})
    out.notes.push_back(law.name() + ": n sigma^2 P(h >= n) / 2 at n=100 is " +
                        num(survival_prob(law, 100) * law.variance() * 50) + " (not gated)");
  out.report = all_parts("survival", std::move(parts), s);
  return out;
}

Outcome gw_ladder(const Settings& s) {
  const auto reps = s.count("reps");
  const auto steps = s.count("steps");
  const int cells = 8;
  std::vector<CheckReport> parts;
  Outcome out;
  std::uint64_t k = 0;
  for (const auto& law : laws_from(s.text("law"))) {
    const auto seed = part_seed(s.seed(), k++);
    std::vector<std::int64_t> first(reps, -1);
    for_replicates(reps, [&](std::size_t i) {
      Rng rng = Rng::stream(seed, i);
      auto l = ladder_statistics(law, steps, rng, true);
      if (l.first) first[i] = *l.first;
    });
    std::vector<double> obs(cells + 1, 0.0), probs(cells + 1, 0.0), values;
    for (auto f : first) {
      if (f < 0) continue;
      obs[std::min<std::int64_t>(f, cells)] += 1;
      values.push_back(static_cast<double>(f));
    }
    double rest = 1;
    for (int c = 0; c < cells; ++c) rest -= probs[c] = law.jump_tail(c);
    probs[cells] = std::max(0.0, rest);
    const double kept = static_cast<double>(values.size());
    stats::merge_sparse_cells(obs, probs, kept);
    parts.push_back(limits::pvalue_report(law.name() + "_first_ladder_law", stats::chi_square(obs, probs), "chi2"));
    parts.push_back(limits::z_report(law.name() + "_first_ladder_mean", stats::mean_se(values), law.variance() / 2));
    out.notes.push_back(law.name() + ": " + std::to_string(reps - values.size()) + " of " + std::to_string(reps) +
                        " walks had no ladder epoch within " + std::to_string(steps) + " steps");
  }
  out.report = all_parts("ladder", std::move(parts), s);
  return out;
}

// ---------------------------------------------------------------- limits

Outcome limits_height_marginal(const Settings& s) {
  std::vector<CheckReport> parts;
  std::uint64_t k = 0;
  for (const auto& law : laws_from(s.text("law")))
    for (auto& r : limits::check_forest_marginals(law, s.count("p"), s.count("reps"), part_seed(s.seed(), k++))) {
      r.name = law.name() + "_" + r.name;
      parts.push_back(std::move(r));
    }
  return {all_parts("forest_marginals", std::move(parts), s), {}, {}};
}

Outcome limits_conditioned_size(const Settings& s) {
  Outcome out;
  std::vector<CheckReport> parts;
  std::uint64_t k = 0;
  const auto n = s.count("n");
  const auto reps = s.count("reps"), brownian = s.count("brownian_reps");
  for (const auto& law : laws_from(s.text("law"))) {
    auto r = limits::check_conditioned_size(law, n, reps, brownian, s.real("dt"), part_seed(s.seed(), k++));
    r.name = law.name() + "_" + r.name;
    parts.push_back(std::move(r));
    if (law.kind() == OffspringLaw::Kind::Geometric)
      out.notes.push_back("exact Kolmogorov distance between height/sqrt(n) at n=" + std::to_string(n) +
                          " and its limit: " + num(limits::uniform_tree_height_distance(n)));
  }
  // two-sample KS critical distance at level kAlpha
  const double c = std::sqrt(-std::log(limits::kAlpha / 2) / 2);
  out.notes.push_back("critical distance for the two-sample test: " +
                      num(c * std::sqrt(static_cast<double>(reps + brownian) / (static_cast<double>(reps) * brownian))));
  out.report = all_parts("conditioned_size", std::move(parts), s);
  return out;
}

Outcome limits_duration_laplace(const Settings& s) {
  Outcome out;
  std::vector<CheckReport> parts;
  std::uint64_t k = 0;
  const auto p = static_cast<int>(s.count("p"));
  const auto lambdas = s.reals("lambdas");
  for (const auto& law : laws_from(s.text("law"))) {
    auto r = limits::check_conditioned_height(law, p, s.count("reps"), lambdas, part_seed(s.seed(), k++));
    r.name = law.name() + "_" + r.name;
    parts.push_back(std::move(r));
    for (double l : lambdas) {
      double exact = conditioned_height_size_transform(law, p, std::exp(-l / (static_cast<double>(p) * p)));
      out.notes.push_back(law.name() + " lambda=" + num(l) + ": exact discrete value minus limit " +
                          num(exact - limits::conditioned_duration_laplace(law.sigma(), l)));
    }
  }
  out.report = all_parts("duration_laplace", std::move(parts), s);
  return out;
}

Outcome limits_ray_knight(const Settings& s) {
  auto law = laws_from(s.text("feller_law")).front();
  std::vector<CheckReport> parts{
      limits::check_ray_knight(s.count("reps"), s.real("dt"), s.reals("levels"), part_seed(s.seed(), 0)),
      limits::check_feller_limit(law, s.count("feller_p"), s.count("feller_n"), s.count("feller_reps"),
                                 s.real("feller_dt"), part_seed(s.seed(), 1))};
  return {all_parts("ray_knight_and_feller", std::move(parts), s), {}, {}};
}

// ---------------------------------------------------------------- gh

PathGrid random_dyadic_excursion(std::size_t n, Rng& rng) {
  PathGrid g{1.0, std::vector<double>(n + 1, 0.0)};
  for (std::size_t k = 1; k < n; ++k) g.values[k] = static_cast<double>(rng.below(64)) / 16.0;
  return g;
}

Outcome gh_real_tree(const Settings& s) {
  const auto quads = s.count("quadruples");
  const auto functions = s.count("functions");
  const auto per = s.count("per_excursion");
  const double dt = s.real("dt");
  const auto seed = s.seed();
  const std::size_t excursions = (quads + per - 1) / per;
  std::vector<std::size_t> four(excursions), tri(excursions);
  for_replicates(excursions, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    auto e = vervaat_excursion(dt, rng);
    quantize_dyadic(e);
    CodedTree g(e);
    const std::size_t grid = e.size() - 1;
    for (std::size_t q = 0; q < per && i * per + q < quads; ++q) {
      std::vector<double> times(4);
      for (auto& t : times) t = static_cast<double>(rng.below(grid + 1)) * dt;
      std::sort(times.begin(), times.end());
      auto m = metric_from_coded(g, times);  // the root and the four times
      four[i] += !satisfies_four_point(m, 1, 2, 3, 4);
      for (std::size_t a = 0; a < m.size(); ++a)
        for (std::size_t b = 0; b < m.size(); ++b)
          for (std::size_t c = 0; c < m.size(); ++c) tri[i] += !satisfies_triangle(m, a, b, c);
    }
  });
  std::vector<std::size_t> rerooted(functions);
  for_replicates(functions, [&](std::size_t i) {
    Rng rng = Rng::stream(part_seed(seed, 1), i);
    const std::size_t n = 4 + rng.below(60);
    auto g = random_dyadic_excursion(n, rng);
    const double s0 = static_cast<double>(rng.below(n));
    auto h = reroot(g, s0);
    const double span = static_cast<double>(n);
    auto wrap = [&](double t) { return std::fmod(s0 + t, span); };
    for (std::size_t a = 0; a <= n; ++a)
      for (std::size_t b = 0; b <= n; ++b)
        rerooted[i] += d_g(h, double(a), double(b)) != d_g(g, wrap(double(a)), wrap(double(b)));
  });
  auto sum = [](const std::vector<std::size_t>& v) {
    std::size_t t = 0;
    for (auto x : v) t += x;
    return t;
  };
  std::vector<CheckReport> parts{limits::exact_report("four_point", sum(four), quads),
                                 limits::exact_report("triangle", sum(tri), quads),
                                 limits::exact_report("reroot_identity", sum(rerooted), functions)};
  return {all_parts("real_tree_metric", std::move(parts), s), {}, {}};
}

Outcome gh_distance(const Settings& s) {
  const auto pairs = s.count("pairs");
  const auto seed = s.seed();
  auto s1 = segment_metric(1.0, 3), s2 = segment_metric(2.0, 3);
  const double exact = gh_exact(s1, s2), brute = gh_by_enumeration(s1, s2);
  std::vector<CheckReport> parts{limits::relative_report("segments_1_2", exact, 0.5, 1e-12),
                                 limits::exact_report("segments_match_enumeration", exact != brute, 1)};
  std::vector<std::size_t> bad(pairs);
  std::vector<double> slack(pairs);
  for_replicates(pairs, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const std::size_t n = 6 + rng.below(10);
    auto g = random_dyadic_excursion(n, rng);
    auto h = g;
    for (std::size_t k = 1; k < n; ++k) h.values[k] = std::max(0.0, h.values[k] + (static_cast<double>(rng.below(9)) - 4) / 16);
    std::vector<double> times(3);
    for (auto& t : times) t = static_cast<double>(1 + rng.below(n - 1));
    std::sort(times.begin(), times.end());
    auto mg = metric_from_coded(CodedTree(g), times), mh = metric_from_coded(CodedTree(h), times);
    const double d = gh_exact(mg, mh), bound = gh_upper_bound(g, h);
    bad[i] = d > bound;
    slack[i] = bound - d;
  });
  std::size_t violations = 0;
  for (auto b : bad) violations += b;
  parts.push_back(limits::exact_report("sup_norm_bound", violations, pairs));
  Outcome out;
  out.notes.push_back("gh(segment 1, segment 2) = " + num(exact) + ", by enumeration " + num(brute));
  out.notes.push_back("smallest slack in the sup-norm bound: " + num(*std::min_element(slack.begin(), slack.end())));
  out.report = all_parts("gh_distance", std::move(parts), s);
  return out;
}

// ---------------------------------------------------------------- crt

Outcome crt_marginals(const Settings& s) {
  const auto pmax = static_cast<int>(s.count("pmax"));
  const auto reps = s.count("reps");
  const double dt = s.real("dt");
  const auto seed = s.seed();
  std::vector<CheckReport> parts;
  Outcome out;
  for (int p = 1; p <= pmax; ++p)
    parts.push_back(limits::relative_report("normalization_p" + std::to_string(p), normalization_by_quadrature(p), 1.0, 1e-6));

  Rng rng = Rng::stream(part_seed(seed, 0), 0);
  std::size_t ratio_bad = 0;
  const std::size_t trees = 1000;
  for (std::size_t i = 0; i < trees; ++i) {
    int p = 1 + static_cast<int>(rng.below(6));
    auto t = sample_marginal_direct(p, rng);
    for (double& h : t.marks) h = 2 * rng.uniform();
    double lhs = density_ito_joint(t, 1.0) / (0.5 / std::sqrt(2 * std::numbers::pi));
    double rhs = density_normalized(t) / std::tgamma(p + 1.0);
    ratio_bad += std::abs(lhs - rhs) > 1e-12 * std::max(1.0, std::abs(rhs));
  }
  parts.push_back(limits::exact_report("ito_to_normalized_ratio", ratio_bad, trees));

  for (int p = 1; p <= 3; ++p) {
    std::vector<double> la(reps), lb(reps);
    std::vector<std::vector<int>> sa(reps), sb(reps);
    const auto ps = part_seed(seed, static_cast<std::uint64_t>(p));
    for_replicates(reps, [&](std::size_t i) {
      Rng r1 = Rng::stream(ps, i);
      auto a = sample_marginal_via_excursion(p, dt, r1);
      Rng r2 = Rng::stream(ps, reps + i);
      auto b = sample_marginal_direct(p, r2);
      la[i] = a.total_length();
      lb[i] = b.total_length();
      sa[i] = a.skeleton.counts();
      sb[i] = b.skeleton.counts();
    });
    parts.push_back(limits::pvalue_report("samplers_length_p" + std::to_string(p), stats::two_sample_ks(la, lb), "ks2"));
    if (p == 3) {
      std::map<std::vector<int>, std::pair<double, double>> shapes;
      for (std::size_t i = 0; i < reps; ++i) {
        shapes[sa[i]].first += 1;
        shapes[sb[i]].second += 1;
      }
      std::vector<double> ca, cb;
      for (const auto& [k, v] : shapes) {
        ca.push_back(v.first);
        cb.push_back(v.second);
      }
      parts.push_back(limits::pvalue_report("samplers_shape_p3", stats::chi_square_two_sample(ca, cb), "chi2_2"));
    }
  }

  for (int p = 2; p <= pmax + 1; ++p) {
    auto a = aldous_normalization(p);
    const int dim = 2 * p - 1;
    double total = orthant_integral(
        [&](double l) {
          std::vector<double> marks(static_cast<std::size_t>(dim), l / dim);
          return a.density(marks);
        },
        dim);
    parts.push_back(limits::relative_report("aldous_normalization_p" + std::to_string(p), total, 1.0, 1e-6));
  }
  out.report = all_parts("crt_marginals", std::move(parts), s);
  return out;
}

// ---------------------------------------------------------------- snake

snake::SpatialConfig space(int d, double step) {
  snake::SpatialConfig cfg;
  cfg.dimension = d;
  cfg.step = step;
  cfg.validate();
  return cfg;
}

std::string estimate_row(const std::string& part, double param, const snake::Estimate& e, double reference) {
  return part + "," + num(param) + "," + num(e.value) + "," + num(e.se) + "," + num(reference) + "\n";
}

Outcome snake_marginals(const Settings& s) {
  const auto seed = s.seed();
  const auto reps = s.count("reps");
  Outcome out;
  std::vector<CheckReport> parts;

  // Given the reduced tree, the two endpoints are Gaussian with covariance
  // the length of the shared root branch.
  std::vector<double> dev(reps);
  auto cfg1 = space(1, 0.05);
  for_replicates(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(part_seed(seed, 0), i);
    auto tree = sample_marginal_direct(2, rng);
    auto m = snake::sample_snake_marginal({0.0}, tree, cfg1, rng);
    dev[i] = m.endpoints[0][0] * m.endpoints[1][0] - tree.marks[0];
  });
  parts.push_back(limits::z_report("endpoint_covariance_minus_root_branch", stats::mean_se(dev), 0.0));

  const double distance = s.real("distance"), rho = s.real("radius");
  snake::SnakeRun run{{0.0, 0.0, 0.0}, space(3, s.real("step")), s.real("h0"), s.real("cap")};
  auto in_ball = [&](std::span<const double> y) {
    return (y[0] - distance) * (y[0] - distance) + y[1] * y[1] + y[2] * y[2] < rho * rho ? 1.0 : 0.0;
  };
  const auto occ_reps = s.count("occupation_reps");
  const double refs[2] = {snake::ball_occupation_reference(distance, rho, run.level_cap),
                          snake::ball_occupation_second_reference(distance, rho, run.level_cap)};
  out.table = "part,power,estimate,se,reference\n";
  for (int power = 1; power <= 2; ++power) {
    auto est = snake::occupation_moment(run, in_ball, power, occ_reps, part_seed(seed, power));
    parts.push_back(limits::relative_report("occupation_moment_" + std::to_string(power), est.extrapolated.value,
                                            refs[power - 1], 0.1, est.extrapolated.se));
    out.table += estimate_row("occupation", power, est.extrapolated, refs[power - 1]);
    out.notes.push_back("occupation moment " + std::to_string(power) + ": coarse " + num(est.coarse.value) + " fine " +
                        num(est.fine.value) + " extrapolated " + num(est.extrapolated.value) + " +- " +
                        num(est.extrapolated.se) + ", quadrature " + num(refs[power - 1]));
  }
  out.report = all_parts("snake_marginals", std::move(parts), s);
  return out;
}

Outcome snake_exit_moment(const Settings& s) {
  const double x = s.real("x"), left = s.real("g_left"), right = s.real("g_right");
  snake::SnakeRun run{{x}, space(1, s.real("step")), s.real("h0"), s.real("cap")};
  auto domain = snake::Domain::ball({0.0}, 1.0);
  if (!domain.contains(run.origin)) throw Error(ErrorCode::ConfigError, "x must lie in (-1, 1)");
  auto g = [&](std::span<const double> y) { return y[0] > 0 ? right : left; };
  auto est = snake::exit_first_moment(run, domain, snake::default_band(run.space), g, s.count("reps"), s.seed());
  const double ref = snake::interval_exit_reference(x, left, right, run.level_cap);
  Outcome out;
  out.notes.push_back("coarse " + num(est.coarse.value) + " fine " + num(est.fine.value) + " extrapolated " +
                      num(est.extrapolated.value) + " +- " + num(est.extrapolated.se) + ", reference " + num(ref));
  out.table = "part,h0,estimate,se,reference\n" + estimate_row("coarse", est.h0, est.coarse, ref) +
              estimate_row("fine", est.h0 / 2, est.fine, ref) + estimate_row("extrapolated", 0, est.extrapolated, ref);
  out.report = all_parts("exit_first_moment",
                         {limits::relative_report("extrapolated_vs_reference", est.extrapolated.value, ref, 0.1,
                                                  est.extrapolated.se)},
                         s);
  return out;
}

Outcome snake_pde(const Settings& s) {
  const double lambda = s.real("lambda");
  snake::OdeOracle1d ode(lambda);
  std::size_t residual_bad = 0;
  double worst = 0;
  const int grid = 19;
  for (int i = 0; i < grid; ++i) {
    double x = -0.9 + 1.8 * i / (grid - 1);
    double r = std::abs(ode.green_residual(x));
    worst = std::max(worst, r);
    residual_bad += r >= 1e-8;
  }
  auto domain = snake::Domain::ball({0.0}, 1.0);
  auto g = [&](std::span<const double>) { return lambda; };
  const double step = s.real("step");
  const auto reps = s.count("reps");
  snake::SnakeRun coarse{{0.0}, space(1, step), s.real("h0"), s.real("cap")};
  snake::SnakeRun fine{{0.0}, space(1, step / 4), s.real("h0"), s.real("cap")};
  auto uc = snake::u_hat(coarse, domain, snake::default_band(coarse.space), g, reps, part_seed(s.seed(), 0));
  auto uf = snake::u_hat(fine, domain, snake::default_band(fine.space), g, reps, part_seed(s.seed(), 1));
  auto combined = snake::step_richardson(uc.extrapolated, uf.extrapolated);
  const double ref = ode.center_value();
  Outcome out;
  out.notes.push_back("ode u(0) = " + num(ref) + ", largest Green residual " + num(worst));
  out.notes.push_back("u_hat(0) at step " + num(step) + ": " + num(uc.extrapolated.value) + ", at step " + num(step / 4) +
                      ": " + num(uf.extrapolated.value) + ", combined " + num(combined.value) + " +- " + num(combined.se));
  out.table = "part,step,estimate,se,reference\n" + estimate_row("coarse_step", step, uc.extrapolated, ref) +
              estimate_row("fine_step", step / 4, uf.extrapolated, ref) + estimate_row("combined", 0, combined, ref);
  out.report = all_parts("pde_center_value",
                         {limits::exact_report("green_residual_below_1e-8", residual_bad, grid),
                          limits::relative_report("u_hat_vs_ode", combined.value, ref, 0.05, combined.se)},
                         s);
  return out;
}

Outcome snake_hitting(const Settings& s) {
  const auto seed = s.seed();
  const auto reps = s.count("reps");
  const auto eps_list = s.reals("eps");
  Outcome out;
  out.table = "part,d,parameter,estimate,se,reference\n";
  std::vector<CheckReport> parts;
  for (int d = 1; d <= 3; ++d) {
    std::vector<snake::Estimate> scaled;
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
      const double eps = eps_list[k];
      auto e = snake::hitting_probability(eps, d, reps, part_seed(seed, 10 * d + k));
      scaled.push_back({e.value * eps * eps, e.se * eps * eps});
    }
    double mean = 0;
    for (const auto& e : scaled) mean += e.value / static_cast<double>(scaled.size());
    std::string line = "d=" + std::to_string(d) + " eps^2 N(hit): ";
    for (std::size_t k = 0; k < scaled.size(); ++k) {
      parts.push_back(limits::relative_report("scaling_d" + std::to_string(d) + "_eps" + num(eps_list[k]),
                                              scaled[k].value, mean, 0.1, scaled[k].se));
      out.table += "scaling," + std::to_string(d) + "," + num(eps_list[k]) + "," + num(scaled[k].value) + "," +
                   num(scaled[k].se) + "," + num(mean) + "\n";
      line += num(scaled[k].value) + " ";
    }
    if (d == 1) line += "(exact " + num(snake::interval_hitting_constant()) + ")";
    out.notes.push_back(line);
  }

  snake::PointHittingParams params;
  params.step = s.real("point_step");
  params.h0 = s.real("point_h0");
  params.level_cap = s.real("point_cap");
  const auto radii = s.reals("radii");
  const double targets[4] = {0, 1.5, 0, 0.5};
  for (int d : {1, 3}) {
    params.reps = s.count(d == 1 ? "point_reps_d1" : "point_reps_d3");
    snake::Point x(static_cast<std::size_t>(d), 0.0);
    x[0] = 1;
    auto est = snake::point_hitting(x, radii, params, part_seed(seed, 100 + d));
    std::vector<double> values, exact;
    for (std::size_t i = 0; i < radii.size(); ++i) {
      values.push_back(est[i].value);
      exact.push_back(snake::point_hitting_reference(d, radii[i]));
      out.table += "point," + std::to_string(d) + "," + num(radii[i]) + "," + num(est[i].value) + "," +
                   num(est[i].se) + "," + num(exact.back()) + "\n";
      out.notes.push_back("d=" + std::to_string(d) + " r=" + num(radii[i]) + ": simulated " + num(est[i].value) +
                          " +- " + num(est[i].se) + ", radial ode " + num(exact.back()));
    }
    const double kappa = snake::point_correction_exponent(d);
    const double extrapolated = snake::extrapolate_radius(radii, values, kappa);
    out.notes.push_back("d=" + std::to_string(d) + " extrapolated to r=0: " + num(extrapolated) +
                        " (same fit on the ode values: " + num(snake::extrapolate_radius(radii, exact, kappa)) +
                        ", target " + num(targets[d]) + ")");
    parts.push_back(limits::relative_report("point_d" + std::to_string(d), extrapolated, targets[d], 0.1));
  }

  params.reps = s.count("point_reps_d4");
  const auto radii4 = s.reals("radii_d4");
  auto est4 = snake::point_hitting({1.0, 0.0, 0.0, 0.0}, radii4, params, part_seed(seed, 104));
  std::size_t rises = 0;
  std::string line = "d=4 N(hit B(0, r)):";
  for (std::size_t i = 0; i < est4.size(); ++i) {
    if (i > 0) rises += !(est4[i].value < est4[i - 1].value);
    line += " r=" + num(radii4[i]) + ": " + num(est4[i].value);
    out.table += "point,4," + num(radii4[i]) + "," + num(est4[i].value) + "," + num(est4[i].se) + ",0\n";
  }
  out.notes.push_back(line);
  parts.push_back(limits::exact_report("d4_strictly_decreasing", rises, est4.size()));
  parts.push_back(limits::exact_report("d4_halves_over_radii", est4.back().value < 0.5 * est4.front().value ? 0 : 1, 1));
  out.report = all_parts("hitting", std::move(parts), s);
  return out;
}

// Exit measure of one grid snake, written as a CSV atom list.
Outcome snake_exit_measure(const Settings& s) {
  const int d = static_cast<int>(s.count("d"));
  double delta = s.text("delta").empty() ? 0.0 : s.real("delta");
  if (!s.text("dt").empty()) {
    const double from_dt = std::sqrt(s.real("dt"));
    if (delta > 0 && std::abs(from_dt - delta) > 1e-9 * delta)
      throw Error(ErrorCode::ConfigError, "the lattice snake needs dt = delta^2");
    delta = from_dt;
  }
  if (!(delta > 0)) delta = 1e-3;
  snake::SnakeRun run{snake::Point(static_cast<std::size_t>(d), 0.0), space(d, delta), s.real("h0"), s.real("cap")};
  run.validate();
  const double eps = s.text("eps") == "auto" ? snake::default_band(run.space) : s.real("eps");
  const double radius = s.real("radius");
  auto domain = snake::Domain::ball(run.origin, radius);
  Rng rng = Rng::stream(s.seed(), 0);
  auto gs = snake::grid_snake(run, rng);
  auto z = snake::exit_measure(gs, domain, eps);
  std::size_t off = 0;
  for (const auto& a : z.atoms) {
    double r2 = 0;
    for (double v : a.position) r2 += v * v;
    off += std::abs(std::sqrt(r2) - radius) > 1e-9 * radius;
  }
  Outcome out;
  out.table = z.to_csv();
  out.notes.push_back("height " + num(gs.height()) + ", " + std::to_string(z.atoms.size()) + " atoms, total mass " +
                      num(z.total_mass()) + " (weight 1/(2 h0) = " + num(run.weight()) + " not applied)");
  out.report = all_parts("exit_measure", {limits::exact_report("atoms_on_boundary", off, z.atoms.size())}, s);
  return out;
}

std::vector<Experiment> build_catalog() {
  using D = std::vector<std::pair<std::string, std::string>>;
  std::vector<Experiment> c;
  c.push_back({"codings", "roundtrip", "bijections between trees, Lukasiewicz paths, height and contour sequences", 1,
               false, D{{"pmax", "9"}}, codings_roundtrip});
  c.push_back({"gw", "forest-identities", "height process from the walk and tree count from its infimum", 2, true,
               D{{"law", "all"}, {"steps", "10000"}, {"forests", "1000"}}, gw_forest_identities});
  c.push_back({"gw", "uniformity", "size-conditioned geometric trees are uniform", 3, true,
               D{{"n", "5"}, {"reps", "100000"}}, gw_uniformity});
  c.push_back({"gw", "survival", "survival probability of critical trees", 4, true,
               D{{"nmax", "1000"}, {"reps", "100000"}}, gw_survival});
  c.push_back({"gw", "ladder", "law of the first weak ladder height", 5, true,
               D{{"law", "all"}, {"reps", "50000"}, {"steps", "1000000"}}, gw_ladder});
  c.push_back({"limits", "height-marginal", "one-dimensional marginals of height, contour and tree count", 6, true,
               D{{"law", "all"}, {"p", "10000"}, {"reps", "10000"}}, limits_height_marginal});
  c.push_back({"limits", "conditioned-size", "height of size-conditioned trees against the excursion maximum", 7, true,
               D{{"law", "geometric"}, {"n", "2000"}, {"reps", "5000"}, {"brownian_reps", "5000"}, {"dt", "1e-5"}},
               limits_conditioned_size});
  c.push_back({"limits", "duration-laplace", "size of height-conditioned trees against the excursion duration", 8, true,
               D{{"law", "geometric"}, {"p", "600"}, {"reps", "20000"}, {"lambdas", "0.5,1,2"}}, limits_duration_laplace});
  c.push_back({"limits", "ray-knight", "occupation densities as a Feller diffusion and the Feller limit of GW", 9, true,
               D{{"reps", "4000"}, {"dt", "1e-5"}, {"levels", "0.5,1"}, {"feller_law", "geometric"}, {"feller_p", "100"},
                 {"feller_n", "100"}, {"feller_reps", "10000"}, {"feller_dt", "1e-3"}},
               limits_ray_knight});
  c.push_back({"gh", "real-tree", "coded trees are real trees and re-rooting", 10, true,
               D{{"quadruples", "10000"}, {"per_excursion", "100"}, {"functions", "100"}, {"dt", "0.000244140625"}},
               gh_real_tree});
  c.push_back({"gh", "distance", "Gromov-Hausdorff distance and its sup-norm bound", 11, true, D{{"pairs", "100"}},
               gh_distance});
  c.push_back({"crt", "marginals", "law of the reduced tree of p uniform points", 12, true,
               D{{"pmax", "5"}, {"reps", "3000"}, {"dt", "2e-5"}}, crt_marginals});
  c.push_back({"snake", "marginals", "snake marginals along a reduced tree and occupation moments", 13, true,
               D{{"reps", "40000"}, {"occupation_reps", "600000"}, {"step", "0.02"}, {"h0", "0.02"}, {"cap", "2"},
                 {"distance", "1"}, {"radius", "0.5"}},
               snake_marginals});
  c.push_back({"snake", "exit-moment", "first moment of the exit measure", 14, true,
               D{{"x", "0"}, {"g_left", "1"}, {"g_right", "2"}, {"step", "0.02"}, {"h0", "0.2"}, {"cap", "4"},
                 {"reps", "200000"}},
               snake_exit_moment});
  c.push_back({"snake", "pde", "exit-measure Laplace functional solves u'' = 4 u^2", 15, true,
               D{{"lambda", "1"}, {"step", "0.04"}, {"h0", "0.1"}, {"cap", "6"}, {"reps", "160000"}}, snake_pde});
  c.push_back({"snake", "hitting", "hitting probabilities scale as eps^-2 and points are polar from d = 4", 16, true,
               D{{"eps", "0.25,0.5,1"}, {"reps", "20000"}, {"point_step", "0.0025"}, {"point_h0", "0.05"},
                 {"point_cap", "8"}, {"radii", "0.2,0.1,0.05"}, {"point_reps_d1", "20000"}, {"point_reps_d3", "20000"},
                 {"radii_d4", "0.4,0.2,0.1,0.05"}, {"point_reps_d4", "4000"}},
               snake_hitting});
  c.push_back({"snake", "exit-measure", "exit measure of one snake excursion as an atom list", 0, true,
               D{{"d", "3"}, {"h0", "0.05"}, {"delta", "1e-3"}, {"dt", ""}, {"eps", "auto"}, {"radius", "0.3"},
                 {"cap", "1"}},
               snake_exit_measure});
  return c;
}

nlohmann::ordered_json settings_json(const Settings& s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : s.entries()) j[k] = v;
  return j;
}

void flatten(const CheckReport& r, const std::string& prefix, std::string& out) {
  const std::string name = prefix.empty() ? r.name : prefix + "/" + r.name;
  out += name + "," + r.kind + "," + num(r.value) + "," + num(r.threshold) + "," + (r.pass ? "1" : "0") + "\n";
  for (const auto& p : r.parts) flatten(p, name, out);
}

}  // namespace

const std::vector<Experiment>& catalog() {
  static const std::vector<Experiment> c = build_catalog();
  return c;
}

const Experiment* find_experiment(std::string_view command, std::string_view name) {
  for (const auto& e : catalog())
    if (e.command == command && e.name == name) return &e;
  return nullptr;
}

const Experiment* find_criterion(int criterion) {
  for (const auto& e : catalog())
    if (e.criterion == criterion) return &e;
  return nullptr;
}

std::string outcome_json(const Experiment& e, const Settings& s, const Outcome& o) {
  nlohmann::ordered_json j;
  j["experiment"] = e.command + " " + e.name;
  j["verifies"] = e.verifies;
  j["criterion"] = e.criterion;
  j["settings"] = settings_json(s);
  j["pass"] = o.report.pass;
  j["report"] = nlohmann::ordered_json::parse(limits::to_json(o.report));
  j["notes"] = o.notes;
  return j.dump(2) + "\n";
}

std::string outcome_csv(const Outcome& o) {
  if (!o.table.empty()) return o.table;
  std::string out = "check,kind,value,threshold,pass\n";
  flatten(o.report, "", out);
  return out;
}

}  // namespace ctree::lab
