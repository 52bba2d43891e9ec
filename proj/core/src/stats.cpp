#include "ctree/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "ctree/error.hpp"
#include "ctree/excursion.hpp"

namespace ctree::stats {

std::string to_json(const TestResult& r) {
  return "{\"test\":\"" + r.test + "\",\"statistic\":" + format_double(r.statistic) +
         ",\"pvalue\":" + format_double(r.pvalue) + ",\"n\":" + std::to_string(r.n) +
         ",\"seed\":" + std::to_string(r.seed) + "}";
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_survival(double lambda) {
  if (lambda <= 0) return 1.0;
  if (lambda < 1.0) {
    // Theta-function form converges fast for small lambda.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double s = 0;
    for (int k = 1; k < 50; k += 2) s += std::exp(-c * k * k);
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0;
  for (int k = 1; k < 100; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

namespace {

double ks_pvalue(double d, double n_eff) {
  const double r = std::sqrt(n_eff);
  return kolmogorov_survival((r + 0.12 + 0.11 / r) * d);
}

}  // namespace

TestResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw Error(ErrorCode::EmptySample, "KS test needs data");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0;
  for (std::size_t i = 0; i < x.size();) {
    std::size_t j = i;
    while (j < x.size() && x[j] == x[i]) ++j;
    // Left limit at an atom, so discrete laws are handled exactly.
    double f = cdf(x[i]);
    double f_left = cdf(std::nextafter(x[i], -std::numeric_limits<double>::infinity()));
    d = std::max({d, std::abs(static_cast<double>(j) / n - f), std::abs(f_left - static_cast<double>(i) / n)});
    i = j;
  }
  return {"ks", d, ks_pvalue(d, n), x.size(), 0};
}

TestResult two_sample_ks(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySample, "two-sample KS needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < x.size() && j < y.size()) {
    double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return {"ks2", d, ks_pvalue(d, nx * ny / (nx + ny)), x.size() + y.size(), 0};
}

TestResult chi_square(std::span<const double> observed, std::span<const double> probabilities, int fitted) {
  if (observed.size() != probabilities.size() || observed.size() < 2)
    throw Error(ErrorCode::EmptySample, "chi-square needs at least two matching cells");
  double total = 0;
  for (double o : observed) total += o;
  if (total <= 0) throw Error(ErrorCode::EmptySample, "chi-square needs data");
  double stat = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double e = total * probabilities[i];
    if (e <= 0) {
      if (observed[i] > 0) return {"chi2", INFINITY, 0.0, static_cast<std::size_t>(total), 0};
      continue;
    }
    stat += (observed[i] - e) * (observed[i] - e) / e;
  }
  const double dof = static_cast<double>(observed.size()) - 1.0 - fitted;
  double p = dof > 0 ? boost::math::gamma_q(dof / 2.0, stat / 2.0) : 1.0;
  return {"chi2", stat, p, static_cast<std::size_t>(total), 0};
}

TestResult chi_square_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw Error(ErrorCode::EmptySample, "tables must match");
  double na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i];
    nb += b[i];
  }
  if (na <= 0 || nb <= 0) throw Error(ErrorCode::EmptySample, "two-sample chi-square needs data");
  double stat = 0;
  int cells = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double col = a[i] + b[i];
    if (col <= 0) continue;
    ++cells;
    double ea = col * na / (na + nb), eb = col * nb / (na + nb);
    stat += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
  }
  const double dof = cells - 1.0;
  double p = dof > 0 ? boost::math::gamma_q(dof / 2.0, stat / 2.0) : 1.0;
  return {"chi2_2s", stat, p, static_cast<std::size_t>(na + nb), 0};
}

void merge_sparse_cells(std::vector<double>& observed, std::vector<double>& probabilities, double total,
                        double min_expected) {
  std::vector<double> o, p;
  double acc_o = 0, acc_p = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    acc_o += observed[i];
    acc_p += probabilities[i];
    if (acc_p * total >= min_expected) {
      o.push_back(acc_o);
      p.push_back(acc_p);
      acc_o = acc_p = 0;
    }
  }
  if ((acc_o > 0 || acc_p > 0) && !o.empty()) {
    o.back() += acc_o;
    p.back() += acc_p;
  } else if (o.empty()) {
    o.push_back(acc_o);
    p.push_back(acc_p);
  }
  observed = std::move(o);
  probabilities = std::move(p);
}

bool MeanSE::within(double target, double k) const { return std::abs(mean - target) <= k * se; }

MeanSE mean_se(std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorCode::EmptySample, "mean of an empty sample");
  const double n = static_cast<double>(xs.size());
  double m = 0;
  for (double x : xs) m += x;
  m /= n;
  double v = 0;
  for (double x : xs) v += (x - m) * (x - m);
  v = xs.size() > 1 ? v / (n - 1) : 0.0;
  return {m, std::sqrt(v / n), v, xs.size()};
}

}  // namespace ctree::stats
