#include "ctree/excursion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "ctree/error.hpp"

namespace ctree {

namespace {

std::size_t grid_steps(double dt, double horizon) {
  if (!(dt > 0) || !(horizon >= 0)) throw Error(ErrorCode::OutOfRange, "dt must be positive and horizon nonnegative");
  double n = horizon / dt;
  double r = std::round(n);
  if (std::abs(n - r) > 1e-9 * std::max(1.0, n)) throw Error(ErrorCode::OutOfRange, "dt must divide the horizon");
  return static_cast<std::size_t>(r);
}

}  // namespace

double PathGrid::value_at(double t) const {
  if (values.empty()) return 0.0;
  if (t <= 0) return values.front();
  double x = t / dt;
  auto k = static_cast<std::size_t>(x);
  if (k + 1 >= values.size()) return values.back();
  double frac = x - static_cast<double>(k);
  return values[k] + frac * (values[k + 1] - values[k]);
}

double PathGrid::max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

PathGrid sample_bm(double dt, double horizon, Rng& rng, double start) {
  const std::size_t n = grid_steps(dt, horizon);
  PathGrid p{dt, std::vector<double>(n + 1)};
  p.values[0] = start;
  const double s = std::sqrt(dt);
  for (std::size_t k = 0; k < n; ++k) p.values[k + 1] = p.values[k] + s * rng.normal();
  return p;
}

ReflectedPath reflected_bm_with_local_time(double dt, double horizon, Rng& rng) {
  PathGrid b = sample_bm(dt, horizon, rng);
  ReflectedPath r{{dt, std::vector<double>(b.size())}, std::vector<double>(b.size())};
  double m = 0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    m = std::min(m, b.values[k]);
    r.path.values[k] = b.values[k] - m;
    r.ltime[k] = -m;
  }
  return r;
}

ReflectedPath reflected_until_local_time(double dt, double level, double ceiling, Rng& rng,
                                         std::size_t max_steps) {
  ReflectedPath r{{dt, {0.0}}, {0.0}};
  const double s = std::sqrt(dt);
  double x = 0, l = 0;
  while (l < level) {
    if (r.path.values.size() > max_steps) throw Error(ErrorCode::BudgetExceeded, "inverse local time not reached");
    x += s * rng.normal();
    if (x < 0) {
      l -= x;
      x = 0;
    } else if (x > ceiling) {
      x = ceiling;
    }
    r.path.values.push_back(x);
    r.ltime.push_back(l);
  }
  return r;
}

PathGrid vervaat_excursion(double dt, Rng& rng) {
  PathGrid b = sample_bm(dt, 1.0, rng);
  const std::size_t n = b.size() - 1;
  const double end = b.values[n];
  std::vector<double> bridge(n);
  std::size_t argmin = 0;
  for (std::size_t k = 0; k < n; ++k) {
    bridge[k] = b.values[k] - end * static_cast<double>(k) / static_cast<double>(n);
    if (bridge[k] < bridge[argmin]) argmin = k;
  }
  PathGrid e{dt, std::vector<double>(n + 1)};
  for (std::size_t j = 0; j < n; ++j) e.values[j] = bridge[(argmin + j) % n] - bridge[argmin];
  e.values[0] = 0.0;
  e.values[n] = 0.0;
  return e;
}

HeightExcursion excursion_height_gt(double h, double dt, Rng& rng, std::size_t max_steps) {
  if (!(h > 0) || !(dt > 0)) throw Error(ErrorCode::OutOfRange, "h and dt must be positive");
  const double s = std::sqrt(dt);
  std::vector<double> current{0.0};
  double x = 0;
  bool high = false;
  for (std::size_t step = 0; step < max_steps; ++step) {
    x += s * rng.normal();
    if (x <= 0) {
      current.push_back(0.0);
      if (high) return {{dt, std::move(current)}, 0.5 / h};
      current.assign(1, 0.0);
      x = 0;
      continue;
    }
    current.push_back(x);
    if (x >= h) high = true;
  }
  throw Error(ErrorCode::BudgetExceeded, "no excursion reached the requested height");
}

PathGrid feller_diffusion(double sigma, double x0, double dt, double horizon, Rng& rng) {
  const std::size_t n = grid_steps(dt, horizon);
  PathGrid p{dt, std::vector<double>(n + 1, 0.0)};
  p.values[0] = x0;
  const double s = std::sqrt(dt);
  double x = x0;
  for (std::size_t k = 0; k < n && x > 0; ++k) {
    x += sigma * std::sqrt(x) * s * rng.normal();
    if (x <= 0) x = 0;
    p.values[k + 1] = x;
  }
  return p;
}

double local_time_via_counts(const PathGrid& path, double eps) {
  std::size_t count = 0;
  bool inside = false, started_from_zero = false;
  double height = 0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    double v = path.values[k];
    if (v > 0) {
      if (!inside) {
        inside = true;
        started_from_zero = k > 0;
        height = 0;
      }
      height = std::max(height, v);
    } else if (inside) {
      if (started_from_zero && height >= eps) ++count;
      inside = false;
    }
  }
  return 2.0 * eps * static_cast<double>(count);
}

PathGrid random_signs(const PathGrid& reflected, Rng& rng) {
  PathGrid out = reflected;
  double sign = 1;
  bool inside = false;
  for (double& v : out.values) {
    if (v > 0) {
      if (!inside) sign = rng.coin() ? 1.0 : -1.0;
      inside = true;
      v *= sign;
    } else {
      inside = false;
    }
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string to_csv(const PathGrid& path) {
  std::string s = "time,value\n";
  for (std::size_t k = 0; k < path.size(); ++k) {
    s += format_double(path.dt * static_cast<double>(k));
    s += ',';
    s += format_double(path.values[k]);
    s += '\n';
  }
  return s;
}

}  // namespace ctree
