#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctree/rng.hpp"

namespace ctree {

// Values of a path at times k * dt, k = 0..size()-1, read as the piecewise
// linear interpolation between grid times.
struct PathGrid {
  double dt = 1.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double span() const { return values.empty() ? 0.0 : dt * static_cast<double>(values.size() - 1); }
  double value_at(double t) const;
  double max() const;
};

struct ReflectedPath {
  PathGrid path;               // B - min B, distributed as |beta|
  std::vector<double> ltime;   // -min B, the local time at 0 of |beta|
};

PathGrid sample_bm(double dt, double horizon, Rng& rng, double start = 0.0);
ReflectedPath reflected_bm_with_local_time(double dt, double horizon, Rng& rng);
// Reflected path run until its local time reaches `level` (the inverse local
// time tau_level), with excursions above `ceiling` collapsed: when the path
// crosses the ceiling it restarts from the ceiling, which leaves the
// occupation measure of [0, ceiling] unchanged in law.
ReflectedPath reflected_until_local_time(double dt, double level, double ceiling, Rng& rng,
                                         std::size_t max_steps = 1'000'000'000);

// Normalized excursion on [0, 1] by cyclic shift of a Brownian bridge at its
// minimum. dt must divide 1.
PathGrid vervaat_excursion(double dt, Rng& rng);

struct HeightExcursion {
  PathGrid path;       // starts and ends at 0, max >= h
  double weight = 0;   // 1 / (2h): the excursion-measure mass of {height > h}
};
// First excursion of the reflected walk whose height reaches h.
HeightExcursion excursion_height_gt(double h, double dt, Rng& rng,
                                    std::size_t max_steps = 500'000'000);

// Euler scheme for dX = sigma sqrt(X) dB with full truncation; absorbed at 0.
PathGrid feller_diffusion(double sigma, double x0, double dt, double horizon, Rng& rng);

// 2 eps times the number of completed positive excursions of a signed path
// whose height is at least eps.
double local_time_via_counts(const PathGrid& signed_path, double eps);
// Attach an independent fair sign to every excursion of a reflected path,
// giving a signed path whose absolute value is the input.
PathGrid random_signs(const PathGrid& reflected, Rng& rng);

std::string to_csv(const PathGrid& path);

std::string format_double(double v);

}  // namespace ctree
