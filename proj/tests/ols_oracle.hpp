// Copyright 2026 The fdbs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Least squares via the raw-moment normal equations in extended precision,
// independent of the centred two-pass form used by fit_line.

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "fdbs/costmodel.hpp"

namespace fdbs::oracle {

struct OlsReference {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};

inline OlsReference closed_form_ols(const std::vector<cost::Point>& pts) {
  long double n = pts.size();
  long double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : pts) {
    long double x = p.rows;
    long double y = p.elapsed_ms;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  long double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  long double intercept = (sy - slope * sx) / n;
  long double ss_tot = syy - sy * sy / n;
  long double ss_res = 0;
  for (const auto& p : pts) {
    long double r = p.elapsed_ms - (intercept + slope * p.rows);
    ss_res += r * r;
  }
  return {static_cast<double>(intercept), static_cast<double>(slope),
          static_cast<double>(1.0L - ss_res / ss_tot)};
}

inline bool rel_close(double got, double want, double tol) {
  return std::fabs(got - want) <= tol * std::max(1.0, std::fabs(want));
}

// y = a + b*x with uniform noise; x spread over a few decades.
inline std::vector<cost::Point> noisy_line(std::mt19937_64& rng,
                                           std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double a = 100.0 * unit(rng);
  double b = 0.001 + 0.05 * unit(rng);
  double scale = std::pow(10.0, 1.0 + 3.0 * unit(rng));
  std::vector<cost::Point> pts;
  for (std::size_t i = 0; i < n; ++i) {
    double x = std::round(1.0 + scale * unit(rng));
    double y = (a + b * x) * (0.9 + 0.2 * unit(rng));
    pts.push_back({x, y});
  }
  return pts;
}

}  // namespace fdbs::oracle
