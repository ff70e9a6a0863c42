// Independent reference computations used only by tests. Nothing here calls
// the code path it is used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "sitedev/masks.hpp"

namespace sitedev::oracle {

inline std::vector<std::uint8_t> bitmap(const InstanceMask& m) {
  std::vector<std::uint8_t> bits(m.grid_h() * m.grid_w(), 0);
  for (const Run& r : m.runs())
    for (std::uint64_t i = r.start; i < r.end(); ++i) bits[i] = 1;
  return bits;
}

inline std::uint64_t union_count(const MaskSet& s) {
  std::vector<std::uint8_t> any(s.grid_h() * s.grid_w(), 0);
  for (const auto& m : s.instances()) {
    const auto b = bitmap(m);
    for (std::size_t i = 0; i < b.size(); ++i) any[i] |= b[i];
  }
  return static_cast<std::uint64_t>(std::count(any.begin(), any.end(), 1));
}

inline double pixel_iou(const InstanceMask& a, const InstanceMask& b) {
  const auto x = bitmap(a), y = bitmap(b);
  double inter = 0, uni = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    inter += x[i] && y[i];
    uni += x[i] || y[i];
  }
  return inter / uni;
}

/// Maximum bipartite matching size over edges with weight >= threshold, by
/// exhaustive search (small inputs only).
inline std::size_t max_matching(const std::vector<std::vector<double>>& w, double threshold) {
  const std::size_t np = w.size();
  const std::size_t nt = np ? w[0].size() : 0;
  std::vector<bool> used(nt, false);
  std::function<std::size_t(std::size_t)> rec = [&](std::size_t p) -> std::size_t {
    if (p == np) return 0;
    std::size_t best = rec(p + 1);
    for (std::size_t t = 0; t < nt; ++t)
      if (!used[t] && w[p][t] >= threshold) {
        used[t] = true;
        best = std::max(best, 1 + rec(p + 1));
        used[t] = false;
      }
    return best;
  };
  return rec(0);
}

/// Least squares through the raw-sum normal equations (Cramer's rule), in
/// long double.
struct NormalFit {
  long double slope, intercept;
};
inline NormalFit normal_equations(const std::vector<double>& x, const std::vector<double>& y) {
  long double n = x.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double det = n * sxx - sx * sx;
  return {(n * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det};
}

struct TwoPass {
  double mean, population_sd, sample_sd;
};
inline TwoPass two_pass(const std::vector<double>& v) {
  long double sum = 0;
  for (double x : v) sum += x;
  const long double mean = sum / v.size();
  long double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(ss / v.size())),
          v.size() > 1 ? static_cast<double>(std::sqrt(ss / (v.size() - 1))) : 0.0};
}

/// Fraction of a cell [x0,x1]x[y0,y1] inside the square [l,r]x[t,b], by
/// sampling an n x n lattice of sub-cell centers.
inline double subsampled_overlap(double x0, double x1, double y0, double y1, double l, double r,
                                 double t, double b, int n = 100) {
  int inside = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = x0 + (j + 0.5) * (x1 - x0) / n;
      const double y = y0 + (i + 0.5) * (y1 - y0) / n;
      inside += x >= l && x < r && y >= t && y < b;
    }
  return static_cast<double>(inside) / (n * n);
}

}  // namespace sitedev::oracle
