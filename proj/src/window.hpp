#pragma once

// Inner loops shared by the estimators, CV and the functional module.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace ullreg::detail {

/// Index range [lo, hi) of sorted points with |t - z| < h.
inline std::pair<std::size_t, std::size_t> window(std::span<const double> z,
                                                  double t, double h) {
  const auto lo = std::upper_bound(z.begin(), z.end(), t - h);
  const auto hi = std::lower_bound(lo, z.end(), t + h);
  return {static_cast<std::size_t>(lo - z.begin()),
          static_cast<std::size_t>(hi - z.begin())};
}

/// Number of neighbours ceil(span * n), clamped to [1, n].
inline std::size_t span_count(double span, std::size_t n) {
  const double raw = std::ceil(span * static_cast<double>(n) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1,
                                 n);
}

/// Start of the block of k consecutive sorted points closest to t.
inline std::size_t nearest_block(std::span<const double> z, double t,
                                 std::size_t k) {
  std::size_t lo = 0;
  std::size_t hi = z.size() - k;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (t - z[mid] > z[mid + k] - t) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

/// Weighted first and second moments of (d, x) with d = t - z. The second
/// moments are centred on the weighted mean of d so the determinant keeps
/// its precision when the window is lopsided.
struct LineMoments {
  double weight = 0.0;
  double mean_d = 0.0;
  double mean_x = 0.0;
  double cdd = 0.0;
  double cdx = 0.0;

  /// w0 w2 - w1^2.
  double determinant() const noexcept { return weight * cdd; }

  /// Intercept of the weighted line x = a + b d, i.e. its value at d = 0.
  double intercept() const noexcept { return mean_x - cdx / cdd * mean_d; }
};

/// Empty x/dz spans mean "x = 0" and "unit cell weights" respectively.
/// Two passes: kernel weights and means first, centred sums second.
template <class Shape>
LineMoments local_line(Shape shape, std::span<const double> z,
                       std::span<const double> x, std::span<const double> dz,
                       std::size_t lo, std::size_t hi, double t, double h,
                       double scale) {
  thread_local std::vector<double> k;
  k.resize(hi - lo);
  LineMoments m;
  const double inv_h = 1.0 / h;
  double swd = 0.0;
  double swx = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double d = t - z[i];
    double w = shape(d * inv_h) * scale;
    if (!dz.empty()) w *= dz[i];
    k[i - lo] = w;
    m.weight += w;
    swd += w * d;
    if (!x.empty()) swx += w * x[i];
  }
  if (!(m.weight > 0.0)) return m;
  m.mean_d = swd / m.weight;
  m.mean_x = swx / m.weight;
  for (std::size_t i = lo; i < hi; ++i) {
    const double w = k[i - lo];
    const double dd = t - z[i] - m.mean_d;
    m.cdd += w * dd * dd;
    if (!x.empty()) m.cdx += w * dd * (x[i] - m.mean_x);
  }
  return m;
}

template <class Shape>
std::optional<double> local_constant(Shape shape, std::span<const double> z,
                                     std::span<const double> x,
                                     std::span<const double> dz, std::size_t lo,
                                     std::size_t hi, double t, double h) {
  double sw = 0.0;
  double swx = 0.0;
  const double inv_h = 1.0 / h;
  for (std::size_t i = lo; i < hi; ++i) {
    double k = shape((t - z[i]) * inv_h);
    if (!dz.empty()) k *= dz[i];
    sw += k;
    swx += k * x[i];
  }
  if (!(sw > 0.0)) return std::nullopt;
  return swx / sw;
}

}  // namespace ullreg::detail
