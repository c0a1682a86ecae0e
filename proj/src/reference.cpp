#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ullreg/estimators.hpp"

namespace ullreg::reference {

namespace {

struct NormalEquations {
  // [s0 s1; s1 s2] [a; b] = [r0; r1]
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, r0 = 0.0, r1 = 0.0;

  void add(double w, double d, double x) {
    s0 += w;
    s1 += w * d;
    s2 += w * d * d;
    r0 += w * x;
    r1 += w * d * x;
  }

  // Gaussian elimination with partial pivoting on the 2x2 system.
  std::optional<double> intercept(double floor) const {
    if (!(s0 > 0.0) || s0 * s2 - s1 * s1 < floor) return std::nullopt;
    double a00 = s0, a01 = s1, a10 = s1, a11 = s2, b0 = r0, b1 = r1;
    if (std::abs(a10) > std::abs(a00)) {
      std::swap(a00, a10);
      std::swap(a01, a11);
      std::swap(b0, b1);
    }
    const double f = a10 / a00;
    const double u11 = a11 - f * a01;
    const double c1 = b1 - f * b0;
    const double slope = c1 / u11;
    return (b0 - a01 * slope) / a00;
  }
};

std::optional<double> point(EstimatorKind kind, const OrderedSample& sample,
                            const Kernel& kernel, double smoothing, double t,
                            SpacingKind spacing) {
  const auto z = sample.z();
  const auto x = sample.x();
  const std::size_t n = z.size();

  if (kind == EstimatorKind::loess1) {
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::abs(t - z[i]);
    std::vector<double> sorted = dist;
    const auto k = static_cast<std::size_t>(std::clamp(
        std::ceil(smoothing * static_cast<double>(n) - 1e-9), 1.0,
        static_cast<double>(n)));
    std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
    const double h = sorted[k - 1];
    if (!(h > 0.0)) return std::nullopt;
    NormalEquations ne;
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (dist[i] < h) {
        const double w = kernel((t - z[i]) / h);
        wsum += w;
        ne.add(w, t - z[i], x[i]);
      }
    }
    return ne.intercept(wsum * wsum * denominator_floor(kernel, h));
  }

  const double h = smoothing;
  const auto cells = sample.cell_weights(spacing);
  NormalEquations ne;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = t - z[i];
    if (std::abs(d) >= h) continue;
    double w = kernel.eval_scaled(h, d);
    if (kind != EstimatorKind::nw) w *= cells[i];
    ne.add(w, d, x[i]);
  }
  if (kind == EstimatorKind::ull) {
    return ne.intercept(denominator_floor(kernel, h));
  }
  if (!(ne.s0 > 0.0)) return std::nullopt;
  return ne.r0 / ne.s0;
}

}  // namespace

LocalWeights local_weights(const OrderedSample& sample, const Kernel& kernel,
                           double h, double t, SpacingKind spacing) {
  const auto z = sample.z();
  const auto cells = sample.cell_weights(spacing);
  LocalWeights lw;
  lw.t = t;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double d = t - z[i];
    if (std::abs(d) >= h) continue;
    const double k = kernel.eval_scaled(h, d) * cells[i];
    for (int j = 0; j < 4; ++j) lw.w[j] += std::pow(d, j) * k;
  }
  lw.denom = lw.w[0] * lw.w[2] - lw.w[1] * lw.w[1];
  return lw;
}

FittedCurve fit(EstimatorKind kind, const OrderedSample& sample,
                const Kernel& kernel, double smoothing,
                std::span<const double> grid, const FitOptions& options) {
  if (!(smoothing > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  FittedCurve curve;
  curve.grid.assign(grid.begin(), grid.end());
  curve.values.assign(grid.size(), 0.0);
  curve.valid.assign(grid.size(), 0);
  curve.h = smoothing;
  curve.estimator_kind = kind;
  curve.spacing_kind = options.spacing;
  if (kind == EstimatorKind::ull && options.indicator &&
      sample.max_spacing() > kernel.moments().c_star * smoothing) {
    return curve;
  }
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (auto v = point(kind, sample, kernel, smoothing, grid[g], options.spacing)) {
      curve.values[g] = *v;
      curve.valid[g] = 1;
    }
  }
  return curve;
}

}  // namespace ullreg::reference
