#include "ullreg/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "window.hpp"

namespace ullreg {

std::string_view to_string(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::ull:
      return "ull";
    case EstimatorKind::ulc:
      return "ulc";
    case EstimatorKind::nw:
      return "nw";
    case EstimatorKind::loess1:
      return "loess1";
  }
  return "?";
}

std::string_view to_string(SpacingKind kind) noexcept {
  return kind == SpacingKind::plain ? "plain" : "voronoi";
}

EstimatorKind parse_estimator(std::string_view name) {
  if (name == "ull") return EstimatorKind::ull;
  if (name == "ulc") return EstimatorKind::ulc;
  if (name == "nw") return EstimatorKind::nw;
  if (name == "loess1") return EstimatorKind::loess1;
  throw std::invalid_argument("unknown estimator '" + std::string(name) + "'");
}

SpacingKind parse_spacing(std::string_view name) {
  if (name == "plain") return SpacingKind::plain;
  if (name == "voronoi") return SpacingKind::voronoi;
  throw std::invalid_argument("unknown spacing '" + std::string(name) + "'");
}

std::size_t FittedCurve::invalid_count() const noexcept {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 0));
}

double denominator_floor(const Kernel& kernel, double h) noexcept {
  return 1e-12 * h * h * std::max(1.0, kernel.moments().kappa[2]);
}

namespace {

void require_positive(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("bandwidth must be positive and finite");
  }
}

void require_ull_bandwidth(const OrderedSample& sample, double h) {
  require_positive(h);
  if (h >= sample.domain().length()) {
    throw std::invalid_argument("bandwidth must be below the domain length");
  }
}

FittedCurve make_curve(std::span<const double> grid, double h,
                       EstimatorKind kind, SpacingKind spacing) {
  FittedCurve curve;
  curve.grid.assign(grid.begin(), grid.end());
  curve.values.assign(grid.size(), 0.0);
  curve.valid.assign(grid.size(), 0);
  curve.h = h;
  curve.estimator_kind = kind;
  curve.spacing_kind = spacing;
  return curve;
}

template <class PointFn>
void evaluate_grid(FittedCurve& curve, PointFn&& point) {
  const auto m = static_cast<std::ptrdiff_t>(curve.grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t g = 0; g < m; ++g) {
    if (auto v = point(curve.grid[g])) {
      curve.values[g] = *v;
      curve.valid[g] = 1;
    }
  }
}

}  // namespace

LocalWeights local_weights(const OrderedSample& sample, const Kernel& kernel,
                           double h, double t, SpacingKind spacing) {
  require_positive(h);
  const auto z = sample.z();
  const auto dz = sample.cell_weights(spacing);
  const auto [lo, hi] = detail::window(z, t, h);
  LocalWeights lw;
  lw.t = t;
  kernel.visit([&](auto shape) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double d = t - z[i];
      const double k = shape(d / h) / h * dz[i];
      lw.w[0] += k;
      lw.w[1] += k * d;
      lw.w[2] += k * d * d;
      lw.w[3] += k * d * d * d;
    }
  });
  lw.denom = lw.w[0] * lw.w[2] - lw.w[1] * lw.w[1];
  return lw;
}

BetaWindow beta_weights(const OrderedSample& sample, const Kernel& kernel,
                        double h, double t, SpacingKind spacing) {
  require_positive(h);
  const auto z = sample.z();
  const auto dz = sample.cell_weights(spacing);
  const auto [lo, hi] = detail::window(z, t, h);
  const auto moments = kernel.visit([&](auto shape) {
    return detail::local_line(shape, z, {}, dz, lo, hi, t, h, 1.0 / h);
  });
  if (!(moments.weight > 0.0) ||
      moments.determinant() < denominator_floor(kernel, h)) {
    throw std::domain_error("singular local window");
  }
  // beta_i = (w2 - d_i w1) / (w0 w2 - w1^2), with w2 and the determinant
  // taken from the centred accumulation for accuracy.
  const double w1 = moments.weight * moments.mean_d;
  const double w2 = moments.cdd + moments.weight * moments.mean_d * moments.mean_d;
  const double denom = moments.determinant();
  BetaWindow out;
  out.first = lo;
  out.beta.reserve(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) {
    out.beta.push_back((w2 - (t - z[i]) * w1) / denom);
  }
  return out;
}

std::array<double, 4> limit_weights(const Kernel& kernel, double h, double t,
                                    const Domain& domain) {
  require_positive(h);
  const double lo = std::max(-1.0, (t - domain.hi) / h);
  const double hi = std::min(1.0, (t - domain.lo) / h);
  std::array<double, 4> w{};
  double hj = 1.0;
  for (int j = 0; j < 4; ++j) {
    w[j] = lo < hi ? hj * kernel.signed_moment(j, lo, hi) : 0.0;
    hj *= h;
  }
  return w;
}

std::optional<double> estimate_ull(const OrderedSample& sample,
                                   const Kernel& kernel, double h, double t,
                                   SpacingKind spacing) {
  const auto z = sample.z();
  const auto [lo, hi] = detail::window(z, t, h);
  const auto m = kernel.visit([&](auto shape) {
    return detail::local_line(shape, z, sample.x(), sample.cell_weights(spacing),
                              lo, hi, t, h, 1.0 / h);
  });
  if (!(m.weight > 0.0) || m.determinant() < denominator_floor(kernel, h)) {
    return std::nullopt;
  }
  return m.intercept();
}

std::optional<double> estimate_ulc(const OrderedSample& sample,
                                   const Kernel& kernel, double h, double t,
                                   SpacingKind spacing) {
  const auto z = sample.z();
  const auto [lo, hi] = detail::window(z, t, h);
  return kernel.visit([&](auto shape) {
    return detail::local_constant(shape, z, sample.x(),
                                  sample.cell_weights(spacing), lo, hi, t, h);
  });
}

std::optional<double> estimate_nw(const OrderedSample& sample,
                                  const Kernel& kernel, double h, double t) {
  const auto z = sample.z();
  const auto [lo, hi] = detail::window(z, t, h);
  return kernel.visit([&](auto shape) {
    return detail::local_constant(shape, z, sample.x(), {}, lo, hi, t, h);
  });
}

std::optional<double> estimate_loess1(const OrderedSample& sample,
                                      const Kernel& kernel,
                                      LoessBandwidth bandwidth, double t) {
  const auto z = sample.z();
  std::size_t lo = 0;
  std::size_t hi = 0;
  double h = bandwidth.value;
  if (bandwidth.mode == LoessBandwidth::Mode::span) {
    const std::size_t k = detail::span_count(bandwidth.value, z.size());
    lo = detail::nearest_block(z, t, k);
    hi = lo + k;
    h = std::max(t - z[lo], z[hi - 1] - t);
  } else {
    std::tie(lo, hi) = detail::window(z, t, h);
  }
  if (!(h > 0.0)) return std::nullopt;
  const auto m = kernel.visit([&](auto shape) {
    return detail::local_line(shape, z, sample.x(), {}, lo, hi, t, h, 1.0);
  });
  if (!(m.weight > 0.0) ||
      m.cdd < m.weight * denominator_floor(kernel, h)) {
    return std::nullopt;
  }
  return m.intercept();
}

FittedCurve fit_ull(const OrderedSample& sample, const Kernel& kernel, double h,
                    std::span<const double> grid, const FitOptions& options) {
  require_ull_bandwidth(sample, h);
  FittedCurve curve = make_curve(grid, h, EstimatorKind::ull, options.spacing);
  if (options.indicator &&
      sample.max_spacing() > kernel.moments().c_star * h) {
    return curve;
  }
  evaluate_grid(curve, [&](double t) {
    return estimate_ull(sample, kernel, h, t, options.spacing);
  });
  return curve;
}

FittedCurve fit_ulc(const OrderedSample& sample, const Kernel& kernel, double h,
                    std::span<const double> grid, SpacingKind spacing) {
  require_positive(h);
  FittedCurve curve = make_curve(grid, h, EstimatorKind::ulc, spacing);
  evaluate_grid(curve, [&](double t) {
    return estimate_ulc(sample, kernel, h, t, spacing);
  });
  return curve;
}

FittedCurve fit_nw(const OrderedSample& sample, const Kernel& kernel, double h,
                   std::span<const double> grid) {
  require_positive(h);
  FittedCurve curve =
      make_curve(grid, h, EstimatorKind::nw, SpacingKind::plain);
  evaluate_grid(curve,
                [&](double t) { return estimate_nw(sample, kernel, h, t); });
  return curve;
}

FittedCurve fit_loess1(const OrderedSample& sample, const Kernel& kernel,
                       LoessBandwidth bandwidth, std::span<const double> grid) {
  if (bandwidth.mode == LoessBandwidth::Mode::span) {
    if (!(bandwidth.value > 0.0 && bandwidth.value <= 1.0)) {
      throw std::invalid_argument("span must lie in (0,1]");
    }
  } else {
    require_positive(bandwidth.value);
  }
  FittedCurve curve = make_curve(grid, bandwidth.value, EstimatorKind::loess1,
                                 SpacingKind::plain);
  evaluate_grid(curve, [&](double t) {
    return estimate_loess1(sample, kernel, bandwidth, t);
  });
  return curve;
}

FittedCurve fit(EstimatorKind kind, const OrderedSample& sample,
                const Kernel& kernel, double smoothing,
                std::span<const double> grid, const FitOptions& options) {
  switch (kind) {
    case EstimatorKind::ull:
      return fit_ull(sample, kernel, smoothing, grid, options);
    case EstimatorKind::ulc:
      return fit_ulc(sample, kernel, smoothing, grid, options.spacing);
    case EstimatorKind::nw:
      return fit_nw(sample, kernel, smoothing, grid);
    case EstimatorKind::loess1:
      return fit_loess1(sample, kernel, LoessBandwidth::nn_span(smoothing),
                        grid);
  }
  throw std::invalid_argument("unknown estimator");
}

std::optional<double> estimate(EstimatorKind kind, const OrderedSample& sample,
                               const Kernel& kernel, double smoothing, double t,
                               const FitOptions& options) {
  switch (kind) {
    case EstimatorKind::ull:
      return estimate_ull(sample, kernel, smoothing, t, options.spacing);
    case EstimatorKind::ulc:
      return estimate_ulc(sample, kernel, smoothing, t, options.spacing);
    case EstimatorKind::nw:
      return estimate_nw(sample, kernel, smoothing, t);
    case EstimatorKind::loess1:
      return estimate_loess1(sample, kernel, LoessBandwidth::nn_span(smoothing),
                             t);
  }
  throw std::invalid_argument("unknown estimator");
}

double theoretical_interior_bias(double second_derivative, const Kernel& kernel,
                                 double h) {
  require_positive(h);
  return second_derivative * kernel.moments().kappa[2] * h * h / 2.0;
}

double theoretical_variance_ratio(VarianceComparison pair) {
  switch (pair) {
    case VarianceComparison::ulc_plain_vs_nw:
      return 2.0;
    case VarianceComparison::ulc_voronoi_vs_nw:
      return 1.5;
    case VarianceComparison::nw_vs_nw:
      return 1.0;
  }
  throw std::invalid_argument("unsupported variance comparison");
}

}  // namespace ullreg
