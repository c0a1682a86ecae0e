#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ullreg/design.hpp"
#include "ullreg/kernels.hpp"

namespace ullreg {

enum class EstimatorKind { ull, ulc, nw, loess1 };

std::string_view to_string(EstimatorKind kind) noexcept;
std::string_view to_string(SpacingKind kind) noexcept;
/// Throws std::invalid_argument for unknown names.
EstimatorKind parse_estimator(std::string_view name);
SpacingKind parse_spacing(std::string_view name);

/// Local empirical moments w[j] = sum (t - z_i)^j K_h(t - z_i) dz_i over the
/// window |t - z_i| < h, and the determinant w0 w2 - w1^2.
struct LocalWeights {
  double t = 0.0;
  std::array<double, 4> w{};
  double denom = 0.0;
};

/// Intercept weights beta_i(t) for the points first .. first + beta.size()-1.
struct BetaWindow {
  std::size_t first = 0;
  std::vector<double> beta;
};

struct FittedCurve {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;
  double h = 0.0;
  EstimatorKind estimator_kind = EstimatorKind::ull;
  SpacingKind spacing_kind = SpacingKind::voronoi;

  std::size_t size() const noexcept { return grid.size(); }
  std::size_t invalid_count() const noexcept;
};

struct FitOptions {
  SpacingKind spacing = SpacingKind::voronoi;
  /// Multiply by I(delta_n <= c* h), zeroing the whole curve otherwise.
  bool indicator = false;
};

/// Bandwidth for degree-1 LOESS: either a fixed h or a nearest-neighbour
/// span fraction in (0,1].
struct LoessBandwidth {
  enum class Mode { fixed_h, span } mode = Mode::span;
  double value = 0.75;

  static LoessBandwidth fixed(double h) { return {Mode::fixed_h, h}; }
  static LoessBandwidth nn_span(double s) { return {Mode::span, s}; }
};

/// Windows with w0 w2 - w1^2 below this are singular.
double denominator_floor(const Kernel& kernel, double h) noexcept;

LocalWeights local_weights(const OrderedSample& sample, const Kernel& kernel,
                           double h, double t,
                           SpacingKind spacing = SpacingKind::plain);

/// Throws std::domain_error when the window is empty or singular.
BetaWindow beta_weights(const OrderedSample& sample, const Kernel& kernel,
                        double h, double t,
                        SpacingKind spacing = SpacingKind::plain);

/// Limits of the local moments for a uniform continuum design on the
/// sample domain: w_j(t) = int (t-z)^j K_h(t-z) dz over the domain.
std::array<double, 4> limit_weights(const Kernel& kernel, double h, double t,
                                    const Domain& domain);

// Single-point estimates. nullopt marks an invalid point (empty window,
// singular system, or t outside [min z - h, max z + h]).
std::optional<double> estimate_ull(const OrderedSample& sample,
                                   const Kernel& kernel, double h, double t,
                                   SpacingKind spacing);
std::optional<double> estimate_ulc(const OrderedSample& sample,
                                   const Kernel& kernel, double h, double t,
                                   SpacingKind spacing);
std::optional<double> estimate_nw(const OrderedSample& sample,
                                  const Kernel& kernel, double h, double t);
std::optional<double> estimate_loess1(const OrderedSample& sample,
                                      const Kernel& kernel,
                                      LoessBandwidth bandwidth, double t);

/// Universal local linear fit: intercept of the spacing-weighted local
/// least-squares line. Grid points are evaluated in parallel.
FittedCurve fit_ull(const OrderedSample& sample, const Kernel& kernel, double h,
                    std::span<const double> grid, const FitOptions& options = {});

/// Universal local constant fit (spacing-weighted kernel average).
FittedCurve fit_ulc(const OrderedSample& sample, const Kernel& kernel, double h,
                    std::span<const double> grid,
                    SpacingKind spacing = SpacingKind::voronoi);

FittedCurve fit_nw(const OrderedSample& sample, const Kernel& kernel, double h,
                   std::span<const double> grid);

FittedCurve fit_loess1(const OrderedSample& sample, const Kernel& kernel,
                       LoessBandwidth bandwidth, std::span<const double> grid);

/// Dispatch on kind. `smoothing` is h, or the span for loess1.
FittedCurve fit(EstimatorKind kind, const OrderedSample& sample,
                const Kernel& kernel, double smoothing,
                std::span<const double> grid, const FitOptions& options = {});

std::optional<double> estimate(EstimatorKind kind, const OrderedSample& sample,
                               const Kernel& kernel, double smoothing, double t,
                               const FitOptions& options = {});

/// f''(t) kappa_2 h^2 / 2.
double theoretical_interior_bias(double second_derivative, const Kernel& kernel,
                                 double h);

enum class VarianceComparison { ulc_plain_vs_nw, ulc_voronoi_vs_nw, nw_vs_nw };

/// Asymptotic variance ratio against Nadaraya-Watson for an i.i.d. design.
double theoretical_variance_ratio(VarianceComparison pair);

/// Serial brute-force implementations kept as test oracles and as the
/// baseline for benchmarks. They scan every design point and solve the
/// weighted normal equations directly.
namespace reference {

LocalWeights local_weights(const OrderedSample& sample, const Kernel& kernel,
                           double h, double t, SpacingKind spacing);

FittedCurve fit(EstimatorKind kind, const OrderedSample& sample,
                const Kernel& kernel, double smoothing,
                std::span<const double> grid, const FitOptions& options = {});

}  // namespace reference

}  // namespace ullreg
