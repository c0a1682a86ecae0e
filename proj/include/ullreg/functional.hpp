#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ullreg/design.hpp"
#include "ullreg/estimators.hpp"
#include "ullreg/kernels.hpp"

namespace ullreg {

/// N independent noisy trajectories, each with its own design.
struct TrajectoryBatch {
  std::vector<RawSample> copies;
  Domain domain;
};

struct MeanCurve {
  std::vector<double> grid;
  std::vector<double> values;
  /// Number of copies whose fit was valid at each grid point.
  std::vector<std::size_t> counts;
  double h = 0.0;

  bool valid(std::size_t i) const noexcept { return counts[i] > 0; }
};

/// Row-major grid1 x grid2 surface with per-cell contributing-copy counts.
struct Surface {
  std::vector<double> grid1;
  std::vector<double> grid2;
  std::vector<double> values;
  std::vector<std::size_t> counts;
  /// Diagonal entries that came out negative and were clamped to zero.
  std::size_t clamped = 0;

  double at(std::size_t i, std::size_t j) const noexcept {
    return values[i * grid2.size() + j];
  }
};

struct FunctionalOptions {
  EstimatorKind estimator = EstimatorKind::ull;
  FitOptions fit;
};

/// Fits every copy with one shared h (copies in parallel) and returns the
/// curves in copy order.
std::vector<FittedCurve> fit_copies(const TrajectoryBatch& batch,
                                    const Kernel& kernel, double h,
                                    std::span<const double> grid,
                                    const FunctionalOptions& options = {});

/// Fit-then-average estimate of E f(t); each grid point averages the copies
/// whose fit is valid there.
MeanCurve mean_function(const TrajectoryBatch& batch, const Kernel& kernel,
                        double h, std::span<const double> grid,
                        const FunctionalOptions& options = {});

/// (1/N) sum_j f_j(t1) f_j(t2) over copies valid at both points.
Surface second_moment_surface(const TrajectoryBatch& batch, const Kernel& kernel,
                              double h, std::span<const double> grid1,
                              std::span<const double> grid2,
                              const FunctionalOptions& options = {});

/// Second moment minus the outer product of the mean curve. Negative
/// diagonal entries are clamped to zero and counted in Surface::clamped.
Surface covariance_surface(const TrajectoryBatch& batch, const Kernel& kernel,
                           double h, std::span<const double> grid,
                           const FunctionalOptions& options = {});

}  // namespace ullreg
