#include "ullreg/functional.hpp"

#include <exception>
#include <stdexcept>

namespace ullreg {

namespace {

void require_copies(const TrajectoryBatch& batch) {
  if (batch.copies.empty()) {
    throw std::invalid_argument("trajectory batch has no copies");
  }
}

MeanCurve average(const std::vector<FittedCurve>& fits,
                  std::span<const double> grid, double h) {
  MeanCurve mean;
  mean.grid.assign(grid.begin(), grid.end());
  mean.values.assign(grid.size(), 0.0);
  mean.counts.assign(grid.size(), 0);
  mean.h = h;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& fit : fits) {
      if (fit.valid[g]) {
        sum += fit.values[g];
        ++count;
      }
    }
    mean.counts[g] = count;
    mean.values[g] = count > 0 ? sum / static_cast<double>(count) : 0.0;
  }
  return mean;
}

Surface moment(const std::vector<FittedCurve>& fits1,
               const std::vector<FittedCurve>& fits2,
               std::span<const double> grid1, std::span<const double> grid2) {
  Surface s;
  s.grid1.assign(grid1.begin(), grid1.end());
  s.grid2.assign(grid2.begin(), grid2.end());
  s.values.assign(grid1.size() * grid2.size(), 0.0);
  s.counts.assign(grid1.size() * grid2.size(), 0);
  const auto rows = static_cast<std::ptrdiff_t>(grid1.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < grid2.size(); ++j) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t c = 0; c < fits1.size(); ++c) {
        if (fits1[c].valid[i] && fits2[c].valid[j]) {
          sum += fits1[c].values[i] * fits2[c].values[j];
          ++count;
        }
      }
      const std::size_t cell = static_cast<std::size_t>(i) * grid2.size() + j;
      s.counts[cell] = count;
      s.values[cell] = count > 0 ? sum / static_cast<double>(count) : 0.0;
    }
  }
  return s;
}

}  // namespace

std::vector<FittedCurve> fit_copies(const TrajectoryBatch& batch,
                                    const Kernel& kernel, double h,
                                    std::span<const double> grid,
                                    const FunctionalOptions& options) {
  require_copies(batch);
  const auto n = static_cast<std::ptrdiff_t>(batch.copies.size());
  std::vector<FittedCurve> fits(batch.copies.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < n; ++c) {
    try {
      RawSample raw = batch.copies[c];
      raw.domain = batch.domain;
      fits[c] = fit(options.estimator, prepare_sample(raw), kernel, h, grid,
                    options.fit);
    } catch (...) {
#pragma omp critical(ullreg_fit_copies)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return fits;
}

MeanCurve mean_function(const TrajectoryBatch& batch, const Kernel& kernel,
                        double h, std::span<const double> grid,
                        const FunctionalOptions& options) {
  return average(fit_copies(batch, kernel, h, grid, options), grid, h);
}

Surface second_moment_surface(const TrajectoryBatch& batch, const Kernel& kernel,
                              double h, std::span<const double> grid1,
                              std::span<const double> grid2,
                              const FunctionalOptions& options) {
  const auto fits1 = fit_copies(batch, kernel, h, grid1, options);
  const auto fits2 = fit_copies(batch, kernel, h, grid2, options);
  return moment(fits1, fits2, grid1, grid2);
}

Surface covariance_surface(const TrajectoryBatch& batch, const Kernel& kernel,
                           double h, std::span<const double> grid,
                           const FunctionalOptions& options) {
  const auto fits = fit_copies(batch, kernel, h, grid, options);
  const MeanCurve mean = average(fits, grid, h);
  Surface s = moment(fits, fits, grid, grid);
  const std::size_t m = grid.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t cell = i * m + j;
      if (s.counts[cell] == 0 || !mean.valid(i) || !mean.valid(j)) {
        s.values[cell] = 0.0;
        s.counts[cell] = 0;
        continue;
      }
      s.values[cell] -= mean.values[i] * mean.values[j];
    }
    if (s.values[i * m + i] < 0.0) {
      s.values[i * m + i] = 0.0;
      ++s.clamped;
    }
  }
  return s;
}

}  // namespace ullreg
