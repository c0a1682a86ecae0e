#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ullreg/design.hpp"
#include "ullreg/estimators.hpp"
#include "ullreg/kernels.hpp"

namespace ullreg {

/// Thrown when every CV candidate is invalid everywhere.
class NoValidBandwidth : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when the default candidate range collapses (lo >= hi).
class DegenerateGrid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// `count` geometrically spaced values from lo to hi, endpoints exact.
std::vector<double> log_grid(double lo, double hi, int count);

struct GridBounds {
  double lo_floor = 1e-4;
  double hi = 0.9;
  double spacing_factor = 1.1;
  int count = 20;
  /// Interpret lo_floor and hi as fractions of the domain length.
  bool relative_to_domain = true;
};

/// Bandwidth candidates from max(lo_floor, 1.1 delta_n) to hi on a log grid.
std::vector<double> default_h_grid(const OrderedSample& sample,
                                   const GridBounds& bounds = {});

/// Span candidates for loess1: log_grid(1e-4, 0.9, 20).
std::vector<double> default_span_grid(int count = 20);

/// K-fold plan over the points of a prepared sample.
struct CvPlan {
  int folds = 10;
  std::vector<double> grid;
  std::vector<int> fold_of;
};

/// Seeded permutation of 0..n-1 cut into `folds` contiguous blocks.
/// Deterministic in (n, folds, seed).
CvPlan make_cv_plan(std::size_t n, int folds, std::vector<double> grid,
                    std::uint64_t seed);

struct CvResult {
  double best = 0.0;
  std::vector<double> mse;
};

/// K-fold CV over plan.grid. Held-out points a candidate cannot predict are
/// charged the squared error of the training-fold mean response. Ties go to
/// the smaller candidate. Fold x candidate cells are evaluated in parallel
/// and reduced in a fixed order.
CvResult cross_validate(const OrderedSample& sample, const Kernel& kernel,
                        EstimatorKind kind, const CvPlan& plan,
                        const FitOptions& options = {});

/// Seeded convenience overload: plan from make_cv_plan(sample.size(), ...).
CvResult cross_validate(const OrderedSample& sample, const Kernel& kernel,
                        EstimatorKind kind, std::vector<double> grid, int folds,
                        std::uint64_t seed, const FitOptions& options = {});

/// Root of h * d(h) = sqrt(expected_delta) on (0, upper), bisected to 1e-10.
/// Throws std::domain_error if the bracket has no sign change.
double rate_heuristic_h(const std::function<double(double)>& modulus,
                        double expected_delta, double upper = 1.0);

namespace reference {

/// Straight double loop over candidates and folds, for testing.
CvResult cross_validate(const OrderedSample& sample, const Kernel& kernel,
                        EstimatorKind kind, const CvPlan& plan,
                        const FitOptions& options = {});

}  // namespace reference

}  // namespace ullreg
