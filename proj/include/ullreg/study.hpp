#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ullreg/bandwidth.hpp"
#include "ullreg/estimators.hpp"
#include "ullreg/kernels.hpp"
#include "ullreg/scenario.hpp"
#include "ullreg/statistics.hpp"

namespace ullreg {

class UndefinedMetric : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MaxError {
  double value = 0.0;
  /// False when some grid points had no valid estimate.
  bool complete = true;
};

/// `points` equally spaced values from lo to hi inclusive.
std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

/// max_j |curve(t_j) - f(t_j)| over valid grid points. Throws
/// UndefinedMetric when no point is valid.
MaxError max_error(const FittedCurve& curve, const std::function<double(double)>& f);
MaxError max_error(const FittedCurve& curve, TargetId target);

/// max |f(u) - f(v)| over grid pairs with |u - v| <= h.
double empirical_modulus(const std::function<double(double)>& f, double h,
                         std::span<const double> grid);
double empirical_modulus(TargetId target, double h, std::span<const double> grid);

/// Protocol shared by every replication of a study.
struct StudyConfig {
  std::vector<EstimatorKind> estimators{EstimatorKind::ull, EstimatorKind::ulc,
                                        EstimatorKind::nw, EstimatorKind::loess1};
  std::size_t replications = 100;
  std::uint64_t base_seed = 1;
  KernelId kernel = KernelId::tricube;
  FitOptions fit;
  int folds = 10;
  GridBounds h_bounds;
  int span_count = 20;
  double train_fraction = 0.8;
  std::size_t metric_points = 1001;
  bool max_error = true;
  bool holdout_mse = true;
  /// Replace tied design points by one point with their mean response.
  bool merge_ties = true;
  /// Pair compared by the paired Wilcoxon test, when both are present.
  EstimatorKind wilcoxon_first = EstimatorKind::ull;
  EstimatorKind wilcoxon_second = EstimatorKind::loess1;
};

struct EstimatorMetrics {
  EstimatorKind kind = EstimatorKind::ull;
  std::vector<double> max_error;
  std::vector<std::uint8_t> max_error_complete;
  std::vector<double> holdout_mse;
  /// Smoothing chosen by CV for the max-error and hold-out pipelines.
  std::vector<double> h_full;
  std::vector<double> h_train;
  std::optional<Summary> max_error_summary;
  std::optional<Summary> holdout_mse_summary;
};

struct ReplicationReport {
  std::string scenario_id;
  StudyConfig config;
  std::vector<EstimatorMetrics> estimators;
  /// Hash of the split and fold assignments of each replication; shared by
  /// every estimator by construction.
  std::vector<std::uint64_t> partition_hash;
  std::optional<WilcoxonResult> wilcoxon_max_error;
  std::optional<WilcoxonResult> wilcoxon_holdout_mse;

  const EstimatorMetrics& metrics(EstimatorKind kind) const;
};

/// Sorted training and validation indices of a seeded random split.
struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

HoldoutSplit make_split(std::size_t n, double train_fraction, std::uint64_t key);

struct HoldoutResult {
  double mse = 0.0;
  double smoothing = 0.0;
};

/// Split with `split_key`, cross-validate on the training part with folds
/// from `fold_key`, fit on the training part and score on the validation
/// part. Invalid predictions cost the squared error of the training mean.
HoldoutResult holdout_mse(const OrderedSample& sample, EstimatorKind kind,
                          std::uint64_t split_key, std::uint64_t fold_key,
                          const StudyConfig& config = {});

/// Hold-out MSE for replication 0 of a study with base seed `seed`, so
/// run_study with the same seed reports the same number.
double mse_holdout(const Scenario& scenario, EstimatorKind kind, std::uint64_t seed,
                   const StudyConfig& config = {});

/// Runs config.replications replications in parallel. Replication r uses
/// streams derived from (base_seed, r); splits and folds are shared by all
/// estimators. Output is independent of the thread count.
ReplicationReport run_study(const Scenario& scenario, const StudyConfig& config);

/// Long-format CSV: replication,estimator,metric,value.
void write_replications_csv(std::ostream& out, const ReplicationReport& report);

/// JSON summary with quartiles and Wilcoxon results.
std::string summary_json(const ReplicationReport& report);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace ullreg
