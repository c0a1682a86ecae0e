#pragma once

#include <cstddef>
#include <span>

namespace ullreg {

/// Median and quartiles (linear interpolation between order statistics).
struct Summary {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Quantile with linear interpolation at position p (n - 1), p in [0,1].
double quantile(std::span<const double> values, double p);

Summary summarize(std::span<const double> values);

struct WilcoxonResult {
  /// Sum of the ranks of positive differences x - y.
  double statistic = 0.0;
  double p_value = 1.0;
  /// Number of non-zero differences.
  std::size_t effective_m = 0;
  bool exact = false;
};

/// Paired two-sided Wilcoxon signed-rank test. Zero differences are
/// dropped and ties receive average ranks. Fewer than 10 non-zero
/// differences use the exact distribution over all sign patterns; otherwise
/// the normal approximation with tie-corrected variance and continuity
/// correction. All-zero differences give p = 1.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x,
                                    std::span<const double> y);

}  // namespace ullreg
