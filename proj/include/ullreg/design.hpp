#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ullreg {

struct Domain {
  double lo = 0.0;
  double hi = 1.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double z) const noexcept { return z >= lo && z <= hi; }
};

/// Observations (z_i, x_i) on a declared interval, in arbitrary order.
struct RawSample {
  std::vector<double> z;
  std::vector<double> x;
  Domain domain;

  std::size_t size() const noexcept { return z.size(); }
};

enum class SpacingKind { plain, voronoi };

/// Sorted design with concomitant responses and spacings.
///
/// For n points z_1 < ... < z_n on [a,b] the plain spacings are
/// delta[i] = z_i - z_{i-1} (i = 0..n, with z_0 := a and z_{n+1} := b), so
/// the spacing attached to point i is delta[i] and delta has n+1 entries.
/// Voronoi spacings assign each point the length of its Voronoi cell,
/// with the outer cells extended to the domain endpoints.
class OrderedSample {
 public:
  /// Builds from data already sorted ascending (strictly, unless ties are
  /// explicitly allowed). Throws std::invalid_argument on violations.
  OrderedSample(std::vector<double> z_sorted, std::vector<double> x,
                Domain domain, bool allow_ties = false);

  std::size_t size() const noexcept { return z_.size(); }
  std::span<const double> z() const noexcept { return z_; }
  std::span<const double> x() const noexcept { return x_; }
  const Domain& domain() const noexcept { return domain_; }

  /// All n+1 plain spacings, including the right boundary gap.
  std::span<const double> delta() const noexcept { return delta_; }
  std::span<const double> delta_voronoi() const noexcept { return voronoi_; }

  /// Per-point weights of length n for the requested partition.
  std::span<const double> cell_weights(SpacingKind kind) const noexcept {
    return kind == SpacingKind::plain
               ? std::span<const double>(delta_).first(z_.size())
               : std::span<const double>(voronoi_);
  }

  double max_spacing() const noexcept { return delta_max_; }
  double min_z() const noexcept { return z_.front(); }
  double max_z() const noexcept { return z_.back(); }

  /// Same design, new responses.
  OrderedSample with_responses(std::vector<double> x) const;

  /// Subsample by ascending point indices; spacings are recomputed.
  OrderedSample subset(std::span<const std::size_t> sorted_indices) const;

 private:
  std::vector<double> z_;
  std::vector<double> x_;
  Domain domain_;
  std::vector<double> delta_;
  std::vector<double> voronoi_;
  double delta_max_ = 0.0;
};

/// Sorts the sample and, unless merge_ties is false, replaces observations
/// sharing an identical z by a single point carrying their mean response.
/// Throws std::invalid_argument for fewer than two distinct design points,
/// mismatched lengths, or points outside the domain.
OrderedSample prepare_sample(const RawSample& raw, bool merge_ties = true);

inline double max_spacing(const OrderedSample& sample) noexcept {
  return sample.max_spacing();
}

}  // namespace ullreg
