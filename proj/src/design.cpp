#include "ullreg/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ullreg {

OrderedSample::OrderedSample(std::vector<double> z_sorted,
                             std::vector<double> x, Domain domain,
                             bool allow_ties)
    : z_(std::move(z_sorted)), x_(std::move(x)), domain_(domain) {
  if (!(std::isfinite(domain_.lo) && std::isfinite(domain_.hi) &&
        domain_.lo < domain_.hi)) {
    throw std::invalid_argument("domain must be a finite interval a < b");
  }
  if (z_.size() != x_.size()) {
    throw std::invalid_argument("z and x must have equal length");
  }
  if (z_.size() < 2) {
    throw std::invalid_argument("at least two distinct design points required");
  }
  const std::size_t n = z_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!domain_.contains(z_[i])) {
      throw std::invalid_argument("design point outside the domain");
    }
    if (i > 0 && (allow_ties ? z_[i] < z_[i - 1] : z_[i] <= z_[i - 1])) {
      throw std::invalid_argument("design points must be sorted ascending");
    }
  }
  if (z_.front() == z_.back()) {
    throw std::invalid_argument("at least two distinct design points required");
  }

  delta_.resize(n + 1);
  delta_[0] = z_[0] - domain_.lo;
  for (std::size_t i = 1; i < n; ++i) delta_[i] = z_[i] - z_[i - 1];
  delta_[n] = domain_.hi - z_[n - 1];
  delta_max_ = *std::max_element(delta_.begin(), delta_.end());

  voronoi_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    voronoi_[i] = 0.5 * (delta_[i] + delta_[i + 1]);
  }
  voronoi_.front() += 0.5 * delta_[0];
  voronoi_.back() += 0.5 * delta_[n];
}

OrderedSample OrderedSample::with_responses(std::vector<double> x) const {
  if (x.size() != x_.size()) {
    throw std::invalid_argument("response vector has the wrong length");
  }
  OrderedSample copy = *this;
  copy.x_ = std::move(x);
  return copy;
}

OrderedSample OrderedSample::subset(
    std::span<const std::size_t> sorted_indices) const {
  std::vector<double> z;
  std::vector<double> x;
  z.reserve(sorted_indices.size());
  x.reserve(sorted_indices.size());
  for (std::size_t i : sorted_indices) {
    z.push_back(z_.at(i));
    x.push_back(x_[i]);
  }
  return OrderedSample(std::move(z), std::move(x), domain_, true);
}

OrderedSample prepare_sample(const RawSample& raw, bool merge_ties) {
  if (raw.z.size() != raw.x.size()) {
    throw std::invalid_argument("z and x must have equal length");
  }
  for (double z : raw.z) {
    if (!std::isfinite(z) || !raw.domain.contains(z)) {
      throw std::invalid_argument("design point outside the domain");
    }
  }
  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return raw.z[a] < raw.z[b];
  });

  std::vector<double> z;
  std::vector<double> x;
  z.reserve(order.size());
  x.reserve(order.size());
  for (std::size_t k = 0; k < order.size();) {
    const double zk = raw.z[order[k]];
    std::size_t end = k + 1;
    if (merge_ties) {
      while (end < order.size() && raw.z[order[end]] == zk) ++end;
    }
    double sum = 0.0;
    for (std::size_t m = k; m < end; ++m) sum += raw.x[order[m]];
    z.push_back(zk);
    x.push_back(sum / static_cast<double>(end - k));
    k = end;
  }
  return OrderedSample(std::move(z), std::move(x), raw.domain, !merge_ties);
}

}  // namespace ullreg
