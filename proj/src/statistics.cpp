#include "ullreg/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ullreg {

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

Summary summarize(std::span<const double> values) {
  return {quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75)};
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x,
                                    std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("wilcoxon needs paired samples of equal length");
  }
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != y[i]) d.push_back(x[i] - y[i]);
  }
  WilcoxonResult r;
  r.effective_m = d.size();
  if (d.empty()) return r;

  const std::size_t m = d.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(d[a]) < std::abs(d[b]);
  });
  std::vector<double> rank(m);
  double tie_term = 0.0;
  for (std::size_t k = 0; k < m;) {
    std::size_t end = k + 1;
    while (end < m && std::abs(d[order[end]]) == std::abs(d[order[k]])) ++end;
    const double avg = 0.5 * static_cast<double>(k + 1 + end);
    for (std::size_t q = k; q < end; ++q) rank[order[q]] = avg;
    const double t = static_cast<double>(end - k);
    tie_term += t * t * t - t;
    k = end;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (d[i] > 0) r.statistic += rank[i];
  }

  if (m < 10) {
    // Enumerate all 2^m sign patterns over the (possibly tied) ranks.
    r.exact = true;
    const std::size_t patterns = std::size_t{1} << m;
    const double eps = 1e-9;
    std::size_t le = 0;
    std::size_t ge = 0;
    for (std::size_t mask = 0; mask < patterns; ++mask) {
      double v = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (mask >> i & 1U) v += rank[i];
      }
      if (v <= r.statistic + eps) ++le;
      if (v >= r.statistic - eps) ++ge;
    }
    const double pl = static_cast<double>(le) / static_cast<double>(patterns);
    const double pg = static_cast<double>(ge) / static_cast<double>(patterns);
    r.p_value = std::min(1.0, 2.0 * std::min(pl, pg));
    return r;
  }

  const double md = static_cast<double>(m);
  const double mean = md * (md + 1.0) / 4.0;
  const double var = md * (md + 1.0) * (2.0 * md + 1.0) / 24.0 - tie_term / 48.0;
  const double diff = r.statistic - mean;
  if (var <= 0.0) return r;
  const double correction = diff > 0 ? 0.5 : (diff < 0 ? -0.5 : 0.0);
  const double zscore = (diff - correction) / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(std::abs(zscore) / std::sqrt(2.0)));
  return r;
}

}  // namespace ullreg
