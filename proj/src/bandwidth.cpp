#include "ullreg/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ullreg/random.hpp"

namespace ullreg {

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0 && lo < hi && std::isfinite(hi)) || count < 2) {
    throw std::invalid_argument("log_grid needs 0 < lo < hi and count >= 2");
  }
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double step = std::log(hi / lo) / (count - 1);
  for (int k = 0; k < count; ++k) grid[k] = lo * std::exp(step * k);
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

std::vector<double> default_h_grid(const OrderedSample& sample,
                                   const GridBounds& bounds) {
  const double scale = bounds.relative_to_domain ? sample.domain().length() : 1.0;
  const double lo = std::max(bounds.lo_floor * scale,
                             bounds.spacing_factor * sample.max_spacing());
  const double hi = bounds.hi * scale;
  if (!(lo < hi)) {
    throw DegenerateGrid("bandwidth grid collapses: lower end " +
                         std::to_string(lo) + " >= upper end " +
                         std::to_string(hi));
  }
  return log_grid(lo, hi, bounds.count);
}

std::vector<double> default_span_grid(int count) {
  return log_grid(1e-4, 0.9, count);
}

CvPlan make_cv_plan(std::size_t n, int folds, std::vector<double> grid,
                    std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("at least two folds required");
  if (n < static_cast<std::size_t>(folds)) {
    throw std::invalid_argument("fewer observations than folds");
  }
  if (grid.empty()) throw std::invalid_argument("empty candidate grid");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) {
      throw std::invalid_argument("candidate grid must be strictly increasing");
    }
  }
  CvPlan plan;
  plan.folds = folds;
  plan.grid = std::move(grid);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  CounterRng rng(seed);
  // Fisher-Yates with explicit draws so the permutation does not depend on
  // the standard library's distribution algorithms.
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
    std::swap(perm[i], perm[std::min(j, i)]);
  }
  plan.fold_of.assign(n, 0);
  for (int f = 0; f < folds; ++f) {
    const std::size_t begin = n * static_cast<std::size_t>(f) / folds;
    const std::size_t end = n * static_cast<std::size_t>(f + 1) / folds;
    for (std::size_t k = begin; k < end; ++k) plan.fold_of[perm[k]] = f;
  }
  return plan;
}

namespace {

struct FoldData {
  OrderedSample train;
  std::vector<std::size_t> held_out;
  double train_mean;
};

std::vector<FoldData> split_folds(const OrderedSample& sample,
                                  const CvPlan& plan) {
  if (plan.fold_of.size() != sample.size()) {
    throw std::invalid_argument("fold assignment does not match the sample");
  }
  std::vector<FoldData> out;
  out.reserve(static_cast<std::size_t>(plan.folds));
  for (int f = 0; f < plan.folds; ++f) {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      (plan.fold_of[i] == f ? held : train_idx).push_back(i);
    }
    OrderedSample train = sample.subset(train_idx);
    const auto x = train.x();
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) /
                        static_cast<double>(x.size());
    out.push_back({std::move(train), std::move(held), mean});
  }
  return out;
}

// Scores within rounding noise of each other count as ties, so the smaller
// candidate keeps winning when several fit the data exactly.
CvResult pick_best(const std::vector<double>& grid, std::vector<double> sse,
                   const std::vector<std::uint8_t>& any_valid,
                   const OrderedSample& sample) {
  const auto x = sample.x();
  const std::size_t n = sample.size();
  double scale = 0.0;
  for (double v : x) scale += v * v;
  const double floor = 1e-24 * scale / static_cast<double>(n);
  CvResult result;
  result.mse.resize(grid.size());
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    result.mse[c] = sse[c] / static_cast<double>(n);
    if (any_valid[c] && (!found || result.mse[c] < best - 1e-12 * best - floor)) {
      best = result.mse[c];
      result.best = grid[c];
      found = true;
    }
  }
  if (!found) {
    throw NoValidBandwidth("no candidate bandwidth produced a valid prediction");
  }
  return result;
}

}  // namespace

CvResult cross_validate(const OrderedSample& sample, const Kernel& kernel,
                        EstimatorKind kind, const CvPlan& plan,
                        const FitOptions& options) {
  const std::vector<FoldData> folds = split_folds(sample, plan);
  const std::size_t n_cand = plan.grid.size();
  const std::size_t n_cells = folds.size() * n_cand;
  std::vector<double> cell_sse(n_cells, 0.0);
  std::vector<std::uint8_t> cell_valid(n_cells, 0);
  const auto z = sample.z();
  const auto x = sample.x();

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t cell = 0; cell < static_cast<std::ptrdiff_t>(n_cells);
       ++cell) {
    const auto& fold = folds[static_cast<std::size_t>(cell) / n_cand];
    const double s = plan.grid[static_cast<std::size_t>(cell) % n_cand];
    double sse = 0.0;
    std::uint8_t any = 0;
    for (std::size_t i : fold.held_out) {
      const auto pred = estimate(kind, fold.train, kernel, s, z[i], options);
      const double e = (pred ? *pred : fold.train_mean) - x[i];
      any |= pred.has_value();
      sse += e * e;
    }
    cell_sse[cell] = sse;
    cell_valid[cell] = any;
  }

  std::vector<double> sse(n_cand, 0.0);
  std::vector<std::uint8_t> any_valid(n_cand, 0);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (std::size_t c = 0; c < n_cand; ++c) {
      sse[c] += cell_sse[f * n_cand + c];
      any_valid[c] |= cell_valid[f * n_cand + c];
    }
  }
  return pick_best(plan.grid, std::move(sse), any_valid, sample);
}

CvResult cross_validate(const OrderedSample& sample, const Kernel& kernel,
                        EstimatorKind kind, std::vector<double> grid, int folds,
                        std::uint64_t seed, const FitOptions& options) {
  return cross_validate(sample, kernel, kind,
                        make_cv_plan(sample.size(), folds, std::move(grid), seed),
                        options);
}

double rate_heuristic_h(const std::function<double(double)>& modulus,
                        double expected_delta, double upper) {
  if (!(expected_delta > 0.0) || !(upper > 0.0)) {
    throw std::invalid_argument("expected spacing and upper bound must be positive");
  }
  const double target = std::sqrt(expected_delta);
  auto g = [&](double h) { return h * modulus(h) - target; };
  double lo = 0.0;
  double hi = upper;
  if (!(g(hi) > 0.0)) {
    throw std::domain_error("rate equation has no root below the upper bound");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace reference {

CvResult cross_validate(const OrderedSample& sample, const Kernel& kernel,
                        EstimatorKind kind, const CvPlan& plan,
                        const FitOptions& options) {
  const auto z = sample.z();
  const auto x = sample.x();
  std::vector<double> sse(plan.grid.size(), 0.0);
  std::vector<std::uint8_t> any_valid(plan.grid.size(), 0);
  for (std::size_t c = 0; c < plan.grid.size(); ++c) {
    for (int f = 0; f < plan.folds; ++f) {
      std::vector<std::size_t> train_idx;
      std::vector<double> held_z;
      std::vector<double> held_x;
      for (std::size_t i = 0; i < sample.size(); ++i) {
        if (plan.fold_of[i] == f) {
          held_z.push_back(z[i]);
          held_x.push_back(x[i]);
        } else {
          train_idx.push_back(i);
        }
      }
      const OrderedSample train = sample.subset(train_idx);
      double mean = 0.0;
      for (double v : train.x()) mean += v;
      mean /= static_cast<double>(train.size());
      const FittedCurve pred =
          reference::fit(kind, train, kernel, plan.grid[c], held_z, options);
      for (std::size_t k = 0; k < held_z.size(); ++k) {
        const double e = (pred.valid[k] ? pred.values[k] : mean) - held_x[k];
        sse[c] += e * e;
        any_valid[c] |= pred.valid[k];
      }
    }
  }
  return pick_best(plan.grid, std::move(sse), any_valid, sample);
}

}  // namespace reference

}  // namespace ullreg
