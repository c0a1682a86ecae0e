#include "ullreg/study.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "ullreg/random.hpp"

namespace ullreg {

namespace {

std::vector<double> smoothing_grid(EstimatorKind kind, const OrderedSample& sample,
                                   const StudyConfig& config) {
  if (kind == EstimatorKind::loess1) return default_span_grid(config.span_count);
  return default_h_grid(sample, config.h_bounds);
}

std::uint64_t hash_indices(std::uint64_t h, std::span<const std::size_t> idx) {
  for (std::size_t v : idx) h = mix64(h ^ static_cast<std::uint64_t>(v));
  return h;
}

std::uint64_t hash_folds(std::uint64_t h, std::span<const int> folds) {
  for (int f : folds) h = mix64(h ^ static_cast<std::uint64_t>(f));
  return h;
}

struct ReplicationOutcome {
  std::vector<double> max_error;
  std::vector<std::uint8_t> complete;
  std::vector<double> mse;
  std::vector<double> h_full;
  std::vector<double> h_train;
  std::uint64_t hash = 0;
};

std::vector<double> metric_grid(const Scenario& scenario, const OrderedSample& sample,
                                std::size_t points) {
  if (scenario.metric_on_design_range) {
    return uniform_grid(sample.min_z(), sample.max_z(), points);
  }
  return uniform_grid(scenario.domain.lo, scenario.domain.hi, points);
}

ReplicationOutcome run_replication(const Scenario& scenario, const StudyConfig& config,
                                   const Kernel& kernel, std::uint64_t r) {
  const OrderedSample sample =
      prepare_sample(gen_sample(scenario, config.base_seed, r), config.merge_ties);
  const std::uint64_t split_key = derive(config.base_seed, r, StreamRole::split);
  const std::uint64_t full_key = derive(config.base_seed, r, StreamRole::folds_full);
  const std::uint64_t train_key = derive(config.base_seed, r, StreamRole::folds_train);

  ReplicationOutcome out;
  const std::size_t k = config.estimators.size();
  out.max_error.assign(k, 0.0);
  out.complete.assign(k, 1);
  out.mse.assign(k, 0.0);
  out.h_full.assign(k, 0.0);
  out.h_train.assign(k, 0.0);

  std::uint64_t hash = mix64(r);
  if (config.max_error) {
    const CvPlan plan = make_cv_plan(sample.size(), config.folds, {1.0}, full_key);
    hash = hash_folds(hash, plan.fold_of);
    const std::vector<double> grid = metric_grid(scenario, sample, config.metric_points);
    for (std::size_t e = 0; e < k; ++e) {
      const EstimatorKind kind = config.estimators[e];
      CvPlan p = plan;
      p.grid = smoothing_grid(kind, sample, config);
      const CvResult cv = cross_validate(sample, kernel, kind, p, config.fit);
      const FittedCurve curve = fit(kind, sample, kernel, cv.best, grid, config.fit);
      const MaxError m = max_error(curve, scenario.target);
      out.max_error[e] = m.value;
      out.complete[e] = m.complete ? 1 : 0;
      out.h_full[e] = cv.best;
    }
  }
  if (config.holdout_mse) {
    const HoldoutSplit split = make_split(sample.size(), config.train_fraction, split_key);
    hash = hash_indices(hash, split.train);
    const CvPlan plan = make_cv_plan(split.train.size(), config.folds, {1.0}, train_key);
    hash = hash_folds(hash, plan.fold_of);
    for (std::size_t e = 0; e < k; ++e) {
      const HoldoutResult res =
          holdout_mse(sample, config.estimators[e], split_key, train_key, config);
      out.mse[e] = res.mse;
      out.h_train[e] = res.smoothing;
    }
  }
  out.hash = hash;
  return out;
}

}  // namespace

std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  if (points < 2 || !(hi > lo)) {
    throw std::invalid_argument("uniform grid needs lo < hi and at least two points");
  }
  std::vector<double> g(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = lo + step * static_cast<double>(i);
  g.back() = hi;
  return g;
}

MaxError max_error(const FittedCurve& curve, const std::function<double(double)>& f) {
  MaxError m;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (!curve.valid[i]) {
      m.complete = false;
      continue;
    }
    ++valid;
    m.value = std::max(m.value, std::abs(curve.values[i] - f(curve.grid[i])));
  }
  if (valid == 0) throw UndefinedMetric("no valid grid point for the max error");
  return m;
}

MaxError max_error(const FittedCurve& curve, TargetId target) {
  return max_error(curve, [target](double z) { return target_value(target, z); });
}

double empirical_modulus(const std::function<double(double)>& f, double h,
                         std::span<const double> grid) {
  if (!(h > 0.0)) throw std::invalid_argument("modulus needs h > 0");
  std::vector<double> g(grid.begin(), grid.end());
  std::sort(g.begin(), g.end());
  std::vector<double> fv(g.size());
  std::transform(g.begin(), g.end(), fv.begin(), f);
  double best = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size() && g[j] - g[i] <= h; ++j) {
      best = std::max(best, std::abs(fv[j] - fv[i]));
    }
  }
  return best;
}

double empirical_modulus(TargetId target, double h, std::span<const double> grid) {
  return empirical_modulus([target](double z) { return target_value(target, z); }, h,
                           grid);
}

HoldoutSplit make_split(std::size_t n, double train_fraction, std::uint64_t key) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie in (0,1)");
  }
  auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 2, n > 0 ? n - 1 : 0);
  if (n < 3 || n_train < 2) throw std::invalid_argument("sample too small to split");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  CounterRng rng(key);
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
    std::swap(perm[i], perm[std::min(j, i)]);
  }
  HoldoutSplit s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.validation.begin(), s.validation.end());
  return s;
}

HoldoutResult holdout_mse(const OrderedSample& sample, EstimatorKind kind,
                          std::uint64_t split_key, std::uint64_t fold_key,
                          const StudyConfig& config) {
  const Kernel kernel(config.kernel);
  const HoldoutSplit split = make_split(sample.size(), config.train_fraction, split_key);
  const OrderedSample train = sample.subset(split.train);

  CvPlan plan = make_cv_plan(train.size(), config.folds,
                             smoothing_grid(kind, train, config), fold_key);
  const CvResult cv = cross_validate(train, kernel, kind, plan, config.fit);

  std::vector<double> at(split.validation.size());
  for (std::size_t i = 0; i < at.size(); ++i) at[i] = sample.z()[split.validation[i]];
  const FittedCurve curve = fit(kind, train, kernel, cv.best, at, config.fit);

  const auto xt = train.x();
  const double fallback =
      std::accumulate(xt.begin(), xt.end(), 0.0) / static_cast<double>(xt.size());
  double sse = 0.0;
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double x = sample.x()[split.validation[i]];
    const double pred = curve.valid[i] ? curve.values[i] : fallback;
    sse += (pred - x) * (pred - x);
  }
  return {sse / static_cast<double>(at.size()), cv.best};
}

double mse_holdout(const Scenario& scenario, EstimatorKind kind, std::uint64_t seed,
                   const StudyConfig& config) {
  const OrderedSample sample =
      prepare_sample(gen_sample(scenario, seed, 0), config.merge_ties);
  return holdout_mse(sample, kind, derive(seed, 0, StreamRole::split),
                     derive(seed, 0, StreamRole::folds_train), config)
      .mse;
}

const EstimatorMetrics& ReplicationReport::metrics(EstimatorKind kind) const {
  for (const auto& m : estimators) {
    if (m.kind == kind) return m;
  }
  throw std::out_of_range("estimator not part of the report");
}

ReplicationReport run_study(const Scenario& scenario, const StudyConfig& config) {
  validate(scenario);
  if (config.replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (config.estimators.empty()) throw std::invalid_argument("no estimators requested");
  const Kernel kernel(config.kernel);

  const std::size_t reps = config.replications;
  std::vector<ReplicationOutcome> outcomes(reps);
  std::vector<std::exception_ptr> errors(reps);
  const auto nreps = static_cast<std::ptrdiff_t>(reps);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t r = 0; r < nreps; ++r) {
    try {
      outcomes[r] = run_replication(scenario, config, kernel, static_cast<std::uint64_t>(r));
    } catch (...) {
      errors[r] = std::current_exception();
    }
  }
  // Report the failure of the lowest replication so errors are deterministic too.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ReplicationReport report;
  report.scenario_id = scenario.id;
  report.config = config;
  for (std::size_t e = 0; e < config.estimators.size(); ++e) {
    EstimatorMetrics m;
    m.kind = config.estimators[e];
    for (const auto& o : outcomes) {
      m.max_error.push_back(o.max_error[e]);
      m.max_error_complete.push_back(o.complete[e]);
      m.holdout_mse.push_back(o.mse[e]);
      m.h_full.push_back(o.h_full[e]);
      m.h_train.push_back(o.h_train[e]);
    }
    if (config.max_error) m.max_error_summary = summarize(m.max_error);
    if (config.holdout_mse) m.holdout_mse_summary = summarize(m.holdout_mse);
    report.estimators.push_back(std::move(m));
  }
  for (const auto& o : outcomes) report.partition_hash.push_back(o.hash);

  const auto has = [&](EstimatorKind k) {
    return std::find(config.estimators.begin(), config.estimators.end(), k) !=
           config.estimators.end();
  };
  if (has(config.wilcoxon_first) && has(config.wilcoxon_second)) {
    const auto& a = report.metrics(config.wilcoxon_first);
    const auto& b = report.metrics(config.wilcoxon_second);
    if (config.max_error) {
      report.wilcoxon_max_error = wilcoxon_signed_rank(a.max_error, b.max_error);
    }
    if (config.holdout_mse) {
      report.wilcoxon_holdout_mse = wilcoxon_signed_rank(a.holdout_mse, b.holdout_mse);
    }
  }
  return report;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_replications_csv(std::ostream& out, const ReplicationReport& report) {
  out << "replication,estimator,metric,value\n";
  const std::size_t reps = report.partition_hash.size();
  for (std::size_t r = 0; r < reps; ++r) {
    for (const auto& m : report.estimators) {
      const auto name = to_string(m.kind);
      if (report.config.max_error) {
        out << r << ',' << name << ",max_error," << format_double(m.max_error[r]) << '\n';
        out << r << ',' << name << ",max_error_complete,"
            << static_cast<int>(m.max_error_complete[r]) << '\n';
        out << r << ',' << name << ",h_full," << format_double(m.h_full[r]) << '\n';
      }
      if (report.config.holdout_mse) {
        out << r << ',' << name << ",holdout_mse," << format_double(m.holdout_mse[r])
            << '\n';
        out << r << ',' << name << ",h_train," << format_double(m.h_train[r]) << '\n';
      }
    }
  }
}

namespace {

nlohmann::ordered_json summary_to_json(const Summary& s) {
  return {{"median", s.median}, {"q1", s.q1}, {"q3", s.q3}};
}

nlohmann::ordered_json wilcoxon_to_json(const WilcoxonResult& w) {
  return {{"statistic", w.statistic},
          {"p_value", w.p_value},
          {"effective_m", w.effective_m},
          {"exact", w.exact}};
}

}  // namespace

std::string summary_json(const ReplicationReport& report) {
  nlohmann::ordered_json j;
  j["scenario"] = report.scenario_id;
  j["replications"] = report.partition_hash.size();
  j["base_seed"] = report.config.base_seed;
  auto& est = j["estimators"];
  est = nlohmann::ordered_json::object();
  for (const auto& m : report.estimators) {
    nlohmann::ordered_json e = nlohmann::ordered_json::object();
    if (m.max_error_summary) {
      e["max_error"] = summary_to_json(*m.max_error_summary);
      e["max_error_incomplete"] =
          std::count(m.max_error_complete.begin(), m.max_error_complete.end(), 0);
    }
    if (m.holdout_mse_summary) e["holdout_mse"] = summary_to_json(*m.holdout_mse_summary);
    est[std::string(to_string(m.kind))] = e;
  }
  if (report.wilcoxon_max_error || report.wilcoxon_holdout_mse) {
    auto& w = j["wilcoxon"];
    w["first"] = to_string(report.config.wilcoxon_first);
    w["second"] = to_string(report.config.wilcoxon_second);
    if (report.wilcoxon_max_error) w["max_error"] = wilcoxon_to_json(*report.wilcoxon_max_error);
    if (report.wilcoxon_holdout_mse) {
      w["holdout_mse"] = wilcoxon_to_json(*report.wilcoxon_holdout_mse);
    }
  }
  std::uint64_t h = 0;
  for (std::uint64_t v : report.partition_hash) h = mix64(h ^ v);
  j["partition_digest"] = h;
  return j.dump(2) + "\n";
}

}  // namespace ullreg
