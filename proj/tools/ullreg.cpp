// Command-line front end: fit, cv, simulate, meanfn, covfn, sample.

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ullreg/bandwidth.hpp"
#include "ullreg/estimators.hpp"
#include "ullreg/functional.hpp"
#include "ullreg/io.hpp"
#include "ullreg/scenario.hpp"
#include "ullreg/study.hpp"

namespace fs = std::filesystem;
using namespace ullreg;

namespace {

constexpr int kUserError = 2;
constexpr int kNumericalError = 3;

struct Flags {
  std::string input;
  std::string out = "ullreg_out";
  std::string kernel = "tricube";
  std::string estimator = "ull";
  std::string estimators = "ull,ulc,nw,loess1";
  std::string h = "cv";
  std::string span = "cv";
  int folds = 10;
  std::string grid;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string scenario;
  bool no_dedup = false;
  bool indicator = false;
  std::string spacing = "voronoi";
  std::string domain;
  std::size_t points = 0;
  std::size_t replications = 100;
  std::string metric = "both";
  bool absolute_grid = false;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw std::invalid_argument(std::string(what) + ": cannot parse '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::optional<double> parse_smoothing(const std::string& text, const char* what) {
  if (text == "cv") return std::nullopt;
  const auto v = parse_list(text, what);
  if (v.size() != 1 || !(v[0] > 0.0)) {
    throw std::invalid_argument(std::string(what) + " must be 'cv' or a positive number");
  }
  return v[0];
}

std::optional<Domain> parse_domain(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto v = parse_list(text, "--domain");
  if (v.size() != 2 || !(v[0] < v[1])) {
    throw std::invalid_argument("--domain expects lo,hi with lo < hi");
  }
  return Domain{v[0], v[1]};
}

std::vector<EstimatorKind> parse_estimators(const std::string& text) {
  std::vector<EstimatorKind> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_estimator(item));
  if (out.empty()) throw std::invalid_argument("no estimator given");
  return out;
}

std::vector<double> candidate_grid(const Flags& f, const OrderedSample& sample,
                                   EstimatorKind kind) {
  if (!f.grid.empty()) {
    const auto v = parse_list(f.grid, "--grid");
    if (v.size() != 3 || v[2] != static_cast<int>(v[2])) {
      throw std::invalid_argument("--grid expects lo,hi,count");
    }
    return log_grid(v[0], v[1], static_cast<int>(v[2]));
  }
  if (kind == EstimatorKind::loess1) return default_span_grid();
  GridBounds b;
  b.relative_to_domain = !f.absolute_grid;
  return default_h_grid(sample, b);
}

FitOptions fit_options(const Flags& f) {
  FitOptions o;
  o.spacing = parse_spacing(f.spacing);
  o.indicator = f.indicator;
  return o;
}

OrderedSample load_sample(const Flags& f) {
  std::ifstream in(f.input);
  if (!in) throw std::invalid_argument("cannot open input '" + f.input + "'");
  XyData d = read_xy_csv(in);
  RawSample raw;
  raw.domain = resolve_domain(d.z, parse_domain(f.domain));
  raw.z = std::move(d.z);
  raw.x = std::move(d.x);
  return prepare_sample(raw, !f.no_dedup);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

template <class Writer>
void write_with(const fs::path& path, Writer&& w) {
  std::ostringstream ss;
  w(ss);
  write_file(path, ss.str());
}

/// Resolved settings echoed next to the outputs. The thread count is left
/// out because results do not depend on it.
void echo_config(const fs::path& dir, const CLI::App& sub, const Flags& f) {
  const std::string command = sub.get_name();
  nlohmann::ordered_json j;
  j["command"] = command;
  if (!f.input.empty()) j["input"] = f.input;
  if (!f.scenario.empty()) j["scenario"] = f.scenario;
  j["kernel"] = f.kernel;
  j["estimator"] = f.estimator;
  j["h"] = f.h;
  j["span"] = f.span;
  j["folds"] = f.folds;
  j["grid"] = f.grid;
  j["absolute-grid"] = f.absolute_grid;
  j["seed"] = f.seed;
  j["no-dedup"] = f.no_dedup;
  j["indicator"] = f.indicator;
  j["spacing"] = f.spacing;
  j["domain"] = f.domain;
  j["points"] = f.points;
  j["estimators"] = f.estimators;
  j["replications"] = f.replications;
  j["metric"] = f.metric;
  // Keep only flags this command accepts so the file can be fed back via --config.
  for (auto it = j.begin(); it != j.end();) {
    if (it.key() != "command" && sub.get_option_no_throw("--" + it.key()) == nullptr) {
      it = j.erase(it);
    } else {
      ++it;
    }
  }
  write_file(dir / "config.json", j.dump(2) + "\n");
}

fs::path prepare_out(const Flags& f) {
  fs::path dir(f.out);
  fs::create_directories(dir);
  return dir;
}

struct Resolved {
  double smoothing = 0.0;
  bool fixed_loess_h = false;
};

Resolved resolve_smoothing(const Flags& f, const OrderedSample& sample,
                           const Kernel& kernel, EstimatorKind kind) {
  Resolved r;
  if (kind == EstimatorKind::loess1) {
    if (f.h != "cv") {
      r.smoothing = *parse_smoothing(f.h, "--h");
      r.fixed_loess_h = true;
      return r;
    }
    if (const auto s = parse_smoothing(f.span, "--span")) {
      if (*s > 1.0) throw std::invalid_argument("--span must lie in (0,1]");
      r.smoothing = *s;
      return r;
    }
  } else if (const auto h = parse_smoothing(f.h, "--h")) {
    r.smoothing = *h;
    return r;
  }
  r.smoothing = cross_validate(sample, kernel, kind, candidate_grid(f, sample, kind),
                               f.folds, f.seed, fit_options(f))
                    .best;
  return r;
}

std::size_t points_or(const Flags& f, std::size_t fallback) {
  return f.points > 0 ? f.points : fallback;
}

int cmd_fit(const Flags& f, const CLI::App& sub) {
  const Kernel kernel = Kernel::from_name(f.kernel);
  const EstimatorKind kind = parse_estimator(f.estimator);
  const OrderedSample sample = load_sample(f);
  const Resolved r = resolve_smoothing(f, sample, kernel, kind);
  const auto grid =
      uniform_grid(sample.domain().lo, sample.domain().hi, points_or(f, 1001));
  const FittedCurve curve =
      r.fixed_loess_h
          ? fit_loess1(sample, kernel, LoessBandwidth::fixed(r.smoothing), grid)
          : fit(kind, sample, kernel, r.smoothing, grid, fit_options(f));
  const fs::path dir = prepare_out(f);
  write_with(dir / "curve.csv", [&](std::ostream& o) { write_curve_csv(o, curve); });
  echo_config(dir, sub, f);
  std::cout << (kind == EstimatorKind::loess1 && !r.fixed_loess_h ? "span " : "h ")
            << format_double(r.smoothing) << "\ninvalid points " << curve.invalid_count()
            << "\n";
  return 0;
}

int cmd_cv(const Flags& f, const CLI::App& sub) {
  const Kernel kernel = Kernel::from_name(f.kernel);
  const EstimatorKind kind = parse_estimator(f.estimator);
  const OrderedSample sample = load_sample(f);
  const auto grid = candidate_grid(f, sample, kind);
  const CvResult cv = cross_validate(sample, kernel, kind, grid, f.folds, f.seed,
                                     fit_options(f));
  const fs::path dir = prepare_out(f);
  write_with(dir / "cv.csv", [&](std::ostream& o) {
    o << "candidate,cv_mse\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
      o << format_double(grid[k]) << ',' << format_double(cv.mse[k]) << '\n';
    }
  });
  echo_config(dir, sub, f);
  std::cout << "best " << format_double(cv.best) << "\n";
  return 0;
}

int cmd_simulate(const Flags& f, const CLI::App& sub) {
  if (f.scenario.empty()) throw std::invalid_argument("--scenario is required");
  if (f.replications < 1) throw std::invalid_argument("--replications must be >= 1");
  const Scenario scenario = load_scenario(f.scenario);
  StudyConfig cfg;
  cfg.estimators = parse_estimators(f.estimators);
  cfg.replications = f.replications;
  cfg.base_seed = f.seed;
  cfg.kernel = Kernel::from_name(f.kernel).id();
  cfg.fit = fit_options(f);
  cfg.folds = f.folds;
  cfg.h_bounds.relative_to_domain = !f.absolute_grid;
  cfg.metric_points = points_or(f, 1001);
  cfg.merge_ties = !f.no_dedup;
  if (f.metric == "max_error") {
    cfg.holdout_mse = false;
  } else if (f.metric == "holdout_mse") {
    cfg.max_error = false;
  } else if (f.metric != "both") {
    throw std::invalid_argument("--metric must be max_error, holdout_mse or both");
  }
  const ReplicationReport report = run_study(scenario, cfg);
  const fs::path dir = prepare_out(f);
  write_with(dir / "replications.csv",
             [&](std::ostream& o) { write_replications_csv(o, report); });
  const std::string summary = summary_json(report);
  write_file(dir / "summary.json", summary);
  write_file(dir / "scenario.json", scenario_to_json(scenario));
  echo_config(dir, sub, f);
  std::cout << summary;
  return 0;
}

std::pair<TrajectoryBatch, double> load_batch(const Flags& f) {
  std::ifstream in(f.input);
  if (!in) throw std::invalid_argument("cannot open input '" + f.input + "'");
  const auto copies = read_batch_csv(in);
  std::vector<double> all;
  for (const auto& c : copies) all.insert(all.end(), c.z.begin(), c.z.end());
  TrajectoryBatch batch;
  batch.domain = resolve_domain(all, parse_domain(f.domain));
  for (const auto& c : copies) batch.copies.push_back({c.z, c.x, batch.domain});
  const auto h = parse_smoothing(f.h, "--h");
  if (!h) throw std::invalid_argument("--h must be a number for functional commands");
  return {std::move(batch), *h};
}

FunctionalOptions functional_options(const Flags& f) {
  FunctionalOptions o;
  o.estimator = parse_estimator(f.estimator);
  o.fit = fit_options(f);
  return o;
}

int cmd_meanfn(const Flags& f, const CLI::App& sub) {
  const auto [batch, h] = load_batch(f);
  const Kernel kernel = Kernel::from_name(f.kernel);
  const auto grid = uniform_grid(batch.domain.lo, batch.domain.hi, points_or(f, 101));
  const MeanCurve mean = mean_function(batch, kernel, h, grid, functional_options(f));
  const fs::path dir = prepare_out(f);
  write_with(dir / "mean.csv", [&](std::ostream& o) { write_mean_csv(o, mean); });
  echo_config(dir, sub, f);
  std::cout << "copies " << batch.copies.size() << "\n";
  return 0;
}

int cmd_covfn(const Flags& f, const CLI::App& sub) {
  const auto [batch, h] = load_batch(f);
  const Kernel kernel = Kernel::from_name(f.kernel);
  const auto grid = uniform_grid(batch.domain.lo, batch.domain.hi, points_or(f, 51));
  const Surface cov = covariance_surface(batch, kernel, h, grid, functional_options(f));
  const fs::path dir = prepare_out(f);
  write_with(dir / "covariance.csv", [&](std::ostream& o) { write_surface_csv(o, cov); });
  echo_config(dir, sub, f);
  std::cout << "copies " << batch.copies.size() << "\nclamped diagonal " << cov.clamped
            << "\n";
  return 0;
}

int cmd_sample(const Flags& f, const CLI::App& sub) {
  if (f.scenario.empty()) throw std::invalid_argument("--scenario is required");
  const Scenario scenario = load_scenario(f.scenario);
  const RawSample raw = gen_sample(scenario, f.seed, 0);
  const fs::path dir = prepare_out(f);
  write_with(dir / "sample.csv", [&](std::ostream& o) { write_xy_csv(o, raw.z, raw.x); });
  write_file(dir / "scenario.json", scenario_to_json(scenario));
  echo_config(dir, sub, f);
  return 0;
}

/// Turns a JSON object {"flag": value} into "--flag value" tokens placed
/// ahead of the user's own flags, so the command line wins.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  std::vector<std::string> out;
  for (const auto& [key, value] : j.items()) {
    if (key == "command" || key == "config") continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back("--" + key);
      continue;
    }
    out.push_back("--" + key);
    if (value.is_string()) {
      out.push_back(value.get<std::string>());
    } else if (value.is_number_float()) {
      out.push_back(format_double(value.get<double>()));
    } else if (value.is_number()) {
      out.push_back(value.dump());
    } else {
      throw std::invalid_argument("config field '" + key + "' must be a scalar");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  Flags f;
  CLI::App app{"Spacing-weighted local regression: fitting, bandwidth selection, "
               "functional means and simulation studies."};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;

  app.set_help_flag("--help", "Print this help message and exit");
  auto common = [&](CLI::App* sub) {
    // "-h" is taken by the bandwidth flag.
    sub->set_help_flag("--help", "Print this help message and exit");
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("--out", f.out, "Output directory")->capture_default_str();
    sub->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
    sub->add_option("--config", config_path,
                    "JSON file of flag values; explicit flags take precedence");
    sub->add_option("--seed", f.seed, "Seed for folds, splits and simulation")
        ->capture_default_str();
    sub->add_option("--kernel", f.kernel, "tricube | epanechnikov | triangular")
        ->capture_default_str();
  };
  auto fitting = [&](CLI::App* sub, bool several = false) {
    if (several) {
      sub->add_option("--estimators", f.estimators,
                      "Comma-separated list of ull, ulc, nw, loess1")
          ->capture_default_str();
    } else {
      sub->add_option("--estimator", f.estimator, "ull | ulc | nw | loess1")
          ->capture_default_str();
    }
    sub->add_option("--spacing", f.spacing, "plain | voronoi")->capture_default_str();
    sub->add_flag("--indicator", f.indicator,
                  "Zero the ULL curve unless max spacing <= c* h");
    sub->add_flag("--no-dedup", f.no_dedup, "Keep tied design points separate");
    sub->add_option("--domain", f.domain, "lo,hi (default: range of the data)");
  };
  auto selection = [&](CLI::App* sub) {
    sub->add_option("--folds", f.folds, "Cross-validation folds")->capture_default_str();
    sub->add_option("--grid", f.grid, "Candidate log grid lo,hi,count (absolute)");
    sub->add_flag("--absolute-grid", f.absolute_grid,
                  "Default grid bounds 1e-4 and 0.9 as absolute values, not "
                  "fractions of the domain length");
  };

  auto* fit_cmd = app.add_subcommand("fit", "Fit a curve and write curve.csv");
  common(fit_cmd);
  fitting(fit_cmd);
  selection(fit_cmd);
  fit_cmd->add_option("--input", f.input, "CSV with columns z,x")->required();
  fit_cmd->add_option("--h", f.h, "Bandwidth or 'cv'")->capture_default_str();
  fit_cmd->add_option("--span", f.span, "LOESS span in (0,1] or 'cv'")
      ->capture_default_str();
  fit_cmd->add_option("--points", f.points, "Evaluation grid size (default 1001)");

  auto* cv_cmd = app.add_subcommand("cv", "Cross-validate and write cv.csv");
  common(cv_cmd);
  fitting(cv_cmd);
  selection(cv_cmd);
  cv_cmd->add_option("--input", f.input, "CSV with columns z,x")->required();

  auto* sim_cmd = app.add_subcommand("simulate", "Run a replicated simulation study");
  common(sim_cmd);
  fitting(sim_cmd, true);
  selection(sim_cmd);
  sim_cmd->add_option("--scenario", f.scenario, "example1..example5 or a JSON file")
      ->required();
  sim_cmd->add_option("--replications", f.replications, "Number of replications")
      ->capture_default_str();
  sim_cmd->add_option("--metric", f.metric, "max_error | holdout_mse | both")
      ->capture_default_str();
  sim_cmd->add_option("--points", f.points, "Metric grid size (default 1001)");

  auto* mean_cmd = app.add_subcommand("meanfn", "Mean function of a trajectory batch");
  auto* cov_cmd = app.add_subcommand("covfn", "Covariance surface of a trajectory batch");
  for (auto* sub : {mean_cmd, cov_cmd}) {
    common(sub);
    fitting(sub);
    sub->add_option("--input", f.input, "CSV with columns copy_id,z,x")->required();
    sub->add_option("--h", f.h, "Bandwidth")->required();
    sub->add_option("--points", f.points, "Grid size (default 101 mean, 51 covariance)");
  }

  auto* sample_cmd = app.add_subcommand("sample", "Write one simulated sample");
  common(sample_cmd);
  sample_cmd->add_option("--scenario", f.scenario, "example1..example5 or a JSON file")
      ->required();

  // Splice config-file flags in right after the subcommand name.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
      if (path.empty()) continue;
      const auto tokens = config_tokens(path);
      args.insert(args.begin() + (args.empty() ? 0 : 1), tokens.begin(), tokens.end());
      break;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUserError;
  }
  std::reverse(args.begin(), args.end());

  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUserError;
  }

  if (f.threads > 0) omp_set_num_threads(f.threads);
  try {
    if (*fit_cmd) return cmd_fit(f, *fit_cmd);
    if (*cv_cmd) return cmd_cv(f, *cv_cmd);
    if (*sim_cmd) return cmd_simulate(f, *sim_cmd);
    if (*mean_cmd) return cmd_meanfn(f, *mean_cmd);
    if (*cov_cmd) return cmd_covfn(f, *cov_cmd);
    if (*sample_cmd) return cmd_sample(f, *sample_cmd);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUserError;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUserError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  }
  return kUserError;
}
