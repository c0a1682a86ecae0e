// Wall-clock comparison of the serial reference implementations against the
// windowed, OpenMP-parallel ones.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

#include "CLI11.hpp"
#include "ullreg/bandwidth.hpp"
#include "ullreg/scenario.hpp"
#include "ullreg/study.hpp"

using namespace ullreg;

namespace {

double seconds(const std::function<void()>& body, int repeats) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    body();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reference vs parallel timings"};
  std::size_t n = 5000;
  std::size_t points = 1001;
  int repeats = 3;
  int threads = 0;
  app.add_option("--n", n, "Sample size");
  app.add_option("--points", points, "Evaluation grid size");
  app.add_option("--repeats", repeats, "Timing repeats (best is reported)");
  app.add_option("--threads", threads, "Threads for the parallel path (0 = all)");
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);

  Scenario scn = preset_scenario("example2");
  scn.n = n;
  const auto sample = prepare_sample(gen_sample(scn, 1, 0));
  const auto grid = uniform_grid(0, 10, points);
  const Kernel kernel;
  const double h = 0.3;

  std::printf("n=%zu points=%zu threads=%d\n", n, points, omp_get_max_threads());
  std::printf("%-10s %-8s %12s %12s %9s\n", "estimator", "task", "reference_s", "parallel_s", "speedup");
  for (EstimatorKind kind : {EstimatorKind::ull, EstimatorKind::ulc, EstimatorKind::nw, EstimatorKind::loess1}) {
    const double smoothing = kind == EstimatorKind::loess1 ? 0.05 : h;
    const double ref = seconds([&] { reference::fit(kind, sample, kernel, smoothing, grid); }, repeats);
    const double par = seconds([&] { fit(kind, sample, kernel, smoothing, grid); }, repeats);
    std::printf("%-10s %-8s %12.4f %12.4f %9.1f\n", std::string(to_string(kind)).c_str(), "fit", ref, par, ref / par);

    const auto candidates = kind == EstimatorKind::loess1 ? default_span_grid(10) : default_h_grid(sample, {.count = 10});
    const auto plan = make_cv_plan(sample.size(), 10, candidates, 7);
    const double cref = seconds([&] { reference::cross_validate(sample, kernel, kind, plan); }, 1);
    const double cpar = seconds([&] { cross_validate(sample, kernel, kind, plan); }, 1);
    std::printf("%-10s %-8s %12.4f %12.4f %9.1f\n", std::string(to_string(kind)).c_str(), "cv", cref, cpar, cref / cpar);
  }
  return 0;
}
