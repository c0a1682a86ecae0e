#include <omp.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "ullreg/estimators.hpp"

using namespace ullreg;

namespace {

OrderedSample three_points() { return prepare_sample({{0.2, 0.5, 0.8}, {1, 2, 4}, {0, 1}}); }

OrderedSample equidistant(std::size_t n, double a = 0.0, double b = 1.0,
                          const std::function<double(double)>& f = [](double) { return 0.0; }) {
  RawSample raw;
  raw.domain = {a, b};
  for (std::size_t i = 1; i <= n; ++i) {
    const double z = a + (b - a) * static_cast<double>(i) / static_cast<double>(n + 1);
    raw.z.push_back(z);
    raw.x.push_back(f(z));
  }
  return prepare_sample(raw);
}

OrderedSample random_design(std::size_t n, std::uint64_t seed,
                            const std::function<double(double)>& f, double noise = 0.0,
                            double a = 0.0, double b = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(a, b);
  std::normal_distribution<double> e(0.0, noise > 0 ? noise : 1.0);
  RawSample raw;
  raw.domain = {a, b};
  for (std::size_t i = 0; i < n; ++i) {
    const double z = u(gen);
    raw.z.push_back(z);
    raw.x.push_back(f(z) + (noise > 0 ? e(gen) : 0.0));
  }
  return prepare_sample(raw);
}

std::vector<double> lin(double a, double b, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i) / (n - 1.0);
  return g;
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("local weights on three points") {
  const auto s = three_points();
  const Kernel k(KernelId::epanechnikov);
  const double h = 0.5, t = 0.5;
  const std::vector<double> z{0.2, 0.5, 0.8};
  for (SpacingKind kind : {SpacingKind::plain, SpacingKind::voronoi}) {
    const std::vector<double> d = kind == SpacingKind::plain ? std::vector<double>{0.2, 0.3, 0.3}
                                                             : std::vector<double>{0.35, 0.3, 0.35};
    double w[4] = {0, 0, 0, 0};
    for (int i = 0; i < 3; ++i) {
      const double kh = oracle::epanechnikov((t - z[i]) / h) / h;
      for (int j = 0; j < 4; ++j) w[j] += std::pow(t - z[i], j) * kh * d[i];
    }
    const auto lw = local_weights(s, k, h, t, kind);
    for (int j = 0; j < 4; ++j) CHECK(lw.w[j] == doctest::Approx(w[j]).epsilon(1e-13));
    CHECK(lw.denom == doctest::Approx(w[0] * w[2] - w[1] * w[1]).epsilon(1e-12));
    const auto rw = reference::local_weights(s, k, h, t, kind);
    for (int j = 0; j < 4; ++j) CHECK(rw.w[j] == doctest::Approx(w[j]).epsilon(1e-13));
  }
}

TEST_CASE("empty window gives zero weights") {
  const auto s = prepare_sample({{0.1, 0.15}, {1, 2}, {0, 1}});
  const auto lw = local_weights(s, Kernel(), 0.1, 0.9);
  for (double w : lw.w) CHECK(w == 0.0);
  CHECK(lw.denom == 0.0);
  CHECK_THROWS_AS(beta_weights(s, Kernel(), 0.1, 0.9), std::domain_error);
  CHECK_FALSE(estimate_ull(s, Kernel(), 0.1, 0.9, SpacingKind::plain).has_value());
  CHECK_FALSE(estimate_ulc(s, Kernel(), 0.1, 0.9, SpacingKind::plain).has_value());
  CHECK_FALSE(estimate_nw(s, Kernel(), 0.1, 0.9).has_value());
}

TEST_CASE("single point window is singular for the line but fine for constants") {
  const auto s = prepare_sample({{0.1, 0.8}, {1, 2}, {0, 1}});
  CHECK_FALSE(estimate_ull(s, Kernel(), 0.2, 0.15, SpacingKind::plain).has_value());
  CHECK(estimate_ulc(s, Kernel(), 0.2, 0.15, SpacingKind::plain).value() == doctest::Approx(1.0));
  CHECK(estimate_nw(s, Kernel(), 0.2, 0.75).value() == doctest::Approx(2.0));
}

TEST_CASE("interior closed forms on a dense equidistant design") {
  const auto s = equidistant(4999);
  const Kernel k(KernelId::epanechnikov);
  const double h = 0.1;
  const auto lw = local_weights(s, k, h, 0.5, SpacingKind::plain);
  const double bound = 12 * k.lipschitz() * s.max_spacing();
  CHECK(std::abs(lw.w[0] - 1.0) <= bound / h);
  CHECK(std::abs(lw.w[1]) <= bound);
  CHECK(std::abs(lw.w[2] - 0.2 * h * h) <= bound * h);
  CHECK(lw.w[2] == doctest::Approx(0.002).epsilon(1e-3));
}

TEST_CASE("Riemann convergence of local moments") {
  for (KernelId id : {KernelId::tricube, KernelId::epanechnikov, KernelId::triangular}) {
    const Kernel k(id);
    const double h = 0.2;
    for (std::size_t n : {100, 1000, 10000}) {
      const auto s = equidistant(n);
      const double delta = s.max_spacing();
      for (int p = 0; p < 50; ++p) {
        const double t = h + (1 - 2 * h) * p / 49.0;
        const auto lw = local_weights(s, k, h, t, SpacingKind::plain);
        const auto lim = limit_weights(k, h, t, s.domain());
        CHECK(std::abs(lim[0] - 1.0) <= 1e-9);
        CHECK(std::abs(lim[1]) <= 1e-9);
        CHECK(std::abs(lim[2] - k.moments().kappa[2] * h * h) <= 1e-9);
        for (int j = 0; j < 3; ++j) {
          CHECK(std::abs(lw.w[j] - lim[j]) <= 12 * k.lipschitz() * delta * std::pow(h, j - 1));
        }
      }
    }
  }
}

TEST_CASE("limit weights against quadrature near the boundary") {
  const Kernel k(KernelId::tricube);
  const double h = 0.3;
  for (double t : {0.0, 0.1, 0.25, 0.8, 1.0}) {
    const auto lim = limit_weights(k, h, t, {0, 1});
    for (int j = 0; j < 4; ++j) {
      const double q = oracle::simpson(
          [&](double z) { return std::pow(t - z, j) * oracle::tricube((t - z) / h) / h; }, 0, 1,
          200000);
      CHECK(lim[j] == doctest::Approx(q).epsilon(1e-8).scale(1e-12));
    }
  }
}

TEST_CASE("denominator floor when spacings are below c* h") {
  const Kernel k(KernelId::triangular);
  const double h = 0.45;
  const double cstar = k.moments().c_star;
  const double gap = k.moments().kappa[2] - k.moments().kappa[1] * k.moments().kappa[1];
  const std::size_t n = static_cast<std::size_t>(std::ceil(2.0 / (cstar * h)));
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  RawSample raw;
  raw.domain = {0, 1};
  for (std::size_t i = 1; i <= n; ++i) {
    raw.z.push_back((static_cast<double>(i) + jitter(gen)) / (n + 1.0));
    raw.x.push_back(0);
  }
  const auto s = prepare_sample(raw);
  REQUIRE(s.max_spacing() <= cstar * h);
  for (int p = 0; p < 50; ++p) {
    const double t = p / 49.0;
    for (SpacingKind kind : {SpacingKind::plain, SpacingKind::voronoi}) {
      const auto lw = local_weights(s, k, h, t, kind);
      CHECK(lw.denom >= gap * h * h / 8);
      CHECK(lw.w[0] >= 0.25);
    }
  }
}

TEST_CASE("beta identities on randomized cases") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u01(0, 1);
  int checked = 0;
  for (int c = 0; c < 300; ++c) {
    const std::size_t n = 20 + static_cast<std::size_t>(u01(gen) * 400);
    const auto s = random_design(n, gen(), [](double z) { return z; });
    const double h = 0.02 + 0.4 * u01(gen);
    const double t = u01(gen);
    const Kernel k(static_cast<KernelId>(c % 3));
    for (SpacingKind kind : {SpacingKind::plain, SpacingKind::voronoi}) {
      BetaWindow bw;
      try {
        bw = beta_weights(s, k, h, t, kind);
      } catch (const std::domain_error&) {
        continue;
      }
      const auto cw = s.cell_weights(kind);
      double s0 = 0, s1 = 0;
      for (std::size_t i = 0; i < bw.beta.size(); ++i) {
        const std::size_t p = bw.first + i;
        const double kh = k.eval_scaled(h, t - s.z()[p]);
        s0 += bw.beta[i] * kh * cw[p];
        s1 += bw.beta[i] * (t - s.z()[p]) * kh * cw[p];
      }
      CHECK(std::abs(s0 - 1.0) <= 1e-9);
      CHECK(std::abs(s1) <= 1e-9 * h);
      ++checked;
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("symmetric window gives symmetric betas") {
  const auto s = equidistant(99);
  const auto bw = beta_weights(s, Kernel(), 0.105, 0.5, SpacingKind::plain);
  const std::size_t m = bw.beta.size();
  for (std::size_t i = 0; i < m / 2; ++i) {
    CHECK(bw.beta[i] == doctest::Approx(bw.beta[m - 1 - i]).epsilon(1e-9));
  }
}

TEST_CASE("three-point fits against explicit solves") {
  const auto s = three_points();
  const Kernel k(KernelId::epanechnikov);
  const double h = 0.5, t = 0.5;
  const std::vector<double> z{0.2, 0.5, 0.8}, x{1, 2, 4}, d{0.2, 0.3, 0.3};
  std::vector<double> wsp(3), wk(3);
  for (int i = 0; i < 3; ++i) {
    wk[i] = oracle::epanechnikov((t - z[i]) / h) / h;
    wsp[i] = wk[i] * d[i];
  }
  const double grid[] = {t};
  CHECK(fit_ull(s, k, h, grid, {SpacingKind::plain}).values[0] ==
        doctest::Approx(oracle::wls_intercept(z, x, wsp, t)).epsilon(1e-12));
  CHECK(fit_ulc(s, k, h, grid, SpacingKind::plain).values[0] ==
        doctest::Approx(oracle::weighted_mean(x, wsp)).epsilon(1e-12));
  CHECK(fit_nw(s, k, h, grid).values[0] ==
        doctest::Approx(oracle::weighted_mean(x, wk)).epsilon(1e-12));
  CHECK(fit_loess1(s, k, LoessBandwidth::fixed(h), grid).values[0] ==
        doctest::Approx(oracle::wls_intercept(z, x, wk, t)).epsilon(1e-12));
}

TEST_CASE("affine and constant exactness") {
  std::mt19937_64 gen(99);
  for (int c = 0; c < 30; ++c) {
    const double a = -5 + c, b = a + 1 + c * 0.5;
    const auto affine = [](double z) { return 2.0 + 3.0 * z; };
    const auto s = random_design(200 + 10 * c, gen(), affine, 0.0, a, b);
    const auto sc = s.with_responses(std::vector<double>(s.size(), 7.5));
    const auto grid = lin(a, b, 101);
    const double h = (b - a) * (0.05 + 0.01 * c);
    const Kernel k(static_cast<KernelId>(c % 3));
    for (SpacingKind sp : {SpacingKind::plain, SpacingKind::voronoi}) {
      const auto ull = fit_ull(s, k, h, grid, {sp});
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!ull.valid[i]) continue;
        CHECK(std::abs(ull.values[i] - affine(grid[i])) <= 1e-9 * std::max(1.0, std::abs(affine(grid[i]))));
      }
      const auto ulc = fit_ulc(sc, k, h, grid, sp);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (ulc.valid[i]) CHECK(std::abs(ulc.values[i] - 7.5) <= 1e-9 * 7.5);
      }
      const auto ullc = fit_ull(sc, k, h, grid, {sp});
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (ullc.valid[i]) CHECK(std::abs(ullc.values[i] - 7.5) <= 1e-9 * 7.5);
      }
    }
    const auto nw = fit_nw(sc, k, h, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (nw.valid[i]) CHECK(std::abs(nw.values[i] - 7.5) <= 1e-9 * 7.5);
    }
    for (double span : {0.05, 0.3, 1.0}) {
      const auto lo = fit_loess1(s, k, LoessBandwidth::nn_span(span), grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!lo.valid[i]) continue;
        CHECK(std::abs(lo.values[i] - affine(grid[i])) <= 1e-9 * std::max(1.0, std::abs(affine(grid[i]))));
      }
    }
  }
}

TEST_CASE("NW coincides with plain ULC on an equidistant design") {
  const auto s = equidistant(500, 0, 1, [](double z) { return std::sin(6 * z); });
  const auto grid = lin(0.1, 0.9, 81);
  const auto nw = fit_nw(s, Kernel(), 0.07, grid);
  const auto ulc = fit_ulc(s, Kernel(), 0.07, grid, SpacingKind::plain);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(nw.values[i] == doctest::Approx(ulc.values[i]).epsilon(1e-12));
  }
}

TEST_CASE("LOESS span matches the equivalent fixed bandwidth") {
  const std::size_t n = 1000;
  const auto s = equidistant(n, 0, 10, [](double z) { return std::cos(z); });
  const double span = 0.1;
  const Kernel k;
  for (double t : {3.0, 4.37, 5.5, 6.01}) {
    std::vector<double> dist;
    for (double z : s.z()) dist.push_back(std::abs(t - z));
    std::sort(dist.begin(), dist.end());
    const auto kk = static_cast<std::size_t>(std::ceil(span * n));
    const double ht = dist[kk - 1];
    CHECK(ht == doctest::Approx(span * 10 / 2).epsilon(0.01));
    const double g[] = {t};
    const double a = fit_loess1(s, k, LoessBandwidth::nn_span(span), g).values[0];
    const double b = fit_loess1(s, k, LoessBandwidth::fixed(ht), g).values[0];
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
    const auto one = estimate_loess1(s, k, LoessBandwidth::nn_span(span), t);
    REQUIRE(one.has_value());
    CHECK(*one == a);
  }
}

TEST_CASE("fast paths agree with the brute-force reference") {
  std::mt19937_64 gen(17);
  for (int c = 0; c < 12; ++c) {
    const auto s = random_design(300, gen(), [](double z) { return std::sin(3 * z); }, 0.3, 0, 2);
    const auto grid = lin(-0.1, 2.1, 57);
    const Kernel k(static_cast<KernelId>(c % 3));
    for (EstimatorKind kind :
         {EstimatorKind::ull, EstimatorKind::ulc, EstimatorKind::nw, EstimatorKind::loess1}) {
      const double sm = kind == EstimatorKind::loess1 ? 0.05 + 0.07 * c : 0.03 + 0.05 * c;
      for (SpacingKind sp : {SpacingKind::plain, SpacingKind::voronoi}) {
        const auto a = fit(kind, s, k, sm, grid, {sp});
        const auto b = reference::fit(kind, s, k, sm, grid, {sp});
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
          CHECK(a.valid[i] == b.valid[i]);
          if (a.valid[i] && b.valid[i]) {
            CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-9).scale(1.0));
          }
        }
        const auto e = estimate(kind, s, k, sm, grid[5], {sp});
        CHECK(e.has_value() == static_cast<bool>(a.valid[5]));
      }
    }
  }
}

TEST_CASE("evaluation outside the data support is invalid") {
  const auto s = prepare_sample({{2.0, 3.0, 4.0}, {1, 2, 3}, {0, 10}});
  const double grid[] = {0.0, 1.5, 3.0, 4.5, 9.0};
  for (EstimatorKind kind : {EstimatorKind::ull, EstimatorKind::ulc, EstimatorKind::nw}) {
    const auto c = fit(kind, s, Kernel(), 1.5, grid);
    CHECK_FALSE(c.valid[0]);
    CHECK(c.valid[2]);
    CHECK_FALSE(c.valid[4]);
    CHECK(c.invalid_count() >= 2);
  }
}

TEST_CASE("bandwidth validation") {
  const auto s = three_points();
  const double grid[] = {0.5};
  CHECK_THROWS_AS(fit_ull(s, Kernel(), 0.0, grid), std::invalid_argument);
  CHECK_THROWS_AS(fit_ull(s, Kernel(), -1.0, grid), std::invalid_argument);
  CHECK_THROWS_AS(fit_ull(s, Kernel(), 1.0, grid), std::invalid_argument);
  CHECK_THROWS_AS(fit_ulc(s, Kernel(), 0.0, grid), std::invalid_argument);
  CHECK_THROWS_AS(fit_nw(s, Kernel(), 0.0, grid), std::invalid_argument);
  CHECK_THROWS_AS(fit_loess1(s, Kernel(), LoessBandwidth::nn_span(1.5), grid), std::invalid_argument);
  CHECK_THROWS_AS(fit_loess1(s, Kernel(), LoessBandwidth::nn_span(0.0), grid), std::invalid_argument);
  CHECK_THROWS_AS(fit_loess1(s, Kernel(), LoessBandwidth::fixed(0.0), grid), std::invalid_argument);
}

TEST_CASE("indicator mode") {
  const auto s = equidistant(50, 0, 1, [](double z) { return z; });
  const auto grid = lin(0, 1, 11);
  const auto off = fit_ull(s, Kernel(), 0.2, grid, {SpacingKind::voronoi, false});
  CHECK(off.invalid_count() == 0);
  const auto on = fit_ull(s, Kernel(), 0.2, grid, {SpacingKind::voronoi, true});
  CHECK(on.invalid_count() == grid.size());
  for (double v : on.values) CHECK(v == 0.0);

  const Kernel k(KernelId::triangular);
  const double h = 0.45;
  const auto dense = equidistant(
      static_cast<std::size_t>(std::ceil(1.0 / (k.moments().c_star * h))) + 10, 0, 1,
      [](double z) { return z; });
  const auto gated = fit_ull(dense, k, h, grid, {SpacingKind::voronoi, true});
  const auto plain = fit_ull(dense, k, h, grid, {SpacingKind::voronoi, false});
  CHECK(gated.values == plain.values);
  CHECK(gated.valid == plain.valid);
}

TEST_CASE("results do not depend on the thread count") {
  const auto s = random_design(3000, 5, [](double z) { return z * z; }, 1.0, 0, 10);
  const auto grid = lin(0, 10, 1001);
  omp_set_num_threads(1);
  const auto a = fit_ull(s, Kernel(), 0.5, grid);
  const auto la = fit_loess1(s, Kernel(), LoessBandwidth::nn_span(0.2), grid);
  omp_set_num_threads(4);
  const auto b = fit_ull(s, Kernel(), 0.5, grid);
  const auto lb = fit_loess1(s, Kernel(), LoessBandwidth::nn_span(0.2), grid);
  omp_set_num_threads(omp_get_num_procs());
  CHECK(a.values == b.values);
  CHECK(la.values == lb.values);
}

TEST_CASE("theoretical helpers") {
  CHECK(theoretical_interior_bias(0.0, Kernel(), 0.3) == 0.0);
  CHECK(theoretical_interior_bias(2.0, Kernel(KernelId::epanechnikov), 0.1) ==
        doctest::Approx(0.002).epsilon(1e-12));
  CHECK(theoretical_interior_bias(2.0, Kernel(), 0.1) == doctest::Approx(0.00144).epsilon(1e-3));
  CHECK(theoretical_variance_ratio(VarianceComparison::ulc_plain_vs_nw) == 2.0);
  CHECK(theoretical_variance_ratio(VarianceComparison::ulc_voronoi_vs_nw) == 1.5);
  CHECK(theoretical_variance_ratio(VarianceComparison::nw_vs_nw) == 1.0);
  CHECK_THROWS_AS(theoretical_variance_ratio(static_cast<VarianceComparison>(9)),
                  std::invalid_argument);
}

TEST_CASE("names round-trip") {
  for (EstimatorKind kind :
       {EstimatorKind::ull, EstimatorKind::ulc, EstimatorKind::nw, EstimatorKind::loess1}) {
    CHECK(parse_estimator(to_string(kind)) == kind);
  }
  CHECK(parse_spacing("plain") == SpacingKind::plain);
  CHECK(parse_spacing("voronoi") == SpacingKind::voronoi);
  CHECK_THROWS_AS(parse_estimator("gam"), std::invalid_argument);
  CHECK_THROWS_AS(parse_spacing("dirichlet"), std::invalid_argument);
}

}  // TEST_SUITE
