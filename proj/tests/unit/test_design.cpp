#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "ullreg/design.hpp"

using namespace ullreg;

TEST_SUITE("design") {

TEST_CASE("three-point example") {
  const auto s = prepare_sample({{0.5, 0.2, 0.8}, {2, 1, 4}, {0, 1}});
  REQUIRE(s.size() == 3);
  CHECK(std::vector<double>(s.z().begin(), s.z().end()) == std::vector<double>{0.2, 0.5, 0.8});
  CHECK(std::vector<double>(s.x().begin(), s.x().end()) == std::vector<double>{1, 2, 4});
  const auto oracle_delta = oracle::spacings({0.2, 0.5, 0.8}, 0, 1);
  REQUIRE(s.delta().size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(s.delta()[i] == doctest::Approx(oracle_delta[i]));
  CHECK(s.delta()[0] == doctest::Approx(0.2));
  CHECK(s.delta()[3] == doctest::Approx(0.2));
  CHECK(s.max_spacing() == doctest::Approx(0.3));
  CHECK(max_spacing(s) == doctest::Approx(0.3));
  CHECK(s.delta_voronoi()[0] == doctest::Approx(0.35));
  CHECK(s.delta_voronoi()[1] == doctest::Approx(0.3));
  CHECK(s.delta_voronoi()[2] == doctest::Approx(0.35));
}

TEST_CASE("duplicates are merged by mean") {
  const auto s = prepare_sample({{0.5, 0.5, 0.1}, {1, 3, 0}, {0, 1}});
  REQUIRE(s.size() == 2);
  CHECK(s.z()[0] == 0.1);
  CHECK(s.z()[1] == 0.5);
  CHECK(s.x()[1] == doctest::Approx(2.0));
  CHECK(s.x()[0] == 0.0);

  const auto kept = prepare_sample({{0.5, 0.5, 0.1}, {1, 3, 0}, {0, 1}}, false);
  CHECK(kept.size() == 3);
}

TEST_CASE("equidistant design") {
  const int n = 9;
  std::vector<double> z(n), x(n, 0.0);
  for (int i = 0; i < n; ++i) z[i] = (i + 1.0) / (n + 1.0);
  const auto s = prepare_sample({z, x, {0, 1}});
  for (double d : s.delta()) CHECK(d == doctest::Approx(0.1));
  CHECK(s.max_spacing() == doctest::Approx(0.1));
}

TEST_CASE("cluster near the left end") {
  const auto s = prepare_sample({{0.01, 0.02}, {0, 0}, {0, 1}});
  CHECK(s.max_spacing() == doctest::Approx(0.98));
}

TEST_CASE("spacing sums and Voronoi structure on random designs") {
  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 20; ++rep) {
    const double a = -3.0 + rep, b = a + 2.5 + rep;
    std::uniform_real_distribution<double> u(a, b);
    const std::size_t n = 5 + 37 * rep;
    RawSample raw;
    raw.domain = {a, b};
    for (std::size_t i = 0; i < n; ++i) {
      raw.z.push_back(u(gen));
      raw.x.push_back(u(gen));
    }
    const auto s = prepare_sample(raw);
    const auto d = s.delta();
    const auto v = s.delta_voronoi();
    const double len = b - a;
    CHECK(std::abs(std::accumulate(d.begin(), d.end(), 0.0) - len) <= 1e-9 * len);
    CHECK(std::abs(std::accumulate(v.begin(), v.end(), 0.0) - len) <= 1e-9 * len);
    CHECK(s.max_spacing() == *std::max_element(d.begin(), d.end()));
    const std::size_t m = s.size();
    CHECK(v[0] == doctest::Approx(d[0] + d[1] / 2));
    CHECK(v[m - 1] == doctest::Approx(d[m - 1] / 2 + d[m]));
    for (std::size_t i = 1; i + 1 < m; ++i) CHECK(v[i] == doctest::Approx((d[i] + d[i + 1]) / 2));
    CHECK(s.cell_weights(SpacingKind::plain).size() == m);
    CHECK(s.cell_weights(SpacingKind::voronoi).size() == m);
    for (std::size_t i = 1; i < m; ++i) CHECK(s.z()[i] > s.z()[i - 1]);

    // Idempotence.
    RawSample again{{s.z().begin(), s.z().end()}, {s.x().begin(), s.x().end()}, s.domain()};
    const auto s2 = prepare_sample(again);
    CHECK(std::equal(s.z().begin(), s.z().end(), s2.z().begin(), s2.z().end()));
    CHECK(std::equal(s.x().begin(), s.x().end(), s2.x().begin(), s2.x().end()));
    CHECK(std::equal(d.begin(), d.end(), s2.delta().begin(), s2.delta().end()));
  }
}

TEST_CASE("duplicate merging preserves means") {
  RawSample raw;
  raw.domain = {0, 1};
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> pick(1, 9);
  std::normal_distribution<double> noise;
  std::vector<double> sum(10, 0.0), cnt(10, 0.0);
  for (int i = 0; i < 500; ++i) {
    const int k = pick(gen);
    const double x = noise(gen);
    raw.z.push_back(k / 10.0);
    raw.x.push_back(x);
    sum[k] += x;
    cnt[k] += 1;
  }
  const auto s = prepare_sample(raw);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int k = static_cast<int>(std::lround(s.z()[i] * 10));
    CHECK(s.x()[i] == doctest::Approx(sum[k] / cnt[k]).epsilon(1e-12));
  }
}

TEST_CASE("max spacing shrinks with n for uniform draws") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0, 1);
  double prev = 2.0;
  for (std::size_t n : {100, 1000, 10000, 100000}) {
    double avg = 0;
    for (int rep = 0; rep < 10; ++rep) {
      RawSample raw;
      raw.domain = {0, 1};
      for (std::size_t i = 0; i < n; ++i) {
        raw.z.push_back(u(gen));
        raw.x.push_back(0);
      }
      avg += prepare_sample(raw).max_spacing() / 10;
    }
    CHECK(avg < prev);
    prev = avg;
  }
}

TEST_CASE("invalid input") {
  CHECK_THROWS_AS(prepare_sample({{0.5, 0.5}, {1, 2}, {0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(prepare_sample({{0.5}, {1}, {0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(prepare_sample({{0.5, 1.5}, {1, 2}, {0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(prepare_sample({{0.5, 0.6}, {1}, {0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(prepare_sample({{0.5, 0.6}, {1, 2}, {1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(OrderedSample({0.6, 0.5}, {1, 2}, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(OrderedSample({0.5, 0.5}, {1, 2}, {0, 1}), std::invalid_argument);
  CHECK_NOTHROW(OrderedSample({0.5, 0.5, 0.7}, {1, 2, 3}, {0, 1}, true));
  CHECK_THROWS_AS(OrderedSample({0.5, 0.5}, {1, 2}, {0, 1}, true), std::invalid_argument);
}

TEST_CASE("subset and new responses") {
  const auto s = prepare_sample({{0.1, 0.3, 0.6, 0.9}, {1, 2, 3, 4}, {0, 1}});
  const std::size_t idx[] = {0, 2};
  const auto sub = s.subset(idx);
  REQUIRE(sub.size() == 2);
  CHECK(sub.z()[1] == 0.6);
  CHECK(sub.x()[1] == 3);
  CHECK(sub.delta()[1] == doctest::Approx(0.5));
  CHECK(sub.delta()[2] == doctest::Approx(0.4));
  const auto w = s.with_responses({5, 6, 7, 8});
  CHECK(w.x()[3] == 8);
  CHECK(w.delta()[2] == s.delta()[2]);
}

}  // TEST_SUITE
