#include "ullreg/scenario.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ullreg {

namespace {

// Stand-in for the withheld piecewise-linear target: linear between knots.
constexpr double kKnotsZ[] = {0.0, 2.0, 3.0, 5.5, 7.0, 8.5, 10.0};
constexpr double kKnotsF[] = {14.0, 22.0, 16.0, 23.0, 15.0, 17.0, 9.0};

double piecewise_linear(double z) {
  constexpr std::size_t m = std::size(kKnotsZ);
  if (z <= kKnotsZ[0]) return kKnotsF[0];
  for (std::size_t k = 1; k < m; ++k) {
    if (z <= kKnotsZ[k]) {
      const double w = (z - kKnotsZ[k - 1]) / (kKnotsZ[k] - kKnotsZ[k - 1]);
      return kKnotsF[k - 1] + w * (kKnotsF[k] - kKnotsF[k - 1]);
    }
  }
  return kKnotsF[m - 1];
}

std::vector<double> uniform_mixture(const Scenario& s, CounterRng& rng) {
  double total = 0.0;
  for (const auto& c : s.mixture) total += c.weight;
  std::vector<double> z;
  z.reserve(s.n);
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < s.mixture.size(); ++k) {
    const auto& c = s.mixture[k];
    const std::size_t count =
        k + 1 == s.mixture.size()
            ? s.n - assigned
            : static_cast<std::size_t>(std::llround(c.weight / total * s.n));
    for (std::size_t i = 0; i < count; ++i) {
      z.push_back(c.lo + (c.hi - c.lo) * rng.uniform());
    }
    assigned += count;
  }
  return z;
}

std::vector<double> density_rejection(const Scenario& s, CounterRng& rng) {
  const Domain& d = s.domain;
  double envelope = std::max(rejection_density(d.lo), rejection_density(d.hi));
  if (d.contains(5.0)) envelope = std::max(envelope, rejection_density(5.0));
  std::vector<double> z;
  z.reserve(s.n);
  while (z.size() < s.n) {
    const double cand = d.lo + d.length() * rng.uniform();
    if (rng.uniform() * envelope < rejection_density(cand)) z.push_back(cand);
  }
  return z;
}

// z_i = lo + length * |sum_k eta_k cos(A i k)|, with eta_k proportional to
// psi_k / k and psi_k ~ U[0,1] drawn once per call.
std::vector<double> trig_dependent(const Scenario& s, std::size_t count,
                                   CounterRng& rng) {
  const int m = s.harmonics;
  std::vector<double> eta(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) eta[k] = rng.uniform() / (k + 1);
  const double norm = std::accumulate(eta.begin(), eta.end(), 0.0);
  for (double& e : eta) e /= norm;

  std::vector<double> z(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double theta = s.trig_step * static_cast<double>(i + 1);
    const double c1 = std::cos(theta);
    // Chebyshev recurrence cos((k+1)x) = 2 cos x cos kx - cos((k-1)x).
    double prev = 1.0;
    double cur = c1;
    double sum = 0.0;
    for (int k = 0; k < m; ++k) {
      sum += eta[k] * cur;
      const double next = 2.0 * c1 * cur - prev;
      prev = cur;
      cur = next;
    }
    z[i] = s.domain.lo + s.domain.length() * std::min(1.0, std::abs(sum));
  }
  return z;
}

std::vector<double> trig_subsampled(const Scenario& s, CounterRng& rng) {
  std::vector<double> pool = trig_dependent(s, s.pool_size, rng);
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < s.n; ++i) {
    const std::size_t span = idx.size() - i;
    const auto j = i + std::min(span - 1, static_cast<std::size_t>(
                                              rng.uniform() * static_cast<double>(span)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(s.n);
  std::sort(idx.begin(), idx.end());
  std::vector<double> z;
  z.reserve(s.n);
  for (std::size_t i : idx) z.push_back(pool[i]);
  return z;
}

std::vector<double> bernoulli_switch(const Scenario& s, CounterRng& rng) {
  const Domain& d = s.domain;
  const double mid = 0.5 * (d.lo + d.hi);
  const bool nu1 = rng.uniform() < 0.5;
  std::vector<double> z(s.n);
  for (std::size_t j = 1; j <= s.n; ++j) {
    bool same_as_first;
    if (s.switch_variant == SwitchVariant::alternating) {
      same_as_first = (j % 2) == 1;
    } else {
      // Block b holds indices 2^b .. 2^(b+1)-1; even blocks copy nu_1.
      const int b = static_cast<int>(std::bit_width(j)) - 1;
      same_as_first = (b % 2) == 0;
    }
    const bool left = same_as_first ? nu1 : !nu1;
    const double u = rng.uniform();
    z[j - 1] = left ? d.lo + (mid - d.lo) * u : mid + (d.hi - mid) * u;
  }
  return z;
}

}  // namespace

double rejection_density(double z) noexcept { return (z - 5.0) * (z - 5.0) + 2.0; }

double target_value(TargetId target, double z) {
  switch (target) {
    case TargetId::parabola:
      return (z - 5.0) * (z - 5.0) + 10.0;
    case TargetId::piecewise_linear:
      return piecewise_linear(z);
    case TargetId::chirp: {
      const double u = (z - 5.0) * (z - 5.0);
      return 0.2 * ((u + 25.0) * std::cos(u / 2.0) + 60.0);
    }
  }
  throw std::invalid_argument("unknown target");
}

std::string_view to_string(DesignLaw law) noexcept {
  switch (law) {
    case DesignLaw::uniform_mixture:
      return "uniform_mixture";
    case DesignLaw::density_rejection:
      return "density_rejection";
    case DesignLaw::trig_dependent:
      return "trig_dependent";
    case DesignLaw::trig_subsampled:
      return "trig_subsampled";
    case DesignLaw::bernoulli_switch:
      return "bernoulli_switch";
  }
  return "?";
}

std::string_view to_string(TargetId target) noexcept {
  switch (target) {
    case TargetId::parabola:
      return "parabola";
    case TargetId::piecewise_linear:
      return "piecewise_linear";
    case TargetId::chirp:
      return "chirp";
  }
  return "?";
}

std::string_view to_string(NoiseLaw noise) noexcept {
  switch (noise) {
    case NoiseLaw::gaussian:
      return "gaussian";
    case NoiseLaw::uniform:
      return "uniform";
    case NoiseLaw::student_t:
      return "student_t";
  }
  return "?";
}

DesignLaw parse_design_law(std::string_view name) {
  for (auto law : {DesignLaw::uniform_mixture, DesignLaw::density_rejection,
                   DesignLaw::trig_dependent, DesignLaw::trig_subsampled,
                   DesignLaw::bernoulli_switch}) {
    if (name == to_string(law)) return law;
  }
  throw std::invalid_argument("unknown design law '" + std::string(name) + "'");
}

TargetId parse_target(std::string_view name) {
  for (auto t : {TargetId::parabola, TargetId::piecewise_linear, TargetId::chirp}) {
    if (name == to_string(t)) return t;
  }
  throw std::invalid_argument("unknown target '" + std::string(name) + "'");
}

NoiseLaw parse_noise(std::string_view name) {
  for (auto t : {NoiseLaw::gaussian, NoiseLaw::uniform, NoiseLaw::student_t}) {
    if (name == to_string(t)) return t;
  }
  throw std::invalid_argument("unknown noise law '" + std::string(name) + "'");
}

Scenario preset_scenario(std::string_view id) {
  Scenario s;
  s.id = std::string(id);
  if (id == "example1") {
    s.domain = {0.0, 1.0};
    s.design_law = DesignLaw::bernoulli_switch;
    s.target = TargetId::parabola;
    s.sigma = 0.5;
  } else if (id == "example2") {
    s.design_law = DesignLaw::uniform_mixture;
    s.mixture = {{0.9, 0.0, 5.0}, {0.1, 5.0, 10.0}};
    s.target = TargetId::parabola;
  } else if (id == "example3") {
    s.design_law = DesignLaw::density_rejection;
    s.target = TargetId::piecewise_linear;
    s.metric_on_design_range = true;
  } else if (id == "example4") {
    s.design_law = DesignLaw::trig_dependent;
    s.target = TargetId::chirp;
  } else if (id == "example5") {
    s.design_law = DesignLaw::trig_subsampled;
    s.target = TargetId::chirp;
  } else {
    throw std::invalid_argument("unknown scenario '" + std::string(id) + "'");
  }
  return s;
}

void validate(const Scenario& s) {
  if (!(s.domain.lo < s.domain.hi) || !std::isfinite(s.domain.lo) ||
      !std::isfinite(s.domain.hi)) {
    throw std::invalid_argument("scenario domain must satisfy lo < hi");
  }
  if (s.n < 2) throw std::invalid_argument("scenario n must be at least 2");
  if (!(s.sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
  if (s.noise == NoiseLaw::student_t && !(s.noise_df > 2.0)) {
    throw std::invalid_argument("student_t noise needs df > 2");
  }
  switch (s.design_law) {
    case DesignLaw::uniform_mixture:
      if (s.mixture.empty()) throw std::invalid_argument("empty mixture");
      for (const auto& c : s.mixture) {
        if (!(c.weight > 0.0) || !(c.lo < c.hi) || !s.domain.contains(c.lo) ||
            !s.domain.contains(c.hi)) {
          throw std::invalid_argument("mixture component out of range");
        }
      }
      break;
    case DesignLaw::trig_dependent:
    case DesignLaw::trig_subsampled:
      if (!(s.trig_step > 0.0) || s.harmonics < 1) {
        throw std::invalid_argument("trig design needs step > 0 and harmonics >= 1");
      }
      if (s.design_law == DesignLaw::trig_subsampled && s.pool_size < s.n) {
        throw std::invalid_argument("pool_size must be at least n");
      }
      break;
    default:
      break;
  }
}

std::vector<double> gen_design(const Scenario& s, std::uint64_t key) {
  validate(s);
  CounterRng rng(key);
  switch (s.design_law) {
    case DesignLaw::uniform_mixture:
      return uniform_mixture(s, rng);
    case DesignLaw::density_rejection:
      return density_rejection(s, rng);
    case DesignLaw::trig_dependent:
      return trig_dependent(s, s.n, rng);
    case DesignLaw::trig_subsampled:
      return trig_subsampled(s, rng);
    case DesignLaw::bernoulli_switch:
      return bernoulli_switch(s, rng);
  }
  throw std::invalid_argument("unknown design law");
}

std::vector<double> gen_noise(const Scenario& s, std::size_t n, std::uint64_t key) {
  CounterRng rng(key);
  std::vector<double> eps(n);
  switch (s.noise) {
    case NoiseLaw::gaussian: {
      std::normal_distribution<double> dist(0.0, s.sigma);
      for (double& e : eps) e = dist(rng);
      break;
    }
    case NoiseLaw::uniform: {
      const double half = std::sqrt(3.0) * s.sigma;
      for (double& e : eps) e = half * (2.0 * rng.uniform() - 1.0);
      break;
    }
    case NoiseLaw::student_t: {
      std::student_t_distribution<double> dist(s.noise_df);
      const double scale = s.sigma * std::sqrt((s.noise_df - 2.0) / s.noise_df);
      for (double& e : eps) e = scale * dist(rng);
      break;
    }
  }
  return eps;
}

RawSample gen_sample(const Scenario& s, std::uint64_t base_seed,
                     std::uint64_t replication) {
  RawSample raw;
  raw.domain = s.domain;
  raw.z = gen_design(s, derive(base_seed, replication, StreamRole::design));
  raw.x = gen_noise(s, raw.z.size(),
                    derive(base_seed, replication, StreamRole::noise));
  for (std::size_t i = 0; i < raw.z.size(); ++i) {
    raw.x[i] += target_value(s.target, raw.z[i]);
  }
  return raw;
}

}  // namespace ullreg
