#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ullreg/design.hpp"
#include "ullreg/random.hpp"

namespace ullreg {

enum class DesignLaw {
  uniform_mixture,
  density_rejection,
  trig_dependent,
  trig_subsampled,
  bernoulli_switch,
};

enum class TargetId { parabola, piecewise_linear, chirp };

enum class NoiseLaw { gaussian, uniform, student_t };

/// Example 1 switch schedules: alternating blocks of lengths 1, 2, 4, ...
/// or strict odd/even alternation.
enum class SwitchVariant { blocks, alternating };

struct MixtureComponent {
  double weight = 1.0;
  double lo = 0.0;
  double hi = 1.0;
};

/// A generative regression model: design law, target, noise and size.
struct Scenario {
  std::string id = "custom";
  Domain domain{0.0, 10.0};
  std::size_t n = 5000;
  DesignLaw design_law = DesignLaw::uniform_mixture;
  std::vector<MixtureComponent> mixture{{1.0, 0.0, 10.0}};
  /// Step A of the trigonometric design z_i = s(A i).
  double trig_step = 0.0002;
  int harmonics = 100;
  /// Pool size for trig_subsampled; n points are kept.
  std::size_t pool_size = 50000;
  SwitchVariant switch_variant = SwitchVariant::blocks;
  TargetId target = TargetId::parabola;
  double sigma = 2.0;
  NoiseLaw noise = NoiseLaw::gaussian;
  /// Degrees of freedom for student_t noise (scaled to variance sigma^2).
  double noise_df = 5.0;
  /// Evaluate max error on [min z, max z] instead of the whole domain.
  bool metric_on_design_range = false;
};

/// Built-in scenarios "example1" .. "example5". Throws std::invalid_argument
/// for unknown ids.
Scenario preset_scenario(std::string_view id);

std::string_view to_string(DesignLaw law) noexcept;
std::string_view to_string(TargetId target) noexcept;
std::string_view to_string(NoiseLaw noise) noexcept;
DesignLaw parse_design_law(std::string_view name);
TargetId parse_target(std::string_view name);
NoiseLaw parse_noise(std::string_view name);

/// Throws std::invalid_argument if fields are out of range.
void validate(const Scenario& scenario);

/// Design points in generation order, from the stream keyed by `key`.
std::vector<double> gen_design(const Scenario& scenario, std::uint64_t key);

/// Centred noise with standard deviation scenario.sigma.
std::vector<double> gen_noise(const Scenario& scenario, std::size_t n,
                              std::uint64_t key);

double target_value(TargetId target, double z);

/// Design and responses for one replication (design and noise streams).
RawSample gen_sample(const Scenario& scenario, std::uint64_t base_seed,
                     std::uint64_t replication);

/// Density (unnormalised) used by density_rejection: (z - 5)^2 + 2.
double rejection_density(double z) noexcept;

}  // namespace ullreg
