#pragma once

#include <array>
#include <string_view>

namespace ullreg {

enum class KernelId { tricube, epanechnikov, triangular };

/// Absolute moments kappa[j] = int |u|^j K(u) du, the squared L2 norm of K,
/// and the spacing threshold c* that gates the theoretical estimator.
struct KernelMoments {
  std::array<double, 4> kappa{};
  double ksq = 0.0;
  double c_star = 0.0;
};

// Stateless kernel shapes. Each is a symmetric density supported on [-1,1]
// with K(+-1) = 0; hot loops are instantiated per shape via Kernel::visit.
struct TricubeShape {
  double operator()(double t) const noexcept {
    const double a = t < 0 ? -t : t;
    if (a >= 1.0) return 0.0;
    const double c = 1.0 - a * a * a;
    return (70.0 / 81.0) * c * c * c;
  }
};

struct EpanechnikovShape {
  double operator()(double t) const noexcept {
    return (t > -1.0 && t < 1.0) ? 0.75 * (1.0 - t * t) : 0.0;
  }
};

struct TriangularShape {
  double operator()(double t) const noexcept {
    const double a = t < 0 ? -t : t;
    return a < 1.0 ? 1.0 - a : 0.0;
  }
};

/// A compact-support kernel with its cached moments and derived constants.
/// Immutable after construction; safe to share across threads.
class Kernel {
 public:
  explicit Kernel(KernelId id = KernelId::tricube);

  /// Parses "tricube", "epanechnikov" or "triangular"; throws
  /// std::invalid_argument otherwise.
  static Kernel from_name(std::string_view name);

  KernelId id() const noexcept { return id_; }
  std::string_view name() const noexcept;

  /// Calls f with the shape functor for this kernel.
  template <class F>
  decltype(auto) visit(F&& f) const {
    switch (id_) {
      case KernelId::epanechnikov:
        return f(EpanechnikovShape{});
      case KernelId::triangular:
        return f(TriangularShape{});
      case KernelId::tricube:
      default:
        return f(TricubeShape{});
    }
  }

  double operator()(double t) const noexcept {
    return visit([t](auto shape) { return shape(t); });
  }

  /// K_h(t) = K(t/h)/h. Throws std::invalid_argument for h <= 0.
  double eval_scaled(double h, double t) const;

  /// Lipschitz constant of K, clamped to at least 1.
  double lipschitz() const noexcept { return lipschitz_; }

  const KernelMoments& moments() const noexcept { return moments_; }

  /// Signed partial moment int_{-1}^{alpha} t^j K(t) dt for j in 0..3 and
  /// alpha in [0,1].
  double partial_moment(int j, double alpha) const;

  /// Signed integral int_{lo}^{hi} t^j K(t) dt for any -1 <= lo <= hi <= 1.
  double signed_moment(int j, double lo, double hi) const;

  /// D(alpha) = (k2^2 - k3 k1) / (k0 k2 - k1^2) with k_j = kappa_j(alpha).
  double boundary_bias_factor(double alpha) const;

 private:
  KernelId id_;
  double lipschitz_;
  KernelMoments moments_;
};

/// c* = (k2 - k1^2) / (96 L (6L + k2 + k1/2)).
double spacing_threshold(double kappa1, double kappa2, double lipschitz);

}  // namespace ullreg
