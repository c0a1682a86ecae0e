#include "ullreg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace ullreg {

namespace {

constexpr double kQuadTol = 1e-10;
constexpr unsigned kQuadDepth = 20;

// max |K'| for tricube is attained at t^3 = 1/4: (35/8) * 4^(-2/3).
double raw_lipschitz(KernelId id) {
  switch (id) {
    case KernelId::epanechnikov:
      return 1.5;
    case KernelId::triangular:
      return 1.0;
    case KernelId::tricube:
    default:
      return 35.0 / 8.0 * std::pow(4.0, -2.0 / 3.0);
  }
}

template <class F>
double integrate(F f, double lo, double hi) {
  using boost::math::quadrature::gauss_kronrod;
  if (hi <= lo) return 0.0;
  // Split at the origin: the triangular kernel has a kink there.
  if (lo < 0.0 && hi > 0.0) {
    return integrate(f, lo, 0.0) + integrate(f, 0.0, hi);
  }
  return gauss_kronrod<double, 15>::integrate(f, lo, hi, kQuadDepth, kQuadTol);
}

double ipow(double t, int j) {
  double r = 1.0;
  for (int k = 0; k < j; ++k) r *= t;
  return r;
}

}  // namespace

double spacing_threshold(double kappa1, double kappa2, double lipschitz) {
  return (kappa2 - kappa1 * kappa1) /
         (96.0 * lipschitz * (6.0 * lipschitz + kappa2 + kappa1 / 2.0));
}

Kernel::Kernel(KernelId id)
    : id_(id), lipschitz_(std::max(1.0, raw_lipschitz(id))) {
  for (int j = 0; j < 4; ++j) {
    moments_.kappa[j] = integrate(
        [this, j](double u) { return ipow(std::abs(u), j) * (*this)(u); }, -1.0,
        1.0);
  }
  moments_.ksq = integrate(
      [this](double u) {
        const double k = (*this)(u);
        return k * k;
      },
      -1.0, 1.0);
  moments_.c_star =
      spacing_threshold(moments_.kappa[1], moments_.kappa[2], lipschitz_);
}

Kernel Kernel::from_name(std::string_view name) {
  if (name == "tricube") return Kernel(KernelId::tricube);
  if (name == "epanechnikov") return Kernel(KernelId::epanechnikov);
  if (name == "triangular") return Kernel(KernelId::triangular);
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

std::string_view Kernel::name() const noexcept {
  switch (id_) {
    case KernelId::epanechnikov:
      return "epanechnikov";
    case KernelId::triangular:
      return "triangular";
    case KernelId::tricube:
    default:
      return "tricube";
  }
}

double Kernel::eval_scaled(double h, double t) const {
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  return (*this)(t / h) / h;
}

double Kernel::signed_moment(int j, double lo, double hi) const {
  if (j < 0 || j > 3) throw std::invalid_argument("moment order must be 0..3");
  lo = std::max(lo, -1.0);
  hi = std::min(hi, 1.0);
  return integrate([this, j](double t) { return ipow(t, j) * (*this)(t); }, lo,
                   hi);
}

double Kernel::partial_moment(int j, double alpha) const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0,1]");
  }
  return signed_moment(j, -1.0, alpha);
}

double Kernel::boundary_bias_factor(double alpha) const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in (0,1]");
  }
  const double k0 = partial_moment(0, alpha);
  const double k1 = partial_moment(1, alpha);
  const double k2 = partial_moment(2, alpha);
  const double k3 = partial_moment(3, alpha);
  const double denom = k0 * k2 - k1 * k1;
  if (!(denom > 0.0)) {
    throw std::logic_error("non-positive boundary moment determinant");
  }
  return (k2 * k2 - k3 * k1) / denom;
}

}  // namespace ullreg
