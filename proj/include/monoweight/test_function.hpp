#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "monoweight/errors.hpp"

namespace monoweight {

enum class Smoothness { c1, lipschitz };

/// u(x) = g(|x|) representation, used for radial reduction.
struct RadialForm {
  std::function<double(double)> g;
  std::function<double(double)> dg;
  /// Points where g or g' has a kink or changes formula; quadrature splits there.
  std::vector<double> breakpoints;
};

/// Compactly supported scalar function on R^n with gradient access.
///
/// `value` must vanish outside the ball B(center, support_radius). When
/// `gradient` is empty the gradient falls back to central differences with
/// step h = eps^{1/3} (1 + |x|).
struct TestFunction {
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  std::vector<double> center;
  double support_radius = 0.0;
  Smoothness smoothness = Smoothness::c1;
  std::optional<RadialForm> radial;
  /// Known max |u| when available (attained at `argmax`).
  std::optional<double> max_abs;
  std::vector<double> argmax;
  std::string descriptor;

  double operator()(std::span<const double> x) const { return value(x); }

  static double fd_step(std::span<const double> x) {
    double norm = 0.0;
    for (double v : x) norm += v * v;
    return std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + std::sqrt(norm));
  }

  void grad(std::span<const double> x, std::span<double> out) const {
    if (gradient) {
      gradient(x, out);
      return;
    }
    central_difference_gradient(x, out);
  }

  void central_difference_gradient(std::span<const double> x, std::span<double> out) const {
    std::vector<double> y(x.begin(), x.end());
    const double h = fd_step(x);
    for (std::size_t i = 0; i < dim; ++i) {
      y[i] = x[i] + h;
      const double fp = value(y);
      y[i] = x[i] - h;
      const double fm = value(y);
      y[i] = x[i];
      out[i] = (fp - fm) / (2.0 * h);
    }
  }

  double grad_norm(std::span<const double> x) const {
    double buf[16];
    std::vector<double> heap;
    std::span<double> g;
    if (dim <= 16) {
      g = std::span<double>(buf, dim);
    } else {
      heap.resize(dim);
      g = heap;
    }
    grad(x, g);
    double s = 0.0;
    for (double v : g) s += v * v;
    return std::sqrt(s);
  }

  bool is_radial() const noexcept { return radial.has_value(); }
};

inline double euclidean_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

/// Polynomial bump amplitude * (1 - |x - c|^2 / R^2)_+^power, of class
/// C^{power-1}. power >= 2 keeps it C^1.
inline TestFunction bump(std::vector<double> center, double radius, int power = 3, double amplitude = 1.0) {
  if (!(radius > 0.0)) throw InvalidArgument("bump radius must be positive");
  if (power < 2) throw InvalidArgument("bump power must be >= 2 for a C^1 function");
  TestFunction u;
  u.dim = center.size();
  u.center = center;
  u.support_radius = radius;
  u.max_abs = std::abs(amplitude);
  u.argmax = center;
  const double inv_r2 = 1.0 / (radius * radius);
  u.value = [center, inv_r2, power, amplitude](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < center.size(); ++i) s += (x[i] - center[i]) * (x[i] - center[i]);
    const double t = 1.0 - s * inv_r2;
    return t > 0.0 ? amplitude * std::pow(t, power) : 0.0;
  };
  u.gradient = [center, inv_r2, power, amplitude](std::span<const double> x, std::span<double> g) {
    double s = 0.0;
    for (std::size_t i = 0; i < center.size(); ++i) s += (x[i] - center[i]) * (x[i] - center[i]);
    const double t = 1.0 - s * inv_r2;
    const double f = t > 0.0 ? -2.0 * inv_r2 * amplitude * power * std::pow(t, power - 1) : 0.0;
    for (std::size_t i = 0; i < center.size(); ++i) g[i] = f * (x[i] - center[i]);
  };
  bool origin = true;
  for (double c : center) origin = origin && c == 0.0;
  if (origin) {
    u.radial = RadialForm{
        [inv_r2, power, amplitude](double r) {
          const double t = 1.0 - r * r * inv_r2;
          return t > 0.0 ? amplitude * std::pow(t, power) : 0.0;
        },
        [inv_r2, power, amplitude](double r) {
          const double t = 1.0 - r * r * inv_r2;
          return t > 0.0 ? -2.0 * r * inv_r2 * amplitude * power * std::pow(t, power - 1) : 0.0;
        },
        {radius}};
  }
  u.descriptor = "bump(R=" + std::to_string(radius) + ",k=" + std::to_string(power) + ")";
  return u;
}

/// C^1 step s(t) = 1 for t <= 0, 0 for t >= 1, 1 - 3t^2 + 2t^3 between.
inline double smooth_step_down(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  return 1.0 - t * t * (3.0 - 2.0 * t);
}
inline double smooth_step_down_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -6.0 * t * (1.0 - t);
}

/// Radial function g(|x|) from a profile and its derivative.
inline TestFunction radial_function(std::size_t dim, std::function<double(double)> g,
                                    std::function<double(double)> dg, double support_radius,
                                    std::vector<double> breakpoints, std::string descriptor) {
  TestFunction u;
  u.dim = dim;
  u.center.assign(dim, 0.0);
  u.support_radius = support_radius;
  u.value = [g](std::span<const double> x) { return g(euclidean_norm(x)); };
  u.gradient = [dg](std::span<const double> x, std::span<double> out) {
    const double r = euclidean_norm(x);
    const double d = r > 0.0 ? dg(r) / r : 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = d * x[i];
  };
  u.radial = RadialForm{g, dg, std::move(breakpoints)};
  u.descriptor = std::move(descriptor);
  return u;
}

/// Radial plateau: value `height` on |x| <= rho, C^1 decay to 0 across
/// [rho, rho + band]. A smoothed indicator of the sector ball B_rho^*.
inline TestFunction plateau(std::size_t dim, double rho, double band, double height = 1.0) {
  if (!(rho > 0.0) || !(band > 0.0)) throw InvalidArgument("plateau needs rho > 0 and band > 0");
  auto g = [=](double r) { return height * smooth_step_down((r - rho) / band); };
  auto dg = [=](double r) { return height * smooth_step_down_derivative((r - rho) / band) / band; };
  TestFunction u = radial_function(dim, g, dg, rho + band, {rho, rho + band},
                                   "plateau(rho=" + std::to_string(rho) + ",band=" + std::to_string(band) + ")");
  u.max_abs = std::abs(height);
  u.argmax.assign(dim, 0.0);
  return u;
}

/// lambda * u.
inline TestFunction scaled(const TestFunction& u, double lambda) {
  TestFunction v = u;
  v.value = [f = u.value, lambda](std::span<const double> x) { return lambda * f(x); };
  if (u.gradient)
    v.gradient = [g = u.gradient, lambda](std::span<const double> x, std::span<double> out) {
      g(x, out);
      for (double& c : out) c *= lambda;
    };
  if (u.radial)
    v.radial = RadialForm{[g = u.radial->g, lambda](double r) { return lambda * g(r); },
                          [dg = u.radial->dg, lambda](double r) { return lambda * dg(r); },
                          u.radial->breakpoints};
  if (u.max_abs) v.max_abs = std::abs(lambda) * *u.max_abs;
  v.descriptor = std::to_string(lambda) + "*" + u.descriptor;
  return v;
}

/// u(lambda x), lambda > 0.
inline TestFunction dilated(const TestFunction& u, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("dilation factor must be positive");
  TestFunction v = u;
  auto scale_point = [lambda](std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    for (double& c : y) c *= lambda;
    return y;
  };
  v.value = [f = u.value, scale_point](std::span<const double> x) { return f(scale_point(x)); };
  v.gradient = [u, lambda, scale_point](std::span<const double> x, std::span<double> out) {
    u.grad(scale_point(x), out);
    for (double& c : out) c *= lambda;
  };
  for (double& c : v.center) c /= lambda;
  for (double& c : v.argmax) c /= lambda;
  v.support_radius = u.support_radius / lambda;
  if (u.radial) {
    std::vector<double> br = u.radial->breakpoints;
    for (double& b : br) b /= lambda;
    v.radial = RadialForm{[g = u.radial->g, lambda](double r) { return g(lambda * r); },
                          [dg = u.radial->dg, lambda](double r) { return lambda * dg(lambda * r); },
                          std::move(br)};
  }
  v.descriptor = u.descriptor + "(" + std::to_string(lambda) + "x)";
  return v;
}

}  // namespace monoweight
