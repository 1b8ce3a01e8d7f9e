#pragma once

#include <functional>
#include <span>
#include <string>
#include <variant>

#include "fve/random.hpp"

namespace fve {

/// Test function phi on the real line: a polynomial of degree <= 2 or a
/// gaussian bump. Both families are closed under the heat semigroup.
class TestFunction {
 public:
  struct Polynomial {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  };
  struct GaussianBump {
    double amplitude = 1.0, center = 0.0, width = 1.0;
  };

  static TestFunction constant(double c) { return TestFunction(Polynomial{c, 0.0, 0.0}); }
  static TestFunction identity() { return TestFunction(Polynomial{0.0, 1.0, 0.0}); }
  static TestFunction square() { return TestFunction(Polynomial{0.0, 0.0, 1.0}); }
  static TestFunction polynomial(double c0, double c1, double c2) { return TestFunction(Polynomial{c0, c1, c2}); }
  /// amplitude * exp(-(x - center)^2 / (2 width^2)).
  static TestFunction bump(double amplitude, double center, double width);

  double operator()(double x) const;
  /// Convolution with the N(0, variance) density.
  TestFunction heat_smoothed(double variance) const;
  bool is_polynomial() const noexcept { return std::holds_alternative<Polynomial>(form_); }
  const Polynomial* polynomial_coeffs() const noexcept { return std::get_if<Polynomial>(&form_); }
  const GaussianBump* bump_params() const noexcept { return std::get_if<GaussianBump>(&form_); }
  std::string describe() const;

 private:
  explicit TestFunction(std::variant<Polynomial, GaussianBump> f) : form_(f) {}
  std::variant<Polynomial, GaussianBump> form_;
};

/// Named initial laws mu.
class InitialLaw {
 public:
  struct Point {
    double x = 0.0;
  };
  struct Uniform {
    double a = 0.0, b = 1.0;
  };
  struct Normal {
    double mean = 0.0, sd = 1.0;
  };
  /// p delta_{x1} + (1 - p) delta_{x2}.
  struct TwoAtoms {
    double x1 = 0.0, p = 0.5, x2 = 1.0;
  };

  static InitialLaw point(double x);
  static InitialLaw uniform(double a, double b);
  static InitialLaw normal(double mean, double sd);
  static InitialLaw two_atoms(double x1, double p, double x2);

  double sample(Rng& rng) const;
  /// <mu, phi>, exact.
  double expect(const TestFunction& phi) const;
  std::string name() const;
  const auto& form() const noexcept { return form_; }

 private:
  using Form = std::variant<Point, Uniform, Normal, TwoAtoms>;
  explicit InitialLaw(Form f) : form_(f) {}
  Form form_;
};

/// A function on R^m evaluated at a particle configuration.
using MultiFunction = std::function<double(std::span<const double>)>;

/// f(x_1, ..., x_m) = phi(x_1) ... phi(x_m).
MultiFunction tensor_power(const TestFunction& phi);

}  // namespace fve
