#include "fve/distributions.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fve/error.hpp"

namespace fve {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

TestFunction TestFunction::bump(double amplitude, double center, double width) {
  if (!(width > 0.0)) throw ArgumentError("gaussian bump: width must be > 0");
  return TestFunction(GaussianBump{amplitude, center, width});
}

double TestFunction::operator()(double x) const {
  return std::visit(overloaded{
                        [x](const Polynomial& p) { return p.c0 + x * (p.c1 + x * p.c2); },
                        [x](const GaussianBump& g) {
                          const double u = (x - g.center) / g.width;
                          return g.amplitude * std::exp(-0.5 * u * u);
                        },
                    },
                    form_);
}

TestFunction TestFunction::heat_smoothed(double variance) const {
  if (variance < 0.0) throw ArgumentError("heat_smoothed: negative variance");
  return std::visit(overloaded{
                        [variance](const Polynomial& p) {
                          return TestFunction(Polynomial{p.c0 + p.c2 * variance, p.c1, p.c2});
                        },
                        [variance](const GaussianBump& g) {
                          const double w2 = g.width * g.width + variance;
                          return TestFunction(GaussianBump{g.amplitude * g.width / std::sqrt(w2), g.center,
                                                           std::sqrt(w2)});
                        },
                    },
                    form_);
}

std::string TestFunction::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Polynomial& p) { os << "poly(" << p.c0 << "," << p.c1 << "," << p.c2 << ")"; },
                 [&](const GaussianBump& g) {
                   os << "bump(" << g.amplitude << "," << g.center << "," << g.width << ")";
                 },
             },
             form_);
  return os.str();
}

InitialLaw InitialLaw::point(double x) {
  if (!std::isfinite(x)) throw ArgumentError("point law: x must be finite");
  return InitialLaw(Point{x});
}

InitialLaw InitialLaw::uniform(double a, double b) {
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) throw ArgumentError("uniform law: need finite a < b");
  return InitialLaw(Uniform{a, b});
}

InitialLaw InitialLaw::normal(double mean, double sd) {
  if (!std::isfinite(mean) || !(sd >= 0.0) || !std::isfinite(sd)) {
    throw ArgumentError("normal law: need finite mean and sd >= 0");
  }
  return InitialLaw(Normal{mean, sd});
}

InitialLaw InitialLaw::two_atoms(double x1, double p, double x2) {
  if (!(p >= 0.0 && p <= 1.0) || !std::isfinite(x1) || !std::isfinite(x2)) {
    throw ArgumentError("two_atoms law: need finite atoms and p in [0, 1]");
  }
  return InitialLaw(TwoAtoms{x1, p, x2});
}

double InitialLaw::sample(Rng& rng) const {
  return std::visit(overloaded{
                        [](const Point& p) { return p.x; },
                        [&](const Uniform& u) { return u.a + (u.b - u.a) * rng.uniform(); },
                        [&](const Normal& n) { return n.mean + n.sd * rng.normal(); },
                        [&](const TwoAtoms& t) { return rng.uniform() < t.p ? t.x1 : t.x2; },
                    },
                    form_);
}

double InitialLaw::expect(const TestFunction& phi) const {
  if (const auto* p = phi.polynomial_coeffs()) {
    double m1 = 0.0, m2 = 0.0;
    std::visit(overloaded{
                   [&](const Point& q) {
                     m1 = q.x;
                     m2 = q.x * q.x;
                   },
                   [&](const Uniform& u) {
                     m1 = 0.5 * (u.a + u.b);
                     m2 = (u.a * u.a + u.a * u.b + u.b * u.b) / 3.0;
                   },
                   [&](const Normal& n) {
                     m1 = n.mean;
                     m2 = n.mean * n.mean + n.sd * n.sd;
                   },
                   [&](const TwoAtoms& t) {
                     m1 = t.p * t.x1 + (1.0 - t.p) * t.x2;
                     m2 = t.p * t.x1 * t.x1 + (1.0 - t.p) * t.x2 * t.x2;
                   },
               },
               form_);
    return p->c0 + p->c1 * m1 + p->c2 * m2;
  }
  const auto& g = *phi.bump_params();
  return std::visit(overloaded{
                        [&](const Point& q) { return phi(q.x); },
                        [&](const Uniform& u) {
                          const double mass = normal_cdf((u.b - g.center) / g.width) -
                                              normal_cdf((u.a - g.center) / g.width);
                          return g.amplitude * g.width * std::sqrt(2.0 * std::numbers::pi) * mass / (u.b - u.a);
                        },
                        [&](const Normal& n) {
                          const double w2 = g.width * g.width + n.sd * n.sd;
                          const double d = n.mean - g.center;
                          return g.amplitude * g.width / std::sqrt(w2) * std::exp(-0.5 * d * d / w2);
                        },
                        [&](const TwoAtoms& t) { return t.p * phi(t.x1) + (1.0 - t.p) * phi(t.x2); },
                    },
                    form_);
}

std::string InitialLaw::name() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Point& p) { os << "point(" << p.x << ")"; },
                 [&](const Uniform& u) { os << "uniform(" << u.a << "," << u.b << ")"; },
                 [&](const Normal& n) { os << "normal(" << n.mean << "," << n.sd << ")"; },
                 [&](const TwoAtoms& t) { os << "two_atoms(" << t.x1 << "," << t.p << "," << t.x2 << ")"; },
             },
             form_);
  return os.str();
}

MultiFunction tensor_power(const TestFunction& phi) {
  return [phi](std::span<const double> x) {
    double v = 1.0;
    for (double xi : x) v *= phi(xi);
    return v;
  };
}

}  // namespace fve
