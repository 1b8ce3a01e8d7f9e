#include "fve/random.hpp"

#include <array>

namespace fve {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
  return mix64(mix64(master_seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

Rng::Rng(std::uint64_t seed) {
  const std::uint64_t a = mix64(seed);
  const std::uint64_t b = mix64(a);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  engine_.seed(seq);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() { return normal_(engine_); }

double Rng::exponential(double rate) {
  return std::exponential_distribution<double>(rate)(engine_);
}

std::uint64_t Rng::index(std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

std::uint64_t Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<std::uint64_t>(mean)(engine_);
}

double Rng::gamma(double shape, double scale) {
  return std::gamma_distribution<double>(shape, scale)(engine_);
}

Rng Rng::split() { return Rng(engine_()); }

}  // namespace fve
