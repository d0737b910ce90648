#include "qrep/rng.hpp"

#include <cmath>
#include <string>

#include "qrep/errors.hpp"
#include "qrep/kernels.hpp"

namespace qrep::rng {

namespace {

constexpr std::uint64_t kGamma1 = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kGamma2 = 0xD1B54A32D192ED03ull;

std::uint64_t finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Stream::bits(std::uint64_t counter) const noexcept {
  return finalize(key_ + (counter + 1) * kGamma1);
}

double Stream::uniform(std::uint64_t counter) const noexcept {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal(std::uint64_t counter) const noexcept {
  return kernels::normal_icdf(uniform(counter));
}

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return finalize(finalize(seed + (a + 1) * kGamma1) + (b + 1) * kGamma2);
}

double gamma_sample(SeqStream& g, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    raise(errc::invalid_argument, "gamma needs positive shape and scale, got shape=" +
                                      std::to_string(shape) + " scale=" + std::to_string(scale));
  }
  if (shape < 1.0) {
    const double u = g.uniform();
    return gamma_sample(g, shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = g.normal();
    const double v0 = 1.0 + c * x;
    if (v0 <= 0.0) continue;
    const double v = v0 * v0 * v0;
    const double u = g.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v * scale;
  }
}

}  // namespace qrep::rng
