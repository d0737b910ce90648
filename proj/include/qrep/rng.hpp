#pragma once

#include <cstdint>

namespace qrep::rng {

// Counter-based generator: the draw at (key, counter) is a pure function, so
// any replication or observation is addressable directly. That is what makes
// the simulation output independent of worker count and evaluation order.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}
  std::uint64_t bits(std::uint64_t counter) const noexcept;
  double uniform(std::uint64_t counter) const noexcept;  // strictly inside (0,1)
  double normal(std::uint64_t counter) const noexcept;   // by inverse CDF

 private:
  std::uint64_t key_;
};

// Sequential view of a Stream for rejection samplers.
class SeqStream {
 public:
  explicit SeqStream(Stream s, std::uint64_t start = 0) : s_(s), c_(start) {}
  double uniform() noexcept { return s_.uniform(c_++); }
  double normal() noexcept { return s_.normal(c_++); }

 private:
  Stream s_;
  std::uint64_t c_;
};

// Deterministic sub-stream keys (seed, lane, index).
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

// Marsaglia-Tsang via the sequential stream; shape < 1 handled by boosting.
double gamma_sample(SeqStream& g, double shape, double scale);

}  // namespace qrep::rng
