#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rcb {

// Seed for an independent stream keyed by (master seed, index, purpose tag).
// Mixing is splitmix64-based so derived seeds are platform independent.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::string_view tag);

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t master, std::uint64_t index, std::string_view tag)
      : engine_(derive_seed(master, index, tag)) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rcb
