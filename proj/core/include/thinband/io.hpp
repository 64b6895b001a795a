#pragma once

#include "thinband/scalar.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace thinband {

/// FNV-1a hash of a string; used to stamp outputs with the config they came
/// from.
std::uint64_t fnv1a64(const std::string& s);
std::string hash_hex(std::uint64_t h);

/// Deterministic RNG wrapper. mt19937_64 has a pinned algorithm, so the same
/// seed gives the same stream on every platform.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t next() { return eng_(); }
  /// Uniform dyadic in [0,1) with 53 fresh bits.
  Dyadic uniform_dyadic() { return Dyadic(BigInt(eng_() >> 11), -53); }
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    std::uniform_int_distribution<std::int64_t> d(lo, hi);
    return d(eng_);
  }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

/// printf %.17g, enough digits to round-trip a double, deterministic.
std::string format_double(double v);

void write_file(const std::string& path, const std::string& content);

}  // namespace thinband
