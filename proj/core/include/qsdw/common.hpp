#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qsdw {

// Invalid configuration or violated precondition. CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown: overflow, NaN, or a fixed point that did not converge.
// CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// FNV-1a 64-bit, used to fingerprint resolved configurations.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace qsdw
