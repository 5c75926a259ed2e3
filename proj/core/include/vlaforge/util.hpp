#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vlaforge {

// 64-bit FNV-1a. Stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex64(std::uint64_t value);

std::uint64_t splitmix64(std::uint64_t x);

// Combines a base seed with a tag so independent streams stay independent
// regardless of evaluation order.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);

// Portable pseudo-random stream (SplitMix64). Distribution helpers are
// implemented here rather than through <random> distributions, whose output
// differs between standard library implementations.
class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double next_unit();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  // Standard normal via Box-Muller.
  double normal();

 private:
  std::uint64_t state_;
};

// Metric tokenization: lowercase, delete punctuation, split on whitespace.
// "front-left" becomes "frontleft".
std::vector<std::string> tokenize(std::string_view text);

// Lexical tokenization: lowercase and treat every non-alphanumeric character
// as a separator. "front-left" becomes {"front", "left"}.
std::vector<std::string> word_tokens(std::string_view text);

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace vlaforge
