#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace vcl {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (dataset files, manifests).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or argument combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Lexing or parsing failure; carries the 1-based source line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Failure talking to an external model process.
class BridgeError : public Error {
 public:
  using Error::Error;
};

/// Requested capability is not offered (e.g. snapshot on an external model).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// mt19937_64 is fully specified by the standard, unlike the std distributions
// and std::shuffle, so every draw below is reproducible across toolchains.
using Rng = std::mt19937_64;

/// Uniform integer in [0, bound) by rejection sampling. bound must be > 0.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

/// Uniform real in [0, 1) with 53 bits of precision.
double uniform_unit(Rng& rng);

/// Fisher-Yates shuffle driven by uniform_below.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

/// Independent stream seed derived from a base seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t value);

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Exceptions from
/// the body are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& body);

/// Number of worker threads to use when the caller does not specify one.
std::size_t default_jobs();

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

std::string trim(std::string_view text);

}  // namespace vcl
