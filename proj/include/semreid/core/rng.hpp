#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "semreid/core/tensor.hpp"

namespace semreid {

// Seedable RNG with serializable state so checkpoints can resume bit-exactly.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    // stateless draw: one fresh distribution per call keeps the engine the
    // only carrier of state, which makes serialization exact
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {  // inclusive
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }

  void fill_normal(Tensor& t, double mean, double stddev) {
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = normal(mean, stddev);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void deserialize(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace semreid
