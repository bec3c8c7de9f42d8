#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ranklab {

/// Reproducible random stream keyed by (seed, stream id).
///
/// Only the engine (std::mt19937_64, fully specified by the standard) is
/// taken from the library; every transform to a continuous variate is done
/// here so that sequences are identical across standard library vendors.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  /// Stream keyed by a seed and a path of ids, e.g. {p, replicate, purpose}.
  static RngStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double exponential(double mean);
  bool bernoulli(double prob) { return uniform() < prob; }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ranklab
