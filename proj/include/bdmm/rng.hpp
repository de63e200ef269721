#pragma once

#include <cstdint>
#include <random>

namespace bdmm {

/// Counter-seeded random stream. A stream is identified by (master, id);
/// substreams are derived by mixing a counter into the id, so replicate k of
/// a parallel run draws from stream (master, k) regardless of scheduling.
/// Sequences are deterministic for a fixed build.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master, std::uint64_t stream = 0);

  double uniform();                        // [0, 1)
  double uniform(double a, double b);      // [a, b)
  double normal();                         // standard normal
  double exponential(double rate);         // mean 1/rate
  int uniform_int(int n);                  // {0, ..., n-1}

  RngStream substream(std::uint64_t k) const;

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t master_ = 0;
  std::uint64_t id_ = 0;
  std::mt19937_64 engine_;
};

}  // namespace bdmm
