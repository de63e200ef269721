#include "bdmm/rng.hpp"

namespace bdmm {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t id) {
  std::uint64_t s = master ^ (0xD1B54A32D192ED03ull * (id + 1));
  std::seed_seq seq{static_cast<unsigned>(splitmix64(s)), static_cast<unsigned>(splitmix64(s)),
                    static_cast<unsigned>(splitmix64(s)), static_cast<unsigned>(splitmix64(s)),
                    static_cast<unsigned>(splitmix64(s)), static_cast<unsigned>(splitmix64(s)),
                    static_cast<unsigned>(splitmix64(s)), static_cast<unsigned>(splitmix64(s))};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t master, std::uint64_t stream)
    : master_(master), id_(stream), engine_(make_engine(master, stream)) {}

double RngStream::uniform() {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  return d(engine_);
}

double RngStream::uniform(double a, double b) {
  std::uniform_real_distribution<double> d(a, b);
  return d(engine_);
}

double RngStream::normal() {
  std::normal_distribution<double> d(0.0, 1.0);
  return d(engine_);
}

double RngStream::exponential(double rate) {
  std::exponential_distribution<double> d(rate);
  return d(engine_);
}

int RngStream::uniform_int(int n) {
  std::uniform_int_distribution<int> d(0, n - 1);
  return d(engine_);
}

RngStream RngStream::substream(std::uint64_t k) const {
  // Mixes the counter into the stream id; the derived stream is independent
  // of this stream's draw position.
  std::uint64_t s = id_ ^ (k + 0x9E3779B97F4A7C15ull);
  return RngStream(master_, splitmix64(s));
}

}  // namespace bdmm
