#pragma once

// Counter-based standard normal streams.
//
// Draw k of a stream is a pure function of (seed, substream id, k): a
// SplitMix64 finalizer hashes the key and counter into two uniforms, and
// Box-Muller turns them into two normals. No state is shared between
// streams, so parallel workers reproduce serial results exactly.

#include <cmath>
#include <cstdint>

#include "epchiral/model.hpp"

namespace epchiral {

struct SubstreamId {
  Direction direction = Direction::CCW;
  std::uint64_t realization = 0;
  std::uint64_t cell = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t combine(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

/// Uniform in (0, 1) from the top 53 bits.
inline double to_unit_open(std::uint64_t x) { return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53; }

}  // namespace detail

class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, const SubstreamId& id) {
    key_ = detail::combine(detail::splitmix64(seed), id.direction == Direction::CCW ? 1 : 2);
    key_ = detail::combine(key_, id.realization);
    key_ = detail::combine(key_, id.cell);
  }

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = detail::to_unit_open(detail::combine(key_, 2 * counter_));
    const double u2 = detail::to_unit_open(detail::combine(key_, 2 * counter_ + 1));
    ++counter_;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0;
  bool has_spare_ = false;
};

/// Stream for one realization of one direction of one grid cell.
inline GaussianStream gaussian_stream(std::uint64_t seed, const SubstreamId& id) { return {seed, id}; }

}  // namespace epchiral
