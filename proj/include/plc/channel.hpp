#pragma once

// Memoryless bit-flip channel; real and imaginary sign bits flip
// independently with probability p.

#include <cstdint>
#include <random>
#include <vector>

#include "plc/core.hpp"
#include "plc/rng.hpp"

namespace plc {

struct ChannelSpec {
  double p = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(p >= 0.0 && p <= 0.5)) throw invalid_argument("flip probability must lie in [0, 0.5]");
  }
};

/// Ground-truth flip indicators: Re(b) = Re(b_received) (1 - 2 re).
struct FlipIndicator {
  bool re = false;
  bool im = false;
  friend bool operator==(FlipIndicator, FlipIndicator) = default;
};

struct CorruptResult {
  SignStream corrupted;
  std::vector<FlipIndicator> flips;
};

inline CorruptResult corrupt(const SignStream& stream, const ChannelSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  CorruptResult out{stream, std::vector<FlipIndicator>(stream.size())};
  for (std::size_t m = 0; m < stream.size(); ++m) {
    // Both draws happen unconditionally so the flip pattern of one axis does
    // not depend on p of the other.
    const bool fr = uni(rng) < spec.p;
    const bool fi = uni(rng) < spec.p;
    out.flips[m] = {fr, fi};
    if (fr) out.corrupted[m].re_positive = !out.corrupted[m].re_positive;
    if (fi) out.corrupted[m].im_positive = !out.corrupted[m].im_positive;
  }
  return out;
}

}  // namespace plc
