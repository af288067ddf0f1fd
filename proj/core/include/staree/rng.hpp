#pragma once

#include <complex>
#include <cstdint>
#include <string_view>

namespace staree {

/// Counter-based generator with named streams. Every draw is a pure
/// function of (seed, stream label, counter), so reproducibility does not
/// depend on the order in which unrelated matrices are filled, and state
/// never leaks between streams.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::string_view label);

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in (0, 1]; safe as a log() argument.
  double uniform_open();
  /// Standard real normal N(0, 1).
  double normal();
  /// Circularly-symmetric complex normal with E|z|^2 = 1.
  std::complex<double> cnormal();

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace staree
