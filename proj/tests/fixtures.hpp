#pragma once

#include <random>

#include "irssec/channel.hpp"
#include "test_util.hpp"

namespace irssec::testing {

/// i.i.d. Rayleigh channel set with unit-variance links scaled by
/// `direct` (Alice links) and `cascade` (Alice-Rose and Rose links).
inline ChannelSet random_channels(int M, int N, int K, std::mt19937_64& gen, double direct = 1.0,
                                  double cascade = 1.0) {
  ChannelSet s;
  s.H_ar = cascade * random_complex(N, M, gen) * std::sqrt(0.5);
  s.h_ab = direct * random_vector(M, gen) * std::sqrt(0.5);
  s.h_rb = cascade * random_vector(N, gen) * std::sqrt(0.5);
  for (int k = 0; k < K; ++k) {
    s.h_ae.push_back(direct * random_vector(M, gen) * std::sqrt(0.5));
    s.h_re.push_back(cascade * random_vector(N, gen) * std::sqrt(0.5));
  }
  assemble_all(s);
  return s;
}

}  // namespace irssec::testing
