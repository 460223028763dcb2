// SPDX-License-Identifier: Apache-2.0
//
// aliaslab - microphone-array spatial aliasing laboratory
// Copyright (C) 2026 The aliaslab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <vector>

#include "aliaslab/common.hpp"
#include "aliaslab/stft.hpp"

// Single-channel tempo-spectral post-filter. The gain is an oracle Wiener
// gain computed from the beamformed target and beamformed residual; it is a
// stand-in for a trained post-filter network.

namespace aliaslab {

inline constexpr double kDefaultGainFloor = 0.1; // -20 dB
inline constexpr double kWienerEpsilon = 1e-12;

struct GainGrid {
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<double> gains;

  double operator()(std::size_t k, std::size_t l) const { return gains[k * frames + l]; }
  double& operator()(std::size_t k, std::size_t l) { return gains[k * frames + l]; }
};

/// g = |S|^2 / (|S|^2 + |V|^2 + eps), clamped to [floor, 1].
inline GainGrid oracle_wiener_gain(const Spectrogram& target_ref, const Spectrogram& residual,
                                   double gain_floor = kDefaultGainFloor) {
  require(target_ref.same_shape(residual), "oracle_wiener_gain: target and residual grids differ in shape");
  require(target_ref.num_channels() == 1, "oracle_wiener_gain: single-channel grids expected");
  require(gain_floor >= 0.0 && gain_floor <= 1.0, "oracle_wiener_gain: gain floor must lie in [0, 1]");
  GainGrid g{target_ref.num_bins(), target_ref.num_frames(), {}};
  g.gains.resize(g.bins * g.frames);
  for (std::size_t k = 0; k < g.bins; ++k)
    for (std::size_t l = 0; l < g.frames; ++l) {
      const double ps = std::norm(target_ref(0, k, l));
      const double pv = std::norm(residual(0, k, l));
      g(k, l) = std::clamp(ps / (ps + pv + kWienerEpsilon), gain_floor, 1.0);
    }
  return g;
}

inline Spectrogram apply_gain(const Spectrogram& spec, const GainGrid& gains) {
  require(gains.bins == spec.num_bins() && gains.frames == spec.num_frames(), "apply_gain: shape mismatch");
  Spectrogram out = spec;
  for (std::size_t m = 0; m < spec.num_channels(); ++m)
    for (std::size_t k = 0; k < spec.num_bins(); ++k)
      for (std::size_t l = 0; l < spec.num_frames(); ++l) out(m, k, l) *= gains(k, l);
  return out;
}

} // namespace aliaslab
