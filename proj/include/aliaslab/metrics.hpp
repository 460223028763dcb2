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
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "aliaslab/common.hpp"
#include "aliaslab/signal.hpp"

namespace aliaslab {

inline constexpr double kSiSdrCap = 60.0;

/// Scale-invariant SDR in dB. The estimate is projected onto the reference,
/// s_t = (<e,r>/<r,r>) r, and the result is 10 log10(|s_t|^2 / |e - s_t|^2).
/// A perfect reconstruction is capped at +60 dB; a zero estimate yields -inf.
inline double si_sdr(std::span<const double> estimate, std::span<const double> reference) {
  require(estimate.size() == reference.size(), "si_sdr: estimate and reference lengths differ");
  const double rr = energy(reference);
  if (!(rr > 0.0)) throw InvalidArgument("si_sdr: reference signal is all zeros");
  double er = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) er += estimate[i] * reference[i];
  if (energy(estimate) == 0.0) return -std::numeric_limits<double>::infinity();
  const double alpha = er / rr;
  double target = 0.0, distortion = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double s = alpha * reference[i];
    const double e = estimate[i] - s;
    target += s * s;
    distortion += e * e;
  }
  if (distortion <= 0.0) return kSiSdrCap;
  if (target <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::min(kSiSdrCap, db_from_power(target / distortion));
}

/// Segmental SNR: per-frame SNR over non-overlapping frames, each clamped to
/// [-10, 35] dB, averaged. Frames where the reference is silent are skipped.
inline double seg_snr(std::span<const double> estimate, std::span<const double> reference,
                      std::size_t frame_length = 256) {
  require(estimate.size() == reference.size(), "seg_snr: estimate and reference lengths differ");
  require(frame_length > 0, "seg_snr: frame length must be positive");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start + frame_length <= reference.size(); start += frame_length) {
    double sig = 0.0, err = 0.0;
    for (std::size_t i = start; i < start + frame_length; ++i) {
      sig += reference[i] * reference[i];
      const double e = reference[i] - estimate[i];
      err += e * e;
    }
    if (sig <= 0.0) continue;
    const double snr = err > 0.0 ? db_from_power(sig / err) : 35.0;
    sum += std::clamp(snr, -10.0, 35.0);
    ++count;
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

struct MetricsReport {
  std::string scene_id;
  std::string pipeline_label;
  double si_sdr_db = 0.0;
  double noisy_si_sdr_db = 0.0;
  double delta_si_sdr_db = 0.0;
  double seg_snr_db = 0.0;
};

/// Scores an enhanced signal against the reference, and the noisy reference
/// microphone signal against the same reference; signals are truncated to the
/// shortest length.
inline MetricsReport evaluate_signals(std::span<const double> enhanced, std::span<const double> noisy,
                                      std::span<const double> reference, std::string scene_id, std::string label) {
  const std::size_t n = std::min({enhanced.size(), noisy.size(), reference.size()});
  require(n > 0, "evaluate_signals: empty signal");
  MetricsReport r;
  r.scene_id = std::move(scene_id);
  r.pipeline_label = std::move(label);
  r.si_sdr_db = si_sdr(enhanced.first(n), reference.first(n));
  r.noisy_si_sdr_db = si_sdr(noisy.first(n), reference.first(n));
  r.delta_si_sdr_db = r.si_sdr_db - r.noisy_si_sdr_db;
  r.seg_snr_db = seg_snr(enhanced.first(n), reference.first(n));
  return r;
}

struct MeanWithCi {
  double mean = 0.0;
  double ci95 = 0.0; // half-width: 1.96 sigma / sqrt(n)
  std::size_t n = 0;
};

inline MeanWithCi mean_ci95(std::span<const double> values) {
  MeanWithCi out;
  out.n = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double sigma = std::sqrt(ss / static_cast<double>(values.size() - 1));
  out.ci95 = 1.96 * sigma / std::sqrt(static_cast<double>(values.size()));
  return out;
}

} // namespace aliaslab
