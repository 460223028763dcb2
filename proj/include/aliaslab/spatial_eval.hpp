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
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "aliaslab/beamforming.hpp"
#include "aliaslab/common.hpp"
#include "aliaslab/geometry.hpp"
#include "aliaslab/parallel.hpp"
#include "aliaslab/scene.hpp"
#include "aliaslab/stft.hpp"
#include "aliaslab/wav.hpp"

namespace aliaslab {

inline constexpr double kBeampatternEpsilon = 1e-10;
inline constexpr double kDefaultSidelobeExclusion = kPi / 12.0;
inline constexpr double kAliasedThresholdDb = -1.0;
inline constexpr double kDegenerateSpreadDb = 1.5;
// Band used for sidelobe statistics. The upper edge stays clear of Nyquist,
// where a real fractional-delay filter cannot hold unit gain.
inline constexpr double kInteriorLowHz = 300.0;
inline constexpr double kInteriorHighHz = 7500.0;

/// Time-averaged output level per (angle, frequency) cell.
struct BeampatternGrid {
  std::vector<double> angles; // ascending, radians
  std::vector<double> freqs;  // Hz
  std::vector<std::vector<double>> amplitude_db; // [angle][freq]
  double look_direction = 0.0;
  double f_alias = 0.0;
  std::string pipeline_label;

  std::size_t num_angles() const { return angles.size(); }
  std::size_t num_freqs() const { return freqs.size(); }

  // Row whose angle is nearest the look direction.
  std::size_t look_index() const {
    require(!angles.empty(), "BeampatternGrid: no angles");
    std::size_t best = 0;
    for (std::size_t i = 1; i < angles.size(); ++i)
      if (wrapped_angle_distance(angles[i], look_direction) < wrapped_angle_distance(angles[best], look_direction))
        best = i;
    return best;
  }

  std::size_t nearest_angle(double theta) const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < angles.size(); ++i)
      if (wrapped_angle_distance(angles[i], theta) < wrapped_angle_distance(angles[best], theta)) best = i;
    return best;
  }

  std::size_t nearest_freq(double f) const {
    require(!freqs.empty(), "BeampatternGrid: no frequencies");
    std::size_t best = 0;
    for (std::size_t k = 1; k < freqs.size(); ++k)
      if (std::abs(freqs[k] - f) < std::abs(freqs[best] - f)) best = k;
    return best;
  }

  void validate() const {
    require(amplitude_db.size() == angles.size(), "BeampatternGrid: row count must equal angle count");
    require(std::is_sorted(angles.begin(), angles.end()), "BeampatternGrid: angles must be sorted ascending");
    for (const auto& row : amplitude_db) {
      require(row.size() == freqs.size(), "BeampatternGrid: ragged grid");
      for (double v : row) require(std::isfinite(v), "BeampatternGrid: non-finite entry");
    }
  }
};

/// Shifts the grid so the look-direction row has a broadband mean of 0 dB.
inline void normalize_to_look(BeampatternGrid& grid) {
  const auto& look = grid.amplitude_db[grid.look_index()];
  double mean = 0.0;
  for (double v : look) mean += v;
  mean /= static_cast<double>(look.size());
  for (auto& row : grid.amplitude_db)
    for (auto& v : row) v -= mean;
}

/// Mean |S(k, l)| over frames [edge, L - edge).
inline std::vector<double> mean_magnitude(const Spectrogram& s, std::size_t edge_frames) {
  require(s.num_channels() == 1, "mean_magnitude: single-channel grid expected");
  std::size_t lo = edge_frames, hi = s.num_frames() > edge_frames ? s.num_frames() - edge_frames : 0;
  if (lo >= hi) {
    lo = 0;
    hi = s.num_frames();
  }
  std::vector<double> out(s.num_bins(), 0.0);
  for (std::size_t k = 0; k < s.num_bins(); ++k) {
    double acc = 0.0;
    for (std::size_t l = lo; l < hi; ++l) acc += std::abs(s(0, k, l));
    out[k] = acc / static_cast<double>(hi - lo);
  }
  return out;
}

/// Builds a normalised grid from one single-channel output per angle. Frames
/// within fft_size/hop of either end are ignored so the onset and the
/// truncated tail of each recording do not bias the averages.
inline BeampatternGrid beampattern_from_spectra(const std::vector<Spectrogram>& outputs,
                                                const std::vector<double>& angles, double look, double f_alias,
                                                std::string label) {
  require(!outputs.empty() && outputs.size() == angles.size(), "beampattern: one output per angle required");
  BeampatternGrid g;
  g.angles = angles;
  g.freqs = outputs.front().freq_axis();
  g.look_direction = look;
  g.f_alias = f_alias;
  g.pipeline_label = std::move(label);
  for (const auto& s : outputs) {
    require(s.num_bins() == g.freqs.size(), "beampattern: outputs differ in bin count");
    const std::size_t edge = s.config().fft_size / s.config().hop;
    auto mag = mean_magnitude(s, edge);
    std::vector<double> row(mag.size());
    for (std::size_t k = 0; k < mag.size(); ++k) row[k] = 20.0 * std::log10(mag[k] + kBeampatternEpsilon);
    g.amplitude_db.push_back(std::move(row));
  }
  normalize_to_look(g);
  g.validate();
  return g;
}

/// Maps a multichannel recording of sweep angle i to a single-channel STFT.
using SweepPipeline = std::function<Spectrogram(const TimeSignal&, std::size_t)>;

/// Runs `pipeline` over every rendered angle of a sweep directory.
inline BeampatternGrid evaluate_beampattern(const SweepPipeline& pipeline, const SweepManifest& sweep,
                                            const std::filesystem::path& sweep_dir, double look, std::string label,
                                            std::size_t workers = 1) {
  require(sweep.wav_paths.size() == sweep.angles.size(), "evaluate_beampattern: sweep has not been rendered");
  std::vector<Spectrogram> outputs(sweep.angles.size());
  parallel_for(sweep.angles.size(), workers, [&](std::size_t i) {
    const auto path = sweep_dir / sweep.wav_paths[i];
    if (!std::filesystem::exists(path)) throw MissingInput("missing sweep audio: " + path.string());
    outputs[i] = pipeline(read_wav(path, sweep.sample_rate), i);
  });
  const double fa = aliasing_frequency(sweep.spacing_d, sweep.speed_of_sound);
  return beampattern_from_spectra(outputs, sweep.angles, look, fa, std::move(label));
}

/// Narrowband response 20 log10 |h(k)^H a(theta, f_k)| on the given angles,
/// normalised like a simulated grid.
inline BeampatternGrid analytic_beampattern(const BeamformerWeights& w, const ArrayGeometry& geom,
                                            const std::vector<double>& angles, double look, std::string label) {
  BeampatternGrid g;
  g.angles = angles;
  g.freqs = w.freqs;
  g.look_direction = look;
  g.f_alias = geom.num_mics() == 2 ? aliasing_frequency(geom.spacing(), geom.speed_of_sound()) : 0.0;
  g.pipeline_label = std::move(label);
  for (double theta : angles) {
    const PlaneWaveDirection dir(theta);
    std::vector<double> row(w.num_bins());
    for (std::size_t k = 0; k < w.num_bins(); ++k)
      row[k] = 20.0 * std::log10(std::abs(narrowband_response(w.weights[k], steering_vector(geom, dir, w.freqs[k]))) +
                                 kBeampatternEpsilon);
    g.amplitude_db.push_back(std::move(row));
  }
  normalize_to_look(g);
  return g;
}

/// Level of every cell relative to the look-direction row at the same bin.
inline std::vector<std::vector<double>> relative_to_look(const BeampatternGrid& g) {
  const auto& look = g.amplitude_db[g.look_index()];
  auto out = g.amplitude_db;
  for (auto& row : out)
    for (std::size_t k = 0; k < row.size(); ++k) row[k] -= look[k];
  return out;
}

/// Largest |a - b| over all angles and bins with f in [f_lo, f_hi], after
/// referencing both grids to their look rows.
inline double max_relative_deviation(const BeampatternGrid& a, const BeampatternGrid& b, double f_lo, double f_hi) {
  require(a.num_angles() == b.num_angles() && a.num_freqs() == b.num_freqs(), "grid shapes differ");
  const auto ra = relative_to_look(a), rb = relative_to_look(b);
  double worst = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i)
    for (std::size_t k = 0; k < a.freqs.size(); ++k)
      if (a.freqs[k] >= f_lo && a.freqs[k] <= f_hi) worst = std::max(worst, std::abs(ra[i][k] - rb[i][k]));
  return worst;
}

// ---------------------------------------------------------------------------
// Sidelobes

struct SidelobeBand {
  bool empty = true;
  double max_sidelobe_db = -std::numeric_limits<double>::infinity(); // relative to look, same bin
  double at_angle = 0.0;
  double at_freq = 0.0;
};

struct SidelobeReport {
  std::string pipeline_label;
  double look_direction = 0.0;
  double f_alias = 0.0;
  double exclusion = kDefaultSidelobeExclusion;
  SidelobeBand below; // 0 < f <= f_alias
  SidelobeBand above; // f > f_alias
  bool aliased = false;
  bool degenerate = false;
};

/// True when `theta` is within `exclusion` of the look direction or of its
/// mirror image -look (a linear array cannot separate the two).
inline bool near_look(double theta, double look, double exclusion) {
  return wrapped_angle_distance(theta, look) <= exclusion + 1e-12 ||
         wrapped_angle_distance(theta, -look) <= exclusion + 1e-12;
}

/// Per band (below and above f_alias, restricted to [f_lo, f_hi]), the largest
/// level relative to the look row outside the exclusion window. `aliased` is
/// set when the above-band maximum comes within 1 dB of the look response;
/// `degenerate` when no bin varies by kDegenerateSpreadDb across angles.
inline SidelobeReport sidelobe_report(const BeampatternGrid& g, double exclusion = kDefaultSidelobeExclusion,
                                      double f_lo = kInteriorLowHz, double f_hi = kInteriorHighHz) {
  g.validate();
  SidelobeReport r;
  r.pipeline_label = g.pipeline_label;
  r.look_direction = g.look_direction;
  r.f_alias = g.f_alias;
  r.exclusion = exclusion;
  const auto rel = relative_to_look(g);
  bool degenerate = true;
  for (std::size_t k = 0; k < g.num_freqs(); ++k) {
    if (g.freqs[k] <= 0.0 || g.freqs[k] < f_lo || g.freqs[k] > f_hi) continue;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < g.num_angles(); ++i) {
      lo = std::min(lo, g.amplitude_db[i][k]);
      hi = std::max(hi, g.amplitude_db[i][k]);
    }
    if (hi - lo >= kDegenerateSpreadDb) degenerate = false;
    auto& band = g.freqs[k] > g.f_alias ? r.above : r.below;
    for (std::size_t i = 0; i < g.num_angles(); ++i) {
      if (near_look(g.angles[i], g.look_direction, exclusion)) continue;
      if (band.empty || rel[i][k] > band.max_sidelobe_db) {
        band.empty = false;
        band.max_sidelobe_db = rel[i][k];
        band.at_angle = g.angles[i];
        band.at_freq = g.freqs[k];
      }
    }
  }
  r.degenerate = degenerate;
  r.aliased = !r.above.empty && r.above.max_sidelobe_db >= kAliasedThresholdDb;
  return r;
}

/// Mean level of each angle row over bins with f in (f_lo, f_hi].
inline std::vector<double> band_mean_db(const BeampatternGrid& g, double f_lo, double f_hi) {
  std::vector<double> out(g.num_angles(), 0.0);
  std::size_t count = 0;
  for (std::size_t k = 0; k < g.num_freqs(); ++k) {
    if (g.freqs[k] <= f_lo || g.freqs[k] > f_hi) continue;
    for (std::size_t i = 0; i < g.num_angles(); ++i) out[i] += g.amplitude_db[i][k];
    ++count;
  }
  require(count > 0, "band_mean_db: no bins in band");
  for (auto& v : out) v /= static_cast<double>(count);
  return out;
}

/// Indices of the entries within `within_db` of the largest entry.
inline std::vector<std::size_t> indices_near_max(const std::vector<double>& levels, double within_db) {
  require(!levels.empty(), "indices_near_max: empty input");
  const double top = *std::max_element(levels.begin(), levels.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i] >= top - within_db) out.push_back(i);
  return out;
}

/// Angles whose mean response over (f_alias, f_hi] is within `within_db` of
/// the strongest angle.
inline std::vector<std::size_t> dominant_angles_above_alias(const BeampatternGrid& g, double within_db = 1.0,
                                                            double f_hi = kInteriorHighHz) {
  return indices_near_max(band_mean_db(g, g.f_alias, f_hi), within_db);
}

inline nlohmann::json to_json(const SidelobeBand& b) {
  nlohmann::json j;
  j["empty"] = b.empty;
  j["max_sidelobe_db"] = b.empty ? nlohmann::json(nullptr) : nlohmann::json(b.max_sidelobe_db);
  j["at_angle_rad"] = b.empty ? nlohmann::json(nullptr) : nlohmann::json(b.at_angle);
  j["at_freq_hz"] = b.empty ? nlohmann::json(nullptr) : nlohmann::json(b.at_freq);
  return j;
}

inline nlohmann::json to_json(const SidelobeReport& r) {
  return {{"pipeline", r.pipeline_label},
          {"look_direction_rad", r.look_direction},
          {"f_alias_hz", r.f_alias},
          {"exclusion_rad", r.exclusion},
          {"below_f_alias", to_json(r.below)},
          {"above_f_alias", to_json(r.above)},
          {"aliased", r.aliased},
          {"degenerate", r.degenerate}};
}

/// Long-form CSV: angle_rad,freq_hz,amplitude_db.
inline std::string grid_to_csv(const BeampatternGrid& g) {
  std::string out = "angle_rad,freq_hz,amplitude_db\n";
  char line[96];
  for (std::size_t i = 0; i < g.num_angles(); ++i)
    for (std::size_t k = 0; k < g.num_freqs(); ++k) {
      std::snprintf(line, sizeof line, "%.6f,%.4f,%.6f\n", g.angles[i], g.freqs[k], g.amplitude_db[i][k]);
      out += line;
    }
  return out;
}

} // namespace aliaslab
