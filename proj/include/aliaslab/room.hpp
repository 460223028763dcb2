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

#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <vector>

#include "aliaslab/common.hpp"
#include "aliaslab/geometry.hpp"
#include "aliaslab/random.hpp"
#include "aliaslab/signal.hpp"

namespace aliaslab {

/// Shoebox room with one corner at the origin: x in [0, width], y in
/// [0, length], z in [0, height].
struct RoomSpec {
  double width = 4.5;
  double length = 6.0;
  double height = 2.85;
  double t60 = 0.35;
  bool anechoic = false;

  double volume() const { return width * length * height; }
  double surface_area() const { return 2.0 * (width * length + width * height + length * height); }

  bool contains(const Point3& p, double margin = 0.0) const {
    return p.x() > margin && p.x() < width - margin && p.y() > margin && p.y() < length - margin &&
           p.z() > margin && p.z() < height - margin;
  }

  bool operator==(const RoomSpec&) const = default;
};

enum class PlacementKind { Target, Interferer, ArrayCenter };

struct Placement {
  Point3 position = Point3::Zero();
  PlacementKind kind = PlacementKind::Target;
};

struct Rir {
  std::vector<double> taps;
  double sample_rate = kDefaultSampleRate;
  std::size_t direct_path_delay = 0; // samples
};

/// Uniform wall absorption that realises the requested T60 under Sabine's
/// formula, alpha = 0.161 V / (S T60), clamped to (0, 1].
inline double sabine_absorption(const RoomSpec& room) {
  require(!room.anechoic, "sabine_absorption: room is anechoic");
  require(room.t60 > 0.0, "sabine_absorption: t60 must be positive");
  const double alpha = 0.161 * room.volume() / (room.surface_area() * room.t60);
  if (alpha > 1.0) {
    std::clog << "aliaslab: warning: Sabine absorption " << alpha << " exceeds 1 for T60 " << room.t60
              << " s; clamped to 1\n";
    return 1.0;
  }
  return alpha;
}

// Reflection order whose images reach a distance of c * T60, capped at 40.
inline int default_max_order(const RoomSpec& room, double speed_of_sound = kDefaultSpeedOfSound) {
  if (room.anechoic) return 0;
  const double min_dim = std::min({room.width, room.length, room.height});
  const double order = std::ceil(speed_of_sound * room.t60 / min_dim);
  return static_cast<int>(std::min(40.0, std::max(1.0, order)));
}

struct RirOptions {
  double sample_rate = kDefaultSampleRate;
  double speed_of_sound = kDefaultSpeedOfSound;
  std::optional<int> max_order; // default_max_order() when empty
  // Band-limited sub-sample tap placement instead of nearest-sample rounding.
  bool fractional_delay = false;
};

inline constexpr int kFractionalDelayHalfLength = 64;
inline constexpr double kFractionalDelayKaiserBeta = 8.0;

/// Adds `amplitude` delayed by `delay` samples into `taps`. With `fractional`
/// the impulse is a Kaiser-windowed sinc spanning +-64 samples around the
/// delay; taps that would fall before t = 0 are dropped.
inline void place_tap(std::vector<double>& taps, double delay, double amplitude, bool fractional) {
  if (!fractional) {
    const auto n = static_cast<std::size_t>(std::lround(delay));
    if (taps.size() <= n) taps.resize(n + 1, 0.0);
    taps[n] += amplitude;
    return;
  }
  const auto centre = static_cast<long>(std::lround(delay));
  const long last = centre + kFractionalDelayHalfLength;
  if (static_cast<long>(taps.size()) <= last) taps.resize(static_cast<std::size_t>(last + 1), 0.0);
  const double half = kFractionalDelayHalfLength + 1.0;
  const double norm = std::cyl_bessel_i(0.0, kFractionalDelayKaiserBeta);
  for (long n = std::max(0L, centre - kFractionalDelayHalfLength); n <= last; ++n) {
    const double t = static_cast<double>(n) - delay;
    const double u = std::clamp(1.0 - (t / half) * (t / half), 0.0, 1.0);
    const double w = std::cyl_bessel_i(0.0, kFractionalDelayKaiserBeta * std::sqrt(u)) / norm;
    const double sinc = std::abs(t) < 1e-12 ? 1.0 : std::sin(kPi * t) / (kPi * t);
    taps[static_cast<std::size_t>(n)] += amplitude * sinc * w;
  }
}

/// Image-source impulse response from `source` to one microphone. Taps land
/// on the nearest integer sample unless opt.fractional_delay is set; each
/// image contributes
/// beta^reflections / (4 pi r) with beta = sqrt(1 - alpha).
inline Rir simulate_rir(const RoomSpec& room, const Point3& source, const Point3& mic, const RirOptions& opt = {}) {
  require(room.width > 0 && room.length > 0 && room.height > 0, "simulate_rir: room dimensions must be positive");
  if (!room.contains(source)) throw InvalidArgument("simulate_rir: source placement lies outside the room");
  if (!room.contains(mic)) throw InvalidArgument("simulate_rir: microphone placement lies outside the room");

  const double fs = opt.sample_rate;
  const double c = opt.speed_of_sound;
  const int max_order = room.anechoic ? 0 : opt.max_order.value_or(default_max_order(room, c));
  require(max_order >= 0, "simulate_rir: max_order must be non-negative");

  Rir rir;
  rir.sample_rate = fs;
  const double direct = (source - mic).norm();
  rir.direct_path_delay = static_cast<std::size_t>(std::lround(direct / c * fs));

  if (max_order == 0) {
    place_tap(rir.taps, direct / c * fs, 1.0 / (4.0 * kPi * direct), opt.fractional_delay);
    return rir;
  }

  const double beta = std::sqrt(1.0 - sabine_absorption(room));
  const std::array<double, 3> dims{room.width, room.length, room.height};
  const std::array<double, 3> src{source.x(), source.y(), source.z()};
  const std::array<double, 3> rcv{mic.x(), mic.y(), mic.z()};

  // Along one axis, image (n, q) sits at (1 - 2q) * s + 2 n L and has
  // |2n - q| wall reflections.
  auto axis_terms = [&](int axis) {
    struct Term {
      double offset;
      int reflections;
    };
    std::vector<Term> terms;
    for (int n = -max_order; n <= max_order; ++n)
      for (int q = 0; q <= 1; ++q) {
        const int refl = std::abs(2 * n - q);
        if (refl > max_order) continue;
        const double image = (1 - 2 * q) * src[axis] + 2.0 * n * dims[axis];
        terms.push_back({image - rcv[axis], refl});
      }
    return terms;
  };
  const auto tx = axis_terms(0), ty = axis_terms(1), tz = axis_terms(2);

  for (const auto& a : tx)
    for (const auto& b : ty) {
      if (a.reflections + b.reflections > max_order) continue;
      for (const auto& e : tz) {
        const int order = a.reflections + b.reflections + e.reflections;
        if (order > max_order) continue;
        const double r = std::sqrt(a.offset * a.offset + b.offset * b.offset + e.offset * e.offset);
        place_tap(rir.taps, r / c * fs, std::pow(beta, order) / (4.0 * kPi * r), opt.fractional_delay);
      }
    }
  return rir;
}

/// One RIR per microphone.
inline std::vector<Rir> simulate_rirs(const RoomSpec& room, const Point3& source, const std::vector<Point3>& mics,
                                      const RirOptions& opt = {}) {
  std::vector<Rir> out;
  out.reserve(mics.size());
  for (const auto& m : mics) out.push_back(simulate_rir(room, source, m, opt));
  return out;
}

/// Convolves a mono dry signal with per-microphone RIRs; the result is
/// truncated (or zero-extended) to `length` samples.
inline TimeSignal render_image(std::span<const double> dry, const std::vector<Rir>& rirs, double sample_rate,
                               std::size_t length) {
  require(!rirs.empty(), "render_image: no RIRs");
  std::vector<std::vector<double>> ch;
  for (const auto& rir : rirs) {
    auto y = convolve(dry, rir.taps);
    y.resize(length, 0.0);
    ch.push_back(std::move(y));
  }
  return TimeSignal(std::move(ch), sample_rate);
}

inline constexpr double kMutedSir = std::numeric_limits<double>::infinity();
inline constexpr double kNoSensorNoise = std::numeric_limits<double>::infinity();

struct MixedScene {
  TimeSignal mixture;          // target_image + interferer_image + sensor_noise
  TimeSignal target_image;     // unit reference level
  TimeSignal interferer_image; // after SIR scaling
  TimeSignal sensor_noise;
  double interferer_gain = 0.0;
};

/// Realises y = x + n in the time domain. Source 0 is the target; all others
/// are interferers, scaled jointly so that the target-to-interferer power
/// ratio at microphone 0 equals sir_db. White sensor noise sits
/// sensor_noise_db below the target image power at microphone 0. Pass
/// kMutedSir / kNoSensorNoise to disable either component. The output length
/// equals the target's dry length.
inline MixedScene mix_scene(const std::vector<TimeSignal>& dry_sources, const std::vector<std::vector<Rir>>& rirs,
                            double sir_db, double sensor_noise_db, std::uint64_t noise_seed) {
  require(!dry_sources.empty(), "mix_scene: need at least a target source");
  require(rirs.size() == dry_sources.size(), "mix_scene: one RIR set per source required");
  const std::size_t mics = rirs.front().size();
  for (const auto& set : rirs) require(set.size() == mics && mics > 0, "mix_scene: one RIR per source per mic required");
  for (const auto& s : dry_sources) require(s.num_channels() == 1, "mix_scene: dry sources must be mono");

  const double fs = dry_sources.front().sample_rate();
  const std::size_t len = dry_sources.front().num_samples();

  MixedScene out;
  out.target_image = render_image(dry_sources.front().channel(0), rirs.front(), fs, len);
  const double target_power = mean_power(out.target_image.channel(0));
  if (!(target_power > 0.0)) throw InvalidArgument("mix_scene: target source is silent at the reference microphone");

  out.interferer_image = TimeSignal::zeros(mics, len, fs);
  const bool muted = std::isinf(sir_db) && sir_db > 0.0;
  if (!muted && dry_sources.size() > 1) {
    for (std::size_t s = 1; s < dry_sources.size(); ++s) {
      const auto img = render_image(dry_sources[s].channel(0), rirs[s], fs, len);
      for (std::size_t m = 0; m < mics; ++m)
        for (std::size_t t = 0; t < len; ++t) out.interferer_image.channel(m)[t] += img.channel(m)[t];
    }
    const double interferer_power = mean_power(out.interferer_image.channel(0));
    if (!(interferer_power > 0.0))
      throw InvalidArgument("mix_scene: interfering source is silent at the reference microphone");
    out.interferer_gain = std::sqrt(target_power / (interferer_power * std::pow(10.0, sir_db / 10.0)));
    for (std::size_t m = 0; m < mics; ++m)
      for (auto& v : out.interferer_image.channel(m)) v *= out.interferer_gain;
  }

  out.sensor_noise = TimeSignal::zeros(mics, len, fs);
  if (!(std::isinf(sensor_noise_db) && sensor_noise_db > 0.0)) {
    Rng rng(noise_seed);
    const double stddev = std::sqrt(target_power * std::pow(10.0, -sensor_noise_db / 10.0));
    for (std::size_t m = 0; m < mics; ++m)
      for (auto& v : out.sensor_noise.channel(m)) v = stddev * rng.normal();
  }

  out.mixture = TimeSignal::zeros(mics, len, fs);
  for (std::size_t m = 0; m < mics; ++m)
    for (std::size_t t = 0; t < len; ++t)
      out.mixture.channel(m)[t] =
          out.target_image.channel(m)[t] + out.interferer_image.channel(m)[t] + out.sensor_noise.channel(m)[t];
  return out;
}

} // namespace aliaslab
