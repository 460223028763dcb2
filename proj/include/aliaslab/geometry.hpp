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
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "aliaslab/common.hpp"

namespace aliaslab {

using Point3 = Eigen::Vector3d;

/// Far-field direction of arrival, measured from the array axis. Linear
/// arrays cannot tell theta from -theta, so the angle is folded into [0, pi].
class PlaneWaveDirection {
 public:
  explicit PlaneWaveDirection(double theta) {
    require(std::isfinite(theta), "PlaneWaveDirection: angle must be finite");
    theta_ = std::acos(std::clamp(std::cos(theta), -1.0, 1.0));
  }
  double theta() const { return theta_; }

 private:
  double theta_ = 0.0;
};

/// Microphone positions in the array's local frame. Microphone 0 is the
/// reference and sits at the origin. The array axis points from microphone 1
/// towards microphone 0, so a source at theta = 0 reaches microphone 0 first.
class ArrayGeometry {
 public:
  ArrayGeometry(std::vector<Point3> positions, double speed_of_sound = kDefaultSpeedOfSound)
      : positions_(std::move(positions)), c_(speed_of_sound) {
    require(!positions_.empty(), "ArrayGeometry: at least one microphone required");
    require(c_ > 0.0, "ArrayGeometry: speed of sound must be positive");
    for (std::size_t i = 0; i < positions_.size(); ++i)
      for (std::size_t j = i + 1; j < positions_.size(); ++j)
        require((positions_[i] - positions_[j]).norm() > 0.0, "ArrayGeometry: microphone positions must be distinct");
  }

  /// Uniform linear array on the x axis: mic m at (-m*d, 0, 0).
  static ArrayGeometry linear(std::size_t num_mics, double spacing, double speed_of_sound = kDefaultSpeedOfSound) {
    require(num_mics >= 1, "ArrayGeometry::linear: need at least one microphone");
    require(num_mics == 1 || spacing > 0.0, "ArrayGeometry::linear: spacing must be positive");
    std::vector<Point3> p;
    for (std::size_t m = 0; m < num_mics; ++m) p.emplace_back(-static_cast<double>(m) * spacing, 0.0, 0.0);
    return ArrayGeometry(std::move(p), speed_of_sound);
  }

  std::size_t num_mics() const { return positions_.size(); }
  double speed_of_sound() const { return c_; }
  const std::vector<Point3>& positions() const { return positions_; }

  double distance(std::size_t i, std::size_t j) const { return (positions_.at(i) - positions_.at(j)).norm(); }

  // Pairwise spacing d; defined for two-microphone arrays.
  double spacing() const {
    require(num_mics() == 2, "ArrayGeometry::spacing: defined only for two-microphone arrays");
    return distance(0, 1);
  }

  Point3 axis() const {
    if (num_mics() < 2) return Point3::UnitX();
    return (positions_[0] - positions_[1]).normalized();
  }

  // Horizontal unit vector perpendicular to the axis (theta = pi/2).
  Point3 broadside() const {
    Point3 b = Point3::UnitZ().cross(axis());
    if (b.norm() < 1e-12) b = Point3::UnitY();
    return b.normalized();
  }

  // Unit vector from the array towards a source at angle theta (unfolded).
  Point3 direction(double theta) const { return std::cos(theta) * axis() + std::sin(theta) * broadside(); }

  Point3 centroid() const {
    Point3 c = Point3::Zero();
    for (const auto& p : positions_) c += p;
    return c / static_cast<double>(positions_.size());
  }

  /// World coordinates after centring the array on `center` and rotating it
  /// by `rotation` radians about the vertical axis.
  std::vector<Point3> placed(const Point3& center, double rotation) const {
    const Eigen::Matrix3d r = Eigen::AngleAxisd(rotation, Point3::UnitZ()).toRotationMatrix();
    const Point3 c0 = centroid();
    std::vector<Point3> out;
    for (const auto& p : positions_) out.push_back(center + r * (p - c0));
    return out;
  }

 private:
  std::vector<Point3> positions_;
  double c_;
};

struct SteeringVector {
  double freq = 0.0;                           // Hz
  std::vector<double> tdoas;                   // s, relative to mic 0
  std::vector<double> path_diffs;              // m
  std::vector<double> phases;                  // rad, 2 pi f tdoa
  std::vector<std::complex<double>> values;    // exp(-j phase)
};

struct AliasingReport {
  double f_max = 0.0;
  double lambda_min = 0.0;
  double f_alias = 0.0;
  bool aliasing_in_band = false;
};

/// Far-field TDOA of microphone `mic` relative to microphone 0. Positive
/// means the wavefront reaches `mic` later.
inline double tdoa(const ArrayGeometry& geom, const PlaneWaveDirection& dir, std::size_t mic) {
  require(mic < geom.num_mics(), "tdoa: microphone index out of range");
  const Point3 u = geom.direction(dir.theta());
  return (geom.positions()[0] - geom.positions()[mic]).dot(u) / geom.speed_of_sound();
}

inline SteeringVector steering_vector(const ArrayGeometry& geom, const PlaneWaveDirection& dir, double freq) {
  require(freq >= 0.0 && std::isfinite(freq), "steering_vector: frequency must be non-negative");
  SteeringVector sv;
  sv.freq = freq;
  const auto m_count = geom.num_mics();
  sv.tdoas.resize(m_count);
  sv.path_diffs.resize(m_count);
  sv.phases.resize(m_count);
  sv.values.resize(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    sv.tdoas[m] = tdoa(geom, dir, m);
    sv.path_diffs[m] = sv.tdoas[m] * geom.speed_of_sound();
    sv.phases[m] = kTwoPi * freq * sv.tdoas[m];
    sv.values[m] = m == 0 ? std::complex<double>(1.0, 0.0) : std::polar(1.0, -sv.phases[m]);
  }
  return sv;
}

inline AliasingReport aliasing_report(const ArrayGeometry& geom, double f_max) {
  require(f_max > 0.0, "aliasing_report: f_max must be positive");
  const double d = geom.spacing();
  require(d > 0.0, "aliasing_report: spacing must be positive");
  AliasingReport r;
  r.f_max = f_max;
  r.lambda_min = geom.speed_of_sound() / f_max;
  r.f_alias = geom.speed_of_sound() / (2.0 * d);
  r.aliasing_in_band = r.f_alias < f_max;
  return r;
}

inline double aliasing_frequency(double spacing, double speed_of_sound = kDefaultSpeedOfSound) {
  require(spacing > 0.0, "aliasing_frequency: spacing must be positive");
  return speed_of_sound / (2.0 * spacing);
}

/// Angles in [0, pi] other than the look direction whose two-microphone
/// phase difference equals the look direction's modulo 2 pi. Sorted ascending.
inline std::vector<double> grating_lobe_angles(const ArrayGeometry& geom, const PlaneWaveDirection& look, double freq) {
  require(freq > 0.0, "grating_lobe_angles: frequency must be positive");
  const double d = geom.spacing();
  const double step = geom.speed_of_sound() / (freq * d); // change of cos(theta) per 2 pi of phase
  const double c0 = std::cos(look.theta());
  std::vector<double> out;
  for (int n = 1; static_cast<double>(n) * step <= 2.0; ++n)
    for (int sign : {-1, 1}) {
      const double v = c0 + sign * n * step;
      if (v >= -1.0 && v <= 1.0) out.push_back(std::acos(v));
    }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace aliaslab
