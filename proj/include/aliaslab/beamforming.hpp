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

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <json.hpp>

#include "aliaslab/common.hpp"
#include "aliaslab/geometry.hpp"
#include "aliaslab/stft.hpp"

namespace aliaslab {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kDefaultLoading = 1e-3;
inline constexpr double kIrmEpsilon = 1e-12;

/// Noise spatial covariance matrices, one Hermitian M x M matrix per bin.
struct NoiseScm {
  std::vector<CMatrix> matrices;
  std::vector<double> freqs;
  double loading = kDefaultLoading;
  // Bins whose mask row was all zero and that fell back to the diffuse model.
  std::vector<std::size_t> fallback_bins;

  std::size_t num_bins() const { return matrices.size(); }
};

/// Real-valued time-frequency mask [K x L], values in [0, 1].
struct Mask {
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<double> values;

  double operator()(std::size_t k, std::size_t l) const { return values[k * frames + l]; }
  double& operator()(std::size_t k, std::size_t l) { return values[k * frames + l]; }
};

struct BeamformerWeights {
  std::vector<double> freqs;
  std::vector<CVector> weights; // h(k), length M each

  std::size_t num_bins() const { return weights.size(); }
};

// Phi <- Phi + loading * trace(Phi)/M * I
inline void apply_diagonal_loading(CMatrix& phi, double loading) {
  const auto m = static_cast<double>(phi.rows());
  const double level = loading * phi.trace().real() / m;
  phi.diagonal().array() += level;
}

inline double sinc_unnormalized(double x) { return std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x; }

/// Spherically isotropic (diffuse) coherence before loading:
/// Gamma_ij(f) = sin(2 pi f d_ij / c) / (2 pi f d_ij / c).
inline CMatrix diffuse_coherence(const ArrayGeometry& geom, double freq) {
  const auto m = static_cast<Eigen::Index>(geom.num_mics());
  CMatrix g(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const double dij = geom.distance(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      g(i, j) = sinc_unnormalized(kTwoPi * freq * dij / geom.speed_of_sound());
    }
  return g;
}

inline NoiseScm diffuse_scm(const ArrayGeometry& geom, const std::vector<double>& freq_axis,
                            double loading = kDefaultLoading) {
  require(geom.num_mics() >= 2, "diffuse_scm: need at least two microphones");
  NoiseScm scm;
  scm.loading = loading;
  scm.freqs = freq_axis;
  for (double f : freq_axis) {
    CMatrix g = diffuse_coherence(geom, f);
    apply_diagonal_loading(g, loading);
    scm.matrices.push_back(std::move(g));
  }
  return scm;
}

/// Oracle noise mask at the reference microphone, defined on power:
/// m = |N|^2 / (|X|^2 + |N|^2 + eps).
inline Mask irm_mask(const Spectrogram& target_image, const Spectrogram& noise_image, std::size_t ref_mic = 0) {
  require(target_image.same_shape(noise_image), "irm_mask: target and noise grids differ in shape");
  require(ref_mic < target_image.num_channels(), "irm_mask: reference microphone out of range");
  Mask mask{target_image.num_bins(), target_image.num_frames(), {}};
  mask.values.resize(mask.bins * mask.frames);
  for (std::size_t k = 0; k < mask.bins; ++k)
    for (std::size_t l = 0; l < mask.frames; ++l) {
      const double px = std::norm(target_image(ref_mic, k, l));
      const double pn = std::norm(noise_image(ref_mic, k, l));
      mask(k, l) = pn / (px + pn + kIrmEpsilon);
    }
  return mask;
}

/// Mask-weighted, utterance-level SCM:
/// Phi(k) = sum_l m(k,l) Y(k,l) Y(k,l)^H / sum_l m(k,l), then loaded.
/// A bin with an all-zero mask row falls back to the diffuse model.
inline NoiseScm masked_scm(const Spectrogram& noisy, const Mask& mask, const ArrayGeometry& geom,
                           double loading = kDefaultLoading) {
  require(mask.bins == noisy.num_bins() && mask.frames == noisy.num_frames(), "masked_scm: mask shape mismatch");
  require(geom.num_mics() == noisy.num_channels(), "masked_scm: geometry and grid channel counts differ");
  const auto m = static_cast<Eigen::Index>(noisy.num_channels());
  NoiseScm scm;
  scm.loading = loading;
  scm.freqs = noisy.freq_axis();
  CVector y(m);
  for (std::size_t k = 0; k < noisy.num_bins(); ++k) {
    CMatrix phi = CMatrix::Zero(m, m);
    double weight = 0.0;
    for (std::size_t l = 0; l < noisy.num_frames(); ++l) {
      const double w = mask(k, l);
      if (w == 0.0) continue;
      for (Eigen::Index i = 0; i < m; ++i) y(i) = noisy(static_cast<std::size_t>(i), k, l);
      phi.noalias() += w * (y * y.adjoint());
      weight += w;
    }
    if (weight > 0.0) {
      phi /= weight;
      phi = 0.5 * (phi + phi.adjoint()).eval();
    } else {
      phi = diffuse_coherence(geom, scm.freqs[k]);
      scm.fallback_bins.push_back(k);
    }
    apply_diagonal_loading(phi, loading);
    scm.matrices.push_back(std::move(phi));
  }
  return scm;
}

inline CVector to_cvector(const SteeringVector& sv) {
  CVector a(static_cast<Eigen::Index>(sv.values.size()));
  for (std::size_t i = 0; i < sv.values.size(); ++i) a(static_cast<Eigen::Index>(i)) = sv.values[i];
  return a;
}

/// Distortionless weights for one bin: h = Phi^-1 a / (a^H Phi^-1 a).
inline CVector mvdr_weights(const CMatrix& phi, const CVector& a) {
  require(phi.rows() == phi.cols() && phi.rows() == a.size(), "mvdr_weights: dimension mismatch");
  Eigen::LLT<CMatrix> llt(phi);
  if (llt.info() != Eigen::Success) throw NumericalError("mvdr_weights: noise SCM is not positive definite");
  const CVector phi_inv_a = llt.solve(a);
  const std::complex<double> denom = a.dot(phi_inv_a); // a^H Phi^-1 a
  if (!(std::abs(denom) > 0.0) || !std::isfinite(std::abs(denom)))
    throw NumericalError("mvdr_weights: degenerate normalisation a^H Phi^-1 a");
  return phi_inv_a / denom.real();
}

inline BeamformerWeights mvdr_weights(const NoiseScm& scm, const std::vector<SteeringVector>& steering) {
  require(scm.num_bins() == steering.size(), "mvdr_weights: one steering vector per bin required");
  BeamformerWeights w;
  w.freqs = scm.freqs;
  w.weights.reserve(scm.num_bins());
  for (std::size_t k = 0; k < scm.num_bins(); ++k) w.weights.push_back(mvdr_weights(scm.matrices[k], to_cvector(steering[k])));
  return w;
}

inline std::vector<SteeringVector> steering_vectors(const ArrayGeometry& geom, const PlaneWaveDirection& dir,
                                                    const std::vector<double>& freq_axis) {
  std::vector<SteeringVector> out;
  out.reserve(freq_axis.size());
  for (double f : freq_axis) out.push_back(steering_vector(geom, dir, f));
  return out;
}

/// Single-channel output S(k,l) = h(k)^H Y(k,l).
inline Spectrogram apply_beamformer(const BeamformerWeights& weights, const Spectrogram& noisy) {
  require(weights.num_bins() == noisy.num_bins(), "apply_beamformer: bin count mismatch");
  for (const auto& h : weights.weights)
    require(static_cast<std::size_t>(h.size()) == noisy.num_channels(), "apply_beamformer: channel count mismatch");
  Spectrogram out(1, noisy.num_frames(), noisy.config(), noisy.sample_rate(), noisy.num_samples());
  for (std::size_t k = 0; k < noisy.num_bins(); ++k) {
    const auto& h = weights.weights[k];
    for (std::size_t l = 0; l < noisy.num_frames(); ++l) {
      std::complex<double> acc = 0.0;
      for (std::size_t m = 0; m < noisy.num_channels(); ++m)
        acc += std::conj(h(static_cast<Eigen::Index>(m))) * noisy(m, k, l);
      out(0, k, l) = acc;
    }
  }
  return out;
}

/// Narrowband response h(k)^H a(theta, f_k).
inline std::complex<double> narrowband_response(const CVector& h, const SteeringVector& sv) {
  return h.dot(to_cvector(sv));
}

inline nlohmann::json weights_to_json(const BeamformerWeights& w) {
  nlohmann::json j;
  j["freqs_hz"] = w.freqs;
  auto& bins = j["weights"] = nlohmann::json::array();
  for (const auto& h : w.weights) {
    auto row = nlohmann::json::array();
    for (Eigen::Index m = 0; m < h.size(); ++m) row.push_back({h(m).real(), h(m).imag()});
    bins.push_back(std::move(row));
  }
  return j;
}

inline BeamformerWeights weights_from_json(const nlohmann::json& j) {
  BeamformerWeights w;
  w.freqs = j.at("freqs_hz").get<std::vector<double>>();
  for (const auto& row : j.at("weights")) {
    CVector h(static_cast<Eigen::Index>(row.size()));
    for (std::size_t m = 0; m < row.size(); ++m)
      h(static_cast<Eigen::Index>(m)) = {row[m].at(0).get<double>(), row[m].at(1).get<double>()};
    w.weights.push_back(std::move(h));
  }
  require(w.freqs.size() == w.weights.size(), "weights_from_json: freqs/weights length mismatch");
  return w;
}

} // namespace aliaslab
