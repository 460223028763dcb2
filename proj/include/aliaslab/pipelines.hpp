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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aliaslab/beamforming.hpp"
#include "aliaslab/common.hpp"
#include "aliaslab/metrics.hpp"
#include "aliaslab/postfilter.hpp"
#include "aliaslab/random.hpp"
#include "aliaslab/scene.hpp"
#include "aliaslab/spatial_eval.hpp"
#include "aliaslab/stft.hpp"
#include "aliaslab/wav.hpp"

namespace aliaslab {

enum class PipelineKind { Identity, Mvdr, MvdrPf, External };

inline std::string to_string(PipelineKind k) {
  switch (k) {
    case PipelineKind::Identity: return "identity";
    case PipelineKind::Mvdr: return "mvdr";
    case PipelineKind::MvdrPf: return "mvdr_pf";
    case PipelineKind::External: return "external";
  }
  return "unknown";
}

inline PipelineKind parse_pipeline(const std::string& name) {
  if (name == "identity") return PipelineKind::Identity;
  if (name == "mvdr") return PipelineKind::Mvdr;
  if (name == "mvdr_pf") return PipelineKind::MvdrPf;
  if (name == "external") return PipelineKind::External;
  throw InvalidArgument("unknown pipeline '" + name + "' (expected identity, mvdr, mvdr_pf or external)");
}

struct PipelineOptions {
  StftConfig stft{};
  double loading = kDefaultLoading;
  double gain_floor = kDefaultGainFloor;
  std::size_t ref_mic = 0;
  // Directory of enhanced WAVs for the external pipeline:
  // <scene_id>.wav for scenes, <angle_index>.wav for sweeps.
  std::filesystem::path external_dir;
};

inline TimeSignal read_external_output(const std::filesystem::path& dir, const std::string& stem, double sample_rate) {
  require(!dir.empty(), "external pipeline: no directory of enhanced WAVs given");
  const auto path = dir / (stem + ".wav");
  if (!std::filesystem::exists(path)) throw MissingInput("missing external output: " + path.string());
  return read_wav(path, sample_rate).select_channel(0);
}

// ---------------------------------------------------------------------------
// Sweep (beampattern) pipelines

/// Enhancer for white-noise sweeps. MVDR uses the diffuse noise model and the
/// look direction. The post-filter gain is derived once from direction-
/// independent statistics (the look-direction MVDR output against the MVDR
/// output of independent, spatially white noise) and then applied unchanged
/// at every angle.
class SweepEnhancer {
 public:
  SweepEnhancer(PipelineKind kind, const SweepManifest& sweep, double look, PipelineOptions opt = {})
      : kind_(kind), opt_(std::move(opt)), sample_rate_(sweep.sample_rate) {
    opt_.stft.validate();
    if (kind_ != PipelineKind::Mvdr && kind_ != PipelineKind::MvdrPf) return;
    const auto geom = sweep.geometry();
    const auto source = sweep_source_signal(sweep);
    Spectrogram probe = stft(TimeSignal::mono(std::vector<double>(source.num_samples(), 0.0), sample_rate_), opt_.stft);
    const auto freqs = probe.freq_axis();
    weights_ = mvdr_weights(diffuse_scm(geom, freqs, opt_.loading), steering_vectors(geom, PlaneWaveDirection(look), freqs));
    if (kind_ != PipelineKind::MvdrPf) return;

    const TimeSignal look_rec = render_sweep_direction(sweep, source, look);
    const Spectrogram target = apply_beamformer(*weights_, stft(look_rec, opt_.stft));
    Rng rng(derive_seed(sweep.noise_seed, 0x5EED));
    const double sigma = std::sqrt(mean_power(look_rec.channel(opt_.ref_mic)));
    std::vector<std::vector<double>> noise(geom.num_mics());
    for (auto& ch : noise) {
      ch = rng.white_noise(look_rec.num_samples());
      for (auto& v : ch) v *= sigma;
    }
    const Spectrogram residual = apply_beamformer(*weights_, stft(TimeSignal(std::move(noise), sample_rate_), opt_.stft));
    gains_ = oracle_wiener_gain(target, residual, opt_.gain_floor);
  }

  Spectrogram operator()(const TimeSignal& x, std::size_t angle_index) const {
    switch (kind_) {
      case PipelineKind::Identity: return stft(x.select_channel(opt_.ref_mic), opt_.stft);
      case PipelineKind::External:
        return stft(read_external_output(opt_.external_dir, std::to_string(angle_index), sample_rate_), opt_.stft);
      case PipelineKind::Mvdr: return apply_beamformer(*weights_, stft(x, opt_.stft));
      case PipelineKind::MvdrPf: return apply_gain(apply_beamformer(*weights_, stft(x, opt_.stft)), *gains_);
    }
    throw InvalidArgument("SweepEnhancer: unknown pipeline");
  }

  const std::optional<BeamformerWeights>& weights() const { return weights_; }
  const std::optional<GainGrid>& gains() const { return gains_; }

  /// Recording of the sweep source at an arbitrary angle.
  static TimeSignal render_sweep_direction(const SweepManifest& m, const TimeSignal& source, double theta) {
    SweepManifest one = m;
    one.angles = {theta};
    return render_sweep_angle(one, source, 0);
  }

 private:
  PipelineKind kind_;
  PipelineOptions opt_;
  double sample_rate_;
  std::optional<BeamformerWeights> weights_;
  std::optional<GainGrid> gains_;
};

// ---------------------------------------------------------------------------
// Scene pipelines

struct SceneSignals {
  TimeSignal mixture;
  TimeSignal target_image;
  TimeSignal noise_image; // interferer image + sensor noise
  TimeSignal target_direct;
};

inline SceneSignals load_scene_signals(const std::filesystem::path& dataset_dir, const SceneManifest& s) {
  SceneSignals out;
  out.mixture = load_scene_audio(dataset_dir, s, "mixture");
  out.target_image = load_scene_audio(dataset_dir, s, "target");
  const TimeSignal interferer = load_scene_audio(dataset_dir, s, "interferer");
  const TimeSignal sensor = load_scene_audio(dataset_dir, s, "sensor_noise");
  out.target_direct = load_scene_audio(dataset_dir, s, "target_direct");
  require(interferer.num_channels() == sensor.num_channels() && interferer.num_samples() == sensor.num_samples(),
          "scene " + s.scene_id + ": interferer and sensor-noise images differ in shape");
  std::vector<std::vector<double>> noise(interferer.num_channels());
  for (std::size_t m = 0; m < noise.size(); ++m) {
    const auto a = interferer.channel(m), b = sensor.channel(m);
    noise[m].resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) noise[m][i] = a[i] + b[i];
  }
  out.noise_image = TimeSignal(std::move(noise), interferer.sample_rate());
  return out;
}

/// Oracle MVDR for a scene: IRM-weighted noise SCM of the mixture, steering
/// vector from the known target DOA.
inline BeamformerWeights scene_mvdr_weights(const SceneManifest& s, const Spectrogram& mixture,
                                            const Spectrogram& target, const Spectrogram& noise,
                                            const PipelineOptions& opt) {
  const auto geom = s.geometry();
  const Mask mask = irm_mask(target, noise, opt.ref_mic);
  const NoiseScm scm = masked_scm(mixture, mask, geom, opt.loading);
  return mvdr_weights(scm, steering_vectors(geom, PlaneWaveDirection(s.target_doa), mixture.freq_axis()));
}

/// Single-channel enhanced signal for one scene.
inline TimeSignal enhance_scene(PipelineKind kind, const SceneManifest& s, const SceneSignals& sig,
                                const PipelineOptions& opt = {}) {
  switch (kind) {
    case PipelineKind::Identity: return sig.mixture.select_channel(opt.ref_mic);
    case PipelineKind::External: return read_external_output(opt.external_dir, s.scene_id, s.sample_rate);
    case PipelineKind::Mvdr:
    case PipelineKind::MvdrPf: break;
  }
  const Spectrogram y = stft(sig.mixture, opt.stft);
  const Spectrogram x = stft(sig.target_image, opt.stft);
  const Spectrogram n = stft(sig.noise_image, opt.stft);
  const auto w = scene_mvdr_weights(s, y, x, n, opt);
  Spectrogram out = apply_beamformer(w, y);
  if (kind == PipelineKind::MvdrPf)
    out = apply_gain(out, oracle_wiener_gain(apply_beamformer(w, x), apply_beamformer(w, n), opt.gain_floor));
  return istft(out);
}

/// Scores an enhanced signal against the direct-path target at the reference
/// microphone; the noisy baseline is the mixture at the same microphone.
inline MetricsReport evaluate_scene(const SceneManifest& s, const SceneSignals& sig, const TimeSignal& enhanced,
                                    const std::string& label, std::size_t ref_mic = 0) {
  require(enhanced.num_channels() >= 1, "evaluate_scene: enhanced signal has no channels");
  return evaluate_signals(enhanced.channel(0), sig.mixture.channel(ref_mic), sig.target_direct.channel(ref_mic),
                          s.scene_id, label);
}

} // namespace aliaslab
