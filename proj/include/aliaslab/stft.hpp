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

#include "aliaslab/common.hpp"
#include "aliaslab/fft.hpp"
#include "aliaslab/signal.hpp"

namespace aliaslab {

enum class WindowType { SqrtHann };

struct StftConfig {
  std::size_t fft_size = 512;
  std::size_t hop = 256;
  WindowType window = WindowType::SqrtHann;

  std::size_t bins() const { return fft_size / 2 + 1; }

  // Periodic square-root Hann: w[n] = sin(pi n / N). Used for analysis and synthesis.
  std::vector<double> window_samples() const {
    std::vector<double> w(fft_size);
    for (std::size_t n = 0; n < fft_size; ++n)
      w[n] = std::sin(kPi * static_cast<double>(n) / static_cast<double>(fft_size));
    return w;
  }

  /// Throws InvalidArgument unless fft_size is a power of two, hop divides it,
  /// and the squared window overlap-adds to a constant at this hop.
  void validate() const {
    require(is_power_of_two(fft_size) && fft_size >= 4, "StftConfig: fft_size must be a power of two >= 4");
    require(hop > 0 && fft_size % hop == 0, "StftConfig: hop must divide fft_size");
    const auto w = window_samples();
    double reference = 0.0;
    for (std::size_t n = 0; n < hop; ++n) {
      double sum = 0.0;
      for (std::size_t i = n; i < fft_size; i += hop) sum += w[i] * w[i];
      if (n == 0) reference = sum;
      require(std::abs(sum - reference) <= 1e-9 * std::max(1.0, reference),
              "StftConfig: window/hop pair violates the constant-overlap-add condition");
    }
  }

  bool operator==(const StftConfig&) const = default;
};

/// Complex STFT grid [channels x bins x frames]. Frame l is centred on input
/// sample l * hop; the FFT origin is the frame centre (zero-phase framing).
class Spectrogram {
 public:
  Spectrogram() = default;

  Spectrogram(std::size_t channels, std::size_t frames, StftConfig config, double sample_rate,
              std::size_t num_samples)
      : channels_(channels),
        bins_(config.bins()),
        frames_(frames),
        config_(config),
        sample_rate_(sample_rate),
        num_samples_(num_samples),
        data_(channels * config.bins() * frames) {
    require(sample_rate > 0.0, "Spectrogram: sample_rate must be positive");
  }

  std::size_t num_channels() const { return channels_; }
  std::size_t num_bins() const { return bins_; }
  std::size_t num_frames() const { return frames_; }
  const StftConfig& config() const { return config_; }
  double sample_rate() const { return sample_rate_; }
  // Length of the time signal this grid synthesizes back to.
  std::size_t num_samples() const { return num_samples_; }

  double freq(std::size_t k) const {
    return static_cast<double>(k) * sample_rate_ / static_cast<double>(config_.fft_size);
  }
  std::vector<double> freq_axis() const {
    std::vector<double> f(bins_);
    for (std::size_t k = 0; k < bins_; ++k) f[k] = freq(k);
    return f;
  }

  std::complex<double>& operator()(std::size_t m, std::size_t k, std::size_t l) {
    return data_[(m * bins_ + k) * frames_ + l];
  }
  const std::complex<double>& operator()(std::size_t m, std::size_t k, std::size_t l) const {
    return data_[(m * bins_ + k) * frames_ + l];
  }

  std::vector<std::complex<double>>& data() { return data_; }
  const std::vector<std::complex<double>>& data() const { return data_; }

  bool same_shape(const Spectrogram& other) const {
    return channels_ == other.channels_ && bins_ == other.bins_ && frames_ == other.frames_;
  }

  Spectrogram select_channel(std::size_t m) const {
    require(m < channels_, "Spectrogram::select_channel: index out of range");
    Spectrogram out(1, frames_, config_, sample_rate_, num_samples_);
    for (std::size_t k = 0; k < bins_; ++k)
      for (std::size_t l = 0; l < frames_; ++l) out(0, k, l) = (*this)(m, k, l);
    return out;
  }

 private:
  std::size_t channels_ = 0;
  std::size_t bins_ = 0;
  std::size_t frames_ = 0;
  StftConfig config_{};
  double sample_rate_ = kDefaultSampleRate;
  std::size_t num_samples_ = 0;
  std::vector<std::complex<double>> data_;
};

/// Number of frames for a signal of n samples: enough centred frames that
/// every input sample is covered after padding fft_size/2 at both ends.
inline std::size_t stft_frame_count(std::size_t num_samples, const StftConfig& config) {
  return (num_samples - 1 + config.fft_size / 2) / config.hop + 1;
}

inline Spectrogram stft(const TimeSignal& signal, const StftConfig& config) {
  config.validate();
  require(!signal.empty(), "stft: signal must be non-empty");

  const std::size_t n_fft = config.fft_size;
  const std::size_t half = n_fft / 2;
  const std::size_t len = signal.num_samples();
  const std::size_t frames = stft_frame_count(len, config);
  const auto window = config.window_samples();

  Spectrogram spec(signal.num_channels(), frames, config, signal.sample_rate(), len);
  RealFft fft(n_fft);
  std::vector<double> frame(n_fft);
  std::vector<std::complex<double>> bins(config.bins());

  for (std::size_t m = 0; m < signal.num_channels(); ++m) {
    const auto x = signal.channel(m);
    for (std::size_t l = 0; l < frames; ++l) {
      // Window sample n sits at input index l*hop + n - half; it is stored at
      // FFT index (n + half) mod N so the frame centre is the phase origin.
      for (std::size_t n = 0; n < n_fft; ++n) {
        const auto t = static_cast<std::ptrdiff_t>(l * config.hop + n) - static_cast<std::ptrdiff_t>(half);
        const double v = (t >= 0 && static_cast<std::size_t>(t) < len) ? x[static_cast<std::size_t>(t)] : 0.0;
        frame[(n + half) % n_fft] = v * window[n];
      }
      fft.forward(frame, bins);
      for (std::size_t k = 0; k < bins.size(); ++k) spec(m, k, l) = bins[k];
    }
  }
  return spec;
}

/// Weighted overlap-add synthesis, normalised by the accumulated squared
/// synthesis window. Exact inverse of stft() wherever that envelope is nonzero.
inline TimeSignal istft(const Spectrogram& spec) {
  const auto& config = spec.config();
  config.validate();
  require(spec.num_bins() == config.bins(), "istft: bin count does not match fft_size");
  require(spec.data().size() == spec.num_channels() * spec.num_bins() * spec.num_frames(),
          "istft: inconsistent grid shape");
  require(spec.num_channels() > 0, "istft: no channels");

  const std::size_t n_fft = config.fft_size;
  const std::size_t half = n_fft / 2;
  const std::size_t len = spec.num_samples();
  const auto window = config.window_samples();

  std::vector<double> envelope(len, 0.0);
  for (std::size_t l = 0; l < spec.num_frames(); ++l)
    for (std::size_t n = 0; n < n_fft; ++n) {
      const auto t = static_cast<std::ptrdiff_t>(l * config.hop + n) - static_cast<std::ptrdiff_t>(half);
      if (t >= 0 && static_cast<std::size_t>(t) < len) envelope[static_cast<std::size_t>(t)] += window[n] * window[n];
    }

  RealFft fft(n_fft);
  std::vector<double> frame(n_fft);
  std::vector<std::complex<double>> bins(config.bins());
  std::vector<std::vector<double>> out(spec.num_channels(), std::vector<double>(len, 0.0));

  for (std::size_t m = 0; m < spec.num_channels(); ++m) {
    auto& y = out[m];
    for (std::size_t l = 0; l < spec.num_frames(); ++l) {
      for (std::size_t k = 0; k < bins.size(); ++k) bins[k] = spec(m, k, l);
      fft.inverse(bins, frame);
      for (std::size_t n = 0; n < n_fft; ++n) {
        const auto t = static_cast<std::ptrdiff_t>(l * config.hop + n) - static_cast<std::ptrdiff_t>(half);
        if (t >= 0 && static_cast<std::size_t>(t) < len)
          y[static_cast<std::size_t>(t)] += window[n] * frame[(n + half) % n_fft];
      }
    }
    for (std::size_t t = 0; t < len; ++t) y[t] = envelope[t] > 1e-10 ? y[t] / envelope[t] : 0.0;
  }
  return TimeSignal(std::move(out), spec.sample_rate());
}

} // namespace aliaslab
