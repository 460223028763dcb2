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
#include <cstddef>
#include <span>
#include <vector>

#include "aliaslab/common.hpp"
#include "aliaslab/fft.hpp"

namespace aliaslab {

/// Multichannel time-domain signal. All channels share one length and one
/// sample rate.
class TimeSignal {
 public:
  TimeSignal() = default;

  TimeSignal(std::vector<std::vector<double>> channels, double sample_rate)
      : channels_(std::move(channels)), sample_rate_(sample_rate) {
    require(sample_rate_ > 0.0, "TimeSignal: sample_rate must be positive");
    require(!channels_.empty(), "TimeSignal: at least one channel required");
    const auto n = channels_.front().size();
    for (const auto& ch : channels_) require(ch.size() == n, "TimeSignal: channels must have equal length");
  }

  static TimeSignal zeros(std::size_t num_channels, std::size_t num_samples, double sample_rate) {
    return TimeSignal(std::vector<std::vector<double>>(num_channels, std::vector<double>(num_samples, 0.0)),
                      sample_rate);
  }

  static TimeSignal mono(std::vector<double> samples, double sample_rate) {
    std::vector<std::vector<double>> ch;
    ch.push_back(std::move(samples));
    return TimeSignal(std::move(ch), sample_rate);
  }

  std::size_t num_channels() const { return channels_.size(); }
  std::size_t num_samples() const { return channels_.empty() ? 0 : channels_.front().size(); }
  double sample_rate() const { return sample_rate_; }
  bool empty() const { return num_samples() == 0; }

  std::span<const double> channel(std::size_t m) const { return channels_.at(m); }
  std::span<double> channel(std::size_t m) { return channels_.at(m); }
  const std::vector<std::vector<double>>& channels() const { return channels_; }

  TimeSignal select_channel(std::size_t m) const { return mono(channels_.at(m), sample_rate_); }

  // Truncate or zero-extend every channel.
  TimeSignal resized(std::size_t num_samples) const {
    auto ch = channels_;
    for (auto& c : ch) c.resize(num_samples, 0.0);
    return TimeSignal(std::move(ch), sample_rate_);
  }

 private:
  std::vector<std::vector<double>> channels_;
  double sample_rate_ = kDefaultSampleRate;
};

inline double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

inline double mean_power(std::span<const double> x) {
  return x.empty() ? 0.0 : energy(x) / static_cast<double>(x.size());
}

namespace detail {

inline std::vector<double> convolve_direct(std::span<const double> x, std::span<const double> h) {
  std::vector<double> y(x.size() + h.size() - 1, 0.0);
  for (std::size_t j = 0; j < h.size(); ++j) {
    const double hj = h[j];
    if (hj == 0.0) continue;
    for (std::size_t i = 0; i < x.size(); ++i) y[i + j] += hj * x[i];
  }
  return y;
}

inline std::vector<double> convolve_fft(std::span<const double> x, std::span<const double> h) {
  const std::size_t out_len = x.size() + h.size() - 1;
  const std::size_t n = next_power_of_two(std::max<std::size_t>(out_len, 2));
  RealFft fft(n);
  std::vector<double> buf(n, 0.0);
  std::vector<std::complex<double>> X(fft.bins()), H(fft.bins());
  std::copy(x.begin(), x.end(), buf.begin());
  fft.forward(buf, X);
  std::fill(buf.begin(), buf.end(), 0.0);
  std::copy(h.begin(), h.end(), buf.begin());
  fft.forward(buf, H);
  for (std::size_t k = 0; k < X.size(); ++k) X[k] *= H[k];
  fft.inverse(X, buf);
  buf.resize(out_len);
  return buf;
}

} // namespace detail

/// Full linear convolution of one channel with a real kernel.
inline std::vector<double> convolve(std::span<const double> x, std::span<const double> kernel) {
  require(!kernel.empty(), "convolve: kernel must be non-empty");
  if (x.empty()) return std::vector<double>(kernel.size() - 1, 0.0);
  const auto nonzero = static_cast<std::size_t>(
      std::count_if(kernel.begin(), kernel.end(), [](double v) { return v != 0.0; }));
  // Sparse kernels (anechoic RIRs, short filters) are cheaper in the time domain.
  if (nonzero <= 64) return detail::convolve_direct(x, kernel);
  return detail::convolve_fft(x, kernel);
}

/// Per-channel full linear convolution; output length = len(signal) + len(kernel) - 1.
inline TimeSignal convolve(const TimeSignal& signal, std::span<const double> kernel) {
  require(!kernel.empty(), "convolve: kernel must be non-empty");
  std::vector<std::vector<double>> out;
  out.reserve(signal.num_channels());
  for (std::size_t m = 0; m < signal.num_channels(); ++m) out.push_back(convolve(signal.channel(m), kernel));
  return TimeSignal(std::move(out), signal.sample_rate());
}

} // namespace aliaslab
