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
#include <map>
#include <memory>
#include <mutex>
#include <span>

#include <fftw3.h>

#include "aliaslab/common.hpp"

namespace aliaslab {

namespace detail {

struct FftwPlans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created once per size and live for the whole process.
inline FftwPlans fftw_plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, FftwPlans> plans;
  std::lock_guard lock(mutex);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;

  const int size = static_cast<int>(n);
  double* real = fftw_alloc_real(n);
  fftw_complex* spectrum = fftw_alloc_complex(n / 2 + 1);
  FftwPlans p;
  p.forward = fftw_plan_dft_r2c_1d(size, real, spectrum, FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(size, spectrum, real, FFTW_ESTIMATE);
  fftw_free(real);
  fftw_free(spectrum);
  if (p.forward == nullptr || p.inverse == nullptr) throw NumericalError("FFTW planning failed");
  plans.emplace(n, p);
  return p;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

} // namespace detail

/// Real-input FFT of fixed length n with one-sided spectrum of n/2 + 1 bins.
/// One instance per thread; instances own their aligned work buffers.
class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(checked_size(n)),
        plans_(detail::fftw_plans_for(n)),
        real_(fftw_alloc_real(n)),
        spectrum_(fftw_alloc_complex(n / 2 + 1)) {}

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out) const {
    require(in.size() == n_ && out.size() == bins(), "RealFft::forward: buffer size mismatch");
    std::copy(in.begin(), in.end(), real_.get());
    fftw_execute_dft_r2c(plans_.forward, real_.get(), spectrum_.get());
    auto* s = reinterpret_cast<std::complex<double>*>(spectrum_.get());
    std::copy(s, s + bins(), out.begin());
  }

  // Normalized inverse: inverse(forward(x)) == x.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
    require(in.size() == bins() && out.size() == n_, "RealFft::inverse: buffer size mismatch");
    auto* s = reinterpret_cast<std::complex<double>*>(spectrum_.get());
    std::copy(in.begin(), in.end(), s);
    // c2r assumes a Hermitian spectrum; DC and Nyquist must be real.
    s[0] = s[0].real();
    if (n_ % 2 == 0) s[n_ / 2] = s[n_ / 2].real();
    fftw_execute_dft_c2r(plans_.inverse, spectrum_.get(), real_.get());
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = real_.get()[i] * scale;
  }

 private:
  static std::size_t checked_size(std::size_t n) {
    require(n >= 2, "FFT size must be at least 2");
    return n;
  }

  std::size_t n_;
  detail::FftwPlans plans_;
  std::unique_ptr<double, detail::FftwDeleter> real_;
  std::unique_ptr<fftw_complex, detail::FftwDeleter> spectrum_;
};

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

} // namespace aliaslab
