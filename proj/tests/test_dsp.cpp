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


#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace aliaslab;
using Catch::Approx;

TEST_CASE("RealFft matches a direct DFT", "[fft]") {
  Rng rng(7);
  for (std::size_t n : {4u, 16u, 512u}) {
    const auto x = rng.white_noise(n);
    RealFft fft(n);
    std::vector<std::complex<double>> got(n / 2 + 1);
    fft.forward(x, got);
    const auto want = testutil::naive_rdft(x);
    for (std::size_t k = 0; k < want.size(); ++k) REQUIRE(std::abs(got[k] - want[k]) < 1e-9 * static_cast<double>(n));

    std::vector<double> back(n);
    fft.inverse(got, back);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(back[i] == Approx(x[i]).margin(1e-12));
  }
}

TEST_CASE("RealFft rejects zero size", "[fft]") { REQUIRE_THROWS_AS(RealFft(0), InvalidArgument); }

TEST_CASE("power-of-two helpers", "[fft]") {
  CHECK(next_power_of_two(1) == 1);
  CHECK(next_power_of_two(5) == 8);
  CHECK(next_power_of_two(512) == 512);
  CHECK(is_power_of_two(256));
  CHECK_FALSE(is_power_of_two(384));
}

TEST_CASE("convolution matches the naive double loop", "[convolve]") {
  Rng rng(11);
  // Short kernels take the direct path, long ones the FFT path.
  for (std::size_t klen : {1u, 7u, 64u, 65u, 300u, 4000u}) {
    const auto x = rng.white_noise(3000);
    const auto h = rng.white_noise(klen);
    const auto got = convolve(x, h);
    const auto want = testutil::naive_convolve(x, h);
    REQUIRE(got.size() == want.size());
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      err += (got[i] - want[i]) * (got[i] - want[i]);
      ref += want[i] * want[i];
    }
    INFO("kernel length " << klen);
    REQUIRE(std::sqrt(err / ref) <= 1e-9);
  }
}

TEST_CASE("convolution edge cases", "[convolve]") {
  const std::vector<double> x{1.0, 2.0, 3.0};
  SECTION("delta kernel is the identity") {
    const auto y = convolve(x, std::vector<double>{1.0});
    REQUIRE(y == x);
  }
  SECTION("delayed delta shifts") {
    const auto y = convolve(x, std::vector<double>{0.0, 0.0, 1.0});
    REQUIRE(y == std::vector<double>{0.0, 0.0, 1.0, 2.0, 3.0});
  }
  SECTION("empty kernel is rejected") { REQUIRE_THROWS_AS(convolve(x, std::vector<double>{}), InvalidArgument); }
}

TEST_CASE("StftConfig validation", "[stft]") {
  StftConfig ok{};
  REQUIRE_NOTHROW(ok.validate());
  CHECK(ok.bins() == 257);
  REQUIRE_NOTHROW(StftConfig{512, 128}.validate());
  REQUIRE_THROWS_AS((StftConfig{500, 250}.validate()), InvalidArgument);
  REQUIRE_THROWS_AS((StftConfig{512, 512}.validate()), InvalidArgument); // sqrt-Hann squared does not overlap-add
  REQUIRE_THROWS_AS((StftConfig{512, 0}.validate()), InvalidArgument);
}

TEST_CASE("frame count covers the signal", "[stft]") {
  const StftConfig cfg{};
  CHECK(stft_frame_count(1, cfg) == 2);
  CHECK(stft_frame_count(16000, cfg) == 64);
  const auto spec = stft(TimeSignal::zeros(2, 1000, 16000.0), cfg);
  CHECK(spec.num_channels() == 2);
  CHECK(spec.num_bins() == 257);
  CHECK(spec.num_frames() == stft_frame_count(1000, cfg));
}

TEST_CASE("STFT round trip is exact", "[stft]") {
  Rng rng(3);
  for (std::size_t len : {1u, 300u, 16000u, 16001u}) {
    const TimeSignal x({rng.white_noise(len), rng.white_noise(len)}, 16000.0);
    const TimeSignal y = istft(stft(x, StftConfig{}));
    REQUIRE(y.num_samples() == len);
    double err = 0.0, ref = 0.0;
    for (std::size_t m = 0; m < 2; ++m)
      for (std::size_t i = 0; i < len; ++i) {
        err += std::pow(y.channel(m)[i] - x.channel(m)[i], 2);
        ref += std::pow(x.channel(m)[i], 2);
      }
    INFO("length " << len);
    REQUIRE(db_from_power(err / ref) <= -60.0);
    REQUIRE(db_from_power(err / ref) <= -250.0);
  }
}

TEST_CASE("STFT frame equals the windowed DFT around its centre", "[stft]") {
  // Oracle: frame l of the STFT is the DFT of w[n] x[l*hop + n - N/2],
  // rotated so that the frame centre is the time origin.
  Rng rng(5);
  const StftConfig cfg{64, 16};
  const auto x = rng.white_noise(400);
  const auto spec = stft(TimeSignal::mono(x, 16000.0), cfg);
  const auto w = cfg.window_samples();
  for (std::size_t l : {0u, 4u, 10u}) {
    std::vector<double> frame(64, 0.0);
    for (std::size_t n = 0; n < 64; ++n) {
      const long t = static_cast<long>(l * 16 + n) - 32;
      frame[(n + 32) % 64] = (t >= 0 && t < 400) ? x[static_cast<std::size_t>(t)] * w[n] : 0.0;
    }
    const auto want = testutil::naive_rdft(frame);
    for (std::size_t k = 0; k < want.size(); ++k) REQUIRE(std::abs(spec(0, k, l) - want[k]) < 1e-10);
  }
}

TEST_CASE("impulse at a frame centre has a flat zero-phase spectrum", "[stft]") {
  std::vector<double> x(2048, 0.0);
  x[1024] = 1.0;
  const auto spec = stft(TimeSignal::mono(x, 16000.0), StftConfig{});
  const std::size_t l = 1024 / 256;
  for (std::size_t k = 0; k < spec.num_bins(); ++k) {
    // Window value at the centre is sin(pi/2) = 1.
    REQUIRE(spec(0, k, l).real() == Approx(1.0).margin(1e-12));
    REQUIRE(spec(0, k, l).imag() == Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("Parseval over a frame", "[stft]") {
  Rng rng(9);
  const StftConfig cfg{};
  const auto x = rng.white_noise(4096);
  const auto spec = stft(TimeSignal::mono(x, 16000.0), cfg);
  const auto w = cfg.window_samples();
  const std::size_t l = 8;
  double time_energy = 0.0;
  for (std::size_t n = 0; n < 512; ++n) time_energy += std::pow(x[l * 256 + n - 256] * w[n], 2);
  double freq_energy = 0.0;
  for (std::size_t k = 0; k < spec.num_bins(); ++k) {
    const double weight = (k == 0 || k == 256) ? 1.0 : 2.0;
    freq_energy += weight * std::norm(spec(0, k, l));
  }
  REQUIRE(freq_energy / 512.0 == Approx(time_energy).epsilon(1e-10));
}

TEST_CASE("istft of a modified spectrum stays finite and sized", "[stft]") {
  Rng rng(1);
  auto spec = stft(TimeSignal::mono(rng.white_noise(1000), 16000.0), StftConfig{});
  for (auto& v : spec.data()) v *= 0.5;
  const auto y = istft(spec);
  REQUIRE(y.num_samples() == 1000);
  for (double v : y.channel(0)) REQUIRE(std::isfinite(v));
}

TEST_CASE("stft rejects empty input", "[stft]") {
  REQUIRE_THROWS_AS(stft(TimeSignal::zeros(1, 0, 16000.0), StftConfig{}), InvalidArgument);
}

TEST_CASE("TimeSignal invariants", "[signal]") {
  REQUIRE_THROWS_AS(TimeSignal({{1.0, 2.0}, {1.0}}, 16000.0), InvalidArgument);
  REQUIRE_THROWS_AS(TimeSignal({{1.0}}, 0.0), InvalidArgument);
  const auto s = TimeSignal::mono({1.0, -1.0, 2.0}, 8000.0);
  CHECK(energy(s.channel(0)) == Approx(6.0));
  CHECK(mean_power(s.channel(0)) == Approx(2.0));
  CHECK(s.resized(5).num_samples() == 5);
  CHECK(s.resized(2).channel(0)[1] == -1.0);
}

TEST_CASE("WAV float32 round trip", "[wav]") {
  testutil::ScratchDir dir("wav");
  Rng rng(2);
  const TimeSignal x({rng.white_noise(500, 0.1), rng.white_noise(500, 0.1)}, 16000.0);
  write_wav(dir / "a.wav", x);
  const auto y = read_wav(dir / "a.wav", 16000.0);
  REQUIRE(y.num_channels() == 2);
  REQUIRE(y.num_samples() == 500);
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t i = 0; i < 500; ++i)
      REQUIRE(y.channel(m)[i] == Approx(static_cast<float>(x.channel(m)[i])).margin(0.0));
}

TEST_CASE("WAV PCM16 round trip", "[wav]") {
  testutil::ScratchDir dir("wav16");
  const auto x = TimeSignal::mono({0.0, 0.5, -0.5, 0.999, -1.0}, 16000.0);
  write_wav(dir / "p.wav", x, WavEncoding::Pcm16);
  const auto y = read_wav(dir / "p.wav");
  for (std::size_t i = 0; i < 5; ++i) REQUIRE(y.channel(0)[i] == Approx(x.channel(0)[i]).margin(1.0 / 32768.0));
}

TEST_CASE("WAV error handling", "[wav]") {
  testutil::ScratchDir dir("waverr");
  REQUIRE_THROWS_AS(read_wav(dir / "missing.wav"), MissingInput);
  write_wav(dir / "r.wav", TimeSignal::mono({0.0, 0.1}, 8000.0));
  REQUIRE_THROWS_AS(read_wav(dir / "r.wav", 16000.0), InvalidArgument);
  std::ofstream(dir / "junk.wav") << "not a wav file";
  REQUIRE_THROWS_AS(read_wav(dir / "junk.wav"), InvalidArgument);
}

TEST_CASE("parallel_for visits every index and propagates errors", "[parallel]") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) REQUIRE(h == 1);
  REQUIRE_THROWS_AS(parallel_for(50, 3,
                                 [](std::size_t i) {
                                   if (i == 17) throw MissingInput("boom");
                                 }),
                    MissingInput);
}

TEST_CASE("Rng is reproducible and derive_seed separates streams", "[random]") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  Rng r(3);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal();
    sum += v;
    sq += v * v;
  }
  CHECK(sum / n == Approx(0.0).margin(0.01));
  CHECK(sq / n == Approx(1.0).epsilon(0.01));
}
