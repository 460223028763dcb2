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

TEST_CASE("SI-SDR definition", "[metrics]") {
  Rng rng(1);
  const auto r = rng.white_noise(8000);
  SECTION("perfect estimate is capped") { CHECK(si_sdr(r, r) == kSiSdrCap); }
  SECTION("scaled estimate is capped too") {
    std::vector<double> e(r);
    for (auto& v : e) v *= 0.5;
    CHECK(si_sdr(e, r) == kSiSdrCap);
  }
  SECTION("orthogonal noise at 100:1 power gives 20 dB") {
    // Remove the projection of the noise on the reference, then scale it to
    // 1/100 of the reference power.
    auto n = rng.white_noise(r.size());
    double nr = 0.0, rr = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      nr += n[i] * r[i];
      rr += r[i] * r[i];
    }
    for (std::size_t i = 0; i < r.size(); ++i) n[i] -= nr / rr * r[i];
    const double scale = std::sqrt(energy(r) / (100.0 * energy(n)));
    std::vector<double> e(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) e[i] = r[i] + scale * n[i];
    CHECK(si_sdr(e, r) == Approx(20.0).margin(1e-9));
  }
  SECTION("zero estimate is -inf, zero reference is an error") {
    const std::vector<double> z(r.size(), 0.0);
    CHECK(si_sdr(z, r) == -std::numeric_limits<double>::infinity());
    REQUIRE_THROWS_AS(si_sdr(r, z), InvalidArgument);
    REQUIRE_THROWS_AS(si_sdr(std::vector<double>(10, 1.0), r), InvalidArgument);
  }
}

TEST_CASE("SI-SDR properties", "[metrics][property]") {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto r = rng.white_noise(2000);
    auto e = rng.white_noise(2000, 0.5);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] += r[i];
    const double base = si_sdr(e, r);
    for (double alpha : {1e-3, 0.37, 1.0, 42.0}) {
      std::vector<double> scaled(e);
      for (auto& v : scaled) v *= alpha;
      REQUIRE(std::abs(si_sdr(scaled, r) - base) <= 1e-9);
    }
    REQUIRE(si_sdr(r, r) >= base);
  }
}

TEST_CASE("segmental SNR", "[metrics]") {
  Rng rng(3);
  const auto r = rng.white_noise(2560);
  CHECK(seg_snr(r, r) == 35.0);
  std::vector<double> z(r.size(), 0.0);
  CHECK(seg_snr(z, r) == Approx(0.0).margin(1e-12)); // every frame at exactly 0 dB
  std::vector<double> neg(r);
  for (auto& v : neg) v = -v;
  CHECK(seg_snr(neg, r) == Approx(-6.0206).margin(1e-3)); // error is 2r
  std::vector<double> inv(r);
  for (auto& v : inv) v = -3.0 * v;
  CHECK(seg_snr(inv, r) == -10.0); // clamped
}

TEST_CASE("mean and 95% confidence interval", "[metrics]") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto m = mean_ci95(v);
  CHECK(m.mean == Approx(2.5));
  // sample std = sqrt(5/3)
  CHECK(m.ci95 == Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(m.n == 4);
  CHECK(mean_ci95(std::vector<double>{}).n == 0);
  CHECK(mean_ci95(std::vector<double>{7.0}).ci95 == 0.0);
}

TEST_CASE("scene evaluation", "[metrics]") {
  testutil::ScratchDir dir("metrics");
  testutil::write_corpus(dir / "corpus", 3, 1.0);
  SceneConfig cfg;
  cfg.grid_index = 30;
  const auto s = render_scene(sample_scene(5, cfg, "m5"), list_corpus(dir / "corpus"), dir / "ds");
  const auto sig = load_scene_signals(dir / "ds", s);

  SECTION("identity pipeline has zero improvement") {
    const auto r = evaluate_scene(s, sig, enhance_scene(PipelineKind::Identity, s, sig), "identity");
    CHECK(r.delta_si_sdr_db == 0.0);
    CHECK(r.scene_id == "m5");
  }
  SECTION("the reference itself scores the cap") {
    const auto r = evaluate_scene(s, sig, sig.target_direct.select_channel(0), "oracle");
    CHECK(r.si_sdr_db == kSiSdrCap);
    CHECK(r.delta_si_sdr_db == Approx(kSiSdrCap - r.noisy_si_sdr_db));
  }
  SECTION("lengths are aligned by truncation") {
    const auto shorter = sig.mixture.select_channel(0).resized(sig.mixture.num_samples() - 100);
    CHECK(std::isfinite(evaluate_scene(s, sig, shorter, "short").si_sdr_db));
  }
  SECTION("built-in pipelines improve on the mixture") {
    const auto mvdr = evaluate_scene(s, sig, enhance_scene(PipelineKind::Mvdr, s, sig), "mvdr");
    const auto pf = evaluate_scene(s, sig, enhance_scene(PipelineKind::MvdrPf, s, sig), "mvdr_pf");
    CHECK(mvdr.delta_si_sdr_db > 0.0);
    CHECK(pf.delta_si_sdr_db > mvdr.delta_si_sdr_db);
  }
  SECTION("external outputs are read by scene id") {
    PipelineOptions opt;
    opt.external_dir = dir / "ext";
    REQUIRE_THROWS_AS(enhance_scene(PipelineKind::External, s, sig, opt), MissingInput);
    write_wav(dir / "ext" / "m5.wav", sig.mixture.select_channel(0));
    const auto r = evaluate_scene(s, sig, enhance_scene(PipelineKind::External, s, sig, opt), "external");
    CHECK(r.delta_si_sdr_db == Approx(0.0).margin(1e-4));
  }
}
