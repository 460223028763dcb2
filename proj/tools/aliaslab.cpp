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


#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aliaslab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aliaslab;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::size_t workers = default_workers();
  bool json = false;
};

void emit(const GlobalOptions& g, const json& j, const std::string& text) {
  if (g.json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string scene_id_for(double spacing, std::size_t grid_index, std::size_t j) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "d%03ldmm_doa%02zu_%03zu", std::lround(spacing * 1000.0), grid_index, j);
  return buf;
}

std::vector<std::string> dataset_scene_ids(const fs::path& dataset) {
  const json index = read_json(dataset / "index.json");
  return index.at("scenes").get<std::vector<std::string>>();
}

// ---------------------------------------------------------------------------

struct AliasingArgs {
  double d = 0.17;
  double c = kDefaultSpeedOfSound;
  double f_max = 8000.0;
};

int cmd_aliasing(const GlobalOptions& g, const AliasingArgs& a) {
  require(a.d > 0.0, "--d must be positive");
  require(a.c > 0.0, "--c must be positive");
  const auto r = aliasing_report(ArrayGeometry::linear(2, a.d, a.c), a.f_max);
  json j{{"spacing_d", a.d},    {"speed_of_sound", a.c},          {"f_max", r.f_max},
         {"lambda_min", r.lambda_min}, {"f_alias", r.f_alias}, {"aliasing_in_band", r.aliasing_in_band}};
  emit(g, j,
       "spacing d        " + fmt("%.4f m", a.d) + "\nf_alias = c/2d   " + fmt("%.2f Hz", r.f_alias) +
           "\nlambda_min       " + fmt("%.4f m", r.lambda_min) + "\naliasing in band " +
           (r.aliasing_in_band ? "yes" : "no") + fmt(" (f_max %.0f Hz)\n", r.f_max));
  return 0;
}

struct MakeScenesArgs {
  double d = 0.17;
  fs::path corpus;
  fs::path out;
  std::size_t per_doa = 10;
  std::vector<std::size_t> grid;
  bool anechoic = false;
  bool mute_interferer = false;
  bool no_sensor_noise = false;
};

int cmd_make_scenes(const GlobalOptions& g, const MakeScenesArgs& a) {
  require(a.d > 0.0, "--d must be positive");
  require(a.per_doa > 0, "--per-doa must be positive");
  const auto corpus = list_corpus(a.corpus);
  require(corpus.size() >= 2, "corpus " + a.corpus.string() + " must contain at least two .wav files");
  std::vector<std::size_t> grid = a.grid;
  if (grid.empty())
    for (std::size_t i = 0; i < kDoaGridSize; ++i) grid.push_back(i);

  struct Job {
    std::size_t grid_index, j;
    std::string id;
  };
  std::vector<Job> jobs;
  for (auto gi : grid)
    for (std::size_t j = 0; j < a.per_doa; ++j) jobs.push_back({gi, j, scene_id_for(a.d, gi, j)});

  const RenderOptions ropt{a.anechoic, a.mute_interferer, a.no_sensor_noise};
  parallel_for(jobs.size(), g.workers, [&](std::size_t n) {
    SceneConfig cfg;
    cfg.spacing_d = a.d;
    cfg.grid_index = jobs[n].grid_index;
    const auto seed = derive_seed(g.seed, jobs[n].grid_index * 100000 + jobs[n].j);
    render_scene(sample_scene(seed, cfg, jobs[n].id), corpus, a.out, ropt);
  });

  json ids = json::array();
  for (const auto& job : jobs) ids.push_back(job.id);
  write_json_atomic(a.out / "index.json", {{"spacing_d", a.d}, {"seed", g.seed}, {"scenes", ids}});
  emit(g, {{"out", a.out.string()}, {"num_scenes", jobs.size()}, {"scenes", ids}},
       "wrote " + std::to_string(jobs.size()) + " scenes to " + a.out.string() + "\n");
  return 0;
}

struct SweepArgs {
  double d = 0.17;
  fs::path out;
  std::size_t angles = 121;
  double duration = 2.0;
  bool integer_delay = false;
};

int cmd_sweep(const GlobalOptions& g, const SweepArgs& a) {
  require(a.d > 0.0, "--d must be positive");
  auto spec = make_sweep(a.d, a.angles, g.seed, a.duration);
  spec.fractional_delay = !a.integer_delay;
  const auto m = render_sweep(spec, a.out, g.workers);
  emit(g, {{"out", a.out.string()}, {"num_angles", m.angles.size()}, {"spacing_d", a.d}},
       "wrote " + std::to_string(m.angles.size()) + " sweep recordings to " + a.out.string() + "\n");
  return 0;
}

struct EnhanceArgs {
  fs::path dataset;
  std::string pipeline = "mvdr";
  fs::path out;
  fs::path external_dir;
  fs::path weights_dir;
};

int cmd_enhance(const GlobalOptions& g, const EnhanceArgs& a) {
  const auto kind = parse_pipeline(a.pipeline);
  const auto ids = dataset_scene_ids(a.dataset);
  PipelineOptions opt;
  opt.external_dir = a.external_dir;
  parallel_for(ids.size(), g.workers, [&](std::size_t i) {
    const auto s = load_scene(a.dataset, ids[i]);
    const auto sig = load_scene_signals(a.dataset, s);
    write_wav(a.out / (s.scene_id + ".wav"), enhance_scene(kind, s, sig, opt));
    if (!a.weights_dir.empty() && (kind == PipelineKind::Mvdr || kind == PipelineKind::MvdrPf)) {
      const auto w = scene_mvdr_weights(s, stft(sig.mixture, opt.stft), stft(sig.target_image, opt.stft),
                                        stft(sig.noise_image, opt.stft), opt);
      write_json_atomic(a.weights_dir / (s.scene_id + ".weights.json"), weights_to_json(w));
    }
  });
  emit(g, {{"out", a.out.string()}, {"pipeline", a.pipeline}, {"num_scenes", ids.size()}},
       "enhanced " + std::to_string(ids.size()) + " scenes with " + a.pipeline + " into " + a.out.string() + "\n");
  return 0;
}

struct BeampatternArgs {
  fs::path sweep_dir;
  std::string pipeline = "mvdr";
  double look = kPi / 3.0;
  fs::path out;
  fs::path external_dir;
  double exclusion = kDefaultSidelobeExclusion;
};

int cmd_beampattern(const GlobalOptions& g, const BeampatternArgs& a) {
  const auto kind = parse_pipeline(a.pipeline);
  const auto sweep = load_sweep(a.sweep_dir);
  PipelineOptions opt;
  opt.external_dir = a.external_dir;
  const SweepEnhancer enhancer(kind, sweep, a.look, opt);
  const auto grid = evaluate_beampattern(std::cref(enhancer), sweep, a.sweep_dir, a.look, a.pipeline, g.workers);
  const auto report = sidelobe_report(grid, a.exclusion);

  const std::string stem = "beampattern_" + a.pipeline;
  write_text_atomic(a.out / (stem + ".csv"), grid_to_csv(grid));
  write_png(a.out / (stem + ".png"), render_heatmap(grid));
  json j = to_json(report);
  j["spacing_d"] = sweep.spacing_d;
  j["csv"] = (a.out / (stem + ".csv")).string();
  j["png"] = (a.out / (stem + ".png")).string();
  write_json_atomic(a.out / (stem + "_report.json"), j);
  if (enhancer.weights()) write_json_atomic(a.out / (stem + "_weights.json"), weights_to_json(*enhancer.weights()));

  auto band = [](const SidelobeBand& b) { return b.empty ? std::string("n/a") : fmt("%+.2f dB", b.max_sidelobe_db); };
  emit(g, j,
       a.pipeline + fmt(" d=%.3f m", sweep.spacing_d) + fmt(" f_a=%.1f Hz", report.f_alias) +
           "\n  max sidelobe below f_a: " + band(report.below) + "\n  max sidelobe above f_a: " + band(report.above) +
           "\n  aliased: " + (report.aliased ? "true" : "false") + (report.degenerate ? " (degenerate pattern)" : "") +
           "\n");
  return 0;
}

struct MetricsArgs {
  fs::path dataset;
  std::string pipeline = "mvdr";
  fs::path enhanced_dir;
  fs::path out;
};

int cmd_metrics(const GlobalOptions& g, const MetricsArgs& a) {
  const auto kind = parse_pipeline(a.pipeline);
  const auto ids = dataset_scene_ids(a.dataset);
  PipelineOptions opt;
  opt.external_dir = a.enhanced_dir;
  std::vector<MetricsReport> reports(ids.size());
  parallel_for(ids.size(), g.workers, [&](std::size_t i) {
    const auto s = load_scene(a.dataset, ids[i]);
    const auto sig = load_scene_signals(a.dataset, s);
    const auto enhanced = a.enhanced_dir.empty() ? enhance_scene(kind, s, sig, opt)
                                                 : read_external_output(a.enhanced_dir, s.scene_id, s.sample_rate);
    reports[i] = evaluate_scene(s, sig, enhanced, a.pipeline);
  });

  std::string csv = "scene_id,pipeline,si_sdr_db,delta_si_sdr_db,seg_snr_db\n";
  std::vector<double> si, delta, seg;
  char line[256];
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%s,%s,%.6f,%.6f,%.6f\n", r.scene_id.c_str(), r.pipeline_label.c_str(),
                  r.si_sdr_db, r.delta_si_sdr_db, r.seg_snr_db);
    csv += line;
    si.push_back(r.si_sdr_db);
    delta.push_back(r.delta_si_sdr_db);
    seg.push_back(r.seg_snr_db);
  }
  auto stat = [](const std::vector<double>& v) {
    const auto m = mean_ci95(v);
    return json{{"mean", m.mean}, {"ci95", m.ci95}};
  };
  const std::string stem = "metrics_" + a.pipeline;
  json summary{{"pipeline", a.pipeline},      {"num_scenes", reports.size()}, {"si_sdr_db", stat(si)},
               {"delta_si_sdr_db", stat(delta)}, {"seg_snr_db", stat(seg)},
               {"csv", (a.out / (stem + ".csv")).string()}};
  write_text_atomic(a.out / (stem + ".csv"), csv);
  write_json_atomic(a.out / (stem + ".json"), summary);
  const auto d = mean_ci95(delta);
  emit(g, summary,
       a.pipeline + ": " + std::to_string(reports.size()) + " scenes, delta SI-SDR " + fmt("%.2f", d.mean) +
           fmt(" +/- %.2f dB\n", d.ci95));
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"aliaslab: spatial aliasing experiments for two-microphone arrays"};
  app.set_config("--config", "", "TOML/INI configuration file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Base random seed");
  app.add_option("--workers", g.workers, "Worker threads (default: logical cores)")->check(CLI::PositiveNumber);
  app.add_flag("--json", g.json, "Machine-readable JSON on stdout");

  AliasingArgs al;
  auto* c_al = app.add_subcommand("aliasing", "Spatial aliasing cut-off frequency for spacing d");
  c_al->add_option("--d", al.d, "Microphone spacing in metres")->required();
  c_al->add_option("--c", al.c, "Speed of sound in m/s");
  c_al->add_option("--f-max", al.f_max, "Upper frequency of interest in Hz");

  MakeScenesArgs ms;
  auto* c_ms = app.add_subcommand("make-scenes", "Sample and render reverberant two-source scenes");
  c_ms->add_option("--d", ms.d, "Microphone spacing in metres")->required();
  c_ms->add_option("--corpus", ms.corpus, "Directory of dry speech .wav files")->required();
  c_ms->add_option("--out", ms.out, "Dataset output directory")->required();
  c_ms->add_option("--per-doa", ms.per_doa, "Scenes per target DOA grid point");
  c_ms->add_option("--grid", ms.grid, "Subset of DOA grid indices (0-59)");
  c_ms->add_flag("--anechoic", ms.anechoic, "Disable reflections");
  c_ms->add_flag("--mute-interferer", ms.mute_interferer, "Render without the interfering talker");
  c_ms->add_flag("--no-sensor-noise", ms.no_sensor_noise, "Render without sensor noise");

  SweepArgs sw;
  auto* c_sw = app.add_subcommand("sweep", "Render the anechoic white-noise angle sweep");
  c_sw->add_option("--d", sw.d, "Microphone spacing in metres")->required();
  c_sw->add_option("--out", sw.out, "Sweep output directory")->required();
  c_sw->add_option("--angles", sw.angles, "Number of angles spanning [-pi, pi]");
  c_sw->add_option("--duration", sw.duration, "Noise duration in seconds");
  c_sw->add_flag("--integer-delay", sw.integer_delay, "Round propagation delays to whole samples");

  EnhanceArgs en;
  auto* c_en = app.add_subcommand("enhance", "Run a pipeline over every scene of a dataset");
  c_en->add_option("--dataset", en.dataset, "Dataset directory")->required();
  c_en->add_option("--pipeline", en.pipeline, "identity | mvdr | mvdr_pf | external");
  c_en->add_option("--out", en.out, "Directory for <scene_id>.wav outputs")->required();
  c_en->add_option("--external-dir", en.external_dir, "Enhanced WAVs for the external pipeline");
  c_en->add_option("--weights-dir", en.weights_dir, "Export MVDR weights as JSON per scene");

  BeampatternArgs bp;
  auto* c_bp = app.add_subcommand("beampattern", "Angle x frequency response of a pipeline over a sweep");
  c_bp->add_option("--sweep-dir", bp.sweep_dir, "Directory written by the sweep command")->required();
  c_bp->add_option("--pipeline", bp.pipeline, "identity | mvdr | mvdr_pf | external");
  c_bp->add_option("--look", bp.look, "Look direction in radians");
  c_bp->add_option("--out", bp.out, "Output directory for CSV, PNG and report")->required();
  c_bp->add_option("--external-dir", bp.external_dir, "Enhanced <angle_index>.wav files for the external pipeline");
  c_bp->add_option("--exclusion", bp.exclusion, "Half-width in radians excluded around the look direction");

  MetricsArgs mt;
  auto* c_mt = app.add_subcommand("metrics", "SI-SDR and segmental SNR over a dataset");
  c_mt->add_option("--dataset", mt.dataset, "Dataset directory")->required();
  c_mt->add_option("--pipeline", mt.pipeline, "Pipeline label (run in-process unless --enhanced-dir is set)");
  c_mt->add_option("--enhanced-dir", mt.enhanced_dir, "Directory of <scene_id>.wav enhanced signals");
  c_mt->add_option("--out", mt.out, "Output directory for CSV and JSON summary")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (c_al->parsed()) return cmd_aliasing(g, al);
    if (c_ms->parsed()) return cmd_make_scenes(g, ms);
    if (c_sw->parsed()) return cmd_sweep(g, sw);
    if (c_en->parsed()) return cmd_enhance(g, en);
    if (c_bp->parsed()) return cmd_beampattern(g, bp);
    if (c_mt->parsed()) return cmd_metrics(g, mt);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const MissingInput& e) {
    std::cerr << "missing input: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
