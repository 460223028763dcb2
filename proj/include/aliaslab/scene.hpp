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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "aliaslab/common.hpp"
#include "aliaslab/geometry.hpp"
#include "aliaslab/parallel.hpp"
#include "aliaslab/random.hpp"
#include "aliaslab/room.hpp"
#include "aliaslab/wav.hpp"

namespace aliaslab {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Sampling ranges for the speech scenes.

struct RoomRanges {
  double width_min = 3.0, width_max = 6.0;
  double length_min = 3.0, length_max = 9.0;
  double height_min = 2.2, height_max = 3.5;
  double t60_min = 0.2, t60_max = 0.5;
};

inline constexpr std::size_t kDoaGridSize = 60;
inline constexpr double kMinAngularSeparation = kPi / 6.0;
inline constexpr double kSourceHeight = 1.3;
inline constexpr double kWallMargin = 0.5;   // array centre to walls
inline constexpr double kSourceMargin = 0.1; // sources to walls

/// Target DOA grid: 60 angles i * pi / 59, both endpoints included.
inline double doa_grid_angle(std::size_t index) {
  require(index < kDoaGridSize, "doa_grid_angle: grid index must lie in [0, 59]");
  return static_cast<double>(index) * kPi / static_cast<double>(kDoaGridSize - 1);
}

/// Room used for beampattern sweeps: the midpoint of every sampling range.
inline RoomSpec median_room() { return RoomSpec{4.5, 6.0, 2.85, 0.35, true}; }

struct SceneConfig {
  double spacing_d = 0.17;
  std::size_t grid_index = 0;
  std::size_t num_mics = 2;
  double sample_rate = kDefaultSampleRate;
  double speed_of_sound = kDefaultSpeedOfSound;
  double sir_min_db = -5.0;
  double sir_max_db = 5.0;
  double sensor_noise_db = 40.0; // below the target image power at mic 0
  double distance_min = 1.0;
  double distance_max = 2.0;
  RoomRanges ranges{};
  int max_retries = 1000;
};

struct SceneManifest {
  std::string scene_id;
  std::uint64_t seed = 0;
  RoomSpec room{};
  Point3 array_center = Point3::Zero();
  double array_rotation = 0.0;
  double target_doa = 0.0;
  double interferer_doa = 0.0;
  std::vector<double> source_distances; // [target, interferer]
  Point3 target_position = Point3::Zero();
  Point3 interferer_position = Point3::Zero();
  double sir_db = 0.0;
  double sensor_noise_db = 40.0;
  double spacing_d = 0.17;
  std::size_t num_mics = 2;
  double sample_rate = kDefaultSampleRate;
  double speed_of_sound = kDefaultSpeedOfSound;
  int max_order = 0;
  // Filled by render_scene(); relative to the dataset directory except
  // clean_paths, which point into the corpus.
  std::vector<std::string> clean_paths;
  std::string mix_path;
  std::map<std::string, std::string> image_paths;

  ArrayGeometry geometry() const { return ArrayGeometry::linear(num_mics, spacing_d, speed_of_sound); }
  std::vector<Point3> mic_positions() const { return geometry().placed(array_center, array_rotation); }
};

inline double wrapped_angle_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return d > kPi ? kTwoPi - d : d;
}

/// Source position at DOA `theta` (relative to the array axis), `distance`
/// metres from the array centre, at the array's height.
inline Point3 source_position(const ArrayGeometry& geom, const Point3& center, double rotation, double theta,
                              double distance) {
  const Eigen::Matrix3d r = Eigen::AngleAxisd(rotation, Point3::UnitZ()).toRotationMatrix();
  return center + distance * (r * geom.direction(theta));
}

/// Draws one scene. Deterministic in (seed, config).
inline SceneManifest sample_scene(std::uint64_t seed, const SceneConfig& cfg, std::string scene_id = {}) {
  require(cfg.grid_index < kDoaGridSize, "sample_scene: grid_index must lie in [0, 59]");
  require(cfg.spacing_d > 0.0, "sample_scene: spacing must be positive");
  Rng rng(seed);
  const auto& rr = cfg.ranges;

  SceneManifest s;
  s.scene_id = scene_id.empty() ? "scene_" + std::to_string(seed) : std::move(scene_id);
  s.seed = seed;
  s.spacing_d = cfg.spacing_d;
  s.num_mics = cfg.num_mics;
  s.sample_rate = cfg.sample_rate;
  s.speed_of_sound = cfg.speed_of_sound;
  s.sensor_noise_db = cfg.sensor_noise_db;

  s.room.width = rng.uniform(rr.width_min, rr.width_max);
  s.room.length = rng.uniform(rr.length_min, rr.length_max);
  s.room.height = rng.uniform(rr.height_min, rr.height_max);
  s.room.t60 = rng.uniform(rr.t60_min, rr.t60_max);
  s.room.anechoic = false;
  s.max_order = default_max_order(s.room, s.speed_of_sound);

  s.target_doa = doa_grid_angle(cfg.grid_index);
  bool separated = false;
  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    s.interferer_doa = rng.uniform(0.0, kPi);
    if (std::abs(s.interferer_doa - s.target_doa) >= kMinAngularSeparation) {
      separated = true;
      break;
    }
  }
  if (!separated)
    throw InvalidArgument("sample_scene: minimum angular separation of pi/6 between target and interferer unsatisfiable");

  s.sir_db = rng.uniform(cfg.sir_min_db, cfg.sir_max_db);

  const auto geom = s.geometry();
  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    s.array_center = Point3(rng.uniform(kWallMargin, s.room.width - kWallMargin),
                            rng.uniform(kWallMargin, s.room.length - kWallMargin), kSourceHeight);
    s.array_rotation = rng.uniform(0.0, kTwoPi);
    s.source_distances = {rng.uniform(cfg.distance_min, cfg.distance_max),
                          rng.uniform(cfg.distance_min, cfg.distance_max)};
    s.target_position = source_position(geom, s.array_center, s.array_rotation, s.target_doa, s.source_distances[0]);
    s.interferer_position =
        source_position(geom, s.array_center, s.array_rotation, s.interferer_doa, s.source_distances[1]);
    const auto mics = s.mic_positions();
    const bool inside = s.room.contains(s.target_position, kSourceMargin) &&
                        s.room.contains(s.interferer_position, kSourceMargin) &&
                        std::all_of(mics.begin(), mics.end(), [&](const Point3& p) { return s.room.contains(p); });
    if (inside) return s;
  }
  throw InvalidArgument("sample_scene: could not place both sources inside the room after " +
                        std::to_string(cfg.max_retries) + " attempts (source-to-array distance constraint)");
}

// ---------------------------------------------------------------------------
// JSON persistence

inline nlohmann::json to_json(const Point3& p) { return nlohmann::json::array({p.x(), p.y(), p.z()}); }
inline Point3 point_from_json(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

inline nlohmann::json to_json(const RoomSpec& r) {
  return {{"width", r.width}, {"length", r.length}, {"height", r.height}, {"t60", r.t60}, {"anechoic", r.anechoic}};
}
inline RoomSpec room_from_json(const nlohmann::json& j) {
  return RoomSpec{j.at("width").get<double>(), j.at("length").get<double>(), j.at("height").get<double>(),
                  j.at("t60").get<double>(), j.at("anechoic").get<bool>()};
}

inline nlohmann::json to_json(const SceneManifest& s) {
  nlohmann::json j;
  j["scene_id"] = s.scene_id;
  j["seed"] = s.seed;
  j["room"] = to_json(s.room);
  j["array_center"] = to_json(s.array_center);
  j["array_rotation"] = s.array_rotation;
  j["target_doa"] = s.target_doa;
  j["interferer_doa"] = s.interferer_doa;
  j["source_distances"] = s.source_distances;
  j["target_position"] = to_json(s.target_position);
  j["interferer_position"] = to_json(s.interferer_position);
  j["sir_db"] = s.sir_db;
  j["sensor_noise_db"] = s.sensor_noise_db;
  j["spacing_d"] = s.spacing_d;
  j["num_mics"] = s.num_mics;
  j["sample_rate"] = s.sample_rate;
  j["speed_of_sound"] = s.speed_of_sound;
  j["max_order"] = s.max_order;
  j["clean_paths"] = s.clean_paths;
  j["mix_path"] = s.mix_path;
  j["image_paths"] = s.image_paths;
  return j;
}

inline SceneManifest scene_from_json(const nlohmann::json& j) {
  SceneManifest s;
  s.scene_id = j.at("scene_id").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.room = room_from_json(j.at("room"));
  s.array_center = point_from_json(j.at("array_center"));
  s.array_rotation = j.at("array_rotation").get<double>();
  s.target_doa = j.at("target_doa").get<double>();
  s.interferer_doa = j.at("interferer_doa").get<double>();
  s.source_distances = j.at("source_distances").get<std::vector<double>>();
  s.target_position = point_from_json(j.at("target_position"));
  s.interferer_position = point_from_json(j.at("interferer_position"));
  s.sir_db = j.at("sir_db").get<double>();
  s.sensor_noise_db = j.at("sensor_noise_db").get<double>();
  s.spacing_d = j.at("spacing_d").get<double>();
  s.num_mics = j.at("num_mics").get<std::size_t>();
  s.sample_rate = j.at("sample_rate").get<double>();
  s.speed_of_sound = j.at("speed_of_sound").get<double>();
  s.max_order = j.at("max_order").get<int>();
  s.clean_paths = j.value("clean_paths", std::vector<std::string>{});
  s.mix_path = j.value("mix_path", std::string{});
  s.image_paths = j.value("image_paths", std::map<std::string, std::string>{});
  return s;
}

/// Writes `text` to `path` via a temporary file and rename.
inline void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << text;
    if (!os) throw std::runtime_error("short write on " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline void write_json_atomic(const fs::path& path, const nlohmann::json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

inline nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInput("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("malformed JSON in " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Rendering

struct RenderOptions {
  bool force_anechoic = false;
  bool mute_interferer = false;
  bool disable_sensor_noise = false;
};

/// Sorted list of .wav files in a corpus directory.
inline std::vector<fs::path> list_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw MissingInput("corpus directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

inline fs::path scene_manifest_path(const fs::path& dataset_dir, const std::string& scene_id) {
  return dataset_dir / (scene_id + ".json");
}

/// Renders a sampled scene into `dataset_dir/<scene_id>/`: the mixture, the
/// reverberant target and (scaled) interferer images, the sensor noise, the
/// direct-path target image and the dry target. Writes the manifest with the
/// file paths filled in and returns it.
inline SceneManifest render_scene(SceneManifest s, const std::vector<fs::path>& corpus, const fs::path& dataset_dir,
                                  const RenderOptions& opt = {}) {
  require(corpus.size() >= 2, "render_scene: corpus must hold at least two utterances");
  Rng pick(derive_seed(s.seed, 1));
  const std::size_t ti = pick.index(corpus.size());
  std::size_t ii = pick.index(corpus.size() - 1);
  if (ii >= ti) ++ii;
  for (const auto* p : {&corpus[ti], &corpus[ii]})
    if (!fs::exists(*p)) throw MissingInput("corpus file not found: " + p->string());

  const TimeSignal target = read_wav(corpus[ti], s.sample_rate).select_channel(0);
  const TimeSignal interferer = read_wav(corpus[ii], s.sample_rate).select_channel(0).resized(target.num_samples());

  RoomSpec room = s.room;
  if (opt.force_anechoic) room.anechoic = true;
  RirOptions rir_opt{s.sample_rate, s.speed_of_sound, room.anechoic ? 0 : s.max_order};
  const auto mics = s.mic_positions();
  std::vector<std::vector<Rir>> rirs{simulate_rirs(room, s.target_position, mics, rir_opt),
                                     simulate_rirs(room, s.interferer_position, mics, rir_opt)};
  const double sir = opt.mute_interferer ? kMutedSir : s.sir_db;
  const double noise_db = opt.disable_sensor_noise ? kNoSensorNoise : s.sensor_noise_db;
  const auto mix = mix_scene({target, interferer}, rirs, sir, noise_db, derive_seed(s.seed, 2));

  RirOptions direct_opt = rir_opt;
  direct_opt.max_order = 0;
  const auto direct = render_image(target.channel(0), simulate_rirs(room, s.target_position, mics, direct_opt),
                                   s.sample_rate, target.num_samples());

  const fs::path rel = s.scene_id;
  s.clean_paths = {corpus[ti].string(), corpus[ii].string()};
  s.mix_path = (rel / "mixture.wav").string();
  s.image_paths = {{"target", (rel / "target_image.wav").string()},
                   {"interferer", (rel / "interferer_image.wav").string()},
                   {"sensor_noise", (rel / "sensor_noise.wav").string()},
                   {"target_direct", (rel / "target_direct.wav").string()},
                   {"dry_target", (rel / "dry_target.wav").string()}};

  write_wav(dataset_dir / s.mix_path, mix.mixture);
  write_wav(dataset_dir / s.image_paths["target"], mix.target_image);
  write_wav(dataset_dir / s.image_paths["interferer"], mix.interferer_image);
  write_wav(dataset_dir / s.image_paths["sensor_noise"], mix.sensor_noise);
  write_wav(dataset_dir / s.image_paths["target_direct"], direct);
  write_wav(dataset_dir / s.image_paths["dry_target"], target);
  write_json_atomic(scene_manifest_path(dataset_dir, s.scene_id), to_json(s));
  return s;
}

inline SceneManifest load_scene(const fs::path& dataset_dir, const std::string& scene_id) {
  return scene_from_json(read_json(scene_manifest_path(dataset_dir, scene_id)));
}

/// Loads an image or mixture WAV referenced by a rendered manifest.
inline TimeSignal load_scene_audio(const fs::path& dataset_dir, const SceneManifest& s, const std::string& key) {
  const std::string rel = key == "mixture" ? s.mix_path : (s.image_paths.count(key) ? s.image_paths.at(key) : "");
  if (rel.empty()) throw MissingInput("scene " + s.scene_id + " has no rendered '" + key + "' audio");
  const fs::path p = dataset_dir / rel;
  if (!fs::exists(p)) throw MissingInput("missing scene audio: " + p.string());
  return read_wav(p, s.sample_rate);
}

// ---------------------------------------------------------------------------
// White-noise sweeps for beampatterns

struct SweepManifest {
  std::vector<double> angles;
  RoomSpec room = median_room();
  double distance = 1.5;
  double spacing_d = 0.17;
  std::size_t num_mics = 2;
  std::uint64_t noise_seed = 0;
  double duration_s = 2.0;
  double sample_rate = kDefaultSampleRate;
  double speed_of_sound = kDefaultSpeedOfSound;
  Point3 array_center = Point3(2.25, 3.0, kSourceHeight);
  // Sub-sample propagation delays; a 1 cm array has TDOAs below one sample.
  bool fractional_delay = true;
  std::vector<std::string> wav_paths; // relative to the sweep directory

  ArrayGeometry geometry() const { return ArrayGeometry::linear(num_mics, spacing_d, speed_of_sound); }
};

/// `num_angles` angles evenly spanning [-pi, pi] inclusive.
inline std::vector<double> sweep_angles(std::size_t num_angles) {
  require(num_angles >= 2, "sweep_angles: need at least two angles");
  std::vector<double> a(num_angles);
  for (std::size_t i = 0; i < num_angles; ++i)
    a[i] = -kPi + kTwoPi * static_cast<double>(i) / static_cast<double>(num_angles - 1);
  return a;
}

inline SweepManifest make_sweep(double spacing_d, std::size_t num_angles = 121, std::uint64_t noise_seed = 0,
                                double duration_s = 2.0) {
  SweepManifest m;
  m.angles = sweep_angles(num_angles);
  m.spacing_d = spacing_d;
  m.noise_seed = noise_seed;
  m.duration_s = duration_s;
  m.array_center = Point3(m.room.width / 2.0, m.room.length / 2.0, kSourceHeight);
  return m;
}

inline nlohmann::json to_json(const SweepManifest& m) {
  return {{"angles", m.angles},
          {"room", to_json(m.room)},
          {"distance", m.distance},
          {"spacing_d", m.spacing_d},
          {"num_mics", m.num_mics},
          {"noise_seed", m.noise_seed},
          {"duration_s", m.duration_s},
          {"sample_rate", m.sample_rate},
          {"speed_of_sound", m.speed_of_sound},
          {"array_center", to_json(m.array_center)},
          {"fractional_delay", m.fractional_delay},
          {"wav_paths", m.wav_paths}};
}

inline SweepManifest sweep_from_json(const nlohmann::json& j) {
  SweepManifest m;
  m.angles = j.at("angles").get<std::vector<double>>();
  m.room = room_from_json(j.at("room"));
  m.distance = j.at("distance").get<double>();
  m.spacing_d = j.at("spacing_d").get<double>();
  m.num_mics = j.at("num_mics").get<std::size_t>();
  m.noise_seed = j.at("noise_seed").get<std::uint64_t>();
  m.duration_s = j.at("duration_s").get<double>();
  m.sample_rate = j.at("sample_rate").get<double>();
  m.speed_of_sound = j.at("speed_of_sound").get<double>();
  m.array_center = point_from_json(j.at("array_center"));
  m.fractional_delay = j.value("fractional_delay", true);
  m.wav_paths = j.value("wav_paths", std::vector<std::string>{});
  return m;
}

inline TimeSignal sweep_source_signal(const SweepManifest& m) {
  Rng rng(m.noise_seed);
  const auto n = static_cast<std::size_t>(std::lround(m.duration_s * m.sample_rate));
  require(n > 0, "sweep: duration must be positive");
  return TimeSignal::mono(rng.white_noise(n), m.sample_rate);
}

/// Anechoic multichannel recording of the sweep's white-noise source at
/// angle index i.
inline TimeSignal render_sweep_angle(const SweepManifest& m, const TimeSignal& source, std::size_t i) {
  const auto geom = m.geometry();
  const auto mics = geom.placed(m.array_center, 0.0);
  const Point3 src = source_position(geom, m.array_center, 0.0, m.angles.at(i), m.distance);
  RirOptions opt{m.sample_rate, m.speed_of_sound, 0, m.fractional_delay};
  RoomSpec room = m.room;
  room.anechoic = true;
  return render_image(source.channel(0), simulate_rirs(room, src, mics, opt), m.sample_rate, source.num_samples());
}

inline constexpr const char* kSweepManifestName = "sweep.json";

/// Writes `<i>.wav` per angle plus sweep.json into `dir`. The same noise
/// realisation is emitted from every angle.
inline SweepManifest render_sweep(SweepManifest m, const fs::path& dir, std::size_t workers = 1) {
  require(!m.angles.empty(), "render_sweep: angle list must be non-empty");
  const auto source = sweep_source_signal(m);
  m.wav_paths.resize(m.angles.size());
  for (std::size_t i = 0; i < m.angles.size(); ++i) m.wav_paths[i] = std::to_string(i) + ".wav";
  fs::create_directories(dir);
  parallel_for(m.angles.size(), workers,
               [&](std::size_t i) { write_wav(dir / m.wav_paths[i], render_sweep_angle(m, source, i)); });
  write_json_atomic(dir / kSweepManifestName, to_json(m));
  return m;
}

inline SweepManifest load_sweep(const fs::path& dir) { return sweep_from_json(read_json(dir / kSweepManifestName)); }

} // namespace aliaslab
