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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "aliaslab/common.hpp"
#include "aliaslab/signal.hpp"

// RIFF/WAVE reader and writer. Supported encodings: 16-bit PCM and 32-bit
// IEEE float, any channel count, interleaved. Little-endian hosts only.

namespace aliaslab {

static_assert(std::endian::native == std::endian::little, "wav.hpp assumes a little-endian host");

enum class WavEncoding { Pcm16, Float32 };

namespace detail {

inline constexpr std::uint16_t kWavFormatPcm = 1;
inline constexpr std::uint16_t kWavFormatFloat = 3;
inline constexpr std::uint16_t kWavFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const std::vector<char>& buf, std::size_t offset) {
  T v{};
  std::memcpy(&v, buf.data() + offset, sizeof(T));
  return v;
}

template <typename T>
void write_le(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

} // namespace detail

/// Reads a WAV file. With expected_rate set, a differing file rate is an
/// error (no resampling is performed).
inline TimeSignal read_wav(const std::filesystem::path& path, std::optional<double> expected_rate = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot open WAV file: " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto fail = [&](const std::string& why) { throw InvalidArgument("malformed WAV file " + path.string() + ": " + why); };

  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    fail("missing RIFF/WAVE header");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_offset = 0, data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::string id(buf.data() + pos, 4);
    const auto size = detail::read_le<std::uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > buf.size()) fail("truncated fmt chunk");
      format = detail::read_le<std::uint16_t>(buf, body);
      channels = detail::read_le<std::uint16_t>(buf, body + 2);
      rate = detail::read_le<std::uint32_t>(buf, body + 4);
      bits = detail::read_le<std::uint16_t>(buf, body + 14);
      if (format == detail::kWavFormatExtensible) {
        if (size < 40) fail("truncated WAVE_FORMAT_EXTENSIBLE chunk");
        format = detail::read_le<std::uint16_t>(buf, body + 24); // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      data_offset = body;
      data_size = std::min<std::size_t>(size, buf.size() - body);
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) fail("no fmt chunk");
  if (data_offset == 0) fail("no data chunk");
  if (channels == 0) fail("zero channels");

  const bool pcm16 = format == detail::kWavFormatPcm && bits == 16;
  const bool f32 = format == detail::kWavFormatFloat && bits == 32;
  if (!pcm16 && !f32) fail("unsupported encoding (need 16-bit PCM or 32-bit float)");

  if (expected_rate && std::abs(*expected_rate - static_cast<double>(rate)) > 1e-9)
    throw InvalidArgument("sample-rate mismatch in " + path.string() + ": file has " + std::to_string(rate) +
                          " Hz, expected " + std::to_string(static_cast<long long>(*expected_rate)) + " Hz");

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frames = data_size / (bytes_per_sample * channels);
  std::vector<std::vector<double>> out(channels, std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i)
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t off = data_offset + (i * channels + c) * bytes_per_sample;
      out[c][i] = pcm16 ? detail::read_le<std::int16_t>(buf, off) / 32768.0
                        : static_cast<double>(detail::read_le<float>(buf, off));
    }
  return TimeSignal(std::move(out), static_cast<double>(rate));
}

/// Writes an interleaved WAV file. PCM16 output is clipped to [-1, 1).
inline void write_wav(const std::filesystem::path& path, const TimeSignal& signal,
                      WavEncoding encoding = WavEncoding::Float32) {
  const auto channels = static_cast<std::uint16_t>(signal.num_channels());
  const auto rate = static_cast<std::uint32_t>(std::lround(signal.sample_rate()));
  const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : 32;
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
  const auto data_size = static_cast<std::uint32_t>(signal.num_samples() * block_align);

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write WAV file: " + path.string());

  os.write("RIFF", 4);
  detail::write_le<std::uint32_t>(os, 36 + data_size);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  detail::write_le<std::uint32_t>(os, 16);
  detail::write_le<std::uint16_t>(os, encoding == WavEncoding::Pcm16 ? detail::kWavFormatPcm : detail::kWavFormatFloat);
  detail::write_le<std::uint16_t>(os, channels);
  detail::write_le<std::uint32_t>(os, rate);
  detail::write_le<std::uint32_t>(os, rate * block_align);
  detail::write_le<std::uint16_t>(os, block_align);
  detail::write_le<std::uint16_t>(os, bits);
  os.write("data", 4);
  detail::write_le<std::uint32_t>(os, data_size);

  for (std::size_t i = 0; i < signal.num_samples(); ++i)
    for (std::size_t c = 0; c < signal.num_channels(); ++c) {
      const double v = signal.channel(c)[i];
      if (encoding == WavEncoding::Pcm16) {
        const double scaled = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        detail::write_le<std::int16_t>(os, static_cast<std::int16_t>(scaled));
      } else {
        detail::write_le<float>(os, static_cast<float>(v));
      }
    }
  if (!os) throw std::runtime_error("short write on WAV file: " + path.string());
}

} // namespace aliaslab
