// Copyright (c) 2026 The accentts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "accentts/signal/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace accentts::signal {

namespace {

struct RiffChunk {
  char id[4];
  std::uint32_t size;
};

std::vector<double> Resample(const std::vector<double>& x, int from_rate, int to_rate) {
  if (from_rate == to_rate || x.empty()) return x;
  const double ratio = static_cast<double>(from_rate) / to_rate;
  const std::size_t out_len =
      static_cast<std::size_t>(std::floor((x.size() - 1) / ratio)) + 1;
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = i * ratio;
    const std::size_t i0 = static_cast<std::size_t>(pos);
    const std::size_t i1 = std::min(i0 + 1, x.size() - 1);
    const double frac = pos - static_cast<double>(i0);
    out[i] = x[i0] * (1.0 - frac) + x[i1] * frac;
  }
  return out;
}

}  // namespace

Waveform ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open wav: " + path);
  char riff[4], wave_tag[4];
  std::uint32_t riff_size = 0;
  in.read(riff, 4);
  in.read(reinterpret_cast<char*>(&riff_size), 4);
  in.read(wave_tag, 4);
  if (!in || std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave_tag, "WAVE", 4) != 0) {
    throw std::runtime_error("not a RIFF/WAVE file: " + path);
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::vector<std::int16_t> pcm;
  bool have_fmt = false, have_data = false;
  RiffChunk chunk;
  while (in.read(reinterpret_cast<char*>(&chunk), sizeof(chunk))) {
    if (std::memcmp(chunk.id, "fmt ", 4) == 0) {
      std::vector<char> body(chunk.size);
      in.read(body.data(), chunk.size);
      if (chunk.size < 16) throw std::runtime_error("bad fmt chunk: " + path);
      std::memcpy(&format, body.data(), 2);
      std::memcpy(&channels, body.data() + 2, 2);
      std::memcpy(&rate, body.data() + 4, 4);
      std::memcpy(&bits, body.data() + 14, 2);
      have_fmt = true;
    } else if (std::memcmp(chunk.id, "data", 4) == 0) {
      pcm.resize(chunk.size / 2);
      in.read(reinterpret_cast<char*>(pcm.data()), chunk.size & ~1u);
      have_data = true;
    } else {
      in.seekg(chunk.size + (chunk.size & 1), std::ios::cur);
    }
    if (have_fmt && have_data) break;
  }
  if (!have_fmt || !have_data) throw std::runtime_error("missing fmt/data chunk: " + path);
  if (format != 1 || bits != 16) {
    throw std::runtime_error("only 16-bit PCM wav is supported: " + path);
  }
  if (channels == 0 || channels > 2) {
    throw std::runtime_error("unsupported channel count in " + path);
  }
  const std::size_t frames = pcm.size() / channels;
  std::vector<double> samples(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double v = 0.0;
    for (int c = 0; c < channels; ++c) v += pcm[i * channels + c];
    samples[i] = v / (channels * 32768.0);
  }
  Waveform wave;
  wave.samples = Resample(samples, static_cast<int>(rate), kSampleRate);
  wave.rate = kSampleRate;
  return wave;
}

void WriteWav(const std::string& path, const Waveform& wave) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write wav: " + path);
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(wave.samples.size() * 2);
  const std::uint32_t riff_size = 36 + data_bytes;
  const std::uint16_t format = 1, channels = 1, bits = 16;
  const std::uint32_t rate = static_cast<std::uint32_t>(wave.rate);
  const std::uint32_t byte_rate = rate * channels * bits / 8;
  const std::uint16_t block_align = channels * bits / 8;
  const std::uint32_t fmt_size = 16;
  out.write("RIFF", 4);
  out.write(reinterpret_cast<const char*>(&riff_size), 4);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  out.write(reinterpret_cast<const char*>(&fmt_size), 4);
  out.write(reinterpret_cast<const char*>(&format), 2);
  out.write(reinterpret_cast<const char*>(&channels), 2);
  out.write(reinterpret_cast<const char*>(&rate), 4);
  out.write(reinterpret_cast<const char*>(&byte_rate), 4);
  out.write(reinterpret_cast<const char*>(&block_align), 2);
  out.write(reinterpret_cast<const char*>(&bits), 2);
  out.write("data", 4);
  out.write(reinterpret_cast<const char*>(&data_bytes), 4);
  for (double s : wave.samples) {
    const double clamped = std::clamp(s, -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
    out.write(reinterpret_cast<const char*>(&v), 2);
  }
  if (!out) throw std::runtime_error("wav write failed: " + path);
}

}  // namespace accentts::signal
