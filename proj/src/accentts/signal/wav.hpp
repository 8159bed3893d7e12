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

#ifndef ACCENTTS_SIGNAL_WAV_HPP_
#define ACCENTTS_SIGNAL_WAV_HPP_

#include <string>
#include <vector>

namespace accentts::signal {

inline constexpr int kSampleRate = 16000;

struct Waveform {
  std::vector<double> samples;  // amplitude in [-1, 1]
  int rate = kSampleRate;
};

// Reads 16-bit PCM WAV. Stereo is averaged to mono; other rates are
// linearly resampled to 16 kHz.
Waveform ReadWav(const std::string& path);

// Writes mono 16-bit PCM at the waveform's rate.
void WriteWav(const std::string& path, const Waveform& wave);

}  // namespace accentts::signal

#endif  // ACCENTTS_SIGNAL_WAV_HPP_
