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

#ifndef ACCENTTS_SIGNAL_SIGNAL_HPP_
#define ACCENTTS_SIGNAL_SIGNAL_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "accentts/core/matrix.hpp"
#include "accentts/signal/wav.hpp"

namespace accentts::signal {

// Shared framing: 12.5 ms hop, 50 ms window at 16 kHz. Mel extraction and
// F0 estimation use the same frame grid so their frame counts agree.
inline constexpr int kHopSamples = 200;
inline constexpr int kWinSamples = 800;
inline constexpr int kFftSize = 1024;
inline constexpr int kMelBins = 80;
inline constexpr double kMelFmin = 0.0;
inline constexpr double kMelFmax = 8000.0;
inline constexpr double kLogFloor = 1e-10;
inline constexpr double kHopMs = 12.5;

// 1 + floor((len - win) / hop); negative lengths clamp to 0 frames.
int NumFrames(std::size_t num_samples);

struct F0Contour {
  std::vector<double> values;  // Hz; 0 where unvoiced
  std::vector<bool> voiced;
};

struct AlignmentSegment {
  int phoneme;      // index into the caller's inventory
  int start_frame;  // inclusive
  int end_frame;    // exclusive
};

// Removes leading/trailing 25 ms windows whose RMS is more than
// `threshold_db` below the loudest window. Throws on all-silent input.
Waveform TrimSilence(const Waveform& wave, double threshold_db = 40.0,
                     int window_samples = 400);

// Log-magnitude 80-band mel spectrogram, [frames x 80].
Matrix MelSpectrogram(const Waveform& wave);

struct F0Options {
  double fmin_hz = 60.0;
  double fmax_hz = 400.0;
  double voicing_threshold = 0.3;
  double silence_db = 40.0;  // below the loudest frame
};

// Normalized-autocorrelation pitch tracker with parabolic peak refinement.
F0Contour EstimateF0(const Waveform& wave, const F0Options& opts = {});

// Linear interpolation across unvoiced gaps; leading/trailing unvoiced
// regions hold the nearest voiced value. Throws when nothing is voiced.
std::vector<double> InterpolateUnvoiced(const F0Contour& f0);

void ValidateSegments(const std::vector<AlignmentSegment>& segments, int num_frames);

// Arithmetic mean of the interpolated contour over each segment.
std::vector<double> PhonemeAverageF0(const std::vector<double>& f0_interp,
                                     const std::vector<AlignmentSegment>& segments);

struct NormStats {
  double mean = 0.0;
  double std = 1.0;
};

// (x - mean) / std. When stats are absent they are fit on `values`
// (pre-training pass); fine-tuning passes the pre-training stats back in.
std::pair<std::vector<double>, NormStats> F0StatsAndNormalize(
    const std::vector<double>& values, const std::optional<NormStats>& stats);

// Natural log of the frame count of each segment.
std::vector<double> DurationsFromAlignment(const std::vector<AlignmentSegment>& segments);

// Pseudo-inverse mel filterbank followed by iterative phase reconstruction.
// Low-fidelity debug audio, not a vocoder.
Waveform InvertMel(const Matrix& mel, int iterations = 32);

// Alignment TSV: `phoneme<TAB>start_frame<TAB>end_frame` per line, using
// phoneme symbols; mapping to indices is the caller's job.
struct AlignmentEntry {
  std::string symbol;
  int start_frame;
  int end_frame;
};
std::vector<AlignmentEntry> ReadAlignmentTsv(const std::string& path);
void WriteAlignmentTsv(const std::string& path, const std::vector<AlignmentEntry>& entries);

}  // namespace accentts::signal

#endif  // ACCENTTS_SIGNAL_SIGNAL_HPP_
