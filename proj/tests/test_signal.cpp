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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "accentts/core/rng.hpp"
#include "accentts/signal/signal.hpp"
#include "accentts/signal/wav.hpp"
#include "common/test_util.hpp"

using namespace accentts;
namespace sg = accentts::signal;

namespace {

sg::Waveform Sine(double hz, double seconds, double amp = 0.5) {
  sg::Waveform w;
  w.rate = sg::kSampleRate;
  const std::size_t n = static_cast<std::size_t>(seconds * sg::kSampleRate);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = amp * std::sin(2.0 * M_PI * hz * i / sg::kSampleRate);
  }
  return w;
}

double MedianVoicedError(const sg::F0Contour& contour, double truth_hz) {
  std::vector<double> errs;
  for (std::size_t i = 0; i < contour.values.size(); ++i) {
    if (contour.voiced[i]) errs.push_back(std::fabs(contour.values[i] - truth_hz));
  }
  REQUIRE(!errs.empty());
  std::sort(errs.begin(), errs.end());
  return errs[errs.size() / 2];
}

}  // namespace

TEST_CASE("trim_silence removes zero padding and keeps the tone") {
  sg::Waveform tone = Sine(220.0, 0.5);
  sg::Waveform padded;
  padded.rate = sg::kSampleRate;
  padded.samples.assign(4000, 0.0);
  padded.samples.insert(padded.samples.end(), tone.samples.begin(), tone.samples.end());
  padded.samples.insert(padded.samples.end(), 6000, 0.0);
  const sg::Waveform trimmed = sg::TrimSilence(padded);
  CHECK(std::llabs(static_cast<long long>(trimmed.samples.size()) -
                   static_cast<long long>(tone.samples.size())) <= 400);

  // No silent edges -> identity.
  const sg::Waveform same = sg::TrimSilence(tone);
  CHECK(same.samples.size() >= tone.samples.size() - 400);

  sg::Waveform zeros;
  zeros.samples.assign(8000, 0.0);
  CHECK_THROWS_AS(sg::TrimSilence(zeros), std::invalid_argument);
}

TEST_CASE("mel spectrogram frame math and log floor") {
  const sg::Waveform one_second = Sine(200.0, 1.0);
  const Matrix mel = sg::MelSpectrogram(one_second);
  CHECK(mel.cols() == 80);
  CHECK(mel.rows() == sg::NumFrames(one_second.samples.size()));
  CHECK(mel.rows() == 77);  // 1 + (16000 - 800) / 200
  CHECK(std::abs(mel.rows() - 80) <= 4);

  // All-zero input sits exactly on the floor.
  sg::Waveform zeros;
  zeros.samples.assign(1600, 0.0);
  const Matrix floor_mel = sg::MelSpectrogram(zeros);
  for (double v : floor_mel.raw()) CHECK(v == doctest::Approx(std::log(1e-10)));

  // Scaling the waveform by 2 adds ln 2 to frames above the floor.
  sg::Waveform loud = one_second;
  for (double& s : loud.samples) s *= 2.0;
  const Matrix mel2 = sg::MelSpectrogram(loud);
  int checked = 0;
  for (int t = 0; t < mel.rows(); ++t) {
    for (int m = 0; m < mel.cols(); ++m) {
      if (mel.at(t, m) > std::log(1e-10) + 1.0 && mel2.at(t, m) > std::log(1e-10) + 1.0) {
        CHECK(mel2.at(t, m) - mel.at(t, m) == doctest::Approx(std::log(2.0)).epsilon(1e-6));
        ++checked;
      }
    }
  }
  CHECK(checked > 100);

  sg::Waveform tiny;
  tiny.samples.assign(300, 0.1);
  CHECK_THROWS_AS(sg::MelSpectrogram(tiny), std::invalid_argument);
}

TEST_CASE("f0 estimation on sinusoids, silence and noise") {
  for (double hz : {120.0, 220.0, 330.0}) {
    const sg::F0Contour contour = sg::EstimateF0(Sine(hz, 1.0));
    CHECK(MedianVoicedError(contour, hz) <= 3.0);
    int voiced = 0;
    for (bool v : contour.voiced) voiced += v ? 1 : 0;
    CHECK(static_cast<double>(voiced) / contour.voiced.size() > 0.9);
  }

  sg::Waveform silence;
  silence.samples.assign(16000, 0.0);
  const sg::F0Contour quiet = sg::EstimateF0(silence);
  for (bool v : quiet.voiced) CHECK(!v);

  Rng rng(42);
  sg::Waveform noise;
  noise.rate = sg::kSampleRate;
  noise.samples.resize(16000);
  for (double& s : noise.samples) s = rng.uniform(-0.5, 0.5);
  const sg::F0Contour noisy = sg::EstimateF0(noise);
  int voiced = 0;
  for (bool v : noisy.voiced) voiced += v ? 1 : 0;
  CHECK(static_cast<double>(voiced) / noisy.voiced.size() < 0.5);
}

TEST_CASE("unvoiced interpolation") {
  sg::F0Contour f0;
  f0.values = {100.0, 0.0, 0.0, 200.0};
  f0.voiced = {true, false, false, true};
  const auto interp = sg::InterpolateUnvoiced(f0);
  CHECK(interp[0] == doctest::Approx(100.0));
  CHECK(interp[1] == doctest::Approx(100.0 + 100.0 / 3.0).epsilon(1e-9));
  CHECK(interp[2] == doctest::Approx(100.0 + 200.0 / 3.0).epsilon(1e-9));
  CHECK(interp[3] == doctest::Approx(200.0));

  sg::F0Contour all;
  all.values = {90.0, 95.0};
  all.voiced = {true, true};
  CHECK(sg::InterpolateUnvoiced(all) == all.values);

  sg::F0Contour edges;
  edges.values = {0.0, 150.0, 0.0};
  edges.voiced = {false, true, false};
  const auto held = sg::InterpolateUnvoiced(edges);
  CHECK(held == std::vector<double>{150.0, 150.0, 150.0});

  sg::F0Contour none;
  none.values = {0.0};
  none.voiced = {false};
  CHECK_THROWS_AS(sg::InterpolateUnvoiced(none), std::invalid_argument);

  // Idempotent and voiced-preserving.
  sg::F0Contour again;
  again.values = sg::InterpolateUnvoiced(f0);
  again.voiced.assign(4, true);
  CHECK(sg::InterpolateUnvoiced(again) == again.values);
}

TEST_CASE("phoneme averaging over segments") {
  const std::vector<double> f0{100.0, 110.0, 200.0, 210.0};
  const std::vector<sg::AlignmentSegment> segments{{0, 0, 2}, {1, 2, 4}};
  const auto avg = sg::PhonemeAverageF0(f0, segments);
  CHECK(avg == std::vector<double>{105.0, 205.0});
  CHECK(sg::PhonemeAverageF0(f0, {{0, 0, 4}})[0] == doctest::Approx(155.0));
  CHECK(sg::PhonemeAverageF0(f0, {{0, 0, 1}, {1, 1, 4}})[0] == doctest::Approx(100.0));

  CHECK_THROWS_AS(sg::PhonemeAverageF0(f0, {{0, 0, 2}, {1, 3, 4}}), std::invalid_argument);

  // Linearity: scaling f0 scales the averages.
  std::vector<double> scaled = f0;
  for (double& v : scaled) v *= 2.5;
  const auto scaled_avg = sg::PhonemeAverageF0(scaled, segments);
  for (std::size_t i = 0; i < avg.size(); ++i) {
    CHECK(scaled_avg[i] == doctest::Approx(2.5 * avg[i]));
  }
}

TEST_CASE("f0 normalization stats") {
  const std::vector<double> values{90.0, 110.0, 130.0, 150.0};
  const auto [normed, stats] = sg::F0StatsAndNormalize(values, std::nullopt);
  double mean = 0.0;
  for (double v : normed) mean += v;
  mean /= normed.size();
  double var = 0.0;
  for (double v : normed) var += (v - mean) * (v - mean);
  var /= normed.size();
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-9));

  const auto [fixed, used] = sg::F0StatsAndNormalize({200.0}, sg::NormStats{100.0, 50.0});
  CHECK(fixed[0] == doctest::Approx(2.0));
  CHECK(used.mean == doctest::Approx(100.0));

  CHECK_THROWS_AS(sg::F0StatsAndNormalize({5.0, 5.0, 5.0}, std::nullopt),
                  std::invalid_argument);
}

TEST_CASE("durations from alignment") {
  CHECK(sg::DurationsFromAlignment({{0, 0, 10}})[0] == doctest::Approx(std::log(10.0)));
  CHECK(sg::DurationsFromAlignment({{0, 3, 4}})[0] == doctest::Approx(0.0));
  const std::vector<sg::AlignmentSegment> segs{{0, 0, 3}, {1, 3, 10}, {2, 10, 14}};
  const auto logdur = sg::DurationsFromAlignment(segs);
  double total = 0.0;
  for (double v : logdur) total += std::round(std::exp(v));
  CHECK(total == doctest::Approx(14.0));
}

TEST_CASE("mel inversion round trip") {
  // Two-tone toy audio similar to the corpus generator's output.
  sg::Waveform wave = Sine(220.0, 0.6, 0.45);
  const sg::Waveform upper = Sine(440.0, 0.6, 0.18);
  for (std::size_t i = 0; i < wave.samples.size(); ++i) wave.samples[i] += upper.samples[i];

  const Matrix mel = sg::MelSpectrogram(wave);
  const sg::Waveform rec = sg::InvertMel(mel, 32);
  CHECK(std::llabs(static_cast<long long>(rec.samples.size()) -
                   static_cast<long long>(mel.rows()) * sg::kHopSamples) <= sg::kWinSamples);

  const Matrix rec_mel = sg::MelSpectrogram(rec);
  const int frames = std::min(mel.rows(), rec_mel.rows());
  double corr_sum = 0.0;
  for (int t = 0; t < frames; ++t) {
    double ma = 0.0, mb = 0.0;
    for (int m = 0; m < 80; ++m) {
      ma += mel.at(t, m);
      mb += rec_mel.at(t, m);
    }
    ma /= 80.0;
    mb /= 80.0;
    double num = 0.0, da = 0.0, db = 0.0;
    for (int m = 0; m < 80; ++m) {
      num += (mel.at(t, m) - ma) * (rec_mel.at(t, m) - mb);
      da += (mel.at(t, m) - ma) * (mel.at(t, m) - ma);
      db += (rec_mel.at(t, m) - mb) * (rec_mel.at(t, m) - mb);
    }
    corr_sum += num / std::sqrt(da * db + 1e-12);
  }
  CHECK(corr_sum / frames > 0.7);

  // Floor-valued mel comes back as near silence.
  Matrix floor_mel(20, 80, std::log(1e-10));
  const sg::Waveform quiet = sg::InvertMel(floor_mel, 8);
  double rms = 0.0;
  for (double s : quiet.samples) rms += s * s;
  rms = std::sqrt(rms / quiet.samples.size());
  CHECK(rms < 1e-3);
}

TEST_CASE("frame count agreement between mel and f0") {
  Rng rng(9);
  for (double seconds : {0.31, 0.5, 0.77}) {
    sg::Waveform w = Sine(150.0 + rng.uniform() * 100.0, seconds);
    CHECK(sg::MelSpectrogram(w).rows() ==
          static_cast<int>(sg::EstimateF0(w).values.size()));
  }
}

TEST_CASE("wav io round trip with stereo downmix") {
  const std::string dir = testutil::TempDir("wav_io");
  sg::Waveform w = Sine(180.0, 0.25, 0.4);
  sg::WriteWav(dir + "/mono.wav", w);
  const sg::Waveform back = sg::ReadWav(dir + "/mono.wav");
  REQUIRE(back.samples.size() == w.samples.size());
  double max_err = 0.0;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    max_err = std::max(max_err, std::fabs(back.samples[i] - w.samples[i]));
  }
  CHECK(max_err < 2.0 / 32768.0);
}

TEST_CASE("alignment tsv io") {
  const std::string dir = testutil::TempDir("align_io");
  const std::vector<sg::AlignmentEntry> entries{{"aa", 0, 4}, {"<wb>", 4, 7}, {"tt", 7, 12}};
  sg::WriteAlignmentTsv(dir + "/a.tsv", entries);
  const auto back = sg::ReadAlignmentTsv(dir + "/a.tsv");
  REQUIRE(back.size() == 3);
  CHECK(back[1].symbol == "<wb>");
  CHECK(back[2].end_frame == 12);
}
