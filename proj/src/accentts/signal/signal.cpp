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

#include "accentts/signal/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace accentts::signal {

namespace {

using Complex = std::complex<double>;

// Iterative radix-2 FFT; n must be a power of two.
void Fft(std::vector<Complex>* a, bool inverse) {
  const std::size_t n = a->size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: size not power of two");
  auto& x = *a;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const Complex wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const Complex u = x[i + k];
        const Complex v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& v : x) v /= static_cast<double>(n);
  }
}

std::vector<double> HannWindow(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  return w;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// [kMelBins x (kFftSize/2 + 1)] triangular filters.
const Matrix& MelFilterbank() {
  static const Matrix fb = [] {
    const int n_bins = kFftSize / 2 + 1;
    Matrix fbm(kMelBins, n_bins);
    const double mel_lo = HzToMel(kMelFmin);
    const double mel_hi = HzToMel(kMelFmax);
    std::vector<double> hz_pts(kMelBins + 2);
    for (int i = 0; i < kMelBins + 2; ++i) {
      hz_pts[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (kMelBins + 1));
    }
    for (int m = 0; m < kMelBins; ++m) {
      const double f_lo = hz_pts[m], f_c = hz_pts[m + 1], f_hi = hz_pts[m + 2];
      for (int k = 0; k < n_bins; ++k) {
        const double f = static_cast<double>(k) * kSampleRate / kFftSize;
        double w = 0.0;
        if (f > f_lo && f < f_c) {
          w = (f - f_lo) / (f_c - f_lo);
        } else if (f >= f_c && f < f_hi) {
          w = (f_hi - f) / (f_hi - f_c);
        }
        fbm.at(m, k) = w;
      }
    }
    return fbm;
  }();
  return fb;
}

Matrix StftMagnitude(const std::vector<double>& samples) {
  const int frames = NumFrames(samples.size());
  if (frames <= 0) throw std::invalid_argument("stft: waveform shorter than one window");
  static const std::vector<double> win = HannWindow(kWinSamples);
  const int n_bins = kFftSize / 2 + 1;
  Matrix mag(frames, n_bins);
  std::vector<Complex> buf(kFftSize);
  for (int t = 0; t < frames; ++t) {
    const std::size_t off = static_cast<std::size_t>(t) * kHopSamples;
    for (int i = 0; i < kWinSamples; ++i) buf[i] = Complex(samples[off + i] * win[i], 0.0);
    for (int i = kWinSamples; i < kFftSize; ++i) buf[i] = Complex(0.0, 0.0);
    Fft(&buf, false);
    for (int k = 0; k < n_bins; ++k) mag.at(t, k) = std::abs(buf[k]);
  }
  return mag;
}

}  // namespace

int NumFrames(std::size_t num_samples) {
  if (num_samples < static_cast<std::size_t>(kWinSamples)) return 0;
  return 1 + static_cast<int>((num_samples - kWinSamples) / kHopSamples);
}

Waveform TrimSilence(const Waveform& wave, double threshold_db, int window_samples) {
  if (wave.samples.empty()) throw std::invalid_argument("trim_silence: empty waveform");
  const int n_win = static_cast<int>(wave.samples.size()) / window_samples;
  if (n_win == 0) throw std::invalid_argument("trim_silence: waveform shorter than one window");
  std::vector<double> rms(n_win);
  double peak = 0.0;
  for (int w = 0; w < n_win; ++w) {
    double s = 0.0;
    for (int i = 0; i < window_samples; ++i) {
      const double v = wave.samples[static_cast<std::size_t>(w) * window_samples + i];
      s += v * v;
    }
    rms[w] = std::sqrt(s / window_samples);
    peak = std::max(peak, rms[w]);
  }
  if (peak <= 0.0) throw std::invalid_argument("trim_silence: all-silent input");
  const double threshold = peak * std::pow(10.0, -threshold_db / 20.0);
  int first = 0, last = n_win - 1;
  while (first < n_win && rms[first] < threshold) ++first;
  while (last >= first && rms[last] < threshold) --last;
  if (first > last) throw std::invalid_argument("trim_silence: all-silent input");
  const std::size_t begin = static_cast<std::size_t>(first) * window_samples;
  const std::size_t end = std::min(wave.samples.size(),
                                   static_cast<std::size_t>(last + 1) * window_samples);
  Waveform out;
  out.rate = wave.rate;
  out.samples.assign(wave.samples.begin() + begin, wave.samples.begin() + end);
  return out;
}

Matrix MelSpectrogram(const Waveform& wave) {
  if (wave.rate != kSampleRate) {
    throw std::invalid_argument("mel_spectrogram: expected 16 kHz waveform");
  }
  const Matrix mag = StftMagnitude(wave.samples);
  const Matrix& fb = MelFilterbank();
  Matrix mel(mag.rows(), kMelBins);
  for (int t = 0; t < mag.rows(); ++t) {
    for (int m = 0; m < kMelBins; ++m) {
      double acc = 0.0;
      const double* fbrow = fb.row_ptr(m);
      const double* magrow = mag.row_ptr(t);
      for (int k = 0; k < mag.cols(); ++k) acc += fbrow[k] * magrow[k];
      mel.at(t, m) = std::log(std::max(acc, kLogFloor));
    }
  }
  return mel;
}

F0Contour EstimateF0(const Waveform& wave, const F0Options& opts) {
  if (wave.rate != kSampleRate) {
    throw std::invalid_argument("estimate_f0: expected 16 kHz waveform");
  }
  const int frames = NumFrames(wave.samples.size());
  F0Contour contour;
  contour.values.assign(std::max(frames, 0), 0.0);
  contour.voiced.assign(std::max(frames, 0), false);
  if (frames <= 0) return contour;

  const int lag_min = std::max(2, static_cast<int>(std::floor(kSampleRate / opts.fmax_hz)));
  const int lag_max =
      std::min(kWinSamples - 2, static_cast<int>(std::ceil(kSampleRate / opts.fmin_hz)));
  if (lag_min >= lag_max) throw std::invalid_argument("estimate_f0: bad search band");

  std::vector<double> frame_rms(frames, 0.0);
  double peak_rms = 0.0;
  for (int t = 0; t < frames; ++t) {
    const std::size_t off = static_cast<std::size_t>(t) * kHopSamples;
    double s = 0.0;
    for (int i = 0; i < kWinSamples; ++i) s += wave.samples[off + i] * wave.samples[off + i];
    frame_rms[t] = std::sqrt(s / kWinSamples);
    peak_rms = std::max(peak_rms, frame_rms[t]);
  }
  const double silence_floor =
      std::max(1e-5, peak_rms * std::pow(10.0, -opts.silence_db / 20.0));

  std::vector<double> x(kWinSamples);
  std::vector<double> r(lag_max + 2, 0.0);
  for (int t = 0; t < frames; ++t) {
    if (frame_rms[t] < silence_floor) continue;
    const std::size_t off = static_cast<std::size_t>(t) * kHopSamples;
    double mean = 0.0;
    for (int i = 0; i < kWinSamples; ++i) mean += wave.samples[off + i];
    mean /= kWinSamples;
    for (int i = 0; i < kWinSamples; ++i) x[i] = wave.samples[off + i] - mean;

    // Normalized autocorrelation over the lag band, plus one lag of margin
    // on each side for the parabolic refinement.
    double best = -1.0;
    for (int lag = lag_min - 1; lag <= lag_max + 1; ++lag) {
      double num = 0.0, e0 = 0.0, e1 = 0.0;
      const int n = kWinSamples - lag;
      for (int i = 0; i < n; ++i) {
        num += x[i] * x[i + lag];
        e0 += x[i] * x[i];
        e1 += x[i + lag] * x[i + lag];
      }
      const double denom = std::sqrt(e0 * e1);
      r[lag] = denom > 0.0 ? num / denom : 0.0;
      if (lag >= lag_min && lag <= lag_max) best = std::max(best, r[lag]);
    }
    if (best < opts.voicing_threshold) continue;

    // Earliest local maximum close to the global one avoids octave-down
    // picks on strongly periodic frames.
    int pick = -1;
    for (int lag = lag_min; lag <= lag_max; ++lag) {
      if (r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] >= 0.9 * best) {
        pick = lag;
        break;
      }
    }
    if (pick < 0) continue;

    double refined = static_cast<double>(pick);
    const double denom = r[pick - 1] - 2.0 * r[pick] + r[pick + 1];
    if (std::fabs(denom) > 1e-12) {
      const double delta = 0.5 * (r[pick - 1] - r[pick + 1]) / denom;
      if (std::fabs(delta) <= 1.0) refined += delta;
    }
    contour.values[t] = kSampleRate / refined;
    contour.voiced[t] = true;
  }
  return contour;
}

std::vector<double> InterpolateUnvoiced(const F0Contour& f0) {
  const std::size_t n = f0.values.size();
  if (n != f0.voiced.size()) {
    throw std::invalid_argument("interpolate_unvoiced: values/flags length mismatch");
  }
  std::vector<int> voiced_idx;
  for (std::size_t i = 0; i < n; ++i) {
    if (f0.voiced[i]) voiced_idx.push_back(static_cast<int>(i));
  }
  if (voiced_idx.empty()) {
    throw std::invalid_argument("interpolate_unvoiced: no voiced frames");
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (f0.voiced[i]) {
      out[i] = f0.values[i];
      continue;
    }
    const auto it = std::lower_bound(voiced_idx.begin(), voiced_idx.end(), static_cast<int>(i));
    if (it == voiced_idx.begin()) {
      out[i] = f0.values[voiced_idx.front()];
    } else if (it == voiced_idx.end()) {
      out[i] = f0.values[voiced_idx.back()];
    } else {
      const int hi = *it;
      const int lo = *(it - 1);
      const double frac = static_cast<double>(static_cast<int>(i) - lo) / (hi - lo);
      out[i] = f0.values[lo] * (1.0 - frac) + f0.values[hi] * frac;
    }
  }
  return out;
}

void ValidateSegments(const std::vector<AlignmentSegment>& segments, int num_frames) {
  if (segments.empty()) throw std::invalid_argument("alignment: no segments");
  int cursor = 0;
  for (const auto& seg : segments) {
    if (seg.start_frame != cursor) {
      throw std::invalid_argument("alignment: gap or overlap at frame " +
                                  std::to_string(seg.start_frame));
    }
    if (seg.end_frame <= seg.start_frame) {
      throw std::invalid_argument("alignment: empty segment at frame " +
                                  std::to_string(seg.start_frame));
    }
    cursor = seg.end_frame;
  }
  if (cursor != num_frames) {
    throw std::invalid_argument("alignment: segments cover " + std::to_string(cursor) +
                                " frames, expected " + std::to_string(num_frames));
  }
}

std::vector<double> PhonemeAverageF0(const std::vector<double>& f0_interp,
                                     const std::vector<AlignmentSegment>& segments) {
  ValidateSegments(segments, static_cast<int>(f0_interp.size()));
  std::vector<double> out;
  out.reserve(segments.size());
  for (const auto& seg : segments) {
    double s = 0.0;
    for (int i = seg.start_frame; i < seg.end_frame; ++i) s += f0_interp[i];
    out.push_back(s / (seg.end_frame - seg.start_frame));
  }
  return out;
}

std::pair<std::vector<double>, NormStats> F0StatsAndNormalize(
    const std::vector<double>& values, const std::optional<NormStats>& stats) {
  if (values.empty()) throw std::invalid_argument("f0_normalize: empty input");
  NormStats used;
  if (stats.has_value()) {
    used = *stats;
  } else {
    double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= values.size();
    used.mean = mean;
    used.std = std::sqrt(var);
  }
  if (used.std <= 0.0) throw std::invalid_argument("f0_normalize: zero standard deviation");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - used.mean) / used.std;
  return {std::move(out), used};
}

std::vector<double> DurationsFromAlignment(const std::vector<AlignmentSegment>& segments) {
  std::vector<double> out;
  out.reserve(segments.size());
  for (const auto& seg : segments) {
    const int frames = seg.end_frame - seg.start_frame;
    if (frames <= 0) {
      throw std::invalid_argument("durations: empty segment at frame " +
                                  std::to_string(seg.start_frame));
    }
    out.push_back(std::log(static_cast<double>(frames)));
  }
  return out;
}

namespace {

// Least-squares inverse of the mel filterbank with a small ridge.
const Matrix& MelPseudoInverse() {
  static const Matrix pinv = [] {
    const Matrix& fb = MelFilterbank();  // [M x K]
    const int m = fb.rows(), k = fb.cols();
    // G = fb * fb^T + ridge I, [M x M]
    Matrix g(m, m);
    MatMulTransBAcc(fb, fb, &g);
    for (int i = 0; i < m; ++i) g.at(i, i) += 1e-8;
    // Invert via Gauss-Jordan.
    Matrix inv(m, m);
    for (int i = 0; i < m; ++i) inv.at(i, i) = 1.0;
    for (int col = 0; col < m; ++col) {
      int pivot = col;
      for (int r = col + 1; r < m; ++r) {
        if (std::fabs(g.at(r, col)) > std::fabs(g.at(pivot, col))) pivot = r;
      }
      if (std::fabs(g.at(pivot, col)) < 1e-14) {
        throw std::runtime_error("mel pseudo-inverse: singular gram matrix");
      }
      if (pivot != col) {
        for (int c = 0; c < m; ++c) {
          std::swap(g.at(pivot, c), g.at(col, c));
          std::swap(inv.at(pivot, c), inv.at(col, c));
        }
      }
      const double d = g.at(col, col);
      for (int c = 0; c < m; ++c) {
        g.at(col, c) /= d;
        inv.at(col, c) /= d;
      }
      for (int r = 0; r < m; ++r) {
        if (r == col) continue;
        const double f = g.at(r, col);
        if (f == 0.0) continue;
        for (int c = 0; c < m; ++c) {
          g.at(r, c) -= f * g.at(col, c);
          inv.at(r, c) -= f * inv.at(col, c);
        }
      }
    }
    // pinv = fb^T * inv(G), [K x M]
    Matrix fbt = Transpose(fb);
    Matrix out(k, m);
    MatMulAcc(fbt, inv, &out);
    return out;
  }();
  return pinv;
}

std::vector<double> Istft(const Matrix& mag, const Matrix& phase) {
  static const std::vector<double> win = HannWindow(kWinSamples);
  const int frames = mag.rows();
  const std::size_t out_len =
      static_cast<std::size_t>(frames - 1) * kHopSamples + kWinSamples;
  std::vector<double> out(out_len, 0.0);
  std::vector<double> norm(out_len, 0.0);
  std::vector<Complex> buf(kFftSize);
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k <= kFftSize / 2; ++k) {
      buf[k] = std::polar(mag.at(t, k), phase.at(t, k));
    }
    for (int k = kFftSize / 2 + 1; k < kFftSize; ++k) buf[k] = std::conj(buf[kFftSize - k]);
    Fft(&buf, true);
    const std::size_t off = static_cast<std::size_t>(t) * kHopSamples;
    for (int i = 0; i < kWinSamples; ++i) {
      out[off + i] += buf[i].real() * win[i];
      norm[off + i] += win[i] * win[i];
    }
  }
  for (std::size_t i = 0; i < out_len; ++i) {
    if (norm[i] > 1e-8) out[i] /= norm[i];
  }
  return out;
}

}  // namespace

Waveform InvertMel(const Matrix& mel, int iterations) {
  if (mel.rows() < 1 || mel.cols() != kMelBins) {
    throw std::invalid_argument("invert_mel: expected [N x 80] mel input");
  }
  const int frames = mel.rows();
  const int n_bins = kFftSize / 2 + 1;
  // Mel (log) -> linear magnitude.
  Matrix mel_lin(frames, kMelBins);
  for (int t = 0; t < frames; ++t) {
    for (int m = 0; m < kMelBins; ++m) mel_lin.at(t, m) = std::exp(mel.at(t, m));
  }
  const Matrix& pinv = MelPseudoInverse();  // [K x M]
  Matrix mag(frames, n_bins);
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < n_bins; ++k) {
      double acc = 0.0;
      const double* prow = pinv.row_ptr(k);
      const double* mrow = mel_lin.row_ptr(t);
      for (int m = 0; m < kMelBins; ++m) acc += prow[m] * mrow[m];
      mag.at(t, k) = std::max(acc, 0.0);
    }
  }
  // Griffin-Lim with zero phase init keeps the routine deterministic.
  Matrix phase(frames, n_bins);
  std::vector<double> wave_samples;
  for (int it = 0; it < std::max(iterations, 1); ++it) {
    wave_samples = Istft(mag, phase);
    if (it + 1 == std::max(iterations, 1)) break;
    static const std::vector<double> win = HannWindow(kWinSamples);
    std::vector<Complex> buf(kFftSize);
    const int re_frames = std::min(frames, NumFrames(wave_samples.size()));
    for (int t = 0; t < re_frames; ++t) {
      const std::size_t off = static_cast<std::size_t>(t) * kHopSamples;
      for (int i = 0; i < kWinSamples; ++i) {
        buf[i] = Complex(wave_samples[off + i] * win[i], 0.0);
      }
      for (int i = kWinSamples; i < kFftSize; ++i) buf[i] = Complex(0.0, 0.0);
      Fft(&buf, false);
      for (int k = 0; k < n_bins; ++k) phase.at(t, k) = std::arg(buf[k]);
    }
  }
  Waveform out;
  out.rate = kSampleRate;
  out.samples = std::move(wave_samples);
  double peak = 0.0;
  for (double v : out.samples) peak = std::max(peak, std::fabs(v));
  if (peak > 1.0) {
    for (double& v : out.samples) v /= peak;
  }
  return out;
}

std::vector<AlignmentEntry> ReadAlignmentTsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open alignment: " + path);
  std::vector<AlignmentEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    AlignmentEntry e;
    if (!(ls >> e.symbol >> e.start_frame >> e.end_frame)) {
      throw std::runtime_error("bad alignment line " + std::to_string(line_no) + " in " + path);
    }
    entries.push_back(e);
  }
  return entries;
}

void WriteAlignmentTsv(const std::string& path, const std::vector<AlignmentEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write alignment: " + path);
  for (const auto& e : entries) {
    out << e.symbol << "\t" << e.start_frame << "\t" << e.end_frame << "\n";
  }
}

}  // namespace accentts::signal
