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

#ifndef ACCENTTS_METRICS_METRICS_HPP_
#define ACCENTTS_METRICS_METRICS_HPP_

#include <utility>
#include <vector>

#include "accentts/core/matrix.hpp"

namespace accentts::metrics {

// Unit-cost Levenshtein distance between token sequences.
int Levenshtein(const std::vector<int>& a, const std::vector<int>& b);
int LevenshteinSeq(const std::vector<std::vector<int>>& a,
                   const std::vector<std::vector<int>>& b);

struct EditOp {
  enum Kind { kMatch, kSub, kDel, kIns };
  Kind kind;
  int ref_pos;  // -1 for insertions
  int hyp_pos;  // -1 for deletions
};

// Minimal-cost alignment between ref and hyp. Backtrace ties prefer the
// diagonal step, then deletion, then insertion.
std::vector<EditOp> LevenshteinAlignment(const std::vector<int>& ref,
                                         const std::vector<int>& hyp);

// Phoneme error rate: Levenshtein(ref, hyp) / |ref|. May exceed 1.
double Per(const std::vector<int>& ref, const std::vector<int>& hyp);

// Word error rate over sequences carrying word-boundary tokens: both sides
// are split at wb_token into word-level phoneme groups, two groups match
// only when their phoneme lists are identical, and the group-level
// Levenshtein distance is normalized by the reference word count.
double Wer(const std::vector<int>& ref, const std::vector<int>& hyp, int wb_token);

// Mean over rows of sum_c ref[c] * ln(ref[c] / gen[c]), both clamped below
// at 1e-10; each row's contribution is floored at zero so the clamping can
// never produce a negative divergence.
double KldPosteriorgram(const Matrix& ref, const Matrix& gen);

// Monotone alignment path between a reference of N frames and a generated
// sequence of M frames. Pairs are (ref_index, gen_index).
struct DtwPath {
  std::vector<std::pair<int, int>> pairs;
  double cost = 0.0;
};

DtwPath IdentityPath(int n);

// Minimal-total-cost monotone path under Euclidean frame distance with
// steps {(1,0),(0,1),(1,1)}; ties prefer (1,1), then (1,0), then (0,1).
DtwPath DtwAlign(const Matrix& ref_mel, const Matrix& gen_mel);

// RMSE of linear-Hz F0 over path pairs where both frames are voiced.
double F0Rmse(const std::vector<double>& ref_f0, const std::vector<bool>& ref_voiced,
              const std::vector<double>& gen_f0, const std::vector<bool>& gen_voiced,
              const DtwPath& path);

// Pearson correlation of natural-log F0 over path pairs where both frames
// are voiced.
double LogF0Correlation(const std::vector<double>& ref_f0,
                        const std::vector<bool>& ref_voiced,
                        const std::vector<double>& gen_f0,
                        const std::vector<bool>& gen_voiced, const DtwPath& path);

// Fraction of path pairs whose voicing labels disagree.
double UvErrorRate(const std::vector<bool>& ref_voiced, const std::vector<bool>& gen_voiced,
                   const DtwPath& path);

// sqrt(mean over the path of (ref_index - gen_index)^2), in frames.
double FrameDisturbance(const DtwPath& path);

// RMSE of per-phoneme durations converted to milliseconds.
double DurationRmseMs(const std::vector<double>& ref_frames,
                      const std::vector<double>& gen_frames, double hop_ms = 12.5);

}  // namespace accentts::metrics

#endif  // ACCENTTS_METRICS_METRICS_HPP_
