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

#include "accentts/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace accentts::metrics {

namespace {

template <typename Seq>
int LevenshteinImpl(const Seq& a, const Seq& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace

int Levenshtein(const std::vector<int>& a, const std::vector<int>& b) {
  return LevenshteinImpl(a, b);
}

int LevenshteinSeq(const std::vector<std::vector<int>>& a,
                   const std::vector<std::vector<int>>& b) {
  return LevenshteinImpl(a, b);
}

std::vector<EditOp> LevenshteinAlignment(const std::vector<int>& ref,
                                         const std::vector<int>& hyp) {
  const int n = static_cast<int>(ref.size());
  const int m = static_cast<int>(hyp.size());
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (int i = 0; i <= n; ++i) d[i][0] = i;
  for (int j = 0; j <= m; ++j) d[0][j] = j;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) {
      const int sub = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      d[i][j] = std::min({sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  }
  std::vector<EditOp> ops;
  int i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      ops.push_back({ref[i - 1] == hyp[j - 1] ? EditOp::kMatch : EditOp::kSub, i - 1, j - 1});
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ops.push_back({EditOp::kDel, i - 1, -1});
      --i;
    } else {
      ops.push_back({EditOp::kIns, -1, j - 1});
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

double Per(const std::vector<int>& ref, const std::vector<int>& hyp) {
  if (ref.empty()) throw std::invalid_argument("per: empty reference");
  return static_cast<double>(Levenshtein(ref, hyp)) / static_cast<double>(ref.size());
}

namespace {

std::vector<std::vector<int>> SplitAtToken(const std::vector<int>& seq, int wb_token) {
  std::vector<std::vector<int>> groups;
  std::vector<int> cur;
  for (int tok : seq) {
    if (tok == wb_token) {
      groups.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(tok);
    }
  }
  groups.push_back(cur);
  return groups;
}

}  // namespace

double Wer(const std::vector<int>& ref, const std::vector<int>& hyp, int wb_token) {
  if (ref.empty()) throw std::invalid_argument("wer: empty reference");
  const auto ref_words = SplitAtToken(ref, wb_token);
  const auto hyp_words = SplitAtToken(hyp, wb_token);
  return static_cast<double>(LevenshteinSeq(ref_words, hyp_words)) /
         static_cast<double>(ref_words.size());
}

double KldPosteriorgram(const Matrix& ref, const Matrix& gen) {
  if (!ref.same_shape(gen)) {
    throw std::invalid_argument("kld: shape mismatch " + ref.shape_str() + " vs " +
                                gen.shape_str());
  }
  if (ref.rows() == 0) throw std::invalid_argument("kld: empty posteriorgram");
  constexpr double kFloor = 1e-10;
  double total = 0.0;
  for (int r = 0; r < ref.rows(); ++r) {
    double row_kl = 0.0;
    for (int c = 0; c < ref.cols(); ++c) {
      const double p = std::max(ref.at(r, c), kFloor);
      const double q = std::max(gen.at(r, c), kFloor);
      row_kl += p * std::log(p / q);
    }
    total += std::max(row_kl, 0.0);
  }
  return total / ref.rows();
}

DtwPath IdentityPath(int n) {
  if (n <= 0) throw std::invalid_argument("identity path needs n >= 1");
  DtwPath path;
  path.pairs.reserve(n);
  for (int i = 0; i < n; ++i) path.pairs.emplace_back(i, i);
  return path;
}

namespace {

double FrameDistance(const Matrix& a, int i, const Matrix& b, int j) {
  double s = 0.0;
  const double* ra = a.row_ptr(i);
  const double* rb = b.row_ptr(j);
  for (int c = 0; c < a.cols(); ++c) {
    const double d = ra[c] - rb[c];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

DtwPath DtwAlign(const Matrix& ref_mel, const Matrix& gen_mel) {
  if (ref_mel.rows() == 0 || gen_mel.rows() == 0) {
    throw std::invalid_argument("dtw: empty input");
  }
  if (ref_mel.cols() != gen_mel.cols()) {
    throw std::invalid_argument("dtw: feature dimension mismatch");
  }
  const int n = ref_mel.rows(), m = gen_mel.rows();
  Matrix cost(n, m);
  // 0 = diagonal, 1 = ref step (1,0), 2 = gen step (0,1), 3 = start
  std::vector<std::vector<char>> from(n, std::vector<char>(m, 3));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double d = FrameDistance(ref_mel, i, gen_mel, j);
      if (i == 0 && j == 0) {
        cost.at(0, 0) = d;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      char step = 3;
      if (i > 0 && j > 0 && cost.at(i - 1, j - 1) <= best) {
        best = cost.at(i - 1, j - 1);
        step = 0;
      }
      if (i > 0 && cost.at(i - 1, j) < best) {
        best = cost.at(i - 1, j);
        step = 1;
      }
      if (j > 0 && cost.at(i, j - 1) < best) {
        best = cost.at(i, j - 1);
        step = 2;
      }
      cost.at(i, j) = best + d;
      from[i][j] = step;
    }
  }
  DtwPath path;
  path.cost = cost.at(n - 1, m - 1);
  int i = n - 1, j = m - 1;
  while (true) {
    path.pairs.emplace_back(i, j);
    const char step = from[i][j];
    if (step == 3) break;
    if (step == 0) {
      --i;
      --j;
    } else if (step == 1) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return path;
}

namespace {

void CheckPath(const DtwPath& path, std::size_t ref_len, std::size_t gen_len,
               const char* op) {
  if (path.pairs.empty()) throw std::invalid_argument(std::string(op) + ": empty path");
  for (const auto& [i, j] : path.pairs) {
    if (i < 0 || static_cast<std::size_t>(i) >= ref_len || j < 0 ||
        static_cast<std::size_t>(j) >= gen_len) {
      throw std::invalid_argument(std::string(op) + ": path index out of range");
    }
  }
}

}  // namespace

double F0Rmse(const std::vector<double>& ref_f0, const std::vector<bool>& ref_voiced,
              const std::vector<double>& gen_f0, const std::vector<bool>& gen_voiced,
              const DtwPath& path) {
  if (ref_f0.size() != ref_voiced.size() || gen_f0.size() != gen_voiced.size()) {
    throw std::invalid_argument("f0_rmse: values/flags length mismatch");
  }
  CheckPath(path, ref_f0.size(), gen_f0.size(), "f0_rmse");
  double s = 0.0;
  int count = 0;
  for (const auto& [i, j] : path.pairs) {
    if (!ref_voiced[i] || !gen_voiced[j]) continue;
    const double d = ref_f0[i] - gen_f0[j];
    s += d * d;
    ++count;
  }
  if (count == 0) throw std::invalid_argument("f0_rmse: no frame pair is voiced on both sides");
  return std::sqrt(s / count);
}

double LogF0Correlation(const std::vector<double>& ref_f0,
                        const std::vector<bool>& ref_voiced,
                        const std::vector<double>& gen_f0,
                        const std::vector<bool>& gen_voiced, const DtwPath& path) {
  if (ref_f0.size() != ref_voiced.size() || gen_f0.size() != gen_voiced.size()) {
    throw std::invalid_argument("logf0_correlation: values/flags length mismatch");
  }
  CheckPath(path, ref_f0.size(), gen_f0.size(), "logf0_correlation");
  std::vector<double> y, yh;
  for (const auto& [i, j] : path.pairs) {
    if (!ref_voiced[i] || !gen_voiced[j]) continue;
    if (ref_f0[i] <= 0.0 || gen_f0[j] <= 0.0) {
      throw std::invalid_argument("logf0_correlation: voiced frame with non-positive F0");
    }
    y.push_back(std::log(ref_f0[i]));
    yh.push_back(std::log(gen_f0[j]));
  }
  if (y.size() < 2) {
    throw std::invalid_argument("logf0_correlation: need at least 2 both-voiced pairs");
  }
  const double n = static_cast<double>(y.size());
  double my = 0.0, myh = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    my += y[k];
    myh += yh[k];
  }
  my /= n;
  myh /= n;
  double num = 0.0, dy = 0.0, dyh = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    num += (y[k] - my) * (yh[k] - myh);
    dy += (y[k] - my) * (y[k] - my);
    dyh += (yh[k] - myh) * (yh[k] - myh);
  }
  if (dy <= 0.0 || dyh <= 0.0) {
    throw std::invalid_argument("logf0_correlation: constant contour");
  }
  return num / (std::sqrt(dy) * std::sqrt(dyh));
}

double UvErrorRate(const std::vector<bool>& ref_voiced, const std::vector<bool>& gen_voiced,
                   const DtwPath& path) {
  CheckPath(path, ref_voiced.size(), gen_voiced.size(), "uv_error_rate");
  int mism = 0;
  for (const auto& [i, j] : path.pairs) {
    if (ref_voiced[i] != gen_voiced[j]) ++mism;
  }
  return static_cast<double>(mism) / static_cast<double>(path.pairs.size());
}

double FrameDisturbance(const DtwPath& path) {
  if (path.pairs.empty()) throw std::invalid_argument("frame_disturbance: empty path");
  double s = 0.0;
  for (const auto& [i, j] : path.pairs) {
    const double d = static_cast<double>(i) - static_cast<double>(j);
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(path.pairs.size()));
}

double DurationRmseMs(const std::vector<double>& ref_frames,
                      const std::vector<double>& gen_frames, double hop_ms) {
  if (ref_frames.size() != gen_frames.size()) {
    throw std::invalid_argument("duration_rmse: phoneme count mismatch");
  }
  if (ref_frames.empty()) throw std::invalid_argument("duration_rmse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < ref_frames.size(); ++i) {
    const double d = (ref_frames[i] - gen_frames[i]) * hop_ms;
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(ref_frames.size()));
}

}  // namespace accentts::metrics
