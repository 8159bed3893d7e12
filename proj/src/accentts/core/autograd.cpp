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

#include "accentts/core/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace accentts::ad {

namespace {

thread_local std::int64_t g_next_id = 0;

NodePtr NewNode(Matrix value, std::vector<NodePtr> parents) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->id = ++g_next_id;
  for (auto& p : parents) {
    if (p && p->requires_grad) n->requires_grad = true;
  }
  n->parents = std::move(parents);
  return n;
}

void CheckSameShape(const Var& a, const Var& b, const char* op) {
  if (!a.value().same_shape(b.value())) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                a.value().shape_str() + " vs " + b.value().shape_str());
  }
}

// Elementwise unary op with dy/dx expressed in terms of (x, y).
template <typename Fwd, typename Bwd>
Var Elementwise(const Var& a, Fwd fwd, Bwd bwd) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] = fwd(a.value().raw()[i]);
  auto n = NewNode(std::move(out), {a.ptr()});
  if (n->requires_grad) {
    n->backprop = [bwd](Node& self) {
      Node* pa = self.parents[0].get();
      if (!pa->requires_grad) return;
      Matrix& g = pa->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        g.raw()[i] += self.grad.raw()[i] * bwd(pa->value.raw()[i], self.value.raw()[i]);
      }
    };
  }
  return Var(n);
}

}  // namespace

Var Leaf(Matrix value, bool requires_grad) {
  auto n = NewNode(std::move(value), {});
  n->requires_grad = requires_grad;
  return Var(n);
}

Var Constant(Matrix value) { return Leaf(std::move(value), false); }

Var ScalarConstant(double v) {
  Matrix m(1, 1);
  m.at(0, 0) = v;
  return Constant(std::move(m));
}

Var Add(const Var& a, const Var& b) {
  CheckSameShape(a, b, "add");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] += b.value().raw()[i];
  auto n = NewNode(std::move(out), {a.ptr(), b.ptr()});
  if (n->requires_grad) {
    n->backprop = [](Node& self) {
      for (auto& p : self.parents) {
        if (!p->requires_grad) continue;
        Matrix& g = p->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g.raw()[i] += self.grad.raw()[i];
      }
    };
  }
  return Var(n);
}

Var Sub(const Var& a, const Var& b) {
  CheckSameShape(a, b, "sub");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] -= b.value().raw()[i];
  auto n = NewNode(std::move(out), {a.ptr(), b.ptr()});
  if (n->requires_grad) {
    n->backprop = [](Node& self) {
      Node* pa = self.parents[0].get();
      Node* pb = self.parents[1].get();
      if (pa->requires_grad) {
        Matrix& g = pa->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g.raw()[i] += self.grad.raw()[i];
      }
      if (pb->requires_grad) {
        Matrix& g = pb->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g.raw()[i] -= self.grad.raw()[i];
      }
    };
  }
  return Var(n);
}

Var Mul(const Var& a, const Var& b) {
  CheckSameShape(a, b, "mul");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] *= b.value().raw()[i];
  auto n = NewNode(std::move(out), {a.ptr(), b.ptr()});
  if (n->requires_grad) {
    n->backprop = [](Node& self) {
      Node* pa = self.parents[0].get();
      Node* pb = self.parents[1].get();
      if (pa->requires_grad) {
        Matrix& g = pa->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
          g.raw()[i] += self.grad.raw()[i] * pb->value.raw()[i];
        }
      }
      if (pb->requires_grad) {
        Matrix& g = pb->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
          g.raw()[i] += self.grad.raw()[i] * pa->value.raw()[i];
        }
      }
    };
  }
  return Var(n);
}

Var Scale(const Var& a, double s) {
  Matrix out = a.value();
  for (double& v : out.raw()) v *= s;
  auto n = NewNode(std::move(out), {a.ptr()});
  if (n->requires_grad) {
    n->backprop = [s](Node& self) {
      Node* pa = self.parents[0].get();
      if (!pa->requires_grad) return;
      Matrix& g = pa->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g.raw()[i] += s * self.grad.raw()[i];
    };
  }
  return Var(n);
}

Var AddBroadcastRow(const Var& a, const Var& b) {
  if (b.rows() != 1 || b.cols() != a.cols()) {
    throw std::invalid_argument("add_broadcast_row: need [1 x C] bias, got " +
                                b.value().shape_str() + " for " + a.value().shape_str());
  }
  Matrix out = a.value();
  for (int r = 0; r < out.rows(); ++r) {
    double* row = out.row_ptr(r);
    const double* brow = b.value().row_ptr(0);
    for (int c = 0; c < out.cols(); ++c) row[c] += brow[c];
  }
  auto n = NewNode(std::move(out), {a.ptr(), b.ptr()});
  if (n->requires_grad) {
    n->backprop = [](Node& self) {
      Node* pa = self.parents[0].get();
      Node* pb = self.parents[1].get();
      if (pa->requires_grad) {
        Matrix& g = pa->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g.raw()[i] += self.grad.raw()[i];
      }
      if (pb->requires_grad) {
        Matrix& g = pb->ensure_grad();
        for (int r = 0; r < self.grad.rows(); ++r) {
          const double* grow = self.grad.row_ptr(r);
          for (int c = 0; c < self.grad.cols(); ++c) g.at(0, c) += grow[c];
        }
      }
    };
  }
  return Var(n);
}

Var MatMul(const Var& a, const Var& b) {
  Matrix out = accentts::MatMul(a.value(), b.value());
  auto n = NewNode(std::move(out), {a.ptr(), b.ptr()});
  if (n->requires_grad) {
    n->backprop = [](Node& self) {
      Node* pa = self.parents[0].get();
      Node* pb = self.parents[1].get();
      if (pa->requires_grad) MatMulTransBAcc(self.grad, pb->value, &pa->ensure_grad());
      if (pb->requires_grad) MatMulTransAAcc(pa->value, self.grad, &pb->ensure_grad());
    };
  }
  return Var(n);
}

Var Transpose(const Var& a) {
  auto n = NewNode(accentts::Transpose(a.value()), {a.ptr()});
  if (n->requires_grad) {
    n->backprop = [](Node& self) {
      Node* pa = self.parents[0].get();
      if (!pa->requires_grad) return;
      Matrix& g = pa->ensure_grad();
      for (int r = 0; r < self.grad.rows(); ++r) {
        for (int c = 0; c < self.grad.cols(); ++c) g.at(c, r) += self.grad.at(r, c);
      }
    };
  }
  return Var(n);
}

Var Sigmoid(const Var& a) {
  return Elementwise(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var Tanh(const Var& a) {
  return Elementwise(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var Relu(const Var& a) {
  return Elementwise(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var Softsign(const Var& a) {
  return Elementwise(
      a, [](double x) { return x / (1.0 + std::fabs(x)); },
      [](double x, double) {
        const double d = 1.0 + std::fabs(x);
        return 1.0 / (d * d);
      });
}

Var Exp(const Var& a) {
  return Elementwise(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var Log(const Var& a) {
  return Elementwise(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

namespace {

void SoftmaxSpan(const double* x, double* y, int n) {
  double mx = x[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    y[i] = std::exp(x[i] - mx);
    sum += y[i];
  }
  for (int i = 0; i < n; ++i) y[i] /= sum;
}

void SoftmaxBackSpan(const double* y, const double* gy, double* gx, int n) {
  double dot = 0.0;
  for (int i = 0; i < n; ++i) dot += gy[i] * y[i];
  for (int i = 0; i < n; ++i) gx[i] += y[i] * (gy[i] - dot);
}

}  // namespace

Var SoftmaxRows(const Var& a) {
  Matrix out(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r) {
    SoftmaxSpan(a.value().row_ptr(r), out.row_ptr(r), a.cols());
  }
  auto n = NewNode(std::move(out), {a.ptr()});
  if (n->requires_grad) {
    n->backprop = [](Node& self) {
      Node* pa = self.parents[0].get();
      if (!pa->requires_grad) return;
      Matrix& g = pa->ensure_grad();
      for (int r = 0; r < self.value.rows(); ++r) {
        SoftmaxBackSpan(self.value.row_ptr(r), self.grad.row_ptr(r), g.row_ptr(r),
                        self.value.cols());
      }
    };
  }
  return Var(n);
}

Var SoftmaxAll(const Var& a) {
  Matrix out(a.rows(), a.cols());
  SoftmaxSpan(a.value().data(), out.data(), static_cast<int>(a.value().size()));
  auto n = NewNode(std::move(out), {a.ptr()});
  if (n->requires_grad) {
    n->backprop = [](Node& self) {
      Node* pa = self.parents[0].get();
      if (!pa->requires_grad) return;
      Matrix& g = pa->ensure_grad();
      SoftmaxBackSpan(self.value.data(), self.grad.data(), g.data(),
                      static_cast<int>(self.value.size()));
    };
  }
  return Var(n);
}

Var Dropout(const Var& a, double p, Rng* rng, bool train) {
  if (!train || p <= 0.0) return a;
  if (p >= 1.0) throw std::invalid_argument("dropout: p must be < 1");
  const double keep = 1.0 - p;
  Matrix mask(a.rows(), a.cols());
  for (double& v : mask.raw()) v = (rng->uniform() < keep) ? 1.0 / keep : 0.0;
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] *= mask.raw()[i];
  auto n = NewNode(std::move(out), {a.ptr()});
  if (n->requires_grad) {
    n->backprop = [mask](Node& self) {
      Node* pa = self.parents[0].get();
      if (!pa->requires_grad) return;
      Matrix& g = pa->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        g.raw()[i] += self.grad.raw()[i] * mask.raw()[i];
      }
    };
  }
  return Var(n);
}

Var SliceRows(const Var& a, int r0, int r1) {
  if (r0 < 0 || r1 > a.rows() || r0 >= r1) {
    throw std::invalid_argument("slice_rows: bad range");
  }
  Matrix out(r1 - r0, a.cols());
  for (int r = r0; r < r1; ++r) {
    std::copy(a.value().row_ptr(r), a.value().row_ptr(r) + a.cols(), out.row_ptr(r - r0));
  }
  auto n = NewNode(std::move(out), {a.ptr()});
  if (n->requires_grad) {
    n->backprop = [r0](Node& self) {
      Node* pa = self.parents[0].get();
      if (!pa->requires_grad) return;
      Matrix& g = pa->ensure_grad();
      for (int r = 0; r < self.grad.rows(); ++r) {
        double* grow = g.row_ptr(r + r0);
        const double* srow = self.grad.row_ptr(r);
        for (int c = 0; c < self.grad.cols(); ++c) grow[c] += srow[c];
      }
    };
  }
  return Var(n);
}

Var SliceCols(const Var& a, int c0, int c1) {
  if (c0 < 0 || c1 > a.cols() || c0 >= c1) {
    throw std::invalid_argument("slice_cols: bad range");
  }
  Matrix out(a.rows(), c1 - c0);
  for (int r = 0; r < a.rows(); ++r) {
    std::copy(a.value().row_ptr(r) + c0, a.value().row_ptr(r) + c1, out.row_ptr(r));
  }
  auto n = NewNode(std::move(out), {a.ptr()});
  if (n->requires_grad) {
    n->backprop = [c0](Node& self) {
      Node* pa = self.parents[0].get();
      if (!pa->requires_grad) return;
      Matrix& g = pa->ensure_grad();
      for (int r = 0; r < self.grad.rows(); ++r) {
        double* grow = g.row_ptr(r);
        const double* srow = self.grad.row_ptr(r);
        for (int c = 0; c < self.grad.cols(); ++c) grow[c + c0] += srow[c];
      }
    };
  }
  return Var(n);
}

Var Row(const Var& a, int r) { return SliceRows(a, r, r + 1); }

Var ConcatRows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: empty");
  const int cols = parts[0].cols();
  int rows = 0;
  std::vector<NodePtr> parents;
  parents.reserve(parts.size());
  for (const auto& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("concat_rows: column mismatch");
    rows += p.rows();
    parents.push_back(p.ptr());
  }
  Matrix out(rows, cols);
  int r = 0;
  for (const auto& p : parts) {
    std::copy(p.value().data(), p.value().data() + p.value().size(), out.row_ptr(r));
    r += p.rows();
  }
  auto n = NewNode(std::move(out), std::move(parents));
  if (n->requires_grad) {
    n->backprop = [](Node& self) {
      int r0 = 0;
      for (auto& p : self.parents) {
        const int pr = p->value.rows();
        if (p->requires_grad) {
          Matrix& g = p->ensure_grad();
          for (int r = 0; r < pr; ++r) {
            const double* srow = self.grad.row_ptr(r0 + r);
            double* grow = g.row_ptr(r);
            for (int c = 0; c < self.grad.cols(); ++c) grow[c] += srow[c];
          }
        }
        r0 += pr;
      }
    };
  }
  return Var(n);
}

Var ConcatCols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
  const int rows = parts[0].rows();
  int cols = 0;
  std::vector<NodePtr> parents;
  parents.reserve(parts.size());
  for (const auto& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
    cols += p.cols();
    parents.push_back(p.ptr());
  }
  Matrix out(rows, cols);
  int c0 = 0;
  for (const auto& p : parts) {
    for (int r = 0; r < rows; ++r) {
      std::copy(p.value().row_ptr(r), p.value().row_ptr(r) + p.cols(), out.row_ptr(r) + c0);
    }
    c0 += p.cols();
  }
  auto n = NewNode(std::move(out), std::move(parents));
  if (n->requires_grad) {
    n->backprop = [](Node& self) {
      int c0 = 0;
      for (auto& p : self.parents) {
        const int pc = p->value.cols();
        if (p->requires_grad) {
          Matrix& g = p->ensure_grad();
          for (int r = 0; r < self.grad.rows(); ++r) {
            const double* srow = self.grad.row_ptr(r) + c0;
            double* grow = g.row_ptr(r);
            for (int c = 0; c < pc; ++c) grow[c] += srow[c];
          }
        }
        c0 += pc;
      }
    };
  }
  return Var(n);
}

Var GatherRows(const Var& table, std::vector<int> indices) {
  Matrix out(static_cast<int>(indices.size()), table.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int idx = indices[i];
    if (idx < 0 || idx >= table.rows()) {
      throw std::invalid_argument("gather_rows: index " + std::to_string(idx) +
                                  " out of range for table " + table.value().shape_str());
    }
    std::copy(table.value().row_ptr(idx), table.value().row_ptr(idx) + table.cols(),
              out.row_ptr(static_cast<int>(i)));
  }
  auto n = NewNode(std::move(out), {table.ptr()});
  if (n->requires_grad) {
    n->backprop = [indices = std::move(indices)](Node& self) {
      Node* pt = self.parents[0].get();
      if (!pt->requires_grad) return;
      Matrix& g = pt->ensure_grad();
      for (std::size_t i = 0; i < indices.size(); ++i) {
        const double* srow = self.grad.row_ptr(static_cast<int>(i));
        double* grow = g.row_ptr(indices[i]);
        for (int c = 0; c < self.grad.cols(); ++c) grow[c] += srow[c];
      }
    };
  }
  return Var(n);
}

namespace {

// Shared normalization kernel. If over_rows is false, statistics run along
// each row (layer norm); if true, along each column (time norm).
Var NormImpl(const Var& x, const Var& gain, const Var& bias, double eps, bool over_rows) {
  const int param_len = over_rows ? x.cols() : x.cols();
  if (gain.rows() != 1 || gain.cols() != param_len || bias.rows() != 1 ||
      bias.cols() != param_len) {
    throw std::invalid_argument("norm: gain/bias must be [1 x C]");
  }
  const int nr = x.rows(), nc = x.cols();
  const int groups = over_rows ? nc : nr;     // number of normalized vectors
  const int glen = over_rows ? nr : nc;       // length of each vector
  Matrix xhat(nr, nc);
  std::vector<double> inv_std(groups);
  for (int gidx = 0; gidx < groups; ++gidx) {
    double mean = 0.0;
    for (int k = 0; k < glen; ++k) {
      mean += over_rows ? x.value().at(k, gidx) : x.value().at(gidx, k);
    }
    mean /= glen;
    double var = 0.0;
    for (int k = 0; k < glen; ++k) {
      const double d = (over_rows ? x.value().at(k, gidx) : x.value().at(gidx, k)) - mean;
      var += d * d;
    }
    var /= glen;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[gidx] = is;
    for (int k = 0; k < glen; ++k) {
      if (over_rows) {
        xhat.at(k, gidx) = (x.value().at(k, gidx) - mean) * is;
      } else {
        xhat.at(gidx, k) = (x.value().at(gidx, k) - mean) * is;
      }
    }
  }
  Matrix out(nr, nc);
  for (int r = 0; r < nr; ++r) {
    for (int c = 0; c < nc; ++c) {
      out.at(r, c) = xhat.at(r, c) * gain.value().at(0, c) + bias.value().at(0, c);
    }
  }
  auto n = NewNode(std::move(out), {x.ptr(), gain.ptr(), bias.ptr()});
  if (n->requires_grad) {
    n->backprop = [xhat = std::move(xhat), inv_std = std::move(inv_std),
                   over_rows](Node& self) {
      Node* px = self.parents[0].get();
      Node* pg = self.parents[1].get();
      Node* pb = self.parents[2].get();
      const int nr = self.value.rows(), nc = self.value.cols();
      if (pg->requires_grad) {
        Matrix& g = pg->ensure_grad();
        for (int r = 0; r < nr; ++r) {
          for (int c = 0; c < nc; ++c) g.at(0, c) += self.grad.at(r, c) * xhat.at(r, c);
        }
      }
      if (pb->requires_grad) {
        Matrix& g = pb->ensure_grad();
        for (int r = 0; r < nr; ++r) {
          for (int c = 0; c < nc; ++c) g.at(0, c) += self.grad.at(r, c);
        }
      }
      if (px->requires_grad) {
        Matrix& g = px->ensure_grad();
        const int groups = over_rows ? nc : nr;
        const int glen = over_rows ? nr : nc;
        for (int gidx = 0; gidx < groups; ++gidx) {
          double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
          for (int k = 0; k < glen; ++k) {
            const int r = over_rows ? k : gidx;
            const int c = over_rows ? gidx : k;
            const double dxhat = self.grad.at(r, c) * pg->value.at(0, c);
            mean_dxhat += dxhat;
            mean_dxhat_xhat += dxhat * xhat.at(r, c);
          }
          mean_dxhat /= glen;
          mean_dxhat_xhat /= glen;
          for (int k = 0; k < glen; ++k) {
            const int r = over_rows ? k : gidx;
            const int c = over_rows ? gidx : k;
            const double dxhat = self.grad.at(r, c) * pg->value.at(0, c);
            g.at(r, c) +=
                inv_std[gidx] * (dxhat - mean_dxhat - xhat.at(r, c) * mean_dxhat_xhat);
          }
        }
      }
    };
  }
  return Var(n);
}

}  // namespace

Var LayerNormRows(const Var& x, const Var& gain, const Var& bias, double eps) {
  return NormImpl(x, gain, bias, eps, /*over_rows=*/false);
}

Var NormColsOverRows(const Var& x, const Var& gain, const Var& bias, double eps) {
  return NormImpl(x, gain, bias, eps, /*over_rows=*/true);
}

Var Conv1dSame(const Var& x, const Var& w, const Var& b, int kernel) {
  if (kernel <= 0 || kernel % 2 == 0) {
    throw std::invalid_argument("conv1d: kernel must be odd and positive");
  }
  const int t_len = x.rows(), cin = x.cols();
  if (w.rows() != kernel * cin) {
    throw std::invalid_argument("conv1d: weight rows must equal kernel*cin");
  }
  const int cout = w.cols();
  if (b.rows() != 1 || b.cols() != cout) {
    throw std::invalid_argument("conv1d: bias must be [1 x cout]");
  }
  const int pad = kernel / 2;
  Matrix out(t_len, cout);
  for (int t = 0; t < t_len; ++t) {
    double* orow = out.row_ptr(t);
    for (int c = 0; c < cout; ++c) orow[c] = b.value().at(0, c);
    for (int k = 0; k < kernel; ++k) {
      const int src = t + k - pad;
      if (src < 0 || src >= t_len) continue;
      const double* xrow = x.value().row_ptr(src);
      for (int ci = 0; ci < cin; ++ci) {
        const double xv = xrow[ci];
        if (xv == 0.0) continue;
        const double* wrow = w.value().row_ptr(k * cin + ci);
        for (int c = 0; c < cout; ++c) orow[c] += xv * wrow[c];
      }
    }
  }
  auto n = NewNode(std::move(out), {x.ptr(), w.ptr(), b.ptr()});
  if (n->requires_grad) {
    n->backprop = [kernel, pad](Node& self) {
      Node* px = self.parents[0].get();
      Node* pw = self.parents[1].get();
      Node* pb = self.parents[2].get();
      const int t_len = px->value.rows(), cin = px->value.cols();
      const int cout = self.value.cols();
      if (pb->requires_grad) {
        Matrix& g = pb->ensure_grad();
        for (int t = 0; t < t_len; ++t) {
          const double* srow = self.grad.row_ptr(t);
          for (int c = 0; c < cout; ++c) g.at(0, c) += srow[c];
        }
      }
      if (pw->requires_grad) {
        Matrix& g = pw->ensure_grad();
        for (int t = 0; t < t_len; ++t) {
          const double* srow = self.grad.row_ptr(t);
          for (int k = 0; k < kernel; ++k) {
            const int src = t + k - pad;
            if (src < 0 || src >= t_len) continue;
            const double* xrow = px->value.row_ptr(src);
            for (int ci = 0; ci < cin; ++ci) {
              const double xv = xrow[ci];
              if (xv == 0.0) continue;
              double* grow = g.row_ptr(k * cin + ci);
              for (int c = 0; c < cout; ++c) grow[c] += xv * srow[c];
            }
          }
        }
      }
      if (px->requires_grad) {
        Matrix& g = px->ensure_grad();
        for (int t = 0; t < t_len; ++t) {
          const double* srow = self.grad.row_ptr(t);
          for (int k = 0; k < kernel; ++k) {
            const int src = t + k - pad;
            if (src < 0 || src >= t_len) continue;
            double* grow = g.row_ptr(src);
            for (int ci = 0; ci < cin; ++ci) {
              const double* wrow = pw->value.row_ptr(k * cin + ci);
              double acc = 0.0;
              for (int c = 0; c < cout; ++c) acc += wrow[c] * srow[c];
              grow[ci] += acc;
            }
          }
        }
      }
    };
  }
  return Var(n);
}

Var SumAll(const Var& a) {
  Matrix out(1, 1);
  double s = 0.0;
  for (double v : a.value().raw()) s += v;
  out.at(0, 0) = s;
  auto n = NewNode(std::move(out), {a.ptr()});
  if (n->requires_grad) {
    n->backprop = [](Node& self) {
      Node* pa = self.parents[0].get();
      if (!pa->requires_grad) return;
      Matrix& g = pa->ensure_grad();
      const double gv = self.grad.at(0, 0);
      for (double& v : g.raw()) v += gv;
    };
  }
  return Var(n);
}

Var MeanAll(const Var& a) {
  return Scale(SumAll(a), 1.0 / static_cast<double>(a.value().size()));
}

Var Mse(const Var& a, const Var& b) {
  CheckSameShape(a, b, "mse");
  const std::size_t n_elems = a.value().size();
  Matrix out(1, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < n_elems; ++i) {
    const double d = a.value().raw()[i] - b.value().raw()[i];
    s += d * d;
  }
  out.at(0, 0) = s / static_cast<double>(n_elems);
  auto n = NewNode(std::move(out), {a.ptr(), b.ptr()});
  if (n->requires_grad) {
    n->backprop = [n_elems](Node& self) {
      Node* pa = self.parents[0].get();
      Node* pb = self.parents[1].get();
      const double scale = 2.0 * self.grad.at(0, 0) / static_cast<double>(n_elems);
      if (pa->requires_grad) {
        Matrix& g = pa->ensure_grad();
        for (std::size_t i = 0; i < n_elems; ++i) {
          g.raw()[i] += scale * (pa->value.raw()[i] - pb->value.raw()[i]);
        }
      }
      if (pb->requires_grad) {
        Matrix& g = pb->ensure_grad();
        for (std::size_t i = 0; i < n_elems; ++i) {
          g.raw()[i] -= scale * (pa->value.raw()[i] - pb->value.raw()[i]);
        }
      }
    };
  }
  return Var(n);
}

Var BceWithLogits(const Var& logits, const Matrix& targets) {
  if (!logits.value().same_shape(targets)) {
    throw std::invalid_argument("bce: shape mismatch");
  }
  const std::size_t n_elems = targets.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n_elems; ++i) {
    const double x = logits.value().raw()[i];
    const double y = targets.raw()[i];
    s += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::fabs(x)));
  }
  Matrix out(1, 1);
  out.at(0, 0) = s / static_cast<double>(n_elems);
  auto n = NewNode(std::move(out), {logits.ptr()});
  if (n->requires_grad) {
    n->backprop = [targets](Node& self) {
      Node* pa = self.parents[0].get();
      if (!pa->requires_grad) return;
      Matrix& g = pa->ensure_grad();
      const double scale = self.grad.at(0, 0) / static_cast<double>(targets.size());
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const double sig = 1.0 / (1.0 + std::exp(-pa->value.raw()[i]));
        g.raw()[i] += scale * (sig - targets.raw()[i]);
      }
    };
  }
  return Var(n);
}

Var CrossEntropyRows(const Var& logits, const std::vector<int>& targets, int ignore_index) {
  if (static_cast<int>(targets.size()) != logits.rows()) {
    throw std::invalid_argument("cross_entropy: target count must equal logit rows");
  }
  const int vocab = logits.cols();
  int included = 0;
  double total = 0.0;
  Matrix probs(logits.rows(), vocab);
  for (int r = 0; r < logits.rows(); ++r) {
    SoftmaxSpan(logits.value().row_ptr(r), probs.row_ptr(r), vocab);
    const int y = targets[r];
    if (y == ignore_index) continue;
    if (y < 0 || y >= vocab) throw std::invalid_argument("cross_entropy: target out of range");
    ++included;
    total -= std::log(std::max(probs.at(r, y), 1e-300));
  }
  if (included == 0) throw std::invalid_argument("cross_entropy: all positions ignored");
  Matrix out(1, 1);
  out.at(0, 0) = total / included;
  auto n = NewNode(std::move(out), {logits.ptr()});
  if (n->requires_grad) {
    n->backprop = [probs = std::move(probs), targets, ignore_index, included](Node& self) {
      Node* pa = self.parents[0].get();
      if (!pa->requires_grad) return;
      Matrix& g = pa->ensure_grad();
      const double scale = self.grad.at(0, 0) / included;
      for (int r = 0; r < probs.rows(); ++r) {
        const int y = targets[r];
        if (y == ignore_index) continue;
        double* grow = g.row_ptr(r);
        const double* prow = probs.row_ptr(r);
        for (int c = 0; c < probs.cols(); ++c) grow[c] += scale * prow[c];
        grow[y] -= scale;
      }
    };
  }
  return Var(n);
}

Var operator+(const Var& a, const Var& b) { return Add(a, b); }
Var operator-(const Var& a, const Var& b) { return Sub(a, b); }
Var operator*(const Var& a, const Var& b) { return Mul(a, b); }

void Backward(const Var& root, double seed) {
  if (!root.defined()) throw std::invalid_argument("backward: undefined root");
  if (root.value().size() != 1) {
    throw std::invalid_argument("backward: root must be scalar");
  }
  if (!root.node()->requires_grad) return;

  // Collect reachable nodes; reverse creation order is topological.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root.node()};
  seen.insert(root.node());
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (auto& p : n->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(order.begin(), order.end(),
            [](const Node* a, const Node* b) { return a->id > b->id; });

  root.node()->ensure_grad().at(0, 0) += seed;
  for (Node* n : order) {
    if (n->backprop && !n->grad.empty()) n->backprop(*n);
  }
}

}  // namespace accentts::ad
