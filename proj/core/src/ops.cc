// Copyright 2026 The msqa Authors.
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

#include "msqa/ops.h"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <utility>

#include "msqa/errors.h"

namespace msqa {
namespace {

using detail::Node;
using BackwardFn = std::function<void(Node&)>;

void check_finite(const std::vector<double>& values, const char* op) {
  for (double x : values) {
    if (!std::isfinite(x)) {
      throw NumericError(std::string("non-finite value produced by ") + op);
    }
  }
}

Tensor finish(Shape shape, std::vector<double> value,
              std::span<const Tensor> inputs, BackwardFn fn, const char* op) {
  check_finite(value, op);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (grad_mode_enabled()) {
    bool any = false;
    for (const Tensor& t : inputs) any = any || t.requires_grad();
    if (any) {
      node->requires_grad = true;
      node->parents.reserve(inputs.size());
      for (const Tensor& t : inputs) node->parents.push_back(t.node());
      node->backward_fn = std::move(fn);
    }
  }
  return Tensor(std::move(node));
}

Tensor finish(Shape shape, std::vector<double> value,
              std::initializer_list<Tensor> inputs, BackwardFn fn,
              const char* op) {
  return finish(std::move(shape), std::move(value),
                std::span<const Tensor>(inputs.begin(), inputs.size()),
                std::move(fn), op);
}

// Gradient buffer of parent i, or nullptr when it does not need one.
double* parent_grad(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  if (!p.requires_grad) return nullptr;
  return p.ensure_grad().data();
}

// C[m,n] += A[m,k] B[k,n]
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m,k] += A[m,n] B[k,n]^T
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * n;
    double* crow = c + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
      crow[p] += acc;
    }
  }
}

// C[k,n] += A[m,k]^T B[m,n]
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

void require_rank2(const Tensor& t, const char* op, const char* what) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": " + what + " must be rank 2, got " +
                         shape_string(t.shape()));
  }
}

template <typename Forward, typename Deriv>
Tensor unary(const Tensor& a, const char* op, Forward f, Deriv df) {
  std::vector<double> out(a.numel());
  auto in = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return finish(a.shape(), std::move(out), {a},
                [df](Node& self) {
                  double* ga = parent_grad(self, 0);
                  if (!ga) return;
                  const auto& x = self.parents[0]->value;
                  for (std::size_t i = 0; i < self.grad.size(); ++i) {
                    ga[i] += self.grad[i] * df(x[i], self.value[i]);
                  }
                },
                op);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul", "left operand");
  require_rank2(b, "matmul", "right operand");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions disagree " +
                         shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  gemm_nn(m, k, n, a.data().data(), b.data().data(), out.data());
  return finish({m, n}, std::move(out), {a, b},
                [m, k, n](Node& self) {
                  const double* av = self.parents[0]->value.data();
                  const double* bv = self.parents[1]->value.data();
                  if (double* ga = parent_grad(self, 0)) {
                    gemm_nt(m, n, k, self.grad.data(), bv, ga);
                  }
                  if (double* gb = parent_grad(self, 1)) {
                    gemm_tn(m, k, n, av, self.grad.data(), gb);
                  }
                },
                "matmul");
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() != 1 && x.rank() != 2) {
    throw DimensionError("linear: input must be rank 1 or 2, got " +
                         shape_string(x.shape()));
  }
  require_rank2(weight, "linear", "weight");
  const std::size_t m = x.rows(), k = x.cols(), n = weight.dim(1);
  if (weight.dim(0) != k) {
    throw DimensionError("linear: input " + shape_string(x.shape()) +
                         " does not match weight " +
                         shape_string(weight.shape()));
  }
  if (bias.rank() != 1 || bias.dim(0) != n) {
    throw DimensionError("linear: bias " + shape_string(bias.shape()) +
                         " does not match weight " +
                         shape_string(weight.shape()));
  }
  std::vector<double> out(m * n);
  const double* bv = bias.data().data();
  for (std::size_t i = 0; i < m; ++i) std::copy(bv, bv + n, out.data() + i * n);
  gemm_nn(m, k, n, x.data().data(), weight.data().data(), out.data());
  Shape shape = x.rank() == 1 ? Shape{n} : Shape{m, n};
  return finish(std::move(shape), std::move(out), {x, weight, bias},
                [m, k, n](Node& self) {
                  const double* xv = self.parents[0]->value.data();
                  const double* wv = self.parents[1]->value.data();
                  const double* g = self.grad.data();
                  if (double* gx = parent_grad(self, 0)) gemm_nt(m, n, k, g, wv, gx);
                  if (double* gw = parent_grad(self, 1)) gemm_tn(m, k, n, xv, g, gw);
                  if (double* gb = parent_grad(self, 2)) {
                    for (std::size_t i = 0; i < m; ++i) {
                      for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
                    }
                  }
                },
                "linear");
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.data().begin(), a.data().end());
  auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return finish(a.shape(), std::move(out), {a, b},
                [](Node& self) {
                  for (std::size_t p = 0; p < 2; ++p) {
                    if (double* g = parent_grad(self, p)) {
                      for (std::size_t i = 0; i < self.grad.size(); ++i) {
                        g[i] += self.grad[i];
                      }
                    }
                  }
                },
                "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.data().begin(), a.data().end());
  auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return finish(a.shape(), std::move(out), {a, b},
                [](Node& self) {
                  if (double* g = parent_grad(self, 0)) {
                    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
                  }
                  if (double* g = parent_grad(self, 1)) {
                    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i];
                  }
                },
                "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.data().begin(), a.data().end());
  auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return finish(a.shape(), std::move(out), {a, b},
                [](Node& self) {
                  const auto& av = self.parents[0]->value;
                  const auto& bv = self.parents[1]->value;
                  if (double* g = parent_grad(self, 0)) {
                    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * bv[i];
                  }
                  if (double* g = parent_grad(self, 1)) {
                    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * av[i];
                  }
                },
                "mul");
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      a, "scale", [factor](double x) { return x * factor; },
      [factor](double, double) { return factor; });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor softmax(const Tensor& v) {
  if (v.rank() == 0 || v.shape().back() == 0) {
    throw DimensionError("softmax: empty last dimension in " +
                         shape_string(v.shape()));
  }
  const std::size_t n = v.shape().back();
  const std::size_t rows = v.numel() / n;
  std::vector<double> out(v.numel());
  auto in = v.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in.data() + r * n;
    double* y = out.data() + r * n;
    const double mx = *std::max_element(x, x + n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += (y[i] = std::exp(x[i] - mx));
    for (std::size_t i = 0; i < n; ++i) y[i] /= total;
  }
  return finish(v.shape(), std::move(out), {v},
                [rows, n](Node& self) {
                  double* g = parent_grad(self, 0);
                  if (!g) return;
                  for (std::size_t r = 0; r < rows; ++r) {
                    const double* y = self.value.data() + r * n;
                    const double* dy = self.grad.data() + r * n;
                    double dot = 0.0;
                    for (std::size_t i = 0; i < n; ++i) dot += dy[i] * y[i];
                    for (std::size_t i = 0; i < n; ++i) g[r * n + i] += y[i] * (dy[i] - dot);
                  }
                },
                "softmax");
}

Tensor log_softmax(const Tensor& v) {
  if (v.rank() == 0 || v.shape().back() == 0) {
    throw DimensionError("log_softmax: empty last dimension in " +
                         shape_string(v.shape()));
  }
  const std::size_t n = v.shape().back();
  const std::size_t rows = v.numel() / n;
  std::vector<double> out(v.numel());
  auto in = v.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in.data() + r * n;
    double* y = out.data() + r * n;
    const double mx = *std::max_element(x, x + n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += std::exp(x[i] - mx);
    const double lse = mx + std::log(total);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - lse;
  }
  return finish(v.shape(), std::move(out), {v},
                [rows, n](Node& self) {
                  double* g = parent_grad(self, 0);
                  if (!g) return;
                  for (std::size_t r = 0; r < rows; ++r) {
                    const double* y = self.value.data() + r * n;
                    const double* dy = self.grad.data() + r * n;
                    double total = 0.0;
                    for (std::size_t i = 0; i < n; ++i) total += dy[i];
                    for (std::size_t i = 0; i < n; ++i) {
                      g[r * n + i] += dy[i] - std::exp(y[i]) * total;
                    }
                  }
                },
                "log_softmax");
}

Tensor masked_cross_entropy(const Tensor& logits, std::size_t target,
                            const std::vector<bool>& allowed) {
  if (logits.rank() != 1) {
    throw DimensionError("cross_entropy: logits must be rank 1, got " +
                         shape_string(logits.shape()));
  }
  const std::size_t n = logits.dim(0);
  if (allowed.size() != n) {
    throw DimensionError("cross_entropy: mask length " +
                         std::to_string(allowed.size()) + " vs logits " +
                         std::to_string(n));
  }
  if (target >= n || !allowed[target]) {
    throw InputError("cross_entropy: target " + std::to_string(target) +
                     " is not an allowed position");
  }
  auto x = logits.data();
  double mx = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    if (allowed[i]) mx = std::max(mx, x[i]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (allowed[i]) total += std::exp(x[i] - mx);
  }
  const double lse = mx + std::log(total);
  return finish({1}, {lse - x[target]}, {logits},
                [mask = allowed, target, lse, n](Node& self) {
                  double* g = parent_grad(self, 0);
                  if (!g) return;
                  const double up = self.grad[0];
                  const auto& xv = self.parents[0]->value;
                  for (std::size_t i = 0; i < n; ++i) {
                    if (!mask[i]) continue;
                    g[i] += up * std::exp(xv[i] - lse);
                  }
                  g[target] -= up;
                },
                "cross_entropy");
}

Tensor cross_entropy(const Tensor& logits, std::size_t target) {
  return masked_cross_entropy(logits, target,
                              std::vector<bool>(logits.numel(), true));
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  require_rank2(x, "layer_norm", "input");
  const std::size_t m = x.dim(0), n = x.dim(1);
  if (gain.shape() != Shape{n} || bias.shape() != Shape{n}) {
    throw DimensionError("layer_norm: gain/bias must be [" + std::to_string(n) +
                         "], got " + shape_string(gain.shape()) + " and " +
                         shape_string(bias.shape()));
  }
  std::vector<double> out(m * n), xhat(m * n), rstd(m);
  auto xv = x.data();
  auto gv = gain.data();
  auto bv = bias.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = xv.data() + i * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += row[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(n);
    rstd[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      xhat[i * n + j] = (row[j] - mu) * rstd[i];
      out[i * n + j] = xhat[i * n + j] * gv[j] + bv[j];
    }
  }
  return finish({m, n}, std::move(out), {x, gain, bias},
                [m, n, xhat = std::move(xhat), rstd = std::move(rstd)](Node& self) {
                  const double* g = self.grad.data();
                  const auto& gv = self.parents[1]->value;
                  if (double* gg = parent_grad(self, 1)) {
                    for (std::size_t i = 0; i < m * n; ++i) gg[i % n] += g[i] * xhat[i];
                  }
                  if (double* gb = parent_grad(self, 2)) {
                    for (std::size_t i = 0; i < m * n; ++i) gb[i % n] += g[i];
                  }
                  double* gx = parent_grad(self, 0);
                  if (!gx) return;
                  const double inv_n = 1.0 / static_cast<double>(n);
                  for (std::size_t i = 0; i < m; ++i) {
                    double mean_d = 0.0, mean_dx = 0.0;
                    for (std::size_t j = 0; j < n; ++j) {
                      const double d = g[i * n + j] * gv[j];
                      mean_d += d;
                      mean_dx += d * xhat[i * n + j];
                    }
                    mean_d *= inv_n;
                    mean_dx *= inv_n;
                    for (std::size_t j = 0; j < n; ++j) {
                      const double d = g[i * n + j] * gv[j];
                      gx[i * n + j] +=
                          rstd[i] * (d - mean_d - xhat[i * n + j] * mean_dx);
                    }
                  }
                },
                "layer_norm");
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v,
                 std::size_t heads, std::vector<double>* mean_weights) {
  require_rank2(q, "attention", "Q");
  require_rank2(k, "attention", "K");
  require_rank2(v, "attention", "V");
  const std::size_t m = q.dim(0), dk = q.dim(1), n = k.dim(0), dv = v.dim(1);
  if (k.dim(1) != dk || v.dim(0) != n) {
    throw DimensionError("attention: incompatible Q " + shape_string(q.shape()) +
                         ", K " + shape_string(k.shape()) + ", V " +
                         shape_string(v.shape()));
  }
  if (heads == 0 || dk % heads != 0 || dv % heads != 0) {
    throw ConfigError("attention: d_k=" + std::to_string(dk) + " and d_v=" +
                      std::to_string(dv) + " must be divisible by heads=" +
                      std::to_string(heads));
  }
  if (n == 0) throw DimensionError("attention: no keys to attend over");
  const std::size_t hk = dk / heads, hv = dv / heads;
  const double scale_factor = 1.0 / std::sqrt(static_cast<double>(hk));
  std::vector<double> probs(heads * m * n);
  std::vector<double> out(m * dv, 0.0);
  auto qv = q.data();
  auto kv = k.data();
  auto vv = v.data();
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < m; ++i) {
      double* p = probs.data() + (h * m + i) * n;
      const double* qi = qv.data() + i * dk + h * hk;
      double mx = -INFINITY;
      for (std::size_t j = 0; j < n; ++j) {
        const double* kj = kv.data() + j * dk + h * hk;
        double s = 0.0;
        for (std::size_t t = 0; t < hk; ++t) s += qi[t] * kj[t];
        p[j] = s * scale_factor;
        mx = std::max(mx, p[j]);
      }
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) total += (p[j] = std::exp(p[j] - mx));
      for (std::size_t j = 0; j < n; ++j) p[j] /= total;
      double* oi = out.data() + i * dv + h * hv;
      for (std::size_t j = 0; j < n; ++j) {
        const double pj = p[j];
        const double* vj = vv.data() + j * dv + h * hv;
        for (std::size_t t = 0; t < hv; ++t) oi[t] += pj * vj[t];
      }
    }
  }
  if (mean_weights) {
    mean_weights->assign(m * n, 0.0);
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < m * n; ++i) (*mean_weights)[i] += probs[h * m * n + i];
    }
    for (double& w : *mean_weights) w /= static_cast<double>(heads);
  }
  return finish(
      {m, dv}, std::move(out), {q, k, v},
      [m, n, dk, dv, heads, hk, hv, scale_factor,
       probs = std::move(probs)](Node& self) {
        const auto& qv = self.parents[0]->value;
        const auto& kv = self.parents[1]->value;
        const auto& vv = self.parents[2]->value;
        double* gq = parent_grad(self, 0);
        double* gk = parent_grad(self, 1);
        double* gv = parent_grad(self, 2);
        std::vector<double> dp(n);
        for (std::size_t h = 0; h < heads; ++h) {
          for (std::size_t i = 0; i < m; ++i) {
            const double* p = probs.data() + (h * m + i) * n;
            const double* doi = self.grad.data() + i * dv + h * hv;
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              const double* vj = vv.data() + j * dv + h * hv;
              double s = 0.0;
              for (std::size_t t = 0; t < hv; ++t) s += doi[t] * vj[t];
              dp[j] = s;
              dot += s * p[j];
              if (gv) {
                double* gvj = gv + j * dv + h * hv;
                for (std::size_t t = 0; t < hv; ++t) gvj[t] += p[j] * doi[t];
              }
            }
            const double* qi = qv.data() + i * dk + h * hk;
            for (std::size_t j = 0; j < n; ++j) {
              const double ds = p[j] * (dp[j] - dot) * scale_factor;
              if (ds == 0.0) continue;
              if (gq) {
                const double* kj = kv.data() + j * dk + h * hk;
                double* gqi = gq + i * dk + h * hk;
                for (std::size_t t = 0; t < hk; ++t) gqi[t] += ds * kj[t];
              }
              if (gk) {
                double* gkj = gk + j * dk + h * hk;
                for (std::size_t t = 0; t < hk; ++t) gkj[t] += ds * qi[t];
              }
            }
          }
        }
      },
      "attention");
}

Tensor concat_features(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_features: no inputs");
  std::size_t rows = 1;
  bool all_rank1 = true;
  for (const Tensor& t : parts) {
    if (t.rank() != 1 && t.rank() != 2) {
      throw DimensionError("concat_features: part must be rank 1 or 2, got " +
                           shape_string(t.shape()));
    }
    all_rank1 = all_rank1 && t.rank() == 1;
    if (t.rows() != 1) {
      if (rows != 1 && rows != t.rows()) {
        throw DimensionError("concat_features: row counts " +
                             std::to_string(rows) + " and " +
                             std::to_string(t.rows()) + " disagree");
      }
      rows = t.rows();
    }
  }
  std::vector<std::size_t> widths, offsets;
  std::size_t total = 0;
  for (const Tensor& t : parts) {
    offsets.push_back(total);
    widths.push_back(t.cols());
    total += t.cols();
  }
  std::vector<double> out(rows * total);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    auto src = parts[p].data();
    const bool broadcast = parts[p].rows() == 1;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* from = src.data() + (broadcast ? 0 : r * widths[p]);
      std::copy(from, from + widths[p], out.data() + r * total + offsets[p]);
    }
  }
  std::vector<std::size_t> part_rows;
  for (const Tensor& t : parts) part_rows.push_back(t.rows());
  Shape shape = all_rank1 ? Shape{total} : Shape{rows, total};
  return finish(std::move(shape), std::move(out), parts,
                [rows, total, widths, offsets, part_rows](Node& self) {
                  for (std::size_t p = 0; p < widths.size(); ++p) {
                    double* g = parent_grad(self, p);
                    if (!g) continue;
                    const bool broadcast = part_rows[p] == 1;
                    for (std::size_t r = 0; r < rows; ++r) {
                      const double* from = self.grad.data() + r * total + offsets[p];
                      double* to = g + (broadcast ? 0 : r * widths[p]);
                      for (std::size_t j = 0; j < widths[p]; ++j) to[j] += from[j];
                    }
                  }
                },
                "concat_features");
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices) {
  require_rank2(x, "gather_rows", "input");
  const std::size_t n = x.dim(0), d = x.dim(1);
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  std::vector<double> out(idx.size() * d);
  auto xv = x.data();
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= n) {
      throw DimensionError("gather_rows: index " + std::to_string(idx[r]) +
                           " out of range for " + shape_string(x.shape()));
    }
    std::copy(xv.data() + idx[r] * d, xv.data() + (idx[r] + 1) * d,
              out.data() + r * d);
  }
  Shape shape{idx.size(), d};
  return finish(std::move(shape), std::move(out), {x},
                [idx = std::move(idx), d](Node& self) {
                  double* g = parent_grad(self, 0);
                  if (!g) return;
                  for (std::size_t r = 0; r < idx.size(); ++r) {
                    const double* from = self.grad.data() + r * d;
                    double* to = g + idx[r] * d;
                    for (std::size_t j = 0; j < d; ++j) to[j] += from[j];
                  }
                },
                "gather_rows");
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: cannot view " + shape_string(x.shape()) +
                         " as " + shape_string(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return finish(std::move(shape), std::move(out), {x},
                [](Node& self) {
                  double* g = parent_grad(self, 0);
                  if (!g) return;
                  for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
                },
                "reshape");
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  return finish({1}, {total}, {x},
                [](Node& self) {
                  double* g = parent_grad(self, 0);
                  if (!g) return;
                  const std::size_t n = self.parents[0]->value.size();
                  for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[0];
                },
                "sum");
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) throw DimensionError("mean of an empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

}  // namespace msqa
