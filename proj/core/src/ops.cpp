// Copyright 2026 The swinseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "swinseg/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "swinseg/error.hpp"

namespace swinseg {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;
template <typename T>
using MapVec = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstMapVec = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

template <typename T>
bool wants_grad(const Tensor<T>& t) {
  return t.defined() && t.requires_grad();
}

template <typename T>
std::vector<T>& grad_of(const Tensor<T>& t) {
  return t.node()->grad_buffer();
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw DimensionError(msg);
}

Index last_dim(const Shape& s) { return s.back(); }

}  // namespace

// ---------------------------------------------------------------------------
// Elementwise

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa == sb) {
    std::vector<T> out(a.vec());
    const auto& bv = b.vec();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    return make_result<T>(sa, std::move(out), {a, b}, [a, b](TensorNode<T>& self) {
      for (const auto* t : {&a, &b}) {
        if (!wants_grad(*t)) continue;
        auto& g = grad_of(*t);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      }
    });
  }
  require(sa.size() == sb.size(), "add: rank mismatch " + to_string(sa) + " vs " + to_string(sb));
  const std::size_t rank = sa.size();
  // Strides of b laid over a's index space (0 on broadcast axes).
  std::vector<Index> bstride(rank, 0);
  Index s = 1;
  for (std::size_t d = rank; d-- > 0;) {
    require(sb[d] == sa[d] || sb[d] == 1,
            "add: cannot broadcast " + to_string(sb) + " onto " + to_string(sa));
    bstride[d] = sb[d] == 1 ? 0 : s;
    s *= sb[d];
  }
  const Index n = a.numel();
  auto bindex = std::make_shared<std::vector<Index>>(static_cast<std::size_t>(n));
  {
    std::vector<Index> counter(rank, 0);
    Index off = 0;
    for (Index i = 0; i < n; ++i) {
      (*bindex)[i] = off;
      for (std::size_t d = rank; d-- > 0;) {
        off += bstride[d];
        if (++counter[d] < sa[d]) break;
        off -= bstride[d] * sa[d];
        counter[d] = 0;
      }
    }
  }
  std::vector<T> out(a.vec());
  const auto& bv = b.vec();
  for (Index i = 0; i < n; ++i) out[i] += bv[(*bindex)[i]];
  return make_result<T>(sa, std::move(out), {a, b}, [a, b, bindex](TensorNode<T>& self) {
    if (wants_grad(a)) {
      auto& g = grad_of(a);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants_grad(b)) {
      auto& g = grad_of(b);
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[(*bindex)[i]] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "sub: shape mismatch");
  std::vector<T> out(a.vec());
  const auto& bv = b.vec();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, [a, b](TensorNode<T>& self) {
    if (wants_grad(a)) {
      auto& g = grad_of(a);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants_grad(b)) {
      auto& g = grad_of(b);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "mul: shape mismatch");
  std::vector<T> out(a.vec());
  const auto& bv = b.vec();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, [a, b](TensorNode<T>& self) {
    if (wants_grad(a)) {
      auto& g = grad_of(a);
      const auto& bv = b.vec();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bv[i];
    }
    if (wants_grad(b)) {
      auto& g = grad_of(b);
      const auto& av = a.vec();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * av[i];
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, double factor) {
  const T f = static_cast<T>(factor);
  std::vector<T> out(a.vec());
  for (auto& v : out) v *= f;
  return make_result<T>(a.shape(), std::move(out), {a}, [a, f](TensorNode<T>& self) {
    auto& g = grad_of(a);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * f;
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  T total = 0;
  for (T v : a.vec()) total += v;
  return make_result<T>({1}, {total}, {a}, [a](TensorNode<T>& self) {
    auto& g = grad_of(a);
    for (auto& v : g) v += self.grad[0];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  require(numel(shape) == a.numel(),
          "reshape: " + to_string(a.shape()) + " -> " + to_string(shape));
  return make_result<T>(std::move(shape), a.vec(), {a}, [a](TensorNode<T>& self) {
    auto& g = grad_of(a);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

// ---------------------------------------------------------------------------
// Products

namespace {

// C (+)= op(A) * op(B) on raw row-major buffers. Operands go through
// Eigen-aligned scratch: Eigen picks its peeling and small-product paths
// from the runtime address, and std::vector only promises 16 bytes, so
// mapping the buffers directly makes the rounding depend on the heap.
template <typename T>
void gemm(const T* a, Index a_rows, Index a_cols, bool ta, const T* b, Index b_rows,
          Index b_cols, bool tb, T* c, bool accumulate) {
  thread_local RowMat<T> A, B, P;
  A = ConstMapMat<T>(a, a_rows, a_cols);
  B = ConstMapMat<T>(b, b_rows, b_cols);
  const Index m = ta ? a_cols : a_rows;
  const Index n = tb ? b_rows : b_cols;
  P.resize(m, n);
  if (!ta && !tb) P.noalias() = A * B;
  else if (ta && !tb) P.noalias() = A.transpose() * B;
  else if (!ta && tb) P.noalias() = A * B.transpose();
  else P.noalias() = A.transpose() * B.transpose();
  if (accumulate) {
    for (Index i = 0; i < m * n; ++i) c[i] += P.data()[i];
  } else {
    std::copy(P.data(), P.data() + m * n, c);
  }
}

// g[j] += sum_i y[i, j], summed in row order.
template <typename T>
void add_column_sums(const T* y, Index rows, Index cols, T* g) {
  std::vector<T> acc(static_cast<std::size_t>(cols), T(0));
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) acc[static_cast<std::size_t>(j)] += y[i * cols + j];
  }
  for (Index j = 0; j < cols; ++j) g[j] += acc[static_cast<std::size_t>(j)];
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b, bool trans_a, bool trans_b) {
  require(a.rank() == b.rank() && (a.rank() == 2 || a.rank() == 3),
          "matmul: operands must both be 2-D or 3-D");
  const bool batched = a.rank() == 3;
  const Index batch = batched ? a.dim(0) : 1;
  if (batched) require(b.dim(0) == batch, "matmul: batch extent mismatch");
  const Index ar = a.dim(-2), ac = a.dim(-1), br = b.dim(-2), bc = b.dim(-1);
  const Index m = trans_a ? ac : ar;
  const Index k = trans_a ? ar : ac;
  const Index kb = trans_b ? bc : br;
  const Index n = trans_b ? br : bc;
  require(k == kb, "matmul: inner extents differ: " + to_string(a.shape()) + " x " +
                       to_string(b.shape()));
  Shape out_shape = batched ? Shape{batch, m, n} : Shape{m, n};
  std::vector<T> out(static_cast<std::size_t>(batch * m * n));
  for (Index i = 0; i < batch; ++i) {
    gemm(a.vec().data() + i * ar * ac, ar, ac, trans_a, b.vec().data() + i * br * bc, br, bc,
         trans_b, out.data() + i * m * n, false);
  }
  return make_result<T>(
      std::move(out_shape), std::move(out), {a, b},
      [a, b, batch, ar, ac, br, bc, m, n, trans_a, trans_b](TensorNode<T>& self) {
        const T* dc = self.grad.data();
        if (wants_grad(a)) {
          T* da = grad_of(a).data();
          for (Index i = 0; i < batch; ++i) {
            const T* bi = b.vec().data() + i * br * bc;
            const T* dci = dc + i * m * n;
            T* dai = da + i * ar * ac;
            // C = op(A) op(B)
            if (!trans_a) {
              // dA = dC * op(B)^T
              gemm(dci, m, n, false, bi, br, bc, !trans_b, dai, true);
            } else {
              // dA = op(B) * dC^T
              gemm(bi, br, bc, trans_b, dci, m, n, true, dai, true);
            }
          }
        }
        if (wants_grad(b)) {
          T* db = grad_of(b).data();
          for (Index i = 0; i < batch; ++i) {
            const T* ai = a.vec().data() + i * ar * ac;
            const T* dci = dc + i * m * n;
            T* dbi = db + i * br * bc;
            if (!trans_b) {
              // dB = op(A)^T * dC
              gemm(ai, ar, ac, !trans_a, dci, m, n, false, dbi, true);
            } else {
              // dB = dC^T * op(A)
              gemm(dci, m, n, true, ai, ar, ac, trans_a, dbi, true);
            }
          }
        }
      });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  require(weight.rank() == 2, "linear: weight must be 2-D");
  const Index in = weight.dim(0), outc = weight.dim(1);
  require(last_dim(x.shape()) == in, "linear: input channels " + to_string(x.shape()) +
                                         " vs weight " + to_string(weight.shape()));
  if (bias.defined()) require(bias.numel() == outc, "linear: bias length mismatch");
  const Index rows = x.numel() / in;
  Shape out_shape = x.shape();
  out_shape.back() = outc;
  std::vector<T> out(static_cast<std::size_t>(rows * outc));
  gemm(x.vec().data(), rows, in, false, weight.vec().data(), in, outc, false, out.data(), false);
  if (bias.defined()) {
    MapMat<T> Y(out.data(), rows, outc);
    Y.rowwise() += ConstMapVec<T>(bias.vec().data(), outc).transpose();
  }
  return make_result<T>(
      std::move(out_shape), std::move(out), {x, weight, bias},
      [x, weight, bias, rows, in, outc](TensorNode<T>& self) {
        const T* dy = self.grad.data();
        if (wants_grad(x)) {
          gemm(dy, rows, outc, false, weight.vec().data(), in, outc, true, grad_of(x).data(), true);
        }
        if (wants_grad(weight)) {
          gemm(x.vec().data(), rows, in, true, dy, rows, outc, false, grad_of(weight).data(), true);
        }
        if (wants_grad(bias)) {
          add_column_sums(dy, rows, outc, grad_of(bias).data());
        }
      });
}

// ---------------------------------------------------------------------------
// Rearrangement

template <typename T>
Tensor<T> gather(const Tensor<T>& x, IndexMap index, Shape out_shape) {
  require(numel(out_shape) == static_cast<Index>(index->size()),
          "gather: index length does not match output shape " + to_string(out_shape));
  const auto& xv = x.vec();
  const Index n = x.numel();
  std::vector<T> out(index->size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Index src = (*index)[i];
    if (src < 0 || src >= n) throw DimensionError("gather: index out of range");
    out[i] = xv[static_cast<std::size_t>(src)];
  }
  return make_result<T>(std::move(out_shape), std::move(out), {x}, [x, index](TensorNode<T>& self) {
    auto& g = grad_of(x);
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[(*index)[i]] += self.grad[i];
  });
}

template <typename T>
Tensor<T> concat_last(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.rank() == b.rank(), "concat_last: rank mismatch");
  for (int d = 0; d + 1 < a.rank(); ++d) {
    require(a.dim(d) == b.dim(d), "concat_last: leading extents differ: " + to_string(a.shape()) +
                                      " vs " + to_string(b.shape()));
  }
  const Index ca = a.dim(-1), cb = b.dim(-1), rows = a.numel() / ca;
  Shape out_shape = a.shape();
  out_shape.back() = ca + cb;
  std::vector<T> out(static_cast<std::size_t>(rows * (ca + cb)));
  for (Index r = 0; r < rows; ++r) {
    std::copy_n(a.vec().data() + r * ca, ca, out.data() + r * (ca + cb));
    std::copy_n(b.vec().data() + r * cb, cb, out.data() + r * (ca + cb) + ca);
  }
  return make_result<T>(std::move(out_shape), std::move(out), {a, b},
                        [a, b, ca, cb, rows](TensorNode<T>& self) {
                          const Index c = ca + cb;
                          if (wants_grad(a)) {
                            auto& g = grad_of(a);
                            for (Index r = 0; r < rows; ++r)
                              for (Index j = 0; j < ca; ++j) g[r * ca + j] += self.grad[r * c + j];
                          }
                          if (wants_grad(b)) {
                            auto& g = grad_of(b);
                            for (Index r = 0; r < rows; ++r)
                              for (Index j = 0; j < cb; ++j)
                                g[r * cb + j] += self.grad[r * c + ca + j];
                          }
                        });
}

IndexMap cyclic_shift_index(Index batch, Index height, Index width, Index channels, Index dy,
                            Index dx) {
  if (std::abs(dy) >= height || std::abs(dx) >= width) {
    throw DimensionError("cyclic_shift: offset must be smaller than the spatial extent");
  }
  auto idx = std::make_shared<std::vector<Index>>();
  idx->reserve(static_cast<std::size_t>(batch * height * width * channels));
  for (Index b = 0; b < batch; ++b)
    for (Index i = 0; i < height; ++i) {
      const Index si = ((i - dy) % height + height) % height;
      for (Index j = 0; j < width; ++j) {
        const Index sj = ((j - dx) % width + width) % width;
        const Index base = ((b * height + si) * width + sj) * channels;
        for (Index c = 0; c < channels; ++c) idx->push_back(base + c);
      }
    }
  return idx;
}

template <typename T>
Tensor<T> cyclic_shift(const Tensor<T>& x, Index dy, Index dx) {
  require(x.rank() == 4, "cyclic_shift: expected [B,H,W,C]");
  return gather(x, cyclic_shift_index(x.dim(0), x.dim(1), x.dim(2), x.dim(3), dy, dx), x.shape());
}

template <typename T>
Tensor<T> upsample_nearest2x(const Tensor<T>& x) {
  require(x.rank() == 4, "upsample_nearest2x: expected [B,H,W,C]");
  const Index B = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
  auto idx = std::make_shared<std::vector<Index>>();
  idx->reserve(static_cast<std::size_t>(B * 4 * H * W * C));
  for (Index b = 0; b < B; ++b)
    for (Index i = 0; i < 2 * H; ++i)
      for (Index j = 0; j < 2 * W; ++j)
        for (Index c = 0; c < C; ++c) idx->push_back(((b * H + i / 2) * W + j / 2) * C + c);
  return gather(x, idx, {B, 2 * H, 2 * W, C});
}

// ---------------------------------------------------------------------------
// Normalization and activations

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     double eps) {
  const Index c = last_dim(x.shape());
  require(gamma.numel() == c && beta.numel() == c,
          "layer_norm: gamma/beta length must equal last extent of " + to_string(x.shape()));
  if (!(eps >= 0.0)) throw ValidationError("layer_norm: epsilon must be non-negative");
  const Index rows = x.numel() / c;
  const auto& xv = x.vec();
  const auto& gv = gamma.vec();
  const auto& bv = beta.vec();
  auto xhat = std::make_shared<std::vector<T>>(xv.size());
  auto rstd = std::make_shared<std::vector<T>>(static_cast<std::size_t>(rows));
  std::vector<T> out(xv.size());
  for (Index r = 0; r < rows; ++r) {
    const T* xr = xv.data() + r * c;
    double mu = 0;
    for (Index j = 0; j < c; ++j) mu += xr[j];
    mu /= static_cast<double>(c);
    double var = 0;
    for (Index j = 0; j < c; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(c);
    const double rs = 1.0 / std::sqrt(var + eps);
    (*rstd)[r] = static_cast<T>(rs);
    for (Index j = 0; j < c; ++j) {
      const T h = static_cast<T>((xr[j] - mu) * rs);
      (*xhat)[r * c + j] = h;
      out[r * c + j] = h * gv[j] + bv[j];
    }
  }
  return make_result<T>(
      x.shape(), std::move(out), {x, gamma, beta},
      [x, gamma, beta, xhat, rstd, rows, c](TensorNode<T>& self) {
        const T* dy = self.grad.data();
        const auto& gv = gamma.vec();
        if (wants_grad(gamma) || wants_grad(beta)) {
          std::vector<T>* dg = wants_grad(gamma) ? &grad_of(gamma) : nullptr;
          std::vector<T>* db = wants_grad(beta) ? &grad_of(beta) : nullptr;
          for (Index r = 0; r < rows; ++r)
            for (Index j = 0; j < c; ++j) {
              if (dg) (*dg)[j] += dy[r * c + j] * (*xhat)[r * c + j];
              if (db) (*db)[j] += dy[r * c + j];
            }
        }
        if (wants_grad(x)) {
          auto& dx = grad_of(x);
          for (Index r = 0; r < rows; ++r) {
            double mg = 0, mgx = 0;
            for (Index j = 0; j < c; ++j) {
              const double g = static_cast<double>(dy[r * c + j]) * gv[j];
              mg += g;
              mgx += g * (*xhat)[r * c + j];
            }
            mg /= static_cast<double>(c);
            mgx /= static_cast<double>(c);
            for (Index j = 0; j < c; ++j) {
              const double g = static_cast<double>(dy[r * c + j]) * gv[j];
              dx[r * c + j] +=
                  static_cast<T>((*rstd)[r] * (g - mg - (*xhat)[r * c + j] * mgx));
            }
          }
        }
      });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, int axis) {
  const int r = x.rank();
  if (axis < 0) axis += r;
  require(axis >= 0 && axis < r, "softmax: axis out of range");
  Index outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= x.dim(d);
  for (int d = axis + 1; d < r; ++d) inner *= x.dim(d);
  const Index len = x.dim(axis);
  const auto& xv = x.vec();
  auto y = std::make_shared<std::vector<T>>(xv.size());
  for (Index o = 0; o < outer; ++o)
    for (Index in = 0; in < inner; ++in) {
      const Index base = o * len * inner + in;
      T mx = xv[base];
      for (Index k = 1; k < len; ++k) mx = std::max(mx, xv[base + k * inner]);
      T total = 0;
      for (Index k = 0; k < len; ++k) {
        const T e = std::exp(xv[base + k * inner] - mx);
        (*y)[base + k * inner] = e;
        total += e;
      }
      for (Index k = 0; k < len; ++k) (*y)[base + k * inner] /= total;
    }
  std::vector<T> out(*y);
  return make_result<T>(x.shape(), std::move(out), {x},
                        [x, y, outer, inner, len](TensorNode<T>& self) {
                          auto& dx = grad_of(x);
                          const T* dy = self.grad.data();
                          for (Index o = 0; o < outer; ++o)
                            for (Index in = 0; in < inner; ++in) {
                              const Index base = o * len * inner + in;
                              T dot = 0;
                              for (Index k = 0; k < len; ++k)
                                dot += dy[base + k * inner] * (*y)[base + k * inner];
                              for (Index k = 0; k < len; ++k) {
                                const Index i = base + k * inner;
                                dx[i] += (*y)[i] * (dy[i] - dot);
                              }
                            }
                        });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  constexpr double kAlpha = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double kBeta = 0.044715;
  const auto& xv = x.vec();
  std::vector<T> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const T v = xv[i];
    out[i] = static_cast<T>(0.5) * v *
             (T(1) + std::tanh(static_cast<T>(kAlpha) * (v + static_cast<T>(kBeta) * v * v * v)));
  }
  return make_result<T>(x.shape(), std::move(out), {x}, [x](TensorNode<T>& self) {
    auto& dx = grad_of(x);
    const auto& xv = x.vec();
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const T v = xv[i];
      const T u = static_cast<T>(kAlpha) * (v + static_cast<T>(kBeta) * v * v * v);
      const T t = std::tanh(u);
      const T du = static_cast<T>(kAlpha) * (T(1) + static_cast<T>(3 * kBeta) * v * v);
      const T d = static_cast<T>(0.5) * (T(1) + t) + static_cast<T>(0.5) * v * (T(1) - t * t) * du;
      dx[i] += self.grad[i] * d;
    }
  });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  std::vector<T> out(x.vec());
  for (auto& v : out) v = v > T(0) ? v : T(0);
  return make_result<T>(x.shape(), std::move(out), {x}, [x](TensorNode<T>& self) {
    auto& dx = grad_of(x);
    const auto& xv = x.vec();
    for (std::size_t i = 0; i < xv.size(); ++i)
      if (xv[i] > T(0)) dx[i] += self.grad[i];
  });
}

// ---------------------------------------------------------------------------
// Convolution and pooling

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, int stride,
                 int padding) {
  require(x.rank() == 4 && weight.rank() == 4, "conv2d: expected x[B,H,W,C] and w[kh,kw,Cin,Cout]");
  if (stride <= 0 || padding < 0) throw ValidationError("conv2d: invalid stride/padding");
  const Index B = x.dim(0), H = x.dim(1), W = x.dim(2), Cin = x.dim(3);
  const Index kh = weight.dim(0), kw = weight.dim(1), Cout = weight.dim(3);
  require(weight.dim(2) == Cin, "conv2d: channel mismatch " + to_string(x.shape()) + " vs " +
                                    to_string(weight.shape()));
  if (bias.defined()) require(bias.numel() == Cout, "conv2d: bias length mismatch");
  const Index Ho = (H + 2 * padding - kh) / stride + 1;
  const Index Wo = (W + 2 * padding - kw) / stride + 1;
  require(H + 2 * padding - kh >= 0 && W + 2 * padding - kw >= 0 && Ho > 0 && Wo > 0,
          "conv2d: non-positive output extent");
  const Index rows = B * Ho * Wo;
  const Index K = kh * kw * Cin;
  // im2col with (ky, kx, ci) column order, matching weight's memory layout.
  auto cols = std::make_shared<std::vector<T>>(static_cast<std::size_t>(rows * K), T(0));
  const auto& xv = x.vec();
  for (Index b = 0; b < B; ++b)
    for (Index oy = 0; oy < Ho; ++oy)
      for (Index ox = 0; ox < Wo; ++ox) {
        T* row = cols->data() + ((b * Ho + oy) * Wo + ox) * K;
        for (Index ky = 0; ky < kh; ++ky) {
          const Index iy = oy * stride - padding + ky;
          if (iy < 0 || iy >= H) continue;
          for (Index kx = 0; kx < kw; ++kx) {
            const Index ix = ox * stride - padding + kx;
            if (ix < 0 || ix >= W) continue;
            std::copy_n(xv.data() + ((b * H + iy) * W + ix) * Cin, Cin,
                        row + (ky * kw + kx) * Cin);
          }
        }
      }
  std::vector<T> out(static_cast<std::size_t>(rows * Cout));
  gemm(cols->data(), rows, K, false, weight.vec().data(), K, Cout, false, out.data(), false);
  if (bias.defined()) {
    MapMat<T> Y(out.data(), rows, Cout);
    Y.rowwise() += ConstMapVec<T>(bias.vec().data(), Cout).transpose();
  }
  return make_result<T>(
      {B, Ho, Wo, Cout}, std::move(out), {x, weight, bias},
      [x, weight, bias, cols, B, H, W, Cin, kh, kw, Cout, Ho, Wo, rows, K, stride,
       padding](TensorNode<T>& self) {
        const T* dy = self.grad.data();
        if (wants_grad(weight)) {
          gemm(cols->data(), rows, K, true, dy, rows, Cout, false, grad_of(weight).data(), true);
        }
        if (wants_grad(bias)) {
          add_column_sums(dy, rows, Cout, grad_of(bias).data());
        }
        if (wants_grad(x)) {
          std::vector<T> dcols(static_cast<std::size_t>(rows * K));
          gemm(dy, rows, Cout, false, weight.vec().data(), K, Cout, true, dcols.data(), false);
          auto& dx = grad_of(x);
          for (Index b = 0; b < B; ++b)
            for (Index oy = 0; oy < Ho; ++oy)
              for (Index ox = 0; ox < Wo; ++ox) {
                const T* row = dcols.data() + ((b * Ho + oy) * Wo + ox) * K;
                for (Index ky = 0; ky < kh; ++ky) {
                  const Index iy = oy * stride - padding + ky;
                  if (iy < 0 || iy >= H) continue;
                  for (Index kx = 0; kx < kw; ++kx) {
                    const Index ix = ox * stride - padding + kx;
                    if (ix < 0 || ix >= W) continue;
                    T* dst = dx.data() + ((b * H + iy) * W + ix) * Cin;
                    const T* src = row + (ky * kw + kx) * Cin;
                    for (Index c = 0; c < Cin; ++c) dst[c] += src[c];
                  }
                }
              }
        }
      });
}

template <typename T>
Tensor<T> max_pool2x2(const Tensor<T>& x) {
  require(x.rank() == 4, "max_pool2x2: expected [B,H,W,C]");
  const Index B = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
  require(H % 2 == 0 && W % 2 == 0, "max_pool2x2: odd spatial extent " + to_string(x.shape()));
  const Index Ho = H / 2, Wo = W / 2;
  auto argmax = std::make_shared<std::vector<Index>>(static_cast<std::size_t>(B * Ho * Wo * C));
  std::vector<T> out(argmax->size());
  const auto& xv = x.vec();
  for (Index b = 0; b < B; ++b)
    for (Index i = 0; i < Ho; ++i)
      for (Index j = 0; j < Wo; ++j)
        for (Index c = 0; c < C; ++c) {
          Index best = ((b * H + 2 * i) * W + 2 * j) * C + c;
          for (Index dy = 0; dy < 2; ++dy)
            for (Index dx = 0; dx < 2; ++dx) {
              const Index k = ((b * H + 2 * i + dy) * W + 2 * j + dx) * C + c;
              if (xv[k] > xv[best]) best = k;
            }
          const Index o = ((b * Ho + i) * Wo + j) * C + c;
          (*argmax)[o] = best;
          out[o] = xv[best];
        }
  return make_result<T>({B, Ho, Wo, C}, std::move(out), {x}, [x, argmax](TensorNode<T>& self) {
    auto& dx = grad_of(x);
    for (std::size_t o = 0; o < self.grad.size(); ++o) dx[(*argmax)[o]] += self.grad[o];
  });
}

// ---------------------------------------------------------------------------
// Loss

template <typename T>
Tensor<T> cross_entropy_loss(const Tensor<T>& logits, std::span<const std::int32_t> labels) {
  const Index K = last_dim(logits.shape());
  const Index rows = logits.numel() / K;
  require(static_cast<Index>(labels.size()) == rows,
          "cross_entropy_loss: label count " + std::to_string(labels.size()) +
              " does not match " + std::to_string(rows) + " logit rows");
  for (auto l : labels) {
    if (l < 0 || l >= K) {
      throw ValidationError("cross_entropy_loss: label " + std::to_string(l) +
                            " outside [0," + std::to_string(K) + ")");
    }
  }
  const auto& lv = logits.vec();
  auto probs = std::make_shared<std::vector<T>>(lv.size());
  double total = 0;
  for (Index r = 0; r < rows; ++r) {
    const T* z = lv.data() + r * K;
    T mx = z[0];
    for (Index k = 1; k < K; ++k) mx = std::max(mx, z[k]);
    double s = 0;
    for (Index k = 0; k < K; ++k) {
      const T e = std::exp(z[k] - mx);
      (*probs)[r * K + k] = e;
      s += e;
    }
    for (Index k = 0; k < K; ++k) (*probs)[r * K + k] = static_cast<T>((*probs)[r * K + k] / s);
    total += -(static_cast<double>(z[labels[r]] - mx) - std::log(s));
  }
  auto lab = std::make_shared<std::vector<std::int32_t>>(labels.begin(), labels.end());
  return make_result<T>({1}, {static_cast<T>(total / static_cast<double>(rows))}, {logits},
                        [logits, probs, lab, rows, K](TensorNode<T>& self) {
                          auto& g = grad_of(logits);
                          const T s = self.grad[0] / static_cast<T>(rows);
                          for (Index r = 0; r < rows; ++r) {
                            for (Index k = 0; k < K; ++k) g[r * K + k] += s * (*probs)[r * K + k];
                            g[r * K + (*lab)[r]] -= s;
                          }
                        });
}

#define SWINSEG_INSTANTIATE_OPS(T)                                                          \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> scale(const Tensor<T>&, double);                                       \
  template Tensor<T> sum(const Tensor<T>&);                                                 \
  template Tensor<T> mean(const Tensor<T>&);                                                \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                      \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&, bool, bool);                \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);          \
  template Tensor<T> gather(const Tensor<T>&, IndexMap, Shape);                             \
  template Tensor<T> concat_last(const Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,       \
                                double);                                                    \
  template Tensor<T> softmax(const Tensor<T>&, int);                                        \
  template Tensor<T> gelu(const Tensor<T>&);                                                \
  template Tensor<T> relu(const Tensor<T>&);                                                \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int); \
  template Tensor<T> max_pool2x2(const Tensor<T>&);                                         \
  template Tensor<T> upsample_nearest2x(const Tensor<T>&);                                  \
  template Tensor<T> cyclic_shift(const Tensor<T>&, Index, Index);                          \
  template Tensor<T> cross_entropy_loss(const Tensor<T>&, std::span<const std::int32_t>);

SWINSEG_INSTANTIATE_OPS(float)
SWINSEG_INSTANTIATE_OPS(double)

}  // namespace swinseg
