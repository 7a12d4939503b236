// Copyright 2026 The scenesketch Authors.
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

#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "scenesketch/nn/autodiff.hpp"

namespace scenesketch::nn {

namespace detail {

inline void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

inline void require_matrix(const Var& a, const char* op) {
  if (a.shape().empty()) throw ShapeError(std::string(op) + ": undefined input");
}

/// Elementwise unary op. `deriv(x, y)` returns dy/dx.
template <typename F, typename D>
Var unary(const Var& a, F f, D deriv) {
  Tensor out(a.shape());
  const auto& in = a.value();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return make_result(std::move(out), {a}, [deriv](Node& self) {
    accumulate(self, 0, [&](Tensor& g) {
      const Tensor& x = self.parents[0]->value;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * deriv(x[i], self.value[i]);
    });
  });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear algebra

inline Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  Tensor out = Tensor::matrix(a.rows(), b.cols());
  out.mat().noalias() = a.value().mat() * b.value().mat();
  return make_result(std::move(out), {a, b}, [](Node& self) {
    const Tensor& av = self.parents[0]->value;
    const Tensor& bv = self.parents[1]->value;
    accumulate(self, 0, [&](Tensor& g) { g.mat().noalias() += self.grad.mat() * bv.mat().transpose(); });
    accumulate(self, 1, [&](Tensor& g) { g.mat().noalias() += av.mat().transpose() * self.grad.mat(); });
  });
}

inline Var transpose(const Var& a) {
  Tensor out = Tensor::matrix(a.cols(), a.rows());
  out.mat() = a.value().mat().transpose();
  return make_result(std::move(out), {a}, [](Node& self) {
    accumulate(self, 0, [&](Tensor& g) { g.mat() += self.grad.mat().transpose(); });
  });
}

/// a + b; b may also be a single row broadcast over the rows of a.
inline Var add(const Var& a, const Var& b) {
  const bool broadcast = a.shape() != b.shape();
  if (broadcast && !(b.rows() == 1 && b.cols() == a.cols())) {
    throw ShapeError("add: cannot broadcast " + shape_string(b.shape()) + " onto " + shape_string(a.shape()));
  }
  Tensor out = a.value();
  if (broadcast) {
    out.mat().rowwise() += b.value().mat().row(0);
  } else {
    out.mat() += b.value().mat();
  }
  return make_result(std::move(out), {a, b}, [broadcast](Node& self) {
    accumulate(self, 0, [&](Tensor& g) { g.mat() += self.grad.mat(); });
    accumulate(self, 1, [&](Tensor& g) {
      if (broadcast) {
        g.mat().row(0) += self.grad.mat().colwise().sum();
      } else {
        g.mat() += self.grad.mat();
      }
    });
  });
}

inline Var sub(const Var& a, const Var& b) {
  detail::require_same_shape(a, b, "sub");
  Tensor out = a.value();
  out.mat() -= b.value().mat();
  return make_result(std::move(out), {a, b}, [](Node& self) {
    accumulate(self, 0, [&](Tensor& g) { g.mat() += self.grad.mat(); });
    accumulate(self, 1, [&](Tensor& g) { g.mat() -= self.grad.mat(); });
  });
}

/// Hadamard product.
inline Var mul(const Var& a, const Var& b) {
  detail::require_same_shape(a, b, "mul");
  Tensor out = a.value();
  out.mat().array() *= b.value().mat().array();
  return make_result(std::move(out), {a, b}, [](Node& self) {
    const Tensor& av = self.parents[0]->value;
    const Tensor& bv = self.parents[1]->value;
    accumulate(self, 0, [&](Tensor& g) { g.mat().array() += self.grad.mat().array() * bv.mat().array(); });
    accumulate(self, 1, [&](Tensor& g) { g.mat().array() += self.grad.mat().array() * av.mat().array(); });
  });
}

inline Var scale(const Var& a, double s) {
  Tensor out = a.value();
  out.mat() *= s;
  return make_result(std::move(out), {a}, [s](Node& self) {
    accumulate(self, 0, [&](Tensor& g) { g.mat() += s * self.grad.mat(); });
  });
}

inline Var add_scalar(const Var& a, double s) {
  Tensor out = a.value();
  out.mat().array() += s;
  return make_result(std::move(out), {a}, [](Node& self) {
    accumulate(self, 0, [&](Tensor& g) { g.mat() += self.grad.mat(); });
  });
}

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }

// ---------------------------------------------------------------------------
// Activations

inline Var sigmoid(const Var& a) {
  return detail::unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); }, [](double, double y) { return y * (1.0 - y); });
}

inline Var tanh(const Var& a) {
  return detail::unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

inline Var relu(const Var& a) {
  return detail::unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

/// GELU, tanh approximation.
inline Var gelu(const Var& a) {
  constexpr double k = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double c = 0.044715;
  return detail::unary(
      a,
      [](double x) { return 0.5 * x * (1.0 + std::tanh(k * (x + c * x * x * x))); },
      [](double x, double) {
        const double u = k * (x + c * x * x * x);
        const double t = std::tanh(u);
        const double du = k * (1.0 + 3.0 * c * x * x);
        return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
      });
}

inline Var exp(const Var& a) {
  return detail::unary(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

inline Var log(const Var& a) {
  return detail::unary(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

inline Var square(const Var& a) {
  return detail::unary(
      a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

// ---------------------------------------------------------------------------
// Reductions and shape plumbing

inline Var sum(const Var& a) {
  Tensor out = Tensor::scalar(a.value().mat().sum());
  return make_result(std::move(out), {a}, [](Node& self) {
    const double g0 = self.grad[0];
    accumulate(self, 0, [&](Tensor& g) { g.mat().array() += g0; });
  });
}

inline Var mean(const Var& a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

inline Var reshape(const Var& a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return make_result(std::move(out), {a}, [](Node& self) {
    accumulate(self, 0, [&](Tensor& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
  });
}

inline Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols: row mismatch");
    cols += p.cols();
  }
  Tensor out = Tensor::matrix(rows, cols);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    out.mat().middleCols(offset, p.cols()) = p.value().mat();
    offset += p.cols();
  }
  return make_result(std::move(out), parts, [](Node& self) {
    std::size_t offset = 0;
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      const std::size_t c = self.parents[i]->value.cols();
      accumulate(self, i, [&](Tensor& g) { g.mat() += self.grad.mat().middleCols(offset, c); });
      offset += c;
    }
  });
}

inline Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw ShapeError("concat_rows: column mismatch");
    rows += p.rows();
  }
  Tensor out = Tensor::matrix(rows, cols);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    out.mat().middleRows(offset, p.rows()) = p.value().mat();
    offset += p.rows();
  }
  return make_result(std::move(out), parts, [](Node& self) {
    std::size_t offset = 0;
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      const std::size_t r = self.parents[i]->value.rows();
      accumulate(self, i, [&](Tensor& g) { g.mat() += self.grad.mat().middleRows(offset, r); });
      offset += r;
    }
  });
}

inline Var slice_cols(const Var& a, std::size_t start, std::size_t count) {
  if (start + count > a.cols()) throw ShapeError("slice_cols: out of range");
  Tensor out = Tensor::matrix(a.rows(), count);
  out.mat() = a.value().mat().middleCols(start, count);
  return make_result(std::move(out), {a}, [start, count](Node& self) {
    accumulate(self, 0, [&](Tensor& g) { g.mat().middleCols(start, count) += self.grad.mat(); });
  });
}

inline Var slice_rows(const Var& a, std::size_t start, std::size_t count) {
  if (start + count > a.rows()) throw ShapeError("slice_rows: out of range");
  Tensor out = Tensor::matrix(count, a.cols());
  out.mat() = a.value().mat().middleRows(start, count);
  return make_result(std::move(out), {a}, [start, count](Node& self) {
    accumulate(self, 0, [&](Tensor& g) { g.mat().middleRows(start, count) += self.grad.mat(); });
  });
}

/// Row lookup into `table`; out row i = table row indices[i].
inline Var gather_rows(const Var& table, std::vector<std::size_t> indices) {
  Tensor out = Tensor::matrix(indices.size(), table.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= table.rows()) throw ShapeError("gather_rows: index out of range");
    out.mat().row(i) = table.value().mat().row(indices[i]);
  }
  return make_result(std::move(out), {table}, [idx = std::move(indices)](Node& self) {
    accumulate(self, 0, [&](Tensor& g) {
      for (std::size_t i = 0; i < idx.size(); ++i) g.mat().row(idx[i]) += self.grad.mat().row(i);
    });
  });
}

/// Repeats a single row `n` times.
inline Var repeat_rows(const Var& a, std::size_t n) {
  if (a.rows() != 1) throw ShapeError("repeat_rows: expects one row");
  Tensor out = Tensor::matrix(n, a.cols());
  out.mat().rowwise() = a.value().mat().row(0);
  return make_result(std::move(out), {a}, [](Node& self) {
    accumulate(self, 0, [&](Tensor& g) { g.mat().row(0) += self.grad.mat().colwise().sum(); });
  });
}

// ---------------------------------------------------------------------------
// Normalization and softmax family

inline Var softmax_rows(const Var& a) {
  Tensor out = a.value();
  auto m = out.mat();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp();
    m.row(r) /= m.row(r).sum();
  }
  return make_result(std::move(out), {a}, [](Node& self) {
    accumulate(self, 0, [&](Tensor& g) {
      const auto y = self.value.mat();
      const auto gy = self.grad.mat();
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        const double dot = y.row(r).dot(gy.row(r));
        g.mat().row(r).array() += y.row(r).array() * (gy.row(r).array() - dot);
      }
    });
  });
}

inline Var log_softmax_rows(const Var& a) {
  Tensor out = a.value();
  auto m = out.mat();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double mx = m.row(r).maxCoeff();
    const double lse = mx + std::log((m.row(r).array() - mx).exp().sum());
    m.row(r).array() -= lse;
  }
  return make_result(std::move(out), {a}, [](Node& self) {
    accumulate(self, 0, [&](Tensor& g) {
      const auto y = self.value.mat();
      const auto gy = self.grad.mat();
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        const double total = gy.row(r).sum();
        g.mat().row(r).array() += gy.row(r).array() - y.row(r).array().exp() * total;
      }
    });
  });
}

/// Softmax over each row with entries j > i forced to exactly zero.
/// Scores above the diagonal never reach the output, so later rows of the
/// input cannot perturb earlier rows of the result.
inline Var causal_softmax(const Var& scores) {
  if (scores.rows() != scores.cols()) throw ShapeError("causal_softmax: expects a square matrix");
  const auto n = static_cast<Eigen::Index>(scores.rows());
  Tensor out = Tensor::matrix(scores.rows(), scores.cols());
  auto y = out.mat();
  const auto x = scores.value().mat();
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto head = x.row(r).head(r + 1);
    const double mx = head.maxCoeff();
    double total = 0.0;
    for (Eigen::Index c = 0; c <= r; ++c) {
      y(r, c) = std::exp(x(r, c) - mx);
      total += y(r, c);
    }
    for (Eigen::Index c = 0; c <= r; ++c) y(r, c) /= total;
  }
  return make_result(std::move(out), {scores}, [](Node& self) {
    accumulate(self, 0, [&](Tensor& g) {
      const auto y = self.value.mat();
      const auto gy = self.grad.mat();
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        double dot = 0.0;
        for (Eigen::Index c = 0; c <= r; ++c) dot += y(r, c) * gy(r, c);
        for (Eigen::Index c = 0; c <= r; ++c) g.mat()(r, c) += y(r, c) * (gy(r, c) - dot);
      }
    });
  });
}

/// Row-wise layer normalization with learned gain and bias rows.
inline Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (gain.value().size() != d || bias.value().size() != d) throw ShapeError("layer_norm: parameter width");
  Tensor out = Tensor::matrix(n, d);
  Tensor xhat = Tensor::matrix(n, d);
  std::vector<double> inv_std(n);
  const auto xm = x.value().mat();
  const auto gm = gain.value().mat();
  const auto bm = bias.value().mat();
  for (std::size_t r = 0; r < n; ++r) {
    const double mu = xm.row(r).mean();
    const double var = (xm.row(r).array() - mu).square().mean();
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    xhat.mat().row(r) = (xm.row(r).array() - mu) * inv_std[r];
    out.mat().row(r) = xhat.mat().row(r).array() * gm.row(0).array() + bm.row(0).array();
  }
  return make_result(std::move(out), {x, gain, bias},
                     [xhat = std::move(xhat), inv_std = std::move(inv_std), d](Node& self) {
                       const auto gy = self.grad.mat();
                       const auto gm = self.parents[1]->value.mat();
                       accumulate(self, 0, [&](Tensor& g) {
                         for (Eigen::Index r = 0; r < gy.rows(); ++r) {
                           const Eigen::RowVectorXd gh = gy.row(r).array() * gm.row(0).array();
                           const double mean_gh = gh.mean();
                           const double mean_ghx = (gh.array() * xhat.mat().row(r).array()).mean();
                           g.mat().row(r).array() +=
                               inv_std[r] * (gh.array() - mean_gh - xhat.mat().row(r).array() * mean_ghx);
                         }
                       });
                       accumulate(self, 1, [&](Tensor& g) {
                         g.mat().row(0) += (gy.array() * xhat.mat().array()).matrix().colwise().sum();
                       });
                       accumulate(self, 2, [&](Tensor& g) { g.mat().row(0) += gy.colwise().sum(); });
                       (void)d;
                     });
}

/// Weighted mean cross-entropy: sum_i w_i * -log softmax(logits_i)[t_i] / normalizer.
/// Rows with zero weight contribute nothing.
inline Var cross_entropy(const Var& logits, const std::vector<int>& targets, std::vector<double> weights = {},
                         double normalizer = 0.0) {
  const std::size_t n = logits.rows();
  const std::size_t k = logits.cols();
  if (targets.size() != n) throw ShapeError("cross_entropy: target count mismatch");
  if (weights.empty()) weights.assign(n, 1.0);
  if (weights.size() != n) throw ShapeError("cross_entropy: weight count mismatch");
  if (normalizer <= 0.0) normalizer = static_cast<double>(n);
  Tensor probs = Tensor::matrix(n, k);
  double total = 0.0;
  const auto x = logits.value().mat();
  for (std::size_t r = 0; r < n; ++r) {
    if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= k) {
      throw ShapeError("cross_entropy: target out of range");
    }
    const double mx = x.row(r).maxCoeff();
    const double lse = mx + std::log((x.row(r).array() - mx).exp().sum());
    probs.mat().row(r) = (x.row(r).array() - lse).exp();
    if (weights[r] != 0.0) total += weights[r] * (lse - x(r, targets[r]));
  }
  Tensor out = Tensor::scalar(total / normalizer);
  return make_result(std::move(out), {logits},
                     [probs = std::move(probs), targets, weights = std::move(weights), normalizer](Node& self) {
                       const double g0 = self.grad[0] / normalizer;
                       accumulate(self, 0, [&](Tensor& g) {
                         for (std::size_t r = 0; r < targets.size(); ++r) {
                           if (weights[r] == 0.0) continue;
                           const double w = g0 * weights[r];
                           g.mat().row(r) += w * probs.mat().row(r);
                           g.at(r, targets[r]) -= w;
                         }
                       });
                     });
}

/// Euclidean norm of each row, shape [n, 1]. The gradient at a zero row is
/// taken as zero so that an exact prediction has an exact zero loss.
inline Var row_norm(const Var& a) {
  Tensor out = Tensor::matrix(a.rows(), 1);
  for (std::size_t r = 0; r < a.rows(); ++r) out[r] = a.value().mat().row(r).norm();
  return make_result(std::move(out), {a}, [](Node& self) {
    accumulate(self, 0, [&](Tensor& g) {
      const auto x = self.parents[0]->value.mat();
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double n = self.value[r];
        if (n > 0.0) g.mat().row(r) += (self.grad[r] / n) * x.row(r);
      }
    });
  });
}

// ---------------------------------------------------------------------------
// Convolution

struct Conv2dGeometry {
  std::size_t in_channels = 1;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;

  std::size_t out_height() const { return (height + 2 * padding - kernel) / stride + 1; }
  std::size_t out_width() const { return (width + 2 * padding - kernel) / stride + 1; }
  std::size_t patch() const { return in_channels * kernel * kernel; }
};

/// 2-D convolution over a batch of flattened images.
/// x: [B, C_in*H*W] (channel-major), weight: [C_out, C_in*k*k], bias: [1, C_out].
/// Returns [B, C_out*H_out*W_out].
inline Var conv2d(const Var& x, const Var& weight, const Var& bias, const Conv2dGeometry& geo) {
  const std::size_t batch = x.rows();
  const std::size_t oh = geo.out_height();
  const std::size_t ow = geo.out_width();
  const std::size_t positions = oh * ow;
  const std::size_t patch = geo.patch();
  const std::size_t out_ch = weight.rows();
  if (x.cols() != geo.in_channels * geo.height * geo.width) throw ShapeError("conv2d: input width");
  if (weight.cols() != patch) throw ShapeError("conv2d: kernel width");
  if (bias.value().size() != out_ch) throw ShapeError("conv2d: bias width");

  // im2col per sample: columns [patch, positions]
  auto im2col = [geo, oh, ow, patch, positions](const double* img, Eigen::MatrixXd& cols) {
    cols.setZero(static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(positions));
    for (std::size_t c = 0; c < geo.in_channels; ++c) {
      for (std::size_t ky = 0; ky < geo.kernel; ++ky) {
        for (std::size_t kx = 0; kx < geo.kernel; ++kx) {
          const std::size_t prow = (c * geo.kernel + ky) * geo.kernel + kx;
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const auto iy = static_cast<long>(oy * geo.stride + ky) - static_cast<long>(geo.padding);
            if (iy < 0 || iy >= static_cast<long>(geo.height)) continue;
            for (std::size_t ox = 0; ox < ow; ++ox) {
              const auto ix = static_cast<long>(ox * geo.stride + kx) - static_cast<long>(geo.padding);
              if (ix < 0 || ix >= static_cast<long>(geo.width)) continue;
              cols(static_cast<Eigen::Index>(prow), static_cast<Eigen::Index>(oy * ow + ox)) =
                  img[(c * geo.height + static_cast<std::size_t>(iy)) * geo.width + static_cast<std::size_t>(ix)];
            }
          }
        }
      }
    }
  };

  Tensor out = Tensor::matrix(batch, out_ch * positions);
  Eigen::MatrixXd cols;
  const auto w = weight.value().mat();
  for (std::size_t b = 0; b < batch; ++b) {
    im2col(x.value().data() + b * x.cols(), cols);
    Eigen::MatrixXd y = w * cols;
    for (std::size_t oc = 0; oc < out_ch; ++oc) {
      for (std::size_t p = 0; p < positions; ++p) {
        out.at(b, oc * positions + p) = y(static_cast<Eigen::Index>(oc), static_cast<Eigen::Index>(p)) + bias.value()[oc];
      }
    }
  }
  return make_result(std::move(out), {x, weight, bias},
                     [geo, im2col, positions, out_ch, patch](Node& self) {
                       const Tensor& xv = self.parents[0]->value;
                       const auto w = self.parents[1]->value.mat();
                       Eigen::MatrixXd cols;
                       Eigen::MatrixXd gy(static_cast<Eigen::Index>(out_ch), static_cast<Eigen::Index>(positions));
                       const std::size_t oh = geo.out_height();
                       const std::size_t ow = geo.out_width();
                       for (std::size_t b = 0; b < xv.rows(); ++b) {
                         for (std::size_t oc = 0; oc < out_ch; ++oc) {
                           for (std::size_t p = 0; p < positions; ++p) {
                             gy(static_cast<Eigen::Index>(oc), static_cast<Eigen::Index>(p)) =
                                 self.grad.at(b, oc * positions + p);
                           }
                         }
                         accumulate(self, 2, [&](Tensor& g) {
                           for (std::size_t oc = 0; oc < out_ch; ++oc) g[oc] += gy.row(static_cast<Eigen::Index>(oc)).sum();
                         });
                         accumulate(self, 1, [&](Tensor& g) {
                           im2col(xv.data() + b * xv.cols(), cols);
                           g.mat().noalias() += gy * cols.transpose();
                         });
                         accumulate(self, 0, [&](Tensor& g) {
                           const Eigen::MatrixXd gcols = w.transpose() * gy;  // [patch, positions]
                           double* gimg = g.data() + b * xv.cols();
                           for (std::size_t c = 0; c < geo.in_channels; ++c) {
                             for (std::size_t ky = 0; ky < geo.kernel; ++ky) {
                               for (std::size_t kx = 0; kx < geo.kernel; ++kx) {
                                 const std::size_t prow = (c * geo.kernel + ky) * geo.kernel + kx;
                                 for (std::size_t oy = 0; oy < oh; ++oy) {
                                   const auto iy = static_cast<long>(oy * geo.stride + ky) - static_cast<long>(geo.padding);
                                   if (iy < 0 || iy >= static_cast<long>(geo.height)) continue;
                                   for (std::size_t ox = 0; ox < ow; ++ox) {
                                     const auto ix =
                                         static_cast<long>(ox * geo.stride + kx) - static_cast<long>(geo.padding);
                                     if (ix < 0 || ix >= static_cast<long>(geo.width)) continue;
                                     gimg[(c * geo.height + static_cast<std::size_t>(iy)) * geo.width +
                                          static_cast<std::size_t>(ix)] +=
                                         gcols(static_cast<Eigen::Index>(prow), static_cast<Eigen::Index>(oy * ow + ox));
                                   }
                                 }
                               }
                             }
                           }
                         });
                       }
                       (void)patch;
                     });
}

}  // namespace scenesketch::nn
