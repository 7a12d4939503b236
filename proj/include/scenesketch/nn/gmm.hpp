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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "scenesketch/nn/ops.hpp"

namespace scenesketch::nn {

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Bivariate Gaussian mixture emitted once per decoder step.
struct GMMParams {
  std::vector<double> weights;
  std::vector<double> mean_x;
  std::vector<double> mean_y;
  std::vector<double> std_x;
  std::vector<double> std_y;
  std::vector<double> rho;

  std::size_t components() const { return weights.size(); }

  void validate() const {
    const std::size_t m = weights.size();
    if (m == 0) throw ParameterError("gmm: no components");
    if (mean_x.size() != m || mean_y.size() != m || std_x.size() != m || std_y.size() != m || rho.size() != m) {
      throw ParameterError("gmm: component arrays differ in length");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (!(weights[k] >= 0.0)) throw ParameterError("gmm: negative mixture weight");
      if (!(std_x[k] > 0.0) || !(std_y[k] > 0.0)) throw ParameterError("gmm: non-positive std");
      if (!(std::abs(rho[k]) < 1.0)) throw ParameterError("gmm: correlation outside (-1, 1)");
      total += weights[k];
    }
    if (std::abs(total - 1.0) > 1e-6) throw ParameterError("gmm: weights do not sum to 1");
  }

  Point2 mixture_mean() const {
    Point2 p;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      p.x += weights[k] * mean_x[k];
      p.y += weights[k] * mean_y[k];
    }
    return p;
  }
};

/// Number of raw decoder outputs per mixture (logit, 2 means, 2 log-stds, rho).
inline constexpr std::size_t kGmmRawPerComponent = 6;

/// Raw row layout: [logits(M), mu_x(M), mu_y(M), log_sx(M), log_sy(M), rho_pre(M)].
inline GMMParams gmm_from_raw(std::span<const double> raw, std::size_t m) {
  if (raw.size() != kGmmRawPerComponent * m) throw ParameterError("gmm: raw width");
  GMMParams p;
  p.weights.resize(m);
  p.mean_x.assign(raw.begin() + m, raw.begin() + 2 * m);
  p.mean_y.assign(raw.begin() + 2 * m, raw.begin() + 3 * m);
  p.std_x.resize(m);
  p.std_y.resize(m);
  p.rho.resize(m);
  const double mx = *std::max_element(raw.begin(), raw.begin() + m);
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    p.weights[k] = std::exp(raw[k] - mx);
    total += p.weights[k];
    p.std_x[k] = std::exp(raw[3 * m + k]);
    p.std_y[k] = std::exp(raw[4 * m + k]);
    p.rho[k] = std::tanh(raw[5 * m + k]);
  }
  for (auto& w : p.weights) w /= total;
  return p;
}

/// log N(point | component k).
inline double bivariate_log_density(const GMMParams& p, std::size_t k, Point2 point) {
  const double zx = (point.x - p.mean_x[k]) / p.std_x[k];
  const double zy = (point.y - p.mean_y[k]) / p.std_y[k];
  const double q = 1.0 - p.rho[k] * p.rho[k];
  const double z = zx * zx + zy * zy - 2.0 * p.rho[k] * zx * zy;
  return -std::log(2.0 * std::numbers::pi * p.std_x[k] * p.std_y[k] * std::sqrt(q)) - z / (2.0 * q);
}

inline double gmm_log_likelihood(const GMMParams& p, Point2 point) {
  p.validate();
  std::vector<double> terms(p.components());
  for (std::size_t k = 0; k < p.components(); ++k) {
    terms[k] = (p.weights[k] > 0.0 ? std::log(p.weights[k]) : -std::numeric_limits<double>::infinity()) +
               bivariate_log_density(p, k, point);
  }
  const double mx = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - mx);
  return mx + std::log(acc);
}

/// Picks a category from unnormalized log-weights at `temperature`.
/// A temperature at or below 1e-8 takes the argmax (lowest index on ties).
template <typename Rng>
std::size_t sample_categorical(std::span<const double> log_weights, double temperature, Rng& rng) {
  if (log_weights.empty()) throw ParameterError("categorical: empty");
  if (temperature <= 1e-8) {
    return static_cast<std::size_t>(std::max_element(log_weights.begin(), log_weights.end()) - log_weights.begin());
  }
  const double mx = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> w(log_weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp((log_weights[i] - mx) / temperature);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  return pick(rng);
}

/// Draws one offset. Temperature divides the mixture log-weights and scales
/// each variance; at zero temperature the dominant component's mean is returned.
template <typename Rng>
Point2 gmm_sample(const GMMParams& p, double temperature, Rng& rng) {
  p.validate();
  std::vector<double> logw(p.components());
  for (std::size_t k = 0; k < logw.size(); ++k) {
    logw[k] = p.weights[k] > 0.0 ? std::log(p.weights[k]) : -std::numeric_limits<double>::infinity();
  }
  const std::size_t k = sample_categorical(std::span<const double>(logw), temperature, rng);
  if (temperature <= 1e-8) return {p.mean_x[k], p.mean_y[k]};
  const double s = std::sqrt(temperature);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double e1 = normal(rng);
  const double e2 = normal(rng);
  const double sx = p.std_x[k] * s;
  const double sy = p.std_y[k] * s;
  const double r = p.rho[k];
  return {p.mean_x[k] + sx * e1, p.mean_y[k] + sy * (r * e1 + std::sqrt(1.0 - r * r) * e2)};
}

/// Fused mixture negative log-likelihood over a batch of rows.
/// raw: [B, 6M]; targets: [B, 2]. Returns sum_i w_i * -log p(target_i) / normalizer.
inline Var gmm_nll(const Var& raw, const Tensor& targets, std::size_t m, std::vector<double> weights = {},
                   double normalizer = 0.0) {
  const std::size_t n = raw.rows();
  if (raw.cols() != kGmmRawPerComponent * m) throw ShapeError("gmm_nll: raw width");
  if (targets.rows() != n || targets.cols() != 2) throw ShapeError("gmm_nll: target shape");
  if (weights.empty()) weights.assign(n, 1.0);
  if (normalizer <= 0.0) normalizer = static_cast<double>(n);

  // Per row, per component: responsibilities and the log-density partials.
  Tensor dlogits = Tensor::matrix(n, kGmmRawPerComponent * m);
  double total = 0.0;
  std::vector<double> l(m);
  for (std::size_t r = 0; r < n; ++r) {
    if (weights[r] == 0.0) continue;
    const double* row = raw.value().data() + r * raw.cols();
    const double tx = targets.at(r, 0);
    const double ty = targets.at(r, 1);
    const double mx_logit = *std::max_element(row, row + m);
    double lse_logit = 0.0;
    for (std::size_t k = 0; k < m; ++k) lse_logit += std::exp(row[k] - mx_logit);
    lse_logit = mx_logit + std::log(lse_logit);
    for (std::size_t k = 0; k < m; ++k) {
      const double sx = std::exp(row[3 * m + k]);
      const double sy = std::exp(row[4 * m + k]);
      const double rho = std::tanh(row[5 * m + k]);
      const double q = 1.0 - rho * rho;
      const double zx = (tx - row[m + k]) / sx;
      const double zy = (ty - row[2 * m + k]) / sy;
      const double z = zx * zx + zy * zy - 2.0 * rho * zx * zy;
      l[k] = (row[k] - lse_logit) - std::log(2.0 * std::numbers::pi * sx * sy * std::sqrt(q)) - z / (2.0 * q);
    }
    const double mx = *std::max_element(l.begin(), l.end());
    double acc = 0.0;
    for (double v : l) acc += std::exp(v - mx);
    const double lse = mx + std::log(acc);
    total += weights[r] * -lse;

    double* d = dlogits.data() + r * dlogits.cols();
    for (std::size_t k = 0; k < m; ++k) {
      const double gamma = std::exp(l[k] - lse);
      const double pi = std::exp(row[k] - lse_logit);
      const double sx = std::exp(row[3 * m + k]);
      const double sy = std::exp(row[4 * m + k]);
      const double rho = std::tanh(row[5 * m + k]);
      const double q = 1.0 - rho * rho;
      const double zx = (tx - row[m + k]) / sx;
      const double zy = (ty - row[2 * m + k]) / sy;
      const double z = zx * zx + zy * zy - 2.0 * rho * zx * zy;
      const double w = weights[r];
      d[k] = w * (pi - gamma);
      d[m + k] = -w * gamma * (zx - rho * zy) / (q * sx);
      d[2 * m + k] = -w * gamma * (zy - rho * zx) / (q * sy);
      d[3 * m + k] = -w * gamma * (-1.0 + (zx * zx - rho * zx * zy) / q);
      d[4 * m + k] = -w * gamma * (-1.0 + (zy * zy - rho * zx * zy) / q);
      d[5 * m + k] = -w * gamma * (rho + zx * zy - z * rho / q);
    }
  }
  Tensor out = Tensor::scalar(total / normalizer);
  return make_result(std::move(out), {raw}, [dlogits = std::move(dlogits), normalizer](Node& self) {
    const double g0 = self.grad[0] / normalizer;
    accumulate(self, 0, [&](Tensor& g) { g.mat() += g0 * dlogits.mat(); });
  });
}

}  // namespace scenesketch::nn
