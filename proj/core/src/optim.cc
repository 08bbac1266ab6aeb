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

#include "msqa/optim.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "msqa/errors.h"

namespace msqa {

Tensor ParameterStore::add(const std::string& name, Tensor tensor) {
  if (find(name)) throw ConfigError("duplicate parameter name: " + name);
  Parameter p;
  p.name = name;
  p.tensor = tensor;
  p.first_moment.assign(tensor.numel(), 0.0);
  p.second_moment.assign(tensor.numel(), 0.0);
  params_.push_back(std::move(p));
  return tensor;
}

Tensor ParameterStore::add_weight(const std::string& name, std::size_t fan_in,
                                  std::size_t fan_out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return add_uniform(name, {fan_in, fan_out}, bound, rng);
}

Tensor ParameterStore::add_zeros(const std::string& name, Shape shape) {
  return add(name, Tensor::zeros(std::move(shape), true));
}

Tensor ParameterStore::add_filled(const std::string& name, Shape shape,
                                  double value) {
  return add(name, Tensor::filled(std::move(shape), value, true));
}

Tensor ParameterStore::add_uniform(const std::string& name, Shape shape,
                                   double bound, Rng& rng) {
  std::vector<double> data(shape_numel(shape));
  for (double& x : data) x = rng.uniform(-bound, bound);
  return add(name, Tensor::from_data(std::move(shape), std::move(data), true));
}

Parameter& ParameterStore::get(const std::string& name) {
  for (Parameter& p : params_) {
    if (p.name == name) return p;
  }
  throw StateError("unknown parameter: " + name);
}

const Parameter* ParameterStore::find(const std::string& name) const {
  for (const Parameter& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const Parameter& p : params_) n += p.tensor.numel();
  return n;
}

void ParameterStore::zero_grad() {
  for (Parameter& p : params_) p.tensor.zero_grad();
}

std::vector<std::vector<double>> ParameterStore::snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(params_.size());
  for (const Parameter& p : params_) {
    out.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
  }
  return out;
}

void ParameterStore::restore(const std::vector<std::vector<double>>& values) {
  if (values.size() != params_.size()) {
    throw StateError("snapshot has " + std::to_string(values.size()) +
                     " parameters, store has " + std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto dst = params_[i].tensor.mutable_data();
    if (dst.size() != values[i].size()) {
      throw StateError("snapshot shape mismatch for " + params_[i].name);
    }
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

void adam_step(ParameterStore& store, const AdamOptions& options) {
  for (const Parameter& p : store.parameters()) {
    if (!p.tensor.has_grad()) {
      throw StateError("adam_step: parameter '" + p.name + "' has no gradient");
    }
  }
  for (Parameter& p : store.parameters()) {
    ++p.step;
    const double correction1 =
        1.0 - std::pow(options.beta1, static_cast<double>(p.step));
    const double correction2 =
        1.0 - std::pow(options.beta2, static_cast<double>(p.step));
    auto theta = p.tensor.mutable_data();
    auto grad = p.tensor.grad();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = grad[i];
      p.first_moment[i] = options.beta1 * p.first_moment[i] + (1.0 - options.beta1) * g;
      p.second_moment[i] =
          options.beta2 * p.second_moment[i] + (1.0 - options.beta2) * g * g;
      const double m_hat = p.first_moment[i] / correction1;
      const double v_hat = p.second_moment[i] / correction2;
      theta[i] -= options.learning_rate *
                  (m_hat / (std::sqrt(v_hat) + options.eps) +
                   options.weight_decay * theta[i]);
      if (!std::isfinite(theta[i])) {
        throw NumericError("adam_step: non-finite update for " + p.name);
      }
    }
    p.tensor.clear_grad();
  }
}

GradientCheckReport gradient_check(const std::function<Tensor()>& loss,
                                   ParameterStore& store,
                                   const GradientCheckOptions& options) {
  if (!(options.eps >= 1e-7 && options.eps <= 1e-3)) {
    throw ConfigError("gradient_check: eps must lie in [1e-7, 1e-3]");
  }
  store.zero_grad();
  Tensor value = loss();
  if (!std::isfinite(value.item())) throw NumericError("gradient_check: loss is not finite");
  value.backward();

  struct Coordinate {
    std::size_t param;
    std::size_t index;
  };
  std::vector<Coordinate> all;
  auto& params = store.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p].tensor.numel(); ++i) all.push_back({p, i});
  }
  if (options.samples > 0 && options.samples < all.size()) {
    Rng rng(options.seed);
    rng.shuffle(std::span<Coordinate>(all));
    all.resize(options.samples);
  }

  auto evaluate = [&]() {
    NoGradGuard guard;
    const double v = loss().item();
    if (!std::isfinite(v)) throw NumericError("gradient_check: loss is not finite");
    return v;
  };

  GradientCheckReport report;
  for (const Coordinate& c : all) {
    Parameter& p = params[c.param];
    const double analytic = p.tensor.grad()[c.index];
    double& theta = p.tensor.mutable_data()[c.index];
    const double original = theta;
    theta = original + options.eps;
    const double plus = evaluate();
    theta = original - options.eps;
    const double minus = evaluate();
    theta = original;
    const double numeric = (plus - minus) / (2.0 * options.eps);
    const double denom = std::max({options.floor, std::abs(analytic), std::abs(numeric)});
    const double err = std::abs(analytic - numeric) / denom;
    if (err > report.max_relative_error || report.coordinates == 0) {
      report.max_relative_error = err;
      report.worst_parameter = p.name;
    }
    ++report.coordinates;
  }
  store.zero_grad();
  return report;
}

}  // namespace msqa
