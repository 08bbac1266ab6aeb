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

#ifndef MSQA_OPTIM_H_
#define MSQA_OPTIM_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "msqa/rng.h"
#include "msqa/tensor.h"

namespace msqa {

struct Parameter {
  std::string name;  // "module/op/index" path
  Tensor tensor;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step = 0;
};

// Owns every trainable tensor of a model. Modules hold Tensor handles that
// alias the stored parameters, so updates here are visible to them.
class ParameterStore {
 public:
  // Weight [fan_in, fan_out] drawn uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Tensor add_weight(const std::string& name, std::size_t fan_in,
                    std::size_t fan_out, Rng& rng);
  Tensor add_zeros(const std::string& name, Shape shape);
  Tensor add_filled(const std::string& name, Shape shape, double value);
  Tensor add_uniform(const std::string& name, Shape shape, double bound,
                     Rng& rng);

  std::deque<Parameter>& parameters() { return params_; }
  const std::deque<Parameter>& parameters() const { return params_; }
  Parameter& get(const std::string& name);
  const Parameter* find(const std::string& name) const;
  std::size_t scalar_count() const;

  void zero_grad();
  // Copies of the current values, for best-epoch snapshots.
  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

 private:
  Tensor add(const std::string& name, Tensor tensor);
  std::deque<Parameter> params_;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam with decoupled weight decay:
//   theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta)
// Every parameter must carry a gradient; gradients are cleared afterwards.
void adam_step(ParameterStore& store, const AdamOptions& options);

struct GradientCheckOptions {
  double eps = 1e-5;
  // Coordinates sampled across all parameters; 0 checks every coordinate.
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  // Lower bound on the relative-error denominator, so coordinates whose true
  // gradient is ~0 are judged on absolute error.
  double floor = 1e-6;
};

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_parameter;
};

// Runs one backward pass of `loss` and compares the reverse-mode gradients
// against central differences.
// Relative error is |analytic - numeric| / max(floor, |analytic|, |numeric|).
GradientCheckReport gradient_check(const std::function<Tensor()>& loss,
                                   ParameterStore& store,
                                   const GradientCheckOptions& options);

}  // namespace msqa

#endif  // MSQA_OPTIM_H_
