// Copyright 2026 The xlir Authors. All Rights Reserved.
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

#ifndef XLIR_OPTIM_H_
#define XLIR_OPTIM_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "xlir/encoder.h"
#include "xlir/gradient.h"

namespace xlir {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

enum class OptimizerRule { kAdam, kSgdDecay };

std::string to_string(OptimizerRule rule);
OptimizerRule parse_optimizer_rule(const std::string& name);  // "adam" | "sgd_ct"

// Step counter plus, for Adam, first/second moments shaped like the
// parameter tables.
//
// Adam here is the lazy sparse variant: only rows present in a packet have
// their moments decayed and their parameters moved. A row that receives no
// gradient keeps its moments unchanged, which differs from dense Adam once a
// row has been touched.
class OptimizerState {
 public:
  static OptimizerState adam(const AdamConfig& config, const ModelParams& params);
  // Step size c / t at step t = 1, 2, ...
  static OptimizerState sgd_ct(double c);

  OptimizerRule rule() const { return rule_; }
  std::int64_t step() const { return step_; }
  const AdamConfig& adam_config() const { return adam_; }
  double sgd_c() const { return sgd_c_; }

 private:
  friend void apply_adam(OptimizerState&, ModelParams&, const GradientPacket&);
  friend void apply_sgd_ct(OptimizerState&, ModelParams&, const GradientPacket&);

  OptimizerRule rule_ = OptimizerRule::kAdam;
  AdamConfig adam_;
  double sgd_c_ = 1.0;
  std::int64_t step_ = 0;
  std::array<std::vector<double>, 2> first_moment_;
  std::array<std::vector<double>, 2> second_moment_;
};

// Bias-corrected Adam on the rows in `grads`. Throws NumericError naming the
// first non-finite row; on error neither state nor params change.
void apply_adam(OptimizerState& state, ModelParams& params,
                const GradientPacket& grads);

// params -= (c / t) * grads.
void apply_sgd_ct(OptimizerState& state, ModelParams& params,
                  const GradientPacket& grads);

// Dispatches on state.rule().
void apply_update(OptimizerState& state, ModelParams& params,
                  const GradientPacket& grads);

// Rescales every entry by threshold / norm when the global norm exceeds
// `threshold`. Returns true when scaling happened.
bool clip_in_place(GradientPacket& grads, double threshold);

inline GradientPacket clip_gradients(GradientPacket grads, double threshold) {
  clip_in_place(grads, threshold);
  return grads;
}

}  // namespace xlir

#endif  // XLIR_OPTIM_H_
