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

#include "xlir/optim.h"

#include <cmath>

#include "xlir/error.h"

namespace xlir {

std::string to_string(OptimizerRule rule) {
  return rule == OptimizerRule::kAdam ? "adam" : "sgd_ct";
}

OptimizerRule parse_optimizer_rule(const std::string& name) {
  if (name == "adam") return OptimizerRule::kAdam;
  if (name == "sgd_ct" || name == "sgd") return OptimizerRule::kSgdDecay;
  throw InvalidArgument("unknown optimizer '" + name + "' (expected adam or sgd_ct)");
}

OptimizerState OptimizerState::adam(const AdamConfig& config,
                                    const ModelParams& params) {
  if (!(config.lr >= 0.0) || !(config.beta1 >= 0.0 && config.beta1 < 1.0) ||
      !(config.beta2 >= 0.0 && config.beta2 < 1.0) || !(config.eps > 0.0)) {
    throw InvalidArgument("invalid Adam hyperparameters");
  }
  OptimizerState s;
  s.rule_ = OptimizerRule::kAdam;
  s.adam_ = config;
  for (int t = 0; t < 2; ++t) {
    const auto n = params.table(static_cast<TableId>(t)).data().size();
    s.first_moment_[t].assign(n, 0.0);
    s.second_moment_[t].assign(n, 0.0);
  }
  return s;
}

OptimizerState OptimizerState::sgd_ct(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw InvalidArgument("sgd_ct: c must be finite and >= 0");
  }
  OptimizerState s;
  s.rule_ = OptimizerRule::kSgdDecay;
  s.sgd_c_ = c;
  return s;
}

namespace {

void check_packet(const ModelParams& params, const GradientPacket& grads) {
  if (auto bad = grads.first_non_finite()) {
    throw NumericError("non-finite gradient at " + to_string(*bad));
  }
  for (const auto& [key, values] : grads) {
    const auto& table = params.table(key.table);
    if (key.row < 0 || static_cast<std::size_t>(key.row) >= table.vocab_size() ||
        values.size() != table.dim()) {
      throw InvalidArgument("gradient row " + to_string(key) +
                            " does not match parameter shape");
    }
  }
}

}  // namespace

void apply_adam(OptimizerState& state, ModelParams& params,
                const GradientPacket& grads) {
  if (state.rule_ != OptimizerRule::kAdam) {
    throw InvalidArgument("apply_adam on a non-Adam optimizer state");
  }
  check_packet(params, grads);
  const AdamConfig& c = state.adam_;
  const auto t = static_cast<double>(++state.step_);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);
  for (const auto& [key, g] : grads) {
    const int tid = static_cast<int>(key.table);
    auto& table = params.table(key.table);
    const std::size_t dim = table.dim();
    const std::size_t base = static_cast<std::size_t>(key.row) * dim;
    auto w = table.row(key.row);
    auto& m = state.first_moment_[tid];
    auto& v = state.second_moment_[tid];
    for (std::size_t j = 0; j < dim; ++j) {
      m[base + j] = c.beta1 * m[base + j] + (1.0 - c.beta1) * g[j];
      v[base + j] = c.beta2 * v[base + j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[base + j] / bias1;
      const double v_hat = v[base + j] / bias2;
      w[j] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

void apply_sgd_ct(OptimizerState& state, ModelParams& params,
                  const GradientPacket& grads) {
  if (state.rule_ != OptimizerRule::kSgdDecay) {
    throw InvalidArgument("apply_sgd_ct on a non-SGD optimizer state");
  }
  check_packet(params, grads);
  const double lr = state.sgd_c_ / static_cast<double>(++state.step_);
  for (const auto& [key, g] : grads) {
    auto w = params.table(key.table).row(key.row);
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * g[j];
  }
}

void apply_update(OptimizerState& state, ModelParams& params,
                  const GradientPacket& grads) {
  if (state.rule() == OptimizerRule::kAdam) {
    apply_adam(state, params, grads);
  } else {
    apply_sgd_ct(state, params, grads);
  }
}

bool clip_in_place(GradientPacket& grads, double threshold) {
  if (!(threshold > 0.0)) throw InvalidArgument("clip threshold must be positive");
  const double norm = grads.global_norm();
  // The slack absorbs rounding in a recomputed norm, so clipping twice is the
  // same as clipping once.
  if (!(norm > threshold * (1.0 + 1e-12))) return false;
  grads.scale(threshold / norm);
  return true;
}

}  // namespace xlir
