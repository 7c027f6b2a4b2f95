// dauto/optim.cpp

// Copyright 2026  DAuto Authors

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

#include "dauto/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace dauto {

namespace {

void check_aligned(const std::vector<ParamRef>& params, const std::vector<Matrix>& grads,
                   const char* who) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument(std::string(who) + ": " + std::to_string(params.size()) +
                                " params vs " + std::to_string(grads.size()) + " grads");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].value->same_shape(grads[i])) {
      throw std::invalid_argument(std::string(who) + ": gradient shape " +
                                  grads[i].shape_str() + " does not match parameter '" +
                                  params[i].name + "' " + params[i].value->shape_str());
    }
  }
}

}  // namespace

AdaDeltaState::AdaDeltaState(double rho_, double epsilon_, double lr_,
                             const std::vector<ParamRef>& params)
    : rho(rho_), epsilon(epsilon_), lr(lr_) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw std::invalid_argument("AdaDeltaState: rho must be in (0,1), got " +
                                std::to_string(rho));
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("AdaDeltaState: epsilon must be positive, got " +
                                std::to_string(epsilon));
  }
  grad_sq.reserve(params.size());
  update_sq.reserve(params.size());
  for (const auto& p : params) {
    grad_sq.emplace_back(p.value->rows(), p.value->cols());
    update_sq.emplace_back(p.value->rows(), p.value->cols());
  }
}

void adadelta_step(AdaDeltaState& state, const std::vector<ParamRef>& params,
                   const std::vector<Matrix>& grads) {
  check_aligned(params, grads, "adadelta_step");
  if (state.grad_sq.size() != params.size()) {
    throw std::invalid_argument("adadelta_step: state built for " +
                                std::to_string(state.grad_sq.size()) +
                                " params, given " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!all_finite(grads[i])) {
      throw std::runtime_error("adadelta_step: non-finite gradient for parameter '" +
                               params[i].name + "'");
    }
  }
  const double rho = state.rho, eps = state.epsilon;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i].value;
    const Matrix& g = grads[i];
    Matrix& eg2 = state.grad_sq[i];
    Matrix& edx2 = state.update_sq[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = g.data()[j];
      eg2.data()[j] = rho * eg2.data()[j] + (1.0 - rho) * gj * gj;
      const double dx =
          -std::sqrt((edx2.data()[j] + eps) / (eg2.data()[j] + eps)) * gj;
      edx2.data()[j] = rho * edx2.data()[j] + (1.0 - rho) * dx * dx;
      p.data()[j] += state.lr * dx;
    }
  }
}

void sgd_step(const std::vector<ParamRef>& params, const std::vector<Matrix>& grads,
              double lr) {
  check_aligned(params, grads, "sgd_step");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i].value;
    for (std::size_t j = 0; j < p.size(); ++j) p.data()[j] -= lr * grads[i].data()[j];
  }
}

}  // namespace dauto
