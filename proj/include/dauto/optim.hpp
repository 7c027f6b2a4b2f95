// dauto/optim.hpp

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

#pragma once

#include <string>
#include <vector>

#include "dauto/tensor.hpp"

namespace dauto {

/// Named handle to a parameter matrix owned elsewhere.
struct ParamRef {
  std::string name;
  Matrix* value;
};

/// AdaDelta accumulators, zero-initialized to the parameter shapes.
///
///   E[g^2]  <- rho E[g^2] + (1-rho) g^2
///   dx       = -sqrt((E[dx^2]+eps) / (E[g^2]+eps)) * g
///   E[dx^2] <- rho E[dx^2] + (1-rho) dx^2
///   param   <- param + lr * dx
class AdaDeltaState {
 public:
  AdaDeltaState(double rho, double epsilon, double lr,
                const std::vector<ParamRef>& params);

  double rho;
  double epsilon;
  double lr;
  std::vector<Matrix> grad_sq;    // E[g^2], aligned with the parameter list
  std::vector<Matrix> update_sq;  // E[dx^2]
};

/// One AdaDelta update over the full parameter set. Gradients must be
/// finite; a non-finite entry rejects the step and names the parameter.
void adadelta_step(AdaDeltaState& state, const std::vector<ParamRef>& params,
                   const std::vector<Matrix>& grads);

/// Plain SGD, param <- param - lr * g. Debugging fallback.
void sgd_step(const std::vector<ParamRef>& params, const std::vector<Matrix>& grads,
              double lr);

}  // namespace dauto
