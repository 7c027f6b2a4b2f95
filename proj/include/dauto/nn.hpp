// dauto/nn.hpp

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

#include "dauto/tensor.hpp"

namespace dauto {

struct LayerGrads {
  Matrix d_weight;  // same shape as weight
  Matrix d_bias;    // (1 x out)
  Matrix d_input;   // same shape as the cached input batch
};

/// Affine map y = x W^T + b with the input batch cached for the backward
/// pass. backward() is only valid after a forward() on the same batch.
class AffineLayer {
 public:
  AffineLayer(std::size_t in_dim, std::size_t out_dim)
      : weight(out_dim, in_dim), bias(1, out_dim) {}

  /// Entries ~ Normal(0, std^2); bias stays zero.
  void init_gaussian(Rng& rng, double std_dev);

  Matrix forward(const Matrix& x);
  LayerGrads backward(const Matrix& d_out) const;

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }

  Matrix weight;  // (out x in)
  Matrix bias;    // (1 x out)

 private:
  Matrix input_;
  bool has_input_ = false;
};

Matrix relu_forward(const Matrix& x);
/// Masks d_out where x <= 0.
Matrix relu_backward(const Matrix& x, const Matrix& d_out);

/// Row-wise softmax with max subtraction; rows sum to 1.
Matrix softmax_forward(const Matrix& logits);

struct CrossEntropyResult {
  double loss;      // mean over the batch of -log p(true class)
  Matrix d_logits;  // (probs - labels) / batch, the gradient w.r.t. pre-softmax logits
  bool clamped;     // true if any true-class probability was clamped at 1e-12
};
CrossEntropyResult cross_entropy(const Matrix& probs, const Matrix& labels_onehot);

enum class ReconNorm { squared_l2, l1 };

struct ReconResult {
  double loss;    // mean over the batch of the per-instance distance
  Matrix d_xhat;  // gradient w.r.t. x_hat; l1 subgradient is 0 at ties
};
ReconResult recon_loss(const Matrix& x, const Matrix& x_hat, ReconNorm norm);

/// Identity forward, -mu * d_out backward. Placing this between the shared
/// representation and the domain classifier turns the inner maximization of
/// the adversarial objective into a single descent pass: the domain head
/// keeps its true gradient while the encoder receives the reversed one.
struct GradReversal {
  double mu = 1.0;
};

Matrix grl_forward(const GradReversal& g, const Matrix& z);
Matrix grl_backward(const GradReversal& g, const Matrix& d_out);

/// Inverted-dropout multiplier mask: entries are 0 with probability `rate`
/// and 1/(1-rate) otherwise. Forward and backward are both elementwise
/// products with the mask.
Matrix dropout_mask(Rng& rng, std::size_t rows, std::size_t cols, double rate);

/// One-hot encoding, one row per label.
Matrix one_hot(const std::vector<int>& labels, int num_classes);

}  // namespace dauto
