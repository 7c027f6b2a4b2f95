// dauto/nn.cpp

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

#include "dauto/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace dauto {

void AffineLayer::init_gaussian(Rng& rng, double std_dev) {
  weight = gaussian_init(rng, weight.rows(), weight.cols(), std_dev);
  bias = Matrix(1, bias.cols());
}

Matrix AffineLayer::forward(const Matrix& x) {
  if (x.cols() != in_dim()) {
    throw std::invalid_argument("AffineLayer::forward: input " + x.shape_str() +
                                " does not match weight " + weight.shape_str());
  }
  input_ = x;
  has_input_ = true;
  Matrix y = matmul(x, transpose(weight));
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += bias(0, c);
  return y;
}

LayerGrads AffineLayer::backward(const Matrix& d_out) const {
  if (!has_input_) {
    throw std::logic_error("AffineLayer::backward called before forward");
  }
  if (d_out.rows() != input_.rows() || d_out.cols() != out_dim()) {
    throw std::invalid_argument("AffineLayer::backward: d_out " + d_out.shape_str() +
                                " does not match cached batch " + input_.shape_str());
  }
  LayerGrads g;
  g.d_weight = matmul(transpose(d_out), input_);
  g.d_bias = col_sum(d_out);
  g.d_input = matmul(d_out, weight);
  return g;
}

Matrix relu_forward(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i)
    y.data()[i] = x.data()[i] > 0.0 ? x.data()[i] : 0.0;
  return y;
}

Matrix relu_backward(const Matrix& x, const Matrix& d_out) {
  if (!x.same_shape(d_out)) {
    throw std::invalid_argument("relu_backward: shape mismatch " + x.shape_str() +
                                " vs " + d_out.shape_str());
  }
  Matrix d(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i)
    d.data()[i] = x.data()[i] > 0.0 ? d_out.data()[i] : 0.0;
  return d;
}

Matrix softmax_forward(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    double mx = logits(r, 0);
    for (std::size_t c = 1; c < logits.cols(); ++c) mx = std::max(mx, logits(r, c));
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      p(r, c) = std::exp(logits(r, c) - mx);
      sum += p(r, c);
    }
    for (std::size_t c = 0; c < logits.cols(); ++c) p(r, c) /= sum;
  }
  return p;
}

CrossEntropyResult cross_entropy(const Matrix& probs, const Matrix& labels_onehot) {
  if (!probs.same_shape(labels_onehot)) {
    throw std::invalid_argument("cross_entropy: shape mismatch " + probs.shape_str() +
                                " vs " + labels_onehot.shape_str());
  }
  if (probs.rows() == 0) throw std::invalid_argument("cross_entropy: empty batch");
  const double batch = static_cast<double>(probs.rows());
  CrossEntropyResult res;
  res.clamped = false;
  double loss = 0.0;
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    for (std::size_t c = 0; c < probs.cols(); ++c) {
      if (labels_onehot(r, c) != 0.0) {
        double p = probs(r, c);
        if (p < 1e-12) {
          p = 1e-12;
          res.clamped = true;
        }
        loss -= labels_onehot(r, c) * std::log(p);
      }
    }
  }
  res.loss = loss / batch;
  res.d_logits = scale(sub(probs, labels_onehot), 1.0 / batch);
  return res;
}

ReconResult recon_loss(const Matrix& x, const Matrix& x_hat, ReconNorm norm) {
  if (!x.same_shape(x_hat)) {
    throw std::invalid_argument("recon_loss: shape mismatch " + x.shape_str() + " vs " +
                                x_hat.shape_str());
  }
  if (x.rows() == 0) throw std::invalid_argument("recon_loss: empty batch");
  const double batch = static_cast<double>(x.rows());
  ReconResult res;
  res.d_xhat = Matrix(x.rows(), x.cols());
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x_hat.data()[i] - x.data()[i];
    if (norm == ReconNorm::squared_l2) {
      loss += diff * diff;
      res.d_xhat.data()[i] = 2.0 * diff / batch;
    } else {
      loss += std::abs(diff);
      res.d_xhat.data()[i] = diff > 0.0 ? 1.0 / batch : (diff < 0.0 ? -1.0 / batch : 0.0);
    }
  }
  res.loss = loss / batch;
  return res;
}

Matrix grl_forward(const GradReversal&, const Matrix& z) { return z; }

Matrix grl_backward(const GradReversal& g, const Matrix& d_out) {
  return scale(d_out, -g.mu);
}

Matrix dropout_mask(Rng& rng, std::size_t rows, std::size_t cols, double rate) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("dropout_mask: rate must be in [0, 1), got " +
                                std::to_string(rate));
  }
  Matrix m(rows, cols, 1.0);
  if (rate == 0.0) return m;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = rng.next_double() < rate ? 0.0 : keep_scale;
  return m;
}

Matrix one_hot(const std::vector<int>& labels, int num_classes) {
  Matrix m(labels.size(), static_cast<std::size_t>(num_classes));
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] < 0 || labels[r] >= num_classes) {
      throw std::invalid_argument("one_hot: label " + std::to_string(labels[r]) +
                                  " outside [0, " + std::to_string(num_classes) + ")");
    }
    m(r, static_cast<std::size_t>(labels[r])) = 1.0;
  }
  return m;
}

}  // namespace dauto
