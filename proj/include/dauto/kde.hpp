// dauto/kde.hpp

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

#include <cstddef>
#include <functional>
#include <vector>

#include "dauto/tensor.hpp"

namespace dauto {

enum class Kernel { kGaussian, kLaplacian };

/// Maps a batch of points (n x d) to their reconstructions (n x d).
/// An empty function is treated as the identity map.
using TransformFn = std::function<Matrix(const Matrix&)>;

/// One-sided comparison between the estimator's negative log density at a
/// reference point and its reconstruction-error bound. All quantities use
/// the unnormalized density convention (no kernel normalizer), so
/// `nll_unnormalized` is not a calibrated negative log-probability.
struct BoundReport {
  std::size_t index = 0;       // which reference point was queried
  double nll_unnormalized = 0.0;
  double bound_value = 0.0;    // lambda * recon_error + c
  double gap = 0.0;            // bound_value - nll_unnormalized, >= -1e-12
  double lambda = 0.0;         // 1/(2w^2) for gaussian, 1/w for laplacian
  double c = 0.0;              // log(n * w)
};

/// Kernel density estimator whose reference points are passed through a
/// reconstruction map before kernel placement: density at x sums
/// K((x - recon(x_i)) / w) over the reference set. Queries stay raw; only
/// the references are transformed (once, at construction). Immutable after
/// construction, so density queries are safe to issue concurrently.
class TransformedKde {
 public:
  /// `references` is the (n x d) reference set; `transform` reconstructs a
  /// batch of rows (empty function = identity). Throws on an empty
  /// reference set, a non-positive bandwidth, or a transform that changes
  /// the matrix shape.
  TransformedKde(Kernel kernel, double bandwidth, Matrix references,
                 TransformFn transform = nullptr);

  /// Unnormalized log density log[(1/(n w)) * sum_i K((x - recon(x_i))/w)]
  /// with K(u) = exp(-|u|^2/2) (gaussian) or exp(-|u|_1) (laplacian),
  /// evaluated in log-sum-exp form so small bandwidths do not underflow.
  double log_density(const std::vector<double>& x) const;

  /// For reference j under the gaussian kernel: checks
  ///   -log p(x_j) <= |x_j - recon(x_j)|^2 / (2w^2) + log(n w),
  /// which holds because the sum over kernels dominates its j-th term.
  /// Throws if the kernel is not gaussian or the inequality fails beyond
  /// 1e-12 (which would indicate an evaluation bug).
  BoundReport bound_check(std::size_t j) const;

  /// The laplacian-kernel analogue: bound is |x_j - recon(x_j)|_1 / w +
  /// log(n w). Throws if the kernel is not laplacian.
  BoundReport bound_check_l1(std::size_t j) const;

  Kernel kernel() const { return kernel_; }
  double bandwidth() const { return bandwidth_; }
  const Matrix& references() const { return references_; }
  const Matrix& transformed_references() const { return transformed_; }

 private:
  Kernel kernel_;
  double bandwidth_;
  Matrix references_;
  Matrix transformed_;  // recon(x_i) rows, cached at construction
};

}  // namespace dauto
