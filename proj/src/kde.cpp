// dauto/kde.cpp

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

#include "dauto/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dauto {

namespace {

// log K((x - ref)/w) for one reference row, without the 1/(nw) factor.
double log_kernel_term(Kernel kernel, const double* x, const double* ref,
                       std::size_t d, double w) {
  if (kernel == Kernel::kGaussian) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double u = (x[k] - ref[k]) / w;
      sq += u * u;
    }
    return -0.5 * sq;
  }
  double l1 = 0.0;
  for (std::size_t k = 0; k < d; ++k) l1 += std::fabs((x[k] - ref[k]) / w);
  return -l1;
}

}  // namespace

TransformedKde::TransformedKde(Kernel kernel, double bandwidth, Matrix references,
                               TransformFn transform)
    : kernel_(kernel), bandwidth_(bandwidth), references_(std::move(references)) {
  if (references_.rows() == 0 || references_.cols() == 0) {
    throw std::invalid_argument("TransformedKde: reference set is empty");
  }
  if (!(bandwidth_ > 0.0)) {
    throw std::invalid_argument("TransformedKde: bandwidth must be positive, got " +
                                std::to_string(bandwidth_));
  }
  if (transform) {
    transformed_ = transform(references_);
    if (!transformed_.same_shape(references_)) {
      throw std::invalid_argument("TransformedKde: transform changed shape from " +
                                  references_.shape_str() + " to " +
                                  transformed_.shape_str());
    }
    if (!all_finite(transformed_)) {
      throw std::invalid_argument("TransformedKde: transform produced non-finite values");
    }
  } else {
    transformed_ = references_;
  }
}

double TransformedKde::log_density(const std::vector<double>& x) const {
  const std::size_t n = transformed_.rows();
  const std::size_t d = transformed_.cols();
  if (x.size() != d) {
    throw std::invalid_argument("log_density: query has dimension " +
                                std::to_string(x.size()) + ", references have " +
                                std::to_string(d));
  }
  // Log-sum-exp over the kernel terms: shift by the max so the largest term
  // contributes exp(0) and nothing underflows to a zero sum.
  std::vector<double> terms(n);
  double max_term = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    terms[i] =
        log_kernel_term(kernel_, x.data(), transformed_.data() + i * d, d, bandwidth_);
    max_term = std::max(max_term, terms[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::exp(terms[i] - max_term);
  return max_term + std::log(sum) -
         std::log(static_cast<double>(n) * bandwidth_);
}

BoundReport TransformedKde::bound_check(std::size_t j) const {
  if (kernel_ != Kernel::kGaussian) {
    throw std::invalid_argument(
        "bound_check: squared-error bound requires the gaussian kernel");
  }
  const std::size_t n = references_.rows();
  const std::size_t d = references_.cols();
  if (j >= n) {
    throw std::out_of_range("bound_check: reference index " + std::to_string(j) +
                            " out of range for " + std::to_string(n) + " rows");
  }
  const double w = bandwidth_;
  BoundReport report;
  report.index = j;
  report.lambda = 1.0 / (2.0 * w * w);
  report.c = std::log(static_cast<double>(n) * w);

  std::vector<double> query(references_.data() + j * d, references_.data() + (j + 1) * d);
  report.nll_unnormalized = -log_density(query);

  double recon_sq = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = references_(j, k) - transformed_(j, k);
    recon_sq += diff * diff;
  }
  report.bound_value = report.lambda * recon_sq + report.c;
  report.gap = report.bound_value - report.nll_unnormalized;
  if (!(report.gap >= -1e-12)) {
    throw std::logic_error("bound_check: inequality violated at reference " +
                           std::to_string(j) + " (gap " + std::to_string(report.gap) +
                           ")");
  }
  return report;
}

BoundReport TransformedKde::bound_check_l1(std::size_t j) const {
  if (kernel_ != Kernel::kLaplacian) {
    throw std::invalid_argument(
        "bound_check_l1: absolute-error bound requires the laplacian kernel");
  }
  const std::size_t n = references_.rows();
  const std::size_t d = references_.cols();
  if (j >= n) {
    throw std::out_of_range("bound_check_l1: reference index " + std::to_string(j) +
                            " out of range for " + std::to_string(n) + " rows");
  }
  const double w = bandwidth_;
  BoundReport report;
  report.index = j;
  report.lambda = 1.0 / w;
  report.c = std::log(static_cast<double>(n) * w);

  std::vector<double> query(references_.data() + j * d, references_.data() + (j + 1) * d);
  report.nll_unnormalized = -log_density(query);

  double recon_l1 = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    recon_l1 += std::fabs(references_(j, k) - transformed_(j, k));
  }
  report.bound_value = report.lambda * recon_l1 + report.c;
  report.gap = report.bound_value - report.nll_unnormalized;
  if (!(report.gap >= -1e-12)) {
    throw std::logic_error("bound_check_l1: inequality violated at reference " +
                           std::to_string(j) + " (gap " + std::to_string(report.gap) +
                           ")");
  }
  return report;
}

}  // namespace dauto
