// dauto/eval.hpp

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
#include <string>
#include <vector>

#include "dauto/tensor.hpp"

namespace dauto {

/// Fraction of positions where the two label sequences agree.
double accuracy(const std::vector<int>& preds, const std::vector<int>& truth);

/// Distribution-distance proxy 2(1 - 2e) where e is the domain
/// classifier's balanced error rate (mean of the two per-domain error
/// rates), clipped to [0,2]. `domain_probs` is (n x 2) classifier output,
/// `domain_tags` holds 0/1 domain membership; both domains must appear.
/// Balanced error keeps a constant classifier at proxy 0 even when the
/// pools are unbalanced.
double proxy_a_distance(const Matrix& domain_probs, const std::vector<int>& domain_tags);

/// Mean vector, top-2 principal directions, and 2-D coordinates of each
/// instance. When the data has fewer than two directions of nonzero
/// variance, the missing direction and coordinate column are zero and
/// num_components records how many are real.
struct PcaProjection {
  std::vector<double> mean;
  Matrix directions;   // (2 x d); real rows are unit-norm and mutually orthogonal
  Matrix coords;       // (n x 2) = centered data projected on the directions
  std::vector<double> eigenvalues;  // variance captured per direction
  int num_components = 0;
};

/// Top-2 PCA via power iteration with deflation on the centered data
/// (tolerance 1e-10, at most 10^4 iterations per direction); the
/// covariance matrix is never formed. Needs at least 3 instances and 2
/// feature dimensions.
PcaProjection pca2(const Matrix& x);

struct TTestResult {
  double t = 0.0;
  std::size_t dof = 0;
  double p = 1.0;            // two-sided
  bool degenerate = false;   // all differences equal: p is 1.0 or 0.0 by the mean
};

/// Two-sided paired t-test on score vectors of equal length n >= 2:
/// t = mean(d) / (std(d)/sqrt(n)) with the (n-1)-denominator sample std,
/// p from the Student-t tail via the regularized incomplete beta function.
/// Zero-variance differences set the degenerate flag and report p = 1.0
/// (zero mean) or 0.0.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

/// Regularized incomplete beta function I_x(a,b), continued-fraction
/// evaluation, accurate to ~1e-10 for the parameter ranges the t-test
/// uses (a,b up to ~10^4).
double regularized_incomplete_beta(double a, double b, double x);

/// Number rendered with 6 significant digits ("%.6g"), the format every
/// emitted CSV/TSV uses.
std::string format_sig(double v);

/// Writes "x\ty\tdomain" then one LF-terminated row per instance. `tags`
/// must align with the projection's coordinate rows.
void write_embedding_tsv(const PcaProjection& proj, const std::vector<int>& tags,
                         const std::string& path);

/// Writes a square p-value matrix as CSV with the method names as both the
/// header row and the first column.
void write_pvalue_matrix_csv(const std::vector<std::string>& methods, const Matrix& p,
                             const std::string& path);

}  // namespace dauto
