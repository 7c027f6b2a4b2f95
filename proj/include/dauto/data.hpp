// dauto/data.hpp

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

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "dauto/tensor.hpp"

namespace dauto {

/// A feature matrix with integer labels, one label per row.
struct LabeledSet {
  Matrix x;
  std::vector<int> y;
};

/// Everything one adaptation run consumes: labeled source instances, the
/// unlabeled pools used for reconstruction and domain confusion, and the
/// target-side dev/test split (labels there are used for evaluation only,
/// never for training). Immutable once built.
struct DomainPairDataset {
  Matrix source_labeled_x;
  std::vector<int> source_labeled_y;
  Matrix source_unlabeled;
  Matrix target_unlabeled;
  Matrix target_dev_x;
  std::vector<int> target_dev_y;
  Matrix target_test_x;
  std::vector<int> target_test_y;
  std::size_t dims = 0;
  int num_classes = 0;
};

/// Throws unless every block shares `dims` columns and every label lies in
/// [0, num_classes).
void validate_dataset(const DomainPairDataset& ds);

enum class SyntheticGenerator { kTwoMoonsRotation, kGaussianBlobsShift };

/// Recipe for a source/target pair where the target is the source
/// distribution pushed through a known transform (rotation or shift), so
/// the domain gap is controlled exactly.
struct SyntheticSpec {
  SyntheticGenerator generator = SyntheticGenerator::kTwoMoonsRotation;
  double rotation_deg = 0.0;        // two-moons: rotation about the moons' centroid
  std::vector<double> shift;        // blobs: added to every target point (empty = none)
  std::size_t samples_per_domain = 0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

/// Loads an IDX image/label file pair. Pixels are flattened row-major and
/// scaled to [0,1] (divided by 255). `image_rows`/`image_cols` report the
/// source image geometry. Errors (bad magic, truncation, count mismatch)
/// name the file and the byte offset of the offending field.
struct IdxData {
  Matrix x;
  std::vector<int> y;
  std::size_t image_rows = 0;
  std::size_t image_cols = 0;
};
IdxData load_idx(const std::string& images_path, const std::string& labels_path);

/// Writes the IDX pair that load_idx reads back exactly: each entry is
/// round(x*255) clamped to a byte. `x` rows must have image_rows*image_cols
/// columns.
void save_idx(const std::string& images_path, const std::string& labels_path,
              const Matrix& x, const std::vector<int>& y, std::size_t image_rows,
              std::size_t image_cols);

/// Parses lines of the form "label idx:val idx:val ..." into a dense
/// (n x dim) matrix plus labels. Indices must be in [0, dim) and strictly
/// increasing within a line; violations and unparsable tokens are reported
/// with their 1-based line number. With `tf_normalize`, each nonzero row is
/// divided by its value sum.
LabeledSet load_sparse_text(const std::string& path, std::size_t dim,
                            bool tf_normalize = false);

/// Builds a source/target pair from the generator settings. Source points
/// carry labels;
/// target points are the same distribution pushed through the transform,
/// split 50/50 into dev and test by a seeded shuffle, with the full target
/// feature pool exposed unlabeled. Deterministic in the seed.
DomainPairDataset make_synthetic(const SyntheticSpec& spec);

/// Reduces source_labeled by class-stratified sampling without
/// replacement, keeping round(count*fraction) per class. The per-class
/// ordering is fixed by the seed alone, so smaller fractions select nested
/// subsets of larger ones. Unlabeled pools and target splits are untouched.
/// Throws if any class would end up empty.
DomainPairDataset subsample_labels(const DomainPairDataset& ds, double fraction,
                                   std::uint64_t seed);

/// Binary classification slice of a digit dataset: positives are the chosen
/// digit, negatives are drawn from digits outside `excluded_digits`, both
/// sampled without replacement under the seed and then shuffled together.
/// Requesting more positives than exist is an error unless `fill_available`
/// is set, in which case the shortfall is absorbed and the realized counts
/// are reported in the result.
struct BinaryTask {
  Matrix x;
  std::vector<int> y;               // 1 = positive digit, 0 = negative
  std::size_t num_positive = 0;     // realized counts
  std::size_t num_negative = 0;
};
BinaryTask binary_digit_task(const Matrix& x, const std::vector<int>& y,
                             int positive_digit, const std::set<int>& excluded_digits,
                             std::size_t want_positive, std::size_t want_negative,
                             std::uint64_t seed, bool fill_available = false);

}  // namespace dauto
