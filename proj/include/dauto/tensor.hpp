// dauto/tensor.hpp

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
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace dauto {

/// Dense row-major matrix of doubles. Rows are instances, columns are
/// features; weights use (out x in). All arithmetic is 64-bit.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  std::string shape_str() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix mul(const Matrix& a, const Matrix& b);  // elementwise (Hadamard)
Matrix scale(const Matrix& a, double c);
Matrix transpose(const Matrix& a);
Matrix row_sum(const Matrix& a);  // (rows x 1)
Matrix col_sum(const Matrix& a);  // (1 x cols)
double frobenius_sq(const Matrix& a);

/// Rows of `a` selected by `indices`, in order.
Matrix take_rows(const Matrix& a, const std::vector<std::size_t>& indices);
/// Rows of `a` followed by rows of `b`; column counts must match.
Matrix vstack(const Matrix& a, const Matrix& b);
/// Index of the largest entry per row (ties -> lowest index).
std::vector<int> row_argmax(const Matrix& a);

bool all_finite(const Matrix& a);
/// Exact elementwise equality, including shape.
bool bit_equal(const Matrix& a, const Matrix& b);

/// Counter-based pseudo-random generator (splitmix64 over a strided
/// counter). The integer stream is identical for a given seed on every
/// platform, which keeps experiments replayable. Single consumer at a time.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1), 53-bit resolution.
  double next_double();
  /// Normal(0, std^2) via Box-Muller; spare value is cached.
  double next_gaussian(double std_dev);
  /// Uniform on {0, ..., n-1}, unbiased by rejection. n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Child generator with a seed drawn from this stream.
  Rng split();
  /// Fisher-Yates shuffle.
  void shuffle(std::vector<std::size_t>& v);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Matrix with i.i.d. Normal(0, std^2) entries drawn from `rng`.
Matrix gaussian_init(Rng& rng, std::size_t rows, std::size_t cols, double std_dev);

}  // namespace dauto
