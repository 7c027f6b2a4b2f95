// dauto/tests/test_nn.cpp

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "dauto/nn.hpp"
#include "dauto/tensor.hpp"
#include "test_support.hpp"

using namespace dauto;
using test::central_diff;
using test::random_matrix;
using test::rel_err;

namespace {

constexpr double kStep = 1e-5;
constexpr double kTol = 1e-7;

// Scalar objective used to exercise backward passes: sum of all outputs
// weighted by a fixed random matrix, so every output entry matters.
double weighted_sum(const Matrix& out, const Matrix& weights) {
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) acc += out.data()[i] * weights.data()[i];
  return acc;
}

}  // namespace

TEST_CASE("affine forward computes x * W^T + b") {
  AffineLayer layer(3, 2);
  layer.weight = Matrix{{1.0, 0.0, -1.0}, {2.0, 0.5, 1.0}};
  layer.bias = Matrix{{10.0, -10.0}};
  const Matrix x{{1.0, 2.0, 3.0}};
  const Matrix y = layer.forward(x);
  REQUIRE(y.rows() == 1);
  REQUIRE(y.cols() == 2);
  CHECK(y(0, 0) == doctest::Approx(1.0 - 3.0 + 10.0));
  CHECK(y(0, 1) == doctest::Approx(2.0 + 1.0 + 3.0 - 10.0));
}

TEST_CASE("affine backward matches central finite differences") {
  Rng rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t in = 2 + rng.uniform_index(4);
    const std::size_t out = 2 + rng.uniform_index(4);
    const std::size_t batch = 1 + rng.uniform_index(5);
    AffineLayer layer(in, out);
    layer.init_gaussian(rng, 0.5);
    Matrix x = random_matrix(rng, batch, in);
    const Matrix probe = random_matrix(rng, batch, out);

    auto eval = [&]() { return weighted_sum(layer.forward(x), probe); };
    eval();  // populate the cache
    const LayerGrads grads = layer.backward(probe);

    REQUIRE(grads.d_weight.same_shape(layer.weight));
    REQUIRE(grads.d_bias.same_shape(layer.bias));
    REQUIRE(grads.d_input.same_shape(x));
    for (std::size_t i = 0; i < layer.weight.size(); ++i) {
      const double fd = central_diff(eval, layer.weight.data()[i], kStep);
      CHECK(rel_err(fd, grads.d_weight.data()[i]) < kTol);
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      const double fd = central_diff(eval, layer.bias.data()[i], kStep);
      CHECK(rel_err(fd, grads.d_bias.data()[i]) < kTol);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double fd = central_diff(eval, x.data()[i], kStep);
      CHECK(rel_err(fd, grads.d_input.data()[i]) < kTol);
    }
  }
}

TEST_CASE("affine backward without a forward pass is an error") {
  AffineLayer layer(2, 2);
  CHECK_THROWS_AS(layer.backward(Matrix(1, 2)), std::logic_error);
}

TEST_CASE("relu zeroes negatives and passes positives") {
  const Matrix x{{-1.0, 0.0, 2.5}};
  const Matrix y = relu_forward(x);
  CHECK(y(0, 0) == 0.0);
  CHECK(y(0, 1) == 0.0);
  CHECK(y(0, 2) == 2.5);
}

TEST_CASE("relu backward matches finite differences away from the kink") {
  Rng rng(2);
  Matrix x = random_matrix(rng, 3, 4);
  // Keep samples away from 0 so the finite difference is well defined.
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x.data()[i]) < 0.1) x.data()[i] = 0.1;
  }
  const Matrix probe = random_matrix(rng, 3, 4);
  auto eval = [&]() { return weighted_sum(relu_forward(x), probe); };
  const Matrix d = relu_backward(x, probe);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double fd = central_diff(eval, x.data()[i], kStep);
    CHECK(rel_err(fd, d.data()[i]) < kTol);
  }
}

TEST_CASE("relu subgradient at zero is zero") {
  const Matrix x{{0.0}};
  const Matrix d = relu_backward(x, Matrix{{5.0}});
  CHECK(d(0, 0) == 0.0);
}

TEST_CASE("softmax rows are positive and sum to one, invariant to shifts") {
  Rng rng(3);
  const Matrix logits = random_matrix(rng, 4, 5, 3.0);
  const Matrix p = softmax_forward(logits);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < p.cols(); ++j) {
      CHECK(p(i, j) > 0.0);
      sum += p(i, j);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  Matrix shifted = logits;
  for (std::size_t i = 0; i < shifted.rows(); ++i) {
    for (std::size_t j = 0; j < shifted.cols(); ++j) shifted(i, j) += 100.0;
  }
  const Matrix p2 = softmax_forward(shifted);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p.data()[i] == doctest::Approx(p2.data()[i]).epsilon(1e-9));
  }
}

TEST_CASE("softmax survives extreme logits without overflow") {
  const Matrix logits{{1000.0, 0.0, -1000.0}};
  const Matrix p = softmax_forward(logits);
  CHECK(all_finite(p));
  CHECK(p(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("cross entropy loss value matches a hand computation") {
  const Matrix probs{{0.7, 0.2, 0.1}, {0.1, 0.8, 0.1}};
  const Matrix labels = one_hot({0, 1}, 3);
  const CrossEntropyResult res = cross_entropy(probs, labels);
  CHECK(res.loss == doctest::Approx(-(std::log(0.7) + std::log(0.8)) / 2.0));
  CHECK(!res.clamped);
}

TEST_CASE("cross entropy gradient wrt logits matches finite differences") {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t batch = 1 + rng.uniform_index(5);
    const std::size_t classes = 2 + rng.uniform_index(4);
    Matrix logits = random_matrix(rng, batch, classes);
    std::vector<int> y(batch);
    for (auto& v : y) v = static_cast<int>(rng.uniform_index(classes));
    const Matrix labels = one_hot(y, static_cast<int>(classes));

    auto eval = [&]() { return cross_entropy(softmax_forward(logits), labels).loss; };
    const CrossEntropyResult res = cross_entropy(softmax_forward(logits), labels);
    for (std::size_t i = 0; i < logits.size(); ++i) {
      const double fd = central_diff(eval, logits.data()[i], kStep);
      CHECK(rel_err(fd, res.d_logits.data()[i]) < kTol);
    }
  }
}

TEST_CASE("cross entropy clamps vanishing true-class probabilities") {
  Matrix probs{{1.0, 0.0}};
  const CrossEntropyResult res = cross_entropy(probs, one_hot({1}, 2));
  CHECK(res.clamped);
  CHECK(std::isfinite(res.loss));
  CHECK(res.loss == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("cross entropy validates shapes") {
  CHECK_THROWS_AS(cross_entropy(Matrix(2, 3), Matrix(2, 2)), std::invalid_argument);
  CHECK_THROWS_AS(cross_entropy(Matrix(), Matrix()), std::invalid_argument);
}

TEST_CASE("squared l2 reconstruction loss and gradient match finite differences") {
  Rng rng(5);
  const Matrix x = random_matrix(rng, 3, 4);
  Matrix xhat = random_matrix(rng, 3, 4);
  auto eval = [&]() { return recon_loss(x, xhat, ReconNorm::squared_l2).loss; };
  const ReconResult res = recon_loss(x, xhat, ReconNorm::squared_l2);

  // Hand value: mean over rows of the squared row distance.
  double want = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double d = x(i, j) - xhat(i, j);
      want += d * d;
    }
  }
  want /= double(x.rows());
  CHECK(res.loss == doctest::Approx(want).epsilon(1e-12));

  for (std::size_t i = 0; i < xhat.size(); ++i) {
    const double fd = central_diff(eval, xhat.data()[i], kStep);
    CHECK(rel_err(fd, res.d_xhat.data()[i]) < kTol);
  }
}

TEST_CASE("l1 reconstruction loss and subgradient match finite differences") {
  Rng rng(6);
  const Matrix x = random_matrix(rng, 3, 4);
  Matrix xhat = random_matrix(rng, 3, 4);
  // Perturb away from exact ties so the subgradient is the gradient.
  for (std::size_t i = 0; i < xhat.size(); ++i) {
    if (std::abs(x.data()[i] - xhat.data()[i]) < 0.05) xhat.data()[i] += 0.1;
  }
  auto eval = [&]() { return recon_loss(x, xhat, ReconNorm::l1).loss; };
  const ReconResult res = recon_loss(x, xhat, ReconNorm::l1);
  for (std::size_t i = 0; i < xhat.size(); ++i) {
    const double fd = central_diff(eval, xhat.data()[i], kStep);
    CHECK(rel_err(fd, res.d_xhat.data()[i]) < kTol);
  }
}

TEST_CASE("l1 reconstruction subgradient is zero at exact ties") {
  const Matrix x{{1.0, 2.0}};
  const ReconResult res = recon_loss(x, x, ReconNorm::l1);
  CHECK(res.loss == 0.0);
  CHECK(res.d_xhat(0, 0) == 0.0);
  CHECK(res.d_xhat(0, 1) == 0.0);
}

TEST_CASE("gradient reversal forwards identically and flips scaled gradients") {
  Rng rng(7);
  const Matrix z = random_matrix(rng, 3, 3);
  const Matrix d = random_matrix(rng, 3, 3);

  const GradReversal g1{1.0};
  CHECK(bit_equal(grl_forward(g1, z), z));
  CHECK(bit_equal(grl_backward(g1, d), scale(d, -1.0)));

  const GradReversal g0{0.0};
  CHECK(bit_equal(grl_forward(g0, z), z));
  const Matrix back0 = grl_backward(g0, d);
  for (std::size_t i = 0; i < back0.size(); ++i) CHECK(back0.data()[i] == -0.0);

  const GradReversal gmu{0.37};
  const Matrix backmu = grl_backward(gmu, d);
  for (std::size_t i = 0; i < backmu.size(); ++i) {
    CHECK(backmu.data()[i] == -0.37 * d.data()[i]);
  }
}

TEST_CASE("dropout mask scales kept units and zeroes dropped ones") {
  Rng rng(8);
  const double rate = 0.3;
  const Matrix mask = dropout_mask(rng, 40, 25, rate);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double v = mask.data()[i];
    const bool is_zero = (v == 0.0);
    const bool is_scaled = std::abs(v - 1.0 / (1.0 - rate)) < 1e-15;
    CHECK((is_zero || is_scaled));
    kept += is_scaled;
  }
  // Inverted dropout keeps about 70%.
  const double frac = double(kept) / double(mask.size());
  CHECK(frac > 0.6);
  CHECK(frac < 0.8);
}

TEST_CASE("dropout with rate zero is all ones and consumes no randomness") {
  Rng rng(9);
  const std::uint64_t before = rng.seed();
  Rng probe(before);
  const std::uint64_t expected_next = probe.next_u64();

  const Matrix mask = dropout_mask(rng, 3, 3, 0.0);
  for (std::size_t i = 0; i < mask.size(); ++i) CHECK(mask.data()[i] == 1.0);
  CHECK(rng.next_u64() == expected_next);
}

TEST_CASE("dropout rejects rates at or above one") {
  Rng rng(10);
  CHECK_THROWS_AS(dropout_mask(rng, 2, 2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(dropout_mask(rng, 2, 2, -0.1), std::invalid_argument);
}

TEST_CASE("one_hot places a single one per row at the label") {
  const Matrix oh = one_hot({2, 0, 1}, 3);
  REQUIRE(oh.rows() == 3);
  REQUIRE(oh.cols() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 3; ++j) sum += oh(i, j);
    CHECK(sum == 1.0);
  }
  CHECK(oh(0, 2) == 1.0);
  CHECK(oh(1, 0) == 1.0);
  CHECK(oh(2, 1) == 1.0);
  CHECK_THROWS_AS(one_hot({3}, 3), std::invalid_argument);
  CHECK_THROWS_AS(one_hot({-1}, 3), std::invalid_argument);
}
