// dauto/tests/test_eval.cpp

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
#include <string>
#include <vector>

#include "doctest.h"
#include "dauto/eval.hpp"
#include "dauto/tensor.hpp"
#include "test_support.hpp"

using namespace dauto;
using test::random_matrix;
using test::TempDir;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Density of Student's t with nu degrees of freedom.
double t_density(double s, double nu) {
  const double num = std::lgamma((nu + 1.0) / 2.0);
  const double den = 0.5 * std::log(nu * kPi) + std::lgamma(nu / 2.0);
  return std::exp(num - den) * std::pow(1.0 + s * s / nu, -(nu + 1.0) / 2.0);
}

// Two-sided p-value by composite Simpson integration of the density over
// [0, |t|]: p = 1 - 2 * integral. Independent of the incomplete-beta path.
double p_by_quadrature(double t, double nu) {
  const double hi = std::abs(t);
  const int n = 200000;  // even
  const double h = hi / n;
  double acc = t_density(0.0, nu) + t_density(hi, nu);
  for (int i = 1; i < n; ++i) {
    acc += t_density(i * h, nu) * ((i % 2) ? 4.0 : 2.0);
  }
  return 1.0 - 2.0 * (acc * h / 3.0);
}

// Closed-form 2x2 symmetric eigen decomposition, used as the PCA oracle.
void eigen2x2(double c00, double c01, double c11, double& l1, double& l2,
              double& v1x, double& v1y) {
  const double tr = c00 + c11;
  const double det = c00 * c11 - c01 * c01;
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  l1 = tr / 2.0 + disc;
  l2 = tr / 2.0 - disc;
  // Eigenvector for l1.
  if (std::abs(c01) > 1e-300) {
    v1x = l1 - c11;
    v1y = c01;
  } else {
    v1x = (c00 >= c11) ? 1.0 : 0.0;
    v1y = (c00 >= c11) ? 0.0 : 1.0;
  }
  const double norm = std::sqrt(v1x * v1x + v1y * v1y);
  v1x /= norm;
  v1y /= norm;
}

}  // namespace

TEST_CASE("accuracy counts matches over the pair") {
  CHECK(accuracy({1, 0, 1, 1}, {1, 1, 1, 0}) == doctest::Approx(0.5));
  CHECK(accuracy({2, 2}, {2, 2}) == 1.0);
  CHECK_THROWS_AS(accuracy({1}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(accuracy({}, {}), std::invalid_argument);
}

TEST_CASE("proxy a-distance spans 0 to 2 between chance and separation") {
  // Perfect separation: classifier output matches the tags everywhere.
  Matrix perfect(4, 2);
  const std::vector<int> tags = {0, 0, 1, 1};
  for (std::size_t i = 0; i < 4; ++i) {
    perfect(i, tags[i]) = 0.9;
    perfect(i, 1 - tags[i]) = 0.1;
  }
  CHECK(proxy_a_distance(perfect, tags) == doctest::Approx(2.0));

  // Coin-flip behavior: half of each domain wrong -> error 0.5 -> distance 0.
  Matrix coin(4, 2);
  coin(0, 0) = 0.9; coin(0, 1) = 0.1;  // domain 0 right
  coin(1, 1) = 0.9; coin(1, 0) = 0.1;  // domain 0 wrong
  coin(2, 1) = 0.9; coin(2, 0) = 0.1;  // domain 1 right
  coin(3, 0) = 0.9; coin(3, 1) = 0.1;  // domain 1 wrong
  CHECK(proxy_a_distance(coin, tags) == doctest::Approx(0.0));

  // Anti-separation (always wrong) clamps at 0 rather than going negative.
  Matrix wrong(4, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    wrong(i, 1 - tags[i]) = 0.9;
    wrong(i, tags[i]) = 0.1;
  }
  CHECK(proxy_a_distance(wrong, tags) == 0.0);
}

TEST_CASE("proxy a-distance balances unequal domain sizes") {
  // 3 source instances all classified correctly, 1 target instance wrong:
  // per-domain errors are 0 and 1, balanced error 0.5, distance 0.
  Matrix probs(4, 2);
  const std::vector<int> tags = {0, 0, 0, 1};
  for (std::size_t i = 0; i < 3; ++i) {
    probs(i, 0) = 0.8;
    probs(i, 1) = 0.2;
  }
  probs(3, 0) = 0.8;
  probs(3, 1) = 0.2;  // target instance predicted as source
  CHECK(proxy_a_distance(probs, tags) == doctest::Approx(0.0));
}

TEST_CASE("proxy a-distance validates inputs") {
  CHECK_THROWS_AS(proxy_a_distance(Matrix(2, 3), {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(proxy_a_distance(Matrix(2, 2), {0}), std::invalid_argument);
  CHECK_THROWS_AS(proxy_a_distance(Matrix(2, 2), {0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(proxy_a_distance(Matrix(2, 2), {0, 0}), std::invalid_argument);
}

TEST_CASE("pca2 matches the closed-form 2x2 eigen oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    // Anisotropic cloud with a random orientation.
    const double angle = rng.next_double() * kPi;
    const double ca = std::cos(angle), sa = std::sin(angle);
    const std::size_t n = 60;
    Matrix x(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.next_gaussian(3.0);
      const double v = rng.next_gaussian(0.7);
      x(i, 0) = 5.0 + u * ca - v * sa;
      x(i, 1) = -2.0 + u * sa + v * ca;
    }
    const PcaProjection proj = pca2(x);
    REQUIRE(proj.num_components == 2);

    // Sample covariance, computed directly.
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += x(i, 0);
      my += x(i, 1);
    }
    mx /= n;
    my /= n;
    double c00 = 0, c01 = 0, c11 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = x(i, 0) - mx, b = x(i, 1) - my;
      c00 += a * a;
      c01 += a * b;
      c11 += b * b;
    }
    c00 /= (n - 1);
    c01 /= (n - 1);
    c11 /= (n - 1);

    double l1, l2, v1x, v1y;
    eigen2x2(c00, c01, c11, l1, l2, v1x, v1y);

    CHECK(proj.eigenvalues[0] == doctest::Approx(l1).epsilon(1e-8));
    CHECK(proj.eigenvalues[1] == doctest::Approx(l2).epsilon(1e-8));
    // Direction matches up to sign.
    const double dot = proj.directions(0, 0) * v1x + proj.directions(0, 1) * v1y;
    CHECK(std::abs(dot) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(proj.mean[0] == doctest::Approx(mx).epsilon(1e-12));
    CHECK(proj.mean[1] == doctest::Approx(my).epsilon(1e-12));
  }
}

TEST_CASE("pca2 directions are orthonormal and coords are the projections") {
  Rng rng(32);
  const Matrix x = random_matrix(rng, 40, 5, 2.0);
  const PcaProjection proj = pca2(x);
  REQUIRE(proj.num_components == 2);
  double n0 = 0, n1 = 0, dot = 0;
  for (std::size_t k = 0; k < 5; ++k) {
    n0 += proj.directions(0, k) * proj.directions(0, k);
    n1 += proj.directions(1, k) * proj.directions(1, k);
    dot += proj.directions(0, k) * proj.directions(1, k);
  }
  CHECK(n0 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(n1 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(dot) < 1e-8);
  CHECK(proj.eigenvalues[0] >= proj.eigenvalues[1]);

  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (int comp = 0; comp < 2; ++comp) {
      double want = 0.0;
      for (std::size_t k = 0; k < 5; ++k) {
        want += (x(i, k) - proj.mean[k]) * proj.directions(comp, k);
      }
      CHECK(proj.coords(i, comp) == doctest::Approx(want).epsilon(1e-10));
    }
  }

  // Variance along the top direction equals the top eigenvalue.
  double var0 = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) var0 += proj.coords(i, 0) * proj.coords(i, 0);
  var0 /= (x.rows() - 1);
  CHECK(var0 == doctest::Approx(proj.eigenvalues[0]).epsilon(1e-8));
}

TEST_CASE("pca2 detects effectively one-dimensional data") {
  // Points on a line in 3-space.
  Matrix x(10, 3);
  for (std::size_t i = 0; i < 10; ++i) {
    const double t = double(i);
    x(i, 0) = 1.0 + 2.0 * t;
    x(i, 1) = -1.0 * t;
    x(i, 2) = 0.5 * t;
  }
  const PcaProjection proj = pca2(x);
  CHECK(proj.num_components == 1);
  CHECK(proj.eigenvalues[1] == 0.0);
  // The direction is parallel to (2, -1, 0.5).
  const double norm = std::sqrt(4.0 + 1.0 + 0.25);
  const double dot = (proj.directions(0, 0) * 2.0 + proj.directions(0, 1) * -1.0 +
                      proj.directions(0, 2) * 0.5) /
                     norm;
  CHECK(std::abs(dot) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pca2 is deterministic and validates shapes") {
  Rng rng(33);
  const Matrix x = random_matrix(rng, 12, 4);
  const PcaProjection a = pca2(x);
  const PcaProjection b = pca2(x);
  CHECK(bit_equal(a.directions, b.directions));
  CHECK(bit_equal(a.coords, b.coords));
  CHECK_THROWS_AS(pca2(Matrix(2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(pca2(Matrix(5, 1)), std::invalid_argument);
}

TEST_CASE("paired t-test matches quadrature and closed forms") {
  // Five paired scores; differences have mean 0.032 and se 0.008 -> t = 4.
  const std::vector<double> a = {0.85, 0.78, 0.91, 0.80, 0.87};
  const std::vector<double> b = {0.80, 0.76, 0.86, 0.79, 0.84};
  const TTestResult res = paired_t_test(a, b);
  CHECK(res.dof == 4);
  CHECK(!res.degenerate);
  CHECK(res.t == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(std::abs(res.p - p_by_quadrature(res.t, 4.0)) < 1e-8);

  // dof=1 is a Cauchy tail: p = 1 - 2*atan(|t|)/pi.
  const TTestResult cauchy = paired_t_test({1.0, 3.0}, {0.0, 0.0});
  CHECK(cauchy.dof == 1);
  CHECK(cauchy.t == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(cauchy.p == doctest::Approx(1.0 - 2.0 * std::atan(2.0) / kPi).epsilon(1e-10));

  // dof=2 has the closed form p = 1 - |t|/sqrt(2 + t^2).
  const TTestResult two = paired_t_test({1.0, 2.0, 3.0}, {0.0, 0.0, 0.0});
  CHECK(two.dof == 2);
  CHECK(two.t == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));
  CHECK(two.p ==
        doctest::Approx(1.0 - two.t / std::sqrt(2.0 + two.t * two.t)).epsilon(1e-10));
}

TEST_CASE("paired t-test on identical vectors is exactly one") {
  const std::vector<double> a = {0.6, 0.7, 0.8};
  const TTestResult res = paired_t_test(a, a);
  CHECK(res.p == 1.0);
  CHECK(res.t == 0.0);
  CHECK(res.degenerate);
}

TEST_CASE("paired t-test handles constant nonzero differences") {
  // Zero variance with nonzero mean: the test statistic degenerates to
  // certainty.
  const TTestResult res = paired_t_test({1.0, 1.0, 1.0}, {0.5, 0.5, 0.5});
  CHECK(res.degenerate);
  CHECK(res.p == 0.0);
}

TEST_CASE("paired t-test is symmetric under swapping and shift invariant") {
  Rng rng(34);
  std::vector<double> a(8), b(8);
  for (std::size_t i = 0; i < 8; ++i) {
    a[i] = rng.next_double();
    b[i] = rng.next_double();
  }
  const TTestResult ab = paired_t_test(a, b);
  const TTestResult ba = paired_t_test(b, a);
  CHECK(ab.p == doctest::Approx(ba.p).epsilon(1e-14));
  CHECK(ab.t == doctest::Approx(-ba.t).epsilon(1e-14));

  std::vector<double> a_shift = a, b_shift = b;
  for (std::size_t i = 0; i < 8; ++i) {
    a_shift[i] += 0.125;  // exact in binary
    b_shift[i] += 0.125;
  }
  const TTestResult shifted = paired_t_test(a_shift, b_shift);
  CHECK(shifted.p == doctest::Approx(ab.p).epsilon(1e-12));
}

TEST_CASE("paired t-test validates lengths") {
  CHECK_THROWS_AS(paired_t_test({1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(paired_t_test({1.0, 2.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("regularized incomplete beta spot values") {
  CHECK(regularized_incomplete_beta(1.0, 1.0, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(regularized_incomplete_beta(1.0, 1.0, 0.25) ==
        doctest::Approx(0.25).epsilon(1e-14));
  // I_x(2,1) = x^2.
  CHECK(regularized_incomplete_beta(2.0, 1.0, 0.25) ==
        doctest::Approx(0.0625).epsilon(1e-13));
  // I_x(1,2) = 1-(1-x)^2.
  CHECK(regularized_incomplete_beta(1.0, 2.0, 0.25) ==
        doctest::Approx(1.0 - 0.5625).epsilon(1e-13));
  // Symmetry I_x(a,b) = 1 - I_{1-x}(b,a).
  const double lhs = regularized_incomplete_beta(2.5, 1.5, 0.3);
  const double rhs = 1.0 - regularized_incomplete_beta(1.5, 2.5, 0.7);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
  // Edges.
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // Out-of-range x saturates rather than throwing.
  CHECK(regularized_incomplete_beta(1.0, 1.0, -0.1) == 0.0);
  CHECK(regularized_incomplete_beta(1.0, 1.0, 1.1) == 1.0);
  CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.0, -2.0, 0.5), std::invalid_argument);
}

TEST_CASE("format_sig renders six significant digits") {
  CHECK(format_sig(0.8325) == "0.8325");
  CHECK(format_sig(1.0 / 3.0) == "0.333333");
  CHECK(format_sig(1234567.0) == "1.23457e+06");
  CHECK(format_sig(0.0) == "0");
  CHECK(format_sig(-2.5) == "-2.5");
}

TEST_CASE("embedding tsv has the documented layout") {
  Matrix x(4, 3);
  x(0, 0) = 1.0;
  x(1, 1) = 2.0;
  x(2, 2) = 3.0;
  x(3, 0) = -1.0;
  const PcaProjection proj = pca2(x);
  TempDir dir("tsv");
  write_embedding_tsv(proj, {0, 0, 1, 1}, dir.file("embed.tsv"));
  const std::string text = test::read_file(dir.file("embed.tsv"));
  CHECK(text.rfind("x\ty\tdomain\n", 0) == 0);
  // Four data lines after the header, LF endings only.
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  CHECK(text.find('\r') == std::string::npos);
  const std::string last = text.substr(text.rfind('\t') + 1);
  CHECK(last == "1\n");
  CHECK_THROWS_AS(write_embedding_tsv(proj, {0, 0, 1}, dir.file("bad.tsv")),
                  std::invalid_argument);
}

TEST_CASE("p-value matrix csv round trips its values") {
  Matrix p(2, 2, 1.0);
  p(0, 1) = 0.034517;
  p(1, 0) = 0.034517;
  TempDir dir("pcsv");
  write_pvalue_matrix_csv({"dauto", "dann"}, p, dir.file("p.csv"));
  const std::string text = test::read_file(dir.file("p.csv"));
  CHECK(text ==
        "method,dauto,dann\n"
        "dauto,1,0.034517\n"
        "dann,0.034517,1\n");
  CHECK_THROWS_AS(write_pvalue_matrix_csv({"x"}, p, dir.file("q.csv")),
                  std::invalid_argument);
}
