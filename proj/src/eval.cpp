// dauto/eval.cpp

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

#include "dauto/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace dauto {

double accuracy(const std::vector<int>& preds, const std::vector<int>& truth) {
  if (preds.size() != truth.size()) {
    throw std::invalid_argument("accuracy: " + std::to_string(preds.size()) +
                                " predictions vs " + std::to_string(truth.size()) +
                                " labels");
  }
  if (preds.empty()) throw std::invalid_argument("accuracy: empty inputs");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += (preds[i] == truth[i]);
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double proxy_a_distance(const Matrix& domain_probs, const std::vector<int>& domain_tags) {
  if (domain_probs.rows() != domain_tags.size()) {
    throw std::invalid_argument("proxy_a_distance: " + std::to_string(domain_probs.rows()) +
                                " probability rows vs " +
                                std::to_string(domain_tags.size()) + " tags");
  }
  if (domain_probs.cols() != 2) {
    throw std::invalid_argument("proxy_a_distance: expected 2 probability columns, got " +
                                std::to_string(domain_probs.cols()));
  }
  const std::vector<int> preds = row_argmax(domain_probs);
  std::size_t count[2] = {0, 0};
  std::size_t wrong[2] = {0, 0};
  for (std::size_t i = 0; i < domain_tags.size(); ++i) {
    const int tag = domain_tags[i];
    if (tag != 0 && tag != 1) {
      throw std::invalid_argument("proxy_a_distance: tag " + std::to_string(tag) +
                                  " at row " + std::to_string(i) + " is not 0/1");
    }
    ++count[tag];
    wrong[tag] += (preds[i] != tag);
  }
  if (count[0] == 0 || count[1] == 0) {
    throw std::invalid_argument("proxy_a_distance: both domains must be present");
  }
  const double err0 = static_cast<double>(wrong[0]) / static_cast<double>(count[0]);
  const double err1 = static_cast<double>(wrong[1]) / static_cast<double>(count[1]);
  const double balanced_error = 0.5 * (err0 + err1);
  return std::clamp(2.0 * (1.0 - 2.0 * balanced_error), 0.0, 2.0);
}

namespace {

// y = centered_x^T (centered_x v) / (n-1): one covariance-vector product
// without forming the d x d covariance.
std::vector<double> cov_times(const Matrix& centered, const std::vector<double>& v) {
  const std::size_t n = centered.rows(), d = centered.cols();
  std::vector<double> u(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = centered.data() + i * d;
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += row[k] * v[k];
    u[i] = s;
  }
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = centered.data() + i * d;
    for (std::size_t k = 0; k < d; ++k) out[k] += row[k] * u[i];
  }
  const double denom = static_cast<double>(n - 1);
  for (double& o : out) o /= denom;
  return out;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Dominant eigenpair of the (deflated) covariance. `previous` holds already
// extracted unit directions to project out each iteration. Returns the
// eigenvalue; 0 means no further direction with nonzero variance exists.
double power_iteration(const Matrix& centered,
                       const std::vector<std::vector<double>>& previous,
                       std::vector<double>& v, double variance_scale) {
  const std::size_t d = centered.cols();
  Rng rng(0x70636132u + previous.size());  // fixed seed: deterministic directions
  v.resize(d);
  for (double& x : v) x = rng.next_gaussian(1.0);
  for (const auto& p : previous) {
    const double proj = dot(v, p);
    for (std::size_t k = 0; k < d; ++k) v[k] -= proj * p[k];
  }
  double nv = norm2(v);
  if (nv == 0.0) return 0.0;
  for (double& x : v) x /= nv;

  const double tiny = 1e-12 * std::max(1.0, variance_scale);
  double eigenvalue = 0.0;
  for (int iter = 0; iter < 10000; ++iter) {
    std::vector<double> w = cov_times(centered, v);
    for (const auto& p : previous) {
      const double proj = dot(w, p);
      for (std::size_t k = 0; k < d; ++k) w[k] -= proj * p[k];
    }
    const double nw = norm2(w);
    if (nw < tiny) return 0.0;  // no variance left in this subspace
    double diff_minus = 0.0, diff_plus = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double wk = w[k] / nw;
      diff_minus += (wk - v[k]) * (wk - v[k]);
      diff_plus += (wk + v[k]) * (wk + v[k]);
      v[k] = wk;
    }
    eigenvalue = nw;
    if (std::min(std::sqrt(diff_minus), std::sqrt(diff_plus)) < 1e-10) break;
  }
  return eigenvalue;
}

}  // namespace

PcaProjection pca2(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n < 3) {
    throw std::invalid_argument("pca2: need at least 3 instances, got " +
                                std::to_string(n));
  }
  if (d < 2) {
    throw std::invalid_argument("pca2: need at least 2 feature dimensions, got " +
                                std::to_string(d));
  }

  PcaProjection proj;
  proj.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) proj.mean[k] += x(i, k);
  }
  for (double& m : proj.mean) m /= static_cast<double>(n);

  Matrix centered(n, d);
  double total_variance = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const double c = x(i, k) - proj.mean[k];
      centered(i, k) = c;
      total_variance += c * c;
    }
  }
  total_variance /= static_cast<double>(n - 1);

  proj.directions = Matrix(2, d);
  proj.eigenvalues.assign(2, 0.0);
  std::vector<std::vector<double>> found;
  for (int comp = 0; comp < 2; ++comp) {
    std::vector<double> v;
    const double ev = power_iteration(centered, found, v, total_variance);
    if (ev <= 1e-12 * std::max(1.0, total_variance)) break;
    proj.eigenvalues[comp] = ev;
    for (std::size_t k = 0; k < d; ++k) proj.directions(comp, k) = v[k];
    found.push_back(std::move(v));
    proj.num_components = comp + 1;
  }

  proj.coords = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (int comp = 0; comp < proj.num_components; ++comp) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += centered(i, k) * proj.directions(comp, k);
      proj.coords(i, comp) = s;
    }
  }
  return proj;
}

namespace {

// Continued-fraction core of the incomplete beta (modified Lentz scheme).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("regularized_incomplete_beta: continued fraction failed for a=" +
                           std::to_string(a) + " b=" + std::to_string(b) + " x=" +
                           std::to_string(x));
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("regularized_incomplete_beta: a and b must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The continued fraction converges fast only on one side of the mean;
  // use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) for the other side.
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("paired_t_test: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + " scores");
  }
  const std::size_t n = a.size();
  if (n < 2) {
    throw std::invalid_argument("paired_t_test: need at least 2 pairs, got " +
                                std::to_string(n));
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (a[i] - b[i]) - mean;
    var += d * d;
  }
  var /= static_cast<double>(n - 1);

  TTestResult result;
  result.dof = n - 1;
  if (var == 0.0) {
    result.degenerate = true;
    if (mean == 0.0) {
      result.t = 0.0;
      result.p = 1.0;
    } else {
      result.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
      result.p = 0.0;
    }
    return result;
  }
  const double std_err = std::sqrt(var / static_cast<double>(n));
  result.t = mean / std_err;
  const double nu = static_cast<double>(result.dof);
  result.p = regularized_incomplete_beta(nu / 2.0, 0.5, nu / (nu + result.t * result.t));
  return result;
}

std::string format_sig(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_embedding_tsv(const PcaProjection& proj, const std::vector<int>& tags,
                         const std::string& path) {
  if (tags.size() != proj.coords.rows()) {
    throw std::invalid_argument("write_embedding_tsv: " + std::to_string(tags.size()) +
                                " tags vs " + std::to_string(proj.coords.rows()) +
                                " coordinate rows");
  }
  std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "x\ty\tdomain\n";
  for (std::size_t i = 0; i < proj.coords.rows(); ++i) {
    out << format_sig(proj.coords(i, 0)) << '\t' << format_sig(proj.coords(i, 1)) << '\t'
        << tags[i] << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_pvalue_matrix_csv(const std::vector<std::string>& methods, const Matrix& p,
                             const std::string& path) {
  if (p.rows() != methods.size() || p.cols() != methods.size()) {
    throw std::invalid_argument("write_pvalue_matrix_csv: matrix " + p.shape_str() +
                                " does not match " + std::to_string(methods.size()) +
                                " methods");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "method";
  for (const auto& m : methods) out << ',' << m;
  out << '\n';
  for (std::size_t i = 0; i < methods.size(); ++i) {
    out << methods[i];
    for (std::size_t j = 0; j < methods.size(); ++j) out << ',' << format_sig(p(i, j));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace dauto
