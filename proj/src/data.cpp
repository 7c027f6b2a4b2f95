// dauto/data.cpp

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

#include "dauto/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dauto {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_labels(const std::vector<int>& y, int num_classes, const char* block) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] >= num_classes) {
      throw std::invalid_argument(std::string("dataset: label ") + std::to_string(y[i]) +
                                  " at row " + std::to_string(i) + " of " + block +
                                  " outside [0," + std::to_string(num_classes) + ")");
    }
  }
}

void check_block(const Matrix& x, std::size_t dims, const char* block) {
  if (x.rows() > 0 && x.cols() != dims) {
    throw std::invalid_argument(std::string("dataset: ") + block + " has " +
                                std::to_string(x.cols()) + " columns, expected " +
                                std::to_string(dims));
  }
}

std::vector<unsigned char> read_all_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                        const std::string& path, const char* what) {
  if (offset + 4 > bytes.size()) {
    throw std::runtime_error("'" + path + "': truncated reading " + what +
                             " at byte offset " + std::to_string(offset) + " (file has " +
                             std::to_string(bytes.size()) + " bytes)");
  }
  return (std::uint32_t(bytes[offset]) << 24) | (std::uint32_t(bytes[offset + 1]) << 16) |
         (std::uint32_t(bytes[offset + 2]) << 8) | std::uint32_t(bytes[offset + 3]);
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {
      static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
      static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08x", v);
  return buf;
}

}  // namespace

void validate_dataset(const DomainPairDataset& ds) {
  if (ds.dims == 0) throw std::invalid_argument("dataset: dims is zero");
  if (ds.num_classes < 2) {
    throw std::invalid_argument("dataset: need at least 2 classes, got " +
                                std::to_string(ds.num_classes));
  }
  check_block(ds.source_labeled_x, ds.dims, "source_labeled");
  check_block(ds.source_unlabeled, ds.dims, "source_unlabeled");
  check_block(ds.target_unlabeled, ds.dims, "target_unlabeled");
  check_block(ds.target_dev_x, ds.dims, "target_dev");
  check_block(ds.target_test_x, ds.dims, "target_test");
  if (ds.source_labeled_x.rows() != ds.source_labeled_y.size()) {
    throw std::invalid_argument("dataset: source_labeled has " +
                                std::to_string(ds.source_labeled_x.rows()) + " rows and " +
                                std::to_string(ds.source_labeled_y.size()) + " labels");
  }
  if (ds.target_dev_x.rows() != ds.target_dev_y.size() ||
      ds.target_test_x.rows() != ds.target_test_y.size()) {
    throw std::invalid_argument("dataset: target dev/test rows and labels disagree");
  }
  check_labels(ds.source_labeled_y, ds.num_classes, "source_labeled");
  check_labels(ds.target_dev_y, ds.num_classes, "target_dev");
  check_labels(ds.target_test_y, ds.num_classes, "target_test");
}

IdxData load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto img = read_all_bytes(images_path);
  const auto lab = read_all_bytes(labels_path);

  const std::uint32_t img_magic = read_be32(img, 0, images_path, "magic");
  if (img_magic != 0x00000803u) {
    throw std::runtime_error("'" + images_path + "': bad magic " + hex32(img_magic) +
                             " at byte offset 0 (expected 0x00000803)");
  }
  const std::uint32_t lab_magic = read_be32(lab, 0, labels_path, "magic");
  if (lab_magic != 0x00000801u) {
    throw std::runtime_error("'" + labels_path + "': bad magic " + hex32(lab_magic) +
                             " at byte offset 0 (expected 0x00000801)");
  }

  const std::uint32_t img_count = read_be32(img, 4, images_path, "image count");
  const std::uint32_t rows = read_be32(img, 8, images_path, "row count");
  const std::uint32_t cols = read_be32(img, 12, images_path, "column count");
  const std::uint32_t lab_count = read_be32(lab, 4, labels_path, "label count");

  if (img_count != lab_count) {
    throw std::runtime_error("label count " + std::to_string(lab_count) +
                             " at byte offset 4 of '" + labels_path +
                             "' does not match image count " + std::to_string(img_count) +
                             " of '" + images_path + "'");
  }

  const std::size_t pixels = std::size_t(img_count) * rows * cols;
  if (16 + pixels > img.size()) {
    throw std::runtime_error("'" + images_path + "': truncated pixel data at byte offset " +
                             std::to_string(img.size()) + " (needed " +
                             std::to_string(16 + pixels) + " bytes)");
  }
  if (8 + std::size_t(lab_count) > lab.size()) {
    throw std::runtime_error("'" + labels_path + "': truncated label data at byte offset " +
                             std::to_string(lab.size()) + " (needed " +
                             std::to_string(8 + std::size_t(lab_count)) + " bytes)");
  }

  IdxData out;
  out.image_rows = rows;
  out.image_cols = cols;
  out.x = Matrix(img_count, std::size_t(rows) * cols);
  for (std::size_t i = 0; i < pixels; ++i) out.x.data()[i] = img[16 + i] / 255.0;
  out.y.resize(lab_count);
  for (std::size_t i = 0; i < lab_count; ++i) out.y[i] = lab[8 + i];
  return out;
}

void save_idx(const std::string& images_path, const std::string& labels_path,
              const Matrix& x, const std::vector<int>& y, std::size_t image_rows,
              std::size_t image_cols) {
  if (x.cols() != image_rows * image_cols) {
    throw std::invalid_argument("save_idx: matrix has " + std::to_string(x.cols()) +
                                " columns, image geometry wants " +
                                std::to_string(image_rows * image_cols));
  }
  if (x.rows() != y.size()) {
    throw std::invalid_argument("save_idx: " + std::to_string(x.rows()) + " rows vs " +
                                std::to_string(y.size()) + " labels");
  }
  std::ofstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("cannot open '" + images_path + "' for writing");
  write_be32(img, 0x00000803u);
  write_be32(img, static_cast<std::uint32_t>(x.rows()));
  write_be32(img, static_cast<std::uint32_t>(image_rows));
  write_be32(img, static_cast<std::uint32_t>(image_cols));
  std::vector<unsigned char> pixels(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    long v = std::lround(x.data()[i] * 255.0);
    v = std::clamp(v, 0L, 255L);
    pixels[i] = static_cast<unsigned char>(v);
  }
  img.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!img) throw std::runtime_error("write failed for '" + images_path + "'");

  std::ofstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("cannot open '" + labels_path + "' for writing");
  write_be32(lab, 0x00000801u);
  write_be32(lab, static_cast<std::uint32_t>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] > 255) {
      throw std::invalid_argument("save_idx: label " + std::to_string(y[i]) + " at row " +
                                  std::to_string(i) + " does not fit a byte");
    }
    const unsigned char b = static_cast<unsigned char>(y[i]);
    lab.write(reinterpret_cast<const char*>(&b), 1);
  }
  if (!lab) throw std::runtime_error("write failed for '" + labels_path + "'");
}

LabeledSet load_sparse_text(const std::string& path, std::size_t dim, bool tf_normalize) {
  if (dim == 0) throw std::invalid_argument("load_sparse_text: dim must be positive");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;  // blank line

    std::size_t pos = 0;
    int label = 0;
    try {
      label = std::stoi(token, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != token.size()) {
      throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) +
                               ": unparsable label '" + token + "'");
    }

    std::vector<double> row(dim, 0.0);
    long long prev_index = -1;
    double value_sum = 0.0;
    while (ls >> token) {
      const std::size_t colon = token.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == token.size()) {
        throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) +
                                 ": unparsable token '" + token + "'");
      }
      unsigned long index = 0;
      double value = 0.0;
      try {
        index = std::stoul(token.substr(0, colon), &pos);
        if (pos != colon) throw std::invalid_argument("trailing");
        value = std::stod(token.substr(colon + 1), &pos);
        if (pos != token.size() - colon - 1) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) +
                                 ": unparsable token '" + token + "'");
      }
      if (index >= dim) {
        throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) +
                                 ": index " + std::to_string(index) + " out of range [0," +
                                 std::to_string(dim) + ")");
      }
      if (static_cast<long long>(index) <= prev_index) {
        throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) +
                                 ": index " + std::to_string(index) +
                                 " not strictly increasing (previous " +
                                 std::to_string(prev_index) + ")");
      }
      prev_index = static_cast<long long>(index);
      row[index] = value;
      value_sum += value;
    }
    if (tf_normalize && value_sum > 0.0) {
      for (double& v : row) v /= value_sum;
    }
    rows.push_back(std::move(row));
    labels.push_back(label);
  }

  LabeledSet out;
  out.x = Matrix(rows.size(), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < dim; ++c) out.x(r, c) = rows[r][c];
  }
  out.y = std::move(labels);
  return out;
}

namespace {

// One base sample of the interleaving-arcs distribution. Class 0 traces
// (cos t, sin t) and class 1 traces (1 - cos t, 0.5 - sin t) for t in
// [0, pi], plus isotropic noise.
void moons_sample(Rng& rng, int label, double noise_std, double* p) {
  const double t = rng.next_double() * kPi;
  if (label == 0) {
    p[0] = std::cos(t);
    p[1] = std::sin(t);
  } else {
    p[0] = 1.0 - std::cos(t);
    p[1] = 0.5 - std::sin(t);
  }
  if (noise_std > 0.0) {
    p[0] += rng.next_gaussian(noise_std);
    p[1] += rng.next_gaussian(noise_std);
  }
}

void blobs_sample(Rng& rng, int label, double noise_std, double* p) {
  p[0] = (label == 0) ? 0.0 : 2.0;
  p[1] = 0.0;
  if (noise_std > 0.0) {
    p[0] += rng.next_gaussian(noise_std);
    p[1] += rng.next_gaussian(noise_std);
  }
}

LabeledSet draw_domain(const SyntheticSpec& spec, Rng& rng) {
  LabeledSet out;
  out.x = Matrix(spec.samples_per_domain, 2);
  out.y.resize(spec.samples_per_domain);
  for (std::size_t i = 0; i < spec.samples_per_domain; ++i) {
    const int label = static_cast<int>(i % 2);
    out.y[i] = label;
    double* p = out.x.data() + 2 * i;
    if (spec.generator == SyntheticGenerator::kTwoMoonsRotation) {
      moons_sample(rng, label, spec.noise_std, p);
    } else {
      blobs_sample(rng, label, spec.noise_std, p);
    }
  }
  return out;
}

// The arcs' combined centroid, the fixed point of the rotation.
constexpr double kMoonsCenterX = 0.5;
constexpr double kMoonsCenterY = 0.25;

void apply_transform(const SyntheticSpec& spec, Matrix& x) {
  if (spec.generator == SyntheticGenerator::kTwoMoonsRotation) {
    const double theta = spec.rotation_deg * kPi / 180.0;
    const double ct = std::cos(theta), st = std::sin(theta);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double dx = x(i, 0) - kMoonsCenterX;
      const double dy = x(i, 1) - kMoonsCenterY;
      x(i, 0) = kMoonsCenterX + ct * dx - st * dy;
      x(i, 1) = kMoonsCenterY + st * dx + ct * dy;
    }
  } else {
    const double sx = spec.shift.empty() ? 0.0 : spec.shift[0];
    const double sy = spec.shift.size() > 1 ? spec.shift[1] : 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      x(i, 0) += sx;
      x(i, 1) += sy;
    }
  }
}

}  // namespace

DomainPairDataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.samples_per_domain < 4) {
    throw std::invalid_argument("make_synthetic: need at least 4 samples per domain, got " +
                                std::to_string(spec.samples_per_domain));
  }
  if (spec.noise_std < 0.0) {
    throw std::invalid_argument("make_synthetic: noise std must be nonnegative, got " +
                                std::to_string(spec.noise_std));
  }
  if (!std::isfinite(spec.rotation_deg)) {
    throw std::invalid_argument("make_synthetic: rotation angle is not finite");
  }
  if (spec.generator == SyntheticGenerator::kGaussianBlobsShift && spec.shift.size() > 2) {
    throw std::invalid_argument("make_synthetic: shift has " +
                                std::to_string(spec.shift.size()) +
                                " components, data is 2-D");
  }

  Rng root(spec.seed);
  Rng source_rng = root.split();
  Rng target_rng = root.split();
  Rng split_rng = root.split();

  LabeledSet source = draw_domain(spec, source_rng);
  LabeledSet target = draw_domain(spec, target_rng);
  apply_transform(spec, target.x);

  DomainPairDataset ds;
  ds.dims = 2;
  ds.num_classes = 2;
  ds.source_labeled_x = source.x;
  ds.source_labeled_y = source.y;
  ds.source_unlabeled = source.x;
  ds.target_unlabeled = target.x;

  std::vector<std::size_t> order(spec.samples_per_domain);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  split_rng.shuffle(order);
  const std::size_t n_dev = order.size() / 2;
  std::vector<std::size_t> dev_idx(order.begin(), order.begin() + n_dev);
  std::vector<std::size_t> test_idx(order.begin() + n_dev, order.end());
  ds.target_dev_x = take_rows(target.x, dev_idx);
  ds.target_test_x = take_rows(target.x, test_idx);
  for (std::size_t i : dev_idx) ds.target_dev_y.push_back(target.y[i]);
  for (std::size_t i : test_idx) ds.target_test_y.push_back(target.y[i]);

  validate_dataset(ds);
  return ds;
}

DomainPairDataset subsample_labels(const DomainPairDataset& ds, double fraction,
                                   std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("subsample_labels: fraction must be in (0,1], got " +
                                std::to_string(fraction));
  }
  check_labels(ds.source_labeled_y, ds.num_classes, "source_labeled");
  std::vector<std::vector<std::size_t>> per_class(ds.num_classes);
  for (std::size_t i = 0; i < ds.source_labeled_y.size(); ++i) {
    per_class[ds.source_labeled_y[i]].push_back(i);
  }

  // One permutation per class, fixed by the seed alone: taking a prefix of
  // it makes smaller fractions nested subsets of larger ones.
  Rng root(seed);
  std::vector<std::size_t> selected;
  for (int c = 0; c < ds.num_classes; ++c) {
    Rng class_rng = root.split();
    auto& idx = per_class[c];
    if (idx.empty()) continue;  // class absent from the pool; nothing to keep
    class_rng.shuffle(idx);
    const auto keep = static_cast<std::size_t>(
        std::llround(static_cast<double>(idx.size()) * fraction));
    if (keep == 0) {
      throw std::invalid_argument("subsample_labels: fraction " + std::to_string(fraction) +
                                  " keeps zero instances of class " + std::to_string(c) +
                                  " (" + std::to_string(idx.size()) + " available)");
    }
    selected.insert(selected.end(), idx.begin(), idx.begin() + keep);
  }
  std::sort(selected.begin(), selected.end());

  DomainPairDataset out = ds;
  out.source_labeled_x = take_rows(ds.source_labeled_x, selected);
  out.source_labeled_y.clear();
  for (std::size_t i : selected) out.source_labeled_y.push_back(ds.source_labeled_y[i]);
  return out;
}

BinaryTask binary_digit_task(const Matrix& x, const std::vector<int>& y,
                             int positive_digit, const std::set<int>& excluded_digits,
                             std::size_t want_positive, std::size_t want_negative,
                             std::uint64_t seed, bool fill_available) {
  if (x.rows() != y.size()) {
    throw std::invalid_argument("binary_digit_task: " + std::to_string(x.rows()) +
                                " rows vs " + std::to_string(y.size()) + " labels");
  }
  if (positive_digit < 0 || positive_digit > 9) {
    throw std::invalid_argument("binary_digit_task: positive digit " +
                                std::to_string(positive_digit) + " outside 0-9");
  }
  std::vector<std::size_t> pos_pool, neg_pool;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] > 9) {
      throw std::invalid_argument("binary_digit_task: label " + std::to_string(y[i]) +
                                  " at row " + std::to_string(i) + " outside 0-9");
    }
    if (y[i] == positive_digit) {
      pos_pool.push_back(i);
    } else if (!excluded_digits.count(y[i])) {
      neg_pool.push_back(i);
    }
  }

  auto pick = [&](std::vector<std::size_t>& pool, std::size_t want, const char* kind,
                  Rng& rng) -> std::size_t {
    if (pool.size() < want) {
      if (!fill_available) {
        throw std::runtime_error("binary_digit_task: need " + std::to_string(want) + " " +
                                 kind + " instances, only " + std::to_string(pool.size()) +
                                 " available");
      }
      want = pool.size();
    }
    rng.shuffle(pool);
    return want;
  };

  Rng root(seed);
  Rng pos_rng = root.split();
  Rng neg_rng = root.split();
  Rng mix_rng = root.split();
  const std::size_t n_pos = pick(pos_pool, want_positive, "positive", pos_rng);
  const std::size_t n_neg = pick(neg_pool, want_negative, "negative", neg_rng);
  if (n_pos == 0 || n_neg == 0) {
    throw std::runtime_error("binary_digit_task: empty " +
                             std::string(n_pos == 0 ? "positive" : "negative") + " pool");
  }

  std::vector<std::size_t> rows(pos_pool.begin(), pos_pool.begin() + n_pos);
  rows.insert(rows.end(), neg_pool.begin(), neg_pool.begin() + n_neg);
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  mix_rng.shuffle(order);

  BinaryTask task;
  task.num_positive = n_pos;
  task.num_negative = n_neg;
  task.x = Matrix(rows.size(), x.cols());
  task.y.resize(rows.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t src = rows[order[r]];
    for (std::size_t c = 0; c < x.cols(); ++c) task.x(r, c) = x(src, c);
    task.y[r] = (order[r] < n_pos) ? 1 : 0;
  }
  return task;
}

}  // namespace dauto
