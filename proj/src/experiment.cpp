// dauto/experiment.cpp

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

#include "dauto/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dauto/eval.hpp"
#include "dauto/kde.hpp"
#include "dauto/nn.hpp"
#include "dauto/optim.hpp"

namespace dauto {

namespace fs = std::filesystem;

namespace {

// Round-trip-exact double rendering for config echoes; CSVs use the
// 6-significant-digit format instead.
std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Value parsers that record problems instead of throwing, so a config is
// reported with its complete list of errors.
struct Errors {
  std::vector<std::string> list;
  void add(const std::string& key, const std::string& value, const std::string& why) {
    list.push_back(key + "=" + value + ": " + why);
  }
};

bool to_double(const std::string& v, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(v, &pos);
    return pos == v.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool to_u64(const std::string& v, std::uint64_t& out) {
  if (v.empty() || v[0] == '-') return false;
  try {
    std::size_t pos = 0;
    out = std::stoull(v, &pos);
    return pos == v.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool to_int(const std::string& v, int& out) {
  try {
    std::size_t pos = 0;
    out = std::stoi(v, &pos);
    return pos == v.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool to_bool(const std::string& v, bool& out) {
  if (v == "1" || v == "true") {
    out = true;
    return true;
  }
  if (v == "0" || v == "false") {
    out = false;
    return true;
  }
  return false;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string join_doubles_full(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt_full(v[i]);
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) +
                               ": expected key=value, got '" + t + "'");
    }
    entries.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return entries;
}

ExperimentConfig parse_experiment_config(
    const std::vector<std::pair<std::string, std::string>>& entries) {
  ExperimentConfig cfg;
  Errors errs;

  auto set_double = [&](const std::string& k, const std::string& v, double& out) {
    double d;
    if (to_double(v, d)) out = d;
    else errs.add(k, v, "not a number");
  };
  auto set_size = [&](const std::string& k, const std::string& v, std::size_t& out) {
    std::uint64_t u;
    if (to_u64(v, u)) out = static_cast<std::size_t>(u);
    else errs.add(k, v, "not a nonnegative integer");
  };
  auto set_doubles = [&](const std::string& k, const std::string& v,
                         std::vector<double>& out) {
    std::vector<double> parsed;
    for (const std::string& piece : split_csv(v)) {
      double d;
      if (to_double(piece, d)) parsed.push_back(d);
      else {
        errs.add(k, v, "'" + piece + "' is not a number");
        return;
      }
    }
    out = std::move(parsed);
  };
  auto set_ints = [&](const std::string& k, const std::string& v, std::vector<int>& out) {
    std::vector<int> parsed;
    for (const std::string& piece : split_csv(v)) {
      int d;
      if (to_int(piece, d)) parsed.push_back(d);
      else {
        errs.add(k, v, "'" + piece + "' is not an integer");
        return;
      }
    }
    out = std::move(parsed);
  };

  for (const auto& [key, value] : entries) {
    if (key == "task") cfg.task = value;
    else if (key == "dataset") cfg.dataset = value;
    else if (key == "generator") {
      if (value == "two_moons") cfg.synthetic.generator = SyntheticGenerator::kTwoMoonsRotation;
      else if (value == "blobs") cfg.synthetic.generator = SyntheticGenerator::kGaussianBlobsShift;
      else errs.add(key, value, "expected two_moons or blobs");
    } else if (key == "rotation_deg") set_double(key, value, cfg.synthetic.rotation_deg);
    else if (key == "shift") set_doubles(key, value, cfg.synthetic.shift);
    else if (key == "samples_per_domain") set_size(key, value, cfg.synthetic.samples_per_domain);
    else if (key == "noise_std") set_double(key, value, cfg.synthetic.noise_std);
    else if (key == "source_images") cfg.source_images = value;
    else if (key == "source_labels") cfg.source_labels = value;
    else if (key == "target_images") cfg.target_images = value;
    else if (key == "target_labels") cfg.target_labels = value;
    else if (key == "source_sparse") cfg.source_sparse = value;
    else if (key == "target_sparse") cfg.target_sparse = value;
    else if (key == "sparse_dim") set_size(key, value, cfg.sparse_dim);
    else if (key == "tf_normalize") {
      bool b;
      if (to_bool(value, b)) cfg.tf_normalize = b;
      else errs.add(key, value, "expected 0/1/true/false");
    } else if (key == "source") cfg.source_name = value;
    else if (key == "target") cfg.target_name = value;
    else if (key == "digits") set_ints(key, value, cfg.digits);
    else if (key == "excluded_digits") {
      std::vector<int> v;
      set_ints(key, value, v);
      cfg.excluded_digits = std::set<int>(v.begin(), v.end());
    } else if (key == "train_positives") set_size(key, value, cfg.train_positives);
    else if (key == "train_negatives") set_size(key, value, cfg.train_negatives);
    else if (key == "test_positives") set_size(key, value, cfg.test_positives);
    else if (key == "test_negatives") set_size(key, value, cfg.test_negatives);
    else if (key == "hidden_dims") {
      std::vector<std::size_t> dims;
      for (const std::string& piece : split_csv(value)) {
        std::uint64_t u;
        if (to_u64(piece, u) && u > 0) dims.push_back(static_cast<std::size_t>(u));
        else {
          errs.add(key, value, "'" + piece + "' is not a positive integer");
          dims.clear();
          break;
        }
      }
      if (!dims.empty()) cfg.hidden_dims = std::move(dims);
    } else if (key == "dropout") set_double(key, value, cfg.dropout);
    else if (key == "methods") {
      std::vector<Mode> methods;
      bool bad = false;
      for (const std::string& piece : split_csv(value)) {
        try {
          methods.push_back(parse_mode(piece));
        } catch (const std::invalid_argument& e) {
          errs.add(key, value, e.what());
          bad = true;
          break;
        }
      }
      if (!bad) cfg.methods = std::move(methods);
    } else if (key == "lambda_grid") set_doubles(key, value, cfg.lambda_grid);
    else if (key == "mu_grid") set_doubles(key, value, cfg.mu_grid);
    else if (key == "fractions") set_doubles(key, value, cfg.fractions);
    else if (key == "lr") set_double(key, value, cfg.train.lr);
    else if (key == "rho") set_double(key, value, cfg.train.rho);
    else if (key == "epsilon") set_double(key, value, cfg.train.epsilon);
    else if (key == "batch_size") set_size(key, value, cfg.train.batch_size);
    else if (key == "max_epochs") set_size(key, value, cfg.train.max_epochs);
    else if (key == "patience") set_size(key, value, cfg.train.patience);
    else if (key == "weight_decay") set_double(key, value, cfg.train.weight_decay);
    else if (key == "seed") {
      std::uint64_t u;
      if (to_u64(value, u)) {
        cfg.train.seed = u;
        cfg.synthetic.seed = u;
      } else {
        errs.add(key, value, "not a nonnegative integer");
      }
    } else if (key == "jobs") set_size(key, value, cfg.jobs);
    else if (key == "outdir") cfg.outdir = value;
    else errs.list.push_back("unknown key '" + key + "'");
  }

  if (!errs.list.empty()) {
    std::string msg = "config has " + std::to_string(errs.list.size()) + " problem(s):";
    for (const auto& e : errs.list) msg += "\n  - " + e;
    throw std::invalid_argument(msg);
  }
  return cfg;
}

std::string echo_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "# dauto " << kVersion << " resolved configuration\n";
  out << "task=" << cfg.task << '\n';
  out << "dataset=" << cfg.dataset << '\n';
  out << "generator="
      << (cfg.synthetic.generator == SyntheticGenerator::kTwoMoonsRotation ? "two_moons"
                                                                           : "blobs")
      << '\n';
  out << "rotation_deg=" << fmt_full(cfg.synthetic.rotation_deg) << '\n';
  out << "shift=" << join_doubles_full(cfg.synthetic.shift) << '\n';
  out << "samples_per_domain=" << cfg.synthetic.samples_per_domain << '\n';
  out << "noise_std=" << fmt_full(cfg.synthetic.noise_std) << '\n';
  out << "source_images=" << cfg.source_images << '\n';
  out << "source_labels=" << cfg.source_labels << '\n';
  out << "target_images=" << cfg.target_images << '\n';
  out << "target_labels=" << cfg.target_labels << '\n';
  out << "source_sparse=" << cfg.source_sparse << '\n';
  out << "target_sparse=" << cfg.target_sparse << '\n';
  out << "sparse_dim=" << cfg.sparse_dim << '\n';
  out << "tf_normalize=" << (cfg.tf_normalize ? 1 : 0) << '\n';
  out << "source=" << cfg.source_name << '\n';
  out << "target=" << cfg.target_name << '\n';
  out << "digits=";
  for (std::size_t i = 0; i < cfg.digits.size(); ++i) out << (i ? "," : "") << cfg.digits[i];
  out << '\n';
  out << "excluded_digits=";
  {
    std::size_t i = 0;
    for (int d : cfg.excluded_digits) out << (i++ ? "," : "") << d;
  }
  out << '\n';
  out << "train_positives=" << cfg.train_positives << '\n';
  out << "train_negatives=" << cfg.train_negatives << '\n';
  out << "test_positives=" << cfg.test_positives << '\n';
  out << "test_negatives=" << cfg.test_negatives << '\n';
  out << "hidden_dims=";
  for (std::size_t i = 0; i < cfg.hidden_dims.size(); ++i) {
    out << (i ? "," : "") << cfg.hidden_dims[i];
  }
  out << '\n';
  out << "dropout=" << fmt_full(cfg.dropout) << '\n';
  out << "methods=";
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    out << (i ? "," : "") << mode_name(cfg.methods[i]);
  }
  out << '\n';
  out << "lambda_grid=" << join_doubles_full(cfg.lambda_grid) << '\n';
  out << "mu_grid=" << join_doubles_full(cfg.mu_grid) << '\n';
  out << "fractions=" << join_doubles_full(cfg.fractions) << '\n';
  out << "lr=" << fmt_full(cfg.train.lr) << '\n';
  out << "rho=" << fmt_full(cfg.train.rho) << '\n';
  out << "epsilon=" << fmt_full(cfg.train.epsilon) << '\n';
  out << "batch_size=" << cfg.train.batch_size << '\n';
  out << "max_epochs=" << cfg.train.max_epochs << '\n';
  out << "patience=" << cfg.train.patience << '\n';
  out << "weight_decay=" << fmt_full(cfg.train.weight_decay) << '\n';
  out << "seed=" << cfg.train.seed << '\n';
  out << "jobs=" << cfg.jobs << '\n';
  out << "outdir=" << cfg.outdir << '\n';
  return out.str();
}

void validate_experiment(const ExperimentConfig& cfg) {
  std::vector<std::string> errs;
  auto complain = [&](const std::string& msg) { errs.push_back(msg); };

  if (cfg.task.empty()) complain("task name is empty");
  for (char c : cfg.task) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
      complain("task name '" + cfg.task + "' may only use letters, digits, '_', '-', '.'");
      break;
    }
  }

  if (cfg.dataset == "synthetic") {
    if (cfg.synthetic.samples_per_domain < 4) {
      complain("samples_per_domain must be at least 4, got " +
               std::to_string(cfg.synthetic.samples_per_domain));
    }
    if (cfg.synthetic.noise_std < 0.0) complain("noise_std must be nonnegative");
    if (cfg.synthetic.generator == SyntheticGenerator::kGaussianBlobsShift &&
        cfg.synthetic.shift.size() > 2) {
      complain("shift has " + std::to_string(cfg.synthetic.shift.size()) +
               " components, blobs data is 2-D");
    }
  } else if (cfg.dataset == "idx") {
    for (const auto& [name, path] :
         std::vector<std::pair<std::string, std::string>>{
             {"source_images", cfg.source_images},
             {"source_labels", cfg.source_labels},
             {"target_images", cfg.target_images},
             {"target_labels", cfg.target_labels}}) {
      if (path.empty()) complain(name + " is required for dataset=idx");
      else if (!fs::exists(path)) complain(name + " file '" + path + "' does not exist");
    }
    for (int d : cfg.digits) {
      if (d < 0 || d > 9) complain("digit " + std::to_string(d) + " outside 0-9");
    }
    for (int d : cfg.excluded_digits) {
      if (d < 0 || d > 9) complain("excluded digit " + std::to_string(d) + " outside 0-9");
    }
  } else if (cfg.dataset == "sparse") {
    if (cfg.source_sparse.empty()) complain("source_sparse is required for dataset=sparse");
    else if (!fs::exists(cfg.source_sparse)) {
      complain("source_sparse file '" + cfg.source_sparse + "' does not exist");
    }
    if (cfg.target_sparse.empty()) complain("target_sparse is required for dataset=sparse");
    else if (!fs::exists(cfg.target_sparse)) {
      complain("target_sparse file '" + cfg.target_sparse + "' does not exist");
    }
    if (cfg.sparse_dim == 0) complain("sparse_dim must be positive for dataset=sparse");
  } else {
    complain("dataset must be synthetic, idx, or sparse, got '" + cfg.dataset + "'");
  }

  if (cfg.hidden_dims.empty()) complain("hidden_dims must list at least one layer");
  for (std::size_t h : cfg.hidden_dims) {
    if (h == 0) {
      complain("hidden_dims entries must be positive");
      break;
    }
  }
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) {
    complain("dropout must be in [0,1), got " + fmt_full(cfg.dropout));
  }

  if (cfg.methods.empty()) complain("methods list is empty");
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    for (std::size_t j = i + 1; j < cfg.methods.size(); ++j) {
      if (cfg.methods[i] == cfg.methods[j]) {
        complain("method " + mode_name(cfg.methods[i]) + " listed twice");
      }
    }
  }

  auto check_grid = [&](const char* name, const std::vector<double>& grid) {
    if (grid.empty()) complain(std::string(name) + " is empty");
    for (double v : grid) {
      if (!(std::isfinite(v) && v >= 0.0)) {
        complain(std::string(name) + " value " + fmt_full(v) +
                 " must be finite and nonnegative");
      }
    }
  };
  check_grid("lambda_grid", cfg.lambda_grid);
  check_grid("mu_grid", cfg.mu_grid);

  if (cfg.fractions.empty()) complain("fractions is empty");
  for (std::size_t i = 0; i < cfg.fractions.size(); ++i) {
    const double f = cfg.fractions[i];
    if (!(f > 0.0 && f <= 1.0)) {
      complain("fraction " + fmt_full(f) + " outside (0,1]");
    }
    if (i > 0 && !(cfg.fractions[i - 1] < f)) {
      complain("fractions must be strictly ascending");
      break;
    }
  }

  if (cfg.train.batch_size == 0) complain("batch_size must be positive");
  if (cfg.train.max_epochs == 0) complain("max_epochs must be positive");
  if (!(cfg.train.rho > 0.0 && cfg.train.rho < 1.0)) complain("rho must be in (0,1)");
  if (!(cfg.train.epsilon > 0.0)) complain("epsilon must be positive");
  if (!std::isfinite(cfg.train.lr)) complain("lr is not finite");
  if (!(std::isfinite(cfg.train.weight_decay) && cfg.train.weight_decay >= 0.0)) {
    complain("weight_decay must be finite and nonnegative");
  }
  const bool adversarial_requested =
      std::any_of(cfg.methods.begin(), cfg.methods.end(),
                  [](Mode m) { return m == Mode::kDann || m == Mode::kDauto; }) &&
      std::any_of(cfg.mu_grid.begin(), cfg.mu_grid.end(), [](double v) { return v != 0.0; });
  if (adversarial_requested && cfg.train.batch_size < 2) {
    complain("batch_size must be at least 2 when an adversarial method runs with mu > 0");
  }

  if (cfg.outdir.empty()) complain("outdir is empty");
  if (cfg.jobs == 0) complain("jobs must be at least 1");

  if (!errs.empty()) {
    std::string msg = "experiment config invalid (" + std::to_string(errs.size()) +
                      " problem(s)):";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw std::invalid_argument(msg);
  }
}

namespace {

// Seeded 50/50 split of a labeled pool into dev and test halves.
void split_dev_test(const Matrix& x, const std::vector<int>& y, std::uint64_t seed,
                    DomainPairDataset& ds) {
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t n_dev = order.size() / 2;
  const std::vector<std::size_t> dev_idx(order.begin(), order.begin() + n_dev);
  const std::vector<std::size_t> test_idx(order.begin() + n_dev, order.end());
  ds.target_dev_x = take_rows(x, dev_idx);
  ds.target_test_x = take_rows(x, test_idx);
  ds.target_dev_y.clear();
  ds.target_test_y.clear();
  for (std::size_t i : dev_idx) ds.target_dev_y.push_back(y[i]);
  for (std::size_t i : test_idx) ds.target_test_y.push_back(y[i]);
}

int max_label(const std::vector<int>& a, const std::vector<int>& b) {
  int m = -1;
  for (int v : a) m = std::max(m, v);
  for (int v : b) m = std::max(m, v);
  return m;
}

}  // namespace

DomainPairDataset build_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset == "synthetic") return make_synthetic(cfg.synthetic);

  DomainPairDataset ds;
  if (cfg.dataset == "idx") {
    IdxData s = load_idx(cfg.source_images, cfg.source_labels);
    IdxData t = load_idx(cfg.target_images, cfg.target_labels);
    if (s.x.cols() != t.x.cols()) {
      throw std::invalid_argument("build_dataset: source dim " + std::to_string(s.x.cols()) +
                                  " vs target dim " + std::to_string(t.x.cols()));
    }
    ds.dims = s.x.cols();
    ds.num_classes = max_label(s.y, t.y) + 1;
    ds.source_labeled_x = s.x;
    ds.source_labeled_y = s.y;
    ds.source_unlabeled = std::move(s.x);
    ds.target_unlabeled = t.x;
    split_dev_test(t.x, t.y, cfg.train.seed, ds);
  } else if (cfg.dataset == "sparse") {
    LabeledSet s = load_sparse_text(cfg.source_sparse, cfg.sparse_dim, cfg.tf_normalize);
    LabeledSet t = load_sparse_text(cfg.target_sparse, cfg.sparse_dim, cfg.tf_normalize);
    ds.dims = cfg.sparse_dim;
    ds.num_classes = max_label(s.y, t.y) + 1;
    ds.source_labeled_x = s.x;
    ds.source_labeled_y = s.y;
    ds.source_unlabeled = std::move(s.x);
    ds.target_unlabeled = t.x;
    split_dev_test(t.x, t.y, cfg.train.seed, ds);
  } else {
    throw std::invalid_argument("build_dataset: unknown dataset '" + cfg.dataset + "'");
  }
  validate_dataset(ds);
  return ds;
}

double representation_proxy_a(const Matrix& source_reps, const Matrix& target_reps,
                              std::uint64_t seed) {
  if (source_reps.rows() == 0 || target_reps.rows() == 0) {
    throw std::invalid_argument(
        "representation_proxy_a: both representation sets must be nonempty");
  }
  if (source_reps.cols() != target_reps.cols()) {
    throw std::invalid_argument("representation_proxy_a: dims " +
                                std::to_string(source_reps.cols()) + " vs " +
                                std::to_string(target_reps.cols()));
  }
  const Matrix x = vstack(source_reps, target_reps);
  std::vector<int> tags(source_reps.rows(), 0);
  tags.insert(tags.end(), target_reps.rows(), 1);
  const Matrix onehot = one_hot(tags, 2);

  AffineLayer probe(x.cols(), 2);
  Rng rng(seed);
  probe.init_gaussian(rng, 1.0 / std::sqrt(double(x.cols())));
  std::vector<ParamRef> ps = {{"probe.weight", &probe.weight},
                              {"probe.bias", &probe.bias}};
  AdaDeltaState opt(0.95, 1e-6, 1.0, ps);
  std::vector<Matrix> grads(2);
  for (int step = 0; step < 200; ++step) {
    const Matrix probs = softmax_forward(probe.forward(x));
    const CrossEntropyResult ce = cross_entropy(probs, onehot);
    LayerGrads g = probe.backward(ce.d_logits);
    grads[0] = std::move(g.d_weight);
    grads[1] = std::move(g.d_bias);
    adadelta_step(opt, ps, grads);
  }
  return proxy_a_distance(softmax_forward(probe.forward(x)), tags);
}

namespace {

std::string trace_csv_text(const TrainTrace& trace) {
  // Wall time is real but run-dependent; it stays out of the file so a
  // rerun of the same config is byte-identical.
  std::string out = "epoch,loss_y,loss_r,loss_d,dev_accuracy\n";
  for (std::size_t i = 0; i < trace.epochs.size(); ++i) {
    const EpochStats& e = trace.epochs[i];
    out += std::to_string(i) + ',' + format_sig(e.loss_y) + ',' + format_sig(e.loss_r) +
           ',' + format_sig(e.loss_d) + ',' + format_sig(e.dev_accuracy) + '\n';
  }
  return out;
}

std::string report_csv_text(const MethodResult& mr) {
  std::string out =
      "role,lambda,mu,dev_accuracy,test_accuracy,proxy_a_before,proxy_a_after,"
      "best_epoch,stop_reason\n";
  for (const GridCell& cell : mr.cells) {
    out += std::string(cell.failed ? "failed" : "cell") + ',' + format_sig(cell.lambda) +
           ',' + format_sig(cell.mu) + ',' +
           (cell.failed ? std::string() : format_sig(cell.dev_accuracy)) + ",,,,,\n";
  }
  if (mr.ok) {
    out += "selected," + format_sig(mr.best_lambda) + ',' + format_sig(mr.best_mu) + ',' +
           format_sig(mr.dev_accuracy) + ',' + format_sig(mr.test_accuracy) + ',' +
           format_sig(mr.proxy_a_before) + ',' + format_sig(mr.proxy_a_after) + ',' +
           std::to_string(mr.best_epoch) + ',' + mr.stop_reason + '\n';
  }
  return out;
}

// One method's grid over one dataset, with per-method axis pinning.
GridSearchResult run_method(const ExperimentConfig& cfg, const DomainPairDataset& ds,
                            Mode method) {
  TrainConfig base = cfg.train;
  base.mode = method;
  std::vector<double> lg, mg;
  const std::vector<double> zero = {0.0};
  switch (method) {
    case Mode::kNoAdapt: lg = zero; mg = zero; break;
    case Mode::kDann: lg = zero; mg = cfg.mu_grid; break;
    case Mode::kAeOnly: lg = cfg.lambda_grid; mg = zero; break;
    case Mode::kDauto: lg = cfg.lambda_grid; mg = cfg.mu_grid; break;
  }
  return grid_search(ds, base, lg, mg, ModelSpec{cfg.hidden_dims, cfg.dropout}, cfg.jobs);
}

void record_cell_failures(const std::string& where, const std::vector<GridCell>& cells,
                          std::vector<std::string>& failures) {
  for (const GridCell& cell : cells) {
    if (cell.failed) {
      failures.push_back(where + " cell " + std::to_string(cell.cell_index) + " (lambda=" +
                         format_sig(cell.lambda) + ", mu=" + format_sig(cell.mu) +
                         "): " + cell.error);
    }
  }
}

// Fills the MethodResult from a finished grid search and writes the
// method's files under `dir`. Takes the result by mutable reference because
// encoding with the winning model refreshes its forward caches.
void finish_method(const ExperimentConfig& cfg, const DomainPairDataset& ds,
                   GridSearchResult& gs, const std::string& dir, MethodResult& mr) {
  fs::create_directories(dir);
  mr.dir = dir;
  mr.cells = gs.cells;
  for (const GridCell& cell : gs.cells) {
    write_text(dir + "/cell_" + std::to_string(cell.cell_index) + "_trace.csv",
               trace_csv_text(cell.trace));
  }
  if (!gs.found) {
    mr.error = "no grid cell trained successfully";
    write_text(dir + "/report.csv", report_csv_text(mr));
    return;
  }
  mr.ok = true;
  mr.best_lambda = gs.best_cfg.lambda;
  mr.best_mu = gs.best_cfg.mu;
  mr.dev_accuracy = gs.best_dev_accuracy;
  mr.test_accuracy = gs.test_accuracy;
  mr.best_epoch = gs.best_trace.best_epoch;
  mr.stop_reason = gs.best_trace.stop_reason;

  DautoModel& model = *gs.best_model;
  DautoModel fresh(ds.dims, cfg.hidden_dims, ds.num_classes, cfg.dropout,
                   gs.best_cfg.seed);
  mr.proxy_a_before = representation_proxy_a(fresh.encode(ds.source_unlabeled),
                                             fresh.encode(ds.target_unlabeled),
                                             cfg.train.seed);
  mr.proxy_a_after = representation_proxy_a(model.encode(ds.source_unlabeled),
                                            model.encode(ds.target_unlabeled),
                                            cfg.train.seed);

  write_text(dir + "/trace.csv", trace_csv_text(gs.best_trace));
  write_text(dir + "/report.csv", report_csv_text(mr));
  save_checkpoint(model, dir + "/model.bin");

  // 2-D embedding of the learned representations, both domains tagged.
  const Matrix reps = vstack(model.encode(ds.source_unlabeled),
                             model.encode(ds.target_unlabeled));
  std::vector<int> tags(ds.source_unlabeled.rows(), 0);
  tags.insert(tags.end(), ds.target_unlabeled.rows(), 1);
  write_embedding_tsv(pca2(reps), tags, dir + "/embed.tsv");
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
  validate_experiment(cfg);
  const DomainPairDataset ds = build_dataset(cfg);

  RunReport report;
  report.task = cfg.task;
  report.seed = cfg.train.seed;
  report.version = kVersion;
  report.config_echo = echo_config(cfg);

  const std::string task_dir = cfg.outdir + "/" + cfg.task;
  fs::create_directories(task_dir);
  write_text(task_dir + "/config.echo", report.config_echo);

  for (Mode method : cfg.methods) {
    MethodResult mr;
    mr.method = method;
    const std::string dir = task_dir + "/" + mode_name(method);
    try {
      GridSearchResult gs = run_method(cfg, ds, method);
      finish_method(cfg, ds, gs, dir, mr);
      record_cell_failures(mode_name(method), gs.cells, report.failures);
      if (!mr.ok) report.failures.push_back(mode_name(method) + ": " + mr.error);
    } catch (const std::exception& e) {
      mr.error = e.what();
      report.failures.push_back(mode_name(method) + ": " + e.what());
    }
    report.methods.push_back(std::move(mr));
  }

  std::string acc = "method,lambda,mu,dev_accuracy,test_accuracy\n";
  for (const MethodResult& mr : report.methods) {
    if (!mr.ok) continue;
    acc += mode_name(mr.method) + ',' + format_sig(mr.best_lambda) + ',' +
           format_sig(mr.best_mu) + ',' + format_sig(mr.dev_accuracy) + ',' +
           format_sig(mr.test_accuracy) + '\n';
  }
  write_text(task_dir + "/accuracy.csv", acc);

  report.ok = report.failures.empty();
  return report;
}

RunReport run_fraction_sweep(const ExperimentConfig& cfg) {
  validate_experiment(cfg);
  const DomainPairDataset full = build_dataset(cfg);

  RunReport report;
  report.task = cfg.task;
  report.seed = cfg.train.seed;
  report.version = kVersion;
  report.config_echo = echo_config(cfg);

  const std::string task_dir = cfg.outdir + "/" + cfg.task;
  fs::create_directories(task_dir);
  write_text(task_dir + "/config.echo", report.config_echo);

  for (Mode method : cfg.methods) {
    for (double fraction : cfg.fractions) {
      const std::string where = mode_name(method) + " fraction " + format_sig(fraction);
      SweepRow row{mode_name(method), fraction, 0.0};
      try {
        // Fixed subsample seed across fractions keeps the selections nested.
        const DomainPairDataset ds = subsample_labels(full, fraction, cfg.train.seed);
        const GridSearchResult gs = run_method(cfg, ds, method);
        record_cell_failures(where, gs.cells, report.failures);
        const std::string dir =
            task_dir + "/" + mode_name(method) + "/fraction_" + format_sig(fraction);
        fs::create_directories(dir);
        if (gs.found) {
          row.test_accuracy = gs.test_accuracy;
          write_text(dir + "/trace.csv", trace_csv_text(gs.best_trace));
        } else {
          report.failures.push_back(where + ": no grid cell trained successfully");
        }
      } catch (const std::exception& e) {
        report.failures.push_back(where + ": " + e.what());
      }
      report.sweep_rows.push_back(std::move(row));
    }
  }

  std::string sweep = "method,fraction,test_accuracy\n";
  for (const SweepRow& row : report.sweep_rows) {
    sweep += row.method + ',' + format_sig(row.fraction) + ',' +
             format_sig(row.test_accuracy) + '\n';
  }
  write_text(task_dir + "/sweep.csv", sweep);

  report.ok = report.failures.empty();
  return report;
}

RunReport run_digit_matrix(const ExperimentConfig& cfg) {
  validate_experiment(cfg);
  if (cfg.dataset != "idx") {
    throw std::invalid_argument("run_digit_matrix: requires dataset=idx");
  }
  if (cfg.digits.empty()) {
    throw std::invalid_argument("run_digit_matrix: digits list is empty");
  }

  const IdxData train_pool = load_idx(cfg.source_images, cfg.source_labels);
  const IdxData test_pool = load_idx(cfg.target_images, cfg.target_labels);
  if (train_pool.x.cols() != test_pool.x.cols()) {
    throw std::invalid_argument("run_digit_matrix: train dim " +
                                std::to_string(train_pool.x.cols()) + " vs test dim " +
                                std::to_string(test_pool.x.cols()));
  }

  RunReport report;
  report.task = cfg.task;
  report.seed = cfg.train.seed;
  report.version = kVersion;
  report.config_echo = echo_config(cfg);
  report.digits = cfg.digits;

  const std::string task_dir = cfg.outdir + "/" + cfg.task;
  fs::create_directories(task_dir);
  write_text(task_dir + "/config.echo", report.config_echo);

  const std::size_t n = cfg.digits.size();
  for (Mode method : cfg.methods) report.matrices[mode_name(method)] = Matrix(n, n);

  for (std::size_t si = 0; si < n; ++si) {
    for (std::size_t ti = 0; ti < n; ++ti) {
      const std::size_t pair_index = si * n + ti;
      const std::uint64_t pair_seed = cfg.train.seed + 1000ULL * (pair_index + 1);
      const std::string pair_name =
          std::to_string(cfg.digits[si]) + "to" + std::to_string(cfg.digits[ti]);
      DomainPairDataset ds;
      try {
        const BinaryTask src = binary_digit_task(
            train_pool.x, train_pool.y, cfg.digits[si], cfg.excluded_digits,
            cfg.train_positives, cfg.train_negatives, pair_seed, false);
        const BinaryTask tgt = binary_digit_task(
            test_pool.x, test_pool.y, cfg.digits[ti], cfg.excluded_digits,
            cfg.test_positives, cfg.test_negatives, pair_seed + 17, true);
        ds.dims = src.x.cols();
        ds.num_classes = 2;
        ds.source_labeled_x = src.x;
        ds.source_labeled_y = src.y;
        ds.source_unlabeled = src.x;
        ds.target_unlabeled = tgt.x;
        split_dev_test(tgt.x, tgt.y, pair_seed + 31, ds);
        validate_dataset(ds);
      } catch (const std::exception& e) {
        report.failures.push_back("pair " + pair_name + ": " + e.what());
        continue;
      }

      for (Mode method : cfg.methods) {
        const std::string where = mode_name(method) + " pair " + pair_name;
        try {
          ExperimentConfig pair_cfg = cfg;
          pair_cfg.train.seed = pair_seed;
          const GridSearchResult gs = run_method(pair_cfg, ds, method);
          record_cell_failures(where, gs.cells, report.failures);
          if (gs.found) {
            report.matrices[mode_name(method)](si, ti) = gs.test_accuracy;
            const std::string dir =
                task_dir + "/" + mode_name(method) + "/pair_" + pair_name;
            fs::create_directories(dir);
            write_text(dir + "/trace.csv", trace_csv_text(gs.best_trace));
          } else {
            report.failures.push_back(where + ": no grid cell trained successfully");
          }
        } catch (const std::exception& e) {
          report.failures.push_back(where + ": " + e.what());
        }
      }
    }
  }

  for (Mode method : cfg.methods) {
    const Matrix& m = report.matrices[mode_name(method)];
    std::string text = "source_digit";
    for (int d : cfg.digits) text += ',' + std::to_string(d);
    text += '\n';
    for (std::size_t si = 0; si < n; ++si) {
      text += std::to_string(cfg.digits[si]);
      for (std::size_t ti = 0; ti < n; ++ti) text += ',' + format_sig(m(si, ti));
      text += '\n';
    }
    write_text(task_dir + "/matrix_" + mode_name(method) + ".csv", text);
  }

  report.ok = report.failures.empty();
  return report;
}

}  // namespace dauto
