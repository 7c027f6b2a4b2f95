// dauto/experiment.hpp

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
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dauto/data.hpp"
#include "dauto/model.hpp"
#include "dauto/tensor.hpp"

namespace dauto {

inline constexpr const char* kVersion = "1.0.0";

/// Everything a run needs, resolvable from a key=value config file plus
/// command-line overrides. One dataset source must be active: "synthetic"
/// (generator spec), "idx" (image/label binary pairs for source and
/// target), or "sparse" (text bag-of-words files).
struct ExperimentConfig {
  std::string task = "two_moons";
  std::string dataset = "synthetic";  // synthetic | idx | sparse

  SyntheticSpec synthetic = {.generator = SyntheticGenerator::kTwoMoonsRotation,
                             .rotation_deg = 30.0,
                             .shift = {},
                             .samples_per_domain = 500,
                             .noise_std = 0.1,
                             .seed = 0};

  std::string source_images, source_labels;  // idx
  std::string target_images, target_labels;
  std::string source_sparse, target_sparse;  // sparse text
  std::size_t sparse_dim = 0;
  bool tf_normalize = false;

  std::string source_name = "source";  // display names for reports
  std::string target_name = "target";

  // Digit-slice protocol (idx datasets; also drives run_digit_matrix).
  std::vector<int> digits;                   // positive digits for the matrix
  std::set<int> excluded_digits = {3, 7, 8, 9};
  std::size_t train_positives = 500, train_negatives = 500;
  std::size_t test_positives = 750, test_negatives = 750;

  std::vector<std::size_t> hidden_dims = {32, 16};
  double dropout = 0.0;

  TrainConfig train;  // base optimizer/schedule settings; mode set per method

  std::vector<Mode> methods = {Mode::kNoAdapt, Mode::kAeOnly, Mode::kDann, Mode::kDauto};
  std::vector<double> lambda_grid = {0.01};
  std::vector<double> mu_grid = {0.01};
  std::vector<double> fractions = {0.2, 0.5, 0.8, 1.0};

  std::string outdir = "out";
  std::size_t jobs = 1;
};

/// Parses "key=value" lines ('#' comments and blank lines skipped) into an
/// ordered key/value list. Later duplicates override earlier ones when the
/// list is resolved.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

/// Resolves key/value pairs into a config, starting from defaults. Unknown
/// keys or unparsable values are collected and reported together in one
/// exception, so a bad config fails with the complete list of problems.
ExperimentConfig parse_experiment_config(
    const std::vector<std::pair<std::string, std::string>>& entries);

/// Canonical key=value text of a fully resolved config. Reparsing the echo
/// reproduces the config exactly (doubles are written round-trip precise),
/// which is what makes reruns byte-for-byte reproducible.
std::string echo_config(const ExperimentConfig& cfg);

/// Checks everything checkable before training: dataset source complete
/// and files present, grids/fractions/methods well-formed, architecture
/// and optimizer settings valid. Throws one exception listing every
/// problem found.
void validate_experiment(const ExperimentConfig& cfg);

/// Materializes the configured dataset (synthetic draw, idx load with
/// seeded 50/50 target dev/test split, or sparse load).
DomainPairDataset build_dataset(const ExperimentConfig& cfg);

/// Domain-separability proxy measured on frozen representations: trains a
/// small softmax probe (AdaDelta, fixed step count, seeded) to tell the
/// two representation sets apart and returns 2(1-2e) for its balanced
/// error e on those same representations.
double representation_proxy_a(const Matrix& source_reps, const Matrix& target_reps,
                              std::uint64_t seed);

struct MethodResult {
  Mode method = Mode::kNoAdapt;
  bool ok = false;
  std::string error;            // set when the method produced no usable model
  double best_lambda = 0.0, best_mu = 0.0;
  double dev_accuracy = 0.0, test_accuracy = 0.0;
  double proxy_a_before = 0.0, proxy_a_after = 0.0;
  std::size_t best_epoch = 0;
  std::string stop_reason;
  std::vector<GridCell> cells;
  std::string dir;              // where this method's files were written
};

struct SweepRow {
  std::string method;
  double fraction = 0.0;
  double test_accuracy = 0.0;
};

struct RunReport {
  bool ok = false;              // every requested run completed, no failed cells
  std::string task;
  std::uint64_t seed = 0;
  std::string version;
  std::string config_echo;
  std::vector<MethodResult> methods;
  std::vector<SweepRow> sweep_rows;            // run_fraction_sweep only
  std::map<std::string, Matrix> matrices;      // run_digit_matrix: method -> accuracies
  std::vector<int> digits;                     // matrix row/column order
  std::vector<std::string> failures;           // human-readable failure list
};

/// Trains every requested method on the configured dataset with identical
/// seeds and architecture, each through its own coefficient grid (no_adapt
/// pins both to 0, dann pins lambda, ae_only pins mu). Writes, per method,
/// <outdir>/<task>/<method>/{trace.csv, report.csv, model.bin, embed.tsv}
/// plus per-cell traces, and at task level accuracy.csv and config.echo.
RunReport run_experiment(const ExperimentConfig& cfg);

/// Repeats the experiment at each configured label fraction using nested
/// class-stratified subsampling under a fixed seed, and writes the
/// long-format sweep.csv (method, fraction, accuracy) at task level.
RunReport run_fraction_sweep(const ExperimentConfig& cfg);

/// Binary digit-slice transfer matrix: for every (source digit, target
/// digit) pair, builds the positive-vs-rest tasks from the idx train/test
/// pools, adapts, and tabulates test accuracy into matrix_<method>.csv.
/// Diagonal cells train and evaluate on the same digit — the in-domain
/// reference points.
RunReport run_digit_matrix(const ExperimentConfig& cfg);

}  // namespace dauto
