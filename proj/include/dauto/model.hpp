// dauto/model.hpp

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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dauto/data.hpp"
#include "dauto/nn.hpp"
#include "dauto/optim.hpp"
#include "dauto/tensor.hpp"

namespace dauto {

/// The model family: no_adapt trains a plain classifier, ae_only adds the
/// reconstruction term, dann adds the adversarial domain term, dauto uses
/// both. The flags only constrain the allowed coefficients — training
/// behavior is driven entirely by lambda/mu, so a mode and its explicit
/// coefficient setting are interchangeable.
enum class Mode { kNoAdapt, kDann, kAeOnly, kDauto };

std::string mode_name(Mode m);
Mode parse_mode(const std::string& name);  // throws on an unknown name

struct TrainConfig {
  double lambda = 0.0;        // reconstruction weight, >= 0
  double mu = 0.0;            // adversarial weight, >= 0
  double lr = 1.0;            // AdaDelta scale on the computed update
  double rho = 0.95;          // AdaDelta decay
  double epsilon = 1e-6;      // AdaDelta conditioner
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t patience = 10;  // epochs without dev improvement; 0 disables
  std::uint64_t seed = 0;
  double weight_decay = 0.0;  // optional l2 pull on weights, >= 0
  Mode mode = Mode::kDauto;
};

/// Rejects contradictory settings: no_adapt requires lambda == mu == 0,
/// dann requires lambda == 0, ae_only requires mu == 0; coefficients must
/// be nonnegative and finite, batch size and max_epochs positive.
void validate_config(const TrainConfig& cfg);

struct EpochStats {
  double loss_y = 0.0;        // mean label cross-entropy over the epoch's steps
  double loss_r = 0.0;        // mean reconstruction loss (0 when lambda == 0)
  double loss_d = 0.0;        // mean domain cross-entropy (0 when mu == 0)
  double dev_accuracy = 0.0;  // target-dev accuracy after the epoch
  double wall_seconds = 0.0;  // measured; excluded from trace comparison
};

struct TrainTrace {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;     // epoch whose parameters the model keeps
  std::string stop_reason;        // "max_epochs", "early_stop", or "diverged"
  std::string init_scheme;        // how weights were drawn, for the record
};

/// Field-by-field equality except wall_seconds, which is timing noise.
bool traces_equal(const TrainTrace& a, const TrainTrace& b);

/// Thrown when a training step produces a non-finite loss or gradient.
/// Carries the trace of the epochs that completed before the blow-up.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, TrainTrace trace_in)
      : std::runtime_error(what), trace(std::move(trace_in)) {}
  TrainTrace trace;
};

struct LossParts {
  double total = 0.0;   // label + lambda*recon + mu*domain, for monitoring
  double label = 0.0;   // cross-entropy of the class predictor
  double recon = 0.0;   // mean squared-l2 reconstruction over the unlabeled batch
  double domain = 0.0;  // cross-entropy of the domain classifier
};

/// Shared-encoder network with three heads: a class predictor and a
/// mirrored decoder plus a domain classifier that sits behind gradient
/// reversal. The encoder output feeds all three, which is what couples the
/// classification objective to the reconstruction and domain-confusion
/// regularizers. Copyable (snapshots during training rely on that).
class DautoModel {
 public:
  /// Encoder runs input_dim -> hidden_dims (affine+ReLU each); the decoder
  /// mirrors it back with a linear last layer; predictor and domain head
  /// are single affine layers on the final hidden representation. Weights
  /// are Normal(0, 1/fan_in), biases zero, drawn deterministically from
  /// `seed`. `dropout_rate` in [0,1) applies to hidden activations during
  /// loss computation only, never at inference.
  DautoModel(std::size_t input_dim, std::vector<std::size_t> hidden_dims,
             int num_classes, double dropout_rate, std::uint64_t seed);

  std::size_t input_dim() const { return input_dim_; }
  const std::vector<std::size_t>& hidden_dims() const { return hidden_dims_; }
  int num_classes() const { return num_classes_; }
  double dropout_rate() const { return dropout_rate_; }

  /// Final hidden representation (inference path, no dropout).
  Matrix encode(const Matrix& x);
  /// Class probabilities from the predictor head.
  Matrix predict_probs(const Matrix& x);
  /// Argmax class labels.
  std::vector<int> predict(const Matrix& x);
  /// Autoencoder output g(f(x)).
  Matrix reconstruct(const Matrix& x);
  /// Domain-head probabilities (reversal layer is identity here).
  Matrix domain_probs(const Matrix& x);

  /// One combined forward/backward over a labeled source batch and an
  /// unlabeled mixed-domain batch. Gradients (aligned with params()) are
  /// those of label + lambda*recon - mu*domain for everything except the
  /// domain head, which receives the true domain-loss gradient — descending
  /// both at once is the adversarial game: the head learns to separate
  /// domains while the encoder is pushed to blur them. Paths with a zero
  /// coefficient are skipped entirely (no arithmetic, no RNG draws), so a
  /// zeroed coefficient is bitwise-equivalent to the reduced model.
  /// `dropout_rng` must be supplied when dropout_rate > 0. Passing
  /// `grads = nullptr` computes losses only.
  LossParts joint_loss(const Matrix& labeled_x, const std::vector<int>& labeled_y,
                       const Matrix& unlabeled_x, const std::vector<int>& domain_tags,
                       const TrainConfig& cfg, std::vector<Matrix>* grads,
                       Rng* dropout_rng = nullptr);

  /// All trainable parameters in a stable order (encoder, decoder,
  /// predictor, domain head; weight before bias), with stable names.
  std::vector<ParamRef> params();

  // Layers are open for inspection and for surgical test setups.
  std::vector<AffineLayer> encoder;
  std::vector<AffineLayer> decoder;
  AffineLayer predictor;
  AffineLayer domain_head;

 private:
  // Encoder forward pass used by the training losses: keeps pre-activation
  // and dropout-mask caches so the matching backward can be replayed.
  struct EncoderCaches {
    std::vector<Matrix> pre_activation;
    std::vector<Matrix> mask;  // empty when dropout is off
  };
  Matrix encode_cached(const Matrix& x, Rng* dropout_rng, EncoderCaches& caches);
  // Backward through the cached encoder pass, accumulating into `grads`.
  void encoder_backward(const Matrix& d_z, const EncoderCaches& caches,
                        std::vector<Matrix>& grads);

  std::size_t input_dim_;
  std::vector<std::size_t> hidden_dims_;
  int num_classes_;
  double dropout_rate_;
};

/// Mini-batch training on the domain pair: each step takes one labeled
/// source batch (epoch-shuffled, no replacement) and one half-source
/// half-target unlabeled batch (with replacement), applies joint_loss
/// gradients through AdaDelta, and evaluates target-dev accuracy at every
/// epoch end. Stops at max_epochs or once `patience` epochs pass without a
/// strict dev improvement; the model is left holding the best-dev-epoch
/// parameters. Fully deterministic in cfg.seed. Throws TrainingDiverged
/// (with partial trace) on non-finite losses or gradients.
TrainTrace train(DautoModel& model, const DomainPairDataset& data,
                 const TrainConfig& cfg);

/// Architecture recipe grid_search uses to build one fresh model per cell.
struct ModelSpec {
  std::vector<std::size_t> hidden_dims;
  double dropout_rate = 0.0;
};

struct GridCell {
  double lambda = 0.0;
  double mu = 0.0;
  std::size_t cell_index = 0;    // row-major position; seed = base seed + index
  double dev_accuracy = 0.0;
  bool failed = false;
  std::string error;
  TrainTrace trace;              // this cell's own training history
};

struct GridSearchResult {
  bool found = false;            // at least one cell trained successfully
  TrainConfig best_cfg;
  TrainTrace best_trace;
  std::optional<DautoModel> best_model;
  double best_dev_accuracy = 0.0;
  double test_accuracy = 0.0;    // held-out test accuracy of the selected cell only
  std::vector<GridCell> cells;   // row-major: lambda outer, mu inner
};

/// Trains one model per (lambda, mu) cell with seed = base seed + cell
/// index, selects the cell with the best target-dev accuracy (first in
/// row-major order on ties), and reports held-out test accuracy for that
/// cell alone. Cell failures are recorded and skipped, not fatal. `jobs`
/// cells run concurrently; per-cell seeding makes parallel and serial runs
/// produce identical numbers.
GridSearchResult grid_search(const DomainPairDataset& data, const TrainConfig& base_cfg,
                             const std::vector<double>& lambda_grid,
                             const std::vector<double>& mu_grid, const ModelSpec& spec,
                             std::size_t jobs = 1);

/// Versioned binary checkpoint ("DAUTO1" magic, dimension header,
/// little-endian 64-bit floats in parameter order). Round-trips bitwise.
void save_checkpoint(const DautoModel& model, const std::string& path);
DautoModel load_checkpoint(const std::string& path);

}  // namespace dauto
