// dauto/model.cpp

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

#include "dauto/model.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <thread>
#include <utility>

#include "dauto/eval.hpp"

namespace dauto {

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::kNoAdapt: return "no_adapt";
    case Mode::kDann: return "dann";
    case Mode::kAeOnly: return "ae_only";
    case Mode::kDauto: return "dauto";
  }
  throw std::logic_error("mode_name: unknown mode value");
}

Mode parse_mode(const std::string& name) {
  if (name == "no_adapt") return Mode::kNoAdapt;
  if (name == "dann") return Mode::kDann;
  if (name == "ae_only") return Mode::kAeOnly;
  if (name == "dauto") return Mode::kDauto;
  throw std::invalid_argument("unknown mode '" + name +
                              "' (expected no_adapt, dann, ae_only, or dauto)");
}

void validate_config(const TrainConfig& cfg) {
  auto nonneg = [](double v, const char* what) {
    if (!(std::isfinite(v) && v >= 0.0)) {
      throw std::invalid_argument(std::string("config: ") + what +
                                  " must be finite and nonnegative, got " +
                                  std::to_string(v));
    }
  };
  nonneg(cfg.lambda, "lambda");
  nonneg(cfg.mu, "mu");
  nonneg(cfg.weight_decay, "weight_decay");
  if (!std::isfinite(cfg.lr)) throw std::invalid_argument("config: lr is not finite");
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) {
    throw std::invalid_argument("config: rho must be in (0,1), got " +
                                std::to_string(cfg.rho));
  }
  if (!(cfg.epsilon > 0.0)) {
    throw std::invalid_argument("config: epsilon must be positive, got " +
                                std::to_string(cfg.epsilon));
  }
  if (cfg.batch_size == 0) throw std::invalid_argument("config: batch_size must be positive");
  if (cfg.max_epochs == 0) throw std::invalid_argument("config: max_epochs must be positive");
  switch (cfg.mode) {
    case Mode::kNoAdapt:
      if (cfg.lambda != 0.0 || cfg.mu != 0.0) {
        throw std::invalid_argument("config: mode no_adapt requires lambda = mu = 0, got "
                                    "lambda=" + std::to_string(cfg.lambda) +
                                    " mu=" + std::to_string(cfg.mu));
      }
      break;
    case Mode::kDann:
      if (cfg.lambda != 0.0) {
        throw std::invalid_argument("config: mode dann requires lambda = 0, got " +
                                    std::to_string(cfg.lambda));
      }
      break;
    case Mode::kAeOnly:
      if (cfg.mu != 0.0) {
        throw std::invalid_argument("config: mode ae_only requires mu = 0, got " +
                                    std::to_string(cfg.mu));
      }
      break;
    case Mode::kDauto:
      break;
  }
  if (cfg.mu != 0.0 && cfg.batch_size < 2) {
    throw std::invalid_argument(
        "config: batch_size must be at least 2 when mu > 0 so the unlabeled batch can "
        "hold both domains");
  }
}

bool traces_equal(const TrainTrace& a, const TrainTrace& b) {
  if (a.epochs.size() != b.epochs.size() || a.best_epoch != b.best_epoch ||
      a.stop_reason != b.stop_reason || a.init_scheme != b.init_scheme) {
    return false;
  }
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    const EpochStats& x = a.epochs[i];
    const EpochStats& y = b.epochs[i];
    if (x.loss_y != y.loss_y || x.loss_r != y.loss_r || x.loss_d != y.loss_d ||
        x.dev_accuracy != y.dev_accuracy) {
      return false;  // wall_seconds deliberately not compared
    }
  }
  return true;
}

namespace {

std::vector<AffineLayer> build_encoder(std::size_t input_dim,
                                       const std::vector<std::size_t>& hidden, int classes,
                                       double dropout) {
  if (input_dim == 0) throw std::invalid_argument("DautoModel: input_dim must be positive");
  if (hidden.empty()) {
    throw std::invalid_argument("DautoModel: at least one hidden layer is required");
  }
  for (std::size_t h : hidden) {
    if (h == 0) throw std::invalid_argument("DautoModel: hidden dims must be positive");
  }
  if (classes < 2) {
    throw std::invalid_argument("DautoModel: need at least 2 classes, got " +
                                std::to_string(classes));
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("DautoModel: dropout rate must be in [0,1), got " +
                                std::to_string(dropout));
  }
  std::vector<AffineLayer> layers;
  std::size_t in = input_dim;
  for (std::size_t h : hidden) {
    layers.emplace_back(in, h);
    in = h;
  }
  return layers;
}

// Exact mirror of the encoder: hidden dims reversed, ending back at the
// input dimension.
std::vector<AffineLayer> build_decoder(std::size_t input_dim,
                                       const std::vector<std::size_t>& hidden) {
  std::vector<AffineLayer> layers;
  for (std::size_t i = hidden.size(); i-- > 0;) {
    const std::size_t out = (i == 0) ? input_dim : hidden[i - 1];
    layers.emplace_back(hidden[i], out);
  }
  return layers;
}

}  // namespace

DautoModel::DautoModel(std::size_t input_dim, std::vector<std::size_t> hidden_dims,
                       int num_classes, double dropout_rate, std::uint64_t seed)
    : encoder(build_encoder(input_dim, hidden_dims, num_classes, dropout_rate)),
      decoder(build_decoder(input_dim, hidden_dims)),
      predictor(hidden_dims.back(), static_cast<std::size_t>(num_classes)),
      domain_head(hidden_dims.back(), 2),
      input_dim_(input_dim),
      hidden_dims_(std::move(hidden_dims)),
      num_classes_(num_classes),
      dropout_rate_(dropout_rate) {
  Rng rng(seed);
  for (auto& l : encoder) l.init_gaussian(rng, 1.0 / std::sqrt(double(l.in_dim())));
  for (auto& l : decoder) l.init_gaussian(rng, 1.0 / std::sqrt(double(l.in_dim())));
  predictor.init_gaussian(rng, 1.0 / std::sqrt(double(predictor.in_dim())));
  domain_head.init_gaussian(rng, 1.0 / std::sqrt(double(domain_head.in_dim())));
}

Matrix DautoModel::encode(const Matrix& x) {
  if (x.cols() != input_dim_) {
    throw std::invalid_argument("encode: input has " + std::to_string(x.cols()) +
                                " columns, model expects " + std::to_string(input_dim_));
  }
  Matrix h = x;
  for (auto& l : encoder) h = relu_forward(l.forward(h));
  return h;
}

Matrix DautoModel::predict_probs(const Matrix& x) {
  return softmax_forward(predictor.forward(encode(x)));
}

std::vector<int> DautoModel::predict(const Matrix& x) {
  return row_argmax(predict_probs(x));
}

Matrix DautoModel::reconstruct(const Matrix& x) {
  Matrix h = encode(x);
  for (std::size_t i = 0; i < decoder.size(); ++i) {
    h = decoder[i].forward(h);
    if (i + 1 < decoder.size()) h = relu_forward(h);  // final layer stays linear
  }
  return h;
}

Matrix DautoModel::domain_probs(const Matrix& x) {
  return softmax_forward(domain_head.forward(encode(x)));
}

Matrix DautoModel::encode_cached(const Matrix& x, Rng* dropout_rng, EncoderCaches& caches) {
  caches.pre_activation.clear();
  caches.mask.clear();
  const bool drop = dropout_rate_ > 0.0;
  Matrix h = x;
  for (auto& l : encoder) {
    Matrix a = l.forward(h);
    caches.pre_activation.push_back(a);
    h = relu_forward(a);
    if (drop) {
      Matrix m = dropout_mask(*dropout_rng, h.rows(), h.cols(), dropout_rate_);
      h = mul(h, m);
      caches.mask.push_back(std::move(m));
    }
  }
  return h;
}

void DautoModel::encoder_backward(const Matrix& d_z, const EncoderCaches& caches,
                                  std::vector<Matrix>& grads) {
  Matrix d = d_z;
  for (std::size_t i = encoder.size(); i-- > 0;) {
    if (!caches.mask.empty()) d = mul(d, caches.mask[i]);
    d = relu_backward(caches.pre_activation[i], d);
    LayerGrads lg = encoder[i].backward(d);
    grads[2 * i] = add(grads[2 * i], lg.d_weight);
    grads[2 * i + 1] = add(grads[2 * i + 1], lg.d_bias);
    d = std::move(lg.d_input);
  }
}

std::vector<ParamRef> DautoModel::params() {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < encoder.size(); ++i) {
    out.push_back({"encoder" + std::to_string(i) + ".weight", &encoder[i].weight});
    out.push_back({"encoder" + std::to_string(i) + ".bias", &encoder[i].bias});
  }
  for (std::size_t i = 0; i < decoder.size(); ++i) {
    out.push_back({"decoder" + std::to_string(i) + ".weight", &decoder[i].weight});
    out.push_back({"decoder" + std::to_string(i) + ".bias", &decoder[i].bias});
  }
  out.push_back({"predictor.weight", &predictor.weight});
  out.push_back({"predictor.bias", &predictor.bias});
  out.push_back({"domain.weight", &domain_head.weight});
  out.push_back({"domain.bias", &domain_head.bias});
  return out;
}

LossParts DautoModel::joint_loss(const Matrix& labeled_x, const std::vector<int>& labeled_y,
                                 const Matrix& unlabeled_x,
                                 const std::vector<int>& domain_tags,
                                 const TrainConfig& cfg, std::vector<Matrix>* grads,
                                 Rng* dropout_rng) {
  if (labeled_x.rows() == 0) throw std::invalid_argument("joint_loss: empty labeled batch");
  if (labeled_x.cols() != input_dim_) {
    throw std::invalid_argument("joint_loss: labeled batch has " +
                                std::to_string(labeled_x.cols()) + " columns, expected " +
                                std::to_string(input_dim_));
  }
  if (labeled_x.rows() != labeled_y.size()) {
    throw std::invalid_argument("joint_loss: " + std::to_string(labeled_x.rows()) +
                                " labeled rows vs " + std::to_string(labeled_y.size()) +
                                " labels");
  }
  const bool use_recon = cfg.lambda != 0.0;
  const bool use_domain = cfg.mu != 0.0;
  if (use_recon || use_domain) {
    if (unlabeled_x.rows() == 0) {
      throw std::invalid_argument(
          "joint_loss: unlabeled batch required when lambda or mu is nonzero");
    }
    if (unlabeled_x.cols() != input_dim_) {
      throw std::invalid_argument("joint_loss: unlabeled batch has " +
                                  std::to_string(unlabeled_x.cols()) +
                                  " columns, expected " + std::to_string(input_dim_));
    }
  }
  if (use_domain) {
    if (domain_tags.size() != unlabeled_x.rows()) {
      throw std::invalid_argument("joint_loss: " + std::to_string(domain_tags.size()) +
                                  " domain tags vs " + std::to_string(unlabeled_x.rows()) +
                                  " unlabeled rows");
    }
    bool has0 = false, has1 = false;
    for (int t : domain_tags) {
      if (t == 0) has0 = true;
      else if (t == 1) has1 = true;
      else throw std::invalid_argument("joint_loss: domain tag " + std::to_string(t) +
                                       " is not 0/1");
    }
    if (!has0 || !has1) {
      throw std::invalid_argument(
          "joint_loss: domain loss undefined — unlabeled batch contains a single domain");
    }
  }
  if (dropout_rate_ > 0.0 && dropout_rng == nullptr) {
    throw std::invalid_argument("joint_loss: dropout rate is nonzero but no rng supplied");
  }

  std::vector<ParamRef> ps;
  if (grads) {
    ps = params();
    grads->clear();
    grads->reserve(ps.size());
    for (const auto& p : ps) grads->emplace_back(p.value->rows(), p.value->cols());
  }
  // Gradient slots follow params() order: encoder pairs, decoder pairs,
  // then predictor and domain head (weight before bias in each pair).
  const std::size_t dec_base = 2 * encoder.size();
  const std::size_t pred_w = dec_base + 2 * decoder.size();
  const std::size_t dom_w = pred_w + 2;

  LossParts parts;

  // Labeled source pass: classification loss through encoder + predictor.
  // Its backward must finish before the unlabeled forward overwrites the
  // encoder layers' cached inputs.
  EncoderCaches labeled_caches;
  Matrix z_s = encode_cached(labeled_x, dropout_rng, labeled_caches);
  Matrix probs = softmax_forward(predictor.forward(z_s));
  CrossEntropyResult ce = cross_entropy(probs, one_hot(labeled_y, num_classes_));
  parts.label = ce.loss;
  if (grads) {
    LayerGrads pg = predictor.backward(ce.d_logits);
    (*grads)[pred_w] = std::move(pg.d_weight);
    (*grads)[pred_w + 1] = std::move(pg.d_bias);
    encoder_backward(pg.d_input, labeled_caches, *grads);
  }

  // Unlabeled mixed-domain pass: one shared encoder forward feeds both the
  // reconstruction and the domain paths; their representation gradients
  // are summed and pushed through the encoder once.
  if (use_recon || use_domain) {
    EncoderCaches unlabeled_caches;
    Matrix z_u = encode_cached(unlabeled_x, dropout_rng, unlabeled_caches);
    Matrix d_z(z_u.rows(), z_u.cols());

    if (use_recon) {
      std::vector<Matrix> dec_pre;
      Matrix h = z_u;
      for (std::size_t i = 0; i < decoder.size(); ++i) {
        Matrix a = decoder[i].forward(h);
        if (i + 1 < decoder.size()) {
          dec_pre.push_back(a);
          h = relu_forward(a);
        } else {
          h = std::move(a);
        }
      }
      ReconResult rr = recon_loss(unlabeled_x, h, ReconNorm::squared_l2);
      parts.recon = rr.loss;
      if (grads) {
        Matrix d = scale(rr.d_xhat, cfg.lambda);  // objective carries lambda * recon
        for (std::size_t i = decoder.size(); i-- > 0;) {
          if (i + 1 < decoder.size()) d = relu_backward(dec_pre[i], d);
          LayerGrads lg = decoder[i].backward(d);
          (*grads)[dec_base + 2 * i] = add((*grads)[dec_base + 2 * i], lg.d_weight);
          (*grads)[dec_base + 2 * i + 1] = add((*grads)[dec_base + 2 * i + 1], lg.d_bias);
          d = std::move(lg.d_input);
        }
        d_z = add(d_z, d);
      }
    }

    if (use_domain) {
      const GradReversal grl{cfg.mu};
      Matrix dprobs = softmax_forward(domain_head.forward(grl_forward(grl, z_u)));
      CrossEntropyResult dce = cross_entropy(dprobs, one_hot(domain_tags, 2));
      parts.domain = dce.loss;
      if (grads) {
        // The head keeps its true gradient (it is learning to tell the
        // domains apart); only the encoder sees the reversed, mu-scaled one.
        LayerGrads hg = domain_head.backward(dce.d_logits);
        (*grads)[dom_w] = std::move(hg.d_weight);
        (*grads)[dom_w + 1] = std::move(hg.d_bias);
        d_z = add(d_z, grl_backward(grl, hg.d_input));
      }
    }

    if (grads) encoder_backward(d_z, unlabeled_caches, *grads);
  }

  if (grads && cfg.weight_decay != 0.0) {
    for (std::size_t i = 0; i < ps.size(); i += 2) {  // weights only, not biases
      (*grads)[i] = add((*grads)[i], scale(*ps[i].value, cfg.weight_decay));
    }
  }

  parts.total = parts.label + cfg.lambda * parts.recon + cfg.mu * parts.domain;
  return parts;
}

TrainTrace train(DautoModel& model, const DomainPairDataset& data, const TrainConfig& cfg) {
  validate_config(cfg);
  validate_dataset(data);
  if (data.dims != model.input_dim()) {
    throw std::invalid_argument("train: dataset dim " + std::to_string(data.dims) +
                                " does not match model input dim " +
                                std::to_string(model.input_dim()));
  }
  if (data.num_classes != model.num_classes()) {
    throw std::invalid_argument("train: dataset has " + std::to_string(data.num_classes) +
                                " classes, model has " +
                                std::to_string(model.num_classes()));
  }
  const std::size_t m = data.source_labeled_x.rows();
  if (m == 0) throw std::invalid_argument("train: source labeled set is empty");

  const bool use_recon = cfg.lambda != 0.0;
  const bool use_domain = cfg.mu != 0.0;
  const bool use_unlabeled = use_recon || use_domain;
  if (use_unlabeled &&
      (data.source_unlabeled.rows() == 0 || data.target_unlabeled.rows() == 0)) {
    throw std::invalid_argument(
        "train: both unlabeled pools must be nonempty when lambda or mu is nonzero");
  }
  const bool have_dev = data.target_dev_x.rows() > 0;
  if (cfg.patience > 0 && !have_dev) {
    throw std::invalid_argument("train: patience > 0 requires a nonempty dev split");
  }

  Rng root(cfg.seed);
  Rng shuffle_rng = root.split();
  Rng sample_rng = root.split();
  Rng dropout_rng = root.split();

  std::vector<ParamRef> ps = model.params();
  AdaDeltaState opt(cfg.rho, cfg.epsilon, cfg.lr, ps);
  std::vector<Matrix> grads;

  TrainTrace trace;
  trace.init_scheme = "gaussian std=1/sqrt(fan_in)";

  const std::size_t batch = cfg.batch_size;
  const std::size_t steps = (m + batch - 1) / batch;
  const std::size_t unlabeled_src = (batch + 1) / 2;  // source half rounds up
  const std::size_t unlabeled_tgt = batch / 2;
  std::vector<int> tags(unlabeled_src, 0);
  tags.insert(tags.end(), unlabeled_tgt, 1);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);

  double best_dev = -1.0;
  std::size_t epochs_since_best = 0;
  std::vector<Matrix> best_params;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(order);
    double sum_y = 0.0, sum_r = 0.0, sum_d = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t lo = s * batch;
      const std::size_t hi = std::min(m, lo + batch);
      const std::vector<std::size_t> batch_idx(order.begin() + lo, order.begin() + hi);
      Matrix xs = take_rows(data.source_labeled_x, batch_idx);
      std::vector<int> ys;
      ys.reserve(batch_idx.size());
      for (std::size_t i : batch_idx) ys.push_back(data.source_labeled_y[i]);

      Matrix xu;
      if (use_unlabeled) {
        std::vector<std::size_t> uidx;
        uidx.reserve(unlabeled_src);
        for (std::size_t k = 0; k < unlabeled_src; ++k) {
          uidx.push_back(sample_rng.uniform_index(data.source_unlabeled.rows()));
        }
        Matrix us = take_rows(data.source_unlabeled, uidx);
        uidx.clear();
        for (std::size_t k = 0; k < unlabeled_tgt; ++k) {
          uidx.push_back(sample_rng.uniform_index(data.target_unlabeled.rows()));
        }
        xu = vstack(us, take_rows(data.target_unlabeled, uidx));
      }

      LossParts parts;
      try {
        parts = model.joint_loss(xs, ys, xu, use_unlabeled ? tags : std::vector<int>{},
                                 cfg, &grads, &dropout_rng);
        if (!std::isfinite(parts.label) || !std::isfinite(parts.recon) ||
            !std::isfinite(parts.domain)) {
          throw std::runtime_error("non-finite loss (label=" + std::to_string(parts.label) +
                                   " recon=" + std::to_string(parts.recon) +
                                   " domain=" + std::to_string(parts.domain) + ")");
        }
        adadelta_step(opt, ps, grads);
      } catch (const std::runtime_error& e) {
        trace.stop_reason = "diverged";
        throw TrainingDiverged("train: diverged at epoch " + std::to_string(epoch) +
                                   " step " + std::to_string(s) + ": " + e.what(),
                               trace);
      }
      sum_y += parts.label;
      sum_r += parts.recon;
      sum_d += parts.domain;
    }

    EpochStats st;
    st.loss_y = sum_y / double(steps);
    st.loss_r = sum_r / double(steps);
    st.loss_d = sum_d / double(steps);
    if (have_dev) {
      st.dev_accuracy = accuracy(model.predict(data.target_dev_x), data.target_dev_y);
    }
    st.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    trace.epochs.push_back(st);

    if (have_dev) {
      if (st.dev_accuracy > best_dev) {
        best_dev = st.dev_accuracy;
        trace.best_epoch = epoch;
        epochs_since_best = 0;
        best_params.clear();
        best_params.reserve(ps.size());
        for (const auto& p : ps) best_params.push_back(*p.value);
      } else {
        ++epochs_since_best;
        if (cfg.patience > 0 && epochs_since_best >= cfg.patience) {
          trace.stop_reason = "early_stop";
          break;
        }
      }
    } else {
      trace.best_epoch = epoch;  // no dev set: final parameters are the result
    }
  }

  if (trace.stop_reason.empty()) trace.stop_reason = "max_epochs";
  if (!best_params.empty()) {
    for (std::size_t i = 0; i < ps.size(); ++i) *ps[i].value = best_params[i];
  }
  return trace;
}

GridSearchResult grid_search(const DomainPairDataset& data, const TrainConfig& base_cfg,
                             const std::vector<double>& lambda_grid,
                             const std::vector<double>& mu_grid, const ModelSpec& spec,
                             std::size_t jobs) {
  if (lambda_grid.empty() || mu_grid.empty()) {
    throw std::invalid_argument("grid_search: lambda and mu grids must be nonempty");
  }
  validate_dataset(data);

  const std::size_t total = lambda_grid.size() * mu_grid.size();
  GridSearchResult result;
  result.cells.resize(total);

  struct LocalBest {
    bool found = false;
    double dev = -1.0;
    std::size_t index = 0;
    std::optional<DautoModel> model;
    TrainTrace trace;
    TrainConfig cfg;
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&](LocalBest& best) {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= total) return;
      GridCell& cell = result.cells[c];
      cell.lambda = lambda_grid[c / mu_grid.size()];
      cell.mu = mu_grid[c % mu_grid.size()];
      cell.cell_index = c;
      TrainConfig cfg = base_cfg;
      cfg.lambda = cell.lambda;
      cfg.mu = cell.mu;
      cfg.seed = base_cfg.seed + c;
      try {
        validate_config(cfg);
        DautoModel model(data.dims, spec.hidden_dims, data.num_classes, spec.dropout_rate,
                         cfg.seed);
        TrainTrace trace = train(model, data, cfg);
        const double dev =
            trace.epochs.empty() ? 0.0 : trace.epochs[trace.best_epoch].dev_accuracy;
        cell.dev_accuracy = dev;
        cell.trace = trace;
        if (!best.found || dev > best.dev || (dev == best.dev && c < best.index)) {
          best.found = true;
          best.dev = dev;
          best.index = c;
          best.model.emplace(std::move(model));
          best.trace = std::move(trace);
          best.cfg = cfg;
        }
      } catch (const TrainingDiverged& e) {
        cell.failed = true;
        cell.error = e.what();
        cell.trace = e.trace;  // keep the partial history for the record
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
    }
  };

  std::size_t nthreads = jobs == 0 ? 1 : std::min(jobs, total);
  std::vector<LocalBest> bests(nthreads);
  if (nthreads <= 1) {
    worker(bests[0]);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
      pool.emplace_back([&worker, &bests, t] { worker(bests[t]); });
    }
    for (auto& th : pool) th.join();
  }

  // Deterministic winner regardless of thread scheduling: highest dev
  // accuracy, earliest row-major cell on ties.
  std::size_t best_index = 0;
  for (const auto& b : bests) {
    if (!b.found) continue;
    if (!result.found || b.dev > result.best_dev_accuracy ||
        (b.dev == result.best_dev_accuracy && b.index < best_index)) {
      result.found = true;
      result.best_dev_accuracy = b.dev;
      best_index = b.index;
      result.best_cfg = b.cfg;
      result.best_trace = b.trace;
      result.best_model = b.model;
    }
  }

  if (result.found && data.target_test_x.rows() > 0) {
    result.test_accuracy =
        accuracy(result.best_model->predict(data.target_test_x), data.target_test_y);
  }
  return result;
}

namespace {

constexpr char kCheckpointMagic[6] = {'D', 'A', 'U', 'T', 'O', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

void collect_params(const DautoModel& m, std::vector<const Matrix*>& out) {
  for (const auto& l : m.encoder) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  for (const auto& l : m.decoder) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  out.push_back(&m.predictor.weight);
  out.push_back(&m.predictor.bias);
  out.push_back(&m.domain_head.weight);
  out.push_back(&m.domain_head.bias);
}

void write_u32le(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {
      static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
      static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f64le(std::ofstream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t read_u32le(const std::vector<unsigned char>& buf, std::size_t& off,
                         const std::string& path, const char* what) {
  if (off + 4 > buf.size()) {
    throw std::runtime_error("'" + path + "': truncated reading " + what +
                             " at byte offset " + std::to_string(off));
  }
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | buf[off + i];
  off += 4;
  return v;
}

double read_f64le(const std::vector<unsigned char>& buf, std::size_t& off,
                  const std::string& path, const char* what) {
  if (off + 8 > buf.size()) {
    throw std::runtime_error("'" + path + "': truncated reading " + what +
                             " at byte offset " + std::to_string(off));
  }
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | buf[off + i];
  off += 8;
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_checkpoint(const DautoModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_u32le(out, kCheckpointVersion);
  write_u32le(out, static_cast<std::uint32_t>(model.input_dim()));
  write_u32le(out, static_cast<std::uint32_t>(model.hidden_dims().size()));
  for (std::size_t h : model.hidden_dims()) write_u32le(out, static_cast<std::uint32_t>(h));
  write_u32le(out, static_cast<std::uint32_t>(model.num_classes()));
  write_f64le(out, model.dropout_rate());
  std::vector<const Matrix*> ordered;
  collect_params(model, ordered);
  for (const Matrix* m : ordered) {
    for (std::size_t i = 0; i < m->size(); ++i) write_f64le(out, m->data()[i]);
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

DautoModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kCheckpointMagic) ||
      std::memcmp(buf.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw std::runtime_error("'" + path + "': bad checkpoint magic at byte offset 0");
  }
  std::size_t off = sizeof(kCheckpointMagic);
  const std::uint32_t version = read_u32le(buf, off, path, "version");
  if (version != kCheckpointVersion) {
    throw std::runtime_error("'" + path + "': unsupported checkpoint version " +
                             std::to_string(version));
  }
  const std::uint32_t input_dim = read_u32le(buf, off, path, "input dim");
  const std::uint32_t num_hidden = read_u32le(buf, off, path, "hidden layer count");
  std::vector<std::size_t> hidden(num_hidden);
  for (std::uint32_t i = 0; i < num_hidden; ++i) {
    hidden[i] = read_u32le(buf, off, path, "hidden dim");
  }
  const std::uint32_t classes = read_u32le(buf, off, path, "class count");
  const double dropout = read_f64le(buf, off, path, "dropout rate");

  DautoModel model(input_dim, hidden, static_cast<int>(classes), dropout, /*seed=*/0);
  std::vector<const Matrix*> ordered;
  collect_params(model, ordered);
  for (const Matrix* cm : ordered) {
    Matrix* m = const_cast<Matrix*>(cm);  // layout fixed; values replaced in place
    for (std::size_t i = 0; i < m->size(); ++i) {
      m->data()[i] = read_f64le(buf, off, path, "parameter");
    }
  }
  if (off != buf.size()) {
    throw std::runtime_error("'" + path + "': " + std::to_string(buf.size() - off) +
                             " trailing bytes at offset " + std::to_string(off));
  }
  return model;
}

}  // namespace dauto
