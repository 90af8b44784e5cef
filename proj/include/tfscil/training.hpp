// Copyright 2026 The tfscil Authors. All Rights Reserved.
//
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

// Losses and optimization loops.
//
//   base:        L = CE + w.cat * L_cat + w.reg * L_reg
//   incremental: L = L_new + w.old * L_old
//
// L_cat compares the canonicalization of a pseudo-context perturbation of
// each observation against the (stop-gradient) canonicalization of the
// observation itself. Classifier logits are cosine similarities.

#ifndef TFSCIL_TRAINING_HPP_
#define TFSCIL_TRAINING_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfscil/dataset_io.hpp"
#include "tfscil/nets.hpp"
#include "tfscil/ucpc.hpp"

namespace tfscil {

struct LossWeights {
  double cat = 0.05;
  double reg = 1e-4;
  double old = 1.0;
  void validate() const {
    if (!(cat >= 0 && reg >= 0 && old >= 0) || !std::isfinite(cat + reg + old)) {
      throw std::invalid_argument("LossWeights: weights must be finite and non-negative");
    }
  }
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct TrainSchedule {
  double lr = 0.1;
  int epochs = 100;
  double decay = 0.5;
  int decay_period = 40;
  int batch_size = 64;
  double momentum = 0.9;

  double lr_at(int epoch) const { return lr * std::pow(decay, epoch / decay_period); }
  void validate(const std::string& name) const {
    if (!(lr > 0)) throw std::invalid_argument(name + ".lr must be positive");
    if (epochs < 0) throw std::invalid_argument(name + ".epochs must be >= 0");
    if (!(decay > 0 && decay <= 1)) throw std::invalid_argument(name + ".decay must lie in (0, 1]");
    if (decay_period < 1) throw std::invalid_argument(name + ".decay_period must be >= 1");
    if (batch_size < 2) throw std::invalid_argument(name + ".batch_size must be >= 2");
    if (!(momentum >= 0 && momentum < 1)) throw std::invalid_argument(name + ".momentum must lie in [0, 1)");
  }
  friend bool operator==(const TrainSchedule&, const TrainSchedule&) = default;
};

struct TrainSchedules {
  TrainSchedule pretrain{0.1, 100};
  TrainSchedule full_base{0.01, 10};
  TrainSchedule incremental{0.1, 200};
  friend bool operator==(const TrainSchedules&, const TrainSchedules&) = default;
};

struct AblationSwitches {
  bool cat = true;       // canonicalize before embedding
  bool cat_loss = true;  // pseudo-context consistency term
  bool ucpc = true;      // uncertainty-conditioned calibration
  friend bool operator==(const AblationSwitches&, const AblationSwitches&) = default;
};

struct UcpcSettings {
  UncertaintyMap map;
  int n_ucpc = 20;
  // Apply pseudo-contexts to the true canonical map (synthetic data only)
  // instead of the canonicalized observation.
  bool oracle_anchor = false;
  friend bool operator==(const UcpcSettings&, const UcpcSettings&) = default;
};

class TrainingAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochLog {
  std::string stage;
  int session = 0;
  int epoch = 0;
  double lr = 0;
  double loss = 0;
};

namespace ad {

// p copies of an (n, ...) batch stacked along the batch axis.
template <typename Scalar>
Var<Scalar> tile_batch(const Var<Scalar>& x, int p) {
  if (p == 1) return x;
  Shape s = x->value.shape;
  const Index block = x->value.size();
  s[0] *= p;
  Tensor<Scalar> out(s);
  for (int i = 0; i < p; ++i) out.data.segment(i * block, block) = x->value.data;
  return make_node<Scalar>(std::move(out), {x}, [x, p, block](const Node<Scalar>& self) {
    auto& g = x->grad_buffer();
    for (int i = 0; i < p; ++i) g += self.grad.segment(i * block, block);
  });
}

// Cosine similarity of every row of z against every row of prototypes.
template <typename Scalar>
Var<Scalar> cosine_logits(const Var<Scalar>& z, const Var<Scalar>& prototypes) {
  return matmul_nt(normalize_rows(z), normalize_rows(prototypes));
}

}  // namespace ad

template <typename Scalar>
Tensor<Scalar> gather_batch(const Dataset& ds, const std::vector<Index>& idx) {
  if (idx.empty()) throw std::invalid_argument("gather_batch: empty index set");
  const auto& first = ds.maps.at(static_cast<std::size_t>(idx.front()));
  Tensor<Scalar> out(first.batch_shape(static_cast<Index>(idx.size())));
  const Index sz = first.size();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.data.segment(static_cast<Index>(i) * sz, sz) =
        ds.maps.at(static_cast<std::size_t>(idx[i])).values.template cast<Scalar>();
  }
  return out;
}

// Estimator (when canonicalization is enabled) followed by the embedder.
template <typename Scalar>
class Model {
 public:
  struct Forward {
    ad::Var<Scalar> context;    // null without canonicalization
    ad::Var<Scalar> canonical;
    ad::Var<Scalar> z;
  };

  Model(const EmbedderConfig& emb, const EstimatorConfig& est, const ContextBounds& bounds,
        const InputShape& input, bool cat, std::uint64_t seed)
      : embedder_(emb, input, seed) {
    if (cat) estimator_.emplace(est, bounds, input, seed);
  }

  bool cat() const { return estimator_.has_value(); }
  ContextEstimator<Scalar>& estimator() {
    if (!estimator_) throw std::logic_error("Model: canonicalization is disabled");
    return *estimator_;
  }
  Embedder<Scalar>& embedder() { return embedder_; }

  Forward forward(const ad::Var<Scalar>& maps, bool training) {
    Forward f;
    if (estimator_) {
      f.context = estimator_->forward(maps, training);
      f.canonical = ad::apply_inverse(maps, f.context);
    } else {
      f.canonical = maps;
    }
    f.z = embedder_.forward(f.canonical, training);
    return f;
  }

  // Eval-mode canonicalization; identity without an estimator.
  Tensor<Scalar> canonicalize(const Tensor<Scalar>& maps) {
    if (!estimator_) return maps;
    return estimator_->canonicalize(ad::constant(maps), false)->value;
  }

  // Eval-mode l2-normalized embeddings, one row per index.
  Eigen::MatrixXd embed_normalized(const Dataset& ds, const std::vector<Index>& idx, Index chunk = 64) {
    Eigen::MatrixXd out(static_cast<Index>(idx.size()), embedder_.dim());
    for (std::size_t start = 0; start < idx.size(); start += static_cast<std::size_t>(chunk)) {
      const std::size_t stop = std::min(idx.size(), start + static_cast<std::size_t>(chunk));
      std::vector<Index> part(idx.begin() + static_cast<std::ptrdiff_t>(start),
                              idx.begin() + static_cast<std::ptrdiff_t>(stop));
      auto z = forward(ad::constant(gather_batch<Scalar>(ds, part)), false).z;
      for (std::size_t i = 0; i < part.size(); ++i) {
        Eigen::VectorXd row = z->value.matrix().row(static_cast<Index>(i)).transpose().template cast<double>();
        const double n = row.norm();
        if (!(n > 0) || !std::isfinite(n)) throw std::runtime_error("embed: zero or non-finite embedding");
        out.row(static_cast<Index>(start + i)) = row.transpose() / n;
      }
    }
    return out;
  }

  std::vector<ad::Var<Scalar>> parameters() const {
    std::vector<ad::Var<Scalar>> out;
    if (estimator_) {
      for (const auto& [_, p] : estimator_->state().params()) out.push_back(p);
    }
    for (const auto& [_, p] : embedder_.state().params()) out.push_back(p);
    return out;
  }

  bool all_finite() const {
    return embedder_.state().all_finite() && (!estimator_ || estimator_->state().all_finite());
  }

 private:
  std::optional<ContextEstimator<Scalar>> estimator_;
  Embedder<Scalar> embedder_;
};

// SGD with heavy-ball momentum: v = m v + g; p -= lr v.
template <typename Scalar>
class Sgd {
 public:
  Sgd(std::vector<ad::Var<Scalar>> params, double momentum) : params_(std::move(params)), momentum_(momentum) {
    for (const auto& p : params_) velocity_.push_back(Tensor<Scalar>::Array::Zero(p->value.size()));
  }
  void zero_grad() {
    for (auto& p : params_) p->zero_grad();
  }
  void step(double lr) {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i];
      if (!p->has_grad()) continue;
      velocity_[i] = Scalar(momentum_) * velocity_[i] + p->grad;
      p->value.data -= Scalar(lr) * velocity_[i];
    }
  }

 private:
  std::vector<ad::Var<Scalar>> params_;
  std::vector<typename Tensor<Scalar>::Array> velocity_;
  double momentum_;
};

// Mean per-element l1 between canonicalized pseudo-context perturbations
// of `maps` and the canonicalized maps. With stop_gradient the anchor is
// a constant; `anchor` may carry a precomputed canonicalization.
template <typename Scalar>
ad::Var<Scalar> loss_cat(ContextEstimator<Scalar>& g, const ad::Var<Scalar>& maps, const ContextBounds& bounds,
                         Rng& rng, int p_count, bool training, ad::Var<Scalar> anchor = nullptr,
                         bool stop_gradient = true) {
  if (p_count < 1) throw std::invalid_argument("loss_cat: p_count must be >= 1");
  const Index n = maps->value.dim(0);
  std::vector<ContextParams> draws;
  for (Index i = 0; i < n * p_count; ++i) draws.push_back(sample_pseudo_context(bounds, rng));
  auto perturbed = ad::apply_transform(ad::tile_batch(maps, p_count), ad::constant(ad::context_tensor<Scalar>(draws)));
  auto canon_p = g.canonicalize(perturbed, training);
  if (!anchor) anchor = g.canonicalize(maps, training);
  if (stop_gradient) anchor = ad::detach(anchor);
  return ad::l1_mean(canon_p, ad::tile_batch(anchor, p_count));
}

template <typename Scalar>
ad::Var<Scalar> loss_reg(const ad::Var<Scalar>& contexts) {
  return ad::context_reg(contexts);
}

template <typename Scalar>
struct BaseLoss {
  ad::Var<Scalar> total, ce, cat, reg;
};

// CE of `head(z)` plus the weighted context terms. The context terms are
// present only when the model canonicalizes and (for L_cat) when enabled.
template <typename Scalar>
BaseLoss<Scalar> loss_base(Model<Scalar>& model, const Tensor<Scalar>& maps, const std::vector<int>& labels,
                           const std::function<ad::Var<Scalar>(const ad::Var<Scalar>&)>& head,
                           const LossWeights& w, bool cat_loss, const ContextBounds& bounds, Rng& rng,
                           bool training) {
  BaseLoss<Scalar> out;
  auto x = ad::constant(maps);
  auto f = model.forward(x, training);
  out.ce = ad::cross_entropy(head(f.z), labels);
  std::vector<std::pair<ad::Var<Scalar>, Scalar>> terms{{out.ce, Scalar(1)}};
  if (model.cat()) {
    if (cat_loss && w.cat > 0) {
      out.cat = loss_cat(model.estimator(), x, bounds, rng, 1, training, f.canonical);
      terms.push_back({out.cat, Scalar(w.cat)});
    }
    if (w.reg > 0) {
      out.reg = loss_reg(f.context);
      terms.push_back({out.reg, Scalar(w.reg)});
    }
  }
  out.total = ad::weighted_sum(terms);
  return out;
}

template <typename Scalar>
struct IncrementalLoss {
  ad::Var<Scalar> total, fresh, old;
};

// Prototype table rows: centers (K, d) and variances (K). `new_rows` are
// the rows of the current session's classes; `new_labels` index into
// new_rows, `old_labels` index rows of the full table. `noise` (K, d)
// selects stochastic prototypes; null means deterministic.
template <typename Scalar>
IncrementalLoss<Scalar> loss_incremental(const Tensor<Scalar>& new_z, const std::vector<int>& new_labels,
                                         const std::vector<Index>& new_rows, const Tensor<Scalar>& old_means,
                                         const std::vector<int>& old_labels, const ad::Var<Scalar>& centers,
                                         const ad::Var<Scalar>& variances, const Tensor<Scalar>* noise,
                                         double lambda3) {
  IncrementalLoss<Scalar> out;
  auto protos = noise ? ad::reparameterize(centers, variances, *noise) : centers;
  out.fresh = ad::cross_entropy(ad::cosine_logits(ad::constant(new_z), ad::select_rows(protos, new_rows)), new_labels);
  std::vector<std::pair<ad::Var<Scalar>, Scalar>> terms{{out.fresh, Scalar(1)}};
  if (lambda3 > 0) {
    if (old_labels.empty()) throw std::invalid_argument("loss_incremental: no stored old-class means");
    out.old = ad::cross_entropy(ad::cosine_logits(ad::constant(old_means), protos), old_labels);
    terms.push_back({out.old, Scalar(lambda3)});
  }
  out.total = ad::weighted_sum(terms);
  return out;
}

namespace detail {

inline void require_finite_loss(double v, const std::string& where) {
  if (!std::isfinite(v)) throw TrainingAborted("non-finite loss at " + where);
}

// Records with mu = mu_ucpc = class mean of normalized embeddings.
inline std::vector<ClassRecord> class_mean_records(const Eigen::MatrixXd& z, const std::vector<int>& labels,
                                                   const std::vector<int>& classes, int session, double sigma) {
  std::vector<ClassRecord> out;
  for (int y : classes) {
    ClassRecord r;
    r.id = y;
    r.session = session;
    r.mu = Eigen::VectorXd::Zero(z.cols());
    int count = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == y) {
        r.mu += z.row(static_cast<Index>(i)).transpose();
        ++count;
      }
    }
    if (count == 0) throw std::invalid_argument("class " + std::to_string(y) + " has no samples");
    r.mu /= double(count);
    r.mu_ucpc = r.mu;
    r.sigma_ucpc = sigma;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace detail

template <typename Scalar>
struct BaseResult {
  std::vector<ClassRecord> records;
  std::vector<EpochLog> log;
};

// Two stages on the base split. Stage 1 trains the embedder and a linear
// softmax head (discarded afterwards) with plain CE; stage 2 trains all
// networks and cosine prototypes, initialized at the class means, with
// the full base loss.
template <typename Scalar>
BaseResult<Scalar> train_base(Model<Scalar>& model, const Dataset& ds, const std::vector<Index>& train,
                              const std::vector<int>& classes, const TrainSchedules& sched, const LossWeights& w,
                              bool cat_loss, const ContextBounds& bounds, double sigma_init, std::uint64_t seed) {
  if (train.empty() || classes.empty()) throw std::invalid_argument("train_base: empty base split");
  std::vector<int> label_of(static_cast<std::size_t>(ds.class_count), -1);
  for (std::size_t k = 0; k < classes.size(); ++k) label_of.at(static_cast<std::size_t>(classes[k])) = static_cast<int>(k);
  std::vector<int> train_labels;
  for (Index i : train) {
    const int y = label_of.at(static_cast<std::size_t>(ds.labels.at(static_cast<std::size_t>(i))));
    if (y < 0) throw std::invalid_argument("train_base: sample outside the base classes");
    train_labels.push_back(y);
  }

  BaseResult<Scalar> result;
  std::uint64_t step_counter = 0;
  const auto run_stage = [&](const std::string& name, const TrainSchedule& s, std::vector<ad::Var<Scalar>> params,
                             const std::function<ad::Var<Scalar>(const ad::Var<Scalar>&)>& head, int stage_id,
                             const LossWeights& stage_w, bool stage_cat_loss) {
    Sgd<Scalar> opt(std::move(params), s.momentum);
    std::vector<std::size_t> order(train.size());
    for (int epoch = 0; epoch < s.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), 0);
      Rng shuffle = make_rng(seed, Stream::kShuffle, static_cast<std::uint64_t>(stage_id) * 100000 + epoch);
      std::shuffle(order.begin(), order.end(), shuffle);
      const double lr = s.lr_at(epoch);
      double loss_sum = 0;
      int batches = 0;
      for (std::size_t start = 0; start + 1 < order.size(); start += static_cast<std::size_t>(s.batch_size)) {
        const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(s.batch_size));
        if (stop - start < 2) break;
        std::vector<Index> idx;
        std::vector<int> y;
        for (std::size_t k = start; k < stop; ++k) {
          idx.push_back(train[order[k]]);
          y.push_back(train_labels[order[k]]);
        }
        Rng rng = make_rng(seed, Stream::kPseudoContext, step_counter++);
        opt.zero_grad();
        auto loss = loss_base(model, gather_batch<Scalar>(ds, idx), y, head, stage_w, stage_cat_loss, bounds, rng, true);
        const double v = double(loss.total->value[0]);
        detail::require_finite_loss(v, name + " epoch " + std::to_string(epoch));
        ad::backward(loss.total);
        opt.step(lr);
        if (!model.all_finite()) throw TrainingAborted("non-finite parameters after " + name + " epoch " + std::to_string(epoch));
        loss_sum += v;
        ++batches;
      }
      result.log.push_back({name, 0, epoch, lr, batches ? loss_sum / batches : 0.0});
    }
  };

  const Index d = model.embedder().dim();
  const auto k = static_cast<Index>(classes.size());
  if (sched.pretrain.epochs > 0) {
    NetState<Scalar> head_state;
    Rng init = make_rng(seed, Stream::kInit, 3);
    Linear<Scalar> linear(head_state, "pretrain.head", d, k, false, init);
    // Plain CE on the embedder; the estimator stays at its
    // identity-neighborhood initialization until the full-base stage.
    std::vector<ad::Var<Scalar>> params;
    for (const auto& [_, p] : model.embedder().state().params()) params.push_back(p);
    for (const auto& [_, p] : head_state.params()) params.push_back(p);
    const LossWeights ce_only{0, 0, w.old};
    run_stage("pretrain", sched.pretrain, params, [&](const ad::Var<Scalar>& z) { return linear(z); }, 1, ce_only, false);
  }

  if (sched.full_base.epochs > 0) {
    auto means = detail::class_mean_records(model.embed_normalized(ds, train), train_labels,
                                            [&] { std::vector<int> r(classes.size()); std::iota(r.begin(), r.end(), 0); return r; }(),
                                            0, sigma_init);
    Tensor<Scalar> init({k, d});
    for (Index c = 0; c < k; ++c) {
      init.matrix().row(c) = means[static_cast<std::size_t>(c)].mu.transpose().template cast<Scalar>();
    }
    auto protos = ad::parameter(std::move(init));
    auto params = model.parameters();
    params.push_back(protos);
    run_stage("full_base", sched.full_base, params,
              [&](const ad::Var<Scalar>& z) { return ad::cosine_logits(z, protos); }, 2, w, cat_loss);
  }

  std::vector<int> ids;
  for (Index i : train) ids.push_back(ds.labels.at(static_cast<std::size_t>(i)));
  result.records = detail::class_mean_records(model.embed_normalized(ds, train), ids, classes, 0, sigma_init);
  return result;
}

struct IncrementalResult {
  std::vector<EpochLog> log;
  std::vector<double> support_uncertainty;  // u(x) per support sample
};

// Freezes the networks, initializes records for the session's classes
// (with calibration when ucpc_on) and fine-tunes the calibrated centers
// and variances of every class with L_inc.
template <typename Scalar>
IncrementalResult train_incremental(Model<Scalar>& model, const Dataset& ds, const std::vector<Index>& support,
                                    const std::vector<int>& classes, int session, std::vector<ClassRecord>& records,
                                    const TrainSchedule& sched, double lambda3, const UcpcSettings& ucpc, bool ucpc_on,
                                    const ContextBounds& bounds, std::uint64_t seed) {
  std::set<int> known;
  for (const auto& r : records) known.insert(r.id);
  for (int y : classes) {
    if (known.count(y)) throw std::invalid_argument("train_incremental: class " + std::to_string(y) + " already learned");
  }
  if (classes.empty() || support.empty()) throw std::invalid_argument("train_incremental: empty session");
  ucpc.map.validate();

  IncrementalResult result;
  const Eigen::MatrixXd z = model.embed_normalized(ds, support);
  std::vector<int> ids;
  for (Index i : support) ids.push_back(ds.labels.at(static_cast<std::size_t>(i)));
  auto fresh = detail::class_mean_records(z, ids, classes, session, ucpc.map.beta);

  if (ucpc_on) {
    if (ucpc.oracle_anchor && ds.canonicals.empty()) {
      throw std::invalid_argument("train_incremental: oracle anchor needs ground-truth canonicals");
    }
    const PriorStats prior = prior_stats(records);
    const auto canon = [&](const Tensor<Scalar>& b) { return model.canonicalize(b); };
    for (auto& r : fresh) {
      std::vector<double> us;
      for (std::size_t i = 0; i < support.size(); ++i) {
        if (ids[i] != r.id) continue;
        const auto& obs = ds.maps.at(static_cast<std::size_t>(support[i]));
        const Spectrogram<Scalar> observed = obs.template cast<Scalar>();
        const Spectrogram<Scalar> anchor =
            ucpc.oracle_anchor ? ds.canonicals.at(static_cast<std::size_t>(r.id)).template cast<Scalar>()
                               : Spectrogram<Scalar>::from_batch(model.canonicalize(observed.as_batch()), 0);
        Rng rng = make_rng(seed, Stream::kUncertainty, static_cast<std::uint64_t>(support[i]));
        us.push_back(sample_uncertainty(canon, anchor, observed, ucpc.n_ucpc, bounds, rng));
        result.support_uncertainty.push_back(us.back());
      }
      r.uncertainty = class_uncertainty(us);
      const Posterior post = shrink(r.mu, prior, ucpc.map.variance(r.uncertainty));
      r.mu_ucpc = post.center;
      r.sigma_ucpc = post.variance;
      r.lambda = post.lambda;
    }
  }

  const std::size_t n_old = records.size();
  Tensor<double> old_means({static_cast<Index>(n_old), z.cols()});
  std::vector<int> old_labels;
  for (std::size_t i = 0; i < n_old; ++i) {
    old_means.matrix().row(static_cast<Index>(i)) = records[i].mu.transpose();
    old_labels.push_back(static_cast<int>(i));
  }
  records.insert(records.end(), fresh.begin(), fresh.end());
  const auto k = static_cast<Index>(records.size());

  if (sched.epochs > 0) {
    Tensor<double> c0({k, z.cols()});
    Tensor<double> s0({k});
    for (Index i = 0; i < k; ++i) {
      c0.matrix().row(i) = records[static_cast<std::size_t>(i)].mu_ucpc.transpose();
      // Inverse softplus keeps the variance positive during optimization.
      s0[i] = std::log(std::expm1(records[static_cast<std::size_t>(i)].sigma_ucpc));
    }
    auto centers = ad::parameter(std::move(c0));
    auto raw_sigma = ucpc_on ? ad::parameter(std::move(s0)) : ad::constant(std::move(s0));
    std::vector<ad::Var<double>> params{centers};
    if (ucpc_on) params.push_back(raw_sigma);
    Sgd<double> opt(params, sched.momentum);

    Tensor<double> new_z({z.rows(), z.cols()});
    new_z.matrix() = z;
    std::vector<Index> new_rows;
    std::vector<int> new_labels;
    for (std::size_t c = 0; c < classes.size(); ++c) new_rows.push_back(static_cast<Index>(n_old + c));
    for (int y : ids) {
      new_labels.push_back(static_cast<int>(std::find(classes.begin(), classes.end(), y) - classes.begin()));
    }

    for (int epoch = 0; epoch < sched.epochs; ++epoch) {
      Rng rng = make_rng(seed, Stream::kPrototypeNoise, static_cast<std::uint64_t>(session) * 100000 + epoch);
      std::normal_distribution<double> normal(0.0, 1.0);
      Tensor<double> noise({k, z.cols()});
      for (Index i = 0; i < noise.size(); ++i) noise[i] = normal(rng);
      opt.zero_grad();
      auto sigma = ad::softplus(raw_sigma);
      auto loss = loss_incremental<double>(new_z, new_labels, new_rows, old_means, old_labels, centers, sigma,
                                           &noise, lambda3);
      const double v = loss.total->value[0];
      detail::require_finite_loss(v, "session " + std::to_string(session) + " epoch " + std::to_string(epoch));
      ad::backward(loss.total);
      const double lr = sched.lr_at(epoch);
      opt.step(lr);
      result.log.push_back({"incremental", session, epoch, lr, v});
    }
    auto sigma = ad::softplus(raw_sigma);
    for (Index i = 0; i < k; ++i) {
      auto& r = records[static_cast<std::size_t>(i)];
      r.mu_ucpc = centers->value.matrix().row(i).transpose();
      r.sigma_ucpc = sigma->value[i];
      if (!r.mu_ucpc.allFinite() || !(r.sigma_ucpc > 0)) throw TrainingAborted("non-finite class record after session " + std::to_string(session));
    }
  }
  return result;
}

// Deterministic-mode predictions (class ids) for the given samples.
template <typename Scalar>
std::vector<int> predict(Model<Scalar>& model, const Dataset& ds, const std::vector<Index>& idx,
                         const std::vector<ClassRecord>& records) {
  const Eigen::MatrixXd z = model.embed_normalized(ds, idx);
  std::vector<int> out;
  for (Index i = 0; i < z.rows(); ++i) out.push_back(classify(z.row(i).transpose(), records, nullptr, false).label);
  return out;
}

}  // namespace tfscil

#endif  // TFSCIL_TRAINING_HPP_
