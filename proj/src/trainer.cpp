// SPDX-License-Identifier: Apache-2.0
#include "hrseq/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "hrseq/decoder.hpp"
#include "hrseq/random.hpp"

namespace hrseq {

TrainConfig TrainConfig::desk() {
  TrainConfig cfg;
  cfg.embed_dim = 16;
  cfg.word_hidden = 24;
  cfg.word_layers = 3;
  cfg.sent_hidden = 32;
  cfg.dec_hidden = 32;
  cfg.num_window = 5;
  cfg.batch_size = 8;
  return cfg;
}

void TrainConfig::validate() const {
  if (!embed_dim || !word_hidden || !word_layers || !sent_hidden || !dec_hidden) {
    throw InvalidInput("train config: every dimension must be positive");
  }
  if (num_window < 1) throw InvalidInput("train config: num_window must be >= 1");
  if (batch_size < 1) throw InvalidInput("train config: batch_size must be >= 1");
  if (!(init_range > 0.0)) throw InvalidInput("train config: init_range must be > 0");
  if (patience < 1) throw InvalidInput("train config: patience must be >= 1");
  if (!(adam.lr > 0.0)) throw InvalidInput("train config: learning rate must be > 0");
  if (threads < 1) throw InvalidInput("train config: threads must be >= 1");
}

ModelConfig TrainConfig::model_config(Variant variant, std::size_t vocab_size) const {
  ModelConfig mc;
  mc.variant = variant;
  mc.vocab_size = vocab_size;
  mc.embed_dim = embed_dim;
  mc.word_hidden = word_hidden;
  mc.word_layers = word_layers;
  mc.sent_hidden = sent_hidden;
  mc.dec_hidden = dec_hidden;
  mc.attn_dim = attn_dim;
  mc.validate();
  return mc;
}

bool EarlyStopping::update(double loss) {
  ++epochs_;
  improved_last_ = best_epoch_ == 0 || loss < best_loss_;
  if (improved_last_) {
    best_loss_ = loss;
    best_epoch_ = epochs_;
  }
  return epochs_ - best_epoch_ >= patience_;
}

namespace {

void add_into(ModelParams& dst, const ModelParams& src) {
  auto d = dst.tensors();
  const auto s = src.tensors();
  for (std::size_t k = 0; k < d.size(); ++k) axpy(1.0, s[k].values, d[k].values);
}

bool all_finite(const ModelParams& params) {
  for (const auto& t : params.tensors()) {
    for (double v : t.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

std::string format_loss(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

double batch_gradient(const ModelParams& params, const std::vector<TrainingExample>& examples,
                      const std::vector<std::size_t>& indices, double scale, std::size_t threads,
                      ModelParams& grads) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, indices.size()));
  if (workers == 1) {
    double total = 0.0;
    for (std::size_t i : indices) total += teacher_forced_loss(params, examples[i], &grads, scale);
    return total;
  }

  std::vector<ModelParams> partial(workers, ModelParams(params.config));
  std::vector<double> partial_loss(workers, 0.0);
  std::vector<std::thread> pool;
  const std::size_t per = (indices.size() + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t begin = w * per;
      const std::size_t end = std::min(indices.size(), begin + per);
      for (std::size_t k = begin; k < end; ++k) {
        partial_loss[w] += teacher_forced_loss(params, examples[indices[k]], &partial[w], scale);
      }
    });
  }
  for (auto& t : pool) t.join();
  double total = 0.0;
  for (std::size_t w = 0; w < workers; ++w) {
    add_into(grads, partial[w]);
    total += partial_loss[w];
  }
  return total;
}

double mean_loss(const ModelParams& params, const std::vector<TrainingExample>& examples,
                 std::size_t threads) {
  if (examples.empty()) return 0.0;
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, examples.size()));
  std::vector<double> partial(workers, 0.0);
  auto run = [&](std::size_t w) {
    for (std::size_t i = w; i < examples.size(); i += workers) {
      partial[w] += teacher_forced_loss(params, examples[i]);
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total / static_cast<double>(examples.size());
}

double teacher_forced_accuracy(const ModelParams& params,
                               const std::vector<TrainingExample>& examples) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const auto& ex : examples) {
    const TeacherForcedStats stats = teacher_forced_stats(params, ex);
    correct += stats.correct;
    total += stats.total;
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

Checkpoint train(const TrainConfig& config, const ModelConfig& model_config,
                 const std::vector<TrainingExample>& train_set,
                 const std::vector<TrainingExample>& valid_set, const TrainHooks& hooks) {
  config.validate();
  Checkpoint start;
  start.train_config = config;
  start.params = init_params(model_config, config.init_range, config.seed);
  start.adam = AdamState(start.params.parameter_count());
  return train(config, std::move(start), train_set, valid_set, hooks);
}

Checkpoint train(const TrainConfig& config, Checkpoint start,
                 const std::vector<TrainingExample>& train_set,
                 const std::vector<TrainingExample>& valid_set, const TrainHooks& hooks) {
  config.validate();
  if (train_set.empty()) throw InvalidInput("train: empty training set");

  ModelParams params = std::move(start.params);
  AdamState adam = std::move(start.adam);
  std::vector<EpochRecord> history = std::move(start.history);
  history.resize(std::min(history.size(), start.epoch));

  EarlyStopping stopper(config.patience);
  Checkpoint best;
  best.train_config = config;
  best.params = params;
  best.adam = adam;
  best.epoch = start.epoch;
  for (const auto& record : history) stopper.update(record.valid_loss);

  // Shuffling draws from a stream keyed by the seed and the resume point.
  Rng rng(config.seed * 0x9E3779B97F4A7C15ULL + start.epoch + 1);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  ModelParams grads(params.config);

  for (std::size_t epoch = start.epoch + 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
      grads.set_zero();
      const double batch_loss = batch_gradient(params, train_set, batch,
                                               1.0 / static_cast<double>(batch.size()),
                                               config.threads, grads);
      if (!std::isfinite(batch_loss) || !all_finite(grads)) {
        throw TrainingDiverged("non-finite loss or gradient in epoch " + std::to_string(epoch) +
                               " (batch loss " + format_loss(batch_loss) +
                               "); lower the learning rate or the init range");
      }
      clip_global_norm(grads, config.clip_norm);
      adam_step(adam, params, grads, config.adam);
      loss_sum += batch_loss;
    }

    EpochRecord record;
    record.train_loss = loss_sum / static_cast<double>(train_set.size());
    record.valid_loss = valid_set.empty() ? record.train_loss
                                          : mean_loss(params, valid_set, config.threads);
    if (!std::isfinite(record.valid_loss)) {
      throw TrainingDiverged("non-finite held-out loss after epoch " + std::to_string(epoch));
    }
    history.push_back(record);
    if (hooks.on_epoch) hooks.on_epoch(epoch, record);

    const bool stop = stopper.update(record.valid_loss);
    if (stopper.improved_last()) {
      best.params = params;
      best.adam = adam;
      best.epoch = epoch;
    }
    if (stop) break;
  }
  best.history = std::move(history);
  return best;
}

GradientCheckReport gradient_check(const ModelParams& params,
                                   const std::vector<TrainingExample>& examples, double epsilon) {
  if (examples.empty()) throw InvalidInput("gradient_check: no examples");
  const double scale = 1.0 / static_cast<double>(examples.size());
  ModelParams analytic(params.config);
  for (const auto& ex : examples) teacher_forced_loss(params, ex, &analytic, scale);

  ModelParams probe = params;
  auto objective = [&] {
    double total = 0.0;
    for (const auto& ex : examples) total += teacher_forced_loss(probe, ex);
    return total * scale;
  };

  GradientCheckReport report;
  auto probe_tensors = probe.tensors();
  const auto grad_tensors = std::as_const(analytic).tensors();
  for (std::size_t k = 0; k < probe_tensors.size(); ++k) {
    TensorCheck check{probe_tensors[k].name, probe_tensors[k].values.size(), 0.0};
    auto values = probe_tensors[k].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + epsilon;
      const double up = objective();
      values[i] = saved - epsilon;
      const double down = objective();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      check.max_relative_error = std::max(check.max_relative_error,
                                          relative_error(grad_tensors[k].values[i], numeric));
    }
    report.max_relative_error = std::max(report.max_relative_error, check.max_relative_error);
    report.tensors.push_back(std::move(check));
  }
  return report;
}

}  // namespace hrseq
