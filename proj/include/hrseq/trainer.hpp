// SPDX-License-Identifier: Apache-2.0
/**
 * @file   trainer.hpp
 * @brief  Mini-batch training with Adam, global-norm clipping and
 *         patience-based early stopping on held-out loss.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrseq/adam.hpp"
#include "hrseq/corpus.hpp"
#include "hrseq/model.hpp"

namespace hrseq {

struct TrainConfig {
  std::size_t embed_dim = 300;
  std::size_t word_hidden = 1000;
  std::size_t word_layers = 3;
  std::size_t sent_hidden = 1500;
  std::size_t dec_hidden = 1500;
  std::size_t attn_dim = 0;  // 0 means dec_hidden
  std::size_t num_window = 5;
  std::size_t batch_size = 256;
  double init_range = 0.5;
  AdamHyper adam;
  double clip_norm = 5.0;
  std::size_t patience = 3;
  std::size_t max_epochs = 100;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  /// Architecture kept, sizes shrunk to run in seconds.
  static TrainConfig desk();

  void validate() const;
  ModelConfig model_config(Variant variant, std::size_t vocab_size) const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochRecord {
  double train_loss = 0.0;
  double valid_loss = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct Checkpoint {
  TrainConfig train_config;
  ModelParams params;
  AdamState adam;
  std::size_t epoch = 0;             // 1-based epoch these parameters come from
  std::vector<EpochRecord> history;  // every epoch that ran
};

/// Tracks the best held-out loss and signals a stop once `patience`
/// consecutive epochs fail to beat it.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Records one epoch's loss. Returns true when training should stop.
  bool update(double loss);
  bool improved_last() const { return improved_last_; }
  std::size_t best_epoch() const { return best_epoch_; }  // 1-based, 0 before any update
  double best_loss() const { return best_loss_; }
  std::size_t epochs_seen() const { return epochs_; }

 private:
  std::size_t patience_;
  std::size_t epochs_ = 0;
  std::size_t best_epoch_ = 0;
  double best_loss_ = 0.0;
  bool improved_last_ = false;
};

/// Thrown when a loss or gradient stops being finite.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainHooks {
  /// Called after each epoch with its 1-based index and losses.
  std::function<void(std::size_t epoch, const EpochRecord&)> on_epoch;
};

/// Sum of teacher-forced losses over examples[indices[i]]; their gradients,
/// multiplied by `scale`, are added into grads. With threads > 1 the indices
/// are cut into contiguous chunks whose partial sums are reduced in order, so
/// results are reproducible for a fixed thread count.
double batch_gradient(const ModelParams& params, const std::vector<TrainingExample>& examples,
                      const std::vector<std::size_t>& indices, double scale, std::size_t threads,
                      ModelParams& grads);

double mean_loss(const ModelParams& params, const std::vector<TrainingExample>& examples,
                 std::size_t threads = 1);

/// Fraction of target tokens whose argmax prediction is correct under
/// teacher forcing.
double teacher_forced_accuracy(const ModelParams& params,
                               const std::vector<TrainingExample>& examples);

/// Trains from freshly initialised parameters. When `valid` is empty the
/// training loss drives early stopping. Returns the best epoch's checkpoint.
Checkpoint train(const TrainConfig& config, const ModelConfig& model_config,
                 const std::vector<TrainingExample>& train_set,
                 const std::vector<TrainingExample>& valid_set, const TrainHooks& hooks = {});

/// Continues training from a checkpoint's parameters and optimizer state.
Checkpoint train(const TrainConfig& config, Checkpoint start,
                 const std::vector<TrainingExample>& train_set,
                 const std::vector<TrainingExample>& valid_set, const TrainHooks& hooks = {});

struct TensorCheck {
  std::string name;
  std::size_t size = 0;
  double max_relative_error = 0.0;
};

struct GradientCheckReport {
  std::vector<TensorCheck> tensors;
  double max_relative_error = 0.0;
  bool passed(double tolerance) const { return max_relative_error < tolerance; }
};

/// Compares the analytic gradient of the mean teacher-forced loss over
/// `examples` against central differences for every parameter.
GradientCheckReport gradient_check(const ModelParams& params,
                                   const std::vector<TrainingExample>& examples,
                                   double epsilon = 1e-5);

}  // namespace hrseq
