#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "agcrn/data.hpp"
#include "agcrn/model.hpp"

namespace agcrn {

struct TrainConfig {
  double lr = 0.003;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 100;
  std::size_t patience = 15;
  std::uint64_t seed = 1;
};

struct AdamState {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::size_t step = 0;
  std::vector<Tensor> m, v;  // parallel to the parameter list

  explicit AdamState(std::span<Parameter* const> params);
};

/// Bias-corrected Adam update over all parameters; gradients are zeroed.
void adam_step(std::span<Parameter* const> params, AdamState& state, double lr);

/// Mean absolute difference over all entries.
double l1_loss(const Tensor& pred, const Tensor& target);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;  // 1-based

  /// Columns epoch,train_loss,val_loss. Wall time stays out so reruns are
  /// byte-identical; it is reported through the logger instead.
  std::string to_csv() const;
  void write_csv(const std::string& path) const;
};

using EpochLogger = std::function<void(const EpochStats&)>;

/// Mini-batch training with seeded shuffling, validation after each epoch
/// and early stopping; the model is left at its best-validation epoch.
TrainHistory train(ForecastModel& model, const Dataset& data, const TrainConfig& cfg,
                   const EpochLogger& log = {});

}  // namespace agcrn
