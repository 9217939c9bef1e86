#include "agcrn/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "agcrn/autodiff.hpp"
#include "agcrn/errors.hpp"
#include "agcrn/rng.hpp"

namespace agcrn {

AdamState::AdamState(std::span<Parameter* const> params) {
  m.reserve(params.size());
  v.reserve(params.size());
  for (const Parameter* p : params) {
    m.emplace_back(p->value.shape());
    v.emplace_back(p->value.shape());
  }
}

void adam_step(std::span<Parameter* const> params, AdamState& state, double lr) {
  if (params.size() != state.m.size())
    throw ShapeError("adam_step: state tracks " + std::to_string(state.m.size()) +
                     " parameters, got " + std::to_string(params.size()));
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double g = p.grad[k];
      state.m[i][k] = state.beta1 * state.m[i][k] + (1.0 - state.beta1) * g;
      state.v[i][k] = state.beta2 * state.v[i][k] + (1.0 - state.beta2) * g * g;
      const double mhat = state.m[i][k] / bc1;
      const double vhat = state.v[i][k] / bc2;
      p.value[k] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
    p.zero_grad();
  }
}

double l1_loss(const Tensor& pred, const Tensor& target) {
  if (!pred.same_shape(target)) throw ShapeError("l1_loss: shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - target[i]);
  return sum / double(pred.size());
}

std::string TrainHistory::to_csv() const {
  std::string out = "epoch,train_loss,val_loss\n";
  for (const EpochStats& e : epochs)
    out += std::to_string(e.epoch) + "," + format_double(e.train_loss) + "," +
           format_double(e.val_loss) + "\n";
  return out;
}

void TrainHistory::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write history " + path);
  out << to_csv();
  if (!out) throw DataError("failed writing history " + path);
}

TrainHistory train(ForecastModel& model, const Dataset& data, const TrainConfig& cfg,
                   const EpochLogger& log) {
  if (data.train.empty()) throw ConfigError("train: empty training split");
  if (data.val.empty()) throw ConfigError("train: empty validation split");
  if (cfg.batch_size == 0) throw ConfigError("train: batch-size must be positive");
  if (cfg.max_epochs == 0) throw ConfigError("train: epochs must be positive");
  const ModelConfig& mc = model.config();
  if (data.nodes != mc.nodes || data.lookback != mc.lookback || data.horizon != mc.horizon)
    throw ConfigError("train: dataset windows (" + std::to_string(data.nodes) + " nodes, " +
                      std::to_string(data.lookback) + "/" + std::to_string(data.horizon) +
                      ") do not match the model config");

  const Normalizer& norm = data.normalizer;
  std::vector<Parameter*> params = model.parameters();
  AdamState adam(params);
  Rng shuffle_rng(cfg.seed);

  auto eval_split = [&](const std::vector<Window>& windows) {
    ForecastModel::Plan plan = model.make_plan(false);
    double sum = 0.0;
    for (const Window& w : windows) {
      Tensor pred = norm.denormalize(model.forward(plan, w.input).val());
      sum += l1_loss(pred, w.target);
    }
    return sum / double(windows.size());
  };

  TrainHistory history;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<Tensor> best_values = model.save_values();
  std::size_t bad_epochs = 0;

  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(order);

    double train_sum = 0.0;
    std::size_t seen = 0, batch_no = 0;
    while (seen < order.size()) {
      ++batch_no;
      const std::size_t count = std::min(cfg.batch_size, order.size() - seen);
      try {
        ForecastModel::Plan plan = model.make_plan(true);
        std::vector<ad::Value> losses;
        losses.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
          const Window& w = data.train[order[seen + i]];
          ad::Value pred = ad::affine(model.forward(plan, w.input), norm.std, norm.mean);
          losses.push_back(ad::l1_mean(pred, w.target));
        }
        ad::Value batch_loss = ad::mean_of(losses);
        if (!std::isfinite(batch_loss.item()))
          throw NumericsError("non-finite batch loss");
        ad::backward(batch_loss);
        adam_step(params, adam, cfg.lr);
        train_sum += batch_loss.item() * double(count);
      } catch (const NumericsError& e) {
        throw NumericsError("epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_no) + ": " + e.what());
      }
      seen += count;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = train_sum / double(order.size());
    stats.val_loss = eval_split(data.val);
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.epochs.push_back(stats);
    if (log) log(stats);

    if (stats.val_loss < best_val) {
      best_val = stats.val_loss;
      history.best_epoch = epoch;
      best_values = model.save_values();
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs >= std::max<std::size_t>(cfg.patience, 1)) break;
    }
  }

  model.restore_values(best_values);
  return history;
}

}  // namespace agcrn
