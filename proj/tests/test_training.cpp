#include <doctest.h>

#include <cmath>
#include <vector>

#include "agcrn/errors.hpp"
#include "agcrn/rng.hpp"
#include "agcrn/synth.hpp"
#include "agcrn/training.hpp"

using namespace agcrn;

namespace {

// One scalar parameter plus hand-scripted gradients, for driving Adam directly.
struct Probe {
  Parameter p;
  std::vector<Parameter*> list;

  explicit Probe(double value) : p("p", Tensor({1}, {value})), list{&p} {}
  void grad(double g) { p.grad[0] = g; }
  double value() const { return p.value[0]; }
};

Dataset tiny_dataset(std::size_t nodes, std::size_t steps, double noise, std::uint64_t seed,
                     std::size_t lookback = 4, std::size_t horizon = 2) {
  SynthOptions opt;
  opt.nodes = nodes;
  opt.communities = 2;
  opt.steps = steps;
  opt.noise_std = noise;
  opt.seed = seed;
  opt.steps_per_day = 24;
  RawSeries s = synth_generate(opt);
  return split_and_window(s, lookback, horizon);
}

ModelConfig tiny_model_config(const Dataset& data) {
  ModelConfig cfg;
  cfg.nodes = data.nodes;
  cfg.hidden = 4;
  cfg.layers = 1;
  cfg.embed_dim = 2;
  cfg.horizon = data.horizon;
  cfg.lookback = data.lookback;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("l1 loss hand values") {
  CHECK_EQ(l1_loss(Tensor({2, 2}, {1, 2, 3, 4}), Tensor({2, 2}, {1, 2, 3, 4})), 0.0);
  // |1-2| + |2-0| + |3-6| + |4-4| = 6, mean 1.5
  CHECK_EQ(l1_loss(Tensor({2, 2}, {1, 2, 3, 4}), Tensor({2, 2}, {2, 0, 6, 4})),
           doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("adam leaves parameters alone when the gradient is zero") {
  Probe probe(1.25);
  AdamState st(probe.list);
  probe.grad(0.0);
  adam_step(probe.list, st, 0.1);
  CHECK_EQ(probe.value(), 1.25);
  CHECK_EQ(st.step, 1);
}

TEST_CASE("first adam step moves by about minus lr times sign") {
  // With bias correction the first update is exactly lr * g / (|g| + eps').
  Probe probe(0.0);
  AdamState st(probe.list);
  probe.grad(4.0);
  adam_step(probe.list, st, 0.01);
  CHECK_EQ(probe.value(), doctest::Approx(-0.01).epsilon(1e-6));
  CHECK_EQ(probe.p.grad[0], 0.0);  // zeroed after the step

  Probe down(0.0);
  AdamState st2(down.list);
  down.grad(-0.5);
  adam_step(down.list, st2, 0.01);
  CHECK_EQ(down.value(), doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("two adam steps match the closed form") {
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.05;
  const double g1 = 3.0, g2 = -1.0;
  double m = 0.0, v = 0.0, x = 0.7;
  for (int t = 1; t <= 2; ++t) {
    const double g = (t == 1 ? g1 : g2);
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    x -= lr * mhat / (std::sqrt(vhat) + eps);
  }

  Probe probe(0.7);
  AdamState st(probe.list);
  probe.grad(g1);
  adam_step(probe.list, st, lr);
  probe.grad(g2);
  adam_step(probe.list, st, lr);
  CHECK_EQ(probe.value(), doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("zero learning rate freezes parameters but advances moments") {
  Probe probe(2.0);
  AdamState st(probe.list);
  probe.grad(5.0);
  adam_step(probe.list, st, 0.0);
  CHECK_EQ(probe.value(), 2.0);
  CHECK_EQ(st.step, 1);
  CHECK(st.m[0][0] != 0.0);
}

TEST_CASE("training validates configuration against the dataset") {
  Dataset data = tiny_dataset(4, 80, 0.0, 9);
  ModelConfig mc = tiny_model_config(data);
  TrainConfig tc;
  tc.max_epochs = 1;

  mc.nodes = data.nodes + 1;
  ForecastModel wrong = ForecastModel::build(mc);
  CHECK_THROWS_AS(train(wrong, data, tc), ConfigError);

  mc.nodes = data.nodes;
  ForecastModel ok = ForecastModel::build(mc);
  TrainConfig bad = tc;
  bad.batch_size = 0;
  CHECK_THROWS_AS(train(ok, data, bad), ConfigError);
  bad = tc;
  bad.max_epochs = 0;
  CHECK_THROWS_AS(train(ok, data, bad), ConfigError);
}

TEST_CASE("training runs the requested epochs and logs them in order") {
  Dataset data = tiny_dataset(4, 80, 0.05, 11);
  ForecastModel m = ForecastModel::build(tiny_model_config(data));
  TrainConfig tc;
  tc.max_epochs = 3;
  tc.batch_size = 8;

  std::vector<std::size_t> seen;
  TrainHistory h = train(m, data, tc, [&](const EpochStats& e) {
    seen.push_back(e.epoch);
    CHECK(e.seconds >= 0.0);
  });
  REQUIRE_EQ(h.epochs.size(), 3);
  CHECK_EQ(seen, std::vector<std::size_t>{1, 2, 3});
  CHECK(h.best_epoch >= 1);
  CHECK(h.best_epoch <= 3);
  for (const EpochStats& e : h.epochs) {
    CHECK(std::isfinite(e.train_loss));
    CHECK(std::isfinite(e.val_loss));
  }
}

TEST_CASE("training is deterministic for a fixed seed") {
  Dataset data = tiny_dataset(4, 80, 0.05, 13);
  TrainConfig tc;
  tc.max_epochs = 2;
  tc.batch_size = 8;

  ForecastModel a = ForecastModel::build(tiny_model_config(data));
  ForecastModel b = ForecastModel::build(tiny_model_config(data));
  TrainHistory ha = train(a, data, tc);
  TrainHistory hb = train(b, data, tc);
  CHECK_EQ(ha.to_csv(), hb.to_csv());
  auto pa = a.parameters(), pb = b.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i)
    CHECK_EQ(max_abs_diff(pa[i]->value, pb[i]->value), 0.0);
}

TEST_CASE("loss decreases when overfitting a tiny noiseless set") {
  Dataset data = tiny_dataset(4, 100, 0.0, 17);
  ForecastModel m = ForecastModel::build(tiny_model_config(data));
  TrainConfig tc;
  tc.max_epochs = 8;
  tc.batch_size = 16;
  tc.lr = 0.01;
  TrainHistory h = train(m, data, tc);
  REQUIRE(h.epochs.size() >= 2);
  CHECK(h.epochs.back().train_loss < h.epochs.front().train_loss);
}

TEST_CASE("early stopping restores the best validation epoch") {
  Dataset data = tiny_dataset(4, 80, 0.3, 19);
  ForecastModel m = ForecastModel::build(tiny_model_config(data));
  TrainConfig tc;
  tc.max_epochs = 30;
  tc.patience = 2;
  tc.batch_size = 8;
  tc.lr = 0.05;  // aggressive on purpose so validation loss bounces
  TrainHistory h = train(m, data, tc);

  double best = h.epochs[h.best_epoch - 1].val_loss;
  for (const EpochStats& e : h.epochs) CHECK(best <= e.val_loss);
  if (h.epochs.size() < tc.max_epochs) {
    // stopped early: the tail after the best epoch is exactly the patience run
    CHECK_EQ(h.epochs.size() - h.best_epoch, 2);
  }

  // the restored model reproduces the best validation loss
  double total = 0.0;
  for (const Window& w : data.val) {
    Tensor pred = m.predict(w.input);
    total += l1_loss(data.normalizer.denormalize(pred), w.target);
  }
  CHECK_EQ(total / double(data.val.size()), doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("patience zero still tolerates one bad epoch before stopping") {
  Dataset data = tiny_dataset(4, 80, 0.3, 23);
  ForecastModel m = ForecastModel::build(tiny_model_config(data));
  TrainConfig tc;
  tc.max_epochs = 50;
  tc.patience = 0;
  tc.batch_size = 8;
  tc.lr = 0.05;
  TrainHistory h = train(m, data, tc);
  if (h.epochs.size() < tc.max_epochs) CHECK_EQ(h.epochs.size() - h.best_epoch, 1);
}

TEST_CASE("history csv layout") {
  TrainHistory h;
  h.epochs = {{1, 1.5, 2.5, 0.1}, {2, 1.25, 2.0, 0.2}};
  h.best_epoch = 2;
  CHECK_EQ(h.to_csv(), "epoch,train_loss,val_loss\n1,1.5,2.5\n2,1.25,2\n");
}
