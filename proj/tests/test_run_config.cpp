#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "agcrn/errors.hpp"
#include "agcrn/run_config.hpp"

using namespace agcrn;

TEST_CASE("ini parsing covers every section") {
  RunConfig cfg;
  apply_ini(cfg,
            "[data]\n"
            "data = series.csv\n"
            "out = runs/a\n"
            "steps-per-day = 48\n"
            "\n"
            "[model]\n"
            "variant = dagg_gcgru\n"
            "dagg-variant = dagg_2\n"
            "hidden = 32\n"
            "layers = 1\n"
            "embed-dim = 4\n"
            "horizon = 6\n"
            "lookback = 9\n"
            "\n"
            "[train]\n"
            "lr = 0.01\n"
            "batch-size = 16\n"
            "epochs = 7\n"
            "patience = 3\n"
            "seed = 42\n",
            "inline");
  CHECK_EQ(cfg.data_path, "series.csv");
  CHECK_EQ(cfg.out_dir, "runs/a");
  CHECK_EQ(cfg.steps_per_day, 48);
  CHECK(cfg.model.variant == Variant::dagg_gcgru);
  CHECK(cfg.model.dagg_variant == DaggVariant::dagg_2);
  CHECK_EQ(cfg.model.hidden, 32);
  CHECK_EQ(cfg.model.layers, 1);
  CHECK_EQ(cfg.model.embed_dim, 4);
  CHECK_EQ(cfg.model.horizon, 6);
  CHECK_EQ(cfg.model.lookback, 9);
  CHECK_EQ(cfg.train.lr, 0.01);
  CHECK_EQ(cfg.train.batch_size, 16);
  CHECK_EQ(cfg.train.max_epochs, 7);
  CHECK_EQ(cfg.train.patience, 3);
  CHECK_EQ(cfg.train.seed, 42);
  // one seed key drives both training and initialization
  CHECK_EQ(cfg.model.seed, 42);
}

TEST_CASE("comments, blank lines and whitespace are tolerated") {
  RunConfig cfg;
  apply_ini(cfg,
            "# leading comment\n"
            "\n"
            "[model]\n"
            "; another comment\n"
            "  hidden   =   8  \n",
            "inline");
  CHECK_EQ(cfg.model.hidden, 8);
}

TEST_CASE("unknown sections and keys are rejected with context") {
  RunConfig cfg;
  CHECK_THROWS_WITH_AS(apply_ini(cfg, "[oops]\n", "f.ini"),
                       doctest::Contains("f.ini:1"), ConfigError);
  CHECK_THROWS_WITH_AS(apply_ini(cfg, "[model]\nwat = 3\n", "f.ini"),
                       doctest::Contains("unknown key"), ConfigError);
  CHECK_THROWS_AS(apply_ini(cfg, "hidden = 8\n", "f.ini"), ConfigError);  // no section yet
  CHECK_THROWS_AS(apply_ini(cfg, "[model]\nhidden\n", "f.ini"), ConfigError);
  CHECK_THROWS_AS(apply_ini(cfg, "[model\n", "f.ini"), ConfigError);
}

TEST_CASE("values are validated while parsing") {
  RunConfig cfg;
  CHECK_THROWS_AS(apply_ini(cfg, "[model]\nhidden = top\n", "f.ini"), ConfigError);
  CHECK_THROWS_AS(apply_ini(cfg, "[model]\nhidden = -2\n", "f.ini"), ConfigError);
  CHECK_THROWS_AS(apply_ini(cfg, "[train]\nlr = fast\n", "f.ini"), ConfigError);
  CHECK_THROWS_AS(apply_ini(cfg, "[model]\nvariant = lstm\n", "f.ini"), ConfigError);
}

TEST_CASE("later keys override earlier ones") {
  RunConfig cfg;
  apply_ini(cfg, "[model]\nhidden = 8\nhidden = 16\n", "inline");
  CHECK_EQ(cfg.model.hidden, 16);
  // a second file layered on top wins as well
  apply_ini(cfg, "[model]\nhidden = 24\n", "inline2");
  CHECK_EQ(cfg.model.hidden, 24);
}

TEST_CASE("the effective-config echo round-trips") {
  RunConfig cfg;
  cfg.data_path = "x.csv";
  cfg.graph_path = "g.csv";
  cfg.out_dir = "runs/echo";
  cfg.steps_per_day = 96;
  cfg.model.nodes = 12;
  cfg.model.variant = Variant::gru_ed;
  cfg.model.hidden = 20;
  cfg.train.lr = 0.0005;
  cfg.train.seed = 7;
  cfg.model.seed = 7;

  RunConfig back;
  apply_ini(back, to_ini(cfg), "echo");
  CHECK_EQ(back.data_path, cfg.data_path);
  CHECK_EQ(back.graph_path, cfg.graph_path);
  CHECK_EQ(back.out_dir, cfg.out_dir);
  CHECK_EQ(back.steps_per_day, cfg.steps_per_day);
  CHECK_EQ(back.model.nodes, cfg.model.nodes);
  CHECK(back.model.variant == cfg.model.variant);
  CHECK_EQ(back.model.hidden, cfg.model.hidden);
  CHECK_EQ(back.train.lr, cfg.train.lr);
  CHECK_EQ(back.train.seed, cfg.train.seed);
  CHECK_EQ(to_ini(back), to_ini(cfg));
}

TEST_CASE("config files load from disk and report the path on errors") {
  const std::string path = "run_config_test.ini";
  {
    std::ofstream out(path, std::ios::binary);
    out << "[train]\nseed = 5\n";
  }
  RunConfig cfg = load_run_config(path);
  CHECK_EQ(cfg.train.seed, 5);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_run_config(path), ConfigError);

  {
    std::ofstream out(path, std::ios::binary);
    out << "[train]\nwat = 5\n";
  }
  CHECK_THROWS_WITH_AS(load_run_config(path), doctest::Contains("run_config_test.ini:2"),
                       ConfigError);
  std::remove(path.c_str());
}
