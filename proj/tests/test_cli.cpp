#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "agcrn/data.hpp"
#include "agcrn/graph.hpp"

using namespace agcrn;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string output;  // stdout and stderr combined
};

RunResult run_cli(const std::string& args) {
  const fs::path log = fs::path("cli_scratch") / "last_output.txt";
  fs::create_directories("cli_scratch");
  const std::string cmd = std::string(AGCRN_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string scratch(const std::string& leaf) { return (fs::path("cli_scratch") / leaf).string(); }

}  // namespace

TEST_CASE("a subcommand is required") {
  RunResult r = run_cli("");
  CHECK_EQ(r.code, 2);
}

TEST_CASE("help exits cleanly and lists the subcommands") {
  RunResult r = run_cli("--help");
  CHECK_EQ(r.code, 0);
  for (const char* name : {"train", "eval", "gradcheck", "count-params", "export-graph", "synth"})
    CHECK_MESSAGE(r.output.find(name) != std::string::npos, name);
}

TEST_CASE("count-params prints the exact totals") {
  RunResult r = run_cli(
      "count-params --nodes 307 --hidden 64 --layers 2 --embed-dim 10 --horizon 12 --lookback 12");
  CHECK_EQ(r.code, 0);
  CHECK_EQ(r.output, "748810\n");
  r = run_cli(
      "count-params --nodes 307 --hidden 64 --layers 2 --embed-dim 2 --horizon 12 --lookback 12");
  CHECK_EQ(r.output, "150386\n");
}

TEST_CASE("unknown flags and bad values exit with the config code") {
  CHECK_EQ(run_cli("count-params --nodes 307 --frobnicate").code, 2);
  CHECK_EQ(run_cli("count-params --nodes 0").code, 2);
  CHECK_EQ(run_cli("train --data cli_scratch/no_such_file.csv --epochs 1").code, 2);
}

TEST_CASE("synth writes a loadable dataset bundle") {
  const std::string out = scratch("synth_out");
  fs::remove_all(out);
  RunResult r = run_cli("synth --nodes 6 --communities 2 --steps 80 --noise-std 0.05 --seed 3 "
                        "--steps-per-day 16 --out " + out);
  REQUIRE_EQ(r.code, 0);

  RawSeries s = load_csv(out + "/data.csv");
  CHECK_EQ(s.rows(), 80);
  CHECK_EQ(s.cols(), 6);
  CHECK_FALSE(s.any_missing());

  PredefinedGraph g = load_edge_list(out + "/graph.csv", 6);
  CHECK_EQ(g.edges.size(), 6);  // two complete 3-node blocks

  std::ifstream com(out + "/communities.json");
  REQUIRE(com.good());
  std::stringstream ss;
  ss << com.rdbuf();
  CHECK(ss.str().find("communities") != std::string::npos);
}

TEST_CASE("train produces the full artifact set and eval reproduces it") {
  const std::string data_dir = scratch("pipe_data"), run_dir = scratch("pipe_run");
  const std::string eval_dir = scratch("pipe_eval");
  fs::remove_all(data_dir);
  fs::remove_all(run_dir);
  fs::remove_all(eval_dir);
  REQUIRE_EQ(run_cli("synth --nodes 4 --communities 2 --steps 90 --noise-std 0.05 --seed 7 "
                     "--steps-per-day 12 --out " + data_dir).code, 0);

  const std::string common =
      " --data " + data_dir + "/data.csv --steps-per-day 12 --hidden 6 --embed-dim 2 --layers 1 "
      "--horizon 2 --lookback 4 --seed 9";
  RunResult t = run_cli("train" + common + " --epochs 2 --batch-size 8 --out " + run_dir);
  REQUIRE_EQ(t.code, 0);
  for (const char* leaf : {"checkpoint.json", "history.csv", "config.ini", "metrics_val.csv",
                           "metrics_val.json"})
    CHECK_MESSAGE(fs::exists(fs::path(run_dir) / leaf), leaf);

  // history: header plus one line per epoch
  std::ifstream hist(run_dir + "/history.csv");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(hist, line)) ++lines;
  CHECK_EQ(lines, 3);

  RunResult e = run_cli("eval --data " + data_dir + "/data.csv --checkpoint " + run_dir +
                        "/checkpoint.json --split val --out " + eval_dir);
  REQUIRE_EQ(e.code, 0);
  CHECK(fs::exists(fs::path(eval_dir) / "metrics_val.csv"));
  CHECK(fs::exists(fs::path(eval_dir) / "metrics_val.json"));

  // the standalone eval reproduces the metrics written at training time
  std::ifstream a(run_dir + "/metrics_val.csv"), b(eval_dir + "/metrics_val.csv");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK_EQ(sa.str(), sb.str());

  // reruns with the same seed are byte-identical
  const std::string rerun_dir = scratch("pipe_rerun");
  fs::remove_all(rerun_dir);
  REQUIRE_EQ(run_cli("train" + common + " --epochs 2 --batch-size 8 --out " + rerun_dir).code, 0);
  for (const char* leaf : {"checkpoint.json", "history.csv"}) {
    std::ifstream c(fs::path(run_dir) / leaf), d(fs::path(rerun_dir) / leaf);
    std::stringstream sc, sd;
    sc << c.rdbuf();
    sd << d.rdbuf();
    CHECK_MESSAGE(sc.str() == sd.str(), leaf);
  }
}

TEST_CASE("eval scores the historical-average baseline") {
  const std::string data_dir = scratch("ha_data"), out_dir = scratch("ha_eval");
  fs::remove_all(data_dir);
  fs::remove_all(out_dir);
  REQUIRE_EQ(run_cli("synth --nodes 3 --communities 1 --steps 120 --noise-std 0.01 --seed 11 "
                     "--steps-per-day 12 --out " + data_dir).code, 0);
  RunResult r = run_cli("eval --ha --data " + data_dir + "/data.csv --steps-per-day 12 "
                        "--horizon 2 --lookback 4 --split test --out " + out_dir);
  REQUIRE_EQ(r.code, 0);
  CHECK(fs::exists(fs::path(out_dir) / "metrics_test_ha.csv"));
  CHECK(fs::exists(fs::path(out_dir) / "metrics_test_ha.json"));
}

TEST_CASE("gradcheck passes on a tiny model and reports on demand") {
  const std::string out_dir = scratch("grad_out");
  fs::remove_all(out_dir);
  RunResult ok = run_cli("gradcheck --nodes 3 --hidden 4 --embed-dim 2 --lookback 2 --horizon 2 "
                         "--seed 4 --out " + out_dir);
  CHECK_EQ(ok.code, 0);
  CHECK(fs::exists(fs::path(out_dir) / "gradcheck.json"));

  RunResult bad = run_cli("gradcheck --nodes 3 --hidden 4 --embed-dim 2 --lookback 2 --horizon 2 "
                          "--seed 4 --corrupt-backward --out " + out_dir);
  CHECK_EQ(bad.code, 1);
}

TEST_CASE("export-graph writes the embedding and adjacency tables") {
  const std::string data_dir = scratch("exp_data"), run_dir = scratch("exp_run");
  const std::string out_dir = scratch("exp_out");
  fs::remove_all(data_dir);
  fs::remove_all(run_dir);
  fs::remove_all(out_dir);
  REQUIRE_EQ(run_cli("synth --nodes 4 --communities 2 --steps 70 --seed 13 --steps-per-day 10 "
                     "--out " + data_dir).code, 0);
  REQUIRE_EQ(run_cli("train --data " + data_dir + "/data.csv --steps-per-day 10 --hidden 4 "
                     "--embed-dim 3 --layers 1 --horizon 2 --lookback 3 --epochs 1 "
                     "--batch-size 8 --seed 2 --out " + run_dir).code, 0);
  RunResult r = run_cli("export-graph --checkpoint " + run_dir + "/checkpoint.json --out " + out_dir);
  REQUIRE_EQ(r.code, 0);

  RawSeries emb = load_csv(out_dir + "/embedding.csv");
  CHECK_EQ(emb.rows(), 4);
  CHECK_EQ(emb.cols(), 3);

  RawSeries adj = load_csv(out_dir + "/adjacency.csv");
  CHECK_EQ(adj.rows(), 4);
  CHECK_EQ(adj.cols(), 4);
  for (std::size_t i = 0; i < 4; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 4; ++j) sum += adj.values.at(i, j);
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("flags override config-file values") {
  const std::string ini = scratch("override.ini");
  {
    std::ofstream out(ini);
    out << "[model]\nnodes = 307\nhidden = 64\nlayers = 2\nembed-dim = 10\nhorizon = 12\n"
           "lookback = 12\n";
  }
  RunResult base = run_cli("count-params --config " + ini);
  CHECK_EQ(base.output, "748810\n");
  RunResult overridden = run_cli("count-params --config " + ini + " --embed-dim 2");
  CHECK_EQ(overridden.output, "150386\n");
}
