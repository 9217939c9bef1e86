#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "agcrn/checkpoint.hpp"
#include "agcrn/errors.hpp"
#include "agcrn/gradcheck.hpp"
#include "agcrn/metrics.hpp"
#include "agcrn/rng.hpp"
#include "agcrn/run_config.hpp"
#include "agcrn/synth.hpp"
#include "agcrn/training.hpp"

namespace fs = std::filesystem;
using namespace agcrn;

namespace {

struct Overrides {
  std::string config, data, graph, out;
  std::optional<std::size_t> nodes, embed_dim, hidden, layers, horizon, lookback;
  std::optional<std::size_t> batch_size, epochs, patience, steps_per_day;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;
  std::optional<std::string> variant, dagg_variant;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "INI config file");
  cmd->add_option("--data", o.data, "series CSV (rows = timesteps, columns = nodes)");
  cmd->add_option("--graph", o.graph, "edge-list CSV (u,v,weight) for predefined-graph variants");
  cmd->add_option("--out", o.out, "output directory (default out)");
  cmd->add_option("--seed", o.seed, "seed for init, shuffling and probes");
  cmd->add_option("--variant", o.variant,
                  "agcrn | agcrn_i | gcgru | napl_gcgru | dagg_gcgru | gru_ed");
  cmd->add_option("--dagg-variant", o.dagg_variant, "dagg_r | dagg_1 | dagg_2");
  cmd->add_option("--nodes", o.nodes, "node count (inferred from data when omitted)");
  cmd->add_option("--embed-dim", o.embed_dim, "node embedding width d");
  cmd->add_option("--hidden", o.hidden, "hidden units per cell");
  cmd->add_option("--layers", o.layers, "stacked recurrent layers");
  cmd->add_option("--horizon", o.horizon, "prediction steps");
  cmd->add_option("--lookback", o.lookback, "input window steps");
  cmd->add_option("--lr", o.lr, "Adam learning rate");
  cmd->add_option("--batch-size", o.batch_size, "windows per training batch");
  cmd->add_option("--epochs", o.epochs, "maximum training epochs");
  cmd->add_option("--patience", o.patience, "early-stopping patience");
  cmd->add_option("--steps-per-day", o.steps_per_day, "timesteps per day (HA slots)");
}

RunConfig assemble(const Overrides& o) {
  RunConfig rc;
  if (!o.config.empty()) rc = load_run_config(o.config);
  if (!o.data.empty()) rc.data_path = o.data;
  if (!o.graph.empty()) rc.graph_path = o.graph;
  if (!o.out.empty()) rc.out_dir = o.out;
  if (o.steps_per_day) rc.steps_per_day = *o.steps_per_day;
  if (o.nodes) rc.model.nodes = *o.nodes;
  if (o.embed_dim) rc.model.embed_dim = *o.embed_dim;
  if (o.hidden) rc.model.hidden = *o.hidden;
  if (o.layers) rc.model.layers = *o.layers;
  if (o.horizon) rc.model.horizon = *o.horizon;
  if (o.lookback) rc.model.lookback = *o.lookback;
  if (o.variant) rc.model.variant = parse_variant(*o.variant);
  if (o.dagg_variant) rc.model.dagg_variant = parse_dagg_variant(*o.dagg_variant);
  if (o.lr) rc.train.lr = *o.lr;
  if (o.batch_size) rc.train.batch_size = *o.batch_size;
  if (o.epochs) rc.train.max_epochs = *o.epochs;
  if (o.patience) rc.train.patience = *o.patience;
  if (o.seed) {
    rc.train.seed = *o.seed;
    rc.model.seed = *o.seed;
  }
  return rc;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  out << text;
  if (!out) throw DataError("failed writing " + p.string());
}

RawSeries load_series(const RunConfig& rc) {
  if (rc.data_path.empty())
    throw ConfigError("no data file given (--data or [data] data)");
  RawSeries s = load_csv(rc.data_path);
  s.steps_per_day = rc.steps_per_day;
  if (s.any_missing()) s = interpolate_missing(s);
  return s;
}

std::optional<PredefinedGraph> load_graph_if_needed(const RunConfig& rc) {
  if (!rc.model.needs_predefined_graph()) return std::nullopt;
  if (rc.graph_path.empty())
    throw ConfigError(std::string("variant ") + variant_name(rc.model.variant) +
                      " needs a predefined graph (--graph)");
  return load_edge_list(rc.graph_path, rc.model.nodes);
}

struct EvalTensors {
  Tensor pred, truth;  // [tau,N,M]
};

EvalTensors predict_split(const ForecastModel& model, const Dataset& ds,
                          const std::vector<Window>& windows, const char* name) {
  if (windows.empty()) throw ConfigError(std::string("eval: ") + name + " split has no windows");
  const std::size_t tau = ds.horizon, n_nodes = ds.nodes, m_count = windows.size();
  EvalTensors out{Tensor({tau, n_nodes, m_count}), Tensor({tau, n_nodes, m_count})};
  ForecastModel::Plan plan = model.make_plan(false);
  for (std::size_t m = 0; m < m_count; ++m) {
    Tensor p = ds.normalizer.denormalize(model.forward(plan, windows[m].input).val());
    for (std::size_t h = 0; h < tau; ++h)
      for (std::size_t n = 0; n < n_nodes; ++n) {
        out.pred.at(h, n, m) = p.at(h, n);
        out.truth.at(h, n, m) = windows[m].target.at(h, n);
      }
  }
  return out;
}

void report_metrics(const MetricsReport& rep, const fs::path& dir, const std::string& stem) {
  write_text(dir / (stem + ".csv"), rep.to_csv());
  write_text(dir / (stem + ".json"), rep.to_json());
  std::cout << stem << ": MAE " << rep.average.mae << "  RMSE " << rep.average.rmse << "  MAPE "
            << rep.average.mape * 100.0 << "%\n";
}

int cmd_train(const Overrides& o) {
  RunConfig rc = assemble(o);
  RawSeries s = load_series(rc);
  if (rc.model.nodes == 0)
    rc.model.nodes = s.cols();
  else if (rc.model.nodes != s.cols())
    throw ConfigError("config says " + std::to_string(rc.model.nodes) + " nodes but " +
                      rc.data_path + " has " + std::to_string(s.cols()) + " columns");
  Dataset ds = split_and_window(s, rc.model.lookback, rc.model.horizon);
  ForecastModel model = ForecastModel::build(rc.model, load_graph_if_needed(rc));
  fs::create_directories(rc.out_dir);

  std::cout << "training " << variant_name(rc.model.variant) << ": " << ds.train.size() << "/"
            << ds.val.size() << "/" << ds.test.size() << " windows, " << count_params(rc.model)
            << " parameters\n";
  TrainHistory hist = train(model, ds, rc.train, [](const EpochStats& e) {
    std::cout << "epoch " << e.epoch << ": train " << e.train_loss << "  val " << e.val_loss
              << "  (" << e.seconds << " s)\n";
  });

  const fs::path dir = rc.out_dir;
  save_checkpoint(model, ds.normalizer, (dir / "checkpoint.json").string());
  hist.write_csv((dir / "history.csv").string());
  write_text(dir / "config.ini", to_ini(rc));
  EvalTensors ev = predict_split(model, ds, ds.val, "val");
  report_metrics(compute_metrics(ev.pred, ev.truth), dir, "metrics_val");
  std::cout << "best epoch " << hist.best_epoch << ", artifacts in " << dir.string() << "\n";
  return 0;
}

int cmd_eval(const Overrides& o, const std::string& checkpoint, const std::string& split,
             bool ha, bool self_eval) {
  RunConfig rc = assemble(o);
  RawSeries s = load_series(rc);
  fs::create_directories(rc.out_dir);
  const fs::path dir = rc.out_dir;

  if (ha) {
    const SplitRatios ratios;
    const std::size_t total = s.rows();
    const std::size_t train_end = std::size_t(std::floor(double(total) * ratios.train));
    const std::size_t val_end =
        train_end + std::size_t(std::floor(double(total) * ratios.val));
    std::size_t begin, end;
    if (split == "train") { begin = 0; end = train_end; }
    else if (split == "val") { begin = train_end; end = val_end; }
    else if (split == "test") { begin = val_end; end = total; }
    else throw ConfigError("unknown split '" + split + "' (train, val or test)");

    HaModel m = ha_fit(s, train_end);
    const std::size_t tau = rc.model.horizon, n_nodes = s.cols(), rows = end - begin;
    if (rows == 0) throw ConfigError("eval: empty " + split + " split");
    Tensor pred({tau, n_nodes, rows}), truth({tau, n_nodes, rows});
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t slot = (begin + r) % m.steps_per_day;
      for (std::size_t h = 0; h < tau; ++h)
        for (std::size_t n = 0; n < n_nodes; ++n) {
          pred.at(h, n, r) = m.slot_means.at(slot, n);
          truth.at(h, n, r) = s.values.at(begin + r, n);
        }
    }
    report_metrics(compute_metrics(pred, truth), dir, "metrics_" + split + "_ha");
    return 0;
  }

  if (checkpoint.empty()) throw ConfigError("eval needs --checkpoint (or --ha)");
  std::optional<Normalizer> norm;
  ForecastModel model = load_checkpoint(checkpoint, &norm);
  if (model.config().nodes != s.cols())
    throw ConfigError("checkpoint expects " + std::to_string(model.config().nodes) +
                      " nodes but " + rc.data_path + " has " + std::to_string(s.cols()) +
                      " columns");
  Dataset ds = split_and_window(s, model.config().lookback, model.config().horizon, {},
                                norm ? &*norm : nullptr);
  const std::vector<Window>* windows = nullptr;
  if (split == "train") windows = &ds.train;
  else if (split == "val") windows = &ds.val;
  else if (split == "test") windows = &ds.test;
  else throw ConfigError("unknown split '" + split + "' (train, val or test)");

  EvalTensors ev = predict_split(model, ds, *windows, split.c_str());
  if (self_eval) ev.truth = ev.pred;
  report_metrics(compute_metrics(ev.pred, ev.truth), dir, "metrics_" + split);
  return 0;
}

int cmd_gradcheck(const Overrides& o, bool corrupt) {
  RunConfig rc = assemble(o);
  if (rc.model.nodes == 0) throw ConfigError("gradcheck needs --nodes");
  const std::size_t load = rc.model.nodes * rc.model.hidden * rc.model.embed_dim;
  if (load > 10000)
    throw ConfigError("config too large for gradcheck: nodes*hidden*embed-dim = " +
                      std::to_string(load) + " > 10000");
  ForecastModel model = ForecastModel::build(rc.model, load_graph_if_needed(rc));

  Rng rng(rc.train.seed);
  Tensor window({rc.model.lookback, rc.model.nodes, rc.model.in_features});
  for (std::size_t i = 0; i < window.size(); ++i) window[i] = 2.0 * rng.uniform() - 1.0;
  Tensor target({rc.model.horizon, rc.model.nodes});
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = 2.0 * rng.uniform() - 1.0;

  std::vector<Parameter*> params = model.parameters();
  auto loss = [&]() {
    ad::Value l = ad::l1_mean(model.forward(model.make_plan(true), window), target);
    ad::backward(l);
    return l.item();
  };
  GradCheckOptions opt;
  opt.seed = rc.train.seed;
  opt.corrupt = corrupt;
  CheckReport rep = finite_difference_check(loss, params, opt);

  fs::create_directories(rc.out_dir);
  rep.write_json((fs::path(rc.out_dir) / "gradcheck.json").string());
  for (const ParamCheck& p : rep.params)
    std::cout << (p.pass ? "pass" : "FAIL") << "  " << p.name << "  max rel err " << p.max_rel_err
              << "  (" << p.entries_checked << " entries)\n";
  std::cout << (rep.pass ? "gradcheck passed" : "gradcheck FAILED") << " (step " << rep.step
            << ", tol " << rep.tol << ")\n";
  return rep.pass ? 0 : 1;
}

int cmd_count_params(const Overrides& o) {
  RunConfig rc = assemble(o);
  if (rc.model.nodes == 0) throw ConfigError("count-params needs --nodes");
  std::cout << count_params(rc.model) << "\n";
  return 0;
}

int cmd_export_graph(const Overrides& o, const std::string& checkpoint) {
  RunConfig rc = assemble(o);
  ForecastModel model = load_checkpoint(checkpoint);
  std::vector<Parameter*> embs = model.embeddings();
  if (embs.empty())
    throw ConfigError("checkpoint variant " + std::string(variant_name(model.config().variant)) +
                      " has no node embeddings");
  const Parameter* emb = model.dagg_embedding() ? model.dagg_embedding() : embs.front();
  const Tensor& e = emb->value;
  const std::size_t n_nodes = e.extent(0), dim = e.extent(1);

  fs::create_directories(rc.out_dir);
  const fs::path dir = rc.out_dir;

  std::string etext;
  for (std::size_t j = 0; j < dim; ++j) etext += (j ? ",e" : "e") + std::to_string(j);
  etext += "\n";
  for (std::size_t i = 0; i < n_nodes; ++i) {
    for (std::size_t j = 0; j < dim; ++j)
      etext += (j ? "," : "") + format_double(e.at(i, j));
    etext += "\n";
  }
  write_text(dir / "embedding.csv", etext);

  const Tensor a = dagg_matrix(e).a_tilde;
  std::string atext;
  for (std::size_t j = 0; j < n_nodes; ++j) atext += (j ? ",a" : "a") + std::to_string(j);
  atext += "\n";
  for (std::size_t i = 0; i < n_nodes; ++i) {
    for (std::size_t j = 0; j < n_nodes; ++j)
      atext += (j ? "," : "") + format_double(a.at(i, j));
    atext += "\n";
  }
  write_text(dir / "adjacency.csv", atext);
  std::cout << "wrote " << (dir / "embedding.csv").string() << " (" << n_nodes << "x" << dim
            << ") and " << (dir / "adjacency.csv").string() << "\n";
  return 0;
}

int cmd_synth(const Overrides& o, SynthOptions so) {
  if (o.nodes) so.nodes = *o.nodes;
  if (o.seed) so.seed = *o.seed;
  if (o.steps_per_day) so.steps_per_day = *o.steps_per_day;
  RawSeries s = synth_generate(so);

  const fs::path dir = o.out.empty() ? fs::path("out") : fs::path(o.out);
  fs::create_directories(dir);

  std::string text;
  for (std::size_t n = 0; n < so.nodes; ++n) text += (n ? ",n" : "n") + std::to_string(n);
  text += "\n";
  for (std::size_t t = 0; t < s.rows(); ++t) {
    for (std::size_t n = 0; n < s.cols(); ++n)
      text += (n ? "," : "") + format_double(s.values.at(t, n));
    text += "\n";
  }
  write_text(dir / "data.csv", text);

  nlohmann::json j;
  j["nodes"] = so.nodes;
  j["communities"] = so.communities;
  j["steps"] = so.steps;
  j["steps_per_day"] = so.steps_per_day;
  j["noise_std"] = so.noise_std;
  j["seed"] = so.seed;
  j["assignment"] = synth_communities(so.nodes, so.communities);
  write_text(dir / "communities.json", j.dump(2) + "\n");

  std::string gtext = "u,v,w\n";
  for (const auto& edge : community_graph(so.nodes, so.communities).edges)
    gtext += std::to_string(edge.u) + "," + std::to_string(edge.v) + "," +
             format_double(edge.w) + "\n";
  write_text(dir / "graph.csv", gtext);

  std::cout << "wrote " << (dir / "data.csv").string() << " (" << s.rows() << "x" << s.cols()
            << "), communities.json, graph.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AGCRN-family traffic forecasting toolkit"};
  app.require_subcommand(1);

  Overrides o_train, o_eval, o_grad, o_count, o_export, o_synth;
  std::string eval_checkpoint, eval_split = "test", export_checkpoint;
  bool eval_ha = false, eval_self = false, grad_corrupt = false;
  SynthOptions synth_opts;

  CLI::App* c_train = app.add_subcommand("train", "train a model and write artifacts");
  add_common_flags(c_train, o_train);

  CLI::App* c_eval = app.add_subcommand("eval", "evaluate a checkpoint or the HA baseline");
  add_common_flags(c_eval, o_eval);
  c_eval->add_option("--checkpoint", eval_checkpoint, "checkpoint JSON to evaluate");
  c_eval->add_option("--split", eval_split, "train | val | test (default test)");
  c_eval->add_flag("--ha", eval_ha, "evaluate the Historical Average baseline");
  c_eval->add_flag("--self-eval", eval_self)->group("");

  CLI::App* c_grad = app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_common_flags(c_grad, o_grad);
  c_grad->add_flag("--corrupt-backward", grad_corrupt)->group("");

  CLI::App* c_count = app.add_subcommand("count-params", "print the exact parameter count");
  add_common_flags(c_count, o_count);

  CLI::App* c_export = app.add_subcommand("export-graph", "export E and A~ from a checkpoint");
  add_common_flags(c_export, o_export);
  c_export->add_option("--checkpoint", export_checkpoint, "checkpoint JSON")->required();

  CLI::App* c_synth = app.add_subcommand("synth", "generate a community-structured dataset");
  add_common_flags(c_synth, o_synth);
  c_synth->add_option("--communities", synth_opts.communities, "community count");
  c_synth->add_option("--steps", synth_opts.steps, "timesteps to generate");
  c_synth->add_option("--noise-std", synth_opts.noise_std, "gaussian noise level");
  c_synth->add_option("--coupling", synth_opts.coupling, "lagged within-community coupling");
  c_synth->add_option("--amp-min", synth_opts.amp_min, "per-node amplitude lower bound");
  c_synth->add_option("--amp-max", synth_opts.amp_max, "per-node amplitude upper bound");
  c_synth->add_option("--phase-jitter", synth_opts.phase_jitter, "per-node phase jitter, steps");

  int code = 0;
  c_train->callback([&] { code = cmd_train(o_train); });
  c_eval->callback([&] { code = cmd_eval(o_eval, eval_checkpoint, eval_split, eval_ha, eval_self); });
  c_grad->callback([&] { code = cmd_gradcheck(o_grad, grad_corrupt); });
  c_count->callback([&] { code = cmd_count_params(o_count); });
  c_export->callback([&] { code = cmd_export_graph(o_export, export_checkpoint); });
  c_synth->callback([&] { code = cmd_synth(o_synth, synth_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return code;
}
