#include "agcrn/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "agcrn/errors.hpp"

namespace agcrn {

using nlohmann::json;

std::string checkpoint_to_json(const ForecastModel& model,
                               const std::optional<Normalizer>& normalizer) {
  const ModelConfig& c = model.config();
  json j;
  j["format"] = "agcrn-checkpoint";
  j["version"] = 1;
  j["config"] = {{"nodes", c.nodes},
                 {"in_features", c.in_features},
                 {"hidden", c.hidden},
                 {"layers", c.layers},
                 {"embed_dim", c.embed_dim},
                 {"horizon", c.horizon},
                 {"lookback", c.lookback},
                 {"variant", variant_name(c.variant)},
                 {"dagg_variant", dagg_variant_name(c.dagg_variant)},
                 {"seed", c.seed}};
  if (normalizer)
    j["normalizer"] = {{"mean", normalizer->mean}, {"std", normalizer->std}};
  else
    j["normalizer"] = nullptr;
  if (model.graph()) {
    json edges = json::array();
    for (const auto& e : model.graph()->edges) edges.push_back({e.u, e.v, e.w});
    j["graph"] = {{"nodes", model.graph()->nodes}, {"edges", edges}};
  } else {
    j["graph"] = nullptr;
  }
  j["params"] = json::array();
  for (const Parameter* p : model.parameters()) {
    json entry;
    entry["name"] = p->name;
    entry["shape"] = p->value.shape();
    entry["data"] = std::vector<double>(p->value.flat().begin(), p->value.flat().end());
    j["params"].push_back(std::move(entry));
  }
  return j.dump(2) + "\n";
}

ForecastModel checkpoint_from_json(const std::string& text,
                                   std::optional<Normalizer>* normalizer_out) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint parse error: ") + e.what());
  }
  try {
    if (j.value("format", "") != std::string("agcrn-checkpoint"))
      throw DataError("not an agcrn checkpoint");
    if (j.value("version", 0) != 1)
      throw DataError("unsupported checkpoint version");

    const json& jc = j.at("config");
    ModelConfig cfg;
    cfg.nodes = jc.at("nodes").get<std::size_t>();
    cfg.in_features = jc.at("in_features").get<std::size_t>();
    cfg.hidden = jc.at("hidden").get<std::size_t>();
    cfg.layers = jc.at("layers").get<std::size_t>();
    cfg.embed_dim = jc.at("embed_dim").get<std::size_t>();
    cfg.horizon = jc.at("horizon").get<std::size_t>();
    cfg.lookback = jc.at("lookback").get<std::size_t>();
    cfg.variant = parse_variant(jc.at("variant").get<std::string>());
    cfg.dagg_variant = parse_dagg_variant(jc.at("dagg_variant").get<std::string>());
    cfg.seed = jc.at("seed").get<std::uint64_t>();

    std::optional<PredefinedGraph> graph;
    if (!j.at("graph").is_null()) {
      PredefinedGraph g;
      g.nodes = j["graph"].at("nodes").get<std::size_t>();
      for (const auto& e : j["graph"].at("edges"))
        g.edges.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(),
                           e.at(2).get<double>()});
      graph = std::move(g);
    }

    ForecastModel model = ForecastModel::build(cfg, std::move(graph));

    std::size_t assigned = 0;
    for (const auto& entry : j.at("params")) {
      const std::string name = entry.at("name").get<std::string>();
      Parameter* p = model.find_param(name);
      if (!p) throw DataError("checkpoint has unknown parameter '" + name + "'");
      const auto shape = entry.at("shape").get<Shape>();
      if (shape != p->value.shape())
        throw DataError("checkpoint parameter '" + name + "' has wrong shape");
      const auto data = entry.at("data").get<std::vector<double>>();
      if (data.size() != p->value.size())
        throw DataError("checkpoint parameter '" + name + "' has wrong size");
      for (std::size_t i = 0; i < data.size(); ++i) p->value[i] = data[i];
      ++assigned;
    }
    if (assigned != model.parameters().size())
      throw DataError("checkpoint is missing parameters (" + std::to_string(assigned) + " of " +
                      std::to_string(model.parameters().size()) + ")");

    if (normalizer_out) {
      if (j.at("normalizer").is_null())
        *normalizer_out = std::nullopt;
      else
        *normalizer_out = Normalizer{j["normalizer"].at("mean").get<double>(),
                                     j["normalizer"].at("std").get<double>()};
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const ForecastModel& model, const std::optional<Normalizer>& normalizer,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path);
  out << checkpoint_to_json(model, normalizer);
  if (!out) throw DataError("failed writing checkpoint " + path);
}

ForecastModel load_checkpoint(const std::string& path,
                              std::optional<Normalizer>* normalizer_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return checkpoint_from_json(text, normalizer_out);
}

}  // namespace agcrn
