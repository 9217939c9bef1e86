#include "agcrn/run_config.hpp"

#include <charconv>
#include <fstream>

#include "agcrn/errors.hpp"

namespace agcrn {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::size_t parse_count(std::string_view v, const std::string& where) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError(where + ": '" + std::string(v) + "' is not a non-negative integer");
  return out;
}

double parse_real(std::string_view v, const std::string& where) {
  double out = 0.0;
  if (!parse_double(v, out))
    throw ConfigError(where + ": '" + std::string(v) + "' is not a number");
  return out;
}

}  // namespace

void apply_ini(RunConfig& cfg, const std::string& text, const std::string& origin) {
  std::string section;
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line = trim(std::string_view(text).substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;

    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "data" && section != "model" && section != "train")
        throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(where + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const std::string ctx = where + " [" + section + "] " + key;

    if (section == "data") {
      if (key == "data") cfg.data_path = std::string(value);
      else if (key == "graph") cfg.graph_path = std::string(value);
      else if (key == "out") cfg.out_dir = std::string(value);
      else if (key == "steps-per-day") cfg.steps_per_day = parse_count(value, ctx);
      else throw ConfigError(ctx + ": unknown key");
    } else if (section == "model") {
      if (key == "nodes") cfg.model.nodes = parse_count(value, ctx);
      else if (key == "in-features") cfg.model.in_features = parse_count(value, ctx);
      else if (key == "variant") cfg.model.variant = parse_variant(std::string(value));
      else if (key == "dagg-variant") cfg.model.dagg_variant = parse_dagg_variant(std::string(value));
      else if (key == "embed-dim") cfg.model.embed_dim = parse_count(value, ctx);
      else if (key == "hidden") cfg.model.hidden = parse_count(value, ctx);
      else if (key == "layers") cfg.model.layers = parse_count(value, ctx);
      else if (key == "horizon") cfg.model.horizon = parse_count(value, ctx);
      else if (key == "lookback") cfg.model.lookback = parse_count(value, ctx);
      else throw ConfigError(ctx + ": unknown key");
    } else if (section == "train") {
      if (key == "lr") cfg.train.lr = parse_real(value, ctx);
      else if (key == "batch-size") cfg.train.batch_size = parse_count(value, ctx);
      else if (key == "epochs") cfg.train.max_epochs = parse_count(value, ctx);
      else if (key == "patience") cfg.train.patience = parse_count(value, ctx);
      else if (key == "seed") {
        cfg.train.seed = parse_count(value, ctx);
        cfg.model.seed = cfg.train.seed;
      } else throw ConfigError(ctx + ": unknown key");
    } else {
      throw ConfigError(where + ": key '" + key + "' outside any section");
    }
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  RunConfig cfg;
  apply_ini(cfg, text, path);
  return cfg;
}

std::string to_ini(const RunConfig& cfg) {
  std::string out;
  out += "[data]\n";
  out += "data = " + cfg.data_path + "\n";
  out += "graph = " + cfg.graph_path + "\n";
  out += "out = " + cfg.out_dir + "\n";
  out += "steps-per-day = " + std::to_string(cfg.steps_per_day) + "\n";
  out += "\n[model]\n";
  out += "nodes = " + std::to_string(cfg.model.nodes) + "\n";
  out += "in-features = " + std::to_string(cfg.model.in_features) + "\n";
  out += "variant = " + std::string(variant_name(cfg.model.variant)) + "\n";
  out += "dagg-variant = " + std::string(dagg_variant_name(cfg.model.dagg_variant)) + "\n";
  out += "embed-dim = " + std::to_string(cfg.model.embed_dim) + "\n";
  out += "hidden = " + std::to_string(cfg.model.hidden) + "\n";
  out += "layers = " + std::to_string(cfg.model.layers) + "\n";
  out += "horizon = " + std::to_string(cfg.model.horizon) + "\n";
  out += "lookback = " + std::to_string(cfg.model.lookback) + "\n";
  out += "\n[train]\n";
  out += "lr = " + format_double(cfg.train.lr) + "\n";
  out += "batch-size = " + std::to_string(cfg.train.batch_size) + "\n";
  out += "epochs = " + std::to_string(cfg.train.max_epochs) + "\n";
  out += "patience = " + std::to_string(cfg.train.patience) + "\n";
  out += "seed = " + std::to_string(cfg.train.seed) + "\n";
  return out;
}

}  // namespace agcrn
