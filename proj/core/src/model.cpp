#include "agcrn/model.hpp"

#include <algorithm>
#include <cmath>

#include "agcrn/errors.hpp"

namespace agcrn {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::agcrn: return "agcrn";
    case Variant::agcrn_i: return "agcrn_i";
    case Variant::gcgru: return "gcgru";
    case Variant::napl_gcgru: return "napl_gcgru";
    case Variant::dagg_gcgru: return "dagg_gcgru";
    case Variant::gru_ed: return "gru_ed";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  for (Variant v : {Variant::agcrn, Variant::agcrn_i, Variant::gcgru, Variant::napl_gcgru,
                    Variant::dagg_gcgru, Variant::gru_ed}) {
    if (s == variant_name(v)) return v;
  }
  throw ConfigError("unknown variant '" + s +
                    "' (expected agcrn, agcrn_i, gcgru, napl_gcgru, dagg_gcgru or gru_ed)");
}

bool ModelConfig::uses_napl() const {
  return variant == Variant::agcrn || variant == Variant::agcrn_i ||
         variant == Variant::napl_gcgru;
}

bool ModelConfig::uses_dagg() const {
  return variant == Variant::agcrn || variant == Variant::agcrn_i ||
         variant == Variant::dagg_gcgru;
}

bool ModelConfig::needs_predefined_graph() const {
  return variant == Variant::gcgru || variant == Variant::napl_gcgru;
}

std::size_t ModelConfig::support_count() const {
  if (variant == Variant::gru_ed) return 1;
  if (uses_dagg()) return dagg_support_count(dagg_variant);
  return 2;  // identity + normalized predefined adjacency
}

void ModelConfig::validate() const {
  if (nodes == 0) throw ConfigError("model: nodes must be positive");
  if (uses_dagg() && nodes < 2) throw ConfigError("model: DAGG variants need at least 2 nodes");
  if (in_features == 0) throw ConfigError("model: in-features must be positive");
  if (hidden == 0) throw ConfigError("model: hidden must be positive");
  if (layers == 0) throw ConfigError("model: layers must be positive");
  if (horizon == 0) throw ConfigError("model: horizon must be positive");
  if (lookback == 0) throw ConfigError("model: lookback must be positive");
  if ((uses_napl() || uses_dagg()) && embed_dim == 0)
    throw ConfigError("model: embed-dim must be positive");
}

std::size_t count_params(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t N = cfg.nodes, C = cfg.in_features, H = cfg.hidden;
  const std::size_t L = cfg.layers, d = cfg.embed_dim, tau = cfg.horizon;

  if (cfg.variant == Variant::gru_ed) {
    std::size_t total = 0;
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t enc_in = (l == 0 ? C : H) + H;
      const std::size_t dec_in = (l == 0 ? 1 : H) + H;
      total += 3 * (enc_in * H + H);
      total += 3 * (dec_in * H + H);
    }
    return total + H + 1;  // fc
  }

  const std::size_t K = cfg.support_count();
  std::size_t total = 0;
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t g = (l == 0 ? C : H) + H;
    if (cfg.uses_napl())
      total += 3 * (d * K * g * H) + 3 * (d * H);
    else
      total += 3 * (K * g * H) + 3 * H;
  }
  switch (cfg.variant) {
    case Variant::agcrn:
    case Variant::napl_gcgru:
    case Variant::dagg_gcgru: total += N * d; break;
    case Variant::agcrn_i: total += (L + 1) * N * d; break;
    default: break;
  }
  return total + H * tau + tau;  // head
}

ad::Value cell_step(const ad::Value& x_t, const ad::Value& h_prev,
                    std::span<const ad::Value> supports, const GateValues& gates) {
  auto gcn = [&](const ad::Value& inp, const ad::Value& theta, const ad::Value& bias) {
    return gates.napl ? napl_gcn_with(inp, supports, theta, bias)
                      : shared_gcn(inp, supports, theta, bias);
  };
  ad::Value xh = ad::concat_cols(x_t, h_prev);
  ad::Value z = ad::sigmoid(gcn(xh, gates.theta_z, gates.bias_z));
  ad::Value r = ad::sigmoid(gcn(xh, gates.theta_r, gates.bias_r));
  ad::Value xrh = ad::concat_cols(x_t, ad::mul(r, h_prev));
  ad::Value hhat = ad::tanh(gcn(xrh, gates.theta_h, gates.bias_h));
  return ad::add(ad::mul(z, h_prev), ad::mul(ad::affine(z, -1.0, 1.0), hhat));
}

Parameter* ForecastModel::add_param(const std::string& name, Shape shape) {
  store_.push_back(std::make_unique<Parameter>(name, Tensor(std::move(shape))));
  return store_.back().get();
}

ForecastModel ForecastModel::build(const ModelConfig& cfg, std::optional<PredefinedGraph> graph) {
  cfg.validate();
  ForecastModel m;
  m.cfg_ = cfg;
  if (cfg.needs_predefined_graph()) {
    if (!graph)
      throw ConfigError(std::string("variant ") + variant_name(cfg.variant) +
                        " requires a predefined graph (--graph)");
    if (graph->nodes != cfg.nodes)
      throw ConfigError("graph has " + std::to_string(graph->nodes) + " nodes but model expects " +
                        std::to_string(cfg.nodes));
    m.graph_ = std::move(graph);
    m.predefined_support_ = m.graph_->normalized();
  } else if (graph) {
    throw ConfigError(std::string("variant ") + variant_name(cfg.variant) +
                      " does not take a predefined graph");
  }
  m.init_params();
  return m;
}

void ForecastModel::init_params() {
  Rng rng(cfg_.seed);
  const std::size_t N = cfg_.nodes, C = cfg_.in_features, H = cfg_.hidden;
  const std::size_t L = cfg_.layers, d = cfg_.embed_dim, tau = cfg_.horizon;
  const std::size_t K = cfg_.support_count();

  auto uniform_init = [&](Parameter* p, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
    for (std::size_t i = 0; i < p->size(); ++i)
      p->value[i] = (2.0 * rng.uniform() - 1.0) * limit;
  };
  auto normal_init = [&](Parameter* p) {
    for (std::size_t i = 0; i < p->size(); ++i) p->value[i] = rng.normal();
  };
  auto layer_key = [](const char* prefix, std::size_t l, const char* field) {
    return std::string(prefix) + std::to_string(l) + "." + field;
  };

  if (cfg_.variant == Variant::gru_ed) {
    auto add_gru_cells = [&](const char* prefix, std::size_t in0, std::vector<SharedCell>& out) {
      for (std::size_t l = 0; l < L; ++l) {
        const std::size_t g = (l == 0 ? in0 : H) + H;
        SharedCell sc;
        sc.z.theta = add_param(layer_key(prefix, l, "wz"), {1, g, H});
        sc.r.theta = add_param(layer_key(prefix, l, "wr"), {1, g, H});
        sc.h.theta = add_param(layer_key(prefix, l, "wh"), {1, g, H});
        uniform_init(sc.z.theta, g, H);
        uniform_init(sc.r.theta, g, H);
        uniform_init(sc.h.theta, g, H);
        sc.z.bias = add_param(layer_key(prefix, l, "bz"), {H});
        sc.r.bias = add_param(layer_key(prefix, l, "br"), {H});
        sc.h.bias = add_param(layer_key(prefix, l, "bh"), {H});
        out.push_back(sc);
      }
    };
    add_gru_cells("encoder", C, gru_enc_);
    add_gru_cells("decoder", 1, gru_dec_);
    head_w_ = add_param("fc.w", {H, 1});
    uniform_init(head_w_, H, 1);
    head_b_ = add_param("fc.b", {1});
    return;
  }

  if (cfg_.variant == Variant::agcrn || cfg_.variant == Variant::napl_gcgru) {
    Parameter* emb = add_param("embedding", {N, d});
    normal_init(emb);
    if (cfg_.uses_dagg()) dagg_emb_ = emb;
    for (std::size_t l = 0; l < L; ++l) napl_cells_.push_back({.emb = emb});
  } else if (cfg_.variant == Variant::agcrn_i) {
    dagg_emb_ = add_param("dagg_embedding", {N, d});
    normal_init(dagg_emb_);
    for (std::size_t l = 0; l < L; ++l) {
      Parameter* emb = add_param(layer_key("layer", l, "embedding"), {N, d});
      normal_init(emb);
      napl_cells_.push_back({.emb = emb});
    }
  } else if (cfg_.variant == Variant::dagg_gcgru) {
    dagg_emb_ = add_param("dagg_embedding", {N, d});
    normal_init(dagg_emb_);
  }

  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t g = (l == 0 ? C : H) + H;
    if (cfg_.uses_napl()) {
      NaplCell& cell = napl_cells_[l];
      cell.wz.w = add_param(layer_key("layer", l, "wz"), {d, K, g, H});
      cell.wr.w = add_param(layer_key("layer", l, "wr"), {d, K, g, H});
      cell.wh.w = add_param(layer_key("layer", l, "wh"), {d, K, g, H});
      uniform_init(cell.wz.w, K * g, H);
      uniform_init(cell.wr.w, K * g, H);
      uniform_init(cell.wh.w, K * g, H);
      cell.bz.b = add_param(layer_key("layer", l, "bz"), {d, H});
      cell.br.b = add_param(layer_key("layer", l, "br"), {d, H});
      cell.bh.b = add_param(layer_key("layer", l, "bh"), {d, H});
    } else {
      SharedCell sc;
      sc.z.theta = add_param(layer_key("layer", l, "wz"), {K, g, H});
      sc.r.theta = add_param(layer_key("layer", l, "wr"), {K, g, H});
      sc.h.theta = add_param(layer_key("layer", l, "wh"), {K, g, H});
      uniform_init(sc.z.theta, K * g, H);
      uniform_init(sc.r.theta, K * g, H);
      uniform_init(sc.h.theta, K * g, H);
      sc.z.bias = add_param(layer_key("layer", l, "bz"), {H});
      sc.r.bias = add_param(layer_key("layer", l, "br"), {H});
      sc.h.bias = add_param(layer_key("layer", l, "bh"), {H});
      shared_cells_.push_back(sc);
    }
  }

  head_w_ = add_param("head.w", {H, tau});
  uniform_init(head_w_, H, tau);
  head_b_ = add_param("head.b", {tau});
}

std::vector<Parameter*> ForecastModel::parameters() const {
  std::vector<Parameter*> out;
  out.reserve(store_.size());
  for (const auto& p : store_) out.push_back(p.get());
  return out;
}

Parameter* ForecastModel::find_param(const std::string& name) const {
  for (const auto& p : store_)
    if (p->name == name) return p.get();
  return nullptr;
}

std::vector<Parameter*> ForecastModel::embeddings() const {
  std::vector<Parameter*> out;
  auto push_unique = [&](Parameter* p) {
    if (p && std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  };
  push_unique(dagg_emb_);
  for (const auto& c : napl_cells_) push_unique(c.emb);
  return out;
}

Parameter* ForecastModel::dagg_embedding() const { return dagg_emb_; }

std::size_t ForecastModel::parameter_census() const {
  std::size_t total = 0;
  for (const auto& p : store_) total += p->size();
  return total;
}

void ForecastModel::zero_grads() {
  for (const auto& p : store_) p->zero_grad();
}

std::vector<Tensor> ForecastModel::save_values() const {
  std::vector<Tensor> out;
  out.reserve(store_.size());
  for (const auto& p : store_) out.push_back(p->value);
  return out;
}

void ForecastModel::restore_values(const std::vector<Tensor>& values) {
  if (values.size() != store_.size())
    throw ShapeError("restore_values: expected " + std::to_string(store_.size()) +
                     " tensors, got " + std::to_string(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i].same_shape(store_[i]->value))
      throw ShapeError("restore_values: shape mismatch at " + store_[i]->name);
    store_[i]->value = values[i];
  }
}

ForecastModel::Plan ForecastModel::make_plan(bool tracked) const {
  Plan plan;
  std::vector<std::pair<Parameter*, ad::Value>> staged;
  auto stage = [&](Parameter* p) -> ad::Value {
    for (const auto& [q, v] : staged)
      if (q == p) return v;
    ad::Value v = tracked ? ad::leaf(*p) : ad::constant(p->value);
    staged.emplace_back(p, v);
    return v;
  };
  auto stage_shared = [&](const SharedCell& sc) {
    GateValues g;
    g.theta_z = stage(sc.z.theta);
    g.theta_r = stage(sc.r.theta);
    g.theta_h = stage(sc.h.theta);
    g.bias_z = stage(sc.z.bias);
    g.bias_r = stage(sc.r.bias);
    g.bias_h = stage(sc.h.bias);
    g.napl = false;
    return g;
  };

  if (cfg_.variant == Variant::gru_ed) {
    plan.gru_ed = true;
    plan.supports.push_back(ad::constant(Tensor::identity(cfg_.nodes)));
    for (const auto& sc : gru_enc_) plan.cells.push_back(stage_shared(sc));
    for (const auto& sc : gru_dec_) plan.dec_cells.push_back(stage_shared(sc));
    plan.head_w = stage(head_w_);
    plan.head_b = stage(head_b_);
    return plan;
  }

  if (cfg_.uses_dagg()) {
    plan.supports = dagg_supports(stage(dagg_emb_), cfg_.dagg_variant);
  } else {
    plan.supports.push_back(ad::constant(Tensor::identity(cfg_.nodes)));
    plan.supports.push_back(ad::constant(predefined_support_));
  }

  if (cfg_.uses_napl()) {
    for (const auto& cell : napl_cells_) {
      ad::Value emb = stage(cell.emb);
      GateValues g;
      g.theta_z = ad::pool_contract(emb, stage(cell.wz.w));
      g.theta_r = ad::pool_contract(emb, stage(cell.wr.w));
      g.theta_h = ad::pool_contract(emb, stage(cell.wh.w));
      g.bias_z = ad::matmul(emb, stage(cell.bz.b));
      g.bias_r = ad::matmul(emb, stage(cell.br.b));
      g.bias_h = ad::matmul(emb, stage(cell.bh.b));
      g.napl = true;
      plan.cells.push_back(g);
    }
  } else {
    for (const auto& sc : shared_cells_) plan.cells.push_back(stage_shared(sc));
  }
  plan.head_w = stage(head_w_);
  plan.head_b = stage(head_b_);
  return plan;
}

ad::Value ForecastModel::forward(const Plan& plan, const Tensor& window) const {
  const std::size_t N = cfg_.nodes, C = cfg_.in_features, H = cfg_.hidden;
  const std::size_t L = cfg_.layers, tau = cfg_.horizon;
  if (window.rank() != 3 || window.extent(1) != N || window.extent(2) != C)
    throw ShapeError("forward: window must be [T," + std::to_string(N) + "," +
                     std::to_string(C) + "]");
  const std::size_t T = window.extent(0);

  std::vector<ad::Value> h;
  h.reserve(L);
  for (std::size_t l = 0; l < L; ++l) h.push_back(ad::constant(Tensor::zeros({N, H})));

  auto step_input = [&](std::size_t t) {
    Tensor xt({N, C});
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < C; ++j) xt.at(i, j) = window.at(t, i, j);
    return ad::constant(std::move(xt));
  };
  auto run_stack = [&](const ad::Value& x, const std::vector<GateValues>& cells) {
    ad::Value inp = x;
    for (std::size_t l = 0; l < L; ++l) {
      h[l] = cell_step(inp, h[l], plan.supports, cells[l]);
      inp = h[l];
    }
  };

  for (std::size_t t = 0; t < T; ++t) run_stack(step_input(t), plan.cells);

  if (!plan.gru_ed) {
    ad::Value out = ad::add_rowvec(ad::matmul(h[L - 1], plan.head_w), plan.head_b);  // [N,tau]
    return ad::transpose(out);
  }

  std::vector<ad::Value> preds;
  preds.reserve(tau);
  ad::Value fed = ad::constant(Tensor::zeros({N, 1}));
  for (std::size_t s = 0; s < tau; ++s) {
    run_stack(fed, plan.dec_cells);
    ad::Value p = ad::add_rowvec(ad::matmul(h[L - 1], plan.head_w), plan.head_b);  // [N,1]
    preds.push_back(p);
    fed = p;
  }
  return ad::reshape(ad::stack_mats(preds), {tau, N});
}

Tensor ForecastModel::predict(const Tensor& window) const {
  return forward(make_plan(false), window).val();
}

}  // namespace agcrn
