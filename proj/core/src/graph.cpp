#include "agcrn/graph.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace agcrn {

const char* dagg_variant_name(DaggVariant v) {
  switch (v) {
    case DaggVariant::dagg_r: return "dagg_r";
    case DaggVariant::dagg_1: return "dagg_1";
    case DaggVariant::dagg_2: return "dagg_2";
  }
  return "?";
}

DaggVariant parse_dagg_variant(const std::string& s) {
  if (s == "dagg_r") return DaggVariant::dagg_r;
  if (s == "dagg_1") return DaggVariant::dagg_1;
  if (s == "dagg_2") return DaggVariant::dagg_2;
  throw ConfigError("unknown dagg variant: " + s);
}

std::size_t dagg_support_count(DaggVariant v) {
  switch (v) {
    case DaggVariant::dagg_r: return 1;
    case DaggVariant::dagg_1: return 2;
    case DaggVariant::dagg_2: return 3;
  }
  return 0;
}

Tensor PredefinedGraph::normalized() const {
  Tensor a({nodes, nodes});
  for (const Edge& e : edges) {
    a.at(e.u, e.v) = e.w;
    a.at(e.v, e.u) = e.w;
  }
  std::vector<double> dinv_sqrt(nodes, 0.0);
  for (std::size_t i = 0; i < nodes; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) deg += a.at(i, j);
    dinv_sqrt[i] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  Tensor out({nodes, nodes});
  for (std::size_t i = 0; i < nodes; ++i)
    for (std::size_t j = 0; j < nodes; ++j) out.at(i, j) = dinv_sqrt[i] * a.at(i, j) * dinv_sqrt[j];
  return out;
}

PredefinedGraph load_edge_list(const std::string& path, std::size_t nodes) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open graph file " + path);
  PredefinedGraph g;
  std::string line;
  std::size_t lineno = 0;
  std::size_t max_node = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 3) {
      throw DataError("graph file " + path + " line " + std::to_string(lineno) +
                      ": expected u,v,weight");
    }
    double u, v, w;
    if (!parse_double(cells[0], u) || !parse_double(cells[1], v) || !parse_double(cells[2], w)) {
      if (lineno == 1) continue;  // header row
      throw DataError("graph file " + path + " line " + std::to_string(lineno) +
                      ": non-numeric cell");
    }
    if (u < 0 || v < 0 || u != std::floor(u) || v != std::floor(v)) {
      throw DataError("graph file " + path + " line " + std::to_string(lineno) +
                      ": node ids must be non-negative integers");
    }
    PredefinedGraph::Edge e{static_cast<std::size_t>(u), static_cast<std::size_t>(v), w};
    if (e.u == e.v) {
      throw DataError("graph file " + path + " line " + std::to_string(lineno) +
                      ": self-loop on node " + std::to_string(e.u));
    }
    if (w < 0.0) {
      throw DataError("graph file " + path + " line " + std::to_string(lineno) +
                      ": negative weight");
    }
    max_node = std::max({max_node, e.u, e.v});
    g.edges.push_back(e);
  }
  g.nodes = nodes > 0 ? nodes : max_node + 1;
  for (const auto& e : g.edges) {
    if (e.u >= g.nodes || e.v >= g.nodes) {
      throw DataError("graph file " + path + ": edge endpoint " +
                      std::to_string(std::max(e.u, e.v)) + " exceeds node count " +
                      std::to_string(g.nodes));
    }
  }
  return g;
}

ad::Value dagg_matrix(const ad::Value& emb) {
  return ad::softmax_rows(ad::relu(ad::matmul(emb, ad::transpose(emb))));
}

AdaptiveGraph dagg_matrix(const Tensor& emb) {
  return AdaptiveGraph{dagg_matrix(ad::constant(emb)).val()};
}

std::vector<ad::Value> dagg_supports(const ad::Value& emb, DaggVariant v) {
  std::vector<ad::Value> supports;
  const std::size_t n = emb.val().extent(0);
  ad::Value a = dagg_matrix(emb);
  switch (v) {
    case DaggVariant::dagg_r:
      supports.push_back(a);
      break;
    case DaggVariant::dagg_1:
      supports.push_back(ad::constant(Tensor::identity(n)));
      supports.push_back(a);
      break;
    case DaggVariant::dagg_2:
      supports.push_back(ad::constant(Tensor::identity(n)));
      supports.push_back(a);
      supports.push_back(ad::matmul(a, a));
      break;
  }
  return supports;
}

SupportSet build_supports(const AdaptiveGraph& g, DaggVariant v) {
  SupportSet set;
  switch (v) {
    case DaggVariant::dagg_r:
      set.kind = SupportKind::dagg_r;
      set.supports = {g.a_tilde};
      break;
    case DaggVariant::dagg_1:
      set.kind = SupportKind::dagg_1;
      set.supports = {Tensor::identity(g.a_tilde.extent(0)), g.a_tilde};
      break;
    case DaggVariant::dagg_2:
      set.kind = SupportKind::dagg_2;
      set.supports = {Tensor::identity(g.a_tilde.extent(0)), g.a_tilde,
                      ops::matmul(g.a_tilde, g.a_tilde)};
      break;
  }
  return set;
}

SupportSet build_supports(const PredefinedGraph& g) {
  SupportSet set;
  set.kind = SupportKind::predefined;
  set.supports = {Tensor::identity(g.nodes), g.normalized()};
  return set;
}

}  // namespace agcrn
