#pragma once

#include <string>
#include <vector>

#include "agcrn/autodiff.hpp"
#include "agcrn/tensor.hpp"

namespace agcrn {

/// Which supports a graph convolution aggregates over.
enum class DaggVariant { dagg_r, dagg_1, dagg_2 };

const char* dagg_variant_name(DaggVariant v);
DaggVariant parse_dagg_variant(const std::string& s);

/// Number of supports: dagg_r -> 1, dagg_1 -> 2, dagg_2 -> 3.
std::size_t dagg_support_count(DaggVariant v);

/// The learned row-stochastic adjacency softmax(relu(E E^T)).
struct AdaptiveGraph {
  Tensor a_tilde;  // [N,N], rows sum to 1, entries >= 0
};

/// Undirected weighted graph given as an edge list; no self-loops.
struct PredefinedGraph {
  struct Edge {
    std::size_t u, v;
    double w;
  };
  std::size_t nodes = 0;
  std::vector<Edge> edges;

  /// D^{-1/2} A D^{-1/2}; rows/columns of zero-degree nodes stay zero.
  Tensor normalized() const;
};

/// Edge-list CSV "u,v,weight" (optional header). Node count is taken from
/// `nodes` when positive, otherwise from the largest endpoint + 1.
PredefinedGraph load_edge_list(const std::string& path, std::size_t nodes = 0);

enum class SupportKind { dagg_r, dagg_1, dagg_2, predefined };

/// Ordered aggregation matrices for one graph convolution.
struct SupportSet {
  std::vector<Tensor> supports;
  SupportKind kind;
};

/// softmax_rows(relu(E E^T)), differentiable back to the embedding.
ad::Value dagg_matrix(const ad::Value& emb);
AdaptiveGraph dagg_matrix(const Tensor& emb);

/// DAGG support stack: dagg_1 -> [I, A~], dagg_r -> [A~], dagg_2 -> [I, A~, A~^2].
std::vector<ad::Value> dagg_supports(const ad::Value& emb, DaggVariant v);

SupportSet build_supports(const AdaptiveGraph& g, DaggVariant v);
/// Predefined support stack [I, D^{-1/2} A D^{-1/2}].
SupportSet build_supports(const PredefinedGraph& g);

}  // namespace agcrn
