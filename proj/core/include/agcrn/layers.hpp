#pragma once

#include <span>

#include "agcrn/autodiff.hpp"

namespace agcrn {

/// Factorized weight bank [d,K,Cin,Cout]; per-node weights are generated
/// by contracting with the node embedding.
struct WeightPool {
  Parameter* w = nullptr;
};

/// Factorized bias bank [d,Cout].
struct BiasPool {
  Parameter* b = nullptr;
};

/// Classic GCN parameters shared by all nodes: theta [K,Cin,Cout], bias [Cout].
struct SharedWeights {
  Parameter* theta = nullptr;
  Parameter* bias = nullptr;
};

/// Support-mixed features: stack of S_k x for all supports, shape [K,N,Cin].
ad::Value propagate(const ad::Value& x, std::span<const ad::Value> supports);

/// Graph convolution with node-generated weights (theta [N,K,Cin,Cout],
/// bias [N,Cout] precomputed from the pools).
ad::Value napl_gcn_with(const ad::Value& x, std::span<const ad::Value> supports,
                        const ad::Value& theta, const ad::Value& bias);

/// Full NAPL layer: generates theta/bias from the embedding, then mixes.
ad::Value napl_gcn(const ad::Value& x, std::span<const ad::Value> supports, const ad::Value& emb,
                   const ad::Value& pool_w, const ad::Value& pool_b);

/// Shared-weight graph convolution (theta [K,Cin,Cout], bias [Cout]).
ad::Value shared_gcn(const ad::Value& x, std::span<const ad::Value> supports,
                     const ad::Value& theta, const ad::Value& bias);

}  // namespace agcrn
