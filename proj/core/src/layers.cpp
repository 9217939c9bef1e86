#include "agcrn/layers.hpp"

#include <vector>

namespace agcrn {

ad::Value propagate(const ad::Value& x, std::span<const ad::Value> supports) {
  if (supports.empty()) throw ShapeError("propagate: empty support set");
  std::vector<ad::Value> mixed;
  mixed.reserve(supports.size());
  for (const ad::Value& s : supports) mixed.push_back(ad::matmul(s, x));
  return ad::stack_mats(mixed);
}

ad::Value napl_gcn_with(const ad::Value& x, std::span<const ad::Value> supports,
                        const ad::Value& theta, const ad::Value& bias) {
  return ad::add(ad::napl_combine(propagate(x, supports), theta), bias);
}

ad::Value napl_gcn(const ad::Value& x, std::span<const ad::Value> supports, const ad::Value& emb,
                   const ad::Value& pool_w, const ad::Value& pool_b) {
  ad::Value theta = ad::pool_contract(emb, pool_w);
  ad::Value bias = ad::matmul(emb, pool_b);
  return napl_gcn_with(x, supports, theta, bias);
}

ad::Value shared_gcn(const ad::Value& x, std::span<const ad::Value> supports,
                     const ad::Value& theta, const ad::Value& bias) {
  return ad::add_rowvec(ad::gcn_combine(propagate(x, supports), theta), bias);
}

}  // namespace agcrn
