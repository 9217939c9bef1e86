#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agcrn/graph.hpp"
#include "agcrn/layers.hpp"
#include "agcrn/rng.hpp"

namespace agcrn {

enum class Variant { agcrn, agcrn_i, gcgru, napl_gcgru, dagg_gcgru, gru_ed };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& s);

struct ModelConfig {
  std::size_t nodes = 0;       // N
  std::size_t in_features = 1; // C
  std::size_t hidden = 64;     // H
  std::size_t layers = 2;      // L
  std::size_t embed_dim = 10;  // d
  std::size_t horizon = 12;    // tau
  std::size_t lookback = 12;   // T_in
  Variant variant = Variant::agcrn;
  DaggVariant dagg_variant = DaggVariant::dagg_1;
  std::uint64_t seed = 1;

  bool uses_napl() const;
  bool uses_dagg() const;
  bool needs_predefined_graph() const;
  /// Number of supports K seen by each graph convolution.
  std::size_t support_count() const;

  void validate() const;
};

/// Exact number of scalar parameters build() will register.
std::size_t count_params(const ModelConfig& cfg);

/// Gate parameters of one recurrent layer, staged as graph values.
/// For NAPL cells theta is [N,K,Cin+H,H] and bias [N,H]; for shared cells
/// theta is [K,Cin+H,H] and bias [H].
struct GateValues {
  ad::Value theta_z, bias_z;
  ad::Value theta_r, bias_r;
  ad::Value theta_h, bias_h;
  bool napl = false;
};

/// One step of the graph-convolutional GRU recurrence:
///   z = sigmoid(gcn([x||h]));  r = sigmoid(gcn([x||h]))
///   hhat = tanh(gcn([x||r*h]));  h' = z*h + (1-z)*hhat
ad::Value cell_step(const ad::Value& x_t, const ad::Value& h_prev,
                    std::span<const ad::Value> supports, const GateValues& gates);

/// A configured forecasting model: recurrent encoder plus linear head
/// (or the GRU encoder-decoder baseline). Owns all Parameters.
class ForecastModel {
 public:
  static ForecastModel build(const ModelConfig& cfg,
                             std::optional<PredefinedGraph> graph = std::nullopt);

  ForecastModel(ForecastModel&&) = default;
  ForecastModel& operator=(ForecastModel&&) = default;
  ForecastModel(const ForecastModel&) = delete;
  ForecastModel& operator=(const ForecastModel&) = delete;

  const ModelConfig& config() const { return cfg_; }
  const std::optional<PredefinedGraph>& graph() const { return graph_; }

  /// All parameters in registration order.
  std::vector<Parameter*> parameters() const;
  Parameter* find_param(const std::string& name) const;
  /// Embedding parameters (empty for variants without one).
  std::vector<Parameter*> embeddings() const;
  /// The embedding feeding DAGG, or null.
  Parameter* dagg_embedding() const;

  std::size_t parameter_census() const;
  void zero_grads();

  /// Snapshot / restore of all parameter values (used for best-epoch keep).
  std::vector<Tensor> save_values() const;
  void restore_values(const std::vector<Tensor>& values);

  /// Per-batch forward context: supports and gate tensors are generated
  /// once and shared by every window evaluated against the plan.
  /// tracked=false stages constants (inference only).
  struct Plan {
    std::vector<ad::Value> supports;
    std::vector<GateValues> cells;      // encoder layers
    std::vector<GateValues> dec_cells;  // gru_ed decoder layers
    ad::Value head_w, head_b;
    bool gru_ed = false;
  };
  Plan make_plan(bool tracked = true) const;

  /// window [T_in,N,C] -> predictions [tau,N] (normalized units).
  ad::Value forward(const Plan& plan, const Tensor& window) const;

  /// Inference-only forward.
  Tensor predict(const Tensor& window) const;

 private:
  ForecastModel() = default;

  Parameter* add_param(const std::string& name, Shape shape);
  void init_params();

  ModelConfig cfg_;
  std::optional<PredefinedGraph> graph_;
  Tensor predefined_support_;  // cached normalized adjacency

  std::vector<std::unique_ptr<Parameter>> store_;

  struct NaplCell {
    Parameter* emb;  // embedding used by this layer's pools
    WeightPool wz, wr, wh;
    BiasPool bz, br, bh;
  };
  struct SharedCell {
    SharedWeights z, r, h;
  };
  Parameter* dagg_emb_ = nullptr;
  std::vector<NaplCell> napl_cells_;
  std::vector<SharedCell> shared_cells_;
  std::vector<SharedCell> gru_enc_, gru_dec_;
  Parameter* head_w_ = nullptr;
  Parameter* head_b_ = nullptr;
};

}  // namespace agcrn
