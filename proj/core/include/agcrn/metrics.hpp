#pragma once

#include <string>
#include <vector>

#include "agcrn/tensor.hpp"

namespace agcrn {

struct HorizonMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;          // fraction, not percent
  std::size_t count = 0;      // entries in Omega
  std::size_t mape_masked = 0;  // zero-truth entries excluded from MAPE
};

struct MetricsReport {
  std::vector<HorizonMetrics> per_horizon;  // horizons 1..tau
  HorizonMetrics average;                    // pooled over all horizons

  std::string to_csv() const;
  std::string to_json() const;
};

/// pred/truth: [tau,N] or [tau,N,M], de-normalized units. MAPE excludes
/// zero-truth entries; a horizon whose truth is all zero is a data error.
MetricsReport compute_metrics(const Tensor& pred, const Tensor& truth);

}  // namespace agcrn
