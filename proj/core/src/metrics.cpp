#include "agcrn/metrics.hpp"

#include <cmath>

#include <json.hpp>

#include "agcrn/errors.hpp"

namespace agcrn {
namespace {

HorizonMetrics reduce(const Tensor& pred, const Tensor& truth, std::size_t h_begin,
                      std::size_t h_end, std::size_t per_horizon, const char* label) {
  HorizonMetrics m;
  double abs_sum = 0.0, sq_sum = 0.0, ape_sum = 0.0;
  std::size_t ape_count = 0;
  for (std::size_t h = h_begin; h < h_end; ++h)
    for (std::size_t i = 0; i < per_horizon; ++i) {
      const std::size_t idx = h * per_horizon + i;
      const double d = pred[idx] - truth[idx];
      abs_sum += std::abs(d);
      sq_sum += d * d;
      if (truth[idx] != 0.0) {
        ape_sum += std::abs(d / truth[idx]);
        ++ape_count;
      } else {
        ++m.mape_masked;
      }
    }
  m.count = (h_end - h_begin) * per_horizon;
  if (m.count == 0) throw DataError(std::string("metrics: no entries for ") + label);
  if (ape_count == 0)
    throw DataError(std::string("metrics: all ground-truth entries are zero for ") + label +
                    ", MAPE undefined");
  m.mae = abs_sum / double(m.count);
  m.rmse = std::sqrt(sq_sum / double(m.count));
  m.mape = ape_sum / double(ape_count);
  return m;
}

nlohmann::json to_json_obj(const HorizonMetrics& m) {
  return {{"mae", m.mae},
          {"rmse", m.rmse},
          {"mape", m.mape},
          {"count", m.count},
          {"mape_masked", m.mape_masked}};
}

}  // namespace

MetricsReport compute_metrics(const Tensor& pred, const Tensor& truth) {
  if (!pred.same_shape(truth)) throw ShapeError("metrics: pred and truth shapes differ");
  if (pred.rank() != 2 && pred.rank() != 3)
    throw ShapeError("metrics: expected [tau,N] or [tau,N,M]");
  const std::size_t tau = pred.extent(0);
  const std::size_t per_horizon = pred.size() / tau;

  MetricsReport r;
  for (std::size_t h = 0; h < tau; ++h) {
    const std::string label = "horizon " + std::to_string(h + 1);
    r.per_horizon.push_back(reduce(pred, truth, h, h + 1, per_horizon, label.c_str()));
  }
  r.average = reduce(pred, truth, 0, tau, per_horizon, "average");
  return r;
}

std::string MetricsReport::to_csv() const {
  std::string out = "horizon,mae,rmse,mape\n";
  for (std::size_t h = 0; h < per_horizon.size(); ++h) {
    out += std::to_string(h + 1) + "," + format_double(per_horizon[h].mae) + "," +
           format_double(per_horizon[h].rmse) + "," + format_double(per_horizon[h].mape) + "\n";
  }
  out += "avg," + format_double(average.mae) + "," + format_double(average.rmse) + "," +
         format_double(average.mape) + "\n";
  return out;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["per_horizon"] = nlohmann::json::array();
  for (std::size_t h = 0; h < per_horizon.size(); ++h) {
    nlohmann::json entry = to_json_obj(per_horizon[h]);
    entry["horizon"] = h + 1;
    j["per_horizon"].push_back(entry);
  }
  j["average"] = to_json_obj(average);
  return j.dump(2) + "\n";
}

}  // namespace agcrn
