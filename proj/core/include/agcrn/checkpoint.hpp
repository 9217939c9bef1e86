#pragma once

#include <optional>
#include <string>

#include "agcrn/data.hpp"
#include "agcrn/model.hpp"

namespace agcrn {

/// Self-describing JSON container: config, optional normalizer, optional
/// predefined graph, and every parameter by name. Round-trips bit-exactly.
std::string checkpoint_to_json(const ForecastModel& model,
                               const std::optional<Normalizer>& normalizer);
ForecastModel checkpoint_from_json(const std::string& text,
                                   std::optional<Normalizer>* normalizer_out = nullptr);

void save_checkpoint(const ForecastModel& model, const std::optional<Normalizer>& normalizer,
                     const std::string& path);
ForecastModel load_checkpoint(const std::string& path,
                              std::optional<Normalizer>* normalizer_out = nullptr);

}  // namespace agcrn
