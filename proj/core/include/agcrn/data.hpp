#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agcrn/tensor.hpp"

namespace agcrn {

/// A multivariate series: T rows of N node readings, plus a missing mask.
struct RawSeries {
  Tensor values;                       // [T,N]
  std::vector<std::uint8_t> missing;   // T*N, row-major, 1 = missing
  std::size_t steps_per_day = 288;
  std::string origin;

  std::size_t rows() const { return values.extent(0); }
  std::size_t cols() const { return values.extent(1); }
  bool is_missing(std::size_t t, std::size_t n) const { return missing[t * cols() + n] != 0; }
  bool any_missing() const;
};

/// Reads a rectangular numeric CSV; empty cells become missing entries.
/// A first row with any non-numeric, non-empty cell is taken as a header.
RawSeries load_csv(const std::string& path);

/// Fills interior gaps per column by linear interpolation between the
/// nearest observed neighbors; leading/trailing gaps copy the nearest
/// observed value.
RawSeries interpolate_missing(const RawSeries& s);

/// z-score scaling with statistics from the training rows only.
struct Normalizer {
  double mean = 0.0;
  double std = 1.0;

  double normalize(double v) const { return (v - mean) / std; }
  double denormalize(double v) const { return v * std + mean; }
  Tensor normalize(const Tensor& t) const;
  Tensor denormalize(const Tensor& t) const;
};

Normalizer fit_normalizer(const Tensor& values, std::size_t row_begin, std::size_t row_end);

struct Window {
  Tensor input;   // [T_in,N,1], normalized
  Tensor target;  // [tau,N], original units
};

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
};

struct Dataset {
  std::vector<Window> train, val, test;
  Normalizer normalizer;
  std::size_t nodes = 0;
  std::size_t lookback = 0, horizon = 0;
  std::size_t train_rows = 0, val_rows = 0, test_rows = 0;
};

/// Chronological split (floor at the first two boundaries), then stride-1
/// windows within each portion. Windows never straddle a boundary. The
/// normalizer is fit on the train portion unless one is supplied (e.g.
/// from a checkpoint).
Dataset split_and_window(const RawSeries& s, std::size_t lookback, std::size_t horizon,
                         SplitRatios ratios = {},
                         const Normalizer* normalizer = nullptr);

/// Historical Average: per time-of-day-slot means of the training rows.
struct HaModel {
  Tensor slot_means;  // [steps_per_day,N]
  std::size_t steps_per_day = 0;
};

HaModel ha_fit(const RawSeries& s, std::size_t train_end);

/// Predictions for rows train_end .. train_end+horizon_steps-1; row i is
/// the training mean of the matching time-of-day slot.
Tensor ha_forecast(const RawSeries& s, std::size_t train_end, std::size_t horizon_steps);

}  // namespace agcrn
