#include "agcrn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "agcrn/errors.hpp"

namespace agcrn {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

bool numeric_or_empty(std::string_view cell) {
  if (cell.empty()) return true;
  double v;
  return parse_double(cell, v) && std::isfinite(v);
}

}  // namespace

bool RawSeries::any_missing() const {
  return std::any_of(missing.begin(), missing.end(), [](std::uint8_t m) { return m != 0; });
}

RawSeries load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file " + path);

  std::vector<double> data;
  std::vector<std::uint8_t> miss;
  std::size_t cols = 0, rows = 0, line_no = 0;
  bool saw_first = false;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && rows == 0 && !saw_first) continue;  // leading blank lines
    auto cells = split_cells(line);
    if (!saw_first) {
      saw_first = true;
      bool header = !std::all_of(cells.begin(), cells.end(), numeric_or_empty);
      if (header) {
        cols = cells.size();
        continue;
      }
    }
    if (cols == 0) cols = cells.size();
    if (cells.size() != cols)
      throw DataError(path + ": line " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " + std::to_string(cols));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        data.push_back(0.0);
        miss.push_back(1);
        continue;
      }
      double v;
      if (!parse_double(cells[c], v) || !std::isfinite(v))
        throw DataError(path + ": line " + std::to_string(line_no) + ", column " +
                        std::to_string(c + 1) + ": '" + std::string(cells[c]) +
                        "' is not numeric");
      data.push_back(v);
      miss.push_back(0);
    }
    ++rows;
  }
  if (rows == 0 || cols == 0) throw DataError(path + ": no data rows");

  RawSeries s;
  s.values = Tensor({rows, cols}, std::move(data));
  s.missing = std::move(miss);
  s.origin = path;
  return s;
}

RawSeries interpolate_missing(const RawSeries& s) {
  RawSeries out = s;
  const std::size_t T = s.rows(), N = s.cols();
  for (std::size_t n = 0; n < N; ++n) {
    std::vector<std::size_t> observed;
    for (std::size_t t = 0; t < T; ++t)
      if (!s.is_missing(t, n)) observed.push_back(t);
    if (observed.empty())
      throw DataError("column " + std::to_string(n + 1) + " has no observed values");

    for (std::size_t t = 0; t < observed.front(); ++t)
      out.values.at(t, n) = s.values.at(observed.front(), n);
    for (std::size_t t = observed.back() + 1; t < T; ++t)
      out.values.at(t, n) = s.values.at(observed.back(), n);
    for (std::size_t i = 0; i + 1 < observed.size(); ++i) {
      const std::size_t a = observed[i], b = observed[i + 1];
      const double va = s.values.at(a, n), vb = s.values.at(b, n);
      for (std::size_t t = a + 1; t < b; ++t)
        out.values.at(t, n) = va + (vb - va) * double(t - a) / double(b - a);
    }
  }
  std::fill(out.missing.begin(), out.missing.end(), 0);
  return out;
}

Tensor Normalizer::normalize(const Tensor& t) const {
  Tensor out = t;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = normalize(out[i]);
  return out;
}

Tensor Normalizer::denormalize(const Tensor& t) const {
  Tensor out = t;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = denormalize(out[i]);
  return out;
}

Normalizer fit_normalizer(const Tensor& values, std::size_t row_begin, std::size_t row_end) {
  if (row_end <= row_begin || row_end > values.extent(0))
    throw DataError("normalizer: empty or out-of-range training rows");
  const std::size_t N = values.extent(1);
  const double count = double((row_end - row_begin) * N);
  double sum = 0.0;
  for (std::size_t t = row_begin; t < row_end; ++t)
    for (std::size_t n = 0; n < N; ++n) sum += values.at(t, n);
  const double mean = sum / count;
  double ss = 0.0;
  for (std::size_t t = row_begin; t < row_end; ++t)
    for (std::size_t n = 0; n < N; ++n) {
      const double d = values.at(t, n) - mean;
      ss += d * d;
    }
  const double std = std::sqrt(ss / count);
  if (!(std > 0.0))
    throw DataError("training rows have zero variance, cannot normalize");
  return Normalizer{mean, std};
}

Dataset split_and_window(const RawSeries& s, std::size_t lookback, std::size_t horizon,
                         SplitRatios ratios, const Normalizer* normalizer) {
  if (lookback == 0 || horizon == 0)
    throw ConfigError("lookback and horizon must be positive");
  if (!(ratios.train > 0.0) || ratios.val < 0.0 || !(ratios.train + ratios.val < 1.0))
    throw ConfigError("split ratios must satisfy train > 0, val >= 0, train + val < 1");
  if (s.any_missing())
    throw DataError("series has missing values; interpolate before windowing");

  const std::size_t T = s.rows(), N = s.cols();
  Dataset ds;
  ds.nodes = N;
  ds.lookback = lookback;
  ds.horizon = horizon;
  ds.train_rows = std::size_t(std::floor(double(T) * ratios.train));
  ds.val_rows = std::size_t(std::floor(double(T) * ratios.val));
  if (ds.train_rows + ds.val_rows > T) throw DataError("series too short to split");
  ds.test_rows = T - ds.train_rows - ds.val_rows;

  const std::size_t need = lookback + horizon;
  const char* names[3] = {"train", "val", "test"};
  const std::size_t sizes[3] = {ds.train_rows, ds.val_rows, ds.test_rows};
  for (int i = 0; i < 3; ++i)
    if (sizes[i] < need)
      throw DataError(std::string("split too short: ") + names[i] + " portion has " +
                      std::to_string(sizes[i]) + " rows, needs at least " + std::to_string(need));

  if (normalizer) {
    if (!(normalizer->std > 0.0)) throw DataError("normalizer std must be positive");
    ds.normalizer = *normalizer;
  } else {
    ds.normalizer = fit_normalizer(s.values, 0, ds.train_rows);
  }

  auto window_range = [&](std::size_t begin, std::size_t end, std::vector<Window>& out) {
    for (std::size_t r = begin; r + need <= end; ++r) {
      Window w;
      w.input = Tensor({lookback, N, 1});
      for (std::size_t t = 0; t < lookback; ++t)
        for (std::size_t n = 0; n < N; ++n)
          w.input.at(t, n, 0) = ds.normalizer.normalize(s.values.at(r + t, n));
      w.target = Tensor({horizon, N});
      for (std::size_t t = 0; t < horizon; ++t)
        for (std::size_t n = 0; n < N; ++n)
          w.target.at(t, n) = s.values.at(r + lookback + t, n);
      out.push_back(std::move(w));
    }
  };
  window_range(0, ds.train_rows, ds.train);
  window_range(ds.train_rows, ds.train_rows + ds.val_rows, ds.val);
  window_range(ds.train_rows + ds.val_rows, T, ds.test);
  return ds;
}

HaModel ha_fit(const RawSeries& s, std::size_t train_end) {
  const std::size_t P = s.steps_per_day, N = s.cols();
  if (P == 0) throw ConfigError("steps-per-day must be positive");
  if (train_end > s.rows())
    throw DataError("HA: train_end " + std::to_string(train_end) + " exceeds series length");
  if (train_end < P)
    throw DataError("HA: training region must span at least one day (" + std::to_string(P) +
                    " rows), got " + std::to_string(train_end));

  Tensor sums({P, N});
  std::vector<std::size_t> counts(P * N, 0);
  for (std::size_t t = 0; t < train_end; ++t) {
    const std::size_t slot = t % P;
    for (std::size_t n = 0; n < N; ++n) {
      if (s.is_missing(t, n)) continue;
      sums.at(slot, n) += s.values.at(t, n);
      ++counts[slot * N + n];
    }
  }
  HaModel m;
  m.steps_per_day = P;
  m.slot_means = Tensor({P, N});
  for (std::size_t slot = 0; slot < P; ++slot)
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t c = counts[slot * N + n];
      if (c == 0)
        throw DataError("HA: no training observations for slot " + std::to_string(slot) +
                        ", column " + std::to_string(n + 1));
      m.slot_means.at(slot, n) = sums.at(slot, n) / double(c);
    }
  return m;
}

Tensor ha_forecast(const RawSeries& s, std::size_t train_end, std::size_t horizon_steps) {
  if (horizon_steps == 0) throw ConfigError("HA: horizon_steps must be positive");
  HaModel m = ha_fit(s, train_end);
  const std::size_t N = s.cols();
  Tensor out({horizon_steps, N});
  for (std::size_t i = 0; i < horizon_steps; ++i) {
    const std::size_t slot = (train_end + i) % m.steps_per_day;
    for (std::size_t n = 0; n < N; ++n) out.at(i, n) = m.slot_means.at(slot, n);
  }
  return out;
}

}  // namespace agcrn
