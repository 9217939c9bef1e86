#include "agcrn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "agcrn/rng.hpp"

namespace agcrn {

namespace {

bool bits_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

double rel_err(double analytic, double numeric) {
  const double diff = std::fabs(analytic - numeric);
  const double denom = std::max(std::fabs(analytic), std::fabs(numeric));
  return denom > 1e-8 ? diff / denom : diff;
}

}  // namespace

std::string CheckReport::to_json() const {
  nlohmann::json j;
  j["pass"] = pass;
  j["step"] = step;
  j["tol"] = tol;
  j["params"] = nlohmann::json::array();
  for (const auto& p : params) {
    j["params"].push_back({{"name", p.name},
                           {"max_rel_err", p.max_rel_err},
                           {"pass", p.pass},
                           {"entries_checked", p.entries_checked}});
  }
  return j.dump(2);
}

void CheckReport::write_json(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << to_json() << "\n";
}

CheckReport finite_difference_check(const std::function<double()>& loss,
                                    std::span<Parameter* const> params,
                                    const GradCheckOptions& opt) {
  for (Parameter* p : params) p->zero_grad();
  const double base = loss();
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad);

  for (Parameter* p : params) p->zero_grad();
  const double repeat = loss();
  if (!bits_equal(base, repeat)) {
    throw NumericsError("finite_difference_check: loss is not deterministic (" +
                        format_double(base) + " vs " + format_double(repeat) + ")");
  }

  if (opt.corrupt && !params.empty() && analytic[0].size() > 0) {
    analytic[0][0] += 1.0;
  }

  const std::size_t total =
      std::accumulate(params.begin(), params.end(), std::size_t{0},
                      [](std::size_t acc, Parameter* p) { return acc + p->size(); });
  const bool subsample = total > opt.entry_budget;
  Rng rng(opt.seed);

  CheckReport report;
  report.step = opt.step;
  report.tol = opt.tol;
  report.pass = true;

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter* p = params[pi];
    std::vector<std::size_t> indices(p->size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    if (subsample) {
      std::size_t keep = std::max<std::size_t>(
          1, opt.entry_budget * p->size() / std::max<std::size_t>(1, total));
      keep = std::min(keep, indices.size());
      rng.shuffle(indices);
      indices.resize(keep);
    }

    ParamCheck pc;
    pc.name = p->name;
    pc.entries_checked = indices.size();
    for (std::size_t idx : indices) {
      const double saved = p->value[idx];
      p->value[idx] = saved + opt.step;
      const double fp = loss();
      p->value[idx] = saved - opt.step;
      const double fm = loss();
      p->value[idx] = saved;
      const double numeric = (fp - fm) / (2.0 * opt.step);
      pc.max_rel_err = std::max(pc.max_rel_err, rel_err(analytic[pi][idx], numeric));
    }
    pc.pass = pc.max_rel_err <= opt.tol;
    report.pass = report.pass && pc.pass;
    report.params.push_back(std::move(pc));
  }

  for (Parameter* p : params) p->zero_grad();
  return report;
}

}  // namespace agcrn
