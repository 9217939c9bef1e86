#include "agcrn/synth.hpp"

#include <cmath>
#include <numbers>

#include "agcrn/errors.hpp"
#include "agcrn/rng.hpp"

namespace agcrn {

std::vector<std::size_t> synth_communities(std::size_t nodes, std::size_t communities) {
  if (communities == 0 || nodes < communities)
    throw ConfigError("synth: need nodes >= communities >= 1");
  std::vector<std::size_t> comm(nodes);
  for (std::size_t n = 0; n < nodes; ++n) comm[n] = n * communities / nodes;
  return comm;
}

PredefinedGraph community_graph(std::size_t nodes, std::size_t communities) {
  auto comm = synth_communities(nodes, communities);
  PredefinedGraph g;
  g.nodes = nodes;
  for (std::size_t u = 0; u < nodes; ++u)
    for (std::size_t v = u + 1; v < nodes; ++v)
      if (comm[u] == comm[v]) g.edges.push_back({u, v, 1.0});
  return g;
}

RawSeries synth_generate(const SynthOptions& opt) {
  if (opt.steps == 0) throw ConfigError("synth: steps must be positive");
  if (opt.steps_per_day < 2) throw ConfigError("synth: steps-per-day must be at least 2");
  if (!(opt.amp_min <= opt.amp_max) || !(opt.amp_min > 0.0))
    throw ConfigError("synth: amplitude range must satisfy 0 < amp_min <= amp_max");
  if (opt.noise_std < 0.0) throw ConfigError("synth: noise-std must be non-negative");
  auto comm = synth_communities(opt.nodes, opt.communities);

  const std::size_t T = opt.steps, N = opt.nodes, P = opt.steps_per_day;
  const double two_pi = 2.0 * std::numbers::pi;

  Rng rng(opt.seed);
  std::vector<double> amp(N), jitter(N);
  for (std::size_t n = 0; n < N; ++n) {
    amp[n] = opt.amp_min + rng.uniform() * (opt.amp_max - opt.amp_min);
    jitter[n] = (2.0 * rng.uniform() - 1.0) * opt.phase_jitter;
  }

  auto base = [&](std::size_t c, double t) {
    const double angle = two_pi * t / double(P);
    const double phase = two_pi * double(c) / double(opt.communities);
    const double phase2 = std::numbers::pi * double(c) / double(opt.communities) + 0.7;
    return 3.0 + std::sin(angle + phase) + 0.5 * std::sin(2.0 * angle + phase2);
  };

  Tensor clean({T, N});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t n = 0; n < N; ++n)
      clean.at(t, n) = amp[n] * base(comm[n], double(t) + jitter[n]);

  std::vector<std::size_t> comm_size(opt.communities, 0);
  for (std::size_t n = 0; n < N; ++n) ++comm_size[comm[n]];

  RawSeries s;
  s.values = Tensor({T, N});
  s.missing.assign(T * N, 0);
  s.steps_per_day = P;
  s.origin = "synth";
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t lag = (t == 0 ? 0 : t - 1);
    for (std::size_t n = 0; n < N; ++n) {
      double v = clean.at(t, n);
      if (comm_size[comm[n]] > 1) {
        double peers = 0.0;
        for (std::size_t m = 0; m < N; ++m)
          if (m != n && comm[m] == comm[n]) peers += clean.at(lag, m);
        v += opt.coupling * peers / double(comm_size[comm[n]] - 1);
      }
      s.values.at(t, n) = v + opt.noise_std * rng.normal();
    }
  }
  return s;
}

}  // namespace agcrn
