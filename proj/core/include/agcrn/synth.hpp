#pragma once

#include <cstdint>
#include <vector>

#include "agcrn/data.hpp"
#include "agcrn/graph.hpp"

namespace agcrn {

struct SynthOptions {
  std::size_t nodes = 8;
  std::size_t communities = 2;
  std::size_t steps = 400;
  double noise_std = 0.0;
  std::uint64_t seed = 1;
  std::size_t steps_per_day = 48;
  double coupling = 0.3;       // lag-1 pull toward same-community neighbors
  double amp_min = 0.6;        // per-node amplitude range
  double amp_max = 1.4;
  double phase_jitter = 0.3;   // per-node phase offset, in steps
};

/// Seeded generator of community-structured diurnal series: each community
/// has its own two-sinusoid daily template; each node scales and phase-
/// shifts it and is nudged by the lagged mean of its community peers.
RawSeries synth_generate(const SynthOptions& opt);

/// Contiguous-block community assignment, node -> community id.
std::vector<std::size_t> synth_communities(std::size_t nodes, std::size_t communities);

/// Unit-weight complete graph within each community, nothing across.
PredefinedGraph community_graph(std::size_t nodes, std::size_t communities);

}  // namespace agcrn
