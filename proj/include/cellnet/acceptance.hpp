#pragma once

// The ten acceptance criteria, shared by `cellnet selftest` and the
// acceptance test binary, plus the random network samplers they use.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cellnet/netcore.hpp"
#include "cellnet/quotient.hpp"

namespace cellnet::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  double limit_seconds = 0.0;
  std::string detail;
};

struct CriterionInfo {
  int id;
  const char* name;
  double limit_seconds;
};

const std::vector<CriterionInfo>& criteria();

/// Runs one criterion. A criterion passes when its checks hold and it
/// finishes within its time limit. Exceptions are caught and reported as
/// failures.
CriterionResult run_criterion(int id, std::uint64_t seed = 0);

/// All criteria in order, or just `only`.
std::vector<CriterionResult> run_all(std::uint64_t seed = 0, std::optional<int> only = {});

/// "PASS  3 projection-block machinery  (1.20 s / 10 s)  <detail>"
std::string format_line(const CriterionResult& r);

// ---------------------------------------------------------------------------
// Sample networks

/// 4 cells c1..c4 with s: c1→c2, c2→c3, c3→c4, c4→c3.
NetworkSpec figure2_network();

/// Uniform random total maps: 1..max_cells cells, 1..max_generators generators.
NetworkSpec random_network(std::mt19937_64& rng, std::size_t max_cells, std::size_t max_generators);

struct ProjectionBlockSample {
  NetworkSpec net;
  Block block;
  CellIndex cell = 0;  // fully dependent
  std::size_t monoid_size = 0;
};

/// A random network built around a projection block: one generator permutes
/// B and pushes every outside cell strictly towards B, the others keep B
/// closed. Samples with a monoid above max_monoid or without a fully
/// dependent cell are redrawn.
ProjectionBlockSample random_projection_block_network(std::mt19937_64& rng,
                                                      std::size_t max_monoid = 60);

}  // namespace cellnet::acceptance
