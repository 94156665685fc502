#pragma once

// SVG rendering of process snapshots: one hexagonal cell per site at its
// embedded coordinate. Vacant white, occupied gray, burnt blue with the
// largest burnt cluster red, triggered boundary vertices green.

#include <cstdint>
#include <string>

#include "fflab/forestfire.hpp"

namespace fflab {

struct RenderStats {
  std::int64_t largest_burnt = 0;
  std::int64_t second_burnt = 0;
  std::int64_t burnt_total = 0;
  std::int64_t triggered = 0;
};

// Renders the state the run retained at time t (a snapshot or the final
// state) and returns the burnt-cluster summary. Throws when no state was
// retained at t or the file cannot be written.
RenderStats render_snapshot(const RunRecord& run, double t, const std::string& path);

// Cluster summary only, for checks that do not need the file.
RenderStats snapshot_stats(const RunRecord& run, double t);

}  // namespace fflab
