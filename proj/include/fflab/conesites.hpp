#pragma once

// Cone-site detection on snapshots of the process at the critical time.
//
// A bottom-row vertex v is an (alpha, n)-cone site when the mark set avoids
// the upward cone at v and v carries an occupied arm to distance n inside
// that cone. The infinite-zeta variant asks instead for v vacant with the
// arm starting from one of the two sites above v. The localized variant
// replays marks from the fire log with triggers and growth confined to a
// rectangle around v, making distant vertices independent.

#include <cstdint>
#include <optional>
#include <vector>

#include "fflab/forestfire.hpp"
#include "fflab/lattice.hpp"
#include "fflab/percolation.hpp"
#include "fflab/stats.hpp"

namespace fflab {

struct ConeSiteSpec {
  double alpha = 1.0471975511965976;  // half-opening angle, in (pi/6, pi/2]
  double n = 1.0;                     // Euclidean arm radius
  enum class Variant : std::uint8_t { Standard, InfiniteZeta } variant = Variant::Standard;
  struct Localized {
    double delta = 1.0;  // recorded with outputs; the box is set by alpha and n
  };
  std::optional<Localized> localized;
};

void validate_cone_spec(const ConeSiteSpec& spec);

// Detection on the state at t_c (the run's final state or a snapshot taken
// exactly there). Localized detection replays the trigger log and needs the
// run recorded with birth times and triggers.
bool is_cone_site(const RunRecord& run, Site v, const ConeSiteSpec& spec);

// Number of cone sites on the bottom row within [-halfwidth, halfwidth].
std::int64_t count_cone_sites(const RunRecord& run, double interval_halfwidth,
                              const ConeSiteSpec& spec);

// Replica counts of bottom-row cone sites in [-halfwidth, halfwidth] on a
// strip sized to fit; runs the pure-birth mark dynamics for finite zeta and
// the instant-burn process for the InfiniteZeta variant.
std::vector<std::int64_t> cone_count_samples(double interval_halfwidth, const ConeSiteSpec& spec,
                                             double zeta, std::uint64_t replicas,
                                             std::uint64_t seed, int threads = 1);

struct PairCorrelationResult {
  Estimate joint;    // P(v and v' both cone sites)
  double pi1_n;      // reference arm probability at radius n
  double pi1_cross;  // reference arm probability at min(|v - v'|, n)
  double ratio;      // joint / (pi1_n * pi1_cross)
};

// Lemma-style pair bound statistic for two bottom-row vertices.
PairCorrelationResult pair_correlation_check(Site v, Site v_prime, const ConeSiteSpec& spec,
                                             double zeta, std::uint64_t replicas,
                                             std::uint64_t seed, ArmTable& arms,
                                             int threads = 1);

}  // namespace fflab
