#pragma once

// Event-driven simulation of the boundary-ignition forest-fire process.
//
// Sites appear at rate 1 (Exp(1) clocks). Each ignition-boundary vertex
// carries an independent rate-zeta Poisson stream; an arrival burns every
// occupied cluster adjacent to that vertex instantly. zeta = infinity means
// clusters burn the moment they become adjacent to the ignition boundary.
// NoRecovery keeps Burnt absorbing; Recovery treats a burnt site exactly
// like a vacant one (fresh Exp(1) clock from the burn instant).

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "fflab/lattice.hpp"
#include "fflab/stats.hpp"

namespace fflab {

inline constexpr double kCriticalTime = 0.6931471805599453;  // ln 2
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double birth_probability(double t) { return 1.0 - std::exp(-t); }

enum class SiteState : std::uint8_t { Vacant = 0, Occupied = 1, Burnt = 2 };
enum class Variant : std::uint8_t { NoRecovery, Recovery };

struct ProcessSpec {
  const Domain* domain = nullptr;
  Variant variant = Variant::NoRecovery;
  double zeta = 1.0;      // > 0, or infinity
  double horizon = kInf;  // finite required for Recovery
  std::vector<std::int32_t> ignition;  // outer-boundary indices
  // Pure-birth device: births and marks only, nothing ever burns. Marks
  // still spread to whole clusters at trigger times. Finite zeta only.
  bool mark_only = false;
};

// All outer-boundary vertices, except for strips where only the row below
// the bottom ignites (side and top walls are inert).
std::vector<std::int32_t> default_ignition(const Domain& d);

void validate_process(const ProcessSpec& spec);

struct ObserverSpec {
  std::vector<double> snapshot_times;
  bool record_birth_times = false;
  bool record_triggers = false;
  bool record_fires = true;
  bool record_fire_sites = false;     // keep per-fire site lists
  std::int32_t track_cluster_site = -1;  // record max cluster size of this site
};

// State of the process at a fixed time.
struct DynState {
  double t = 0.0;
  std::vector<SiteState> state;
  std::vector<std::uint8_t> marked;        // member of F_t
  std::vector<std::int32_t> marked_sites;  // ids with marked != 0
  std::vector<std::uint8_t> triggered;     // by outer-boundary index
};

struct FireEvent {
  double t = 0.0;
  std::int32_t trigger_outer = -1;  // outer-boundary index of the trigger
  std::int32_t size = 0;            // sites burnt (or newly marked) at this event
  std::vector<std::int32_t> sites;  // filled when record_fire_sites is set
};

struct RunRecord {
  const Domain* domain = nullptr;
  std::uint64_t key = 0;
  double horizon = 0.0;                // effective end time of the event loop
  std::vector<std::int32_t> ignition;  // outer indices, copied from the spec
  DynState final_state;
  std::vector<FireEvent> fires;
  std::vector<DynState> snapshots;
  std::vector<double> birth_time;  // first occupation time, +inf if never
  std::vector<std::pair<double, std::int32_t>> triggers;  // (t, outer index)
  bool triggers_recorded = false;
  std::int64_t tracked_max_cluster = -1;
};

// Reusable engine: construct once per (spec), run per replica key. Buffers
// are recycled across runs; instances are not thread-safe, use one per thread.
class FireSim {
 public:
  explicit FireSim(const ProcessSpec& spec);

  RunRecord run(std::uint64_t replica_key, const ObserverSpec& obs = {});

  const ProcessSpec& spec() const { return spec_; }

 private:
  struct Event {
    double t;
    std::uint8_t type;  // 0 birth, 1 ignition
    std::int32_t idx;   // site id or ignition-list index
    bool operator>(const Event& o) const {
      if (t != o.t) return t > o.t;
      if (type != o.type) return type > o.type;
      return idx > o.idx;
    }
  };

  // Burns the occupied cluster of `from` at time t, appending its sites to
  // out; handles marks, the tracked site, and Recovery rebirth clocks.
  std::int32_t burn_cluster(std::int32_t from, double t, std::vector<std::int32_t>& out);
  std::int32_t mark_cluster(std::int32_t from, std::vector<std::int32_t>& out);
  DynState snap(double t) const;

  ProcessSpec spec_;
  std::vector<std::uint8_t> adj_ignition_;    // site id -> adjacent to ignition
  std::vector<std::int32_t> first_ignition_;  // site id -> outer index or -1
  // per-run scratch
  std::vector<Event> heap_;
  std::vector<SiteState> state_;
  std::vector<std::uint8_t> marked_;
  std::vector<double> birth_time_;
  std::vector<std::uint32_t> birth_count_;
  std::vector<std::uint64_t> ign_key_;
  std::vector<std::uint32_t> ign_count_;
  std::vector<std::uint8_t> triggered_;
  std::vector<std::int32_t> bfs_;
  std::vector<std::uint32_t> mark_stamp_;
  std::uint32_t mark_epoch_ = 0;
  std::uint64_t birth_key_base_ = 0;
  double horizon_eff_ = 0.0;
  std::int32_t track_id_ = -1;
  std::int64_t tracked_max_ = -1;
};

RunRecord simulate(const ProcessSpec& spec, std::uint64_t replica_key,
                   const ObserverSpec& obs = {});

enum class Fate : std::uint8_t { AlreadyBurnt, EventuallyBurnt, OccupiedForever };

// NoRecovery only, after all births: boundary-adjacent occupied clusters
// burn almost surely under recurrent ignitions; the rest stay forever.
std::vector<Fate> eventual_burn_closure(const ProcessSpec& spec,
                                        const std::vector<SiteState>& state);

// ---- experiments ----

// P(origin eventually burnt) on Hexagon(N) (NoRecovery), or P(origin burnt
// before time_probe) (Recovery; time_probe required).
Estimate origin_burn_experiment(int N, double zeta, Variant variant, std::uint64_t replicas,
                                std::uint64_t seed, std::optional<double> time_probe = {},
                                int threads = 1);

// P(F_n(v)): a below-strip neighbour of the bottom-centre vertex v triggers
// at some t <= t_c at which v carries an occupied half-plane arm to
// distance n. Strip 6n x 2n. Finite zeta.
Estimate long_path_experiment(int n, double zeta, std::uint64_t replicas, std::uint64_t seed,
                              int threads = 1);

// P(the mark set reaches the shrunken hexagon H_{N - N^(1-delta)} by time
// t_c + N^(-beta)) on Hexagon(N), NoRecovery, finite zeta.
Estimate fire_depth_experiment(int N, double zeta, double delta, double beta,
                               std::uint64_t replicas, std::uint64_t seed, int threads = 1);

// For each L in the grid: P(max cluster of v over [0, horizon] has <= L
// sites), NoRecovery.
std::vector<std::pair<std::int64_t, Estimate>> bounded_cluster_experiment(
    const Domain& strip, Site v, double zeta, double horizon,
    const std::vector<std::int64_t>& L_grid, std::uint64_t replicas, std::uint64_t seed,
    int threads = 1);

// ---- exact small-instance oracle ----

struct CtmcQuery {
  enum class Kind : std::uint8_t { EventuallyBurnt, BurntBefore } kind = Kind::EventuallyBurnt;
  Site site;
  double t = 0.0;  // BurntBefore: probe time
};

// Exact probabilities for tiny domains: absorbing analysis (NoRecovery,
// EventuallyBurnt) over the 3^k state space, or uniformized transient
// analysis (BurntBefore, both variants; Recovery state space 2^k with an
// ever-burnt flag). zeta = infinity handled by contracting the instant
// burns into the birth transitions.
double exact_small_ctmc(const ProcessSpec& spec, const CtmcQuery& query);

}  // namespace fflab
