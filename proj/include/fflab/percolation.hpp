#pragma once

// Static site percolation on finite domains: sampling, connectivity events,
// Monte Carlo estimation, and the characteristic length L(p).
//
// Event evaluation is lazy: a replica samples only the sites a search
// actually visits. Because per-site uniforms are a pure function of
// (replica key, site id), lazy and eager evaluation agree bit for bit,
// and estimates are independent of thread count.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "fflab/lattice.hpp"
#include "fflab/stats.hpp"

namespace fflab {

inline constexpr double kPc = 0.5;  // site percolation threshold here

// Uniform variate attached to a site; occupancy at parameter p is u < p,
// which couples configurations monotonically across p for a fixed key.
double site_uniform(std::uint64_t replica_key, std::int32_t id);

struct Configuration {
  const Domain* domain = nullptr;
  std::vector<std::uint8_t> occupied;
  double p = 0.0;
  std::uint64_t key = 0;
};

Configuration sample(const Domain& d, double p, std::uint64_t replica_key);

enum class EventKind : std::uint8_t {
  HCross,        // occupied left-right crossing
  VCross,        // occupied bottom-top crossing
  HCrossVacant,  // vacant left-right crossing
  VCrossVacant,  // vacant bottom-top crossing
  OccCircuit,    // occupied circuit in an annulus surrounding its hole
  VacCircuit,
  OneArmCone,  // occupied path from the apex to distance n inside a cone
  OneArmBall,  // occupied path from the centre to distance n (full plane)
  FourArm,     // alternating occupied/vacant arms from the centre's neighbours
};

// Crossing events apply to the whole domain (Rectangle: embedded box sides,
// defined as sites within one lattice spacing of the box edge; Rhombus: the
// two axial side columns/rows). The other events carry their region.
// For OneArmCone/OneArmBall with r1 > 0 the event is the section crossing:
// an occupied path between a site with a lattice neighbour at distance
// <= r1 from the centre and a site with a neighbour at distance >= r2.
struct EventSpec {
  EventKind kind = EventKind::HCross;
  Region region;

  static EventSpec h_cross() { return {EventKind::HCross, {}}; }
  static EventSpec v_cross() { return {EventKind::VCross, {}}; }
  static EventSpec h_cross_vacant() { return {EventKind::HCrossVacant, {}}; }
  static EventSpec v_cross_vacant() { return {EventKind::VCrossVacant, {}}; }
  static EventSpec occ_circuit(Site c, double r1, double r2) {
    return {EventKind::OccCircuit, Region::annulus(c, r1, r2)};
  }
  static EventSpec vac_circuit(Site c, double r1, double r2) {
    return {EventKind::VacCircuit, Region::annulus(c, r1, r2)};
  }
  static EventSpec one_arm_cone(Site apex, double alpha, double r1, double r2) {
    return {EventKind::OneArmCone, Region::cone(apex, alpha, r1, r2)};
  }
  static EventSpec one_arm_ball(Site c, double r1, double r2) {
    return {EventKind::OneArmBall, Region::annulus(c, r1, r2)};
  }
  static EventSpec four_arm(Site c, double n) {
    return {EventKind::FourArm, Region::ball(c, n)};
  }

  std::string describe() const;  // stable text form, hashed into CSV rows
};

// Throws std::invalid_argument when the spec does not fit the domain
// (crossing on a non-box domain, region sticking out, bad radii).
void validate_event(const EventSpec& spec, const Domain& d);

// Reusable per-thread scratch: visit stamps and the lazy sampling cache.
class Workspace {
 public:
  void attach(const Domain& d);
  void next_replica(std::uint64_t replica_key, double p);

  bool lazy_occupied(std::int32_t id);

  // search scratch, managed by CompiledEvent
  std::vector<std::int32_t> stack;
  std::vector<std::uint32_t> visit_stamp;
  std::uint32_t visit_epoch = 0;
  std::vector<std::int8_t> comp_of;  // four-arm component index per site

 private:
  std::vector<std::uint32_t> occ_stamp_;
  std::vector<std::uint8_t> occ_val_;
  std::uint32_t occ_epoch_ = 0;
  std::uint64_t site_key_ = 0;
  double p_ = 0.0;
  std::int32_t size_ = 0;
};

// Site occupancy supplier: either a materialized configuration or lazy
// sampling through a workspace.
struct OccView {
  const std::uint8_t* materialized = nullptr;
  Workspace* ws = nullptr;

  bool operator()(std::int32_t id) const {
    return materialized ? materialized[id] != 0 : ws->lazy_occupied(id);
  }
};

// Event precompiled against a fixed domain: region membership flags,
// search start sites and target flags.
class CompiledEvent {
 public:
  CompiledEvent(const EventSpec& spec, const Domain& d);

  const EventSpec& spec() const { return spec_; }
  const Domain& domain() const { return *dom_; }

  bool holds(OccView occ, Workspace& ws) const;

 private:
  bool search(bool color, OccView occ, Workspace& ws) const;
  bool circuit(bool color, OccView occ, Workspace& ws) const;
  bool four_arm(OccView occ, Workspace& ws) const;

  EventSpec spec_;
  const Domain* dom_;
  std::vector<std::uint8_t> in_region_;  // by id
  std::vector<std::uint8_t> target_;     // by id
  std::vector<std::int32_t> starts_;
  // four-arm specifics
  std::array<std::int32_t, 6> arm_nbr_{};
  std::int32_t center_id_ = -1;
  double escape_r2sq_ = 0.0;  // circuits: squared outer radius
};

bool evaluate_event(const EventSpec& spec, const Configuration& cfg);

Estimate estimate_event(const EventSpec& spec, const Domain& d, double p,
                        std::uint64_t replicas, std::uint64_t seed, int threads = 1);

// characteristic length: smallest n with P_p(vertical crossing of
// [0,2n]x[0,n]) <= 0.001, accepted through the Wilson upper bound.
inline constexpr double kLengthThreshold = 0.001;

struct LengthDecision {
  int n = 0;
  Estimate est;
  bool pass = false;  // Wilson upper bound <= threshold
};

struct LengthResult {
  int L = 0;
  bool above_cap = false;
  std::vector<LengthDecision> decisions;
};

// Scans n geometrically (factor 1.25) until the first accepted scale, then
// refines the bracket by bisection; each decision uses its own key split.
// p != 1/2 required; p > 1/2 is mapped to 1-p.
LengthResult characteristic_length(double p, std::uint64_t replicas, int cap,
                                   std::uint64_t seed, int threads = 1);

// p_lambda(n) = 1/2 + lambda / (n^2 * pi4(n)) with pi4 estimated at p = 1/2.
double near_critical_parameter(double lambda, int n, std::uint64_t replicas,
                               std::uint64_t seed, int threads = 1);

// P_p(origin connected to distance n), p > 1/2: finite-volume stand-in for
// the percolation function theta(p).
Estimate theta_proxy(double p, double n, std::uint64_t replicas, std::uint64_t seed,
                     int threads = 1);

// Critical arm probabilities at p = 1/2, cached by (alpha, n). alpha = 0
// requests the full-plane arm; alpha in (pi/6, pi/2] the cone arm anchored
// at a bottom-row apex of a half-plane strip.
class ArmTable {
 public:
  explicit ArmTable(std::uint64_t seed, std::uint64_t replicas = 100000, int threads = 1);

  Estimate arm(double alpha, double n);
  Estimate full_plane(double n) { return arm(0.0, n); }

 private:
  std::uint64_t seed_;
  std::uint64_t replicas_;
  int threads_;
  std::mutex mu_;
  std::map<std::pair<long long, long long>, Estimate> cache_;  // keys scaled by 1e6
};

// Domain builders sized for arm events with a safety margin.
Domain arm_domain_full_plane(double n);
Domain arm_domain_cone(double alpha, double n);
// Bottom-row centre apex used by arm_domain_cone.
Site cone_apex();

}  // namespace fflab
