#include "fflab/conesites.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fflab/parallel.hpp"
#include "fflab/rng.hpp"

namespace fflab {

namespace {

constexpr double kEps = 1e-9;
constexpr double kUnbounded = 1e18;

const DynState& state_at_tc(const RunRecord& run) {
  if (std::abs(run.final_state.t - kCriticalTime) <= kEps) return run.final_state;
  for (const DynState& s : run.snapshots)
    if (std::abs(s.t - kCriticalTime) <= kEps) return s;
  throw std::invalid_argument("cone site: run lacks a state at the critical time");
}

// Local-dependence rectangle: v + [-tan(alpha) n, tan(alpha) n] x [-row, n].
// The bottom margin of one row keeps the ignition vertices below v inside.
struct DepBox {
  double x1, x2, y1, y2;
  bool contains(Vec2 e) const {
    return e.x >= x1 - kEps && e.x <= x2 + kEps && e.y >= y1 - kEps && e.y <= y2 + kEps;
  }
};

DepBox dep_box(Site v, const ConeSiteSpec& spec) {
  const Vec2 c = embed(v);
  const double half = std::tan(spec.alpha) * spec.n;
  return {c.x - half, c.x + half, c.y - kRowSpacing, c.y + spec.n};
}

// Occupied path inside the cone at v from `start` to Euclidean distance
// `radius`; mirrors the arm-event reach convention (a site counts as the
// far end when one of its six neighbours leaves the open ball).
bool cone_arm_from(const Domain& d, const std::vector<SiteState>& st, Site v, double alpha,
                   double radius, std::int32_t start) {
  const Region reg = Region::cone(v, alpha, 0.0, radius);
  if (st[static_cast<std::size_t>(start)] != SiteState::Occupied) return false;
  const Site s0 = d.site(start);
  if (!region_contains(reg, s0)) {
    // Degenerate radius: the start already sits at distance >= radius; it
    // only has to lie in the cone direction-wise.
    const Region wide = Region::cone(v, alpha, 0.0, kUnbounded);
    return region_contains(wide, s0) &&
           static_cast<double>(dist2(s0, v)) >= radius * radius;
  }
  const double r2sq = radius * radius;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(d.size()), 0);
  std::vector<std::int32_t> stack{start};
  seen[static_cast<std::size_t>(start)] = 1;
  while (!stack.empty()) {
    const std::int32_t id = stack.back();
    stack.pop_back();
    const Site s = d.site(id);
    for (int k = 0; k < 6; ++k)
      if (static_cast<double>(dist2(neighbor(s, k), v)) >= r2sq) return true;
    for (std::int32_t nb : d.neighbor_ids(id)) {
      if (nb < 0 || seen[static_cast<std::size_t>(nb)]) continue;
      if (st[static_cast<std::size_t>(nb)] != SiteState::Occupied) continue;
      if (!region_contains(reg, d.site(nb))) continue;
      seen[static_cast<std::size_t>(nb)] = 1;
      stack.push_back(nb);
    }
  }
  return false;
}

// Localized mark set for the pure-birth mark dynamics: marks generated by
// trigger arrivals inside the box, grown through sites inside the box born
// by the trigger time; true when any of them lands in the cone.
bool local_marks_hit_cone(const RunRecord& run, Site v, const ConeSiteSpec& spec) {
  if (!run.triggers_recorded)
    throw std::invalid_argument("cone site: localized detection needs recorded triggers");
  if (run.triggers.empty()) return false;
  const Domain& d = *run.domain;
  const DepBox box = dep_box(v, spec);
  const Region cone = Region::cone(v, spec.alpha, 0.0, kUnbounded);
  std::vector<std::uint32_t> stamp(static_cast<std::size_t>(d.size()), 0);
  std::uint32_t epoch = 0;
  std::vector<std::int32_t> stack;
  for (const auto& [t, outer] : run.triggers) {
    if (t > kCriticalTime + kEps) continue;
    const Site w = d.outer_boundary()[static_cast<std::size_t>(outer)];
    if (!box.contains(embed(w))) continue;
    ++epoch;
    stack.clear();
    for (std::int32_t id : d.outer_neighbors(outer)) {
      if (run.birth_time[static_cast<std::size_t>(id)] > t) continue;
      if (!box.contains(embed(d.site(id)))) continue;
      if (stamp[static_cast<std::size_t>(id)] == epoch) continue;
      stamp[static_cast<std::size_t>(id)] = epoch;
      stack.push_back(id);
    }
    while (!stack.empty()) {
      const std::int32_t id = stack.back();
      stack.pop_back();
      if (region_contains(cone, d.site(id))) return true;
      for (std::int32_t nb : d.neighbor_ids(id)) {
        if (nb < 0 || stamp[static_cast<std::size_t>(nb)] == epoch) continue;
        if (run.birth_time[static_cast<std::size_t>(nb)] > t) continue;
        if (!box.contains(embed(d.site(nb)))) continue;
        stamp[static_cast<std::size_t>(nb)] = epoch;
        stack.push_back(nb);
      }
    }
  }
  return false;
}

// Localized mark set for the instant-burn dynamics: replays the box's own
// birth sequence, burning every box-cluster the moment it touches an
// ignition vertex of the box. Burnt sites stop carrying connectivity, so
// the trigger log alone would overcount; the replay runs the local process.
bool local_inf_marks_hit_cone(const RunRecord& run, Site v, const ConeSiteSpec& spec) {
  const Domain& d = *run.domain;
  const DepBox box = dep_box(v, spec);
  const Region cone = Region::cone(v, spec.alpha, 0.0, kUnbounded);
  std::vector<std::uint8_t> adj(static_cast<std::size_t>(d.size()), 0);
  for (std::int32_t j : run.ignition) {
    if (!box.contains(embed(d.outer_boundary()[static_cast<std::size_t>(j)]))) continue;
    for (std::int32_t id : d.outer_neighbors(j)) adj[static_cast<std::size_t>(id)] = 1;
  }
  std::vector<std::pair<double, std::int32_t>> births;
  for (std::int32_t id = 0; id < d.size(); ++id) {
    const double t = run.birth_time[static_cast<std::size_t>(id)];
    if (t <= kCriticalTime + kEps && box.contains(embed(d.site(id)))) births.emplace_back(t, id);
  }
  std::sort(births.begin(), births.end());
  std::vector<std::uint8_t> loc(static_cast<std::size_t>(d.size()), 0);  // 1 occ, 2 burnt
  std::vector<std::int32_t> stack;
  for (const auto& [t, id] : births) {
    loc[static_cast<std::size_t>(id)] = 1;
    if (!adj[static_cast<std::size_t>(id)]) continue;
    stack.clear();
    stack.push_back(id);
    loc[static_cast<std::size_t>(id)] = 2;
    while (!stack.empty()) {
      const std::int32_t s = stack.back();
      stack.pop_back();
      if (region_contains(cone, d.site(s))) return true;
      for (std::int32_t nb : d.neighbor_ids(s))
        if (nb >= 0 && loc[static_cast<std::size_t>(nb)] == 1) {
          loc[static_cast<std::size_t>(nb)] = 2;
          stack.push_back(nb);
        }
    }
  }
  return false;
}

}  // namespace

void validate_cone_spec(const ConeSiteSpec& spec) {
  constexpr double kPi = std::numbers::pi;
  if (!(spec.alpha > kPi / 6.0 + 1e-12) || !(spec.alpha <= kPi / 2.0 + 1e-12))
    throw std::invalid_argument("cone spec: alpha must lie in (pi/6, pi/2]");
  if (!(spec.n > 0.0)) throw std::invalid_argument("cone spec: n must be positive");
  if (spec.localized) {
    if (!(spec.localized->delta > 0.0) || !(spec.localized->delta <= 1.0))
      throw std::invalid_argument("cone spec: delta must lie in (0, 1]");
    if (spec.alpha >= kPi / 2.0 - 1e-9)
      throw std::invalid_argument("cone spec: localized boxes need alpha < pi/2");
  }
}

bool is_cone_site(const RunRecord& run, Site v, const ConeSiteSpec& spec) {
  validate_cone_spec(spec);
  if (run.domain == nullptr) throw std::invalid_argument("cone site: run lacks a domain");
  const Domain& d = *run.domain;
  if (v.v != d.bottom_row())
    throw std::invalid_argument("cone site: vertex not on the bottom row");
  const std::int32_t vid = d.id_of(v);
  if (vid < 0) throw std::invalid_argument("cone site: vertex outside domain");
  const DynState& st = state_at_tc(run);

  // Condition (i): the (local) mark set avoids the cone at v.
  if (spec.localized) {
    if (run.birth_time.empty())
      throw std::invalid_argument("cone site: localized detection needs recorded birth times");
    const bool inf_run = spec.variant == ConeSiteSpec::Variant::InfiniteZeta;
    if (inf_run ? local_inf_marks_hit_cone(run, v, spec) : local_marks_hit_cone(run, v, spec))
      return false;
  } else {
    const Region cone = Region::cone(v, spec.alpha, 0.0, kUnbounded);
    for (std::int32_t id : st.marked_sites)
      if (region_contains(cone, d.site(id))) return false;
  }

  // Condition (ii): the occupied arm.
  if (spec.variant == ConeSiteSpec::Variant::Standard)
    return cone_arm_from(d, st.state, v, spec.alpha, spec.n, vid);

  if (st.state[static_cast<std::size_t>(vid)] != SiteState::Vacant) return false;
  for (Site a : {Site{v.u, v.v + 1}, Site{v.u - 1, v.v + 1}}) {
    const std::int32_t aid = d.id_of(a);
    if (aid >= 0 && cone_arm_from(d, st.state, v, spec.alpha, spec.n, aid)) return true;
  }
  return false;
}

namespace {

// Strip wide and tall enough for cones (and dependence boxes) of radius
// spec.n anchored anywhere in [-halfwidth, halfwidth] on the bottom row.
void check_strip_geometry(const Domain& d, double halfwidth, const ConeSiteSpec& spec) {
  if (d.kind() != DomainKind::HalfPlaneStrip)
    throw std::invalid_argument("cone count: domain must be a half-plane strip");
  const double extent =
      spec.localized ? std::max(spec.n, std::tan(spec.alpha) * spec.n) : spec.n;
  const double need_half = halfwidth + extent + 1.0;
  if (static_cast<double>(d.param_width()) / 2.0 < need_half)
    throw std::invalid_argument("cone count: strip too narrow for the requested cones");
  const double top = static_cast<double>(d.param_height() - 1) * kRowSpacing;
  if (top < spec.n)
    throw std::invalid_argument("cone count: strip too shallow for the requested cones");
}

Domain fitting_strip(double halfwidth, const ConeSiteSpec& spec) {
  const double extent =
      spec.localized ? std::max(spec.n, std::tan(spec.alpha) * spec.n) : spec.n;
  const int w = 2 * static_cast<int>(std::ceil(halfwidth + extent + 2.0));
  const int h = static_cast<int>(std::ceil(2.0 * spec.n / kSqrt3)) + 3;
  return Domain::half_plane_strip(w, h);
}

ProcessSpec cone_process(const Domain& strip, const ConeSiteSpec& spec, double zeta) {
  ProcessSpec ps;
  ps.domain = &strip;
  ps.variant = Variant::NoRecovery;
  ps.horizon = kCriticalTime;
  ps.ignition = default_ignition(strip);
  if (spec.variant == ConeSiteSpec::Variant::InfiniteZeta) {
    if (std::isfinite(zeta))
      throw std::invalid_argument("cone count: InfiniteZeta variant needs zeta = inf");
    ps.zeta = kInf;
  } else {
    if (!std::isfinite(zeta) || !(zeta > 0.0))
      throw std::invalid_argument("cone count: Standard variant needs finite positive zeta");
    ps.zeta = zeta;
    ps.mark_only = true;  // pure-birth representation of the mark set
  }
  return ps;
}

ObserverSpec cone_observer(const ConeSiteSpec& spec) {
  ObserverSpec obs;
  obs.record_fires = false;
  if (spec.localized) {
    obs.record_birth_times = true;
    obs.record_triggers = true;
  }
  return obs;
}

}  // namespace

std::int64_t count_cone_sites(const RunRecord& run, double interval_halfwidth,
                              const ConeSiteSpec& spec) {
  validate_cone_spec(spec);
  if (run.domain == nullptr) throw std::invalid_argument("cone count: run lacks a domain");
  if (!(interval_halfwidth >= 0.0))
    throw std::invalid_argument("cone count: halfwidth must be nonnegative");
  const Domain& d = *run.domain;
  check_strip_geometry(d, interval_halfwidth, spec);
  const std::int32_t row = d.bottom_row();
  std::int64_t count = 0;
  for (std::int32_t id = 0; id < d.size(); ++id) {
    const Site s = d.site(id);
    if (s.v != row) continue;
    const double x = embed(s).x;
    if (x < -interval_halfwidth - kEps || x > interval_halfwidth + kEps) continue;
    if (is_cone_site(run, s, spec)) ++count;
  }
  return count;
}

std::vector<std::int64_t> cone_count_samples(double interval_halfwidth, const ConeSiteSpec& spec,
                                             double zeta, std::uint64_t replicas,
                                             std::uint64_t seed, int threads) {
  validate_cone_spec(spec);
  if (replicas == 0) throw std::invalid_argument("cone count: replicas must be >= 1");
  const Domain strip = fitting_strip(interval_halfwidth, spec);
  const ProcessSpec ps = cone_process(strip, spec, zeta);
  const ObserverSpec obs = cone_observer(spec);

  const int nw = (threads <= 1 || replicas < 2048) ? 1 : std::min(threads, 64);
  std::vector<FireSim> sims;
  sims.reserve(static_cast<std::size_t>(nw));
  for (int w = 0; w < nw; ++w) sims.emplace_back(ps);
  std::vector<std::int64_t> out(replicas, 0);
  parallel_replicas(replicas, nw, [&](int w, std::uint64_t r) {
    const RunRecord rec = sims[static_cast<std::size_t>(w)].run(rng::replica_key(seed, r), obs);
    out[r] = count_cone_sites(rec, interval_halfwidth, spec);
  });
  return out;
}

PairCorrelationResult pair_correlation_check(Site v, Site v_prime, const ConeSiteSpec& spec,
                                             double zeta, std::uint64_t replicas,
                                             std::uint64_t seed, ArmTable& arms, int threads) {
  validate_cone_spec(spec);
  if (v.v != 0 || v_prime.v != 0)
    throw std::invalid_argument("pair correlation: vertices must lie on the strip bottom row");
  if (replicas == 0) throw std::invalid_argument("pair correlation: replicas must be >= 1");
  const double xmax = std::max(std::abs(embed(v).x), std::abs(embed(v_prime).x));
  const Domain strip = fitting_strip(xmax, spec);
  const ProcessSpec ps = cone_process(strip, spec, zeta);
  const ObserverSpec obs = cone_observer(spec);

  const int nw = (threads <= 1 || replicas < 2048) ? 1 : std::min(threads, 64);
  std::vector<FireSim> sims;
  sims.reserve(static_cast<std::size_t>(nw));
  for (int w = 0; w < nw; ++w) sims.emplace_back(ps);
  std::vector<std::uint8_t> hit(replicas, 0);
  parallel_replicas(replicas, nw, [&](int w, std::uint64_t r) {
    const RunRecord rec = sims[static_cast<std::size_t>(w)].run(rng::replica_key(seed, r), obs);
    hit[r] = (is_cone_site(rec, v, spec) && is_cone_site(rec, v_prime, spec)) ? 1 : 0;
  });
  std::uint64_t succ = 0;
  for (std::uint8_t h : hit) succ += h;

  PairCorrelationResult res;
  res.joint = make_estimate(succ, replicas, seed);
  res.pi1_n = arms.arm(spec.alpha, spec.n).p_hat;
  const double dist = std::sqrt(static_cast<double>(dist2(v, v_prime)));
  const double cross = std::min(dist, spec.n);
  res.pi1_cross = cross <= 0.0 ? 1.0 : arms.arm(spec.alpha, cross).p_hat;
  res.ratio = res.joint.p_hat / (res.pi1_n * res.pi1_cross);
  return res;
}

}  // namespace fflab
