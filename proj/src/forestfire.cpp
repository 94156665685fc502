#include "fflab/forestfire.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "fflab/parallel.hpp"
#include "fflab/percolation.hpp"
#include "fflab/rng.hpp"

namespace fflab {

std::vector<std::int32_t> default_ignition(const Domain& d) {
  const auto& outer = d.outer_boundary();
  std::vector<std::int32_t> out;
  if (d.kind() == DomainKind::HalfPlaneStrip) {
    // Side and top walls are inert; only the row below the strip ignites.
    const std::int32_t below = d.bottom_row() - 1;
    for (std::size_t j = 0; j < outer.size(); ++j)
      if (outer[j].v == below) out.push_back(static_cast<std::int32_t>(j));
  } else {
    out.resize(outer.size());
    for (std::size_t j = 0; j < outer.size(); ++j) out[j] = static_cast<std::int32_t>(j);
  }
  return out;
}

void validate_process(const ProcessSpec& spec) {
  if (spec.domain == nullptr) throw std::invalid_argument("process: domain is null");
  if (spec.domain->size() < 1) throw std::invalid_argument("process: empty domain");
  if (std::isnan(spec.zeta) || !(spec.zeta > 0.0))
    throw std::invalid_argument("process: zeta must be positive (or infinite)");
  if (std::isnan(spec.horizon) || !(spec.horizon > 0.0))
    throw std::invalid_argument("process: horizon must be positive");
  if (spec.variant == Variant::Recovery && !std::isfinite(spec.horizon))
    throw std::invalid_argument("process: Recovery needs a finite horizon");
  const std::size_t m = spec.domain->outer_boundary().size();
  std::vector<std::uint8_t> seen(m, 0);
  for (std::int32_t j : spec.ignition) {
    if (j < 0 || static_cast<std::size_t>(j) >= m)
      throw std::invalid_argument("process: ignition index out of range");
    if (seen[static_cast<std::size_t>(j)]++)
      throw std::invalid_argument("process: duplicate ignition vertex");
  }
  if (spec.mark_only) {
    if (spec.variant != Variant::NoRecovery)
      throw std::invalid_argument("process: mark_only requires NoRecovery");
    if (!std::isfinite(spec.zeta))
      throw std::invalid_argument("process: mark_only requires finite zeta");
  }
}

FireSim::FireSim(const ProcessSpec& spec) : spec_(spec) {
  validate_process(spec_);
  const Domain& d = *spec_.domain;
  adj_ignition_.assign(static_cast<std::size_t>(d.size()), 0);
  first_ignition_.assign(static_cast<std::size_t>(d.size()), -1);
  for (std::int32_t j : spec_.ignition)
    for (std::int32_t id : d.outer_neighbors(j)) {
      adj_ignition_[static_cast<std::size_t>(id)] = 1;
      if (first_ignition_[static_cast<std::size_t>(id)] < 0)
        first_ignition_[static_cast<std::size_t>(id)] = j;
    }
  mark_stamp_.assign(static_cast<std::size_t>(d.size()), 0);
}

std::int32_t FireSim::burn_cluster(std::int32_t from, double t, std::vector<std::int32_t>& out) {
  const Domain& d = *spec_.domain;
  const bool recover = spec_.variant == Variant::Recovery;
  std::int32_t count = 0;
  bool hit_track = false;
  bfs_.clear();
  bfs_.push_back(from);
  state_[static_cast<std::size_t>(from)] = SiteState::Burnt;
  while (!bfs_.empty()) {
    const std::int32_t id = bfs_.back();
    bfs_.pop_back();
    marked_[static_cast<std::size_t>(id)] = 1;
    ++count;
    out.push_back(id);
    if (id == track_id_) hit_track = true;
    if (recover) {
      const double tb =
          t + rng::exponential(rng::word(rng::derive(birth_key_base_, static_cast<std::uint64_t>(id)),
                                         birth_count_[static_cast<std::size_t>(id)]++),
                               1.0);
      if (tb <= horizon_eff_) {
        heap_.push_back({tb, 0, id});
        std::push_heap(heap_.begin(), heap_.end(), std::greater<Event>{});
      }
    }
    for (std::int32_t nb : d.neighbor_ids(id))
      if (nb >= 0 && state_[static_cast<std::size_t>(nb)] == SiteState::Occupied) {
        state_[static_cast<std::size_t>(nb)] = SiteState::Burnt;
        bfs_.push_back(nb);
      }
  }
  if (hit_track && count > tracked_max_) tracked_max_ = count;
  return count;
}

std::int32_t FireSim::mark_cluster(std::int32_t from, std::vector<std::int32_t>& out) {
  const Domain& d = *spec_.domain;
  if (mark_stamp_[static_cast<std::size_t>(from)] == mark_epoch_) return 0;
  std::int32_t newly = 0;
  bfs_.clear();
  bfs_.push_back(from);
  mark_stamp_[static_cast<std::size_t>(from)] = mark_epoch_;
  while (!bfs_.empty()) {
    const std::int32_t id = bfs_.back();
    bfs_.pop_back();
    if (!marked_[static_cast<std::size_t>(id)]) {
      marked_[static_cast<std::size_t>(id)] = 1;
      ++newly;
      out.push_back(id);
    }
    for (std::int32_t nb : d.neighbor_ids(id))
      if (nb >= 0 && state_[static_cast<std::size_t>(nb)] == SiteState::Occupied &&
          mark_stamp_[static_cast<std::size_t>(nb)] != mark_epoch_) {
        mark_stamp_[static_cast<std::size_t>(nb)] = mark_epoch_;
        bfs_.push_back(nb);
      }
  }
  return newly;
}

DynState FireSim::snap(double t) const {
  DynState s;
  s.t = t;
  s.state = state_;
  s.marked = marked_;
  for (std::size_t id = 0; id < marked_.size(); ++id)
    if (marked_[id]) s.marked_sites.push_back(static_cast<std::int32_t>(id));
  s.triggered = triggered_;
  return s;
}

RunRecord FireSim::run(std::uint64_t replica_key, const ObserverSpec& obs) {
  const Domain& d = *spec_.domain;
  const std::int32_t n = d.size();
  const bool zinf = !std::isfinite(spec_.zeta);

  std::vector<double> snaps = obs.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  for (double s : snaps) {
    if (!(s >= 0.0) || !std::isfinite(s))
      throw std::invalid_argument("snapshot time must be finite and nonnegative");
    if (std::isfinite(spec_.horizon) && s > spec_.horizon)
      throw std::invalid_argument("snapshot time beyond horizon");
  }
  track_id_ = obs.track_cluster_site;
  if (track_id_ >= n) throw std::invalid_argument("tracked site outside domain");
  tracked_max_ = track_id_ >= 0 ? 0 : -1;

  state_.assign(static_cast<std::size_t>(n), SiteState::Vacant);
  marked_.assign(static_cast<std::size_t>(n), 0);
  birth_time_.assign(static_cast<std::size_t>(n), kInf);
  birth_count_.assign(static_cast<std::size_t>(n), 1);
  triggered_.assign(d.outer_boundary().size(), 0);
  std::fill(mark_stamp_.begin(), mark_stamp_.end(), 0u);
  mark_epoch_ = 0;
  heap_.clear();

  // First births. With an infinite horizon (NoRecovery) the loop must run
  // until every site is born and every requested snapshot is covered.
  birth_key_base_ = rng::derive(replica_key, rng::kSaltBirth);
  const bool finite_hor = std::isfinite(spec_.horizon);
  horizon_eff_ = finite_hor ? spec_.horizon : 0.0;
  for (std::int32_t id = 0; id < n; ++id) {
    const double t = rng::exponential(
        rng::word(rng::derive(birth_key_base_, static_cast<std::uint64_t>(id)), 0), 1.0);
    if (finite_hor && t > horizon_eff_) continue;
    heap_.push_back({t, 0, id});
    if (!finite_hor && t > horizon_eff_) horizon_eff_ = t;
  }
  if (!finite_hor && !snaps.empty()) horizon_eff_ = std::max(horizon_eff_, snaps.back());

  const std::size_t m = spec_.ignition.size();
  ign_key_.resize(m);
  ign_count_.assign(m, 1);
  if (!zinf && m > 0) {
    const std::uint64_t kib = rng::derive(replica_key, rng::kSaltIgnite);
    for (std::size_t j = 0; j < m; ++j) {
      ign_key_[j] = rng::derive(kib, j);
      const double t = rng::exponential(rng::word(ign_key_[j], 0), spec_.zeta);
      if (t <= horizon_eff_) heap_.push_back({t, 1, static_cast<std::int32_t>(j)});
    }
  }
  std::make_heap(heap_.begin(), heap_.end(), std::greater<Event>{});

  RunRecord rec;
  rec.domain = &d;
  rec.key = replica_key;
  rec.horizon = horizon_eff_;
  rec.ignition = spec_.ignition;
  rec.triggers_recorded = obs.record_triggers;

  std::size_t si = 0;
  std::vector<std::int32_t> esites;
  while (!heap_.empty()) {
    const Event e = heap_.front();
    while (si < snaps.size() && snaps[si] < e.t) rec.snapshots.push_back(snap(snaps[si++]));
    std::pop_heap(heap_.begin(), heap_.end(), std::greater<Event>{});
    heap_.pop_back();
    if (e.type == 0) {
      const std::size_t id = static_cast<std::size_t>(e.idx);
      state_[id] = SiteState::Occupied;
      if (birth_time_[id] == kInf) birth_time_[id] = e.t;
      if (zinf && adj_ignition_[id]) {
        // A newborn makes its cluster ignition-adjacent only through itself,
        // so the O(1) adjacency test here is exhaustive.
        const std::int32_t trig = first_ignition_[id];
        triggered_[static_cast<std::size_t>(trig)] = 1;
        if (obs.record_triggers) rec.triggers.emplace_back(e.t, trig);
        esites.clear();
        const std::int32_t sz = burn_cluster(e.idx, e.t, esites);
        if (obs.record_fires) {
          FireEvent fe;
          fe.t = e.t;
          fe.trigger_outer = trig;
          fe.size = sz;
          if (obs.record_fire_sites) fe.sites = esites;
          rec.fires.push_back(std::move(fe));
        }
      }
    } else {
      const std::int32_t j = e.idx;
      const std::int32_t outer = spec_.ignition[static_cast<std::size_t>(j)];
      triggered_[static_cast<std::size_t>(outer)] = 1;
      if (obs.record_triggers) rec.triggers.emplace_back(e.t, outer);
      const double tn =
          e.t + rng::exponential(rng::word(ign_key_[static_cast<std::size_t>(j)],
                                           ign_count_[static_cast<std::size_t>(j)]++),
                                 spec_.zeta);
      if (tn <= horizon_eff_) {
        heap_.push_back({tn, 1, j});
        std::push_heap(heap_.begin(), heap_.end(), std::greater<Event>{});
      }
      esites.clear();
      std::int32_t total = 0;
      if (spec_.mark_only) {
        ++mark_epoch_;
        for (std::int32_t id : d.outer_neighbors(outer))
          if (state_[static_cast<std::size_t>(id)] == SiteState::Occupied)
            total += mark_cluster(id, esites);
      } else {
        for (std::int32_t id : d.outer_neighbors(outer))
          if (state_[static_cast<std::size_t>(id)] == SiteState::Occupied)
            total += burn_cluster(id, e.t, esites);
      }
      if (total > 0 && obs.record_fires) {
        FireEvent fe;
        fe.t = e.t;
        fe.trigger_outer = outer;
        fe.size = total;
        if (obs.record_fire_sites) fe.sites = esites;
        rec.fires.push_back(std::move(fe));
      }
    }
  }
  while (si < snaps.size()) rec.snapshots.push_back(snap(snaps[si++]));

  if (track_id_ >= 0 && state_[static_cast<std::size_t>(track_id_)] == SiteState::Occupied) {
    ++mark_epoch_;
    bfs_.clear();
    bfs_.push_back(track_id_);
    mark_stamp_[static_cast<std::size_t>(track_id_)] = mark_epoch_;
    std::int64_t cnt = 0;
    while (!bfs_.empty()) {
      const std::int32_t id = bfs_.back();
      bfs_.pop_back();
      ++cnt;
      for (std::int32_t nb : d.neighbor_ids(id))
        if (nb >= 0 && state_[static_cast<std::size_t>(nb)] == SiteState::Occupied &&
            mark_stamp_[static_cast<std::size_t>(nb)] != mark_epoch_) {
          mark_stamp_[static_cast<std::size_t>(nb)] = mark_epoch_;
          bfs_.push_back(nb);
        }
    }
    if (cnt > tracked_max_) tracked_max_ = cnt;
  }
  rec.tracked_max_cluster = tracked_max_;
  if (obs.record_birth_times) rec.birth_time = birth_time_;
  rec.final_state = snap(horizon_eff_);
  return rec;
}

RunRecord simulate(const ProcessSpec& spec, std::uint64_t replica_key, const ObserverSpec& obs) {
  FireSim sim(spec);
  return sim.run(replica_key, obs);
}

std::vector<Fate> eventual_burn_closure(const ProcessSpec& spec,
                                        const std::vector<SiteState>& state) {
  validate_process(spec);
  if (spec.variant != Variant::NoRecovery)
    throw std::invalid_argument("closure: defined for NoRecovery only");
  const Domain& d = *spec.domain;
  if (state.size() != static_cast<std::size_t>(d.size()))
    throw std::invalid_argument("closure: state size mismatch");
  for (SiteState s : state)
    if (s == SiteState::Vacant)
      throw std::invalid_argument("closure: state has unresolved (vacant) sites");
  std::vector<Fate> fate(state.size());
  for (std::size_t id = 0; id < state.size(); ++id)
    fate[id] = state[id] == SiteState::Burnt ? Fate::AlreadyBurnt : Fate::OccupiedForever;
  std::vector<std::int32_t> stack;
  for (std::int32_t j : spec.ignition)
    for (std::int32_t id : d.outer_neighbors(j))
      if (state[static_cast<std::size_t>(id)] == SiteState::Occupied &&
          fate[static_cast<std::size_t>(id)] != Fate::EventuallyBurnt) {
        fate[static_cast<std::size_t>(id)] = Fate::EventuallyBurnt;
        stack.push_back(id);
      }
  while (!stack.empty()) {
    const std::int32_t id = stack.back();
    stack.pop_back();
    for (std::int32_t nb : d.neighbor_ids(id))
      if (nb >= 0 && state[static_cast<std::size_t>(nb)] == SiteState::Occupied &&
          fate[static_cast<std::size_t>(nb)] != Fate::EventuallyBurnt) {
        fate[static_cast<std::size_t>(nb)] = Fate::EventuallyBurnt;
        stack.push_back(nb);
      }
  }
  return fate;
}

namespace {

// Post-run fate of a single site: burnt already, or occupied with a path to
// an ignition-adjacent site (burns under recurrent triggers).
struct FateProbe {
  std::vector<std::uint8_t> adj;
  std::vector<std::int32_t> stack;
  std::vector<std::uint32_t> stamp;
  std::uint32_t epoch = 0;

  FateProbe(const Domain& d, const std::vector<std::int32_t>& ignition)
      : adj(static_cast<std::size_t>(d.size()), 0),
        stamp(static_cast<std::size_t>(d.size()), 0) {
    for (std::int32_t j : ignition)
      for (std::int32_t id : d.outer_neighbors(j)) adj[static_cast<std::size_t>(id)] = 1;
  }

  bool eventually_burnt(const Domain& d, const std::vector<SiteState>& st, std::int32_t from) {
    if (st[static_cast<std::size_t>(from)] == SiteState::Burnt) return true;
    if (st[static_cast<std::size_t>(from)] == SiteState::Vacant) return false;
    ++epoch;
    stack.clear();
    stack.push_back(from);
    stamp[static_cast<std::size_t>(from)] = epoch;
    while (!stack.empty()) {
      const std::int32_t id = stack.back();
      stack.pop_back();
      if (adj[static_cast<std::size_t>(id)]) return true;
      for (std::int32_t nb : d.neighbor_ids(id))
        if (nb >= 0 && st[static_cast<std::size_t>(nb)] == SiteState::Occupied &&
            stamp[static_cast<std::size_t>(nb)] != epoch) {
          stamp[static_cast<std::size_t>(nb)] = epoch;
          stack.push_back(nb);
        }
    }
    return false;
  }
};

int worker_count(int threads, std::uint64_t replicas) {
  return (threads <= 1 || replicas < 2048) ? 1 : std::min(threads, 64);
}

}  // namespace

Estimate origin_burn_experiment(int N, double zeta, Variant variant, std::uint64_t replicas,
                                std::uint64_t seed, std::optional<double> time_probe,
                                int threads) {
  if (N < 1) throw std::invalid_argument("origin burn: N must be >= 1");
  if (replicas == 0) throw std::invalid_argument("origin burn: replicas must be >= 1");
  const Domain d = Domain::hexagon(N);
  const std::int32_t origin = d.id_of({0, 0});
  ProcessSpec ps;
  ps.domain = &d;
  ps.variant = variant;
  ps.zeta = zeta;
  ps.ignition = default_ignition(d);
  if (time_probe) {
    if (!std::isfinite(*time_probe) || !(*time_probe > 0.0))
      throw std::invalid_argument("origin burn: probe time must be positive and finite");
    ps.horizon = *time_probe;
  } else {
    if (variant == Variant::Recovery)
      throw std::invalid_argument("origin burn: Recovery requires a probe time");
    ps.horizon = kInf;
  }
  validate_process(ps);

  const int nw = worker_count(threads, replicas);
  std::vector<FireSim> sims;
  std::vector<FateProbe> probes;
  sims.reserve(static_cast<std::size_t>(nw));
  probes.reserve(static_cast<std::size_t>(nw));
  for (int w = 0; w < nw; ++w) {
    sims.emplace_back(ps);
    probes.emplace_back(d, ps.ignition);
  }
  ObserverSpec obs;
  obs.record_fires = false;
  std::vector<std::uint8_t> hit(replicas, 0);
  parallel_replicas(replicas, nw, [&](int w, std::uint64_t r) {
    const RunRecord rec = sims[static_cast<std::size_t>(w)].run(rng::replica_key(seed, r), obs);
    const bool ok = time_probe
                        ? rec.final_state.marked[static_cast<std::size_t>(origin)] != 0
                        : probes[static_cast<std::size_t>(w)].eventually_burnt(
                              d, rec.final_state.state, origin);
    hit[r] = ok ? 1 : 0;
  });
  std::uint64_t succ = 0;
  for (std::uint8_t h : hit) succ += h;
  return make_estimate(succ, replicas, seed);
}

Estimate long_path_experiment(int n, double zeta, std::uint64_t replicas, std::uint64_t seed,
                              int threads) {
  if (n < 2) throw std::invalid_argument("long path: n must be >= 2");
  if (!std::isfinite(zeta) || !(zeta > 0.0))
    throw std::invalid_argument("long path: zeta must be finite and positive");
  if (replicas == 0) throw std::invalid_argument("long path: replicas must be >= 1");
  const Domain strip = Domain::half_plane_strip(6 * n, 2 * n);
  const Site v{0, 0};
  const CompiledEvent arm(EventSpec::one_arm_cone(v, std::numbers::pi / 2.0, 0.0,
                                                  static_cast<double>(n)),
                          strip);

  // The two below-strip neighbours of v together trigger as one rate-2*zeta
  // Poisson stream, independent of the births. The arm event is monotone in
  // time, so only the last arrival before the critical time matters; its
  // conditional law is sampled by inverting exp(-2 zeta (t_c - s)).
  const double q0 = std::exp(-2.0 * zeta * kCriticalTime);
  const int nw = worker_count(threads, replicas);
  std::vector<Workspace> wss(static_cast<std::size_t>(nw));
  for (auto& ws : wss) ws.attach(strip);
  std::vector<std::uint8_t> hit(replicas, 0);
  parallel_replicas(replicas, nw, [&](int w, std::uint64_t r) {
    const std::uint64_t rkey = rng::replica_key(seed, r);
    rng::Stream aux(rng::derive(rkey, rng::kSaltAux));
    const double u1 = aux.uniform();
    if (u1 < q0) return;  // no arrival in [0, t_c]
    const double last = kCriticalTime + std::log(q0 + aux.uniform() * (1.0 - q0)) / (2.0 * zeta);
    Workspace& ws = wss[static_cast<std::size_t>(w)];
    ws.next_replica(rkey, birth_probability(last));
    hit[r] = arm.holds(OccView{nullptr, &ws}, ws) ? 1 : 0;
  });
  std::uint64_t succ = 0;
  for (std::uint8_t h : hit) succ += h;
  return make_estimate(succ, replicas, seed);
}

Estimate fire_depth_experiment(int N, double zeta, double delta, double beta,
                               std::uint64_t replicas, std::uint64_t seed, int threads) {
  if (N < 2) throw std::invalid_argument("fire depth: N must be >= 2");
  if (!(delta > 0.0) || !(delta < 1.0 / 13.0))
    throw std::invalid_argument("fire depth: delta must lie in (0, 1/13)");
  if (!(beta > 0.75 * (1.0 - delta)))
    throw std::invalid_argument("fire depth: beta must exceed 3(1-delta)/4");
  if (!std::isfinite(zeta) || !(zeta > 0.0))
    throw std::invalid_argument("fire depth: zeta must be finite and positive");
  if (replicas == 0) throw std::invalid_argument("fire depth: replicas must be >= 1");
  const double inner = static_cast<double>(N) - std::pow(static_cast<double>(N), 1.0 - delta);
  if (inner < 1.0) throw std::invalid_argument("fire depth: N too small for this delta");
  const Domain d = Domain::hexagon(N);
  const std::int64_t rad = static_cast<std::int64_t>(std::floor(inner + 1e-9));
  std::vector<std::uint8_t> deep(static_cast<std::size_t>(d.size()), 0);
  for (std::int32_t id = 0; id < d.size(); ++id)
    deep[static_cast<std::size_t>(id)] = graph_dist(d.site(id), {0, 0}) <= rad ? 1 : 0;

  ProcessSpec ps;
  ps.domain = &d;
  ps.variant = Variant::NoRecovery;
  ps.zeta = zeta;
  ps.horizon = kCriticalTime + std::pow(static_cast<double>(N), -beta);
  ps.ignition = default_ignition(d);
  validate_process(ps);

  const int nw = worker_count(threads, replicas);
  std::vector<FireSim> sims;
  sims.reserve(static_cast<std::size_t>(nw));
  for (int w = 0; w < nw; ++w) sims.emplace_back(ps);
  ObserverSpec obs;
  obs.record_fires = false;
  std::vector<std::uint8_t> hit(replicas, 0);
  parallel_replicas(replicas, nw, [&](int w, std::uint64_t r) {
    const RunRecord rec = sims[static_cast<std::size_t>(w)].run(rng::replica_key(seed, r), obs);
    for (std::int32_t id : rec.final_state.marked_sites)
      if (deep[static_cast<std::size_t>(id)]) {
        hit[r] = 1;
        break;
      }
  });
  std::uint64_t succ = 0;
  for (std::uint8_t h : hit) succ += h;
  return make_estimate(succ, replicas, seed);
}

std::vector<std::pair<std::int64_t, Estimate>> bounded_cluster_experiment(
    const Domain& strip, Site v, double zeta, double horizon,
    const std::vector<std::int64_t>& L_grid, std::uint64_t replicas, std::uint64_t seed,
    int threads) {
  const std::int32_t vid = strip.id_of(v);
  if (vid < 0) throw std::invalid_argument("bounded cluster: site outside domain");
  if (!std::isfinite(horizon) || !(horizon > 0.0))
    throw std::invalid_argument("bounded cluster: horizon must be finite and positive");
  if (L_grid.empty()) throw std::invalid_argument("bounded cluster: empty L grid");
  for (std::int64_t L : L_grid)
    if (L < 0) throw std::invalid_argument("bounded cluster: L must be >= 0");
  if (replicas == 0) throw std::invalid_argument("bounded cluster: replicas must be >= 1");

  ProcessSpec ps;
  ps.domain = &strip;
  ps.variant = Variant::NoRecovery;
  ps.zeta = zeta;
  ps.horizon = horizon;
  ps.ignition = default_ignition(strip);
  validate_process(ps);

  const int nw = worker_count(threads, replicas);
  std::vector<FireSim> sims;
  sims.reserve(static_cast<std::size_t>(nw));
  for (int w = 0; w < nw; ++w) sims.emplace_back(ps);
  ObserverSpec obs;
  obs.record_fires = false;
  obs.track_cluster_site = vid;
  std::vector<std::int64_t> maxima(replicas, 0);
  parallel_replicas(replicas, nw, [&](int w, std::uint64_t r) {
    maxima[r] = sims[static_cast<std::size_t>(w)].run(rng::replica_key(seed, r), obs)
                    .tracked_max_cluster;
  });

  std::vector<std::pair<std::int64_t, Estimate>> out;
  out.reserve(L_grid.size());
  for (std::int64_t L : L_grid) {
    std::uint64_t succ = 0;
    for (std::int64_t mx : maxima) succ += mx <= L ? 1 : 0;
    out.emplace_back(L, make_estimate(succ, replicas, seed));
  }
  return out;
}

}  // namespace fflab
