#include "fflab/percolation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "fflab/rng.hpp"

namespace fflab {

double site_uniform(std::uint64_t replica_key, std::int32_t id) {
  return rng::u01(rng::word(rng::derive(replica_key, rng::kSaltSites),
                            static_cast<std::uint64_t>(id)));
}

Configuration sample(const Domain& d, double p, std::uint64_t replica_key) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample: p outside [0,1]");
  Configuration cfg;
  cfg.domain = &d;
  cfg.p = p;
  cfg.key = replica_key;
  cfg.occupied.resize(static_cast<std::size_t>(d.size()));
  const std::uint64_t site_key = rng::derive(replica_key, rng::kSaltSites);
  for (std::int32_t id = 0; id < d.size(); ++id)
    cfg.occupied[static_cast<std::size_t>(id)] =
        rng::u01(rng::word(site_key, static_cast<std::uint64_t>(id))) < p;
  return cfg;
}

std::string EventSpec::describe() const {
  char buf[160];
  const Site c = region.center;
  switch (kind) {
    case EventKind::HCross: return "h_cross";
    case EventKind::VCross: return "v_cross";
    case EventKind::HCrossVacant: return "h_cross_vacant";
    case EventKind::VCrossVacant: return "v_cross_vacant";
    case EventKind::OccCircuit:
      std::snprintf(buf, sizeof buf, "occ_circuit(%d,%d;%.9g,%.9g)", c.u, c.v, region.r1,
                    region.r2);
      return buf;
    case EventKind::VacCircuit:
      std::snprintf(buf, sizeof buf, "vac_circuit(%d,%d;%.9g,%.9g)", c.u, c.v, region.r1,
                    region.r2);
      return buf;
    case EventKind::OneArmCone:
      std::snprintf(buf, sizeof buf, "one_arm_cone(%d,%d;a=%.9g;%.9g,%.9g)", c.u, c.v,
                    region.alpha, region.r1, region.r2);
      return buf;
    case EventKind::OneArmBall:
      std::snprintf(buf, sizeof buf, "one_arm_ball(%d,%d;%.9g,%.9g)", c.u, c.v, region.r1,
                    region.r2);
      return buf;
    case EventKind::FourArm:
      std::snprintf(buf, sizeof buf, "four_arm(%d,%d;%.9g)", c.u, c.v, region.r2);
      return buf;
  }
  return "?";
}

namespace {

bool is_crossing(EventKind k) {
  return k == EventKind::HCross || k == EventKind::VCross || k == EventKind::HCrossVacant ||
         k == EventKind::VCrossVacant;
}

bool is_circuit(EventKind k) { return k == EventKind::OccCircuit || k == EventKind::VacCircuit; }

// CCW neighbour steps, angle 0, 60, ..., 300 degrees; the four-arm cyclic
// pattern is read in this order.
constexpr std::array<Site, 6> kCcwSteps = {{
    {1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1},
}};

}  // namespace

void validate_event(const EventSpec& spec, const Domain& d) {
  const Region& rg = spec.region;
  if (is_crossing(spec.kind)) {
    if (d.kind() != DomainKind::Rectangle && d.kind() != DomainKind::Rhombus)
      throw std::invalid_argument("crossing events need a Rectangle or Rhombus domain");
    return;
  }
  if (is_circuit(spec.kind)) {
    if (!(rg.r1 >= 1.0 && rg.r2 > rg.r1))
      throw std::invalid_argument("circuit: need 1 <= r1 < r2");
    if (!region_inside_domain(Region::ball(rg.center, rg.r2), d))
      throw std::invalid_argument("circuit: ball of radius r2 sticks out of the domain");
    return;
  }
  if (spec.kind == EventKind::OneArmCone) {
    if (!(rg.alpha > 0.0 && rg.alpha <= 1.5707963267948970))
      throw std::invalid_argument("one_arm_cone: alpha outside (0, pi/2]");
    if (!(rg.r1 >= 0.0 && rg.r2 > rg.r1 && rg.r2 > 0.0))
      throw std::invalid_argument("one_arm_cone: need 0 <= r1 < r2");
    if (rg.r1 == 0.0 && !d.contains(rg.center))
      throw std::invalid_argument("one_arm_cone: apex not in domain");
    if (!region_inside_domain(rg, d))
      throw std::invalid_argument("one_arm_cone: cone sticks out of the domain");
    return;
  }
  if (spec.kind == EventKind::OneArmBall) {
    if (!(rg.r1 >= 0.0 && rg.r2 > rg.r1 && rg.r2 > 0.0))
      throw std::invalid_argument("one_arm_ball: need 0 <= r1 < r2");
    if (rg.r1 == 0.0 && !d.contains(rg.center))
      throw std::invalid_argument("one_arm_ball: centre not in domain");
    const Region reg = rg.r1 == 0.0 ? Region::ball(rg.center, rg.r2) : rg;
    if (!region_inside_domain(reg, d))
      throw std::invalid_argument("one_arm_ball: region sticks out of the domain");
    return;
  }
  // FourArm
  if (!(rg.r2 > 1.0)) throw std::invalid_argument("four_arm: radius must exceed 1");
  if (!d.contains(rg.center)) throw std::invalid_argument("four_arm: centre not in domain");
  if (!region_inside_domain(Region::ball(rg.center, rg.r2), d))
    throw std::invalid_argument("four_arm: ball sticks out of the domain");
}

void Workspace::attach(const Domain& d) {
  if (size_ == d.size() && !visit_stamp.empty()) return;
  size_ = d.size();
  const std::size_t n = static_cast<std::size_t>(size_);
  visit_stamp.assign(n, 0);
  occ_stamp_.assign(n, 0);
  occ_val_.assign(n, 0);
  comp_of.assign(n, -1);
  visit_epoch = 0;
  occ_epoch_ = 0;
  stack.clear();
}

void Workspace::next_replica(std::uint64_t replica_key, double p) {
  site_key_ = rng::derive(replica_key, rng::kSaltSites);
  p_ = p;
  ++occ_epoch_;
}

bool Workspace::lazy_occupied(std::int32_t id) {
  const std::size_t i = static_cast<std::size_t>(id);
  if (occ_stamp_[i] != occ_epoch_) {
    occ_stamp_[i] = occ_epoch_;
    occ_val_[i] = rng::u01(rng::word(site_key_, static_cast<std::uint64_t>(id))) < p_;
  }
  return occ_val_[i] != 0;
}

CompiledEvent::CompiledEvent(const EventSpec& spec, const Domain& d) : spec_(spec), dom_(&d) {
  validate_event(spec, d);
  const std::size_t n = static_cast<std::size_t>(d.size());
  const Region& rg = spec.region;

  if (is_crossing(spec.kind)) {
    in_region_.assign(n, 1);
    target_.assign(n, 0);
    const bool horizontal =
        spec.kind == EventKind::HCross || spec.kind == EventKind::HCrossVacant;
    for (std::int32_t id = 0; id < d.size(); ++id) {
      const Site s = d.site(id);
      bool is_start = false, is_target = false;
      if (d.kind() == DomainKind::Rhombus) {
        const int m = d.param_n();
        is_start = horizontal ? s.u == 0 : s.v == 0;
        is_target = horizontal ? s.u == m - 1 : s.v == m - 1;
      } else {
        const Vec2 e = embed(s);
        if (horizontal) {
          is_start = e.x < d.box_x1() + 1.0;
          is_target = e.x > d.box_x2() - 1.0;
        } else {
          is_start = e.y < d.box_y1() + kRowSpacing;
          is_target = e.y > d.box_y2() - kRowSpacing;
        }
      }
      if (is_start) starts_.push_back(id);
      if (is_target) target_[static_cast<std::size_t>(id)] = 1;
    }
    return;
  }

  if (is_circuit(spec.kind)) {
    in_region_.assign(n, 0);
    for (std::int32_t id : region_sites(rg, d)) in_region_[static_cast<std::size_t>(id)] = 1;
    center_id_ = d.id_of(rg.center);
    if (center_id_ < 0) throw std::invalid_argument("circuit: centre not in domain");
    escape_r2sq_ = rg.r2 * rg.r2;
    return;
  }

  if (spec.kind == EventKind::OneArmCone || spec.kind == EventKind::OneArmBall) {
    const Region reg = (spec.kind == EventKind::OneArmBall && rg.r1 == 0.0)
                           ? Region::ball(rg.center, rg.r2)
                           : rg;
    in_region_.assign(n, 0);
    target_.assign(n, 0);
    const std::vector<std::int32_t> ids = region_sites(reg, d);
    const double r1sq = rg.r1 * rg.r1, r2sq = rg.r2 * rg.r2;
    for (std::int32_t id : ids) {
      in_region_[static_cast<std::size_t>(id)] = 1;
      const Site s = d.site(id);
      bool near_center = false, near_edge = false;
      for (int k = 0; k < 6; ++k) {
        const double d2 = static_cast<double>(dist2(neighbor(s, k), rg.center));
        near_center |= d2 <= r1sq;
        near_edge |= d2 >= r2sq;
      }
      if (rg.r1 > 0.0 && near_center) starts_.push_back(id);
      if (near_edge) target_[static_cast<std::size_t>(id)] = 1;
    }
    if (rg.r1 == 0.0) starts_.assign(1, d.id_of(rg.center));
    return;
  }

  // FourArm
  in_region_.assign(n, 0);
  target_.assign(n, 0);
  center_id_ = d.id_of(rg.center);
  const double r2sq = rg.r2 * rg.r2;
  for (std::int32_t id : region_sites(Region::ball(rg.center, rg.r2), d)) {
    if (id == center_id_) continue;
    in_region_[static_cast<std::size_t>(id)] = 1;
    const Site s = d.site(id);
    for (int k = 0; k < 6; ++k) {
      if (static_cast<double>(dist2(neighbor(s, k), rg.center)) >= r2sq) {
        target_[static_cast<std::size_t>(id)] = 1;
        break;
      }
    }
  }
  for (int i = 0; i < 6; ++i) {
    const Site w{rg.center.u + kCcwSteps[static_cast<std::size_t>(i)].u,
                 rg.center.v + kCcwSteps[static_cast<std::size_t>(i)].v};
    arm_nbr_[static_cast<std::size_t>(i)] = d.id_of(w);
  }
}

bool CompiledEvent::holds(OccView occ, Workspace& ws) const {
  ws.attach(*dom_);
  switch (spec_.kind) {
    case EventKind::HCross:
    case EventKind::VCross:
      return search(true, occ, ws);
    case EventKind::HCrossVacant:
    case EventKind::VCrossVacant:
      return search(false, occ, ws);
    case EventKind::OccCircuit:
      return circuit(true, occ, ws);
    case EventKind::VacCircuit:
      return circuit(false, occ, ws);
    case EventKind::OneArmCone:
    case EventKind::OneArmBall:
      return search(true, occ, ws);
    case EventKind::FourArm:
      return four_arm(occ, ws);
  }
  return false;
}

// Depth-first search for a `color` path from the start set to a target
// site, restricted to the event's region. Order of exploration does not
// affect the outcome, only which sites get sampled along the way.
bool CompiledEvent::search(bool color, OccView occ, Workspace& ws) const {
  const std::uint32_t epoch = ++ws.visit_epoch;
  auto& stamp = ws.visit_stamp;
  auto& stack = ws.stack;
  stack.clear();
  for (std::int32_t s : starts_) {
    const std::size_t si = static_cast<std::size_t>(s);
    if (stamp[si] == epoch) continue;
    stamp[si] = epoch;
    if (occ(s) != color) continue;
    if (target_[si]) return true;
    stack.push_back(s);
  }
  while (!stack.empty()) {
    const std::int32_t id = stack.back();
    stack.pop_back();
    for (std::int32_t nid : dom_->neighbor_ids(id)) {
      if (nid < 0) continue;
      const std::size_t ni = static_cast<std::size_t>(nid);
      if (!in_region_[ni] || stamp[ni] == epoch) continue;
      stamp[ni] = epoch;
      if (occ(nid) != color) continue;
      if (target_[ni]) return true;
      stack.push_back(nid);
    }
  }
  return false;
}

// A circuit of `color` sites inside the annulus surrounds the hole iff the
// hole cannot reach the outside through non-`color`-or-non-annulus sites
// (the lattice is a triangulation, so blocking sets are circuits).
bool CompiledEvent::circuit(bool color, OccView occ, Workspace& ws) const {
  const std::uint32_t epoch = ++ws.visit_epoch;
  auto& stamp = ws.visit_stamp;
  auto& stack = ws.stack;
  stack.clear();
  stamp[static_cast<std::size_t>(center_id_)] = epoch;
  stack.push_back(center_id_);
  const Site c = spec_.region.center;
  while (!stack.empty()) {
    const std::int32_t id = stack.back();
    stack.pop_back();
    const Site s = dom_->site(id);
    const auto& nbrs = dom_->neighbor_ids(id);
    for (int k = 0; k < 6; ++k) {
      const Site w = neighbor(s, k);
      if (static_cast<double>(dist2(w, c)) >= escape_r2sq_) return false;  // escaped
      const std::int32_t nid = nbrs[static_cast<std::size_t>(k)];
      const std::size_t ni = static_cast<std::size_t>(nid);
      if (stamp[ni] == epoch) continue;
      stamp[ni] = epoch;
      if (in_region_[ni] && occ(nid) == color) continue;  // blocked
      stack.push_back(nid);
    }
  }
  return true;
}

bool CompiledEvent::four_arm(OccView occ, Workspace& ws) const {
  const std::uint32_t epoch = ++ws.visit_epoch;
  auto& stamp = ws.visit_stamp;
  auto& stack = ws.stack;
  bool arm_occ[6] = {}, arm_vac[6] = {};
  bool comp_reach[6] = {};
  std::int8_t ncomp = 0;
  for (int i = 0; i < 6; ++i) {
    const std::int32_t nid = arm_nbr_[static_cast<std::size_t>(i)];
    const std::size_t ni = static_cast<std::size_t>(nid);
    const bool col = occ(nid);
    bool reached;
    if (stamp[ni] == epoch) {
      reached = comp_reach[ws.comp_of[ni]];
    } else {
      // flood the colour component of this neighbour inside the punctured ball
      const std::int8_t comp = ncomp++;
      reached = target_[ni] != 0;
      stamp[ni] = epoch;
      ws.comp_of[ni] = comp;
      stack.clear();
      stack.push_back(nid);
      while (!stack.empty()) {
        const std::int32_t id = stack.back();
        stack.pop_back();
        for (std::int32_t mid : dom_->neighbor_ids(id)) {
          if (mid < 0) continue;
          const std::size_t mi = static_cast<std::size_t>(mid);
          if (!in_region_[mi] || stamp[mi] == epoch) continue;
          if (occ(mid) != col) continue;
          stamp[mi] = epoch;
          ws.comp_of[mi] = comp;
          reached |= target_[mi] != 0;
          stack.push_back(mid);
        }
      }
      comp_reach[comp] = reached;
    }
    (col ? arm_occ : arm_vac)[i] = reached;
  }
  for (int a = 0; a < 6; ++a)
    for (int b = a + 1; b < 6; ++b)
      for (int c = b + 1; c < 6; ++c)
        for (int e = c + 1; e < 6; ++e) {
          if (arm_occ[a] && arm_vac[b] && arm_occ[c] && arm_vac[e]) return true;
          if (arm_vac[a] && arm_occ[b] && arm_vac[c] && arm_occ[e]) return true;
        }
  return false;
}

bool evaluate_event(const EventSpec& spec, const Configuration& cfg) {
  if (cfg.domain == nullptr) throw std::invalid_argument("evaluate_event: null domain");
  CompiledEvent ev(spec, *cfg.domain);
  Workspace ws;
  ws.attach(*cfg.domain);
  return ev.holds(OccView{cfg.occupied.data(), nullptr}, ws);
}

namespace {

using rng::replica_key;

// Successes over the replica range [from, to); deterministic for any
// thread count because only integer counts are merged.
std::uint64_t run_range(const CompiledEvent& ev, double p, std::uint64_t seed,
                        std::uint64_t from, std::uint64_t to, int threads) {
  const auto body = [&](std::uint64_t lo, std::uint64_t hi) {
    Workspace ws;
    ws.attach(ev.domain());
    std::uint64_t cnt = 0;
    for (std::uint64_t r = lo; r < hi; ++r) {
      ws.next_replica(replica_key(seed, r), p);
      cnt += ev.holds(OccView{nullptr, &ws}, ws) ? 1 : 0;
    }
    return cnt;
  };
  if (threads <= 1 || to - from < 2048) return body(from, to);

  std::atomic<std::uint64_t> next{from};
  std::atomic<std::uint64_t> total{0};
  constexpr std::uint64_t kBlock = 1024;
  std::vector<std::thread> pool;
  const int nt = std::min<int>(threads, 64);
  pool.reserve(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      Workspace ws;
      ws.attach(ev.domain());
      std::uint64_t cnt = 0;
      for (;;) {
        const std::uint64_t lo = next.fetch_add(kBlock);
        if (lo >= to) break;
        const std::uint64_t hi = std::min(to, lo + kBlock);
        for (std::uint64_t r = lo; r < hi; ++r) {
          ws.next_replica(replica_key(seed, r), p);
          cnt += ev.holds(OccView{nullptr, &ws}, ws) ? 1 : 0;
        }
      }
      total.fetch_add(cnt);
    });
  }
  for (auto& th : pool) th.join();
  return total.load();
}

}  // namespace

Estimate estimate_event(const EventSpec& spec, const Domain& d, double p,
                        std::uint64_t replicas, std::uint64_t seed, int threads) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("estimate_event: p outside [0,1]");
  if (replicas == 0) throw std::invalid_argument("estimate_event: replicas must be >= 1");
  CompiledEvent ev(spec, d);
  const std::uint64_t succ = run_range(ev, p, seed, 0, replicas, threads);
  return make_estimate(succ, replicas, seed);
}

LengthResult characteristic_length(double p, std::uint64_t replicas, int cap,
                                   std::uint64_t seed, int threads) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("characteristic_length: p outside (0,1)");
  if (p > 0.5) p = 1.0 - p;  // symmetry of crossings under occupied<->vacant
  if (cap < 1) throw std::invalid_argument("characteristic_length: cap must be >= 1");
  if (replicas < 100) throw std::invalid_argument("characteristic_length: too few replicas");

  LengthResult res;
  if (p == 0.5) {  // L(1/2) is infinite by definition
    res.above_cap = true;
    res.L = cap;
    return res;
  }
  const std::uint64_t base = rng::derive(seed, rng::kSaltDecision);

  // One accept/reject decision at scale n. Chunked so that clearly
  // super-threshold scales fail fast; the chunk sequence is fixed, which
  // keeps early exits deterministic.
  auto decide = [&](int n) -> bool {
    const Domain dom = Domain::rectangle(0.0, 2.0 * n, 0.0, n);
    const EventSpec ev = EventSpec::v_cross();
    CompiledEvent compiled(ev, dom);
    const std::uint64_t key = rng::derive(base, static_cast<std::uint64_t>(n));
    constexpr std::uint64_t kChunk = 4096;
    std::uint64_t done = 0, succ = 0;
    while (done < replicas) {
      const std::uint64_t hi = std::min(replicas, done + kChunk);
      succ += run_range(compiled, p, key, done, hi, threads);
      done = hi;
      const auto [lo_b, hi_b] = binomial_ci(succ, done, 0.95);
      if (lo_b > kLengthThreshold) {  // hopeless: crossing clearly too likely
        res.decisions.push_back({n, make_estimate(succ, done, key), false});
        return false;
      }
    }
    const auto [lo_b, hi_b] = binomial_ci(succ, replicas, 0.95);
    const bool pass = hi_b <= kLengthThreshold;
    res.decisions.push_back({n, make_estimate(succ, replicas, key), pass});
    return pass;
  };

  int lo = 0, hi = -1;
  for (int n = 1;; n = std::max(n + 1, static_cast<int>(std::ceil(1.25 * n)))) {
    if (n > cap) {
      res.above_cap = true;
      res.L = cap;
      return res;
    }
    if (decide(n)) {
      hi = n;
      break;
    }
    lo = n;
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (decide(mid)) hi = mid;
    else lo = mid;
  }
  res.L = hi;
  return res;
}

double near_critical_parameter(double lambda, int n, std::uint64_t replicas,
                               std::uint64_t seed, int threads) {
  if (n < 2) throw std::invalid_argument("near_critical_parameter: n must be >= 2");
  const Domain dom = arm_domain_full_plane(n);
  const Estimate pi4 = estimate_event(EventSpec::four_arm({0, 0}, n), dom, 0.5, replicas,
                                      rng::derive(seed, rng::fnv1a("pi4")), threads);
  if (pi4.p_hat <= 0.0)
    throw std::invalid_argument("near_critical_parameter: four-arm estimate vanished");
  const double p = 0.5 + lambda / (static_cast<double>(n) * n * pi4.p_hat);
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("near_critical_parameter: lambda too large for this n");
  return p;
}

Estimate theta_proxy(double p, double n, std::uint64_t replicas, std::uint64_t seed,
                     int threads) {
  if (!(p > 0.5)) throw std::invalid_argument("theta_proxy: requires p > 1/2");
  const Domain dom = arm_domain_full_plane(n);
  return estimate_event(EventSpec::one_arm_ball({0, 0}, 0.0, n), dom, p, replicas, seed,
                        threads);
}

Domain arm_domain_full_plane(double n) {
  const int N = static_cast<int>(std::ceil(n * 2.0 / kSqrt3)) + 2;
  return Domain::hexagon(N);
}

Domain arm_domain_cone(double alpha, double n) {
  (void)alpha;  // every cone with alpha <= pi/2 fits in the half-plane box
  const int w = 2 * (static_cast<int>(std::ceil(n)) + 2);
  const int h = static_cast<int>(std::ceil(n * 2.0 / kSqrt3)) + 2;
  return Domain::half_plane_strip(w, h);
}

Site cone_apex() { return {0, 0}; }

ArmTable::ArmTable(std::uint64_t seed, std::uint64_t replicas, int threads)
    : seed_(seed), replicas_(replicas), threads_(threads) {}

Estimate ArmTable::arm(double alpha, double n) {
  const std::pair<long long, long long> key{std::llround(alpha * 1e6), std::llround(n * 1e6)};
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const std::uint64_t s =
      rng::derive(rng::derive(seed_, static_cast<std::uint64_t>(key.first) + 0x517cc1b7u),
                  static_cast<std::uint64_t>(key.second));
  Estimate est;
  if (alpha == 0.0) {
    const Domain dom = arm_domain_full_plane(n);
    est = estimate_event(EventSpec::one_arm_ball({0, 0}, 0.0, n), dom, 0.5, replicas_, s,
                         threads_);
  } else {
    const Domain dom = arm_domain_cone(alpha, n);
    est = estimate_event(EventSpec::one_arm_cone(cone_apex(), alpha, 0.0, n), dom, 0.5,
                         replicas_, s, threads_);
  }
  std::lock_guard<std::mutex> lock(mu_);
  cache_.emplace(key, est);
  return est;
}

}  // namespace fflab
