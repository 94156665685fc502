// Exact continuous-time analysis of the process on tiny domains, used as an
// oracle against the event-driven simulator.
//
// NoRecovery states live in {vacant, occupied, burnt}^k encoded base 3;
// burning is absorbing site-wise, so the total of 2#burnt + #occupied rises
// with every jump and the eventual-burn recursion runs over a DAG. Recovery
// states are occupancy bitmasks (burnt is just vacant there) extended with a
// flag recording whether the query site has ever burnt. Time-bounded
// questions go through uniformization; zeta = infinity contracts the
// instant burns into the birth transitions.

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fflab/forestfire.hpp"
#include "fflab/lattice.hpp"

namespace fflab {

namespace {

struct SmallChain {
  int k = 0;
  double zeta = 0.0;
  bool zinf = false;
  std::uint32_t full = 0;
  std::vector<std::uint32_t> nbr;       // per site: in-domain neighbour mask
  std::vector<std::uint32_t> ign_mask;  // per ignition vertex: adjacent sites

  SmallChain(const ProcessSpec& spec) {
    const Domain& d = *spec.domain;
    k = d.size();
    zeta = spec.zeta;
    zinf = !std::isfinite(spec.zeta);
    full = k >= 32 ? 0 : (1u << k) - 1u;
    nbr.assign(static_cast<std::size_t>(k), 0);
    for (std::int32_t id = 0; id < k; ++id)
      for (std::int32_t nb : d.neighbor_ids(id))
        if (nb >= 0) nbr[static_cast<std::size_t>(id)] |= 1u << nb;
    ign_mask.reserve(spec.ignition.size());
    for (std::int32_t j : spec.ignition) {
      std::uint32_t m = 0;
      for (std::int32_t id : d.outer_neighbors(j)) m |= 1u << id;
      ign_mask.push_back(m);
    }
  }

  std::uint32_t cluster_from(std::uint32_t occ, int start) const {
    std::uint32_t comp = 1u << start;
    std::uint32_t frontier = comp;
    while (frontier != 0) {
      std::uint32_t next = 0;
      std::uint32_t f = frontier;
      while (f != 0) {
        const int b = std::countr_zero(f);
        f &= f - 1;
        next |= nbr[static_cast<std::size_t>(b)] & occ;
      }
      next &= ~comp;
      comp |= next;
      frontier = next;
    }
    return comp;
  }

  // Union of occupied clusters adjacent to ignition vertex j.
  std::uint32_t ignited_by(std::uint32_t occ, std::size_t j) const {
    std::uint32_t u = 0;
    std::uint32_t seeds = ign_mask[j] & occ;
    while (seeds != 0) {
      const int b = std::countr_zero(seeds);
      u |= cluster_from(occ, b);
      seeds &= ~u;
    }
    return u;
  }

  // Union of occupied clusters adjacent to any ignition vertex.
  std::uint32_t ignited_union(std::uint32_t occ) const {
    std::uint32_t u = 0;
    for (std::size_t j = 0; j < ign_mask.size(); ++j) {
      std::uint32_t seeds = ign_mask[j] & occ & ~u;
      while (seeds != 0) {
        const int b = std::countr_zero(seeds);
        u |= cluster_from(occ, b);
        seeds &= ~u;
      }
    }
    return u;
  }
};

// ---- NoRecovery, base-3 encoding ----

struct TriCode {
  std::vector<std::int64_t> pow3;
  explicit TriCode(int k) : pow3(static_cast<std::size_t>(k) + 1, 1) {
    for (std::size_t i = 1; i < pow3.size(); ++i) pow3[i] = pow3[i - 1] * 3;
  }
  std::int64_t size() const { return pow3.back(); }
  void decode(std::int64_t s, std::uint32_t& occ, std::uint32_t& burnt) const {
    occ = 0;
    burnt = 0;
    for (std::size_t i = 0; i + 1 < pow3.size(); ++i) {
      const int dg = static_cast<int>((s / pow3[i]) % 3);
      if (dg == 1) occ |= 1u << i;
      if (dg == 2) burnt |= 1u << i;
    }
  }
  std::int64_t encode(std::uint32_t occ, std::uint32_t burnt) const {
    std::int64_t s = 0;
    for (std::size_t i = 0; i + 1 < pow3.size(); ++i) {
      if (occ & (1u << i)) s += pow3[i];
      if (burnt & (1u << i)) s += 2 * pow3[i];
    }
    return s;
  }
};

struct NoRecEventual {
  const SmallChain& cx;
  TriCode code;
  std::vector<double> memo;
  std::vector<std::uint8_t> done;
  int site;

  NoRecEventual(const SmallChain& c, int q)
      : cx(c), code(c.k), memo(static_cast<std::size_t>(code.size()), 0.0),
        done(static_cast<std::size_t>(code.size()), 0), site(q) {}

  double prob(std::int64_t s) {
    if (done[static_cast<std::size_t>(s)]) return memo[static_cast<std::size_t>(s)];
    std::uint32_t occ, burnt;
    code.decode(s, occ, burnt);
    const std::uint32_t vac = cx.full & ~(occ | burnt);
    const int nv = std::popcount(vac);
    double val = 0.0;
    if (cx.zinf) {
      if (nv == 0) {
        val = (burnt >> site) & 1u;
      } else {
        for (std::uint32_t f = vac; f != 0; f &= f - 1) {
          const int i = std::countr_zero(f);
          const std::uint32_t occ2 = occ | (1u << i);
          const std::uint32_t u = cx.ignited_union(occ2);
          val += prob(code.encode(occ2 & ~u, burnt | u));
        }
        val /= nv;
      }
    } else {
      std::vector<std::size_t> active;
      for (std::size_t j = 0; j < cx.ign_mask.size(); ++j)
        if ((cx.ign_mask[j] & occ) != 0) active.push_back(j);
      if (nv == 0 && active.empty()) {
        val = (burnt >> site) & 1u;
      } else {
        const double rate = nv + cx.zeta * static_cast<double>(active.size());
        for (std::uint32_t f = vac; f != 0; f &= f - 1) {
          const int i = std::countr_zero(f);
          val += prob(code.encode(occ | (1u << i), burnt)) / rate;
        }
        for (std::size_t j : active) {
          const std::uint32_t u = cx.ignited_by(occ, j);
          val += cx.zeta * prob(code.encode(occ & ~u, burnt | u)) / rate;
        }
      }
    }
    memo[static_cast<std::size_t>(s)] = val;
    done[static_cast<std::size_t>(s)] = 1;
    return val;
  }
};

// ---- uniformization ----

// One uniformized jump step: y = x P. `enumerate` pushes (s', rate) pairs
// for state s into the provided sink.
template <class Enum>
void uniform_step(const std::vector<double>& x, std::vector<double>& y, double lambda,
                  Enum&& enumerate) {
  y.assign(x.size(), 0.0);
  for (std::size_t s = 0; s < x.size(); ++s) {
    const double w = x[s];
    if (w == 0.0) continue;
    double total = 0.0;
    enumerate(static_cast<std::int64_t>(s), [&](std::int64_t s2, double rate) {
      y[static_cast<std::size_t>(s2)] += w * rate / lambda;
      total += rate;
    });
    y[s] += w * (1.0 - total / lambda);
  }
}

// P(mass(X_t)) for X uniformized with rate lambda from x0; mass() reads the
// query set. Truncation keeps the Poisson tail below 1e-12.
template <class Enum, class Mass>
double transient_mass(std::vector<double> x, double lambda, double t, Enum&& enumerate,
                      Mass&& mass) {
  const double lt = lambda * t;
  const std::int64_t cap =
      static_cast<std::int64_t>(std::ceil(lt + 12.0 * std::sqrt(lt + 1.0) + 30.0));
  std::vector<double> y;
  double w = std::exp(-lt);
  double ans = 0.0;
  for (std::int64_t j = 0;; ++j) {
    ans += w * mass(x);
    if (j >= cap) break;
    w *= lt / static_cast<double>(j + 1);
    uniform_step(x, y, lambda, enumerate);
    x.swap(y);
  }
  return ans;
}

double norec_burnt_before(const SmallChain& cx, int site, double t) {
  TriCode code(cx.k);
  const double lambda =
      cx.zinf ? static_cast<double>(cx.k)
              : static_cast<double>(cx.k) + cx.zeta * static_cast<double>(cx.ign_mask.size());
  std::vector<double> x(static_cast<std::size_t>(code.size()), 0.0);
  x[0] = 1.0;  // all vacant
  auto enumerate = [&](std::int64_t s, auto&& sink) {
    std::uint32_t occ, burnt;
    code.decode(s, occ, burnt);
    const std::uint32_t vac = cx.full & ~(occ | burnt);
    if (cx.zinf) {
      for (std::uint32_t f = vac; f != 0; f &= f - 1) {
        const int i = std::countr_zero(f);
        const std::uint32_t occ2 = occ | (1u << i);
        const std::uint32_t u = cx.ignited_union(occ2);
        sink(code.encode(occ2 & ~u, burnt | u), 1.0);
      }
    } else {
      for (std::uint32_t f = vac; f != 0; f &= f - 1) {
        const int i = std::countr_zero(f);
        sink(code.encode(occ | (1u << i), burnt), 1.0);
      }
      for (std::size_t j = 0; j < cx.ign_mask.size(); ++j) {
        if ((cx.ign_mask[j] & occ) == 0) continue;
        const std::uint32_t u = cx.ignited_by(occ, j);
        sink(code.encode(occ & ~u, burnt | u), cx.zeta);
      }
    }
  };
  auto mass = [&](const std::vector<double>& v) {
    double m = 0.0;
    std::uint32_t occ, burnt;
    for (std::size_t s = 0; s < v.size(); ++s) {
      if (v[s] == 0.0) continue;
      code.decode(static_cast<std::int64_t>(s), occ, burnt);
      if ((burnt >> site) & 1u) m += v[s];
    }
    return m;
  };
  return transient_mass(std::move(x), lambda, t, enumerate, mass);
}

double recovery_burnt_before(const SmallChain& cx, int site, double t) {
  // State: occupancy mask plus a flag marking the query site as ever burnt.
  const std::size_t n = std::size_t{1} << (cx.k + 1);
  const std::uint32_t flag_bit = 1u << cx.k;
  const double lambda =
      cx.zinf ? static_cast<double>(cx.k)
              : static_cast<double>(cx.k) + cx.zeta * static_cast<double>(cx.ign_mask.size());
  std::vector<double> x(n, 0.0);
  x[0] = 1.0;
  auto enumerate = [&](std::int64_t s, auto&& sink) {
    const std::uint32_t mask = static_cast<std::uint32_t>(s) & cx.full;
    const std::uint32_t flag = static_cast<std::uint32_t>(s) & flag_bit;
    const std::uint32_t vac = cx.full & ~mask;
    if (cx.zinf) {
      for (std::uint32_t f = vac; f != 0; f &= f - 1) {
        const int i = std::countr_zero(f);
        const std::uint32_t occ2 = mask | (1u << i);
        const std::uint32_t u = cx.ignited_union(occ2);
        const std::uint32_t fl = flag | (((u >> site) & 1u) ? flag_bit : 0u);
        sink(static_cast<std::int64_t>((occ2 & ~u) | fl), 1.0);
      }
    } else {
      for (std::uint32_t f = vac; f != 0; f &= f - 1) {
        const int i = std::countr_zero(f);
        sink(static_cast<std::int64_t>((mask | (1u << i)) | flag), 1.0);
      }
      for (std::size_t j = 0; j < cx.ign_mask.size(); ++j) {
        if ((cx.ign_mask[j] & mask) == 0) continue;
        const std::uint32_t u = cx.ignited_by(mask, j);
        const std::uint32_t fl = flag | (((u >> site) & 1u) ? flag_bit : 0u);
        sink(static_cast<std::int64_t>((mask & ~u) | fl), cx.zeta);
      }
    }
  };
  auto mass = [&](const std::vector<double>& v) {
    double m = 0.0;
    for (std::size_t s = flag_bit; s < v.size(); ++s) m += v[s];
    return m;
  };
  return transient_mass(std::move(x), lambda, t, enumerate, mass);
}

}  // namespace

double exact_small_ctmc(const ProcessSpec& spec, const CtmcQuery& query) {
  validate_process(spec);
  if (spec.mark_only)
    throw std::invalid_argument("exact chain: mark_only dynamics not supported");
  const Domain& d = *spec.domain;
  const std::int32_t q = d.id_of(query.site);
  if (q < 0) throw std::invalid_argument("exact chain: query site outside domain");
  SmallChain cx(spec);

  if (query.kind == CtmcQuery::Kind::EventuallyBurnt) {
    if (spec.variant != Variant::NoRecovery)
      throw std::invalid_argument("exact chain: eventual burning needs NoRecovery");
    if (cx.k > 8) throw std::invalid_argument("exact chain: domain exceeds 8 sites");
    NoRecEventual rec(cx, q);
    return rec.prob(0);
  }

  if (!(query.t >= 0.0) || !std::isfinite(query.t))
    throw std::invalid_argument("exact chain: probe time must be finite and nonnegative");
  if (std::isfinite(spec.horizon) && query.t > spec.horizon)
    throw std::invalid_argument("exact chain: probe time beyond horizon");
  if (spec.variant == Variant::NoRecovery) {
    if (cx.k > 8) throw std::invalid_argument("exact chain: domain exceeds 8 sites");
    return norec_burnt_before(cx, q, query.t);
  }
  if (cx.k > 6)
    throw std::invalid_argument("exact chain: Recovery domain exceeds 6 sites");
  return recovery_burnt_before(cx, q, query.t);
}

}  // namespace fflab
