#include "fflab/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fflab/conesites.hpp"
#include "fflab/forestfire.hpp"
#include "fflab/lattice.hpp"
#include "fflab/percolation.hpp"
#include "fflab/render.hpp"
#include "fflab/rng.hpp"
#include "fflab/stats.hpp"

namespace fflab {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kPi = 3.141592653589793;

// Shortest round-trip decimal form: deterministic, locale-free.
std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string text() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& fields) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
      }
      out += "\r\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

void write_file(const std::string& path, const std::string& content) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw std::runtime_error("cannot write '" + path + "'");
  const std::size_t n = std::fwrite(content.data(), 1, content.size(), f);
  std::fclose(f);
  if (n != content.size()) throw std::runtime_error("short write: " + path);
}

ordered_json est_json(const Estimate& e) {
  return ordered_json{{"p_hat", e.p_hat},   {"successes", e.successes},
                      {"replicas", e.replicas}, {"ci_low", e.ci_low},
                      {"ci_high", e.ci_high},   {"seed", e.seed}};
}

bool intervals_overlap(const Estimate& a, const Estimate& b) {
  return a.ci_low <= b.ci_high && b.ci_low <= a.ci_high;
}

struct Ctx {
  const ExperimentConfig* cfg = nullptr;
  std::uint64_t seed = 0;
  std::string hash;
  int threads = 1;
  std::string prefix;

  Csv csv;
  ordered_json resolved = ordered_json::object();
  ordered_json extra = ordered_json::object();
  ordered_json fits = ordered_json::array();
  ordered_json verdicts = ordered_json::array();
  std::string svg_path;
  bool all_pass = true;

  void verdict(const std::string& id, bool pass, const std::string& detail) {
    verdicts.push_back(ordered_json{{"id", id}, {"pass", pass}, {"detail", detail}});
    all_pass = all_pass && pass;
  }

  void add_fit(const std::string& id, const PowerLawFit& f, double target, double tolerance,
               bool pass, const std::string& criterion) {
    ordered_json j{{"id", id},
                   {"exponent", f.exponent},
                   {"stderr", f.stderr_exponent},
                   {"intercept", f.intercept},
                   {"r_squared", f.r_squared},
                   {"points_used", f.points.size()},
                   {"dropped", f.dropped},
                   {"target", target}};
    if (std::isfinite(tolerance)) j["tolerance"] = tolerance;
    j["criterion"] = criterion;
    j["pass"] = pass;
    fits.push_back(std::move(j));
    all_pass = all_pass && pass;
  }

  // estimate rows, spec'd column layout
  void p_row(double p, double n, const Estimate& e) {
    csv.rows.push_back({cfg->experiment, hash, fmt(p), fmt(n), std::to_string(e.replicas),
                        fmt(e.p_hat), fmt(e.ci_low), fmt(e.ci_high), std::to_string(e.seed)});
  }
  void z_row(double zeta, double n, const Estimate& e) {
    csv.rows.push_back({cfg->experiment, hash, fmt(zeta), fmt(n), std::to_string(e.replicas),
                        fmt(e.p_hat), fmt(e.ci_low), fmt(e.ci_high), std::to_string(e.seed)});
  }
};

const std::vector<std::string> kPHeader = {"experiment", "spec_hash", "p",      "n",
                                           "replicas",   "p_hat",     "ci_low", "ci_high",
                                           "seed"};
const std::vector<std::string> kZetaHeader = {"experiment", "spec_hash", "zeta",   "n",
                                              "replicas",   "p_hat",     "ci_low", "ci_high",
                                              "seed"};

double parse_alpha_value(const std::string& s) {
  if (s == "pi") return kPi;
  if (s.rfind("pi/", 0) == 0) {
    const double d = parse_real(s.substr(3), 0, "alpha divisor");
    if (!(d > 0.0)) throw ConfigError(0, "alpha: divisor must be positive");
    return kPi / d;
  }
  return parse_real(s, 0, "alpha");
}

Variant parse_variant(const std::string& s) {
  if (s == "no-recovery") return Variant::NoRecovery;
  if (s == "recovery") return Variant::Recovery;
  throw ConfigError(0, "variant: expected no-recovery or recovery, got '" + s + "'");
}

std::optional<PowerLawFit> try_fit(Ctx& ctx, const std::string& id,
                                   const std::vector<FitPoint>& points) {
  try {
    return fit_power_law(points);
  } catch (const std::invalid_argument& e) {
    ctx.verdict(id, false, std::string("fit unavailable: ") + e.what());
    return std::nullopt;
  }
}

// ---- perc-event ----

void run_perc_event(Ctx& ctx) {
  ParamReader pr(*ctx.cfg, {"domain", "n", "N", "width", "height", "x1", "x2", "y1", "y2",
                            "event", "alpha", "r1", "r2", "center-u", "center-v", "p",
                            "p-grid", "replicas"});
  const std::string dk = pr.str_or("domain", "rhombus");
  Domain d = [&]() {
    if (dk == "rhombus") return Domain::rhombus(static_cast<int>(pr.integer_or("n", 16)));
    if (dk == "hexagon") return Domain::hexagon(static_cast<int>(pr.integer_or("N", 8)));
    if (dk == "strip")
      return Domain::half_plane_strip(static_cast<int>(pr.integer_or("width", 16)),
                                      static_cast<int>(pr.integer_or("height", 8)));
    if (dk == "rectangle")
      return Domain::rectangle(pr.real("x1"), pr.real("x2"), pr.real("y1"), pr.real("y2"));
    throw ConfigError(0, "domain: expected rhombus, hexagon, strip or rectangle");
  }();
  const double scale = [&]() -> double {
    switch (d.kind()) {
      case DomainKind::Rhombus:
      case DomainKind::Hexagon:
        return d.param_n();
      case DomainKind::HalfPlaneStrip:
        return d.param_width();
      case DomainKind::Rectangle:
        return d.box_x2() - d.box_x1();
    }
    return 0.0;
  }();

  const std::string ev = pr.str_or("event", "h-cross");
  const Site c{static_cast<std::int32_t>(pr.integer_or("center-u", 0)),
               static_cast<std::int32_t>(pr.integer_or("center-v", 0))};
  const double r1 = pr.real_or("r1", 0.0);
  EventSpec spec = [&]() {
    if (ev == "h-cross") return EventSpec::h_cross();
    if (ev == "v-cross") return EventSpec::v_cross();
    if (ev == "h-cross-vacant") return EventSpec::h_cross_vacant();
    if (ev == "v-cross-vacant") return EventSpec::v_cross_vacant();
    if (ev == "occ-circuit") return EventSpec::occ_circuit(c, r1, pr.real("r2"));
    if (ev == "vac-circuit") return EventSpec::vac_circuit(c, r1, pr.real("r2"));
    if (ev == "one-arm-cone")
      return EventSpec::one_arm_cone(c, parse_alpha_value(pr.str("alpha")), r1, pr.real("r2"));
    if (ev == "one-arm-ball") return EventSpec::one_arm_ball(c, r1, pr.real("r2"));
    if (ev == "four-arm") return EventSpec::four_arm(c, pr.real("r2"));
    throw ConfigError(0, "event: unknown kind '" + ev + "'");
  }();

  const std::vector<double> p_grid = pr.real_list_or("p-grid", {pr.real_or("p", 0.5)});
  const auto replicas = static_cast<std::uint64_t>(pr.integer_or("replicas", 100000));

  ctx.resolved["domain"] = d.name();
  ctx.resolved["event"] = spec.describe();
  ctx.resolved["p_grid"] = p_grid;
  ctx.resolved["replicas"] = replicas;

  ctx.csv.header = kPHeader;
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    const Estimate e = estimate_event(spec, d, p_grid[i], replicas,
                                      rng::derive(ctx.seed, i), ctx.threads);
    ctx.p_row(p_grid[i], scale, e);
  }
}

// ---- char-length ----

void run_char_length(Ctx& ctx) {
  ParamReader pr(*ctx.cfg, {"p-grid", "replicas", "cap", "tolerance", "target"});
  const std::vector<double> p_grid = pr.real_list("p-grid");
  const auto replicas = static_cast<std::uint64_t>(pr.integer_or("replicas", 30000));
  const int cap = static_cast<int>(pr.integer_or("cap", 4096));
  const double tol = pr.real_or("tolerance", 0.25);
  const double target = pr.real_or("target", -4.0 / 3.0);

  ctx.resolved["p_grid"] = p_grid;
  ctx.resolved["replicas"] = replicas;
  ctx.resolved["cap"] = cap;
  ctx.resolved["target"] = target;
  ctx.resolved["tolerance"] = tol;

  ctx.csv.header = kPHeader;
  ordered_json lengths = ordered_json::array();
  std::vector<FitPoint> pts;
  bool capped = false;
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    const double p = p_grid[i];
    const LengthResult lr =
        characteristic_length(p, replicas, cap, rng::derive(ctx.seed, i), ctx.threads);
    for (const LengthDecision& dec : lr.decisions)
      ctx.p_row(p, dec.n, dec.est);
    lengths.push_back(ordered_json{{"p", p}, {"L", lr.L}, {"above_cap", lr.above_cap}});
    if (lr.above_cap) {
      capped = true;
      continue;
    }
    const double L = lr.L;
    pts.push_back({std::abs(p - 0.5), L, L, L});
  }
  ctx.extra["lengths"] = std::move(lengths);
  if (capped) ctx.verdict("char-length-cap", false, "length cap reached for some p");
  if (auto fit = try_fit(ctx, "char-length-slope", pts)) {
    const bool pass = std::abs(fit->exponent - target) <= tol;
    ctx.add_fit("char-length-slope", *fit, target, tol, pass,
                "|exponent - target| <= tolerance");
  }
}

// ---- arm-exponent / cone-arm-exponent ----

void run_arm_exponent(Ctx& ctx) {
  ParamReader pr(*ctx.cfg, {"n-grid", "replicas", "tolerance", "target"});
  const std::vector<std::int64_t> grid = pr.int_list_or("n-grid", {16, 32, 64, 128, 256});
  const auto replicas = static_cast<std::uint64_t>(pr.integer_or("replicas", 100000));
  const double target = pr.real_or("target", -5.0 / 48.0);
  const double tol = pr.real_or("tolerance", 0.03);

  ctx.resolved["n_grid"] = grid;
  ctx.resolved["replicas"] = replicas;
  ctx.resolved["target"] = target;
  ctx.resolved["tolerance"] = tol;

  ctx.csv.header = kPHeader;
  std::vector<FitPoint> pts;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double n = static_cast<double>(grid[i]);
    const Domain dom = arm_domain_full_plane(n);
    const Estimate e = estimate_event(EventSpec::one_arm_ball({0, 0}, 0.0, n), dom, 0.5,
                                      replicas, rng::derive(ctx.seed, i), ctx.threads);
    ctx.p_row(0.5, n, e);
    pts.push_back({n, e.p_hat, e.ci_low, e.ci_high});
  }
  if (auto fit = try_fit(ctx, "one-arm-exponent", pts)) {
    const bool pass = std::abs(fit->exponent - target) <= tol;
    ctx.add_fit("one-arm-exponent", *fit, target, tol, pass,
                "|exponent - target| <= tolerance");
  }
}

void run_cone_arm_exponent(Ctx& ctx) {
  ParamReader pr(*ctx.cfg, {"alpha", "n-grid", "replicas", "tolerance"});
  const double alpha = parse_alpha_value(pr.str("alpha"));
  if (!(alpha > kPi / 6.0 && alpha <= kPi / 2.0 + 1e-12))
    throw ConfigError(0, "alpha: must lie in (pi/6, pi/2]");
  const std::vector<std::int64_t> grid = pr.int_list_or("n-grid", {8, 16, 32, 64, 128});
  const auto replicas = static_cast<std::uint64_t>(pr.integer_or("replicas", 100000));
  const double target = -kPi / (6.0 * alpha);
  const double tol = pr.real_or("tolerance", 0.07);

  ctx.resolved["alpha"] = alpha;
  ctx.resolved["n_grid"] = grid;
  ctx.resolved["replicas"] = replicas;
  ctx.resolved["target"] = target;
  ctx.resolved["tolerance"] = tol;

  ctx.csv.header = kPHeader;
  std::vector<FitPoint> pts;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double n = static_cast<double>(grid[i]);
    const Domain dom = arm_domain_cone(alpha, n);
    const Estimate e =
        estimate_event(EventSpec::one_arm_cone(cone_apex(), alpha, 0.0, n), dom, 0.5,
                       replicas, rng::derive(ctx.seed, i), ctx.threads);
    ctx.p_row(0.5, n, e);
    pts.push_back({n, e.p_hat, e.ci_low, e.ci_high});
  }
  if (auto fit = try_fit(ctx, "cone-arm-exponent", pts)) {
    const bool pass = std::abs(fit->exponent - target) <= tol;
    ctx.add_fit("cone-arm-exponent", *fit, target, tol, pass,
                "|exponent - target| <= tolerance");
  }
}

// ---- origin-burn ----

void run_origin_burn(Ctx& ctx) {
  ParamReader pr(*ctx.cfg,
                 {"N-grid", "zeta", "variant", "time-probe", "replicas", "bound-margin"});
  const std::vector<std::int64_t> grid = pr.int_list_or("N-grid", {16, 32, 64});
  const double zeta = pr.zeta_or("zeta", 1.0);
  const Variant variant = parse_variant(pr.str_or("variant", "no-recovery"));
  std::optional<double> probe;
  if (pr.has("time-probe")) probe = pr.real("time-probe");
  const auto replicas = static_cast<std::uint64_t>(pr.integer_or("replicas", 10000));
  const double margin = pr.real_or("bound-margin", 0.1);

  ctx.resolved["N_grid"] = grid;
  ctx.resolved["zeta"] = fmt(zeta);
  ctx.resolved["variant"] = variant == Variant::NoRecovery ? "no-recovery" : "recovery";
  if (probe) ctx.resolved["time_probe"] = *probe;
  ctx.resolved["replicas"] = replicas;
  ctx.resolved["bound_margin"] = margin;

  ctx.csv.header = kZetaHeader;
  std::vector<Estimate> ests;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Estimate e = origin_burn_experiment(static_cast<int>(grid[i]), zeta, variant,
                                              replicas, rng::derive(ctx.seed, i), probe,
                                              ctx.threads);
    ctx.z_row(zeta, static_cast<double>(grid[i]), e);
    ests.push_back(e);
  }

  bool monotone = true;
  std::string breach;
  for (std::size_t i = 0; i + 1 < ests.size(); ++i)
    if (ests[i + 1].p_hat > ests[i].p_hat && !intervals_overlap(ests[i], ests[i + 1])) {
      monotone = false;
      breach = "increase beyond CI overlap between N=" + std::to_string(grid[i]) +
               " and N=" + std::to_string(grid[i + 1]);
      break;
    }
  ctx.verdict("monotone-trend", monotone,
              monotone ? "burn probability non-increasing in N (within CI overlap)" : breach);

  if (!probe && variant == Variant::NoRecovery && !grid.empty()) {
    const double Nmax = static_cast<double>(grid.back());
    const double bound = std::pow(Nmax, -(5.0 / 52.0) - margin);
    const bool pass = ests.back().p_hat >= bound;
    ctx.verdict("polynomial-lower-bound", pass,
                "p_hat(" + std::to_string(grid.back()) + ") = " + fmt(ests.back().p_hat) +
                    " vs N^(-5/52-margin) = " + fmt(bound));
  }
}

// ---- long-path ----

void run_long_path(Ctx& ctx) {
  ParamReader pr(*ctx.cfg, {"n-grid", "zeta", "replicas", "slope-max"});
  const std::vector<std::int64_t> grid = pr.int_list_or("n-grid", {8, 16, 32, 64});
  const double zeta = pr.zeta_or("zeta", 1.0);
  const auto replicas = static_cast<std::uint64_t>(pr.integer_or("replicas", 100000));
  const double slope_max = pr.real_or("slope-max", -0.9);

  ctx.resolved["n_grid"] = grid;
  ctx.resolved["zeta"] = fmt(zeta);
  ctx.resolved["replicas"] = replicas;
  ctx.resolved["slope_max"] = slope_max;

  ctx.csv.header = kZetaHeader;
  std::vector<FitPoint> pts;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Estimate e = long_path_experiment(static_cast<int>(grid[i]), zeta, replicas,
                                            rng::derive(ctx.seed, i), ctx.threads);
    ctx.z_row(zeta, static_cast<double>(grid[i]), e);
    pts.push_back({static_cast<double>(grid[i]), e.p_hat, e.ci_low, e.ci_high});
  }
  if (auto fit = try_fit(ctx, "long-path-decay", pts)) {
    const bool pass = fit->exponent <= slope_max;
    ctx.add_fit("long-path-decay", *fit, -13.0 / 12.0,
                std::numeric_limits<double>::quiet_NaN(), pass, "exponent <= slope-max");
  }
}

// ---- fire-depth ----

void run_fire_depth(Ctx& ctx) {
  ParamReader pr(*ctx.cfg, {"N-grid", "zeta", "delta", "beta", "replicas"});
  const std::vector<std::int64_t> grid = pr.int_list_or("N-grid", {16, 32});
  const double zeta = pr.zeta_or("zeta", 1.0);
  const double delta = pr.real_or("delta", 0.05);
  const double beta = pr.real_or("beta", 0.75);
  const auto replicas = static_cast<std::uint64_t>(pr.integer_or("replicas", 10000));

  ctx.resolved["N_grid"] = grid;
  ctx.resolved["zeta"] = fmt(zeta);
  ctx.resolved["delta"] = delta;
  ctx.resolved["beta"] = beta;
  ctx.resolved["replicas"] = replicas;

  ctx.csv.header = kZetaHeader;
  std::vector<Estimate> ests;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Estimate e = fire_depth_experiment(static_cast<int>(grid[i]), zeta, delta, beta,
                                             replicas, rng::derive(ctx.seed, i), ctx.threads);
    ctx.z_row(zeta, static_cast<double>(grid[i]), e);
    ests.push_back(e);
  }
  bool rising = true;
  std::string breach;
  for (std::size_t i = 0; i + 1 < ests.size(); ++i)
    if (ests[i + 1].p_hat < ests[i].p_hat && !intervals_overlap(ests[i], ests[i + 1])) {
      rising = false;
      breach = "decrease beyond CI overlap between N=" + std::to_string(grid[i]) +
               " and N=" + std::to_string(grid[i + 1]);
      break;
    }
  ctx.verdict("deep-reach-trend", rising,
              rising ? "deep-burn probability non-decreasing in N (within CI overlap)"
                     : breach);
}

// ---- cone-count ----

void run_cone_count(Ctx& ctx) {
  ParamReader pr(*ctx.cfg,
                 {"halfwidth", "alpha", "n", "variant", "localized", "delta", "zeta",
                  "replicas"});
  ConeSiteSpec spec;
  spec.alpha = parse_alpha_value(pr.str_or("alpha", "pi/3"));
  spec.n = pr.real_or("n", 16.0);
  const std::string var = pr.str_or("variant", "standard");
  if (var == "standard")
    spec.variant = ConeSiteSpec::Variant::Standard;
  else if (var == "infinite-zeta")
    spec.variant = ConeSiteSpec::Variant::InfiniteZeta;
  else
    throw ConfigError(0, "variant: expected standard or infinite-zeta, got '" + var + "'");
  const bool localized = pr.flag_or("localized", false);
  const double delta = pr.real_or("delta", 1.0);
  if (localized) spec.localized = ConeSiteSpec::Localized{delta};
  const double zeta =
      pr.has("zeta")
          ? pr.zeta("zeta")
          : (spec.variant == ConeSiteSpec::Variant::InfiniteZeta ? kInf : 1.0);
  const double halfwidth = pr.real_or("halfwidth", spec.n);
  const auto replicas = static_cast<std::uint64_t>(pr.integer_or("replicas", 1000));

  ctx.resolved["alpha"] = spec.alpha;
  ctx.resolved["n"] = spec.n;
  ctx.resolved["variant"] = var;
  ctx.resolved["localized"] = localized;
  if (localized) ctx.resolved["delta"] = delta;
  ctx.resolved["zeta"] = fmt(zeta);
  ctx.resolved["halfwidth"] = halfwidth;
  ctx.resolved["replicas"] = replicas;

  const std::vector<std::int64_t> counts =
      cone_count_samples(halfwidth, spec, zeta, replicas, ctx.seed, ctx.threads);

  ctx.csv.header = {"n", "alpha", "delta", "variant", "replica", "count"};
  for (std::size_t r = 0; r < counts.size(); ++r)
    ctx.csv.rows.push_back({fmt(spec.n), fmt(spec.alpha), localized ? fmt(delta) : "", var,
                            std::to_string(r), std::to_string(counts[r])});

  std::vector<std::int64_t> sorted = counts;
  std::sort(sorted.begin(), sorted.end());
  double mean = 0.0;
  for (std::int64_t v : sorted) mean += static_cast<double>(v);
  mean /= static_cast<double>(sorted.size());
  auto quant = [&sorted](double f) {
    const auto i = static_cast<std::size_t>(
        std::llround(f * static_cast<double>(sorted.size() - 1)));
    return sorted[i];
  };
  ctx.extra["count_stats"] =
      ordered_json{{"mean", mean},         {"min", sorted.front()}, {"q05", quant(0.05)},
                   {"median", quant(0.5)}, {"q95", quant(0.95)},    {"max", sorted.back()}};
}

// ---- bounded-cluster ----

void run_bounded_cluster(Ctx& ctx) {
  ParamReader pr(*ctx.cfg,
                 {"width", "height", "v-u", "v-v", "zeta", "horizon", "L-grid", "replicas"});
  const int width = static_cast<int>(pr.integer_or("width", 64));
  const int height = static_cast<int>(pr.integer_or("height", 32));
  const Site v{static_cast<std::int32_t>(pr.integer_or("v-u", 0)),
               static_cast<std::int32_t>(pr.integer_or("v-v", 0))};
  const double zeta = pr.zeta_or("zeta", 1.0);
  const double horizon = pr.real_or("horizon", kCriticalTime);
  const std::vector<std::int64_t> L_grid = pr.int_list("L-grid");
  const auto replicas = static_cast<std::uint64_t>(pr.integer_or("replicas", 10000));

  ctx.resolved["width"] = width;
  ctx.resolved["height"] = height;
  ctx.resolved["v"] = ordered_json{{"u", v.u}, {"v", v.v}};
  ctx.resolved["zeta"] = fmt(zeta);
  ctx.resolved["horizon"] = horizon;
  ctx.resolved["L_grid"] = L_grid;
  ctx.resolved["replicas"] = replicas;

  const Domain strip = Domain::half_plane_strip(width, height);
  const auto res = bounded_cluster_experiment(strip, v, zeta, horizon, L_grid, replicas,
                                              ctx.seed, ctx.threads);
  ctx.csv.header = kZetaHeader;
  for (const auto& [L, e] : res) ctx.z_row(zeta, static_cast<double>(L), e);
}

// ---- scaling-check ----

void run_scaling_check(Ctx& ctx) {
  ParamReader pr(*ctx.cfg, {"p-grid", "length-replicas", "pi-replicas", "theta-replicas",
                            "cap", "ratio-bound"});
  const std::vector<double> p_grid = pr.real_list_or("p-grid", {0.52, 0.53, 0.54, 0.56});
  for (double p : p_grid)
    if (!(p > 0.5 && p < 1.0))
      throw ConfigError(0, "p-grid: scaling-check needs p in (0.5, 1)");
  const auto lrep = static_cast<std::uint64_t>(pr.integer_or("length-replicas", 30000));
  const auto prep = static_cast<std::uint64_t>(pr.integer_or("pi-replicas", 200000));
  const auto trep = static_cast<std::uint64_t>(pr.integer_or("theta-replicas", 2000));
  const int cap = static_cast<int>(pr.integer_or("cap", 4096));
  const double bound = pr.real_or("ratio-bound", 10.0);

  ctx.resolved["p_grid"] = p_grid;
  ctx.resolved["length_replicas"] = lrep;
  ctx.resolved["pi_replicas"] = prep;
  ctx.resolved["theta_replicas"] = trep;
  ctx.resolved["cap"] = cap;
  ctx.resolved["ratio_bound"] = bound;

  ctx.csv.header = {"p", "L", "pi4_at_L", "theta", "pi1_at_L"};
  std::vector<ScalingRow> rows;
  ordered_json meas = ordered_json::array();
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    const double p = p_grid[i];
    const LengthResult lr =
        characteristic_length(p, lrep, cap, rng::derive(ctx.seed, 4 * i), ctx.threads);
    if (lr.above_cap) {
      ctx.verdict("length-resolved", false,
                  "length cap reached at p = " + fmt(p) + "; point skipped");
      continue;
    }
    const double L = lr.L;
    const Domain dom = arm_domain_full_plane(L);
    const Estimate pi4 = estimate_event(EventSpec::four_arm({0, 0}, L), dom, 0.5, prep,
                                        rng::derive(ctx.seed, 4 * i + 1), ctx.threads);
    const Estimate theta =
        theta_proxy(p, 4.0 * L, trep, rng::derive(ctx.seed, 4 * i + 2), ctx.threads);
    const Estimate pi1 = estimate_event(EventSpec::one_arm_ball({0, 0}, 0.0, L), dom, 0.5,
                                        prep, rng::derive(ctx.seed, 4 * i + 3), ctx.threads);
    rows.push_back({p, L, pi4, theta, pi1});
    ctx.csv.rows.push_back({fmt(p), fmt(L), fmt(pi4.p_hat), fmt(theta.p_hat), fmt(pi1.p_hat)});
    meas.push_back(ordered_json{{"p", p},
                                {"L", L},
                                {"pi4_at_L", est_json(pi4)},
                                {"theta", est_json(theta)},
                                {"pi1_at_L", est_json(pi1)}});
  }
  ctx.extra["measurements"] = std::move(meas);

  const ScalingReport report = check_scaling_relations(rows, bound);
  ordered_json rel = ordered_json::array();
  for (const RelationCheck& r : report.relations) {
    rel.push_back(ordered_json{{"id", r.id},
                               {"values", r.values},
                               {"max_over_min", r.max_over_min},
                               {"status", r.status},
                               {"pass", r.pass}});
    ctx.verdict(r.id, r.pass,
                r.status == "ok" ? "max/min = " + fmt(r.max_over_min) +
                                       " vs bound " + fmt(bound)
                                 : r.status);
  }
  ctx.extra["relations"] = std::move(rel);
}

// ---- snapshot ----

void run_snapshot(Ctx& ctx) {
  ParamReader pr(*ctx.cfg, {"N", "zeta", "variant", "t", "horizon"});
  const int N = static_cast<int>(pr.integer_or("N", 50));
  const double zeta = pr.zeta_or("zeta", 0.5);
  const Variant variant = parse_variant(pr.str_or("variant", "no-recovery"));
  const double t = pr.real_or("t", 2.0 * kCriticalTime);
  const double horizon = pr.real_or("horizon", t > 0.0 ? t : kCriticalTime);
  if (t > horizon) throw ConfigError(0, "t: render time beyond the horizon");

  ctx.resolved["N"] = N;
  ctx.resolved["zeta"] = fmt(zeta);
  ctx.resolved["variant"] = variant == Variant::NoRecovery ? "no-recovery" : "recovery";
  ctx.resolved["t"] = t;
  ctx.resolved["horizon"] = horizon;

  const Domain hex = Domain::hexagon(N);
  ProcessSpec spec;
  spec.domain = &hex;
  spec.variant = variant;
  spec.zeta = zeta;
  spec.horizon = horizon;
  spec.ignition = default_ignition(hex);
  ObserverSpec obs;
  if (t < horizon) obs.snapshot_times = {t};
  const RunRecord run = simulate(spec, rng::replica_key(ctx.seed, 0), obs);

  ctx.svg_path = ctx.prefix + ".svg";
  const RenderStats stats = render_snapshot(run, t, ctx.svg_path);

  ctx.csv.header = {"t", "trigger_site", "cluster_size"};
  for (const FireEvent& f : run.fires)
    ctx.csv.rows.push_back({fmt(f.t), std::to_string(f.trigger_outer),
                            std::to_string(f.size)});

  ordered_json st{{"largest_burnt", stats.largest_burnt},
                  {"second_burnt", stats.second_burnt},
                  {"burnt_total", stats.burnt_total},
                  {"triggered", stats.triggered}};
  if (stats.second_burnt > 0)
    st["largest_over_second"] = static_cast<double>(stats.largest_burnt) /
                                static_cast<double>(stats.second_burnt);
  ctx.extra["stats"] = std::move(st);
}

}  // namespace

std::uint64_t experiment_seed(const ExperimentConfig& config) {
  return rng::derive(config.seed, rng::fnv1a(config.experiment.c_str()));
}

std::string spec_hash(const ExperimentConfig& config) {
  // Identifies the scientific content of a run: output placement, assert
  // mode and thread count never change results, so they stay out of the hash.
  ExperimentConfig norm = config;
  norm.output.clear();
  norm.assert_checks = false;
  norm.threads = 1;
  const std::uint64_t h = rng::fnv1a(echo_config(norm).c_str());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

RunOutputs run_experiment(const ExperimentConfig& config) {
  if (!known_experiment(config.experiment))
    throw ConfigError(0, "unknown experiment '" + config.experiment + "'");

  Ctx ctx;
  ctx.cfg = &config;
  ctx.seed = experiment_seed(config);
  ctx.hash = spec_hash(config);
  ctx.threads = config.threads;
  ctx.prefix = config.output.empty() ? config.experiment : config.output;

  using Runner = void (*)(Ctx&);
  static const std::pair<const char*, Runner> kRunners[] = {
      {"perc-event", run_perc_event},       {"char-length", run_char_length},
      {"arm-exponent", run_arm_exponent},   {"cone-arm-exponent", run_cone_arm_exponent},
      {"origin-burn", run_origin_burn},     {"long-path", run_long_path},
      {"fire-depth", run_fire_depth},       {"cone-count", run_cone_count},
      {"bounded-cluster", run_bounded_cluster}, {"scaling-check", run_scaling_check},
      {"snapshot", run_snapshot},
  };
  for (const auto& [name, fn] : kRunners)
    if (config.experiment == name) {
      fn(ctx);
      break;
    }

  RunOutputs out;
  out.csv_path = ctx.prefix + ".csv";
  out.json_path = ctx.prefix + ".json";
  out.svg_path = ctx.svg_path;
  out.checks_passed = ctx.all_pass;

  write_file(out.csv_path, ctx.csv.text());

  ordered_json doc;
  doc["experiment"] = config.experiment;
  doc["spec_hash"] = ctx.hash;
  doc["seed"] = config.seed;
  doc["experiment_seed"] = ctx.seed;
  doc["threads"] = config.threads;
  doc["config"] = echo_config(config);
  doc["resolved"] = ctx.resolved;
  doc["columns"] = ctx.csv.header;
  doc["rows"] = ctx.csv.rows;
  for (auto it = ctx.extra.begin(); it != ctx.extra.end(); ++it) doc[it.key()] = it.value();
  doc["fits"] = ctx.fits;
  doc["verdicts"] = ctx.verdicts;
  doc["checks_passed"] = ctx.all_pass;
  ordered_json outputs{{"csv", out.csv_path}, {"json", out.json_path}};
  if (!out.svg_path.empty()) outputs["svg"] = out.svg_path;
  doc["outputs"] = std::move(outputs);
  write_file(out.json_path, doc.dump(2) + "\n");

  return out;
}

}  // namespace fflab
