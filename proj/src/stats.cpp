#include "fflab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace fflab {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p outside (0,1)");
  // Acklam 2003 rational approximation with one Halley refinement step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - plow) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // Halley step against erfc for full double accuracy.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2 * 3.14159265358979323846) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

std::pair<double, double> binomial_ci(std::uint64_t successes, std::uint64_t trials,
                                      double level) {
  if (trials == 0) throw std::invalid_argument("binomial_ci: trials must be >= 1");
  if (successes > trials) throw std::invalid_argument("binomial_ci: successes > trials");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("binomial_ci: bad level");
  const double z = normal_quantile(0.5 + level / 2);
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1 + z2 / n;
  const double center = (ph + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n)) / denom;
  double lo = center - half, hi = center + half;
  if (successes == 0) lo = 0.0;
  if (successes == trials) hi = 1.0;
  return {std::max(0.0, lo), std::min(1.0, hi)};
}

Estimate make_estimate(std::uint64_t successes, std::uint64_t replicas, std::uint64_t seed) {
  Estimate e;
  e.successes = successes;
  e.replicas = replicas;
  e.p_hat = replicas ? static_cast<double>(successes) / static_cast<double>(replicas) : 0.0;
  auto [lo, hi] = binomial_ci(successes, replicas, 0.95);
  e.ci_low = lo;
  e.ci_high = hi;
  e.seed = seed;
  return e;
}

PowerLawFit fit_power_law(const std::vector<FitPoint>& points) {
  PowerLawFit fit;
  for (const FitPoint& pt : points) {
    if (!(pt.n > 0)) throw std::invalid_argument("fit_power_law: scale must be positive");
    if (pt.ci_low <= 0.0 && pt.ci_high > pt.ci_low) {
      std::fprintf(stderr, "fit_power_law: dropping point n=%g (CI includes 0)\n", pt.n);
      ++fit.dropped;
      continue;
    }
    if (!(pt.p_hat > 0)) throw std::invalid_argument("fit_power_law: nonpositive estimate");
    fit.points.push_back(pt);
  }
  if (fit.points.size() < 3) throw std::invalid_argument("fit_power_law: fewer than 3 usable points");

  const std::size_t m = fit.points.size();
  std::vector<double> x(m), y(m), w(m);
  bool weighted = false;
  for (std::size_t i = 0; i < m; ++i) {
    const FitPoint& pt = fit.points[i];
    x[i] = std::log(pt.n);
    y[i] = std::log(pt.p_hat);
    const double half = (pt.ci_high - pt.ci_low) / 2;
    if (half > 0) {
      // delta method: sd(log p) ~= sd(p)/p, sd(p) ~= half/1.96
      const double slog = half / 1.959963984540054 / pt.p_hat;
      w[i] = 1.0 / (slog * slog);
      weighted = true;
    } else {
      w[i] = -1;  // filled below for exact points
    }
  }
  if (weighted) {
    // exact points dominate: give them the largest weight present x100
    double wmax = 0;
    for (double wi : w) wmax = std::max(wmax, wi);
    for (double& wi : w) if (wi < 0) wi = 100 * wmax;
  } else {
    for (double& wi : w) wi = 1.0;
  }

  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < m; ++i) { sw += w[i]; sx += w[i] * x[i]; sy += w[i] * y[i]; }
  const double xbar = sx / sw, ybar = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
    sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
  }
  if (sxx <= 0) throw std::invalid_argument("fit_power_law: all scales equal");
  fit.exponent = sxy / sxx;
  fit.intercept = ybar - fit.exponent * xbar;

  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (fit.intercept + fit.exponent * x[i]);
    ss_res += w[i] * r * r;
    ss_tot += w[i] * (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  if (weighted) {
    fit.stderr_exponent = std::sqrt(1.0 / sxx);
  } else if (m > 2) {
    fit.stderr_exponent = std::sqrt(ss_res / (static_cast<double>(m) - 2) / sxx);
  }
  return fit;
}

ScalingReport check_scaling_relations(const std::vector<ScalingRow>& rows, double ratio_bound) {
  if (rows.empty()) throw std::invalid_argument("check_scaling_relations: empty input");
  ScalingReport rep;
  rep.ratio_bound = ratio_bound;

  auto finish = [&](RelationCheck& rc) {
    if (rc.values.size() < 2) {
      rc.status = "insufficient grid";
      rc.pass = false;
    } else {
      const auto [lo, hi] = std::minmax_element(rc.values.begin(), rc.values.end());
      rc.max_over_min = (*lo > 0) ? *hi / *lo : std::numeric_limits<double>::infinity();
      rc.pass = rc.max_over_min <= ratio_bound;
      rc.status = "ok";
    }
    rep.relations.push_back(rc);
  };

  // sort by p so verdicts do not depend on input order
  std::vector<ScalingRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const ScalingRow& a, const ScalingRow& b) { return a.p < b.p; });

  RelationCheck near_crit{"(p-1/2)*L^2*pi4(L)", {}, 0, false, ""};
  RelationCheck theta_rel{"theta(p)/pi1(L)", {}, 0, false, ""};
  for (const ScalingRow& r : sorted) {
    near_crit.values.push_back((r.p - 0.5) * r.L * r.L * r.pi4_at_L.p_hat);
    if (r.pi1_at_L.p_hat > 0) theta_rel.values.push_back(r.theta.p_hat / r.pi1_at_L.p_hat);
  }
  finish(near_crit);
  finish(theta_rel);
  return rep;
}

}  // namespace fflab
