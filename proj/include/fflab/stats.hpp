#pragma once

// Estimates, confidence intervals and log-log fits.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fflab {

// Monte Carlo estimate of an event probability with a 95% Wilson interval.
struct Estimate {
  double p_hat = 0.0;
  std::uint64_t successes = 0;
  std::uint64_t replicas = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t seed = 0;
};

// Two-sided normal quantile, |err| < 1.2e-8 (Acklam's rational approximation).
double normal_quantile(double p);

// Wilson score interval. level in (0,1), e.g. 0.95.
std::pair<double, double> binomial_ci(std::uint64_t successes, std::uint64_t trials,
                                      double level);

Estimate make_estimate(std::uint64_t successes, std::uint64_t replicas, std::uint64_t seed);

// One input point of a log-log fit: estimate p at scale n.
struct FitPoint {
  double n = 0.0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct PowerLawFit {
  double exponent = 0.0;
  double intercept = 0.0;  // log-amplitude: log p = intercept + exponent*log n
  double stderr_exponent = 0.0;
  double r_squared = 0.0;
  std::vector<FitPoint> points;  // points actually used
  int dropped = 0;               // points removed because their CI includes 0
};

// Variance-weighted least squares on (log n, log p). Weights come from the
// delta method applied to the CI half-widths; points with degenerate CIs
// (exact inputs) get equal weights. Points whose CI includes 0 are dropped
// with a warning on stderr; at least 3 usable points are required.
PowerLawFit fit_power_law(const std::vector<FitPoint>& points);

// One bounded-ratio check ("≍" operationalized as max/min <= ratio_bound).
struct RelationCheck {
  std::string id;
  std::vector<double> values;  // ratio statistic per grid point
  double max_over_min = 0.0;
  bool pass = false;
  std::string status;  // "ok" or "insufficient grid"
};

struct ScalingRow {
  double p = 0.0;
  double L = 0.0;            // characteristic-length estimate at p
  Estimate pi4_at_L;         // four-arm probability at scale L (critical)
  Estimate theta;            // occupied connection 0 <-> distance 4L at p
  Estimate pi1_at_L;         // one-arm probability at scale L (critical)
};

struct ScalingReport {
  std::vector<RelationCheck> relations;
  double ratio_bound = 10.0;
};

// Checks (p - 1/2) * L^2 * pi4(L) and theta(p) / pi1(L) for boundedness
// across the p-grid. A single-row grid yields status "insufficient grid".
ScalingReport check_scaling_relations(const std::vector<ScalingRow>& rows,
                                      double ratio_bound = 10.0);

}  // namespace fflab
