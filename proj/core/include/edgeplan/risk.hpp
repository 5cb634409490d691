#pragma once

#include <vector>

namespace edgeplan::risk {

enum class Provenance { simulation, channel_mc };

// A bag of nonnegative delay observations plus where they came from.
struct SampleSet {
  std::vector<double> values;
  Provenance provenance = Provenance::simulation;
};

// Empirical value-at-risk: the alpha-quantile, i.e. the ceil(alpha*K)-th
// smallest sample (1-based). No interpolation between order statistics.
double var_empirical(const std::vector<double>& values, double alpha);

// Empirical conditional value-at-risk: the mean of the ceil((1-alpha)*K)
// largest samples. Requires (1-alpha)*K >= 1.
double cvar_empirical(const std::vector<double>& values, double alpha);

struct CvarLpSolution {
  double value = 0.0;  // optimal objective, the CVaR estimate
  double gamma = 0.0;  // a minimizer of the auxiliary objective
};

// CVaR as the minimum over gamma of
//   gamma + (1/((1-alpha)K)) * sum_k max(0, s_k - gamma),
// solved in closed form after sorting. When (1-alpha)*K is an integer this
// equals cvar_empirical exactly. The returned gamma is the largest-index
// minimizer, so on flat segments it sits at the upper end.
CvarLpSolution cvar_lp(const std::vector<double>& values, double alpha);

// Same minimization solved as an explicit linear program with a dense
// tableau simplex. Slow path; kept so tests can cross-check cvar_lp against
// an independent route.
CvarLpSolution cvar_lp_simplex(const std::vector<double>& values, double alpha);

// Closed-form tail statistics of an exponentially distributed waiting time
// with mean arrival_rate * service_variance / (2 * (1 - utilization)):
//   CVaR_alpha = mean * (1 - ln(1 - alpha))
//   VaR_alpha  = mean * (-ln(1 - alpha))
// service_variance >= 0; utilization must be < 1.
double cvar_exponential_wait(double arrival_rate, double service_variance,
                             double utilization, double alpha);
double var_exponential_wait(double arrival_rate, double service_variance,
                            double utilization, double alpha);

// CVaR of a deterministic quantity is the quantity itself.
double cvar_constant(double value);

struct RiskSummary {
  double mean = 0.0;
  double var_alpha = 0.0;
  double cvar_alpha = 0.0;
  double p99 = 0.0;  // VaR at 0.99 regardless of alpha
  double alpha = 0.0;
};

RiskSummary summarize(const std::vector<double>& values, double alpha);

}  // namespace edgeplan::risk
