#include "edgeplan/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "edgeplan/errors.hpp"

namespace edgeplan::risk {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must be in (0,1)");
}

void check_nonempty(const std::vector<double>& values) {
  if (values.empty())
    throw InsufficientSamplesError("empty sample set");
}

// 1-based index of the alpha-quantile order statistic, ceil(alpha*K). The
// epsilon shields exact products (e.g. 0.9 * 10) from fp round-up.
std::size_t quantile_index(double alpha, std::size_t k) {
  const double t = alpha * static_cast<double>(k);
  const auto idx = static_cast<std::size_t>(std::ceil(t - 1e-9));
  return std::clamp<std::size_t>(idx, 1, k);
}

// Number of samples in the alpha-tail, ceil((1-alpha)*K); must be >= 1.
std::size_t tail_count(double alpha, std::size_t k) {
  const double t = (1.0 - alpha) * static_cast<double>(k);
  if (t < 1.0 - 1e-9)
    throw InsufficientSamplesError(
        "need (1-alpha)*K >= 1 samples in the tail");
  const auto m = static_cast<std::size_t>(std::ceil(t - 1e-9));
  return std::clamp<std::size_t>(m, 1, k);
}

}  // namespace

double var_empirical(const std::vector<double>& values, double alpha) {
  check_alpha(alpha);
  check_nonempty(values);
  std::vector<double> v(values);
  const std::size_t idx = quantile_index(alpha, v.size());
  std::nth_element(v.begin(), v.begin() + (idx - 1), v.end());
  return v[idx - 1];
}

double cvar_empirical(const std::vector<double>& values, double alpha) {
  check_alpha(alpha);
  check_nonempty(values);
  std::vector<double> v(values);
  const std::size_t m = tail_count(alpha, v.size());
  std::nth_element(v.begin(), v.end() - m, v.end());
  const double sum = std::accumulate(v.end() - m, v.end(), 0.0);
  return sum / static_cast<double>(m);
}

CvarLpSolution cvar_lp(const std::vector<double>& values, double alpha) {
  check_alpha(alpha);
  check_nonempty(values);
  const std::size_t k = values.size();
  tail_count(alpha, k);  // enforce the same tail precondition

  // The auxiliary objective is piecewise linear in gamma with kinks at the
  // samples; the slope turns nonnegative at the floor(alpha*K)+1-th order
  // statistic, which is therefore the upper-end minimizer.
  std::vector<double> v(values);
  const double t = alpha * static_cast<double>(k);
  auto q = static_cast<std::size_t>(std::floor(t + 1e-9)) + 1;
  q = std::clamp<std::size_t>(q, 1, k);
  std::nth_element(v.begin(), v.begin() + (q - 1), v.end());
  const double gamma = v[q - 1];

  const double coeff = 1.0 / ((1.0 - alpha) * static_cast<double>(k));
  double excess = 0.0;
  for (double s : values)
    if (s > gamma) excess += s - gamma;
  return {gamma + coeff * excess, gamma};
}

CvarLpSolution cvar_lp_simplex(const std::vector<double>& values,
                               double alpha) {
  check_alpha(alpha);
  check_nonempty(values);
  const std::size_t m = values.size();
  tail_count(alpha, m);
  const double coeff = 1.0 / ((1.0 - alpha) * static_cast<double>(m));

  // min  g+ - g- + coeff * sum z_k
  // s.t. g+ - g- + z_k - w_k = s_k,   z, w, g+, g- >= 0.
  // Columns: 0 g+, 1 g-, 2..m+1 z, m+2..2m+1 w. Starting basis: the z block,
  // which is feasible because the samples are delays (s_k >= 0).
  const std::size_t n = 2 * m + 2;
  std::vector<std::vector<double>> tab(m, std::vector<double>(n + 1, 0.0));
  std::vector<double> cost(n, 0.0);
  cost[0] = 1.0;
  cost[1] = -1.0;
  for (std::size_t j = 2; j < m + 2; ++j) cost[j] = coeff;

  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) {
    tab[r][0] = 1.0;
    tab[r][1] = -1.0;
    tab[r][2 + r] = 1.0;
    tab[r][m + 2 + r] = -1.0;
    tab[r][n] = values[r];
    basis[r] = 2 + r;
  }

  std::vector<double> zrow(n + 1, 0.0);
  for (std::size_t j = 0; j <= n; ++j) {
    double acc = j < n ? cost[j] : 0.0;
    for (std::size_t r = 0; r < m; ++r) acc -= cost[basis[r]] * tab[r][j];
    zrow[j] = acc;  // zrow[n] holds -objective
  }

  const double tol = 1e-11;
  for (;;) {
    // Bland's rule: smallest improving column, smallest basis var on ties.
    std::size_t enter = n;
    for (std::size_t j = 0; j < n; ++j)
      if (zrow[j] < -tol) {
        enter = j;
        break;
      }
    if (enter == n) break;

    std::size_t leave = m;
    double best = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (tab[r][enter] <= tol) continue;
      const double ratio = tab[r][n] / tab[r][enter];
      if (leave == m || ratio < best - tol ||
          (ratio < best + tol && basis[r] < basis[leave])) {
        leave = r;
        best = ratio;
      }
    }
    if (leave == m)
      throw std::logic_error("cvar_lp_simplex: unbounded program");

    const double piv = tab[leave][enter];
    for (std::size_t j = 0; j <= n; ++j) tab[leave][j] /= piv;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == leave || tab[r][enter] == 0.0) continue;
      const double f = tab[r][enter];
      for (std::size_t j = 0; j <= n; ++j) tab[r][j] -= f * tab[leave][j];
    }
    const double fz = zrow[enter];
    if (fz != 0.0)
      for (std::size_t j = 0; j <= n; ++j) zrow[j] -= fz * tab[leave][j];
    basis[leave] = enter;
  }

  double gpos = 0.0, gneg = 0.0, obj = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    if (basis[r] == 0) gpos = tab[r][n];
    if (basis[r] == 1) gneg = tab[r][n];
    obj += cost[basis[r]] * tab[r][n];
  }
  return {obj, gpos - gneg};
}

namespace {

double exponential_wait_mean(double arrival_rate, double service_variance,
                             double utilization) {
  if (!(arrival_rate > 0.0))
    throw std::invalid_argument("arrival_rate must be > 0");
  if (service_variance < 0.0)
    throw std::invalid_argument("service_variance must be >= 0");
  if (utilization >= 1.0)
    throw InstabilityError("wait distribution undefined: utilization >= 1");
  return arrival_rate * service_variance / (2.0 * (1.0 - utilization));
}

}  // namespace

double cvar_exponential_wait(double arrival_rate, double service_variance,
                             double utilization, double alpha) {
  check_alpha(alpha);
  const double mean =
      exponential_wait_mean(arrival_rate, service_variance, utilization);
  return mean * (1.0 - std::log(1.0 - alpha));
}

double var_exponential_wait(double arrival_rate, double service_variance,
                            double utilization, double alpha) {
  check_alpha(alpha);
  const double mean =
      exponential_wait_mean(arrival_rate, service_variance, utilization);
  return mean * (-std::log(1.0 - alpha));
}

double cvar_constant(double value) { return value; }

RiskSummary summarize(const std::vector<double>& values, double alpha) {
  check_alpha(alpha);
  check_nonempty(values);
  RiskSummary out;
  out.alpha = alpha;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
  out.var_alpha = var_empirical(values, alpha);
  out.cvar_alpha = cvar_empirical(values, alpha);
  out.p99 = var_empirical(values, 0.99);
  return out;
}

}  // namespace edgeplan::risk
