// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace kpzlab {

struct KsResult {
  double statistic = 0;
  double p_value = 1;
  std::size_t n1 = 0, n2 = 0;
};

// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

KsResult ks_one_sample(std::vector<double> samples,
                       const std::function<double(double)>& cdf);
KsResult ks_normal(std::vector<double> samples, double mean = 0,
                   double sd = 1);
KsResult two_sample_ks(std::vector<double> a, std::vector<double> b);

double normal_cdf(double x);

// Chi-square test that several samples share one law: pooled quantile bins,
// a groups x bins contingency table. Returns the p-value.
double homogeneity_p_value(const std::vector<std::vector<double>>& groups,
                           int bins);

struct PaleyZygmundReport {
  double delta = 0;
  double mean = 0;
  double second_moment = 0;
  double p_hat = 0;        // empirical P(X >= delta * mean)
  double lower_bound = 0;  // (1 - delta)^2 mean^2 / second moment
  double se = 0;           // standard error of p_hat - lower_bound
  bool holds = false;      // p_hat >= lower_bound - 3 se
};

PaleyZygmundReport paley_zygmund(const std::vector<double>& samples,
                                 double delta);

enum class TailSide { upper, lower };
const char* tail_side_name(TailSide s);

struct TailFitOptions {
  std::size_t min_samples = 100000;
  std::size_t min_exceedances = 30;
  std::size_t exclude_top = 10;
  int bins = 30;
};

// Tail fit of P(X >= s) (upper) or P(X <= -s) (lower) on s in [s_lo, s_hi].
// Primary estimate: binned Poisson maximum likelihood for the survival
// model P(s) = exp(a - b log s - c s^p), with CIs from the Fisher
// information. The log-log regression of log(-log P) on log s with binomial
// weights is reported alongside.
struct TailFit {
  TailSide side = TailSide::upper;
  std::size_t sample_size = 0;
  double s_lo = 0, s_hi = 0;       // requested window
  double s_used_hi = 0;            // upper end after exclusions
  std::vector<double> thresholds;  // bin edges (ascending)
  std::vector<std::size_t> exceedances;
  std::vector<double> log_survival;
  double p_hat = 0, p_ci = 0;  // CI half-widths at 95%
  double c_hat = 0, c_ci = 0;
  double a_hat = 0, b_hat = 0;
  double loglog_p = 0, loglog_c = 0;
  double deviance = 0;
  int iterations = 0;
  std::string model = "binned-mle exp(a - b log s - c s^p)";

  //! Fitted log P(X beyond s).
  double fitted_log_survival(double s) const;
};

TailFit fit_tail(const std::vector<double>& samples, TailSide side,
                 double s_lo, double s_hi, const TailFitOptions& opt = {});

// Limit constants of the iterated-logarithm law.
double lil_upper_constant();  // (3 / (4 sqrt 2))^{2/3}
double lil_lower_constant();  // -6^{1/3}
double upper_tail_constant(); // 4 sqrt(2) / 3
double lower_tail_constant(); // 1 / 6

struct LilTrack {
  std::vector<double> times;
  std::vector<double> running_max;  // of h / (log log t)^{2/3}
  std::vector<double> running_min;  // of h / (log log t)^{1/3}
  double upper_reference = 0;
  double lower_reference = 0;
};

LilTrack track_lil(const std::vector<double>& times,
                   const std::vector<double>& values);

struct HolderFit {
  double exponent = 0;
  double ci = 0;  // 95% half-width from the regression residuals
  std::vector<double> lags;
  std::vector<double> mean_abs;  // median of group means of |increment|
};

// Paths sampled at uniform spacing `spacing`; lags in grid units. Each
// lag's increments are centred by their overall sample mean, then
// E|increment| is estimated by the median of `groups` replica-group means.
HolderFit fit_holder(const std::vector<std::vector<double>>& paths,
                     double spacing, const std::vector<int>& lags,
                     int groups = 10);

struct Summary {
  double mean = 0, sd = 0, se = 0;
  std::size_t n = 0;
};
Summary summarize(const std::vector<double>& v);

}  // namespace kpzlab
