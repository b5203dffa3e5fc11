#pragma once

#include <span>
#include <string>
#include <vector>

namespace srim {

struct SampleSummary {
  int n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased

  static SampleSummary of(std::span<const double> xs);
};

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Student t distribution with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);
double student_t_two_sided_p(double t, double dof);
double student_t_quantile(double p, double dof);

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;
  bool degenerate = false;  // zero variance in both samples with unequal means
};

WelchResult welch_t(const SampleSummary& a, const SampleSummary& b);

double bonferroni(double p, int comparisons);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

Interval ci95(const SampleSummary& s);

struct PreferenceGroup {
  std::string label;
  std::vector<double> samples;  // one value per seed
};

struct PairwiseResult {
  std::string first;
  std::string second;
  double t = 0.0;
  double dof = 0.0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  bool significant = false;
  bool degenerate = false;
};

struct Comparison {
  std::string metric;
  std::vector<PairwiseResult> pairs;
  std::vector<std::string> ascending;  // group labels ordered by mean
  std::vector<SampleSummary> summaries;  // aligned with the input groups
  std::vector<Interval> intervals;
};

inline constexpr double kSignificanceLevel = 0.05;

/// All unordered pairs, Welch t-tests with Bonferroni correction over the pair count.
Comparison compare_preferences(const std::vector<PreferenceGroup>& groups, const std::string& metric);

}  // namespace srim
