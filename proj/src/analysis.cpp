#include "srim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace srim {

namespace {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;
}

}  // namespace

SampleSummary SampleSummary::of(std::span<const double> xs) {
  SampleSummary s;
  s.n = static_cast<int>(xs.size());
  if (s.n == 0) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.variance = ss / (s.n - 1);
  }
  return s;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  return incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

double student_t_cdf(double t, double dof) {
  const double tail = 0.5 * student_t_two_sided_p(t, dof);
  return t < 0.0 ? tail : 1.0 - tail;
}

double student_t_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("t quantile needs p in (0,1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -student_t_quantile(1.0 - p, dof);
  // Upper tail: solve two_sided_p(t) = 2 (1 - p) by bracketing then bisection.
  const double target = 2.0 * (1.0 - p);
  double lo = 0.0, hi = 1.0;
  while (student_t_two_sided_p(hi, dof) > target) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_two_sided_p(mid, dof) > target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

WelchResult welch_t(const SampleSummary& a, const SampleSummary& b) {
  if (a.n < 2 || b.n < 2) throw std::invalid_argument("welch_t needs at least 2 samples per group");
  WelchResult r;
  const double sa = a.variance / a.n, sb = b.variance / b.n;
  const double se2 = sa + sb;
  if (se2 == 0.0) {
    r.dof = a.n + b.n - 2;
    if (a.mean == b.mean) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = a.mean > b.mean ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
      r.degenerate = true;
    }
    return r;
  }
  r.t = (a.mean - b.mean) / std::sqrt(se2);
  r.dof = se2 * se2 / (sa * sa / (a.n - 1) + sb * sb / (b.n - 1));
  r.p = student_t_two_sided_p(r.t, r.dof);
  return r;
}

double bonferroni(double p, int comparisons) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("bonferroni: p must lie in [0,1]");
  if (comparisons < 1) throw std::invalid_argument("bonferroni: need at least one comparison");
  return std::min(1.0, p * comparisons);
}

Interval ci95(const SampleSummary& s) {
  if (s.n < 2) throw std::invalid_argument("ci95 needs at least 2 samples");
  const double half = student_t_quantile(0.975, s.n - 1) * std::sqrt(s.variance / s.n);
  return {s.mean - half, s.mean + half};
}

Comparison compare_preferences(const std::vector<PreferenceGroup>& groups, const std::string& metric) {
  if (groups.size() < 2) throw std::invalid_argument("compare_preferences needs at least 2 groups");
  Comparison c;
  c.metric = metric;
  for (const auto& g : groups) {
    if (g.samples.size() < 2)
      throw std::invalid_argument("group '" + g.label + "' has fewer than 2 seeds");
    c.summaries.push_back(SampleSummary::of(g.samples));
    c.intervals.push_back(ci95(c.summaries.back()));
  }
  const int m = static_cast<int>(groups.size() * (groups.size() - 1) / 2);
  for (std::size_t i = 0; i < groups.size(); ++i)
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      const auto w = welch_t(c.summaries[i], c.summaries[j]);
      PairwiseResult r;
      r.first = groups[i].label;
      r.second = groups[j].label;
      r.t = w.t;
      r.dof = w.dof;
      r.p_raw = w.p;
      r.p_adjusted = bonferroni(w.p, m);
      r.significant = r.p_adjusted < kSignificanceLevel;
      r.degenerate = w.degenerate;
      c.pairs.push_back(r);
    }
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return c.summaries[x].mean < c.summaries[y].mean;
  });
  for (auto k : order) c.ascending.push_back(groups[k].label);
  return c;
}

}  // namespace srim
