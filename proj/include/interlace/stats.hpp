#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace interlace {

/// Point estimate with standard error from independent replicas.
struct MomentEstimate {
  std::string id;
  double estimate = 0.0;
  double se = 0.0;
  long replicas = 0;

  static MomentEstimate from_samples(std::string id, const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("MomentEstimate: need replicas > 1");
    // two-pass mean/variance in fixed order: reductions are deterministic
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= (double)xs.size();
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = ss / ((double)xs.size() - 1.0);
    MomentEstimate m;
    m.id = std::move(id);
    m.estimate = mean;
    m.se = std::sqrt(var / (double)xs.size());
    m.replicas = (long)xs.size();
    return m;
  }
};

/// Outcome of one statistic-vs-reference comparison. For moment statistics
/// the criterion is |z| <= threshold with z = (estimate - reference)/se; for
/// rare events an exact binomial interval replaces the normal approximation,
/// and deterministic checks compare against an absolute tolerance.
struct TestVerdict {
  std::string id;
  double reference = 0.0;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  bool pass = false;
  std::string note;

  static TestVerdict moment(const MomentEstimate& m, double reference, double threshold = 3.0) {
    TestVerdict v;
    v.id = m.id;
    v.reference = reference;
    v.estimate = m.estimate;
    v.se = m.se;
    if (m.se == 0.0) {
      v.z = (m.estimate == reference) ? 0.0 : INFINITY;
    } else {
      v.z = (m.estimate - reference) / m.se;
    }
    v.pass = std::abs(v.z) <= threshold;
    return v;
  }

  static TestVerdict absolute(std::string id, double value, double reference, double tol) {
    TestVerdict v;
    v.id = std::move(id);
    v.reference = reference;
    v.estimate = value;
    v.se = 0.0;
    v.z = (value - reference) / tol;  // error in units of the tolerance
    v.pass = std::abs(value - reference) <= tol;
    v.note = "absolute tolerance " + std::to_string(tol);
    return v;
  }

  static TestVerdict condition(std::string id, bool ok, std::string note = {}) {
    TestVerdict v;
    v.id = std::move(id);
    v.pass = ok;
    v.note = std::move(note);
    return v;
  }
};

namespace detail {
inline double log_binom_pmf(long n, long k, double p) {
  if (p <= 0.0) return k == 0 ? 0.0 : -INFINITY;
  if (p >= 1.0) return k == n ? 0.0 : -INFINITY;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
         k * std::log(p) + (n - k) * std::log1p(-p);
}

inline double binom_cdf(long n, long k, double p) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  double s = 0.0;
  for (long i = 0; i <= k; ++i) s += std::exp(log_binom_pmf(n, i, p));
  return std::min(1.0, s);
}
}  // namespace detail

/// Clopper-Pearson interval for a binomial proportion at the given two-sided
/// confidence level (bisection on the exact tails).
struct BinomialInterval {
  double lo = 0.0, hi = 1.0;
};

inline BinomialInterval binomial_ci(long successes, long n, double confidence = 0.9973) {
  if (n <= 0 || successes < 0 || successes > n)
    throw std::invalid_argument("binomial_ci: bad arguments");
  const double alpha = 1.0 - confidence;
  BinomialInterval ci;
  auto bisect = [&](auto f) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      (f(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  ci.lo = successes == 0
              ? 0.0
              : bisect([&](double p) { return 1.0 - detail::binom_cdf(n, successes - 1, p) < alpha / 2; });
  ci.hi = successes == n
              ? 1.0
              : bisect([&](double p) { return detail::binom_cdf(n, successes, p) >= alpha / 2; });
  return ci;
}

inline TestVerdict rare_event_verdict(std::string id, long successes, long n, double reference) {
  BinomialInterval ci = binomial_ci(successes, n);
  TestVerdict v;
  v.id = std::move(id);
  v.reference = reference;
  v.estimate = (double)successes / (double)n;
  v.se = std::sqrt(v.estimate * (1.0 - v.estimate) / (double)n);
  v.z = v.se > 0 ? (v.estimate - reference) / v.se : 0.0;
  v.pass = reference >= ci.lo && reference <= ci.hi;
  v.note = "exact binomial CI [" + std::to_string(ci.lo) + ", " + std::to_string(ci.hi) + "]";
  return v;
}

/// Suite report with the documented family-wise policy: individual checks
/// use 3 SE; the suite passes when the number of exceedances among the M
/// moment-style checks does not exceed the smallest k with
/// P[Binomial(M, 0.0027) > k] <= 1e-3. Deterministic (absolute/condition)
/// checks must all pass.
struct SuiteReport {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<TestVerdict> verdicts;
  int statistical_tests = 0;
  int exceedances = 0;
  int allowed_exceedances = 0;
  bool pass = false;

  void finalize() {
    statistical_tests = 0;
    exceedances = 0;
    bool deterministic_ok = true;
    for (const auto& v : verdicts) {
      const bool statistical = v.se > 0.0;
      if (statistical) {
        ++statistical_tests;
        if (!v.pass) ++exceedances;
      } else if (!v.pass) {
        deterministic_ok = false;
      }
    }
    const double p = 0.0027;
    allowed_exceedances = 0;
    while (1.0 - detail::binom_cdf(statistical_tests, allowed_exceedances, p) > 1e-3)
      ++allowed_exceedances;
    pass = deterministic_ok && exceedances <= allowed_exceedances;
  }
};

}  // namespace interlace
