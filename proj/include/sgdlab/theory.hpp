#pragma once

#include <stdexcept>
#include <string>

namespace sgdlab::theory {

/// Thrown when a rate denominator T + 2*k*u_a - 2*l*u_b is not positive; the
/// bound is meaningless for such inputs.
class InvalidBound : public std::runtime_error {
 public:
  InvalidBound(const std::string& msg, double denominator)
      : std::runtime_error(msg), denominator_(denominator) {}
  double denominator() const { return denominator_; }

 private:
  double denominator_;
};

/// sqrt(T + 8*k*B) / (T + 2*k*u_a - 2*l*u_b).
/// k = l = 0 reduces to 1/sqrt(T) (returned in exactly that form).
double unified_rate(double T, double k, double l, double u_a, double u_b, double B);

/// rate * sqrt(2 * (f0 - f_star) * L * sigma^2).
double unified_bound(double rate, double f0, double f_star, double L, double sigma);

/// sqrt(2 * (f0 - f_star) / (L * sigma^2)) / sqrt(T + 8*k*B).
double optimal_alpha(double T, double k, double B, double f0, double f_star, double L,
                     double sigma);

/// sqrt(T + 8*k*B) / (T + 2*k*u_a): the all-rejections-filtered rate.
double reject_rate(double T, double k, double u_a, double B);

/// sqrt(T + 4*k/d) / (T + 2*k/d): random-vector acceleration rate.
double rva_rate(double T, double k, double d);

/// sqrt(2 * (f0 - f_star) / (L * sigma^2)) / sqrt(T + 4*k/d).
double rva_alpha(double T, double k, double d, double f0, double f_star, double L,
                 double sigma);

/// C(T, a) / 2^T, computed in log space (stable up to T ~ 10^4).
double binom_pmf(int T, int a);

/// sum_{i >= a} binom_pmf(T, i).
double binom_tail_geq(int T, int a);

struct KLemmaReport {
  int T = 0;
  double tail = 0.0;       // Pr[k > floor(T/3)] for k ~ Binomial(T, 1/2)
  double threshold = 0.0;  // 1 - 1/T
  bool in_scope = false;   // the claim is made for T > 128 only
  bool holds = false;      // tail >= threshold
};

/// Exact binomial check of the k-law: Pr[k > floor(T/3)] >= 1 - 1/T.
KLemmaReport check_k_lemma(int T);

}  // namespace sgdlab::theory
