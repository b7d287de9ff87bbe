#include "sgdlab/theory.hpp"

#include <cmath>
#include <numbers>

namespace sgdlab::theory {

namespace {

void require_rate_inputs(double T, double k, double l, double u_a, double u_b, double B) {
  if (!(T > 0.0)) throw std::invalid_argument("rate: T must be positive");
  if (k < 0.0 || l < 0.0) throw std::invalid_argument("rate: k and l must be >= 0");
  if (u_a < 0.0 || u_b < 0.0 || B < 0.0) {
    throw std::invalid_argument("rate: u_a, u_b, B must be >= 0");
  }
}

double scale_c(double f0, double f_star, double L, double sigma) {
  if (f0 < f_star) throw std::invalid_argument("f0 must be >= f_star");
  if (!(L > 0.0)) throw std::invalid_argument("L must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  return std::sqrt(2.0 * (f0 - f_star) / (L * sigma * sigma));
}

}  // namespace

double unified_rate(double T, double k, double l, double u_a, double u_b, double B) {
  require_rate_inputs(T, k, l, u_a, u_b, B);
  if (k == 0.0 && l == 0.0) return 1.0 / std::sqrt(T);
  const double denom = T + 2.0 * k * u_a - 2.0 * l * u_b;
  if (!(denom > 0.0)) {
    throw InvalidBound("unified_rate: non-positive denominator T + 2*k*u_a - 2*l*u_b = " +
                           std::to_string(denom) + " (T=" + std::to_string(T) +
                           ", k=" + std::to_string(k) + ", l=" + std::to_string(l) +
                           ", u_a=" + std::to_string(u_a) + ", u_b=" + std::to_string(u_b) +
                           ")",
                       denom);
  }
  return std::sqrt(T + 8.0 * k * B) / denom;
}

double unified_bound(double rate, double f0, double f_star, double L, double sigma) {
  if (f0 < f_star) throw std::invalid_argument("unified_bound: f0 must be >= f_star");
  if (!(L > 0.0) || !(sigma > 0.0)) {
    throw std::invalid_argument("unified_bound: L and sigma must be positive");
  }
  return rate * std::sqrt(2.0 * (f0 - f_star) * L * sigma * sigma);
}

double optimal_alpha(double T, double k, double B, double f0, double f_star, double L,
                     double sigma) {
  require_rate_inputs(T, k, 0.0, 0.0, 0.0, B);
  return scale_c(f0, f_star, L, sigma) / std::sqrt(T + 8.0 * k * B);
}

double reject_rate(double T, double k, double u_a, double B) {
  return unified_rate(T, k, 0.0, u_a, 0.0, B);
}

double rva_rate(double T, double k, double d) {
  if (!(T > 0.0)) throw std::invalid_argument("rva_rate: T must be positive");
  if (!(d >= 1.0)) throw std::invalid_argument("rva_rate: d must be >= 1");
  if (k < 0.0) throw std::invalid_argument("rva_rate: k must be >= 0");
  if (k == 0.0) return 1.0 / std::sqrt(T);
  return std::sqrt(T + 4.0 * k / d) / (T + 2.0 * k / d);
}

double rva_alpha(double T, double k, double d, double f0, double f_star, double L,
                 double sigma) {
  if (!(T > 0.0)) throw std::invalid_argument("rva_alpha: T must be positive");
  if (!(d >= 1.0)) throw std::invalid_argument("rva_alpha: d must be >= 1");
  if (k < 0.0) throw std::invalid_argument("rva_alpha: k must be >= 0");
  return scale_c(f0, f_star, L, sigma) / std::sqrt(T + 4.0 * k / d);
}

namespace {

// Extended precision keeps the pmf row summable to 1 within 1e-12 up to T ~ 10^4.
long double binom_pmf_l(int T, int a) {
  const long double logp = std::lgamma(static_cast<long double>(T) + 1.0L) -
                           std::lgamma(static_cast<long double>(a) + 1.0L) -
                           std::lgamma(static_cast<long double>(T - a) + 1.0L) -
                           static_cast<long double>(T) * std::numbers::ln2_v<long double>;
  return std::exp(logp);
}

void require_binom_range(int T, int a, const char* where) {
  if (T < 0) throw std::invalid_argument(std::string(where) + ": T must be >= 0");
  if (a < 0 || a > T) {
    throw std::invalid_argument(std::string(where) + ": a out of range [0, T], got a=" +
                                std::to_string(a) + ", T=" + std::to_string(T));
  }
}

}  // namespace

double binom_pmf(int T, int a) {
  require_binom_range(T, a, "binom_pmf");
  return static_cast<double>(binom_pmf_l(T, a));
}

double binom_tail_geq(int T, int a) {
  require_binom_range(T, a, "binom_tail_geq");
  long double sum = 0.0L;
  for (int i = T; i >= a; --i) sum += binom_pmf_l(T, i);
  return static_cast<double>(sum);
}

KLemmaReport check_k_lemma(int T) {
  if (T < 1) throw std::invalid_argument("check_k_lemma: T must be >= 1");
  KLemmaReport r;
  r.T = T;
  const int u = T / 3;
  r.tail = (u + 1 <= T) ? binom_tail_geq(T, u + 1) : 0.0;
  r.threshold = 1.0 - 1.0 / static_cast<double>(T);
  r.in_scope = T > 128;
  r.holds = r.tail >= r.threshold;
  return r;
}

}  // namespace sgdlab::theory
