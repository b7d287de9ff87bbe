#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgdlab/rng.hpp"
#include "sgdlab/vec.hpp"

namespace sgdlab::stats {

/// The six expectation identities checked by Monte Carlo, for y ~ N(0, b*I_d)
/// and a fixed vector x:
///   P1: E[y_i^2] = b
///   P2: E[<x,y>^2] = b |x|^2
///   P3: E[y_i y_j / |y|^2] = 0                      (i != j)
///   P4: E[y_i^2 / |y|^2] = 1/d                      (squared-denominator reading)
///   P5: E[<x,y>^2 / |y|^2] = |x|^2 / d
///   P6: E[<x,y>^2 / |y|^2 * 1{<x,y> > 0}] = |x|^2 / (2d)
/// P6 averages the statistic over all draws with rejected draws contributing
/// zero; that restricted mean is the quantity the acceleration analysis
/// consumes (the per-step expected boost), and it is half of P5 by symmetry.
enum class LemmaPart { P1, P2, P3, P4, P5, P6 };

std::string to_string(LemmaPart part);

struct McReport {
  std::string part;
  std::size_t d = 0;
  double b = 1.0;
  double estimate = 0.0;
  double target = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  double z = 5.0;         // stderr multiplier in the pass rule
  double rel_tol = 0.02;  // relative tolerance in the pass rule
  double abs_tol = 0.0;   // rel_tol * |target|, recorded explicitly
  bool pass = false;
  std::size_t conditional_count = 0;  // P6: accepted draws
  std::string note;

  nlohmann::json to_json() const;
};

/// Monte-Carlo check of one identity. Pass rule:
/// |estimate - target| <= max(rel_tol * |target|, z * std_error).
/// P2/P5/P6 require x with x.size() == d; P3 requires d >= 2. P6 with fewer
/// than 100 accepted draws is inconclusive (pass = false, reason in note).
McReport verify_expectation(LemmaPart part, std::size_t d, double b,
                            const std::optional<Vec>& x, std::size_t n_samples,
                            RandomStream& rng, double z = 5.0, double rel_tol = 0.02);

/// Survival function of the chi-square distribution (regularized upper
/// incomplete gamma Q(dof/2, x/2)).
double chi2_sf(double x, double dof);

struct KDistributionResult {
  McReport tail;                        // empirical Pr[k >= ceil(T/2)] vs exact
  McReport chi2;                        // histogram chi-square: estimate = p-value
  std::vector<std::uint64_t> histogram; // counts of k over [0, T]
  double chi2_stat = 0.0;
  std::size_t bins = 0;
};

/// Simulates n_runs sequences of T sign-agreement events (fresh Gaussian
/// candidate against a fixed nonzero vector, accepted iff the inner product is
/// positive) and compares the empirical law of k against the exact
/// Binomial(T, 1/2). Tail pass band: 4 standard errors. Chi-square uses
/// equal-probability-mass bins and passes at significance 0.001.
KDistributionResult verify_k_distribution(int T, std::size_t n_runs, RandomStream& rng);

/// The full verification suite: P1..P6 for d in {1, 2, 10, 100} (P3 needs
/// d >= 2) plus the k-distribution check at T = 100. Parts run concurrently on
/// forked substreams; every report records its own seed.
std::vector<McReport> run_lemma_suite(std::size_t n_samples, std::uint64_t seed);

}  // namespace sgdlab::stats
