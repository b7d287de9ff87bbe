#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "json.hpp"
#include "sgdlab/rng.hpp"
#include "sgdlab/vec.hpp"

namespace sgdlab {

/// Per-step consistency classification of an acceleration residual against a
/// gradient. gamma_k = 1 iff the inner product is positive; gamma_l = 1 iff it
/// is non-positive while the residual is nonzero; a zero residual sets neither.
struct ConsistencyRecord {
  double inner = 0.0;
  int gamma_k = 0;
  int gamma_l = 0;
  double residual_norm_sq = 0.0;
  // element-wise random-vector bookkeeping (zero for every other path)
  std::uint64_t coord_accepts = 0;
  std::uint64_t coord_slots = 0;
  // set when the Gaussian candidate degenerated twice and the base was kept
  bool fallback = false;
};

/// The acceleration residual of a direction: r = g - grad. Only its direction
/// matters for classification; any positive rescaling classifies identically.
Vec residual(const Vec& g, const Vec& grad);

ConsistencyRecord classify(const Vec& r, const Vec& grad);

/// Keep g when its residual is consistent with grad, otherwise fall back to
/// the raw gradient. The returned direction never carries an inconsistent
/// residual, so a run wrapped this way records l = 0.
Vec reject_filter(const Vec& g, const Vec& grad);

enum class RvaMode { full, elementwise };

std::string to_string(RvaMode mode);

/// Deterministic core of the full-vector rule for a given candidate u:
/// base + (2 <base,u> / |u|^2) u when <base,u> > 0, otherwise base unchanged.
Vec rva_apply_full(const Vec& base, const Vec& u);

/// Per-coordinate d = 1 rule with candidate scalars u_j: a coordinate becomes
/// 3 * base_j when sign(u_j) matches sign(base_j), else stays base_j.
Vec rva_apply_elementwise(const Vec& base, const Vec& u);

struct RvaResult {
  Vec direction;
  ConsistencyRecord record;
};

/// Sample a standard Gaussian candidate and apply the chosen rule. The record
/// reports the realized consistency flags: rejected candidates are discarded,
/// so gamma_l is always 0 here.
RvaResult rva_wrap(const Vec& base, RandomStream& rng, RvaMode mode);

struct LedgerSnapshot {
  std::uint64_t k = 0;
  std::uint64_t l = 0;
  std::uint64_t skipped = 0;
  std::uint64_t T_seen = 0;
  std::uint64_t u_count = 0;
  double u_mean = 0.0;
  double u_min = 0.0;
  double u_max = 0.0;
  std::uint64_t B_count = 0;
  double B_mean = 0.0;
  double B_max = 0.0;
  std::uint64_t coord_accepts = 0;
  std::uint64_t coord_slots = 0;

  nlohmann::json to_json() const;
};

/// Running tally of the framework constants observed over a run: the k / l
/// counters, alignment ratios of the residual against the full gradient
/// (u-ratios, bracketed by u_a / u_b) and against the stochastic gradient
/// (B-ratios). Ratios lie in [0, 1] by Cauchy-Schwarz.
class AccelLedger {
 public:
  /// full_grad may be null when the full gradient was not computed this step.
  /// Degenerate norms (zero residual or zero gradient) skip ratio recording
  /// and bump the skipped counter.
  void update(const ConsistencyRecord& rec, const Vec* full_grad, const Vec& stoch_grad,
              const Vec& r);

  std::uint64_t k() const { return k_; }
  std::uint64_t l() const { return l_; }
  std::uint64_t T_seen() const { return T_seen_; }
  std::uint64_t skipped() const { return skipped_; }
  std::uint64_t coord_accepts() const { return coord_accepts_; }
  std::uint64_t coord_slots() const { return coord_slots_; }

  /// Per-coordinate acceptance count scaled to one d = 1 problem: the k that
  /// enters the element-wise rate formula.
  double k_hat_elementwise(std::size_t d) const;

  LedgerSnapshot snapshot() const;

 private:
  std::uint64_t k_ = 0;
  std::uint64_t l_ = 0;
  std::uint64_t skipped_ = 0;
  std::uint64_t T_seen_ = 0;
  std::uint64_t coord_accepts_ = 0;
  std::uint64_t coord_slots_ = 0;

  std::uint64_t u_count_ = 0;
  double u_sum_ = 0.0;
  double u_min_ = std::numeric_limits<double>::infinity();
  double u_max_ = -std::numeric_limits<double>::infinity();

  std::uint64_t B_count_ = 0;
  double B_sum_ = 0.0;
  double B_max_ = -std::numeric_limits<double>::infinity();
};

}  // namespace sgdlab
