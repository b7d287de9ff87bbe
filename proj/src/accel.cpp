#include "sgdlab/accel.hpp"

#include <stdexcept>

namespace sgdlab {

Vec residual(const Vec& g, const Vec& grad) { return sub(g, grad); }

ConsistencyRecord classify(const Vec& r, const Vec& grad) {
  require_same_dim(r, grad, "classify");
  ConsistencyRecord rec;
  rec.inner = dot(r, grad);
  rec.residual_norm_sq = norm_sq(r);
  rec.gamma_k = rec.inner > 0.0 ? 1 : 0;
  rec.gamma_l = (rec.inner <= 0.0 && rec.residual_norm_sq != 0.0) ? 1 : 0;
  return rec;
}

Vec reject_filter(const Vec& g, const Vec& grad) {
  require_same_dim(g, grad, "reject_filter");
  return dot(sub(g, grad), grad) > 0.0 ? g : grad;
}

std::string to_string(RvaMode mode) {
  return mode == RvaMode::full ? "full" : "elementwise";
}

Vec rva_apply_full(const Vec& base, const Vec& u) {
  require_same_dim(base, u, "rva_apply_full");
  const double inner = dot(base, u);
  if (!(inner > 0.0)) return base;
  const double unsq = norm_sq(u);
  if (unsq == 0.0) return base;
  Vec dir = base;
  axpy(dir, 2.0 * inner / unsq, u);
  return dir;
}

Vec rva_apply_elementwise(const Vec& base, const Vec& u) {
  require_same_dim(base, u, "rva_apply_elementwise");
  Vec dir = base;
  for (std::size_t j = 0; j < base.size(); ++j) {
    if (base[j] * u[j] > 0.0) dir[j] = 3.0 * base[j];
  }
  return dir;
}

RvaResult rva_wrap(const Vec& base, RandomStream& rng, RvaMode mode) {
  if (!all_finite(base)) throw std::invalid_argument("rva_wrap: base must be finite");
  RvaResult res;
  const std::size_t d = base.size();
  if (mode == RvaMode::full) {
    Vec u = sample_gaussian(rng, d, 1.0);
    if (norm_sq(u) == 0.0) {
      u = sample_gaussian(rng, d, 1.0);  // measure-zero; one retry
      if (norm_sq(u) == 0.0) {
        res.direction = base;
        res.record.fallback = true;
        return res;
      }
    }
    const double inner = dot(base, u);
    res.record.inner = inner;
    if (inner > 0.0) {
      res.direction = base;
      axpy(res.direction, 2.0 * inner / norm_sq(u), u);
      res.record.gamma_k = 1;
      res.record.residual_norm_sq = norm_sq(sub(res.direction, base));
    } else {
      // Rejected candidates are discarded: the realized residual is zero.
      res.direction = base;
    }
    return res;
  }
  const Vec u = sample_gaussian(rng, d, 1.0);
  res.direction = base;
  for (std::size_t j = 0; j < d; ++j) {
    if (base[j] * u[j] > 0.0) {
      res.direction[j] = 3.0 * base[j];
      ++res.record.coord_accepts;
    }
  }
  res.record.coord_slots = d;
  const Vec r = sub(res.direction, base);
  res.record.residual_norm_sq = norm_sq(r);
  res.record.inner = dot(r, base);
  res.record.gamma_k = res.record.inner > 0.0 ? 1 : 0;
  return res;
}

void AccelLedger::update(const ConsistencyRecord& rec, const Vec* full_grad,
                         const Vec& stoch_grad, const Vec& r) {
  ++T_seen_;
  k_ += rec.gamma_k;
  l_ += rec.gamma_l;
  coord_accepts_ += rec.coord_accepts;
  coord_slots_ += rec.coord_slots;

  const double rnsq = norm_sq(r);
  if (rnsq == 0.0) {
    ++skipped_;
    return;
  }
  const double snsq = norm_sq(stoch_grad);
  if (snsq > 0.0) {
    const double ip = dot(stoch_grad, r);
    const double ratio = (ip * ip) / (rnsq * snsq);
    ++B_count_;
    B_sum_ += ratio;
    if (ratio > B_max_) B_max_ = ratio;
  } else {
    ++skipped_;
  }
  if (full_grad != nullptr) {
    const double fnsq = norm_sq(*full_grad);
    if (fnsq > 0.0) {
      const double ip = dot(*full_grad, r);
      const double ratio = (ip * ip) / (rnsq * fnsq);
      ++u_count_;
      u_sum_ += ratio;
      if (ratio < u_min_) u_min_ = ratio;
      if (ratio > u_max_) u_max_ = ratio;
    }
  }
}

double AccelLedger::k_hat_elementwise(std::size_t d) const {
  if (d == 0) throw std::invalid_argument("k_hat_elementwise: d must be >= 1");
  return static_cast<double>(coord_accepts_) / static_cast<double>(d);
}

LedgerSnapshot AccelLedger::snapshot() const {
  LedgerSnapshot s;
  s.k = k_;
  s.l = l_;
  s.skipped = skipped_;
  s.T_seen = T_seen_;
  s.u_count = u_count_;
  if (u_count_ > 0) {
    s.u_mean = u_sum_ / static_cast<double>(u_count_);
    s.u_min = u_min_;
    s.u_max = u_max_;
  }
  s.B_count = B_count_;
  if (B_count_ > 0) {
    s.B_mean = B_sum_ / static_cast<double>(B_count_);
    s.B_max = B_max_;
  }
  s.coord_accepts = coord_accepts_;
  s.coord_slots = coord_slots_;
  return s;
}

nlohmann::json LedgerSnapshot::to_json() const {
  nlohmann::json j;
  j["k"] = k;
  j["l"] = l;
  j["skipped"] = skipped;
  j["T_seen"] = T_seen;
  j["u_count"] = u_count;
  j["u_mean"] = u_count > 0 ? nlohmann::json(u_mean) : nlohmann::json(nullptr);
  j["u_min"] = u_count > 0 ? nlohmann::json(u_min) : nlohmann::json(nullptr);
  j["u_max"] = u_count > 0 ? nlohmann::json(u_max) : nlohmann::json(nullptr);
  j["B_count"] = B_count;
  j["B_mean"] = B_count > 0 ? nlohmann::json(B_mean) : nlohmann::json(nullptr);
  j["B_max"] = B_count > 0 ? nlohmann::json(B_max) : nlohmann::json(nullptr);
  j["coord_accepts"] = coord_accepts;
  j["coord_slots"] = coord_slots;
  return j;
}

}  // namespace sgdlab
