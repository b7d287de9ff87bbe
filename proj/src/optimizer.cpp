#include "sgdlab/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace sgdlab {

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::sgdm: return "sgdm";
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::lion: return "lion";
  }
  throw std::logic_error("unreachable optimizer kind");
}

OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "sgdm") return OptimizerKind::sgdm;
  if (s == "adam") return OptimizerKind::adam;
  if (s == "lion") return OptimizerKind::lion;
  throw std::invalid_argument("unknown optimizer kind: " + s);
}

OptimizerHyper default_hyper(OptimizerKind kind) {
  OptimizerHyper h;
  if (kind == OptimizerKind::lion) h.beta2 = 0.99;
  return h;
}

Optimizer::Optimizer(OptimizerKind kind, std::size_t d, OptimizerHyper hyper)
    : kind_(kind), d_(d), hyper_(hyper) {
  if (d < 1) throw std::invalid_argument("optimizer: dimension must be >= 1");
  if (hyper.mu < 0.0 || hyper.mu >= 1.0) {
    throw std::invalid_argument("optimizer: mu must be in [0, 1)");
  }
  if (hyper.beta1 < 0.0 || hyper.beta1 >= 1.0 || hyper.beta2 < 0.0 || hyper.beta2 >= 1.0) {
    throw std::invalid_argument("optimizer: betas must be in [0, 1)");
  }
  if (!(hyper.eps > 0.0)) throw std::invalid_argument("optimizer: eps must be positive");
  if (kind == OptimizerKind::sgdm || kind == OptimizerKind::adam ||
      kind == OptimizerKind::lion) {
    m_.assign(d, 0.0);
  }
  if (kind == OptimizerKind::adam) v_.assign(d, 0.0);
}

Optimizer Optimizer::make(OptimizerKind kind, std::size_t d) {
  return Optimizer(kind, d, default_hyper(kind));
}

Vec Optimizer::propose_direction(const Vec& grad) {
  if (grad.size() != d_) {
    throw std::invalid_argument("propose_direction: dimension mismatch");
  }
  ++t_;
  switch (kind_) {
    case OptimizerKind::sgd:
      return grad;
    case OptimizerKind::sgdm: {
      for (std::size_t j = 0; j < d_; ++j) m_[j] = hyper_.mu * m_[j] + grad[j];
      return m_;
    }
    case OptimizerKind::adam: {
      beta1_pow_ *= hyper_.beta1;
      beta2_pow_ *= hyper_.beta2;
      Vec g(d_);
      for (std::size_t j = 0; j < d_; ++j) {
        m_[j] = hyper_.beta1 * m_[j] + (1.0 - hyper_.beta1) * grad[j];
        v_[j] = hyper_.beta2 * v_[j] + (1.0 - hyper_.beta2) * grad[j] * grad[j];
        const double mhat = m_[j] / (1.0 - beta1_pow_);
        const double vhat = v_[j] / (1.0 - beta2_pow_);
        g[j] = mhat / (std::sqrt(vhat) + hyper_.eps);
      }
      return g;
    }
    case OptimizerKind::lion: {
      Vec g(d_);
      for (std::size_t j = 0; j < d_; ++j) {
        const double c = hyper_.beta1 * m_[j] + (1.0 - hyper_.beta1) * grad[j];
        g[j] = (c > 0.0) ? 1.0 : (c < 0.0 ? -1.0 : 0.0);
        m_[j] = hyper_.beta2 * m_[j] + (1.0 - hyper_.beta2) * grad[j];
      }
      return g;
    }
  }
  throw std::logic_error("unreachable optimizer kind");
}

}  // namespace sgdlab
