#pragma once

#include <cstddef>
#include <string>

#include "sgdlab/vec.hpp"

namespace sgdlab {

enum class OptimizerKind { sgd, sgdm, adam, lion };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& s);

struct OptimizerHyper {
  double mu = 0.8;      // sgdm momentum
  double beta1 = 0.9;   // adam/lion first-moment decay
  double beta2 = 0.999; // adam second-moment decay (lion default: 0.99)
  double eps = 1e-8;    // adam denominator floor
};

OptimizerHyper default_hyper(OptimizerKind kind);

/// First-order stepper emitting the update direction g_t for
/// x_{t+1} = x_t - alpha * g_t. The learning rate is applied by the caller so
/// acceleration wrappers can intercept g_t directly.
///
/// Recurrences:
///   sgd:  g = grad
///   sgdm: m <- mu*m + grad;                       g = m
///   adam: m <- b1*m + (1-b1)*grad;  v <- b2*v + (1-b2)*grad^2;
///         g = (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)     elementwise
///   lion: c = b1*m + (1-b1)*grad;   g = sign(c)  (sign(0) = 0);
///         m <- b2*m + (1-b2)*grad
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, std::size_t d, OptimizerHyper hyper);
  static Optimizer make(OptimizerKind kind, std::size_t d);

  Vec propose_direction(const Vec& grad);

  OptimizerKind kind() const { return kind_; }
  std::size_t dim() const { return d_; }
  std::size_t step_count() const { return t_; }
  const OptimizerHyper& hyper() const { return hyper_; }
  const Vec& first_moment() const { return m_; }
  const Vec& second_moment() const { return v_; }

 private:
  OptimizerKind kind_;
  std::size_t d_;
  OptimizerHyper hyper_;
  std::size_t t_ = 0;
  Vec m_;
  Vec v_;
  double beta1_pow_ = 1.0;
  double beta2_pow_ = 1.0;
};

}  // namespace sgdlab
