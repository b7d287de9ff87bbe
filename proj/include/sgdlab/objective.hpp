#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgdlab/rng.hpp"
#include "sgdlab/vec.hpp"

namespace sgdlab {

enum class ObjectiveKind { quadratic, logistic, sigmoid_regression, noisy_rastrigin };

std::string to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(const std::string& s);

struct ObjectiveOptions {
  double box_halfwidth = 5.0;  // iterate box for quadratic (rastrigin is pinned to 5.12)
  double noise_std = 1.0;      // rastrigin per-component noise scale
  double row_bias = 0.0;       // strength of a shared direction mixed into the rows
  double teacher_scale = 1.0;  // scale of the label-generating weight vector

  static ObjectiveOptions from_json(const nlohmann::json& j, ObjectiveKind kind);
  nlohmann::json to_json(ObjectiveKind kind) const;
};

/// A finite-sum objective f(x) = (1/n) sum_i f_i(x) with certified smoothness
/// constant L_ref, per-component gradient bound sigma_ref (valid on the
/// declared box), and a reference optimum value.
///
/// full_value / full_gradient are literally the mean of the n component
/// calls, so unbiasedness of a uniformly sampled component gradient holds by
/// construction.
class Objective {
 public:
  static Objective make(ObjectiveKind kind, std::size_t d, std::size_t n,
                        std::uint64_t seed, const ObjectiveOptions& options = {});

  /// Quadratic with caller-supplied rows and targets: f_i = 1/2 (a_i'x - b_i)^2.
  /// f_star is optional because the least-squares optimum of arbitrary data is
  /// not computed here.
  static Objective quadratic_from(std::vector<Vec> rows, Vec targets, double box_halfwidth,
                                  std::optional<double> f_star = std::nullopt);

  double component_value(std::size_t i, const Vec& x) const;
  Vec component_gradient(std::size_t i, const Vec& x) const;
  double full_value(const Vec& x) const;
  Vec full_gradient(const Vec& x) const;
  std::size_t sample_component(RandomStream& rng) const;

  /// max over sampled pairs (x, y) in the box of |grad f(x) - grad f(y)| / |x - y|.
  /// A lower estimate of the true Lipschitz constant of grad f.
  double estimate_L(RandomStream& rng, std::size_t num_pairs) const;

  /// max over sampled (x, i) in the box of |grad f_i(x)|; lower estimate of sigma.
  double estimate_sigma(RandomStream& rng, std::size_t num_probes) const;

  Vec random_box_point(RandomStream& rng) const;

  ObjectiveKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  std::size_t dim() const { return d_; }
  std::size_t num_components() const { return n_; }
  double L_ref() const { return L_ref_; }
  double sigma_ref() const { return sigma_ref_; }
  std::optional<double> f_star_ref() const { return f_star_ref_; }
  bool f_star_exact() const { return f_star_exact_; }
  double box_halfwidth() const { return box_halfwidth_; }
  bool needs_projection() const { return needs_projection_; }
  const Vec& x0() const { return x0_; }
  std::uint64_t seed() const { return seed_; }
  const Vec& row(std::size_t i) const { return rows_[i]; }

  nlohmann::json to_json() const;
  static Objective from_json(const nlohmann::json& j);

 private:
  Objective() = default;

  ObjectiveKind kind_ = ObjectiveKind::quadratic;
  std::string name_;
  std::size_t d_ = 0;
  std::size_t n_ = 0;
  std::uint64_t seed_ = 0;
  ObjectiveOptions options_;

  std::vector<Vec> rows_;   // a_i (quadratic/logistic/sigmoid) or noise vectors (rastrigin)
  Vec targets_;             // b_i or labels y_i (empty for rastrigin)

  double L_ref_ = 0.0;
  double sigma_ref_ = 0.0;
  std::optional<double> f_star_ref_;
  bool f_star_exact_ = false;
  double box_halfwidth_ = 5.0;
  bool needs_projection_ = false;
  Vec x0_;
};

Objective make_objective(ObjectiveKind kind, std::size_t d, std::size_t n,
                         std::uint64_t seed, const ObjectiveOptions& options = {});

}  // namespace sgdlab
