#include "sgdlab/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sgdlab {

namespace {

constexpr double kRastriginBox = 5.12;

// Logistic sigmoid, stable for both signs of z.
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(-m)), stable for both signs of m.
double softplus_neg(double m) {
  if (m >= 0.0) return std::log1p(std::exp(-m));
  return -m + std::log1p(std::exp(m));
}

// Curvature bound for (s(z) - y)^2 with y in [0, 1]:
// |d/dz 2(s - y)s'| <= 2 (max s'^2 + max |s''|) = 2 (1/16 + 1/(6*sqrt(3))).
const double kSigmoidRegressionCurvature =
    2.0 * (1.0 / 16.0 + 1.0 / (6.0 * std::sqrt(3.0)));

// Largest eigenvalue of a symmetric d x d matrix, cyclic Jacobi sweeps.
double sym_max_eigenvalue(std::vector<double> m, std::size_t d) {
  if (d == 1) return m[0];
  auto at = [&](std::size_t r, std::size_t c) -> double& { return m[r * d + c]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += at(p, q) * at(p, q);
    double diag = 0.0;
    for (std::size_t p = 0; p < d; ++p) diag += at(p, p) * at(p, p);
    if (off <= 1e-28 * std::max(diag, 1e-300)) break;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < d; ++i) {
          const double aip = at(i, p), aiq = at(i, q);
          at(i, p) = c * aip - s * aiq;
          at(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < d; ++i) {
          const double api = at(p, i), aqi = at(q, i);
          at(p, i) = c * api - s * aqi;
          at(q, i) = s * api + c * aqi;
        }
      }
    }
  }
  double lmax = at(0, 0);
  for (std::size_t p = 1; p < d; ++p) lmax = std::max(lmax, at(p, p));
  return lmax;
}

Vec unit_row(RandomStream& rng, std::size_t d, double row_bias) {
  for (;;) {
    Vec a(d);
    for (std::size_t j = 0; j < d; ++j) a[j] = rng.gaussian() + row_bias;
    const double nrm = norm(a);
    if (nrm > 0.0) {
      for (double& v : a) v /= nrm;
      return a;
    }
  }
}

}  // namespace

std::string to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::quadratic: return "quadratic";
    case ObjectiveKind::logistic: return "logistic";
    case ObjectiveKind::sigmoid_regression: return "sigmoid_regression";
    case ObjectiveKind::noisy_rastrigin: return "noisy_rastrigin";
  }
  throw std::logic_error("unreachable objective kind");
}

ObjectiveKind objective_kind_from_string(const std::string& s) {
  if (s == "quadratic") return ObjectiveKind::quadratic;
  if (s == "logistic") return ObjectiveKind::logistic;
  if (s == "sigmoid_regression") return ObjectiveKind::sigmoid_regression;
  if (s == "noisy_rastrigin") return ObjectiveKind::noisy_rastrigin;
  throw std::invalid_argument("unknown objective kind: " + s);
}

ObjectiveOptions ObjectiveOptions::from_json(const nlohmann::json& j, ObjectiveKind kind) {
  ObjectiveOptions opt;
  if (j.is_null()) return opt;
  if (!j.is_object()) throw std::invalid_argument("objective options must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "box_halfwidth" && kind == ObjectiveKind::quadratic) {
      opt.box_halfwidth = value.get<double>();
    } else if (key == "noise_std" && kind == ObjectiveKind::noisy_rastrigin) {
      opt.noise_std = value.get<double>();
    } else if ((key == "row_bias" || key == "teacher_scale") &&
               (kind == ObjectiveKind::logistic ||
                kind == ObjectiveKind::sigmoid_regression)) {
      (key == "row_bias" ? opt.row_bias : opt.teacher_scale) = value.get<double>();
    } else {
      throw std::invalid_argument("unknown objective option '" + key + "' for kind " +
                                  to_string(kind));
    }
  }
  return opt;
}

nlohmann::json ObjectiveOptions::to_json(ObjectiveKind kind) const {
  nlohmann::json j = nlohmann::json::object();
  switch (kind) {
    case ObjectiveKind::quadratic: j["box_halfwidth"] = box_halfwidth; break;
    case ObjectiveKind::noisy_rastrigin: j["noise_std"] = noise_std; break;
    case ObjectiveKind::logistic:
    case ObjectiveKind::sigmoid_regression:
      j["row_bias"] = row_bias;
      j["teacher_scale"] = teacher_scale;
      break;
  }
  return j;
}

Objective Objective::make(ObjectiveKind kind, std::size_t d, std::size_t n,
                          std::uint64_t seed, const ObjectiveOptions& options) {
  if (d < 1 || n < 1) throw std::invalid_argument("make_objective: d and n must be >= 1");
  Objective obj;
  obj.kind_ = kind;
  obj.d_ = d;
  obj.n_ = n;
  obj.seed_ = seed;
  obj.options_ = options;
  obj.name_ = to_string(kind) + "_d" + std::to_string(d) + "_n" + std::to_string(n) +
              "_s" + std::to_string(seed);

  RandomStream master(seed);
  RandomStream row_rng = master.fork(1);
  RandomStream teacher_rng = master.fork(2);

  switch (kind) {
    case ObjectiveKind::quadratic: {
      if (!(options.box_halfwidth > 0.0)) {
        throw std::invalid_argument("quadratic: box_halfwidth must be positive");
      }
      obj.box_halfwidth_ = options.box_halfwidth;
      obj.needs_projection_ = true;
      obj.rows_.reserve(n);
      for (std::size_t i = 0; i < n; ++i) obj.rows_.push_back(unit_row(row_rng, d, 0.0));
      // Consistent system: targets come from an interior point, so f* = 0 on the box.
      Vec xhat(d);
      for (std::size_t j = 0; j < d; ++j) {
        xhat[j] = (teacher_rng.uniform() - 0.5) * options.box_halfwidth;
      }
      obj.targets_.resize(n);
      double sigma = 0.0;
      const double r2 = std::sqrt(static_cast<double>(d)) * options.box_halfwidth;
      for (std::size_t i = 0; i < n; ++i) {
        obj.targets_[i] = dot(obj.rows_[i], xhat);
        sigma = std::max(sigma, r2 + std::abs(obj.targets_[i]));  // unit rows
      }
      std::vector<double> hess(d * d, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < d; ++r)
          for (std::size_t c = 0; c < d; ++c)
            hess[r * d + c] += obj.rows_[i][r] * obj.rows_[i][c] / static_cast<double>(n);
      obj.L_ref_ = sym_max_eigenvalue(std::move(hess), d);
      obj.sigma_ref_ = sigma;
      obj.f_star_ref_ = 0.0;
      obj.f_star_exact_ = true;
      obj.x0_ = Vec(d, std::min(1.0, 0.5 * options.box_halfwidth));
      break;
    }
    case ObjectiveKind::logistic:
    case ObjectiveKind::sigmoid_regression: {
      obj.box_halfwidth_ = 5.0;
      obj.needs_projection_ = false;  // sigma bound holds globally
      obj.rows_.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        obj.rows_.push_back(unit_row(row_rng, d, options.row_bias));
      }
      Vec xhat(d);
      const double u0 = 1.5 / std::sqrt(static_cast<double>(d));
      for (std::size_t j = 0; j < d; ++j) {
        xhat[j] = options.teacher_scale * (u0 + teacher_rng.gaussian());
      }
      obj.targets_.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double z = dot(obj.rows_[i], xhat);
        obj.targets_[i] = (kind == ObjectiveKind::logistic) ? (z >= 0.0 ? 1.0 : -1.0)
                                                            : sigmoid(z);
      }
      if (kind == ObjectiveKind::logistic) {
        obj.L_ref_ = 0.25;       // max |a_i|^2 / 4, rows are unit
        obj.sigma_ref_ = 1.0;    // max |a_i|
        obj.f_star_ref_ = 0.0;   // certified lower bound only: the loss is positive
        obj.f_star_exact_ = false;
      } else {
        obj.L_ref_ = kSigmoidRegressionCurvature;  // times max |a_i|^2 = 1
        obj.sigma_ref_ = 1.0;
        obj.f_star_ref_ = 0.0;  // labels are realizable at xhat
        obj.f_star_exact_ = true;
      }
      obj.x0_ = Vec(d, 0.0);
      break;
    }
    case ObjectiveKind::noisy_rastrigin: {
      if (!(options.noise_std >= 0.0)) {
        throw std::invalid_argument("noisy_rastrigin: noise_std must be >= 0");
      }
      obj.box_halfwidth_ = kRastriginBox;
      obj.needs_projection_ = true;
      obj.rows_.assign(n, Vec(d, 0.0));
      Vec mean(d, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          obj.rows_[i][j] = options.noise_std * row_rng.gaussian();
          mean[j] += obj.rows_[i][j] / static_cast<double>(n);
        }
      }
      // Center the noise so the mean objective is exactly the deterministic one.
      double max_noise = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) obj.rows_[i][j] -= mean[j];
        max_noise = std::max(max_noise, norm(obj.rows_[i]));
      }
      const double per_coord = 2.0 * kRastriginBox + 20.0 * std::numbers::pi;
      obj.L_ref_ = 2.0 + 40.0 * std::numbers::pi * std::numbers::pi;
      obj.sigma_ref_ = std::sqrt(static_cast<double>(d)) * per_coord + max_noise;
      obj.f_star_ref_ = 0.0;
      obj.f_star_exact_ = true;
      obj.x0_ = Vec(d, 2.5);
      break;
    }
  }
  return obj;
}

Objective make_objective(ObjectiveKind kind, std::size_t d, std::size_t n,
                         std::uint64_t seed, const ObjectiveOptions& options) {
  return Objective::make(kind, d, n, seed, options);
}

Objective Objective::quadratic_from(std::vector<Vec> rows, Vec targets, double box_halfwidth,
                                    std::optional<double> f_star) {
  if (rows.empty()) throw std::invalid_argument("quadratic_from: need at least one row");
  if (rows.size() != targets.size()) {
    throw std::invalid_argument("quadratic_from: rows/targets size mismatch");
  }
  const std::size_t d = rows[0].size();
  if (d == 0) throw std::invalid_argument("quadratic_from: rows must be non-empty");
  for (const auto& r : rows) {
    if (r.size() != d) throw std::invalid_argument("quadratic_from: ragged rows");
  }
  if (!(box_halfwidth > 0.0)) {
    throw std::invalid_argument("quadratic_from: box_halfwidth must be positive");
  }
  Objective obj;
  obj.kind_ = ObjectiveKind::quadratic;
  obj.d_ = d;
  obj.n_ = rows.size();
  obj.name_ = "quadratic_custom_d" + std::to_string(d) + "_n" + std::to_string(rows.size());
  obj.rows_ = std::move(rows);
  obj.targets_ = std::move(targets);
  obj.box_halfwidth_ = box_halfwidth;
  obj.needs_projection_ = true;
  obj.options_.box_halfwidth = box_halfwidth;
  const double r2 = std::sqrt(static_cast<double>(d)) * box_halfwidth;
  double sigma = 0.0;
  std::vector<double> hess(d * d, 0.0);
  for (std::size_t i = 0; i < obj.n_; ++i) {
    const double an = norm(obj.rows_[i]);
    sigma = std::max(sigma, an * (an * r2 + std::abs(obj.targets_[i])));
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c)
        hess[r * d + c] += obj.rows_[i][r] * obj.rows_[i][c] / static_cast<double>(obj.n_);
  }
  obj.L_ref_ = sym_max_eigenvalue(std::move(hess), d);
  obj.sigma_ref_ = sigma;
  obj.f_star_ref_ = f_star;
  obj.f_star_exact_ = f_star.has_value();
  obj.x0_ = Vec(d, std::min(1.0, 0.5 * box_halfwidth));
  return obj;
}

double Objective::component_value(std::size_t i, const Vec& x) const {
  if (i >= n_) throw std::out_of_range("component_value: index out of range");
  if (x.size() != d_) throw std::invalid_argument("component_value: dimension mismatch");
  switch (kind_) {
    case ObjectiveKind::quadratic: {
      const double r = dot(rows_[i], x) - targets_[i];
      return 0.5 * r * r;
    }
    case ObjectiveKind::logistic:
      return softplus_neg(targets_[i] * dot(rows_[i], x));
    case ObjectiveKind::sigmoid_regression: {
      const double e = sigmoid(dot(rows_[i], x)) - targets_[i];
      return e * e;
    }
    case ObjectiveKind::noisy_rastrigin: {
      double v = 10.0 * static_cast<double>(d_);
      for (std::size_t j = 0; j < d_; ++j) {
        v += x[j] * x[j] - 10.0 * std::cos(2.0 * std::numbers::pi * x[j]);
      }
      return v + dot(rows_[i], x);
    }
  }
  throw std::logic_error("unreachable objective kind");
}

Vec Objective::component_gradient(std::size_t i, const Vec& x) const {
  if (i >= n_) throw std::out_of_range("component_gradient: index out of range");
  if (x.size() != d_) throw std::invalid_argument("component_gradient: dimension mismatch");
  switch (kind_) {
    case ObjectiveKind::quadratic: {
      const double r = dot(rows_[i], x) - targets_[i];
      return scale(rows_[i], r);
    }
    case ObjectiveKind::logistic: {
      const double y = targets_[i];
      const double z = y * dot(rows_[i], x);
      return scale(rows_[i], -y * sigmoid(-z));
    }
    case ObjectiveKind::sigmoid_regression: {
      const double s = sigmoid(dot(rows_[i], x));
      return scale(rows_[i], 2.0 * (s - targets_[i]) * s * (1.0 - s));
    }
    case ObjectiveKind::noisy_rastrigin: {
      Vec g(d_);
      for (std::size_t j = 0; j < d_; ++j) {
        g[j] = 2.0 * x[j] +
               20.0 * std::numbers::pi * std::sin(2.0 * std::numbers::pi * x[j]) +
               rows_[i][j];
      }
      return g;
    }
  }
  throw std::logic_error("unreachable objective kind");
}

double Objective::full_value(const Vec& x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += component_value(i, x);
  return s / static_cast<double>(n_);
}

Vec Objective::full_gradient(const Vec& x) const {
  Vec g(d_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) axpy(g, 1.0, component_gradient(i, x));
  for (double& v : g) v /= static_cast<double>(n_);
  return g;
}

std::size_t Objective::sample_component(RandomStream& rng) const {
  return rng.uniform_index(n_);
}

Vec Objective::random_box_point(RandomStream& rng) const {
  Vec x(d_);
  for (std::size_t j = 0; j < d_; ++j) {
    x[j] = (2.0 * rng.uniform() - 1.0) * box_halfwidth_;
  }
  return x;
}

double Objective::estimate_L(RandomStream& rng, std::size_t num_pairs) const {
  if (num_pairs < 1) throw std::invalid_argument("estimate_L: num_pairs must be >= 1");
  double best = 0.0;
  std::size_t used = 0;
  for (std::size_t p = 0; p < num_pairs; ++p) {
    const Vec x = random_box_point(rng);
    const Vec y = random_box_point(rng);
    const Vec diff = sub(x, y);
    const double dn = norm(diff);
    if (dn == 0.0) continue;
    ++used;
    best = std::max(best, norm(sub(full_gradient(x), full_gradient(y))) / dn);
  }
  if (used == 0) throw std::runtime_error("estimate_L: all sampled pairs were degenerate");
  return best;
}

double Objective::estimate_sigma(RandomStream& rng, std::size_t num_probes) const {
  if (num_probes < 1) throw std::invalid_argument("estimate_sigma: num_probes must be >= 1");
  double best = 0.0;
  for (std::size_t p = 0; p < num_probes; ++p) {
    const Vec x = random_box_point(rng);
    const std::size_t i = rng.uniform_index(n_);
    best = std::max(best, norm(component_gradient(i, x)));
  }
  return best;
}

nlohmann::json Objective::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind_);
  j["name"] = name_;
  j["d"] = d_;
  j["n"] = n_;
  j["seed"] = seed_;
  j["options"] = options_.to_json(kind_);
  j["params"]["rows"] = rows_;
  j["params"]["targets"] = targets_;
  j["L_ref"] = L_ref_;
  j["sigma_ref"] = sigma_ref_;
  if (f_star_ref_.has_value()) {
    j["f_star_ref"] = *f_star_ref_;
  } else {
    j["f_star_ref"] = nullptr;
  }
  j["f_star_exact"] = f_star_exact_;
  j["box_halfwidth"] = box_halfwidth_;
  j["needs_projection"] = needs_projection_;
  j["x0"] = x0_;
  return j;
}

Objective Objective::from_json(const nlohmann::json& j) {
  Objective obj;
  obj.kind_ = objective_kind_from_string(j.at("kind").get<std::string>());
  obj.name_ = j.at("name").get<std::string>();
  obj.d_ = j.at("d").get<std::size_t>();
  obj.n_ = j.at("n").get<std::size_t>();
  obj.seed_ = j.at("seed").get<std::uint64_t>();
  obj.options_ = ObjectiveOptions::from_json(j.at("options"), obj.kind_);
  obj.rows_ = j.at("params").at("rows").get<std::vector<Vec>>();
  obj.targets_ = j.at("params").at("targets").get<Vec>();
  obj.L_ref_ = j.at("L_ref").get<double>();
  obj.sigma_ref_ = j.at("sigma_ref").get<double>();
  if (!j.at("f_star_ref").is_null()) obj.f_star_ref_ = j.at("f_star_ref").get<double>();
  obj.f_star_exact_ = j.at("f_star_exact").get<bool>();
  obj.box_halfwidth_ = j.at("box_halfwidth").get<double>();
  obj.needs_projection_ = j.at("needs_projection").get<bool>();
  obj.x0_ = j.at("x0").get<Vec>();
  if (obj.rows_.size() != obj.n_ || (obj.n_ > 0 && obj.rows_[0].size() != obj.d_)) {
    throw std::invalid_argument("objective from_json: params shape mismatch");
  }
  return obj;
}

}  // namespace sgdlab
