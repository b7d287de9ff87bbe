#include "sgdlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <stdexcept>

#include "sgdlab/theory.hpp"

namespace sgdlab {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::optional<double> median_of(std::vector<std::optional<std::size_t>> values) {
  if (values.empty()) return std::nullopt;
  // Censored runs (threshold never reached) sort last.
  std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
    const double av = a ? static_cast<double>(*a) : std::numeric_limits<double>::infinity();
    const double bv = b ? static_cast<double>(*b) : std::numeric_limits<double>::infinity();
    return av < bv;
  });
  const std::size_t n = values.size();
  if (n % 2 == 1) {
    const auto& mid = values[n / 2];
    if (!mid) return std::nullopt;
    return static_cast<double>(*mid);
  }
  const auto& lo = values[n / 2 - 1];
  const auto& hi = values[n / 2];
  if (!lo || !hi) return std::nullopt;
  return 0.5 * (static_cast<double>(*lo) + static_cast<double>(*hi));
}

}  // namespace

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string to_string(WrapperKind w) {
  switch (w) {
    case WrapperKind::none: return "none";
    case WrapperKind::reject: return "reject";
    case WrapperKind::rva_full: return "rva_full";
    case WrapperKind::rva_elementwise: return "rva_elementwise";
  }
  throw std::logic_error("unreachable wrapper kind");
}

WrapperKind wrapper_kind_from_string(const std::string& s) {
  if (s == "none") return WrapperKind::none;
  if (s == "reject") return WrapperKind::reject;
  if (s == "rva_full") return WrapperKind::rva_full;
  if (s == "rva_elementwise") return WrapperKind::rva_elementwise;
  throw std::invalid_argument("unknown wrapper: " + s);
}

static std::vector<WrapperKind> parse_wrapper_stack(const std::string& s) {
  std::vector<WrapperKind> stack;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t plus = s.find('+', start);
    const std::string tok = s.substr(start, plus == std::string::npos ? plus : plus - start);
    const WrapperKind w = wrapper_kind_from_string(tok);
    if (w != WrapperKind::none) stack.push_back(w);
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return stack;
}

static std::string wrapper_stack_string(const std::vector<WrapperKind>& stack) {
  if (stack.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < stack.size(); ++i) {
    if (i > 0) s += '+';
    s += to_string(stack[i]);
  }
  return s;
}

// --- config parsing (fail-closed) -------------------------------------------

namespace {

void require_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                  const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
  }
}

}  // namespace

OptimizerConfig OptimizerConfig::from_json(const nlohmann::json& j) {
  OptimizerConfig c;
  c.kind = optimizer_kind_from_string(j.at("kind").get<std::string>());
  c.hyper = default_hyper(c.kind);
  std::vector<std::string> allowed = {"kind"};
  switch (c.kind) {
    case OptimizerKind::sgd: break;
    case OptimizerKind::sgdm: allowed.push_back("mu"); break;
    case OptimizerKind::adam:
      allowed.insert(allowed.end(), {"beta1", "beta2", "eps"});
      break;
    case OptimizerKind::lion:
      allowed.insert(allowed.end(), {"beta1", "beta2"});
      break;
  }
  require_keys(j, allowed, "optimizer");
  if (j.contains("mu")) c.hyper.mu = j.at("mu").get<double>();
  if (j.contains("beta1")) c.hyper.beta1 = j.at("beta1").get<double>();
  if (j.contains("beta2")) c.hyper.beta2 = j.at("beta2").get<double>();
  if (j.contains("eps")) c.hyper.eps = j.at("eps").get<double>();
  return c;
}

nlohmann::json OptimizerConfig::to_json() const {
  nlohmann::json j;
  j["kind"] = sgdlab::to_string(kind);
  switch (kind) {
    case OptimizerKind::sgd: break;
    case OptimizerKind::sgdm: j["mu"] = hyper.mu; break;
    case OptimizerKind::adam:
      j["beta1"] = hyper.beta1;
      j["beta2"] = hyper.beta2;
      j["eps"] = hyper.eps;
      break;
    case OptimizerKind::lion:
      j["beta1"] = hyper.beta1;
      j["beta2"] = hyper.beta2;
      break;
  }
  return j;
}

AlphaConfig AlphaConfig::from_json(const nlohmann::json& j) {
  require_keys(j, {"fixed", "auto"}, "alpha");
  AlphaConfig c;
  if (j.contains("fixed") == j.contains("auto")) {
    throw std::invalid_argument("alpha: exactly one of 'fixed' or 'auto' is required");
  }
  if (j.contains("fixed")) {
    c.fixed = true;
    c.value = j.at("fixed").get<double>();
    if (!(c.value > 0.0)) throw std::invalid_argument("alpha.fixed must be positive");
  } else {
    c.fixed = false;
    c.pilot_fraction = j.at("auto").get<double>();
    if (!(c.pilot_fraction > 0.0) || c.pilot_fraction > 1.0) {
      throw std::invalid_argument("alpha.auto (pilot fraction) must be in (0, 1]");
    }
  }
  return c;
}

nlohmann::json AlphaConfig::to_json() const {
  nlohmann::json j;
  if (fixed) {
    j["fixed"] = value;
  } else {
    j["auto"] = pilot_fraction;
  }
  return j;
}

ObjectiveSpec ObjectiveSpec::from_json(const nlohmann::json& j) {
  require_keys(j, {"kind", "d", "n", "seed", "options"}, "objective");
  ObjectiveSpec s;
  s.kind = objective_kind_from_string(j.at("kind").get<std::string>());
  s.d = j.at("d").get<std::size_t>();
  s.n = j.at("n").get<std::size_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.options = ObjectiveOptions::from_json(j.contains("options") ? j.at("options")
                                                                : nlohmann::json(nullptr),
                                          s.kind);
  return s;
}

nlohmann::json ObjectiveSpec::to_json() const {
  nlohmann::json j;
  j["kind"] = sgdlab::to_string(kind);
  j["d"] = d;
  j["n"] = n;
  j["seed"] = seed;
  j["options"] = options.to_json(kind);
  return j;
}

bool ObjectiveSpec::operator==(const ObjectiveSpec& other) const {
  return to_json() == other.to_json();
}

void ExperimentConfig::validate() const {
  if (T < 1) throw std::invalid_argument("config: T must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("config: at least one seed is required");
  if (full_grad_every < 1 || full_grad_every > T) {
    throw std::invalid_argument("config: full_grad_every must be in [1, T]");
  }
  if (threshold < 0.0) throw std::invalid_argument("config: threshold must be >= 0");
  if (domain_box && !(*domain_box > 0.0)) {
    throw std::invalid_argument("config: domain_box must be positive");
  }
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  require_keys(j,
               {"objective", "optimizer", "wrapper", "alpha", "T", "seeds",
                "full_grad_every", "threshold", "domain_box", "label"},
               "config");
  ExperimentConfig c;
  c.objective = ObjectiveSpec::from_json(j.at("objective"));
  c.optimizer = OptimizerConfig::from_json(j.at("optimizer"));
  c.wrappers = parse_wrapper_stack(j.at("wrapper").get<std::string>());
  c.alpha = AlphaConfig::from_json(j.at("alpha"));
  c.T = j.at("T").get<std::size_t>();
  c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("full_grad_every")) {
    c.full_grad_every = j.at("full_grad_every").get<std::size_t>();
  }
  c.threshold = j.contains("threshold") ? j.at("threshold").get<double>() : 0.0;
  if (j.contains("domain_box")) c.domain_box = j.at("domain_box").get<double>();
  if (j.contains("label")) c.label = j.at("label").get<std::string>();
  c.validate();
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["objective"] = objective.to_json();
  j["optimizer"] = optimizer.to_json();
  j["wrapper"] = wrapper_stack_string(wrappers);
  j["alpha"] = alpha.to_json();
  j["T"] = T;
  j["seeds"] = seeds;
  j["full_grad_every"] = full_grad_every;
  j["threshold"] = threshold;
  if (domain_box) j["domain_box"] = *domain_box;
  if (!label.empty()) j["label"] = label;
  return j;
}

std::string ExperimentConfig::digest() const { return fnv1a_hex(to_json().dump()); }

// --- wrappers ----------------------------------------------------------------

WrapperFn make_wrapper(const std::vector<WrapperKind>& stack) {
  return [stack](const Vec& base, const Vec& grad, RandomStream& wrap_rng,
                 ConsistencyRecord& rec, Vec& ratio_residual) -> Vec {
    Vec dir = base;
    bool last_was_rva = false;
    ConsistencyRecord rva_rec;
    Vec before_rva;
    for (WrapperKind w : stack) {
      switch (w) {
        case WrapperKind::none:
          break;
        case WrapperKind::reject:
          dir = reject_filter(dir, grad);
          last_was_rva = false;
          break;
        case WrapperKind::rva_full:
        case WrapperKind::rva_elementwise: {
          before_rva = dir;
          RvaResult rr = rva_wrap(dir, wrap_rng,
                                  w == WrapperKind::rva_full ? RvaMode::full
                                                             : RvaMode::elementwise);
          dir = std::move(rr.direction);
          rva_rec = rr.record;
          last_was_rva = true;
          break;
        }
      }
    }
    if (last_was_rva) {
      rec = rva_rec;
      ratio_residual = sub(dir, before_rva);
    } else {
      ratio_residual = sub(dir, grad);
      rec = classify(ratio_residual, grad);
    }
    return dir;
  };
}

// --- per-seed run -------------------------------------------------------------

namespace {

SeedResult run_seed(const ExperimentConfig& config, const Objective& obj, double alpha,
                    const WrapperFn& wrapper, std::uint64_t seed) {
  SeedResult res;
  res.seed = seed;
  RandomStream master(seed);
  RandomStream comp_rng = master.fork(1);
  RandomStream wrap_rng = master.fork(2);

  Vec x = obj.x0();
  Optimizer opt(config.optimizer.kind, obj.dim(), config.optimizer.hyper);
  AccelLedger ledger;

  const double box = config.domain_box.value_or(obj.box_halfwidth());
  const bool project = obj.needs_projection() || config.domain_box.has_value();
  const std::size_t cadence = config.full_grad_every;
  const double f0 = obj.full_value(x);
  const bool use_threshold = config.threshold > 0.0;

  double min_gnsq = std::numeric_limits<double>::infinity();
  double last_f = f0;

  auto grid_eval = [&](std::size_t t, Vec& fg_out, double& f_out, double& gnsq_out) {
    f_out = obj.full_value(x);
    fg_out = obj.full_gradient(x);
    gnsq_out = norm_sq(fg_out);
    last_f = f_out;
    if (gnsq_out < min_gnsq) min_gnsq = gnsq_out;
    if (use_threshold && !res.iterations_to_threshold && gnsq_out <= config.threshold) {
      res.iterations_to_threshold = t;
    }
  };

  for (std::size_t t = 0; t < config.T; ++t) {
    const bool on_grid = (t % cadence == 0);
    Vec fg;
    double f = 0.0, gnsq = 0.0;
    if (on_grid) {
      grid_eval(t, fg, f, gnsq);
      if (!all_finite(x) || f > f0 * 1e6) {
        res.trajectory.push_back({t, f, gnsq, 0, 0, 0.0});
        res.diverged = true;
        break;
      }
    }
    const std::size_t i = obj.sample_component(comp_rng);
    const Vec grad = obj.component_gradient(i, x);
    const Vec base = opt.propose_direction(grad);
    ConsistencyRecord rec;
    Vec ratio_r;
    const Vec dir = wrapper(base, grad, wrap_rng, rec, ratio_r);
    ledger.update(rec, on_grid ? &fg : nullptr, grad, ratio_r);
    if (on_grid) {
      res.trajectory.push_back({t, f, gnsq, rec.gamma_k, rec.gamma_l, rec.inner});
    }
    axpy(x, -alpha, dir);
    if (project && clamp_box(x, box)) ++res.projection_hits;
    if (!all_finite(x)) {
      res.diverged = true;
      break;
    }
  }
  if (!res.diverged && config.T % cadence == 0) {
    Vec fg;
    double f = 0.0, gnsq = 0.0;
    grid_eval(config.T, fg, f, gnsq);
    res.trajectory.push_back({config.T, f, gnsq, 0, 0, 0.0});
  }
  res.final_f = last_f;
  res.min_grad_norm_sq = min_gnsq;
  res.ledger = ledger.snapshot();
  const bool elementwise =
      std::find(config.wrappers.begin(), config.wrappers.end(),
                WrapperKind::rva_elementwise) != config.wrappers.end();
  res.k_hat = elementwise ? ledger.k_hat_elementwise(obj.dim())
                          : static_cast<double>(ledger.k());
  return res;
}

}  // namespace

// --- auto alpha ----------------------------------------------------------------

AutoAlphaResult auto_alpha(const ExperimentConfig& config, std::size_t pilot_T) {
  if (pilot_T < 10) throw std::invalid_argument("auto_alpha: pilot_T must be >= 10");
  config.validate();
  const Objective obj = config.objective.build();
  AutoAlphaResult res;
  res.pilot_T = pilot_T;

  const double f0 = obj.full_value(obj.x0());
  const double L = obj.L_ref();
  RandomStream master(config.seeds.front());
  RandomStream sigma_rng = master.fork(5);
  res.sigma_hat = obj.estimate_sigma(sigma_rng, 10000);
  if (res.sigma_hat == 0.0) {
    // Flat objective: any step size works; report zero.
    res.f_star_used = f0;
    return res;
  }

  // Pilot scale: use the reference optimum when we have one, otherwise a unit
  // gap; the pilot only needs a sane conservative step.
  const double delta_pre = obj.f_star_ref() ? std::max(f0 - *obj.f_star_ref(), 0.0) : 1.0;
  const double c_pre = std::sqrt(2.0 * delta_pre / (L * res.sigma_hat * res.sigma_hat));
  res.pilot_alpha = c_pre / std::sqrt(3.0 * static_cast<double>(config.T));

  ExperimentConfig pilot = config;
  pilot.T = pilot_T;
  pilot.seeds = {config.seeds.front()};
  pilot.full_grad_every = std::max<std::size_t>(1, pilot_T / 20);
  pilot.threshold = 0.0;
  const WrapperFn wrapper = make_wrapper(config.wrappers);
  const SeedResult pr = run_seed(pilot, obj, res.pilot_alpha, wrapper, pilot.seeds[0]);

  double f_star;
  if (obj.f_star_ref()) {
    f_star = *obj.f_star_ref();
    res.f_star_fallback = false;
  } else {
    f_star = f0;
    for (const auto& row : pr.trajectory) f_star = std::min(f_star, row.f);
    res.f_star_fallback = true;
  }
  res.f_star_used = f_star;
  const double delta = std::max(f0 - f_star, 0.0);
  res.c = std::sqrt(2.0 * delta / (L * res.sigma_hat * res.sigma_hat));

  const double k_fraction = pr.k_hat / static_cast<double>(pilot_T);
  res.B_hat = pr.ledger.B_count > 0 ? pr.ledger.B_mean : 0.0;

  const WrapperKind last = config.wrappers.empty() ? WrapperKind::none
                                                   : config.wrappers.back();
  const double T = static_cast<double>(config.T);
  switch (last) {
    case WrapperKind::none:
      res.k_hat = 0.0;
      res.alpha = res.c / std::sqrt(T);
      break;
    case WrapperKind::reject:
      res.k_hat = k_fraction * T;
      res.alpha = res.c / std::sqrt(T + 8.0 * res.k_hat * res.B_hat);
      break;
    case WrapperKind::rva_full:
      res.k_hat = k_fraction * T;
      res.alpha = res.c / std::sqrt(T + 4.0 * res.k_hat / static_cast<double>(obj.dim()));
      break;
    case WrapperKind::rva_elementwise:
      res.k_hat = k_fraction * T;  // already per-coordinate (d = 1 rule)
      res.alpha = res.c / std::sqrt(T + 4.0 * res.k_hat);
      break;
  }
  return res;
}

// --- run / aggregate ------------------------------------------------------------

namespace {

RunSummary run_with(const ExperimentConfig& config, const WrapperFn& wrapper) {
  config.validate();
  const Objective obj = config.objective.build();

  RunSummary summary;
  summary.config = config;
  summary.config_digest = config.digest();

  double alpha = config.alpha.value;
  if (!config.alpha.fixed) {
    const auto pilot_T = std::max<std::size_t>(
        10, static_cast<std::size_t>(config.alpha.pilot_fraction *
                                     static_cast<double>(config.T)));
    AutoAlphaResult ar = auto_alpha(config, pilot_T);
    alpha = ar.alpha;
    summary.alpha_info = ar;
  }
  summary.alpha_used = alpha;

  std::vector<std::future<SeedResult>> futures;
  futures.reserve(config.seeds.size());
  for (std::uint64_t seed : config.seeds) {
    futures.push_back(std::async(std::launch::async, [&config, &obj, alpha, &wrapper,
                                                      seed]() {
      return run_seed(config, obj, alpha, wrapper, seed);
    }));
  }
  for (auto& f : futures) summary.per_seed.push_back(f.get());

  const double f0 = obj.full_value(obj.x0());
  nlohmann::json meta;
  meta["name"] = obj.name();
  meta["kind"] = to_string(obj.kind());
  meta["d"] = obj.dim();
  meta["n"] = obj.num_components();
  meta["seed"] = obj.seed();
  meta["L_ref"] = obj.L_ref();
  meta["sigma_ref"] = obj.sigma_ref();
  meta["f_star_ref"] =
      obj.f_star_ref() ? nlohmann::json(*obj.f_star_ref()) : nlohmann::json(nullptr);
  meta["f_star_exact"] = obj.f_star_exact();
  meta["box_halfwidth"] = obj.box_halfwidth();
  meta["f0"] = f0;
  summary.objective_meta = meta;

  // Aggregates over non-diverged seeds.
  std::vector<std::optional<std::size_t>> iters;
  double sum_min = 0.0, sum_k = 0.0, sum_l = 0.0, sum_khat = 0.0;
  std::size_t alive = 0;
  for (const SeedResult& r : summary.per_seed) {
    if (r.diverged) {
      ++summary.diverged_seeds;
      continue;
    }
    ++alive;
    sum_min += r.min_grad_norm_sq;
    sum_k += static_cast<double>(r.ledger.k);
    sum_l += static_cast<double>(r.ledger.l);
    sum_khat += r.k_hat;
    iters.push_back(r.iterations_to_threshold);
  }
  if (alive > 0) {
    summary.mean_min_grad_norm_sq = sum_min / static_cast<double>(alive);
    summary.k_mean = sum_k / static_cast<double>(alive);
    summary.l_mean = sum_l / static_cast<double>(alive);
    summary.k_hat_mean = sum_khat / static_cast<double>(alive);
    summary.median_iterations_to_threshold = median_of(std::move(iters));

    // min over the recording grid of the mean over seeds.
    const std::size_t rows = summary.per_seed.front().trajectory.size();
    bool aligned = true;
    for (const SeedResult& r : summary.per_seed) {
      if (!r.diverged && r.trajectory.size() != rows) aligned = false;
    }
    if (aligned && rows > 0) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t row = 0; row < rows; ++row) {
        double mean = 0.0;
        for (const SeedResult& r : summary.per_seed) {
          if (!r.diverged) mean += r.trajectory[row].grad_norm_sq;
        }
        mean /= static_cast<double>(alive);
        best = std::min(best, mean);
      }
      summary.min_of_mean_grad_norm_sq = best;
    }
  }

  if (alive == 0) {
    summary.theory.valid = false;
    summary.theory.reason = "all seeds diverged";
  } else if (!obj.f_star_ref()) {
    summary.theory.valid = false;
    summary.theory.reason = "objective has no reference optimum";
  } else {
    summary.theory = bound_check(summary, inputs_from_summary(summary, obj, f0));
  }
  return summary;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config) {
  return run_with(config, make_wrapper(config.wrappers));
}

RunSummary run_experiment_with_wrapper(const ExperimentConfig& config,
                                       const WrapperFn& wrapper) {
  return run_with(config, wrapper);
}

// --- bound check ------------------------------------------------------------------

BoundInputs inputs_from_summary(const RunSummary& summary, const Objective& obj,
                                double f0) {
  if (!obj.f_star_ref()) {
    throw std::invalid_argument(
        "inputs_from_summary: objective has no reference optimum; build BoundInputs "
        "directly");
  }
  BoundInputs in;
  in.T = static_cast<double>(summary.config.T);
  double u_min = std::numeric_limits<double>::infinity();
  double u_max = 0.0, B_max = 0.0;
  bool any_u = false, any_B = false;
  double sum_k = 0.0, sum_l = 0.0;
  std::size_t alive = 0;
  for (const SeedResult& r : summary.per_seed) {
    if (r.diverged) continue;
    ++alive;
    sum_k += static_cast<double>(r.ledger.k);
    sum_l += static_cast<double>(r.ledger.l);
    if (r.ledger.u_count > 0) {
      any_u = true;
      u_min = std::min(u_min, r.ledger.u_min);
      u_max = std::max(u_max, r.ledger.u_max);
    }
    if (r.ledger.B_count > 0) {
      any_B = true;
      B_max = std::max(B_max, r.ledger.B_max);
    }
  }
  if (alive == 0) throw std::invalid_argument("inputs_from_summary: all seeds diverged");
  in.k = sum_k / static_cast<double>(alive);
  in.l = sum_l / static_cast<double>(alive);
  in.u_a = any_u ? u_min : 0.0;
  in.u_b = any_u ? u_max : 0.0;
  in.B = any_B ? B_max : 0.0;
  in.f0 = f0;
  in.f_star = *obj.f_star_ref();
  in.L = obj.L_ref();
  in.sigma = obj.sigma_ref();
  return in;
}

BoundCheckResult bound_check(const RunSummary& summary, const BoundInputs& in) {
  BoundCheckResult res;
  res.inputs = in;
  res.observed = summary.mean_min_grad_norm_sq;
  if (summary.per_seed.size() < 10) {
    res.reason = "fewer than 10 seeds; the bound holds for an expectation";
  }
  try {
    res.rate = theory::unified_rate(in.T, in.k, in.l, in.u_a, in.u_b, in.B);
  } catch (const theory::InvalidBound& e) {
    res.valid = false;
    res.reason = e.what();
    return res;
  }
  res.bound = theory::unified_bound(res.rate, in.f0, in.f_star, in.L, in.sigma);
  res.valid = true;
  res.satisfied = res.observed <= res.bound * 1.05;
  return res;
}

// --- compare ----------------------------------------------------------------------

CompareResult compare(const std::vector<ExperimentConfig>& configs) {
  if (configs.empty()) throw std::invalid_argument("compare: no configs");
  for (const ExperimentConfig& c : configs) {
    if (!(c.objective == configs.front().objective)) {
      throw std::invalid_argument("compare: configs must share the objective");
    }
    if (c.T != configs.front().T) {
      throw std::invalid_argument("compare: configs must share T");
    }
    if (c.seeds != configs.front().seeds) {
      throw std::invalid_argument("compare: configs must share the seed set");
    }
    if (c.threshold != configs.front().threshold) {
      throw std::invalid_argument("compare: configs must share the threshold");
    }
  }
  CompareResult res;
  for (const ExperimentConfig& c : configs) {
    RunSummary s = run_experiment(c);
    CompareRow row;
    row.label = c.label.empty()
                    ? to_string(c.optimizer.kind) + "/" + wrapper_stack_string(c.wrappers)
                    : c.label;
    row.median_iterations = s.median_iterations_to_threshold;
    row.mean_min_grad_norm_sq = s.mean_min_grad_norm_sq;
    row.k_mean = s.k_mean;
    row.l_mean = s.l_mean;
    row.diverged_seeds = s.diverged_seeds;
    res.rows.push_back(row);
    res.summaries.push_back(std::move(s));
  }
  const std::size_t m = res.rows.size();
  res.speedup.assign(m, std::vector<std::optional<double>>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const auto& a = res.rows[i].median_iterations;
      const auto& b = res.rows[j].median_iterations;
      if (a && b && *b > 0.0) res.speedup[i][j] = *a / *b;
      if (a && b && *a == 0.0 && *b == 0.0) res.speedup[i][j] = 1.0;
    }
  }
  return res;
}

// --- serialization ------------------------------------------------------------------

nlohmann::json SeedResult::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["ledger"] = ledger.to_json();
  j["min_grad_norm_sq"] = min_grad_norm_sq;
  j["iterations_to_threshold"] = iterations_to_threshold
                                     ? nlohmann::json(*iterations_to_threshold)
                                     : nlohmann::json(nullptr);
  j["final_f"] = final_f;
  j["projection_hits"] = projection_hits;
  j["diverged"] = diverged;
  j["k_hat"] = k_hat;
  return j;
}

nlohmann::json AutoAlphaResult::to_json() const {
  nlohmann::json j;
  j["alpha"] = alpha;
  j["c"] = c;
  j["k_hat"] = k_hat;
  j["B_hat"] = B_hat;
  j["sigma_hat"] = sigma_hat;
  j["f_star_used"] = f_star_used;
  j["f_star_fallback"] = f_star_fallback;
  j["pilot_alpha"] = pilot_alpha;
  j["pilot_T"] = pilot_T;
  return j;
}

nlohmann::json BoundInputs::to_json() const {
  nlohmann::json j;
  j["T"] = T;
  j["k"] = k;
  j["l"] = l;
  j["u_a"] = u_a;
  j["u_b"] = u_b;
  j["B"] = B;
  j["f0"] = f0;
  j["f_star"] = f_star;
  j["L"] = L;
  j["sigma"] = sigma;
  return j;
}

nlohmann::json BoundCheckResult::to_json() const {
  nlohmann::json j;
  j["valid"] = valid;
  j["rate"] = rate;
  j["bound"] = bound;
  j["observed"] = observed;
  j["satisfied"] = satisfied;
  j["reason"] = reason;
  j["inputs"] = inputs.to_json();
  return j;
}

nlohmann::json RunSummary::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["config"] = config.to_json();
  j["config_digest"] = config_digest;
  j["objective"] = objective_meta;
  j["alpha_used"] = alpha_used;
  j["alpha_info"] = alpha_info ? alpha_info->to_json() : nlohmann::json(nullptr);
  nlohmann::json seeds = nlohmann::json::array();
  for (const SeedResult& r : per_seed) seeds.push_back(r.to_json());
  j["per_seed"] = seeds;
  nlohmann::json agg;
  agg["mean_min_grad_norm_sq"] = mean_min_grad_norm_sq;
  agg["min_of_mean_grad_norm_sq"] = min_of_mean_grad_norm_sq;
  agg["median_iterations_to_threshold"] =
      median_iterations_to_threshold ? nlohmann::json(*median_iterations_to_threshold)
                                     : nlohmann::json(nullptr);
  agg["k_mean"] = k_mean;
  agg["l_mean"] = l_mean;
  agg["k_hat_mean"] = k_hat_mean;
  agg["diverged_seeds"] = diverged_seeds;
  j["aggregate"] = agg;
  j["theory"] = theory.to_json();
  return j;
}

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows, double alpha) {
  std::string out = "step,f,grad_norm_sq,gamma_k,gamma_l,inner,alpha\n";
  for (const TrajectoryRow& r : rows) {
    out += std::to_string(r.step);
    out += ',';
    out += fmt17(r.f);
    out += ',';
    out += fmt17(r.grad_norm_sq);
    out += ',';
    out += std::to_string(r.gamma_k);
    out += ',';
    out += std::to_string(r.gamma_l);
    out += ',';
    out += fmt17(r.inner);
    out += ',';
    out += fmt17(alpha);
    out += '\n';
  }
  return out;
}

void write_artifacts(const RunSummary& summary, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const SeedResult& r : summary.per_seed) {
    std::ofstream csv(out_dir / ("seed_" + std::to_string(r.seed) + ".csv"),
                      std::ios::binary);
    csv << trajectory_csv(r.trajectory, summary.alpha_used);
  }
  {
    std::ofstream js(out_dir / "summary.json", std::ios::binary);
    js << summary.to_json().dump(2) << '\n';
  }
  {
    const Objective obj = summary.config.objective.build();
    std::ofstream js(out_dir / "objective.json", std::ios::binary);
    js << obj.to_json().dump(2) << '\n';
  }
}

nlohmann::json CompareResult::to_json() const {
  nlohmann::json j;
  nlohmann::json rws = nlohmann::json::array();
  for (const CompareRow& r : rows) {
    nlohmann::json row;
    row["label"] = r.label;
    row["median_iterations_to_threshold"] =
        r.median_iterations ? nlohmann::json(*r.median_iterations)
                            : nlohmann::json(nullptr);
    row["mean_min_grad_norm_sq"] = r.mean_min_grad_norm_sq;
    row["k_mean"] = r.k_mean;
    row["l_mean"] = r.l_mean;
    row["diverged_seeds"] = r.diverged_seeds;
    rws.push_back(row);
  }
  j["rows"] = rws;
  nlohmann::json sp = nlohmann::json::array();
  for (const auto& line : speedup) {
    nlohmann::json l = nlohmann::json::array();
    for (const auto& v : line) l.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
    sp.push_back(l);
  }
  j["speedup"] = sp;
  return j;
}

std::string CompareResult::to_csv() const {
  std::string out =
      "label,median_iterations_to_threshold,mean_min_grad_norm_sq,k_mean,l_mean,"
      "diverged_seeds\n";
  for (const CompareRow& r : rows) {
    out += r.label;
    out += ',';
    out += r.median_iterations ? fmt17(*r.median_iterations) : std::string();
    out += ',';
    out += fmt17(r.mean_min_grad_norm_sq);
    out += ',';
    out += fmt17(r.k_mean);
    out += ',';
    out += fmt17(r.l_mean);
    out += ',';
    out += std::to_string(r.diverged_seeds);
    out += '\n';
  }
  return out;
}

}  // namespace sgdlab
