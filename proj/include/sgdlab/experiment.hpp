#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgdlab/accel.hpp"
#include "sgdlab/objective.hpp"
#include "sgdlab/optimizer.hpp"

namespace sgdlab {

enum class WrapperKind { none, reject, rva_full, rva_elementwise };

std::string to_string(WrapperKind w);
WrapperKind wrapper_kind_from_string(const std::string& s);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::sgd;
  OptimizerHyper hyper;

  static OptimizerConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct AlphaConfig {
  bool fixed = true;
  double value = 0.0;           // fixed mode
  double pilot_fraction = 0.05; // auto mode: pilot_T = max(10, fraction * T)

  static AlphaConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::quadratic;
  std::size_t d = 1;
  std::size_t n = 1;
  std::uint64_t seed = 0;
  ObjectiveOptions options;

  Objective build() const { return Objective::make(kind, d, n, seed, options); }
  bool operator==(const ObjectiveSpec& other) const;

  static ObjectiveSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Full description of one experiment. JSON parsing is fail-closed: unknown
/// keys are errors.
struct ExperimentConfig {
  ObjectiveSpec objective;
  OptimizerConfig optimizer;
  std::vector<WrapperKind> wrappers;  // applied in order; empty = none
  AlphaConfig alpha;
  std::size_t T = 1;
  std::vector<std::uint64_t> seeds;
  std::size_t full_grad_every = 1;
  double threshold = 0.0;  // target min |grad f|^2; 0 = never reached
  std::optional<double> domain_box;  // overrides the objective box halfwidth
  std::string label;

  void validate() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  std::string digest() const;  // FNV-1a 64 of the canonical JSON dump
};

struct TrajectoryRow {
  std::size_t step = 0;
  double f = 0.0;
  double grad_norm_sq = 0.0;
  int gamma_k = 0;
  int gamma_l = 0;
  double inner = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  LedgerSnapshot ledger;
  double min_grad_norm_sq = 0.0;
  std::optional<std::size_t> iterations_to_threshold;
  double final_f = 0.0;
  std::size_t projection_hits = 0;
  bool diverged = false;
  double k_hat = 0.0;  // elementwise: coord_accepts / d; otherwise ledger k
  std::vector<TrajectoryRow> trajectory;

  nlohmann::json to_json() const;  // trajectory excluded (lives in the CSV)
};

struct AutoAlphaResult {
  double alpha = 0.0;
  double c = 0.0;
  double k_hat = 0.0;     // extrapolated to the full run
  double B_hat = 0.0;
  double sigma_hat = 0.0;
  double f_star_used = 0.0;
  bool f_star_fallback = false;
  double pilot_alpha = 0.0;
  std::size_t pilot_T = 0;

  nlohmann::json to_json() const;
};

struct BoundInputs {
  double T = 1;
  double k = 0;
  double l = 0;
  double u_a = 0;
  double u_b = 0;
  double B = 0;
  double f0 = 0;
  double f_star = 0;
  double L = 1;
  double sigma = 1;

  nlohmann::json to_json() const;
};

struct BoundCheckResult {
  bool valid = false;
  double rate = 0.0;
  double bound = 0.0;
  double observed = 0.0;
  bool satisfied = false;
  std::string reason;  // set when !valid
  BoundInputs inputs;

  nlohmann::json to_json() const;
};

struct RunSummary {
  ExperimentConfig config;
  std::string config_digest;
  nlohmann::json objective_meta;  // name, refs, x0 digest-level info
  double alpha_used = 0.0;
  std::optional<AutoAlphaResult> alpha_info;
  std::vector<SeedResult> per_seed;

  // Aggregates over non-diverged seeds.
  double mean_min_grad_norm_sq = 0.0;           // mean over seeds of per-seed min
  double min_of_mean_grad_norm_sq = 0.0;        // min over grid of mean over seeds
  std::optional<double> median_iterations_to_threshold;
  double k_mean = 0.0;
  double l_mean = 0.0;
  double k_hat_mean = 0.0;
  std::size_t diverged_seeds = 0;

  BoundCheckResult theory;

  nlohmann::json to_json() const;
};

/// Wrapper hook: maps (base direction, stochastic gradient) to the applied
/// direction plus the step's consistency record and residual used for ledger
/// ratios. Tests may substitute their own.
using WrapperFn =
    std::function<Vec(const Vec& base, const Vec& grad, RandomStream& wrap_rng,
                      ConsistencyRecord& rec, Vec& ratio_residual)>;

WrapperFn make_wrapper(const std::vector<WrapperKind>& stack);

/// Two-pass step-size protocol: a short conservative pilot on seeds[0]
/// measures the acceptance fraction and B, then the closed-form step-size
/// rule gives alpha for the full horizon. Objectives without a reference optimum fall
/// back to the pilot's observed minimum (flagged).
AutoAlphaResult auto_alpha(const ExperimentConfig& config, std::size_t pilot_T);

/// Runs every seed (in parallel) and aggregates. Deterministic given the
/// config, including across re-runs.
RunSummary run_experiment(const ExperimentConfig& config);

/// run_experiment with a caller-supplied wrapper (config.wrappers ignored).
RunSummary run_experiment_with_wrapper(const ExperimentConfig& config,
                                       const WrapperFn& wrapper);

/// Writes seed_<s>.csv per seed, summary.json and objective.json under out_dir.
void write_artifacts(const RunSummary& summary, const std::filesystem::path& out_dir);

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows, double alpha);

BoundCheckResult bound_check(const RunSummary& summary, const BoundInputs& inputs);

/// Builds the bound inputs from a finished run: measured k / l means, the
/// conservative ledger envelopes (u_a = min, u_b = max, B = max) pooled over
/// seeds, and the objective's reference constants.
BoundInputs inputs_from_summary(const RunSummary& summary, const Objective& obj,
                                double f0);

struct CompareRow {
  std::string label;
  std::optional<double> median_iterations;
  double mean_min_grad_norm_sq = 0.0;
  double k_mean = 0.0;
  double l_mean = 0.0;
  std::size_t diverged_seeds = 0;
};

struct CompareResult {
  std::vector<CompareRow> rows;
  // speedup[i][j] = median_iterations[i] / median_iterations[j]
  std::vector<std::vector<std::optional<double>>> speedup;
  std::vector<RunSummary> summaries;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Runs each config on the shared seed set. All configs must share the
/// objective, T and seeds.
CompareResult compare(const std::vector<ExperimentConfig>& configs);

std::string fnv1a_hex(const std::string& data);

}  // namespace sgdlab
