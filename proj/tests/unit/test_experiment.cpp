#include "sgdlab/experiment.hpp"

#include <cmath>

#include "doctest.h"
#include "sgdlab/theory.hpp"

using namespace sgdlab;

namespace {

nlohmann::json base_config_json() {
  return nlohmann::json::parse(R"({
    "objective": {"kind": "quadratic", "d": 3, "n": 6, "seed": 5, "options": {"box_halfwidth": 5.0}},
    "optimizer": {"kind": "sgd"},
    "wrapper": "none",
    "alpha": {"fixed": 0.05},
    "T": 40,
    "seeds": [1, 2],
    "full_grad_every": 1,
    "threshold": 0.0
  })");
}

}  // namespace

TEST_CASE("config: JSON round trip and digest stability") {
  const auto cfg = ExperimentConfig::from_json(base_config_json());
  const auto again = ExperimentConfig::from_json(cfg.to_json());
  CHECK(cfg.to_json() == again.to_json());
  CHECK(cfg.digest() == again.digest());
  CHECK(cfg.digest().size() == 16);
}

TEST_CASE("config: unknown keys are rejected (fail-closed)") {
  auto j = base_config_json();
  j["typo_key"] = 1;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  j = base_config_json();
  j["objective"]["extra"] = 2;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  j = base_config_json();
  j["optimizer"]["mu"] = 0.5;  // sgd takes no mu
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  j = base_config_json();
  j["alpha"] = {{"fixed", 0.1}, {"auto", 0.05}};
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  j = base_config_json();
  j["alpha"] = nlohmann::json::object();
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
}

TEST_CASE("full-batch gradient descent on a quadratic decreases f monotonically") {
  auto j = base_config_json();
  j["objective"]["n"] = 1;
  j["objective"]["d"] = 2;
  j["T"] = 30;
  j["alpha"] = {{"fixed", 0.2}};
  j["seeds"] = {7};
  const auto cfg = ExperimentConfig::from_json(j);
  const RunSummary s = run_experiment(cfg);
  REQUIRE(s.per_seed.size() == 1);
  const auto& rows = s.per_seed[0].trajectory;
  REQUIRE(rows.size() == 31);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (rows[i].grad_norm_sq > 1e-20) {
      CHECK(rows[i + 1].f < rows[i].f);
    }
  }
}

TEST_CASE("trajectory row count is floor(T / cadence) + 1") {
  for (std::size_t cadence : {1u, 3u, 7u}) {
    auto j = base_config_json();
    j["T"] = 20;
    j["full_grad_every"] = cadence;
    j["seeds"] = {3};
    const RunSummary s = run_experiment(ExperimentConfig::from_json(j));
    CHECK(s.per_seed[0].trajectory.size() == 20 / cadence + 1);
    double row_min = std::numeric_limits<double>::infinity();
    for (const auto& row : s.per_seed[0].trajectory) {
      row_min = std::min(row_min, row.grad_norm_sq);
    }
    CHECK(s.per_seed[0].min_grad_norm_sq == row_min);
  }
}

TEST_CASE("reject wrapper forces l = 0 on every seed") {
  auto j = base_config_json();
  j["optimizer"] = {{"kind", "sgdm"}, {"mu", 0.8}};
  j["wrapper"] = "reject";
  j["T"] = 200;
  j["seeds"] = {1, 2, 3};
  j["alpha"] = {{"fixed", 0.02}};
  const RunSummary s = run_experiment(ExperimentConfig::from_json(j));
  for (const auto& seed : s.per_seed) {
    CHECK(seed.ledger.l == 0);
    CHECK(seed.ledger.k + seed.ledger.l <= seed.ledger.T_seen);
  }
  // the unwrapped baseline generally records some inconsistencies
  j["wrapper"] = "none";
  const RunSummary base = run_experiment(ExperimentConfig::from_json(j));
  CHECK(base.l_mean >= 0.0);
}

TEST_CASE("rva_full over sgd accepts about half the steps") {
  auto j = base_config_json();
  j["objective"] = {{"kind", "sigmoid_regression"}, {"d", 6}, {"n", 20}, {"seed", 9},
                    {"options", {{"row_bias", 0.5}, {"teacher_scale", 2.0}}}};
  j["wrapper"] = "rva_full";
  j["T"] = 2000;
  j["seeds"] = {11};
  j["alpha"] = {{"fixed", 0.05}};
  const RunSummary s = run_experiment(ExperimentConfig::from_json(j));
  const double frac = static_cast<double>(s.per_seed[0].ledger.k) / 2000.0;
  CHECK(std::abs(frac - 0.5) <= 4.0 * 0.5 / std::sqrt(2000.0));
  CHECK(s.per_seed[0].ledger.l == 0);
}

TEST_CASE("byte-identical outputs for identical configs") {
  auto j = base_config_json();
  j["wrapper"] = "rva_elementwise";
  j["seeds"] = {4, 5};
  const auto cfg = ExperimentConfig::from_json(j);
  const RunSummary a = run_experiment(cfg);
  const RunSummary b = run_experiment(cfg);
  CHECK(a.to_json().dump() == b.to_json().dump());
  for (std::size_t i = 0; i < a.per_seed.size(); ++i) {
    CHECK(trajectory_csv(a.per_seed[i].trajectory, a.alpha_used) ==
          trajectory_csv(b.per_seed[i].trajectory, b.alpha_used));
  }
}

TEST_CASE("rva with an always-rejecting candidate is bitwise identical to plain sgd") {
  const auto cfg = ExperimentConfig::from_json(base_config_json());
  const RunSummary plain = run_experiment(cfg);
  // Stub: the candidate is -base, so the acceptance branch can never fire.
  const WrapperFn stubbed = [](const Vec& base, const Vec& grad, RandomStream&,
                               ConsistencyRecord& rec, Vec& ratio_r) {
    const Vec dir = rva_apply_full(base, scale(base, -1.0));
    ratio_r = sub(dir, base);
    rec = ConsistencyRecord{};
    rec.inner = -norm_sq(base);
    return dir;
  };
  const RunSummary stub = run_experiment_with_wrapper(cfg, stubbed);
  for (std::size_t i = 0; i < plain.per_seed.size(); ++i) {
    // identical iterates: compare the recorded trajectories except the inner
    // column (the stub reports the candidate inner product)
    const auto& a = plain.per_seed[i].trajectory;
    const auto& b = stub.per_seed[i].trajectory;
    REQUIRE(a.size() == b.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
      CHECK(a[r].f == b[r].f);
      CHECK(a[r].grad_norm_sq == b[r].grad_norm_sq);
    }
    CHECK(plain.per_seed[i].min_grad_norm_sq == stub.per_seed[i].min_grad_norm_sq);
  }
}

TEST_CASE("compare: identical configs give speedup exactly 1") {
  auto j = base_config_json();
  j["threshold"] = 1e-4;
  j["T"] = 150;
  auto cfg = ExperimentConfig::from_json(j);
  cfg.label = "a";
  auto cfg2 = cfg;
  cfg2.label = "b";
  const CompareResult res = compare({cfg, cfg2});
  REQUIRE(res.rows.size() == 2);
  REQUIRE(res.speedup[0][1].has_value());
  CHECK(*res.speedup[0][1] == 1.0);
  CHECK(res.rows[0].median_iterations == res.rows[1].median_iterations);
}

TEST_CASE("compare: reject(sgdm) vs sgdm on a quadratic") {
  auto j = base_config_json();
  j["optimizer"] = {{"kind", "sgdm"}, {"mu", 0.8}};
  j["T"] = 300;
  j["threshold"] = 1e-4;
  j["seeds"] = {1, 2, 3, 4, 5};
  auto baseline = ExperimentConfig::from_json(j);
  baseline.label = "sgdm";
  j["wrapper"] = "reject";
  auto wrapped = ExperimentConfig::from_json(j);
  wrapped.label = "reject(sgdm)";
  const CompareResult res = compare({baseline, wrapped});
  CHECK(res.rows[1].l_mean == 0.0);
  CHECK(res.rows[0].l_mean >= 0.0);
  for (const auto& seed : res.summaries[1].per_seed) CHECK(seed.ledger.l == 0);
}

TEST_CASE("compare: mismatched objectives are rejected") {
  auto cfg1 = ExperimentConfig::from_json(base_config_json());
  auto j = base_config_json();
  j["objective"]["seed"] = 6;
  auto cfg2 = ExperimentConfig::from_json(j);
  CHECK_THROWS_AS(compare({cfg1, cfg2}), std::invalid_argument);
}

TEST_CASE("auto_alpha: no wrapper reduces to c / sqrt(T)") {
  auto j = base_config_json();
  j["objective"] = {{"kind", "sigmoid_regression"}, {"d", 4}, {"n", 30}, {"seed", 3},
                    {"options", nlohmann::json::object()}};
  j["alpha"] = {{"auto", 0.1}};
  j["T"] = 400;
  const auto cfg = ExperimentConfig::from_json(j);
  const AutoAlphaResult a = auto_alpha(cfg, 40);
  CHECK(a.alpha == a.c / std::sqrt(400.0));
  CHECK(a.k_hat == 0.0);
  CHECK_FALSE(a.f_star_fallback);
}

TEST_CASE("auto_alpha: elementwise pilot lands near half acceptance") {
  auto j = base_config_json();
  j["objective"] = {{"kind", "sigmoid_regression"}, {"d", 8}, {"n", 40}, {"seed", 13},
                    {"options", {{"row_bias", 0.6}, {"teacher_scale", 3.0}}}};
  j["wrapper"] = "rva_elementwise";
  j["alpha"] = {{"auto", 0.1}};
  j["T"] = 1000;
  const auto cfg = ExperimentConfig::from_json(j);
  const AutoAlphaResult a = auto_alpha(cfg, 200);
  CHECK(a.k_hat / 1000.0 == doctest::Approx(0.5).epsilon(0.2));
  CHECK(a.alpha == a.c / std::sqrt(1000.0 + 4.0 * a.k_hat));
  // substitute k_hat = T/2: alpha approaches c / sqrt(3T)
  CHECK(a.alpha == doctest::Approx(a.c / std::sqrt(3.0 * 1000.0)).epsilon(0.15));
}

TEST_CASE("auto_alpha: missing reference optimum falls back to the pilot minimum") {
  // custom quadratic objectives carry no f_star; route through a run summary
  // is not available here, so check the objective-level contract instead
  const std::vector<Vec> rows = {{1.0, 0.0}, {0.0, 1.0}};
  const Objective obj = Objective::quadratic_from(rows, {0.5, -0.25}, 5.0);
  CHECK_FALSE(obj.f_star_ref().has_value());
}

TEST_CASE("bound_check: start at the optimum gives bound 0 and observed 0") {
  auto j = base_config_json();
  j["objective"] = {{"kind", "quadratic"}, {"d", 2}, {"n", 4}, {"seed", 10},
                    {"options", {{"box_halfwidth", 5.0}}}};
  j["T"] = 10;
  j["seeds"] = {1};
  auto cfg = ExperimentConfig::from_json(j);
  RunSummary s = run_experiment(cfg);
  s.mean_min_grad_norm_sq = 0.0;  // as if started at the optimum
  BoundInputs in;
  in.T = 10;
  in.f0 = 1.0;
  in.f_star = 1.0;
  in.L = 1.0;
  in.sigma = 1.0;
  const BoundCheckResult r = bound_check(s, in);
  CHECK(r.valid);
  CHECK(r.bound == 0.0);
  CHECK(r.satisfied);
}

TEST_CASE("bound_check: envelopes only ever raise the bound") {
  BoundInputs mean_in;
  mean_in.T = 500;
  mean_in.k = 120;
  mean_in.l = 40;
  mean_in.u_a = 0.3;  // mean u
  mean_in.u_b = 0.3;
  mean_in.B = 0.2;
  mean_in.f0 = 2.0;
  mean_in.f_star = 0.0;
  mean_in.L = 1.0;
  mean_in.sigma = 1.0;
  BoundInputs env_in = mean_in;
  env_in.u_a = 0.1;  // min envelope <= mean
  env_in.u_b = 0.6;  // max envelope >= mean
  env_in.B = 0.5;    // max envelope >= mean
  RunSummary dummy;
  dummy.mean_min_grad_norm_sq = 0.0;
  const double bound_mean = bound_check(dummy, mean_in).bound;
  const double bound_env = bound_check(dummy, env_in).bound;
  CHECK(bound_env >= bound_mean);
}

TEST_CASE("sgd baseline records k = l = 0 and a valid 1/sqrt(T) bound") {
  auto j = base_config_json();
  j["T"] = 100;
  j["seeds"] = nlohmann::json::array();
  for (int s = 1; s <= 10; ++s) j["seeds"].push_back(s);
  const RunSummary s = run_experiment(ExperimentConfig::from_json(j));
  for (const auto& seed : s.per_seed) {
    CHECK(seed.ledger.k == 0);
    CHECK(seed.ledger.l == 0);
  }
  CHECK(s.theory.valid);
  CHECK(s.theory.rate == 1.0 / std::sqrt(100.0));
  CHECK(s.theory.satisfied);
  CHECK(s.mean_min_grad_norm_sq <= s.theory.bound * 1.05);
}

TEST_CASE("divergence guard flags exploding seeds instead of crashing") {
  // logistic has no projection box; a huge step makes f grow linearly in |x|
  auto j = base_config_json();
  j["objective"] = {{"kind", "logistic"}, {"d", 2}, {"n", 3}, {"seed", 2},
                    {"options", nlohmann::json::object()}};
  j["alpha"] = {{"fixed", 1e8}};
  j["T"] = 60;
  j["seeds"] = {1};
  const RunSummary s = run_experiment(ExperimentConfig::from_json(j));
  CHECK(s.per_seed[0].diverged);
  CHECK(s.diverged_seeds == 1);
}

TEST_CASE("threshold bookkeeping: iterations_to_threshold sits on the recording grid") {
  auto j = base_config_json();
  j["threshold"] = 1e300;  // satisfied immediately
  j["seeds"] = {1};
  const RunSummary s = run_experiment(ExperimentConfig::from_json(j));
  REQUIRE(s.per_seed[0].iterations_to_threshold.has_value());
  CHECK(*s.per_seed[0].iterations_to_threshold == 0);
}
