// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance is pinned here, in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sgdlab/experiment.hpp"
#include "sgdlab/objective.hpp"
#include "sgdlab/stats.hpp"
#include "sgdlab/svg_plot.hpp"
#include "sgdlab/theory.hpp"

using namespace sgdlab;
namespace th = sgdlab::theory;
namespace st = sgdlab::stats;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// The shared suite for criteria 4 and 5: a realizable sigmoid regression task
// with nearly homogeneous components, T = 5000, 20 seeds.
nlohmann::json suite_config(const std::string& optimizer_kind, double alpha,
                            const std::string& wrapper,
                            const nlohmann::json& opt_extra = {}) {
  nlohmann::json opt = {{"kind", optimizer_kind}};
  for (auto it = opt_extra.begin(); it != opt_extra.end(); ++it) opt[it.key()] = *it;
  nlohmann::json seeds = nlohmann::json::array();
  for (int s = 1; s <= 20; ++s) seeds.push_back(s);
  return {
      {"objective",
       {{"kind", "sigmoid_regression"},
        {"d", 20},
        {"n", 500},
        {"seed", 2024},
        {"options", {{"row_bias", 10.0}, {"teacher_scale", 2.0}}}}},
      {"optimizer", opt},
      {"wrapper", wrapper},
      {"alpha", {{"fixed", alpha}}},
      {"T", 5000},
      {"seeds", seeds},
      {"full_grad_every", 1},
      {"threshold", 4.5e-4},
  };
}

// --- criterion 1: Monte-Carlo expectation identities -------------------------

Outcome criterion1() {
  Outcome out;
  const double t0 = now_seconds();
  const auto reports = st::run_lemma_suite(1000000, 42);
  const double elapsed = now_seconds() - t0;
  int checked = 0;
  for (const auto& r : reports) {
    if (r.part == "P1" || r.part == "P2" || r.part == "P5" || r.part == "P6" ||
        r.part == "P4") {
      ++checked;
      if (std::abs(r.estimate - r.target) > 0.02 * std::abs(r.target)) {
        out.fail(r.part + " d=" + std::to_string(r.d) + " estimate " + fmt(r.estimate) +
                 " misses target " + fmt(r.target) + " by more than 2%");
      }
    } else if (r.part == "P3") {
      ++checked;
      if (std::abs(r.estimate) > 5.0 * r.std_error) {
        out.fail("P3 d=" + std::to_string(r.d) + " estimate " + fmt(r.estimate) +
                 " outside 5 stderr");
      }
    }
    if (!r.pass && r.part.rfind("k_", 0) != 0) {
      out.fail(r.part + " d=" + std::to_string(r.d) + " reported pass=false");
    }
  }
  if (checked < 23) out.fail("expected 23 identity reports, saw " + std::to_string(checked));
  if (elapsed > 60.0) out.fail("runtime " + fmt(elapsed) + "s exceeds 60s");
  out.note("23 identities across d in {1,2,10,100}, " + fmt(elapsed) + "s");
  return out;
}

// --- criterion 2: the exact binomial k-law -----------------------------------

Outcome criterion2() {
  Outcome out;
  for (int T = 129; T <= 1024; ++T) {
    const auto r = th::check_k_lemma(T);
    if (!r.holds) {
      out.fail("Pr[k > floor(T/3)] = " + fmt(r.tail) + " < 1 - 1/T at T = " +
               std::to_string(T));
      break;
    }
  }
  for (int T : {100, 1000}) {
    const double tail = th::binom_tail_geq(T, T / 2);
    const double hi = 0.5 + th::binom_pmf(T, T / 2);
    if (tail < 0.5 || tail > hi) {
      out.fail("Pr[k >= T/2] = " + fmt(tail) + " outside [0.5, 0.5 + pmf] at T = " +
               std::to_string(T));
    }
  }
  RandomStream rng = RandomStream(42).fork(2);
  const auto kd = st::verify_k_distribution(100, 100000, rng);
  if (kd.chi2.estimate <= 0.001) {
    out.fail("chi-square p " + fmt(kd.chi2.estimate) + " <= 0.001 over 1e5 runs");
  }
  if (!kd.tail.pass) out.fail("empirical tail misses the exact value by > 4 stderr");
  out.note("exact law holds on [129,1024]; chi2 p = " + fmt(kd.chi2.estimate));
  return out;
}

// --- criterion 3: closed-form spot checks -------------------------------------

Outcome criterion3() {
  Outcome out;
  for (double T : {1.0, 10.0, 10000.0}) {
    const double r = th::unified_rate(T, 0, 0, 0.5, 0.5, 1.0);
    if (std::abs(r - 1.0 / std::sqrt(T)) > 1e-12 / std::sqrt(T)) {
      out.fail("unified_rate(T,0,0) != 1/sqrt(T) at T = " + fmt(T));
    }
    const double half = th::rva_rate(T, T / 2.0, 1.0);
    const double half_expect = (std::sqrt(3.0) / 2.0) / std::sqrt(T);
    if (std::abs(half - half_expect) > 1e-12 * half_expect) {
      out.fail("rva_rate(T, T/2, 1) misses sqrt(3)/2/sqrt(T) at T = " + fmt(T));
    }
    const double third = th::rva_rate(T, T / 3.0, 1.0);
    const double third_expect = (std::sqrt(21.0) / 5.0) / std::sqrt(T);
    if (std::abs(third - third_expect) > 1e-12 * third_expect) {
      out.fail("rva_rate(T, T/3, 1) misses sqrt(21)/5/sqrt(T) at T = " + fmt(T));
    }
  }
  RandomStream rng(7);
  std::size_t compared = 0;
  while (compared < 10000) {
    const double T = 1.0 + std::floor(rng.uniform() * 1e6);
    const double k = std::floor(rng.uniform() * T);
    const double l = std::floor(rng.uniform() * (T - k));
    const double ua = 2.0 * rng.uniform();
    const double ub = 2.0 * rng.uniform();
    const double B = 4.0 * rng.uniform();
    double unified;
    try {
      unified = th::unified_rate(T, k, l, ua, ub, B);
    } catch (const th::InvalidBound&) {
      continue;
    }
    ++compared;
    if (th::reject_rate(T, k, ua, B) > unified) {
      out.fail("reject_rate exceeded unified_rate at T=" + fmt(T) + " k=" + fmt(k) +
               " l=" + fmt(l));
      break;
    }
  }
  out.note("spot values to 1e-12; inequality held on 10^4 random valid inputs");
  return out;
}

// --- criterion 4: SGD bound reproduction --------------------------------------

Outcome criterion4(RunSummary& out_summary) {
  Outcome out;
  const double t0 = now_seconds();
  auto j = suite_config("sgd", 0.01, "none");
  auto cfg = ExperimentConfig::from_json(j);
  const Objective obj = cfg.objective.build();
  const double f0 = obj.full_value(obj.x0());
  const double L = obj.L_ref();
  const double sigma = obj.sigma_ref();
  const double T = static_cast<double>(cfg.T);
  const double c = std::sqrt(2.0 * f0 / (L * sigma * sigma));
  cfg.alpha.value = c / std::sqrt(T);

  const RunSummary s = run_experiment(cfg);
  const double elapsed = now_seconds() - t0;
  const double bound = (1.0 / std::sqrt(T)) * std::sqrt(2.0 * f0 * L * sigma * sigma);
  const double observed = s.mean_min_grad_norm_sq;
  if (s.diverged_seeds != 0) out.fail("seeds diverged");
  if (!(observed <= bound * 1.05)) {
    out.fail("mean min |grad f|^2 = " + fmt(observed) + " exceeds bound*1.05 = " +
             fmt(bound * 1.05));
  }
  if (elapsed > 120.0) out.fail("runtime " + fmt(elapsed) + "s exceeds 120s");
  out.note("observed " + fmt(observed) + " <= " + fmt(bound * 1.05) + " (bound " +
           fmt(bound) + "), alpha " + fmt(cfg.alpha.value) + ", " + fmt(elapsed) + "s");
  out_summary = s;
  return out;
}

// --- criterion 5: reject-accelerating contract ---------------------------------

Outcome criterion5() {
  Outcome out;
  const double t0 = now_seconds();
  struct Case {
    std::string opt;
    double alpha;
    nlohmann::json extra;
  };
  const std::vector<Case> cases = {{"sgdm", 0.01, {{"mu", 0.8}}},
                                   {"lion", 0.001, nlohmann::json::object()}};
  for (const Case& c : cases) {
    auto base_cfg = ExperimentConfig::from_json(suite_config(c.opt, c.alpha, "none", c.extra));
    auto wrap_cfg =
        ExperimentConfig::from_json(suite_config(c.opt, c.alpha, "reject", c.extra));
    const RunSummary base = run_experiment(base_cfg);
    const RunSummary wrapped = run_experiment(wrap_cfg);

    for (const auto& seed : wrapped.per_seed) {
      if (seed.ledger.l != 0) {
        out.fail(c.opt + "+reject recorded l = " + std::to_string(seed.ledger.l) +
                 " on seed " + std::to_string(seed.seed));
      }
    }
    if (!base.median_iterations_to_threshold || !wrapped.median_iterations_to_threshold) {
      out.fail(c.opt + ": median iterations_to_threshold missing");
      continue;
    }
    const double mb = *base.median_iterations_to_threshold;
    const double mw = *wrapped.median_iterations_to_threshold;
    if (!(mw <= 1.05 * mb)) {
      out.fail(c.opt + ": wrapped median " + fmt(mw) + " > 1.05 * baseline " + fmt(mb));
    }
    // Theoretical rates at the baseline's measured constants.
    const Objective obj = base_cfg.objective.build();
    const BoundInputs in = inputs_from_summary(base, obj, obj.full_value(obj.x0()));
    try {
      const double unwrapped_rate = th::unified_rate(in.T, in.k, in.l, in.u_a, in.u_b, in.B);
      const double wrapped_rate = th::reject_rate(in.T, in.k, in.u_a, in.B);
      if (wrapped_rate > unwrapped_rate) {
        out.fail(c.opt + ": wrapped rate " + fmt(wrapped_rate) + " > unwrapped " +
                 fmt(unwrapped_rate));
      }
    } catch (const th::InvalidBound& e) {
      out.note(c.opt + ": unwrapped denominator invalid (" + fmt(e.denominator()) +
               "), inequality vacuous");
    }
    out.note(c.opt + " medians " + fmt(mw) + "/" + fmt(mb) + " = " + fmt(mw / mb));
  }
  out.note(fmt(now_seconds() - t0) + "s");
  return out;
}

// --- criterion 6: element-wise random-vector speedup ----------------------------

Outcome criterion6() {
  Outcome out;
  const double t0 = now_seconds();
  nlohmann::json seeds = nlohmann::json::array();
  for (int s = 1; s <= 20; ++s) seeds.push_back(s);
  nlohmann::json base = {
      {"objective",
       {{"kind", "sigmoid_regression"},
        {"d", 50},
        {"n", 1000},
        {"seed", 123},
        {"options", {{"row_bias", 1.0}, {"teacher_scale", 6.0}}}}},
      {"optimizer", {{"kind", "sgd"}}},
      {"wrapper", "none"},
      {"alpha", {{"auto", 0.05}}},
      {"T", 3000},
      {"seeds", seeds},
      {"full_grad_every", 1},
      {"threshold", 1e-3},
  };
  auto sgd_cfg = ExperimentConfig::from_json(base);
  base["wrapper"] = "rva_elementwise";
  auto rva_cfg = ExperimentConfig::from_json(base);

  const RunSummary sgd = run_experiment(sgd_cfg);
  const RunSummary rva = run_experiment(rva_cfg);
  const double elapsed = now_seconds() - t0;

  const double T = 3000.0;
  for (const auto& seed : rva.per_seed) {
    const double frac = seed.k_hat / T;
    if (frac < 0.45 || frac > 0.55) {
      out.fail("seed " + std::to_string(seed.seed) + ": k/T = " + fmt(frac) +
               " outside [0.45, 0.55]");
    }
  }
  if (!sgd.median_iterations_to_threshold || !rva.median_iterations_to_threshold) {
    out.fail("median iterations_to_threshold missing");
  } else {
    const double ms = *sgd.median_iterations_to_threshold;
    const double mr = *rva.median_iterations_to_threshold;
    if (!(mr <= ms)) {
      out.fail("rva median " + fmt(mr) + " > sgd median " + fmt(ms));
    }
    const double speedup = ms / mr;
    const double predicted =
        (1.0 / std::sqrt(T)) / th::rva_rate(T, rva.k_hat_mean, 1.0);
    out.note("measured speedup " + fmt(speedup) + " (assert >= 1.00); theory predicts " +
             fmt(predicted) + " at the optimal step size (>= 1.09 whenever k >= T/3)");
  }
  if (elapsed > 180.0) out.fail("runtime " + fmt(elapsed) + "s exceeds 180s");
  out.note("k/T in [0.45,0.55] on all seeds, " + fmt(elapsed) + "s");
  return out;
}

// --- criterion 7: byte-identical reruns -----------------------------------------

Outcome criterion7(const RunSummary& c4_summary) {
  Outcome out;
  // Re-run the criterion-4 experiment with the identical config.
  const RunSummary again = run_experiment(c4_summary.config);
  if (again.to_json().dump(2) != c4_summary.to_json().dump(2)) {
    out.fail("summary JSON differs between identical runs");
  }
  for (std::size_t i = 0; i < again.per_seed.size(); ++i) {
    const std::string a = trajectory_csv(c4_summary.per_seed[i].trajectory,
                                         c4_summary.alpha_used);
    const std::string b = trajectory_csv(again.per_seed[i].trajectory, again.alpha_used);
    if (a != b) {
      out.fail("seed " + std::to_string(again.per_seed[i].seed) + " CSV differs");
      break;
    }
  }
  // And through the artifact writer, byte for byte on disk.
  const auto dir = std::filesystem::temp_directory_path() / "sgdlab_acceptance_c7";
  std::filesystem::remove_all(dir);
  write_artifacts(c4_summary, dir / "a");
  write_artifacts(again, dir / "b");
  for (const auto& entry : std::filesystem::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename();
    std::ifstream fa(entry.path(), std::ios::binary);
    std::ifstream fb(dir / "b" / name, std::ios::binary);
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    if (sa.str() != sb.str() || sa.str().empty()) {
      out.fail("artifact " + name.string() + " differs on disk");
    }
  }
  out.note("summary, objective and per-seed CSV artifacts byte-identical");
  return out;
}

// --- criterion 8: gradient correctness -------------------------------------------

Outcome criterion8() {
  Outcome out;
  RandomStream rng(4242);
  for (ObjectiveKind kind : {ObjectiveKind::quadratic, ObjectiveKind::logistic,
                             ObjectiveKind::sigmoid_regression,
                             ObjectiveKind::noisy_rastrigin}) {
    const Objective obj = make_objective(kind, 8, 40, 99);
    double worst = 0.0;
    for (int probe = 0; probe < 100; ++probe) {
      const Vec x = obj.random_box_point(rng);
      const Vec g = obj.full_gradient(x);
      Vec fd(x.size());
      for (std::size_t j = 0; j < x.size(); ++j) {
        Vec xp = x, xm = x;
        xp[j] += 1e-6;
        xm[j] -= 1e-6;
        fd[j] = (obj.full_value(xp) - obj.full_value(xm)) / 2e-6;
      }
      worst = std::max(worst, norm(sub(fd, g)) / (norm(g) + 1e-10));
    }
    if (!(worst < 1e-5)) {
      out.fail(to_string(kind) + ": worst relative FD error " + fmt(worst) + " >= 1e-5");
    }
  }
  out.note("100 probes per kind, relative error < 1e-5");
  return out;
}

}  // namespace

int main() {
  int failures = 0;
  RunSummary c4_summary;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"C1 lemma suite (10^6 samples, seed 42)", criterion1},
      {"C2 k-law: exact binomial + empirical histogram", criterion2},
      {"C3 closed-form rate spot checks", criterion3},
      {"C4 SGD bound reproduction (20 seeds, T=5000)",
       [&]() { return criterion4(c4_summary); }},
      {"C5 reject-accelerating contract (sgdm, lion)", criterion5},
      {"C6 element-wise RVA speedup vs SGD (20 seeds)", criterion6},
      {"C7 determinism: byte-identical re-run", [&]() { return criterion7(c4_summary); }},
      {"C8 gradient correctness (finite differences)", criterion8},
  };
  for (const auto& [name, fn] : criteria) {
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %s%s%s\n", out.pass ? "PASS" : "FAIL", name.c_str(),
                out.detail.empty() ? "" : " -- ", out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 2;
}
