// sgdlab CLI: run experiments, compare configurations, evaluate rate formulas,
// verify the Gaussian expectation identities, and plot trajectories.
//
// Exit codes: 0 success, 1 usage/config error, 2 lemma or bound-check failure,
// 3 divergence in every seed of a run.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sgdlab/experiment.hpp"
#include "sgdlab/stats.hpp"
#include "sgdlab/svg_plot.hpp"
#include "sgdlab/theory.hpp"

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const auto config = sgdlab::ExperimentConfig::from_json(load_json(config_path));
  const sgdlab::RunSummary summary = sgdlab::run_experiment(config);
  if (!out_dir.empty()) sgdlab::write_artifacts(summary, out_dir);
  std::cout << summary.to_json().dump(2) << '\n';
  if (summary.diverged_seeds == summary.per_seed.size()) {
    std::cerr << "all seeds diverged\n";
    return 3;
  }
  return 0;
}

int cmd_compare(const std::vector<std::string>& config_paths, const std::string& out_dir) {
  std::vector<sgdlab::ExperimentConfig> configs;
  for (const auto& p : config_paths) {
    auto c = sgdlab::ExperimentConfig::from_json(load_json(p));
    if (c.label.empty()) c.label = std::filesystem::path(p).stem().string();
    configs.push_back(std::move(c));
  }
  const sgdlab::CompareResult res = sgdlab::compare(configs);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream(out_dir + "/compare.json", std::ios::binary)
        << res.to_json().dump(2) << '\n';
    std::ofstream(out_dir + "/compare.csv", std::ios::binary) << res.to_csv();
    for (std::size_t i = 0; i < res.summaries.size(); ++i) {
      sgdlab::write_artifacts(res.summaries[i], out_dir + "/" + res.rows[i].label);
    }
  }
  std::cout << res.to_csv();
  return 0;
}

int cmd_bound(double T, double k, double l, double ua, double ub, double B, double f0,
              double fstar, double L, double sigma, bool rva, double d) {
  nlohmann::json out;
  try {
    if (rva) {
      out["rate"] = sgdlab::theory::rva_rate(T, k, d);
      out["alpha"] = sgdlab::theory::rva_alpha(T, k, d, f0, fstar, L, sigma);
      out["bound"] = sgdlab::theory::unified_bound(out["rate"].get<double>(), f0, fstar,
                                                   L, sigma);
      out["formula"] = "rva";
      out["d"] = d;
    } else {
      out["rate"] = sgdlab::theory::unified_rate(T, k, l, ua, ub, B);
      out["alpha"] = sgdlab::theory::optimal_alpha(T, k, B, f0, fstar, L, sigma);
      out["bound"] = sgdlab::theory::unified_bound(out["rate"].get<double>(), f0, fstar,
                                                   L, sigma);
      out["formula"] = "unified";
    }
  } catch (const sgdlab::theory::InvalidBound& e) {
    out["error"] = e.what();
    out["denominator"] = e.denominator();
    std::cout << out.dump(2) << '\n';
    return 1;
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_verify_lemmas(std::size_t samples, std::uint64_t seed, const std::string& out_path) {
  const auto reports = sgdlab::stats::run_lemma_suite(samples, seed);
  nlohmann::json arr = nlohmann::json::array();
  bool all_pass = true;
  std::printf("%-14s %4s %12s %12s %12s %6s  %s\n", "part", "d", "estimate", "target",
              "stderr", "pass", "note");
  for (const auto& r : reports) {
    arr.push_back(r.to_json());
    all_pass = all_pass && r.pass;
    std::printf("%-14s %4zu %12.6g %12.6g %12.3g %6s  %s\n", r.part.c_str(), r.d,
                r.estimate, r.target, r.std_error, r.pass ? "yes" : "NO",
                r.note.c_str());
  }
  if (!out_path.empty()) {
    std::ofstream(out_path, std::ios::binary) << arr.dump(2) << '\n';
  } else {
    std::cout << arr.dump(2) << '\n';
  }
  return all_pass ? 0 : 2;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out,
             const std::string& column, const std::string& title) {
  std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
  sgdlab::PlotOptions opts;
  opts.column = column;
  opts.title = title;
  sgdlab::emit_plot(paths, out, opts);
  std::cout << "wrote " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sgdlab: stochastic-optimizer acceleration laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  run->add_option("--config", config_path, "Experiment config JSON")->required();
  run->add_option("--out", out_dir, "Output directory for CSV/JSON artifacts");

  std::vector<std::string> compare_paths;
  std::string compare_out;
  auto* cmp = app.add_subcommand("compare", "Run several configs on shared seeds");
  cmp->add_option("--configs", compare_paths, "Config JSON paths")->required()
      ->expected(-1);
  cmp->add_option("--out", compare_out, "Output directory");

  double T = 0, k = 0, l = 0, ua = 0, ub = 0, B = 0, f0 = 0, fstar = 0, L = 1, sigma = 1,
         d = 1;
  bool rva = false;
  auto* bound = app.add_subcommand("bound", "Evaluate the convergence-rate formulas");
  bound->add_option("--T", T)->required();
  bound->add_option("--k", k);
  bound->add_option("--l", l);
  bound->add_option("--ua", ua);
  bound->add_option("--ub", ub);
  bound->add_option("--B", B);
  bound->add_option("--f0", f0);
  bound->add_option("--fstar", fstar);
  bound->add_option("--L", L);
  bound->add_option("--sigma", sigma);
  bound->add_flag("--rva", rva, "Use the random-vector formula (needs --d)");
  bound->add_option("--d", d, "Dimension for the random-vector formula");

  std::size_t samples = 1000000;
  std::uint64_t seed = 42;
  std::string lemmas_out;
  auto* verify = app.add_subcommand("verify-lemmas",
                                    "Monte-Carlo verification of the expectation identities");
  verify->add_option("--samples", samples, "Samples per identity (default 10^6)");
  verify->add_option("--seed", seed, "Suite seed (default 42)");
  verify->add_option("--out", lemmas_out, "Write the JSON report here instead of stdout");

  std::vector<std::string> plot_inputs;
  std::string plot_out, plot_column = "f", plot_title;
  auto* plot = app.add_subcommand("plot", "Render trajectory CSVs as an SVG line chart");
  plot->add_option("--inputs", plot_inputs, "Trajectory CSV files")->required()
      ->expected(-1);
  plot->add_option("--out", plot_out, "Output SVG path")->required();
  plot->add_option("--column", plot_column, "f or grad_norm_sq");
  plot->add_option("--title", plot_title, "Chart title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (cmp->parsed()) return cmd_compare(compare_paths, compare_out);
    if (bound->parsed()) return cmd_bound(T, k, l, ua, ub, B, f0, fstar, L, sigma, rva, d);
    if (verify->parsed()) return cmd_verify_lemmas(samples, seed, lemmas_out);
    if (plot->parsed()) return cmd_plot(plot_inputs, plot_out, plot_column, plot_title);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
