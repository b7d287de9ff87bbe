#include "sgdlab/stats.hpp"

#include <cmath>
#include <future>
#include <stdexcept>

#include "sgdlab/theory.hpp"

namespace sgdlab::stats {

namespace {

// Regularized lower incomplete gamma P(a, x) by series expansion (x < a + 1).
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by continued fraction (x >= a + 1).
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

struct RunningMoments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double v) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  double std_error() const {
    if (n < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

void finish_report(McReport& r) {
  r.abs_tol = r.rel_tol * std::abs(r.target);
  r.pass = std::abs(r.estimate - r.target) <= std::max(r.abs_tol, r.z * r.std_error);
}

}  // namespace

std::string to_string(LemmaPart part) {
  switch (part) {
    case LemmaPart::P1: return "P1";
    case LemmaPart::P2: return "P2";
    case LemmaPart::P3: return "P3";
    case LemmaPart::P4: return "P4";
    case LemmaPart::P5: return "P5";
    case LemmaPart::P6: return "P6";
  }
  throw std::logic_error("unreachable lemma part");
}

double chi2_sf(double x, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("chi2_sf: dof must be positive");
  if (x < 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * x);
}

McReport verify_expectation(LemmaPart part, std::size_t d, double b,
                            const std::optional<Vec>& x, std::size_t n_samples,
                            RandomStream& rng, double z, double rel_tol) {
  if (d < 1) throw std::invalid_argument("verify_expectation: d must be >= 1");
  if (!(b > 0.0)) throw std::invalid_argument("verify_expectation: b must be positive");
  if (n_samples < 10000) {
    throw std::invalid_argument("verify_expectation: n_samples must be >= 10^4");
  }
  const bool needs_x =
      part == LemmaPart::P2 || part == LemmaPart::P5 || part == LemmaPart::P6;
  if (needs_x && (!x.has_value() || x->size() != d)) {
    throw std::invalid_argument("verify_expectation: this part requires x with dim d");
  }
  if (part == LemmaPart::P3 && d < 2) {
    throw std::invalid_argument("verify_expectation: P3 requires d >= 2");
  }

  McReport r;
  r.part = to_string(part);
  r.d = d;
  r.b = b;
  r.n_samples = n_samples;
  r.seed = rng.seed();
  r.z = z;
  r.rel_tol = rel_tol;

  const double xnsq = needs_x ? norm_sq(*x) : 0.0;
  switch (part) {
    case LemmaPart::P1: r.target = b; break;
    case LemmaPart::P2: r.target = b * xnsq; break;
    case LemmaPart::P3: r.target = 0.0; break;
    case LemmaPart::P4: r.target = 1.0 / static_cast<double>(d); break;
    case LemmaPart::P5: r.target = xnsq / static_cast<double>(d); break;
    case LemmaPart::P6: r.target = xnsq / (2.0 * static_cast<double>(d)); break;
  }

  RunningMoments mom;
  std::size_t degenerate = 0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Vec y = sample_gaussian(rng, d, b);
    double stat = 0.0;
    switch (part) {
      case LemmaPart::P1:
        stat = y[0] * y[0];
        break;
      case LemmaPart::P2: {
        const double ip = dot(*x, y);
        stat = ip * ip;
        break;
      }
      case LemmaPart::P3: {
        const double ynsq = norm_sq(y);
        if (ynsq == 0.0) { ++degenerate; continue; }
        stat = y[0] * y[1] / ynsq;
        break;
      }
      case LemmaPart::P4: {
        const double ynsq = norm_sq(y);
        if (ynsq == 0.0) { ++degenerate; continue; }
        stat = y[0] * y[0] / ynsq;
        break;
      }
      case LemmaPart::P5: {
        const double ynsq = norm_sq(y);
        if (ynsq == 0.0) { ++degenerate; continue; }
        const double ip = dot(*x, y);
        stat = ip * ip / ynsq;
        break;
      }
      case LemmaPart::P6: {
        const double ynsq = norm_sq(y);
        if (ynsq == 0.0) { ++degenerate; continue; }
        const double ip = dot(*x, y);
        if (ip > 0.0) {
          stat = ip * ip / ynsq;
          ++r.conditional_count;
        } else {
          stat = 0.0;
        }
        break;
      }
    }
    mom.add(stat);
  }
  r.estimate = mom.mean;
  r.std_error = mom.std_error();
  if (degenerate > 0) r.note = std::to_string(degenerate) + " degenerate draws skipped";
  if (part == LemmaPart::P6 && r.conditional_count < 100) {
    r.pass = false;
    r.abs_tol = r.rel_tol * std::abs(r.target);
    r.note = "inconclusive: only " + std::to_string(r.conditional_count) +
             " accepted draws (< 100)";
    return r;
  }
  finish_report(r);
  return r;
}

KDistributionResult verify_k_distribution(int T, std::size_t n_runs, RandomStream& rng) {
  if (T < 1) throw std::invalid_argument("verify_k_distribution: T must be >= 1");
  if (n_runs < 1000) {
    throw std::invalid_argument("verify_k_distribution: n_runs must be >= 10^3");
  }
  // Fixed nonzero reference vector; the acceptance probability of each fresh
  // Gaussian candidate against it is exactly 1/2 regardless of the choice.
  const Vec w = {1.0, 2.0, -0.5};

  KDistributionResult res;
  res.histogram.assign(static_cast<std::size_t>(T) + 1, 0);
  const int half = (T + 1) / 2;  // ceil(T/2)
  std::size_t tail_hits = 0;
  for (std::size_t run = 0; run < n_runs; ++run) {
    int k = 0;
    for (int t = 0; t < T; ++t) {
      const Vec u = sample_gaussian(rng, w.size(), 1.0);
      if (dot(u, w) > 0.0) ++k;
    }
    ++res.histogram[static_cast<std::size_t>(k)];
    if (k >= half) ++tail_hits;
  }

  McReport tail;
  tail.part = "k_tail_T" + std::to_string(T);
  tail.d = w.size();
  tail.n_samples = n_runs;
  tail.seed = rng.seed();
  tail.estimate = static_cast<double>(tail_hits) / static_cast<double>(n_runs);
  tail.target = theory::binom_tail_geq(T, half);
  tail.std_error =
      std::sqrt(tail.estimate * (1.0 - tail.estimate) / static_cast<double>(n_runs));
  tail.z = 4.0;
  tail.rel_tol = 0.0;
  finish_report(tail);
  res.tail = tail;

  // Equal-probability-mass bins from the exact pmf, ~20 bins.
  const std::size_t target_bins = std::min<std::size_t>(20, static_cast<std::size_t>(T) + 1);
  std::vector<std::size_t> bin_upper;  // inclusive upper k of each bin
  double cum = 0.0;
  std::size_t next_bin = 1;
  for (int a = 0; a <= T; ++a) {
    cum += theory::binom_pmf(T, a);
    if (cum >= static_cast<double>(next_bin) / static_cast<double>(target_bins) ||
        a == T) {
      bin_upper.push_back(static_cast<std::size_t>(a));
      ++next_bin;
      if (bin_upper.size() == target_bins) {
        bin_upper.back() = static_cast<std::size_t>(T);
        break;
      }
    }
  }
  if (bin_upper.empty() || bin_upper.back() != static_cast<std::size_t>(T)) {
    bin_upper.push_back(static_cast<std::size_t>(T));
  }
  double chi2 = 0.0;
  std::size_t lo = 0;
  for (std::size_t upper : bin_upper) {
    double expected = 0.0;
    double observed = 0.0;
    for (std::size_t a = lo; a <= upper; ++a) {
      expected += theory::binom_pmf(T, static_cast<int>(a)) * static_cast<double>(n_runs);
      observed += static_cast<double>(res.histogram[a]);
    }
    if (expected > 0.0) {
      const double diff = observed - expected;
      chi2 += diff * diff / expected;
    }
    lo = upper + 1;
  }
  res.chi2_stat = chi2;
  res.bins = bin_upper.size();

  McReport cr;
  cr.part = "k_chi2_T" + std::to_string(T);
  cr.d = w.size();
  cr.n_samples = n_runs;
  cr.seed = rng.seed();
  cr.estimate = chi2_sf(chi2, static_cast<double>(res.bins - 1));  // p-value
  cr.target = 1.0;  // informational; the pass rule is p > 0.001
  cr.z = 0.0;
  cr.rel_tol = 0.0;
  cr.abs_tol = 0.0;
  cr.pass = cr.estimate > 0.001;
  cr.note = "chi2=" + std::to_string(chi2) + ", bins=" + std::to_string(res.bins) +
            ", pass iff p > 0.001";
  res.chi2 = cr;
  return res;
}

std::vector<McReport> run_lemma_suite(std::size_t n_samples, std::uint64_t seed) {
  const std::vector<std::size_t> dims = {1, 2, 10, 100};
  const RandomStream master(seed);

  struct Job {
    LemmaPart part;
    std::size_t d;
    double b;
    std::uint64_t stream_id;
  };
  std::vector<Job> jobs;
  std::uint64_t id = 1;
  for (std::size_t d : dims) {
    for (LemmaPart part : {LemmaPart::P1, LemmaPart::P2, LemmaPart::P3, LemmaPart::P4,
                           LemmaPart::P5, LemmaPart::P6}) {
      if (part == LemmaPart::P3 && d < 2) { ++id; continue; }
      const double b = (part == LemmaPart::P1 || part == LemmaPart::P2) ? 2.0 : 1.0;
      jobs.push_back({part, d, b, id++});
    }
  }

  std::vector<std::future<McReport>> futures;
  futures.reserve(jobs.size());
  for (const Job& job : jobs) {
    futures.push_back(std::async(std::launch::async, [job, &master, n_samples]() {
      RandomStream rng = master.fork(job.stream_id);
      const Vec x(job.d, 1.0);
      return verify_expectation(job.part, job.d, job.b, x, n_samples, rng);
    }));
  }

  auto kdist_future = std::async(std::launch::async, [&master, n_samples]() {
    RandomStream rng = master.fork(1000);
    const std::size_t n_runs = std::max<std::size_t>(1000, n_samples / 10);
    return verify_k_distribution(100, n_runs, rng);
  });

  std::vector<McReport> reports;
  reports.reserve(jobs.size() + 2);
  for (auto& f : futures) reports.push_back(f.get());
  KDistributionResult kd = kdist_future.get();
  reports.push_back(kd.tail);
  reports.push_back(kd.chi2);
  return reports;
}

nlohmann::json McReport::to_json() const {
  nlohmann::json j;
  j["part"] = part;
  j["d"] = d;
  j["b"] = b;
  j["estimate"] = estimate;
  j["target"] = target;
  j["stderr"] = std_error;
  j["n_samples"] = n_samples;
  j["seed"] = seed;
  j["z"] = z;
  j["rel_tol"] = rel_tol;
  j["abs_tol"] = abs_tol;
  j["pass"] = pass;
  j["conditional_count"] = conditional_count;
  j["note"] = note;
  return j;
}

}  // namespace sgdlab::stats
