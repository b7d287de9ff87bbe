#include "sgdlab/accel.hpp"

#include <cmath>

#include "doctest.h"

using namespace sgdlab;

TEST_CASE("residual: plain subtraction") {
  CHECK(residual({1.0, 0.0}, {1.0, 0.0}) == Vec{0.0, 0.0});
  CHECK(residual({2.0, 0.0}, {1.0, 0.0}) == Vec{1.0, 0.0});
  CHECK(residual({1.0, 0.0}, {0.0, 1.0}) == Vec{1.0, -1.0});
}

TEST_CASE("classify: consistency flags") {
  auto rec = classify({1.0, 0.0}, {1.0, 0.0});
  CHECK(rec.inner == 1.0);
  CHECK(rec.gamma_k == 1);
  CHECK(rec.gamma_l == 0);

  rec = classify({1.0, -1.0}, {0.0, 1.0});
  CHECK(rec.inner == -1.0);
  CHECK(rec.gamma_k == 0);
  CHECK(rec.gamma_l == 1);

  rec = classify({0.0, 0.0}, {1.0, 2.0});
  CHECK(rec.gamma_k == 0);
  CHECK(rec.gamma_l == 0);  // the nonzero-residual clause
  CHECK(rec.residual_norm_sq == 0.0);
}

TEST_CASE("classify: flags invariant under positive rescaling of the residual") {
  RandomStream rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const Vec r = sample_gaussian(rng, 5, 1.0);
    const Vec g = sample_gaussian(rng, 5, 1.0);
    const auto base = classify(r, g);
    for (double c : {1e-6, 0.03, 1.0, 7.5, 1e6}) {
      const auto scaled = classify(scale(r, c), g);
      CHECK(scaled.gamma_k == base.gamma_k);
      CHECK(scaled.gamma_l == base.gamma_l);
    }
  }
}

TEST_CASE("reject_filter: branch examples") {
  CHECK(reject_filter({2.0, 0.0}, {1.0, 0.0}) == Vec{2.0, 0.0});
  CHECK(reject_filter({1.0, 0.0}, {0.0, 1.0}) == Vec{0.0, 1.0});
  CHECK(reject_filter({1.0, 0.0}, {1.0, 0.0}) == Vec{1.0, 0.0});  // inner = 0 rejects
}

TEST_CASE("reject_filter: output residual is consistent or the output is the gradient") {
  RandomStream rng(9);
  for (int rep = 0; rep < 500; ++rep) {
    const Vec g = sample_gaussian(rng, 6, 1.0);
    const Vec grad = sample_gaussian(rng, 6, 1.0);
    const Vec out = reject_filter(g, grad);
    const double inner = dot(sub(out, grad), grad);
    CHECK((inner > 0.0 || out == grad));
  }
}

TEST_CASE("rva_apply_full: hand-evaluated acceptance and rejection") {
  CHECK(rva_apply_full({1.0, 0.0}, {1.0, 1.0}) == Vec{2.0, 1.0});
  CHECK(rva_apply_full({1.0, 0.0}, {-1.0, 0.5}) == Vec{1.0, 0.0});
}

TEST_CASE("rva_apply_elementwise: matching signs triple the coordinate") {
  CHECK(rva_apply_elementwise({2.0}, {0.7}) == Vec{6.0});
  CHECK(rva_apply_elementwise({2.0}, {-0.7}) == Vec{2.0});
  CHECK(rva_apply_elementwise({2.0, -1.0, 0.0}, {0.5, 0.5, 0.5}) == Vec{6.0, -1.0, 0.0});
}

TEST_CASE("rva_wrap: acceptance fraction is one half") {
  const Vec base = {1.0, 0.5, -0.2, 2.0};
  RandomStream rng(1234);
  const std::size_t n = 1000000;
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const RvaResult r = rva_wrap(base, rng, RvaMode::full);
    accepted += r.record.gamma_k;
    CHECK(r.record.gamma_l == 0);
  }
  const double frac = static_cast<double>(accepted) / static_cast<double>(n);
  const double se = 0.5 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(frac - 0.5) < 3.0 * se);
}

TEST_CASE("rva_wrap never flips descent: <dir, base> >= <base, base>") {
  const Vec base = {0.4, -1.2, 0.8};
  RandomStream rng(55);
  for (int rep = 0; rep < 5000; ++rep) {
    const RvaResult r = rva_wrap(base, rng, RvaMode::full);
    if (r.record.gamma_k == 1) {
      CHECK(dot(r.direction, base) >= norm_sq(base) * (1.0 - 1e-12));
    } else {
      CHECK(r.direction == base);
    }
  }
}

TEST_CASE("rva_wrap full: added-term ratio averaged over all wraps is |base|^2/(2d)") {
  const std::size_t d = 8;
  Vec base(d);
  for (std::size_t j = 0; j < d; ++j) base[j] = 0.3 * static_cast<double>(j + 1) - 1.0;
  RandomStream rng(77);
  const std::size_t n = 400000;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const RvaResult r = rva_wrap(base, rng, RvaMode::full);
    if (r.record.gamma_k == 1) {
      // <base,u>^2/|u|^2 equals |realized residual|^2 / 4
      mean += r.record.residual_norm_sq / 4.0;
    }
  }
  mean /= static_cast<double>(n);
  const double target = norm_sq(base) / (2.0 * static_cast<double>(d));
  CHECK(mean == doctest::Approx(target).epsilon(0.02));
}

TEST_CASE("rva_wrap elementwise: coordinate bookkeeping and realized flags") {
  const Vec base = {1.0, -2.0, 0.0, 0.5};
  RandomStream rng(88);
  std::size_t accepts = 0, steps = 2000;
  for (std::size_t i = 0; i < steps; ++i) {
    const RvaResult r = rva_wrap(base, rng, RvaMode::elementwise);
    CHECK(r.record.coord_slots == 4);
    CHECK(r.record.coord_accepts <= 3);  // the zero coordinate can never accept
    for (std::size_t j = 0; j < base.size(); ++j) {
      CHECK((r.direction[j] == base[j] || r.direction[j] == 3.0 * base[j]));
    }
    CHECK(r.record.gamma_l == 0);
    accepts += r.record.coord_accepts;
  }
  // three live coordinates, each accepted with probability 1/2
  const double mean_accepts = static_cast<double>(accepts) / static_cast<double>(steps);
  CHECK(mean_accepts == doctest::Approx(1.5).epsilon(0.1));
}

TEST_CASE("ledger ratios: parallel gives 1, orthogonal gives 0, all within [0,1]") {
  AccelLedger ledger;
  const Vec fg = {2.0, 0.0};
  Vec r = {4.0, 0.0};  // parallel to fg
  ledger.update(classify(r, fg), &fg, fg, r);
  CHECK(ledger.snapshot().u_max == doctest::Approx(1.0).epsilon(1e-12));
  r = {0.0, 3.0};  // orthogonal
  ledger.update(classify(r, fg), &fg, fg, r);
  CHECK(ledger.snapshot().u_min == doctest::Approx(0.0));
  const auto s = ledger.snapshot();
  CHECK(s.u_min <= s.u_max);
  CHECK(s.B_max <= 1.0 + 1e-12);
}

TEST_CASE("ledger: Gaussian residual against a fixed gradient has mean ratio 1/d") {
  const std::size_t d = 10;
  Vec fg(d, 0.0);
  fg[0] = 1.5;
  fg[3] = -0.7;
  AccelLedger ledger;
  RandomStream rng(99);
  const std::size_t n = 1000000;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec r = sample_gaussian(rng, d, 1.0);
    ledger.update(classify(r, fg), &fg, fg, r);
  }
  const auto s = ledger.snapshot();
  CHECK(s.u_mean == doctest::Approx(1.0 / static_cast<double>(d)).epsilon(0.02));
  CHECK(s.u_min >= 0.0);
  CHECK(s.u_max <= 1.0 + 1e-12);
  CHECK(s.k + s.l == s.T_seen);
}

TEST_CASE("ledger: zero residuals are skipped and count neither k nor l") {
  AccelLedger ledger;
  const Vec grad = {1.0, 1.0};
  const Vec zero = {0.0, 0.0};
  ledger.update(classify(zero, grad), nullptr, grad, zero);
  ledger.update(classify(zero, grad), nullptr, grad, zero);
  const auto s = ledger.snapshot();
  CHECK(s.T_seen == 2);
  CHECK(s.k == 0);
  CHECK(s.l == 0);
  CHECK(s.skipped == 2);
  CHECK(s.B_count == 0);
}
