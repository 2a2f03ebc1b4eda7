#include <cmath>
#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "extrapolation.hpp"
#include "kernels.hpp"
#include "oracle_tables.hpp"

using namespace nearsing;

namespace {

ExtrapolationPlan plan234() {
  ExtrapolationPlan plan;
  plan.rhos = {2.0, 3.0, 4.0};
  plan.order = 5;
  return plan;
}

// Residuals of the moment system the weights are meant to solve; all should
// vanish (first row equals 1 exactly).
struct MomentResiduals {
  double sum, first, second, third;
};

MomentResiduals residuals(const WeightSolution& w, int order) {
  MomentResiduals r{-1.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < w.count; ++i) {
    const double a = w.weights[i], d = w.deltas[i], l = w.lambdas[i];
    r.sum += a;
    r.first += a * d * moment_i0(l);
    r.second += a * d * d * d * moment_i2(l);
    if (order == 7) r.third += a * std::pow(d, 5) * moment_i4(l);
  }
  return r;
}

}  // namespace

TEST_CASE("moment integrals match the frozen quadrature table") {
  for (const auto& row : oracle::kMoments) {
    CHECK(std::abs(moment_i0(row.lambda) - row.i0) <= 1e-16 + 5e-13 * row.i0);
    CHECK(std::abs(moment_i2(row.lambda) - row.i2) <= 1e-16 + 5e-13 * row.i2);
    CHECK(std::abs(moment_i4(row.lambda) - row.i4) <= 1e-16 + 5e-13 * row.i4);
  }
}

TEST_CASE("moment integrals: values at zero and evenness") {
  const double sp = std::sqrt(kPi);
  CHECK(moment_i0(0.0) == doctest::Approx(1.0 / sp).epsilon(1e-15));
  CHECK(moment_i2(0.0) == doctest::Approx(1.0 / (3.0 * sp)).epsilon(1e-15));
  CHECK(moment_i4(0.0) == doctest::Approx(2.0 / (5.0 * sp)).epsilon(1e-15));
  for (double l : {0.3, 1.1, 2.7}) {
    CHECK(moment_i0(l) == moment_i0(-l));
    CHECK(moment_i2(l) == moment_i2(-l));
    CHECK(moment_i4(l) == moment_i4(-l));
  }
}

TEST_CASE("moment recurrences") {
  // I2(x) = -(2/3) x^2 I0(x) + e^{-x^2} / (3 sqrt(pi))
  // I4(x) = -(4/5) x^2 I2(x) + (2/5) e^{-x^2} / sqrt(pi)
  const double sp = std::sqrt(kPi);
  for (int k = 0; k <= 500; ++k) {
    const double x = 0.01 * k;
    const double g = std::exp(-x * x);
    CHECK(std::abs(moment_i2(x) - (-(2.0 / 3.0) * x * x * moment_i0(x) + g / (3.0 * sp))) <=
          1e-14);
    CHECK(std::abs(moment_i4(x) - (-(4.0 / 5.0) * x * x * moment_i2(x) + 0.4 * g / sp)) <=
          1e-14);
  }
}

TEST_CASE("integrate_adaptive on smooth integrands") {
  const double a = integrate_adaptive([](double x) { return x * x; }, 0.0, 1.0, 1e-12);
  CHECK(a == doctest::Approx(1.0 / 3.0).epsilon(1e-11));
  const double b = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, kPi, 1e-12);
  CHECK(b == doctest::Approx(2.0).epsilon(1e-11));
}

TEST_CASE("on-surface weights for multipliers (2,3,4) are the classical triple") {
  for (double h : {1.0 / 16, 1.0 / 64, 0.013}) {
    const WeightSolution w = solve_weights(plan234(), 0.0, h);
    REQUIRE(w.count == 3);
    CHECK(!w.degenerate_far);
    CHECK(std::abs(w.weights[0] - 14.0 / 3.0) <= 1e-12);
    CHECK(std::abs(w.weights[1] + 16.0 / 3.0) <= 1e-12);
    CHECK(std::abs(w.weights[2] - 5.0 / 3.0) <= 1e-12);
    for (int i = 0; i < 3; ++i) CHECK(w.deltas[i] == plan234().rhos[i] * h);
  }
}

TEST_CASE("weights satisfy the full moment system off the surface") {
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> ub(-0.4, 0.4), uh(0.005, 0.1), ur(0.5, 6.0);
  for (int trial = 0; trial < 300; ++trial) {
    ExtrapolationPlan plan;
    double r1 = ur(rng), r2 = ur(rng), r3 = ur(rng);
    // keep multipliers separated so the system stays well conditioned
    std::vector<double> rs = {r1, r1 + 0.3 + r2, r1 + 0.8 + r2 + r3};
    plan.rhos = rs;
    plan.order = 5;
    const double b = ub(rng), h = uh(rng);
    const WeightSolution w = solve_weights(plan, b, h);
    double asum = 0.0;
    for (int i = 0; i < w.count; ++i) asum += std::abs(w.weights[i]);
    const MomentResiduals r = residuals(w, 5);
    CHECK(std::abs(r.sum) <= 1e-12 * std::max(1.0, asum));
    if (!w.degenerate_far) {
      // scale of the first-moment row before cancellation
      double s1 = 0.0, s2 = 0.0;
      for (int i = 0; i < w.count; ++i) {
        s1 += std::abs(w.weights[i] * w.deltas[i] * moment_i0(w.lambdas[i]));
        s2 += std::abs(w.weights[i] * std::pow(w.deltas[i], 3) * moment_i2(w.lambdas[i]));
      }
      CHECK(std::abs(r.first) <= 1e-11 * std::max(s1, 1e-30));
      CHECK(std::abs(r.second) <= 1e-11 * std::max(s2, 1e-30));
    }
  }
}

TEST_CASE("order-7 weights cancel three moments") {
  ExtrapolationPlan plan;
  plan.rhos = {2.0, 3.0, 4.0, 5.0};
  plan.order = 7;
  for (double b : {0.0, 0.01, -0.03}) {
    const WeightSolution w = solve_weights(plan, b, 1.0 / 32);
    REQUIRE(w.count == 4);
    const MomentResiduals r = residuals(w, 7);
    double s3 = 0.0;
    for (int i = 0; i < 4; ++i)
      s3 += std::abs(w.weights[i] * std::pow(w.deltas[i], 5) * moment_i4(w.lambdas[i]));
    CHECK(std::abs(r.sum) <= 1e-11);
    CHECK(std::abs(r.third) <= 1e-10 * std::max(s3, 1e-30));
  }
}

TEST_CASE("far cutoff produces the degenerate single-width solution") {
  ExtrapolationPlan plan = plan234();
  const double h = 1.0 / 32;
  const double dmax = 4.0 * h;
  {
    const WeightSolution w = solve_weights(plan, plan.far_cutoff * dmax * 1.0001, h);
    CHECK(w.degenerate_far);
    CHECK(w.weights[0] == 1.0);
    CHECK(w.weights[1] == 0.0);
    CHECK(w.weights[2] == 0.0);
  }
  {
    const WeightSolution w = solve_weights(plan, plan.far_cutoff * dmax * 0.999, h);
    CHECK(!w.degenerate_far);
  }
  // unclamped: still solves far beyond the cutoff
  const WeightSolution w = solve_weights_unclamped(plan, 20.0 * h, h);
  CHECK(!w.degenerate_far);
  double asum = 0.0;
  for (int i = 0; i < 3; ++i) {
    CHECK(std::isfinite(w.weights[i]));
    asum += w.weights[i];
  }
  CHECK(asum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fractional width rule") {
  ExtrapolationPlan plan = plan234();
  plan.rule = DeltaRule::Fractional;
  plan.fractional_q = 4.0 / 5.0;
  plan.anchor_h = 1.0 / 64;
  const double h = 1.0 / 32;
  const WeightSolution w = solve_weights(plan, 0.0, h);
  const double scale = std::pow(h, 0.8) * std::pow(plan.anchor_h, 0.2);
  for (int i = 0; i < 3; ++i)
    CHECK(w.deltas[i] == doctest::Approx(plan.rhos[i] * scale).epsilon(1e-15));
  // at the anchor spacing the two rules coincide
  const WeightSolution wa = solve_weights(plan, 0.0, plan.anchor_h);
  for (int i = 0; i < 3; ++i)
    CHECK(wa.deltas[i] == doctest::Approx(plan.rhos[i] * plan.anchor_h).epsilon(1e-15));
}

TEST_CASE("plan validation") {
  ExtrapolationPlan p;
  p.rhos = {2.0, 3.0};  // too few for order 5
  p.order = 5;
  CHECK_THROWS_AS(p.validate(), Error);
  p.rhos = {2.0, 2.0, 3.0};  // repeated multiplier
  CHECK_THROWS_AS(p.validate(), Error);
  p.rhos = {2.0, 3.0, 4.0};
  p.order = 6;  // unsupported order
  CHECK_THROWS_AS(p.validate(), Error);
  p.order = 5;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("moment-system determinant: closed form at zero and positivity") {
  const std::vector<std::vector<double>> sets = {{2, 3, 4}, {3, 4, 5}, {1, 2, 5}};
  for (const auto& rhos : sets) {
    const double closed = (rhos[2] - rhos[1]) * (rhos[1] - rhos[0]) * (rhos[2] - rhos[0]) *
                          (rhos[0] + rhos[1] + rhos[2]) / (3.0 * kPi);
    CHECK(std::abs(weight_system_determinant(rhos, 0.0) - closed) <= 1e-12 * closed);
    for (double x = 0.0; x <= 10.0; x += 0.05)
      CHECK(weight_system_determinant(rhos, x) > 0.0);
    CHECK_NOTHROW(determinant_positivity_check(rhos));
  }
}

TEST_CASE("weight solve rejects ill-conditioned width/distance combinations") {
  // Near the far cutoff the equilibrated pivot ratio grows like
  // exp(b^2/h^2 (1/rho2^2 - 1/rho3^2)); a top neighbor gap much wider than
  // the production sets pushes it past the 1e12 guard, which must surface
  // as a singular-system error rather than garbage weights.
  ExtrapolationPlan p;
  p.rhos = {1.0, 1.5, 2.5};
  p.order = 5;
  const double h = 1.0 / 8;
  const double b = 4.0 * 2.5 * h;  // the default cutoff distance
  CHECK_THROWS_AS(solve_weights_unclamped(p, b, h), Error);
  try {
    solve_weights_unclamped(p, b, h);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularSystem);
  }
  // The clamped production entry point takes the degenerate far branch at
  // this distance instead of attempting the solve.
  const WeightSolution w = solve_weights(p, b, h);
  CHECK(w.degenerate_far);
  CHECK(w.weights[0] == 1.0);
}
