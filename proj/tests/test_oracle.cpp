#include <gtest/gtest.h>

#include <random>

#include "bottlemod/oracle.hpp"
#include "bottlemod/solver.hpp"
#include "random_models.hpp"
#include "shapes.hpp"
#include "test_support.hpp"

using namespace bottlemod;
using namespace bottlemod::testing;

namespace {

// Oracle progress at t lies between the exact progress at t - delta and t + delta.
void expect_time_shift_close(const PiecewiseFn& exact, const oracle::Result& sim, double delta) {
  for (const auto& s : sim.samples) {
    const double lo = exact.eval(std::max(0.0, s.t - delta));
    const double hi = exact.eval(s.t + delta);
    const double tol = 1e-6 * std::max(1.0, std::abs(hi));
    ASSERT_GE(s.progress, lo - tol) << "t = " << s.t;
    ASSERT_LE(s.progress, hi + tol) << "t = " << s.t;
  }
}

}  // namespace

TEST(Oracle, QuadratureIsExactForPolynomials) {
  PiecewiseFn f({0.0, 1.0, 2.5}, {Polynomial{1.0, 2.0, 3.0}, Polynomial{4.0}, Polynomial{0.0, 0.0, 0.0, 1.0}});
  // 1 + 1 + 1 on [0,1], 4 * 1.5, u^4/4 at u = 1.5
  EXPECT_NEAR(oracle::detail::integrate(f, 0.0, 4.0), 3.0 + 6.0 + std::pow(1.5, 4) / 4.0, 1e-12);
}

TEST(Oracle, StreamMatchesClosedForm) {
  oracle::Options o;
  o.dt = 0.001;
  auto sim = oracle::simulate(stream_process(), stream_context(10.0, 5.0), o);
  ASSERT_TRUE(sim.completion_time);
  EXPECT_NEAR(*sim.completion_time, 20.0, 2 * o.dt);
  EXPECT_NEAR(sim.consumed[0], 100.0, 1e-9);
}

TEST(Oracle, ResourceLumpIsPaidBeforeProgress) {
  Process p = stream_process();
  p.resource_requirements[0].fn = canonical::resource_burst(40.0);
  oracle::Options o;
  o.dt = 0.001;
  auto sim = oracle::simulate(p, stream_context(10.0, 8.0), o);
  EXPECT_NEAR(*sim.completion_time, 10.0, 2 * o.dt);
  for (const auto& s : sim.samples)
    if (s.t < 5.0 - o.dt) {
      ASSERT_EQ(s.progress, 0.0);
    }
}

TEST(Oracle, JumpAfterLumpLandsInTheRightStep) {
  // a lump of 10 at zero, nothing more owed until progress 50
  Process p = stream_process();
  p.resource_requirements[0].fn = PiecewiseFn({0.0, 50.0}, {Polynomial{10.0}, Polynomial{10.0, 1.0}});
  oracle::Options o;
  o.dt = 0.3;  // the lump is paid at t = 10, between two samples
  auto sim = oracle::simulate(p, stream_context(1000.0, 1.0), o);
  for (const auto& s : sim.samples) {
    const double expected = s.t < 10.0 ? 0.0 : std::min(100.0, 50.0 + (s.t - 10.0));
    ASSERT_NEAR(s.progress, expected, 1e-6) << "t = " << s.t;
  }
  EXPECT_NEAR(*sim.completion_time, 60.0, 1e-6);
}

TEST(Oracle, SixBandCompletion) {
  auto [p, c] = six_band_model();
  oracle::Options o;
  o.dt = 0.0005;
  auto sim = oracle::simulate(p, c, o);
  EXPECT_NEAR(*sim.completion_time, 12.5, 0.01);
}

TEST(Oracle, ErrorShrinksWithStep) {
  auto [p, c] = six_band_model();
  const double exact = *solve(p, c).completion_time;
  double prev = kInf;
  for (double dt : {0.05, 0.005, 0.0005}) {
    oracle::Options o;
    o.dt = dt;
    const double err = std::abs(*oracle::simulate(p, c, o).completion_time - exact);
    EXPECT_LE(err, 4.0 * dt);
    EXPECT_LE(err, prev + 1e-12);
    prev = err;
  }
}

TEST(Oracle, DecreasingDataLimitIsRejected) {
  ExecutionContext c = stream_context(10.0, 5.0);
  c.data_inputs[0] = PiecewiseFn({0.0, 1.0}, {Polynomial{50.0}, Polynomial{10.0}});
  oracle::Options o;
  o.horizon = 5.0;
  EXPECT_THROW(oracle::simulate(stream_process(), c, o), StepTooCoarse);
}

class OracleAgreement : public ::testing::TestWithParam<int> {};

TEST_P(OracleAgreement, RandomProcessesAgreeWithSolver) {
  std::mt19937 rng(static_cast<unsigned>(GetParam()) * 7919u + 17u);
  RandomInstance c = random_instance(rng);
  ProgressResult exact;
  try {
    exact = solve(c.proc, c.ctx);
  } catch (const NoProgress&) {
    GTEST_SKIP() << "no progress possible";
  }
  oracle::Options o;
  o.dt = 0.002;
  o.horizon = exact.completion_time ? *exact.completion_time + 5.0 : 60.0;
  auto sim = oracle::simulate(c.proc, c.ctx, o);
  const double delta = 0.05;
  expect_time_shift_close(exact.progress, sim, delta);
  ASSERT_EQ(exact.completion_time.has_value(), sim.completion_time.has_value());
  if (exact.completion_time) {
    EXPECT_NEAR(*sim.completion_time, *exact.completion_time, delta);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, OracleAgreement, ::testing::Range(0, 80));

TEST(OracleWorkflow, VideoWorkflowAgrees) {
  for (double f : {0.3, 0.5, 0.8, 0.95}) {
    Workflow wf = video_workflow(f);
    auto exact = analyze(wf);
    oracle::Options o;
    o.dt = 0.02;
    o.horizon = 400.0;
    auto sim = oracle::simulate(wf, o);
    ASSERT_TRUE(sim.makespan) << "fraction " << f;
    EXPECT_NEAR(*sim.makespan, *exact.makespan, 0.2) << "fraction " << f;
    for (const auto& po : exact.processes)
      EXPECT_NEAR(*sim.processes.at(po.name).completion_time, *po.result.completion_time, 0.2)
          << po.name << " at fraction " << f;
  }
}

TEST(OracleWorkflow, StarvedProcessIsReported) {
  Workflow wf;
  WorkflowProcess a;
  a.process = stream_process();
  a.process.name = "a";
  a.bindings["in"] = Binding{PiecewiseFn({0.0, 5.0}, {Polynomial{0.0, 10.0}}, Extension::hold), std::nullopt};
  a.bindings["cpu"] = Binding{PiecewiseFn::constant(10.0), std::nullopt};
  wf.processes = {a};
  oracle::Options o;
  o.horizon = 50.0;
  auto sim = oracle::simulate(wf, o);
  EXPECT_FALSE(sim.makespan);
  EXPECT_EQ(sim.starved, std::vector<std::string>{"a"});
}
