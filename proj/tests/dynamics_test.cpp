#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pointerlab/dense_spectrum.hpp"
#include "pointerlab/dynamics.hpp"
#include "pointerlab/error.hpp"
#include "pointerlab/macro_observables.hpp"
#include "pointerlab/run_config.hpp"

using namespace pointerlab;

namespace {

EvolutionConfig krylov() { return EvolutionConfig{}; }

EvolutionConfig dense() {
  EvolutionConfig cfg;
  cfg.method = EvolutionMethod::dense_eigen;
  return cfg;
}

}  // namespace

TEST(Evolve, ZeroTimeIsIdentity) {
  std::mt19937_64 rng(31);
  const auto spec = ModelSpec::disordered(6, 1);
  const HamiltonianOperator h(spec);
  const StateVector s = oracle::random_state(6, rng);
  for (const auto& cfg : {krylov(), dense()}) {
    EXPECT_LT(oracle::distance(evolve(h, s, 0.0, cfg), s), 1e-12);
  }
}

TEST(Evolve, UndetectableBranchIsFrozen) {
  const auto spec = ModelSpec::disordered(7, 2, 0.5, 1.5, 0.4);
  const HamiltonianOperator h(spec);
  const StateVector s = initial_state(spec, Complex{1.0}, Complex{0.0});
  for (double t : {0.7, 13.0, 150.0}) {
    const StateVector st = evolve(h, s, t, krylov());
    EXPECT_NEAR(std::abs(inner_product(s, st) - Complex{1.0}), 0.0, 1e-12) << t;
  }
}

TEST(Evolve, DetectableBranchMatchesClosedFormAtFiftyTimes) {
  const auto spec = ModelSpec::disordered(8, 3);
  const HamiltonianOperator h(spec);
  const Propagator p(h, krylov());
  StateVector s = initial_state(spec, Complex{0.0}, Complex{1.0});
  double worst = 0.0, now = 0.0;
  for (int i = 1; i <= 50; ++i) {
    const double t = i * 1.0;
    s = p.advance(s, t - now, 50.0);
    now = t;
    worst = std::max(worst,
                     oracle::distance(s, make_product_state(closed_form_branch(spec, t))));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(Evolve, DenseAndKrylovAgree) {
  std::mt19937_64 rng(32);
  const auto spec = ModelSpec::disordered(8, 4, 0.5, 1.5, 1.2, 0.3);
  const HamiltonianOperator h(spec);
  const StateVector s = oracle::random_state(8, rng);
  for (double t : {0.1, 4.0, 40.0}) {
    EXPECT_LT(oracle::distance(evolve(h, s, t, dense()), evolve(h, s, t, krylov())), 1e-9) << t;
  }
}

TEST(Evolve, CompositionOfSteps) {
  std::mt19937_64 rng(33);
  const auto spec = ModelSpec::disordered(7, 5);
  const HamiltonianOperator h(spec);
  const auto cfg = krylov();
  const StateVector s = oracle::random_state(7, rng);
  const StateVector two = evolve(h, evolve(h, s, 3.3, cfg), 8.1, cfg);
  const StateVector one = evolve(h, s, 11.4, cfg);
  EXPECT_LT(oracle::distance(two, one), 10 * cfg.tolerance);
}

TEST(Evolve, NegativeTimeReverses) {
  std::mt19937_64 rng(34);
  const auto spec = ModelSpec::disordered(9, 6);
  const HamiltonianOperator h(spec);
  const StateVector s = oracle::random_state(9, rng);
  const StateVector back = evolve(h, evolve(h, s, 60.0, krylov()), -60.0, krylov());
  EXPECT_LT(oracle::distance(back, s), 1e-8);
}

TEST(Evolve, NormPreserved) {
  std::mt19937_64 rng(35);
  const auto spec = ModelSpec::disordered(10, 7);
  const HamiltonianOperator h(spec);
  const StateVector st = evolve(h, oracle::random_state(10, rng), 200.0, krylov());
  EXPECT_NEAR(st.norm(), 1.0, 1e-9);
}

TEST(Evolve, DenseMethodRejectsLargeSystems) {
  const HamiltonianOperator h(ModelSpec::uniform(kMaxDenseUnits + 1));
  EXPECT_THROW(Propagator(h, dense()), ValidationError);
}

TEST(Evolve, UnreachableToleranceReportsAchievedResidual) {
  const auto spec = ModelSpec::disordered(6, 8);
  const HamiltonianOperator h(spec);
  EvolutionConfig cfg;
  cfg.krylov_dim = 4;
  cfg.tolerance = 1e-300;
  std::mt19937_64 rng(36);
  try {
    evolve(h, oracle::random_state(6, rng), 5.0, cfg);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.achieved(), 0.0);
  }
}

TEST(Evolve, MismatchedStateRejected) {
  const HamiltonianOperator h(ModelSpec::uniform(3));
  EXPECT_THROW(evolve(h, StateVector::basis(4, 0), 1.0, krylov()), DimensionError);
}

TEST(EvolutionConfig, Validation) {
  EvolutionConfig cfg;
  cfg.dt = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.tolerance = -1.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.krylov_dim = 3;
  EXPECT_THROW(cfg.validate(), ValidationError);
  EXPECT_EQ(EvolutionConfig{}.krylov_dim, 16);
  EXPECT_EQ(EvolutionConfig{}.tolerance, 1e-9);
  EXPECT_EQ(EvolutionConfig{}.dt, RunConfig{}.evolution.dt);
}

TEST(SampleTrajectory, ConstantObservable) {
  std::mt19937_64 rng(37);
  const auto spec = ModelSpec::disordered(6, 9);
  const HamiltonianOperator h(spec);
  const auto series = sample_trajectory(
      h, oracle::random_state(6, rng), uniform_times(30.0, 0.5),
      {{"norm2", [](const StateVector& s) { return s.norm() * s.norm(); }}}, krylov());
  for (double v : series.values[0]) EXPECT_NEAR(v, 1.0, 1e-10);
  EXPECT_NEAR(series.tail_variation[0], 0.0, 1e-10);
}

TEST(SampleTrajectory, UniformPointerFollowsSineSquared) {
  const double g = 1.0;
  const auto spec = ModelSpec::uniform(6, g);
  const HamiltonianOperator h(spec);
  const auto times = uniform_times(40.0, 0.25);
  const auto series = sample_trajectory(h, initial_state(spec, Complex{0.0}, Complex{1.0}), times,
                                        {{"pointer", pointer_expectation}}, krylov());
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_NEAR(series.values[0][i], std::pow(std::sin(0.5 * g * times[i]), 2), 1e-10);
  }
}

TEST(SampleTrajectory, SuperpositionIsWeightedSumOfBranches) {
  const auto spec = ModelSpec::disordered(7, 10);
  const HamiltonianOperator h(spec);
  const Propagator p(h, krylov());
  const Complex c0{std::sqrt(0.2)}, c1{0.0, std::sqrt(0.8)};
  StateVector s = initial_state(spec, c0, c1);
  StateVector b0 = initial_state(spec, Complex{1.0}, Complex{0.0});
  StateVector b1 = initial_state(spec, Complex{0.0}, Complex{1.0});
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    s = p.advance(s, 1.0, 50.0);
    b0 = p.advance(b0, 1.0, 50.0);
    b1 = p.advance(b1, 1.0, 50.0);
    double err = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) err += std::norm(s[k] - (c0 * b0[k] + c1 * b1[k]));
    worst = std::max(worst, std::sqrt(err));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(SampleTrajectory, RejectsBadTimeGrids) {
  const HamiltonianOperator h(ModelSpec::uniform(2));
  const auto s = initial_state(h.spec(), Complex{1.0}, Complex{0.0});
  const std::vector<Observable> obs{{"p", pointer_expectation}};
  EXPECT_THROW(sample_trajectory(h, s, {}, obs, krylov()), ValidationError);
  EXPECT_THROW(sample_trajectory(h, s, {0.0, 1.0, 1.0}, obs, krylov()), ValidationError);
  EXPECT_THROW(sample_trajectory(h, s, {-1.0, 1.0}, obs, krylov()), ValidationError);
}

TEST(UniformTimes, EndsExactlyAtT) {
  const auto t = uniform_times(10.0, 0.3);
  EXPECT_EQ(t.front(), 0.0);
  EXPECT_EQ(t.back(), 10.0);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_GT(t[i], t[i - 1]);
}

namespace {

TimeSeries series_of(const std::vector<double>& times, std::function<double(double)> f) {
  TimeSeries ts;
  ts.times = times;
  ts.ids = {"f"};
  ts.values.assign(1, {});
  for (double t : times) ts.values[0].push_back(f(t));
  ts.finalize();
  return ts;
}

}  // namespace

TEST(TimeAverage, ConstantSeries) {
  const auto avg = time_average(series_of(uniform_times(10.0, 0.5), [](double) { return 0.37; }), "f");
  EXPECT_NEAR(avg.mean, 0.37, 1e-15);
  EXPECT_NEAR(avg.tail_variation, 0.0, 1e-15);
}

TEST(TimeAverage, SineSquaredApproachesOneHalf) {
  const double g = 1.3;
  for (double T : {50.0, 200.0, 1000.0}) {
    const auto avg = time_average(
        series_of(uniform_times(T, 0.05), [g](double t) { return std::pow(std::sin(0.5 * g * t), 2); }),
        "f");
    EXPECT_LE(std::abs(avg.mean - 0.5), 2.0 / (g * T)) << T;
  }
}

TEST(TimeAverage, OverlapSeriesNearQuadratureAndLimit) {
  const double T = 5000.0;
  for (int n : {2, 4, 6, 8, 10}) {
    const auto spec = ModelSpec::disordered(n, 1);
    const auto& g = spec.couplings;
    const auto avg = time_average(series_of(uniform_times(T, 0.25),
                                            [&](double t) {
                                              double p = 1.0;
                                              for (double gk : g) p *= std::abs(std::cos(0.5 * gk * t));
                                              return p;
                                            }),
                                  "f");
    const double quad = oracle::overlap_average(g, T);
    EXPECT_NEAR(avg.mean / quad, 1.0, 0.01) << "n " << n;
    EXPECT_NEAR(avg.mean / std::pow(2.0 / std::numbers::pi, n), 1.0, 0.2) << "n " << n;
  }
}

TEST(TimeAverage, FlagsShortSpans) {
  const auto ts = series_of(uniform_times(5.0, 0.5), [](double) { return 1.0; });
  EXPECT_TRUE(time_average(ts, "f", 1.0).short_span);
  EXPECT_FALSE(time_average(ts, "f", 0.4).short_span);
  EXPECT_THROW(time_average(ts, "missing"), ValidationError);
  EXPECT_THROW(time_average(TimeSeries{}, "f"), ValidationError);
}

TEST(TimeAverage, TrapezoidMeanOfLinearFunction) {
  const std::vector<double> t{0.0, 0.5, 2.0, 4.0};
  const std::vector<double> v{0.0, 0.5, 2.0, 4.0};
  EXPECT_DOUBLE_EQ(trapezoid_mean(t, v), 2.0);
}

TEST(Evolve, SingleStepUniformCascadeCompletes) {
  // One step straight to the half period, where a single-point residual
  // estimate can vanish by accident.
  for (int n = 2; n <= 12; ++n) {
    for (double g : {1.0, 0.7}) {
      const auto spec = ModelSpec::uniform(n, g);
      const StateVector s = evolve(HamiltonianOperator(spec),
                                   initial_state(spec, Complex{0.0}, Complex{1.0}),
                                   std::numbers::pi / g, krylov());
      EXPECT_NEAR(pointer_expectation(s), 1.0, 1e-9) << "n " << n << " g " << g;
    }
  }
}

namespace {

// Hides the Hamiltonian type so DenseSpectrum takes the full-matrix path.
class Opaque final : public Operator {
 public:
  explicit Opaque(const HamiltonianOperator& h) : h_(h) {}
  int units() const override { return h_.units(); }
  void apply(std::span<const Complex> in, std::span<Complex> out) const override {
    h_.apply(in, out);
  }
  bool is_real() const override { return true; }

 private:
  const HamiltonianOperator& h_;
};

}  // namespace

TEST(DenseSpectrum, BranchSplitMatchesFullMatrix) {
  std::mt19937_64 rng(8);
  for (double alpha : {0.0, 0.7, 2.3}) {
    for (double eps : {0.0, 0.3}) {
      const HamiltonianOperator h(ModelSpec::disordered(5, 2, 0.5, 1.5, alpha, eps));
      const DenseSpectrum split(h);
      const DenseSpectrum full(Opaque{h});
      Eigen::VectorXd a = split.eigenvalues();
      Eigen::VectorXd b = full.eigenvalues();
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);

      const StateVector s = oracle::random_state(5, rng);
      std::vector<Complex> x(s.amplitudes().size()), y(x.size());
      split.propagate(s.amplitudes(), x, 3.7);
      full.propagate(s.amplitudes(), y, 3.7);
      double worst = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
      EXPECT_LT(worst, 1e-12);
    }
  }
}
