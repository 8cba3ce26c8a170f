#include <gtest/gtest.h>

#include "liquid/measures.hpp"
#include "liquid/oracles.hpp"
#include "liquid/random_instances.hpp"

using namespace liquid;

namespace {

DelegationMatrix pointers(const std::vector<std::size_t>& target) {
  const auto n = static_cast<Eigen::Index>(target.size());
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m(static_cast<Eigen::Index>(target[j]), j) = 1.0;
  return DelegationMatrix::from_columns(m);
}

void expect_within_3se(const ParticleEstimate& est, const Vector& want) {
  for (Eigen::Index i = 0; i < want.size(); ++i) {
    EXPECT_LE(std::abs(est.rates(i) - want(i)), 3 * est.standard_error(i) + 1e-12)
        << "entry " << i << ": " << est.rates(i) << " vs " << want(i);
  }
}

}  // namespace

TEST(Particles, SingleRetainer) {
  ParticleOptions opt;
  opt.t_max = 2000;
  const auto est = particle_estimate(DelegationMatrix::identity(1), default_source(1), 0.1, opt);
  expect_within_3se(est, (Vector(2) << 0.9, 0.1).finished());
}

TEST(Particles, SwapCycleDissipates) {
  ParticleOptions opt;
  opt.t_max = 1000;
  const auto est = particle_estimate(pointers({1, 0}), default_source(2), 0.3, opt);
  EXPECT_EQ(est.rates(0), 0.0);
  EXPECT_EQ(est.rates(1), 0.0);
  EXPECT_LE(std::abs(est.rates(2) - 2.0), 3 * est.standard_error(2));
}

TEST(Particles, ZeroSource) {
  ParticleOptions opt;
  opt.t_max = 100;
  const auto est = particle_estimate(pointers({1, 1}), WeightSource::Zero(3), 0.1, opt);
  EXPECT_EQ(est.rates, Vector::Zero(3));
}

TEST(Particles, ReproducibleAndValidated) {
  ParticleOptions opt;
  opt.t_max = 200;
  opt.seed = 9;
  const auto a = particle_estimate(pointers({1, 1}), default_source(2), 0.1, opt);
  const auto b = particle_estimate(pointers({1, 1}), default_source(2), 0.1, opt);
  EXPECT_EQ(a.rates, b.rates);
  opt.dt = 0.02;
  EXPECT_THROW(particle_estimate(pointers({1, 1}), default_source(2), 0.1, opt), Error);
  opt.dt = 0.01;
  EXPECT_THROW(particle_estimate(pointers({1, 1}), default_source(2), 0.0, opt), Error);
}

TEST(Grid, Examples) {
  // dominant w_12: best grid point hands everything to agent 2
  const auto g = grid_best_response(pointers({0, 1}), 0, (Vector(3) << 0, 1, 0).finished(), 0.1, 0.05);
  EXPECT_NEAR(g.profile(1), 1.0, 1e-15);
  EXPECT_EQ(g.points, 21u);

  const auto flat = grid_best_response(pointers({1, 2, 2}), 0, Vector::Constant(4, 0.3), 0.2, 0.1);
  EXPECT_NEAR(flat.value, 0.3, 1e-12);

  const auto one = grid_best_response(DelegationMatrix::identity(1), 0, Vector::Ones(2), 0.1, 0.05);
  EXPECT_EQ(one.points, 1u);
  EXPECT_EQ(one.profile(0), 1.0);

  EXPECT_THROW(grid_best_response(DelegationMatrix::identity(6), 0, Vector::Ones(7), 0.1, 0.1), Error);
  EXPECT_THROW(grid_best_response(DelegationMatrix::identity(2), 0, Vector::Ones(3), 0.1, 0.3), Error);
}

TEST(Grid, NeverBeatsTheVertexOptimum) {
  for (std::uint64_t t = 0; t < 20; ++t) {
    auto rng = gen::trial_rng(51, t);
    const std::size_t n = gen::uniform_index(rng, 1, 4);
    const auto p = gen::random_matrix(rng, n);
    const Vector w = gen::random_preferences(rng, n).row(0);
    const double grid = grid_best_response(p, 0, w, 0.1, 0.05).value;
    const double vertex = best_response(p, 0, w, 0.1, StrategySpace::full(n)).value;
    EXPECT_LE(grid, vertex + 1e-9);
    EXPECT_GE(vertex, grid - 1e-6);
  }
}

TEST(Enumerate, Examples) {
  const auto id = enumerate_pure_support(DelegationMatrix::identity(3));
  ASSERT_EQ(id.size(), 1u);
  EXPECT_EQ(id[0].probability, 1.0);

  Matrix two(2, 2);
  two << 0.5, 0, 0.5, 1;
  const auto t = enumerate_pure_support(DelegationMatrix::from_columns(two));
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].probability, 0.5);
  EXPECT_EQ(t[1].probability, 0.5);

  Matrix mixed(4, 4);
  mixed << 1, .5, 0, 0, 0, 0, 1, 0, 0, .25, 0, 0, 0, .25, 0, 1;
  const auto o = enumerate_pure_support(DelegationMatrix::from_columns(mixed));
  ASSERT_EQ(o.size(), 3u);
  EXPECT_EQ(o[0].probability, 0.5);
  EXPECT_EQ(o[1].probability, 0.25);
  EXPECT_EQ(o[2].probability, 0.25);
}

TEST(Enumerate, ReproducesMixedStrategyPower) {
  for (std::uint64_t t = 0; t < 40; ++t) {
    auto rng = gen::trial_rng(52, t);
    const auto p = gen::random_matrix(rng, gen::uniform_index(rng, 1, 6));
    const auto outcomes = enumerate_pure_support(p);
    double total = 0.0;
    Vector ms = Vector::Zero(static_cast<Eigen::Index>(p.n()));
    for (const auto& o : outcomes) {
      total += o.probability;
      ms += o.probability * classic_power(o.matrix);
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
    EXPECT_EQ(ms, mixed_strategy_power(p)) << "trial " << t;
  }
}
