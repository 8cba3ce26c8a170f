#include <gtest/gtest.h>

#include "liquid/measures.hpp"
#include "liquid/random_instances.hpp"
#include "liquid/reduction.hpp"

using namespace liquid;

namespace {

DelegationMatrix rows(std::initializer_list<std::initializer_list<double>> r) {
  const auto n = static_cast<Eigen::Index>(r.size());
  Matrix m(n, n);
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return DelegationMatrix::from_rows(m);
}

const DelegationMatrix kSingle = rows({{1, 0, 0, 0}, {0.5, 0, 0, 0.5}, {0, 1, 0, 0}, {0, 0, 0, 1}});
const DelegationMatrix kSplit = rows({{1, 0, 0, 0}, {0.5, 0, 0.25, 0.25}, {0, 1, 0, 0}, {0, 0, 0, 1}});

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidInstance;
}

}  // namespace

TEST(Reduction, WorkedExamples) {
  auto [r1, s1] = delegation_reduction(kSingle, 2, {1});
  EXPECT_EQ(s1.x_star_k.weights(), (Vector(4) << 0.5, 0, 0, 0.5).finished());
  EXPECT_DOUBLE_EQ(s1.denominator, 1.0);

  auto [r2, s2] = delegation_reduction(kSplit, 2, {1});
  const Vector want = (Vector(4) << 2.0 / 3, 0, 0, 1.0 / 3).finished();
  EXPECT_LT((s2.x_star_k.weights() - want).lpNorm<Eigen::Infinity>(), 1e-15);
  EXPECT_DOUBLE_EQ(s2.denominator, 0.75);
  EXPECT_EQ(r2.profile_weights(2), s2.x_star_k.weights());
  EXPECT_EQ(r2.profile_weights(1), kSplit.profile_weights(1));
}

TEST(Reduction, ExactPowerUnchanged) {
  for (const auto& p : {kSingle, kSplit}) {
    const auto [r, spec] = delegation_reduction(p, 2, {1});
    EXPECT_LT((power_exact(p).power.values - power_exact(r).power.values).lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(Reduction, RandomInstancesKeepExactPower) {
  for (std::uint64_t t = 0; t < 100; ++t) {
    auto rng = gen::trial_rng(31, t);
    const auto inst = gen::random_reduction_instance(rng, gen::uniform_index(rng, 3, 8));
    const WeightSource f = gen::random_source(rng, inst.p.n());
    const auto [r, spec] = delegation_reduction(inst.p, inst.k, inst.d);
    EXPECT_LT((power_exact(inst.p, f).power.values - power_exact(r, f).power.values)
                  .lpNorm<Eigen::Infinity>(),
              1e-8)
        << "trial " << t;
  }
}

TEST(Reduction, Preconditions) {
  // proxy 1 retains everything
  EXPECT_EQ(code_of([] { delegation_reduction(kSingle, 2, {0}); }), ErrorCode::PreconditionViolated);
  // k hands a share outside D
  const auto split = rows({{0, 0.5, 0.5, 0}, {0, 0, 0, 1}, {0, 0, 0, 1}, {0, 0, 0, 1}});
  EXPECT_EQ(code_of([&] { delegation_reduction(split, 0, {1}); }), ErrorCode::PreconditionViolated);
  EXPECT_NO_THROW(delegation_reduction(split, 0, {1, 2}));
  EXPECT_EQ(code_of([] { delegation_reduction(kSingle, 2, {}); }), ErrorCode::PreconditionViolated);
  EXPECT_EQ(code_of([] { delegation_reduction(kSingle, 2, {2}); }), ErrorCode::PreconditionViolated);
  // k caught in a cycle
  const auto swap3 = rows({{0, 1, 0}, {1, 0, 0}, {0, 0, 1}});
  EXPECT_EQ(code_of([&] { delegation_reduction(swap3, 0, {1}); }), ErrorCode::PreconditionViolated);
  // everything k hands over comes straight back
  const auto back = rows({{0, 1, 0}, {0.5, 0, 0.5}, {0, 0, 1}});
  EXPECT_NO_THROW(delegation_reduction(back, 0, {1}));
}

TEST(DeltaConstant, Examples) {
  EXPECT_NEAR(delta_delegation_constant(kSplit, default_source(4), 2, {1}), 80.0 / 3, 1e-12);
  EXPECT_NEAR(delta_delegation_constant(kSingle, default_source(4), 2, {1}), 20.0, 1e-12);
  EXPECT_EQ(delta_delegation_constant(kSingle, WeightSource::Zero(5), 2, {1}), 0.0);
}

TEST(DeltaConstant, HoldsOnWorkedExamples) {
  for (const auto& p : {kSingle, kSplit}) {
    const double c = delta_delegation_constant(p, default_source(4), 2, {1});
    const auto [r, spec] = delegation_reduction(p, 2, {1});
    for (double eps : {1e-2, 1e-3}) {
      const double dev = (power_eps(p, eps).power.values - power_eps(r, eps).power.values)
                             .lpNorm<Eigen::Infinity>();
      EXPECT_LE(dev, c * eps);
    }
  }
}

// k -> a -> b -> k with a small leak from a to the candidate c. The vote keeps
// lapping through k, so u_k far exceeds sum(f) and the constant undershoots,
// while the deviation still vanishes as epsilon goes to zero.
TEST(DeltaConstant, LongReturnLoopExceedsTheConstant) {
  const double q = 0.01;
  Matrix m = Matrix::Zero(4, 4);
  m(1, 0) = 1;
  m(2, 1) = 1 - q;
  m(3, 1) = q;
  m(0, 2) = 1;
  m(3, 3) = 1;
  const auto p = DelegationMatrix::from_columns(m);
  const auto [r, spec] = delegation_reduction(p, 0, {1});
  const double c = delta_delegation_constant(p, default_source(4), 0, {1});
  EXPECT_DOUBLE_EQ(c, 20.0);
  auto dev = [&](double eps) {
    return (power_eps(p, eps).power.values - power_eps(r, eps).power.values).lpNorm<Eigen::Infinity>();
  };
  EXPECT_GT(dev(1e-3), c * 1e-3);
  EXPECT_LT(dev(1e-8), 1e-4);
}
