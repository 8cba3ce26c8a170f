#include <gtest/gtest.h>

#include <vector>

#include "liquid/measures.hpp"
#include "liquid/random_instances.hpp"

using namespace liquid;

namespace {

DelegationMatrix cols(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, n);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double x : r) m(i, j++) = x;
    ++i;
  }
  return DelegationMatrix::from_columns(m);
}

DelegationMatrix pointers(const std::vector<std::size_t>& target) {
  const auto n = static_cast<Eigen::Index>(target.size());
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m(static_cast<Eigen::Index>(target[j]), j) = 1.0;
  return DelegationMatrix::from_columns(m);
}

void expect_near(const Vector& got, std::vector<double> want, double tol) {
  ASSERT_EQ(static_cast<std::size_t>(got.size()), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_NEAR(got(static_cast<Eigen::Index>(i)), want[i], tol) << "entry " << i;
  }
}

// Penalized measure by summing the Neumann series of the augmented system
// with the diagonal removed, term by term with plain loops.
Vector neumann_eps(const Matrix& p, const Vector& f, double eps) {
  const Eigen::Index n = p.rows();
  std::vector<std::vector<double>> a(n + 1, std::vector<double>(n + 1, 0.0));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) a[i][j] = (1 - eps) * p(i, j);
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) a[n][j] = eps;
  std::vector<double> term(f.data(), f.data() + f.size()), u = term;
  for (int k = 0; k < 200000; ++k) {
    std::vector<double> next(n + 1, 0.0);
    double mag = 0.0;
    for (Eigen::Index i = 0; i <= n; ++i) {
      for (Eigen::Index j = 0; j <= n; ++j) next[i] += a[i][j] * term[j];
      u[i] += next[i];
      mag = std::max(mag, std::abs(next[i]));
    }
    term = next;
    if (mag < 1e-15) break;
  }
  Vector v(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = (1 - eps) * p(i, i) * u[i];
  v(n) = u[n];
  return v;
}

const DelegationMatrix kTwoAgent = cols({{0.5, 0}, {0.5, 1}});
const DelegationMatrix kSwap = pointers({1, 0});
const DelegationMatrix kA1Left = cols({{0.5, 0.5, 0}, {0.5, 0, 1}, {0, 0.5, 0}});
const DelegationMatrix kA1Right = cols({{0.5, 0.5, 1}, {0.5, 0, 0}, {0, 0.5, 0}});
const DelegationMatrix kMixedLeft =
    cols({{1, 0.5, 0, 0}, {0, 0, 1, 0}, {0, 0.25, 0, 0}, {0, 0.25, 0, 1}});
const DelegationMatrix kMixedRight =
    cols({{1, 0.5, 2.0 / 3.0, 0}, {0, 0, 0, 0}, {0, 0.25, 0, 0}, {0, 0.25, 1.0 / 3.0, 1}});

}  // namespace

TEST(PowerEps, ClosedForms) {
  for (double eps : {0.5, 0.1, 0.01}) {
    expect_near(power_eps(DelegationMatrix::identity(1), eps).power.values, {1 - eps, eps}, 1e-14);
    const auto chain = pointers({1, 1});
    expect_near(power_eps(chain, eps).power.values,
                {0, (1 - eps) * (2 - eps), eps * (3 - eps)}, 1e-13);
    expect_near(power_eps(kSwap, eps).power.values, {0, 0, 2}, 1e-12);
  }
}

TEST(PowerEps, MatchesNeumannSeries) {
  for (std::uint64_t t = 0; t < 60; ++t) {
    auto rng = gen::trial_rng(21, t);
    const std::size_t n = gen::uniform_index(rng, 1, 8);
    const auto p = t % 3 == 0 && n >= 2 ? gen::random_cyclic_matrix(rng, n) : gen::random_matrix(rng, n);
    const WeightSource f = gen::random_source(rng, n, t % 2 == 1);
    const double eps = std::array<double, 3>{0.5, 0.1, 0.05}[t % 3];
    const Vector got = power_eps(p, f, eps).power.values;
    const Vector want = neumann_eps(p.matrix(), f, eps);
    EXPECT_LT((got - want).lpNorm<Eigen::Infinity>(), 1e-10) << "trial " << t;
  }
}

TEST(PowerEps, RejectsBadInput) {
  EXPECT_THROW(power_eps(kSwap, 0.0), Error);
  EXPECT_THROW(power_eps(kSwap, WeightSource::Ones(2), 0.1), Error);
}

TEST(PowerExact, PaperExamples) {
  expect_near(power_exact(pointers({1, 2, 3, 3, 4})).power.values, {0, 0, 0, 4, 1, 0}, 1e-12);
  expect_near(power_exact(pointers({1, 4, 3, 3, 4})).power.values, {0, 0, 0, 2, 3, 0}, 1e-12);
  expect_near(power_exact(pointers({1, 4, 3, 3, 0})).power.values, {0, 0, 0, 2, 0, 3}, 1e-12);
  expect_near(power_exact(kTwoAgent).power.values, {0.5, 1.5, 0}, 1e-12);
  expect_near(power_exact(kA1Left).power.values, {3, 0, 0, 0}, 1e-12);
  expect_near(power_exact(kA1Right).power.values, {3, 0, 0, 0}, 1e-12);
  expect_near(power_exact(kSwap).power.values, {0, 0, 2}, 1e-12);
}

TEST(PowerExact, LossEntryOfSourceIsKept) {
  WeightSource f(3);
  f << 1, 2, 0.5;
  expect_near(power_exact(kTwoAgent, f).power.values, {0.5, 2.5, 0.5}, 1e-12);
}

TEST(PowerSeries, Examples) {
  const auto id = power_series(DelegationMatrix::identity(4), Vector::Ones(4), 1e-12, 100);
  expect_near(id.power.values, {1, 1, 1, 1, 0}, 0);
  EXPECT_EQ(id.k_used, 1u);
  expect_near(power_series(kTwoAgent, Vector::Ones(2), 1e-10, 100).power.values, {0.5, 1.5, 0}, 1e-10);
  EXPECT_THROW(power_series(kA1Left, Vector::Ones(3), 1e-14, 3), Error);
}

TEST(PowerSeries, MatchesExactOnCycleFreeMatrices) {
  int tested = 0;
  for (std::uint64_t t = 0; tested < 50; ++t) {
    auto rng = gen::trial_rng(22, t);
    const auto p = gen::random_matrix(rng, gen::uniform_index(rng, 1, 8));
    if (!partition_agents(p).n3.empty()) continue;
    ++tested;
    const Vector f = Vector::Ones(static_cast<Eigen::Index>(p.n()));
    const Vector s = power_series(p, f, 1e-13, 1000000).power.values;
    EXPECT_LT((s - power_exact(p).power.values).lpNorm<Eigen::Infinity>(), 1e-8);
  }
}

TEST(Classic, IntroExamples) {
  expect_near(classic_power(pointers({1, 2, 3, 3, 4})), {0, 0, 0, 4, 1}, 1e-12);
  expect_near(classic_power(pointers({1, 4, 3, 3, 4})), {0, 0, 0, 2, 3}, 1e-12);
  expect_near(classic_power(pointers({1, 4, 3, 3, 0})), {0, 0, 0, 2, 0}, 1e-12);
  EXPECT_THROW(classic_power(kTwoAgent), Error);
}

TEST(Standard, Examples) {
  const auto two = standard_generalization(kTwoAgent, 10000, 1e-15);
  expect_near(two.values, {0, 2}, 1e-12);
  EXPECT_TRUE(two.converged);
  expect_near(standard_generalization(kA1Left, 3, 0).values, {9.0 / 16, 0, 0}, 1e-15);
  expect_near(standard_generalization(kA1Right, 3, 0).values, {13.0 / 16, 0, 0}, 1e-15);
  // the untruncated limits still differ, so the failure is not an artifact of k = 3
  expect_near(standard_generalization(kA1Left, 100000, 1e-15).values, {3.0 / 5, 0, 0}, 1e-10);
  expect_near(standard_generalization(kA1Right, 100000, 1e-15).values, {6.0 / 7, 0, 0}, 1e-10);
}

TEST(MixedStrategy, WorkedExamples) {
  expect_near(mixed_strategy_power(kMixedLeft), {2, 0, 0, 1.5}, 1e-12);
  expect_near(mixed_strategy_power(kMixedRight), {7.0 / 3, 0, 0, 5.0 / 3}, 1e-12);
}

TEST(MixedStrategy, EqualsClassicOnPureMatrices) {
  for (std::uint64_t t = 0; t < 50; ++t) {
    auto rng = gen::trial_rng(23, t);
    const auto p = gen::random_class_a(rng, gen::uniform_index(rng, 1, 9));
    EXPECT_EQ(mixed_strategy_power(p), classic_power(p)) << "trial " << t;
  }
}

TEST(MixedStrategy, SupportGuard) {
  Matrix m = Matrix::Constant(12, 12, 1.0 / 12);
  EXPECT_THROW(mixed_strategy_power(DelegationMatrix::from_columns(m)), Error);
}

TEST(Generalization, ExactEqualsClassicOnClassB) {
  for (std::uint64_t t = 0; t < 100; ++t) {
    auto rng = gen::trial_rng(24, t);
    const auto p = gen::random_class_b(rng, gen::uniform_index(rng, 1, 10));
    const Vector exact = power_exact(p).power.values.head(static_cast<Eigen::Index>(p.n()));
    EXPECT_LT((exact - classic_power(p)).lpNorm<Eigen::Infinity>(), 1e-9) << "trial " << t;
  }
}

TEST(Limit, PenalizedApproachesExact) {
  const auto p = kMixedLeft;
  double prev = 1e300;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
    const double dev =
        (power_eps(p, eps).power.values - power_exact(p).power.values).lpNorm<Eigen::Infinity>();
    EXPECT_LT(dev, prev);
    prev = dev;
  }
  EXPECT_LT(prev, 1e-4);
}
