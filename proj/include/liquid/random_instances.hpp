#pragma once

// Random instance generators for the property suites.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "liquid/delegation.hpp"
#include "liquid/game.hpp"

namespace liquid::gen {

using Rng = std::mt19937_64;

/// Independent stream per (seed, trial) so trials can run in any order.
inline Rng trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return Rng(seq);
}

inline std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

/// `count` distinct agents drawn from `pool`.
inline AgentSet sample(Rng& rng, AgentSet pool, std::size_t count) {
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min(count, pool.size()));
  std::sort(pool.begin(), pool.end());
  return pool;
}

inline AgentSet others(std::size_t n, std::size_t self) {
  AgentSet out;
  for (std::size_t j = 0; j < n; ++j) {
    if (j != self) out.push_back(j);
  }
  return out;
}

/// Positive weights in [0.2, 1] on `targets`, normalized.
inline Vector spread(Rng& rng, std::size_t n, const AgentSet& targets) {
  Vector x = Vector::Zero(static_cast<Eigen::Index>(n));
  for (auto t : targets) x(static_cast<Eigen::Index>(t)) = uniform(rng, 0.2, 1.0);
  return x / x.sum();
}

/// Profile with 1-3 outside targets, plus a retained share with probability
/// `p_keep`.
inline Vector random_profile(Rng& rng, std::size_t n, std::size_t owner, double p_keep) {
  if (n == 1) return Vector::Ones(1);
  AgentSet targets = sample(rng, others(n, owner), uniform_index(rng, 1, std::min<std::size_t>(3, n - 1)));
  if (coin(rng, p_keep)) {
    targets.push_back(owner);
    std::sort(targets.begin(), targets.end());
  }
  return spread(rng, n, targets);
}

/// General fractional delegation matrix; cycles and chains occur naturally.
inline DelegationMatrix random_matrix(Rng& rng, std::size_t n, double p_keep = 0.4) {
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) m.col(static_cast<Eigen::Index>(j)) = random_profile(rng, n, j, p_keep);
  return DelegationMatrix::from_columns(m);
}

/// Matrix that is guaranteed to contain a delegation cycle (n >= 2): a
/// random group of at least two agents delegates only among itself.
inline DelegationMatrix random_cyclic_matrix(Rng& rng, std::size_t n) {
  Matrix m = random_matrix(rng, n).matrix();
  const std::size_t size = uniform_index(rng, 2, std::min<std::size_t>(n, 4));
  AgentSet all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const AgentSet cyc = sample(rng, all, size);
  for (auto i : cyc) {
    AgentSet pool;
    for (auto j : cyc) {
      if (j != i) pool.push_back(j);
    }
    const AgentSet targets = sample(rng, pool, uniform_index(rng, 1, pool.size()));
    m.col(static_cast<Eigen::Index>(i)) = spread(rng, n, targets);
  }
  return DelegationMatrix::from_columns(m);
}

/// Every self-share is 0 or 1; delegators may split among several proxies.
inline DelegationMatrix random_class_b(Rng& rng, std::size_t n, double p_candidate = 0.4) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    if (n == 1 || coin(rng, p_candidate)) {
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0;
    } else {
      m.col(static_cast<Eigen::Index>(j)) = random_profile(rng, n, j, 0.0);
    }
  }
  return DelegationMatrix::from_columns(m);
}

/// Classic pure delegation: every agent keeps all or names one proxy.
inline DelegationMatrix random_class_a(Rng& rng, std::size_t n, double p_candidate = 0.35) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t t = j;
    if (n > 1 && !coin(rng, p_candidate)) t = sample(rng, others(n, j), 1).front();
    m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = 1.0;
  }
  return DelegationMatrix::from_columns(m);
}

/// Nonnegative source; the loss slot is zero unless `loss_weight` is set.
inline WeightSource random_source(Rng& rng, std::size_t n, bool loss_weight = false) {
  WeightSource f(static_cast<Eigen::Index>(n + 1));
  for (std::size_t i = 0; i < n; ++i) f(static_cast<Eigen::Index>(i)) = uniform(rng, 0.0, 2.0);
  f(static_cast<Eigen::Index>(n)) = loss_weight ? uniform(rng, 0.0, 1.0) : 0.0;
  return f;
}

struct ReductionInstance {
  DelegationMatrix p;
  std::size_t k;
  AgentSet d;
};

/// Instance satisfying the hypotheses of the delegation reduction (n >= 3):
/// k hands everything to proxies D, no proxy retains anything, proxies may
/// hand part of their vote back to k, and k can reach a self-retainer.
inline ReductionInstance random_reduction_instance(Rng& rng, std::size_t n) {
  for (;;) {
    Matrix m = random_matrix(rng, n).matrix();
    const std::size_t k = uniform_index(rng, 0, n - 1);
    const AgentSet d = sample(rng, others(n, k), uniform_index(rng, 1, std::min<std::size_t>(3, n - 1)));
    for (auto i : d) {
      AgentSet pool = others(n, i);
      AgentSet targets = sample(rng, pool, uniform_index(rng, 1, std::min<std::size_t>(3, pool.size())));
      if (coin(rng, 0.5) && !std::binary_search(targets.begin(), targets.end(), k)) {
        targets.push_back(k);
        std::sort(targets.begin(), targets.end());
      }
      m.col(static_cast<Eigen::Index>(i)) = spread(rng, n, targets);
    }
    m.col(static_cast<Eigen::Index>(k)) = spread(rng, n, d);
    DelegationMatrix p = DelegationMatrix::from_columns(m);
    if (partition_agents(p).block_of[k] != Block::N3) return {std::move(p), k, d};
  }
}

inline PreferenceProfile random_preferences(Rng& rng, std::size_t n) {
  PreferenceProfile prefs;
  prefs.w.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n + 1));
  for (Eigen::Index r = 0; r < prefs.w.rows(); ++r) {
    for (Eigen::Index c = 0; c < prefs.w.cols(); ++c) prefs.w(r, c) = uniform(rng, -1.0, 1.0);
  }
  return prefs;
}

/// Everybody values its own consumption far above anything else.
inline PreferenceProfile dominant_diagonal_preferences(Rng& rng, std::size_t n) {
  PreferenceProfile prefs;
  prefs.w.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n + 1));
  for (Eigen::Index r = 0; r < prefs.w.rows(); ++r) {
    for (Eigen::Index c = 0; c < prefs.w.cols(); ++c) prefs.w(r, c) = uniform(rng, 0.0, 1.0);
    prefs.w(r, r) = uniform(rng, 5.0, 10.0);
  }
  return prefs;
}

}  // namespace liquid::gen
