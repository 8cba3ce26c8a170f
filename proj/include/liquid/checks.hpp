#pragma once

// Randomized invariant suites. Every suite is a generator plus a
// single-instance predicate, so a failing instance can be written out and
// replayed on its own.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "liquid/delegation.hpp"
#include "liquid/game.hpp"
#include "liquid/measures.hpp"
#include "liquid/oracles.hpp"
#include "liquid/random_instances.hpp"
#include "liquid/reduction.hpp"

namespace liquid::checks {

inline constexpr std::array<std::string_view, 7> kSuites = {
    "conservation", "consistency", "generalization", "delegation",
    "delta-delegation", "limit", "game-vertex"};

inline constexpr std::uint64_t kDefaultSeed = 20240607;

inline bool known_suite(std::string_view name) {
  return std::find(kSuites.begin(), kSuites.end(), name) != kSuites.end();
}

inline void require_suite(std::string_view name) {
  if (!known_suite(name)) {
    throw Error(ErrorCode::UnknownSuite, "no check suite named '" + std::string(name) + "'");
  }
}

/// Everything needed to re-run one trial.
struct CheckInstance {
  std::string suite;
  DelegationMatrix p = DelegationMatrix::identity(1);
  WeightSource f;
  std::optional<std::size_t> k;  ///< delegation suites: the replicating agent
  AgentSet d;                    ///< delegation suites: its proxies
  std::optional<std::size_t> agent;  ///< game-vertex: the responding agent
  std::optional<PreferenceProfile> prefs;
  std::optional<double> epsilon;  ///< game-vertex
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
};

struct CheckOutcome {
  bool pass = true;
  double error = 0.0;  ///< the suite's headline deviation for this instance
  std::string detail;
};

struct CheckReport {
  std::string suite;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double worst = 0.0;
  std::uint64_t seed = 0;
  std::optional<CheckInstance> first_failure;
  std::string failure_detail;

  bool passed() const { return failures == 0; }
};

struct SuiteOptions {
  std::size_t n_max = 8;
  std::size_t trials = 100;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
};

inline constexpr std::array<double, 3> kConservationEpsilons = {0.5, 0.1, 0.01};
inline constexpr std::array<double, 5> kLimitLadder = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
inline constexpr std::array<double, 2> kDeltaEpsilons = {1e-2, 1e-3};

inline constexpr double kConservationTol = 1e-9;
inline constexpr double kGeneralizationTol = 1e-9;
inline constexpr double kDelegationTol = 1e-8;
inline constexpr double kLimitFinal = 1e-4;
/// Deviations at or below this count as already converged on the ladder.
inline constexpr double kLimitFloor = 1e-9;
inline constexpr double kVertexSlack = 1e-6;
inline constexpr double kGridDominance = 1e-9;
inline constexpr double kRegretFloor = -1e-12;
inline constexpr double kGridStep = 0.05;

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline void fail(CheckOutcome& out, const std::string& why) {
  if (out.pass) out.detail = why;
  out.pass = false;
}

inline std::size_t pick_n(gen::Rng& rng, std::size_t lo, std::size_t n_max) {
  return gen::uniform_index(rng, std::min(lo, n_max), std::max(lo, n_max));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Single-instance predicates

inline CheckOutcome check_conservation(const CheckInstance& c) {
  CheckOutcome out;
  const double target = c.f.sum();
  auto test = [&](const PowerVector& v, const std::string& label) {
    const double dev = std::abs(v.total() - target);
    out.error = std::max(out.error, dev);
    if (!(dev <= kConservationTol)) {
      detail::fail(out, label + ": sum of power " + detail::fmt(v.total()) + " vs sum of f " +
                            detail::fmt(target));
    }
  };
  for (double eps : kConservationEpsilons) {
    test(power_eps(c.p, c.f, eps).power, "epsilon " + detail::fmt(eps));
  }
  test(power_exact(c.p, c.f).power, "exact");
  return out;
}

inline CheckOutcome check_consistency(const CheckInstance& c) {
  CheckOutcome out;
  const std::size_t n = c.p.n();
  auto test = [&](const PowerVector& v, double scale, const std::string& label) {
    for (std::size_t i = 0; i < n; ++i) {
      const double pii = c.p.self_share(i);
      const double fi = c.f(static_cast<Eigen::Index>(i));
      const double floor = scale * pii * fi;
      if (pii == 0.0 && v[i] != 0.0) {
        detail::fail(out, label + ": " + agent_label(i) + " keeps nothing but has power " +
                              detail::fmt(v[i]));
      }
      const double shortfall = floor - v[i];
      out.error = std::max(out.error, shortfall);
      if (shortfall > 1e-12 * std::max(1.0, floor)) {
        detail::fail(out, label + ": " + agent_label(i) + " power " + detail::fmt(v[i]) +
                              " below guaranteed " + detail::fmt(floor));
      }
      if (v[i] < kRegretFloor) {
        detail::fail(out, label + ": " + agent_label(i) + " has negative power");
      }
    }
  };
  for (double eps : kConservationEpsilons) {
    test(power_eps(c.p, c.f, eps).power, 1.0 - eps, "epsilon " + detail::fmt(eps));
  }
  test(power_exact(c.p, c.f).power, 1.0, "exact");
  return out;
}

inline CheckOutcome check_generalization(const CheckInstance& c) {
  CheckOutcome out;
  const std::size_t n = c.p.n();
  const Vector classic = classic_power(c.p);
  const PowerVector exact = power_exact(c.p, c.f).power;
  Vector padded(static_cast<Eigen::Index>(n + 1));
  padded.head(static_cast<Eigen::Index>(n)) = classic;
  padded(static_cast<Eigen::Index>(n)) = c.f.sum() - classic.sum();
  out.error = (padded - exact.values).lpNorm<Eigen::Infinity>();
  if (!(out.error <= kGeneralizationTol)) {
    detail::fail(out, "exact and classic tallies differ by " + detail::fmt(out.error));
  }
  return out;
}

inline CheckOutcome check_delegation(const CheckInstance& c) {
  CheckOutcome out;
  const auto [reduced, spec] = delegation_reduction(c.p, c.k.value(), c.d);
  const Vector a = power_exact(c.p, c.f).power.values;
  const Vector b = power_exact(reduced, c.f).power.values;
  out.error = (a - b).lpNorm<Eigen::Infinity>();
  if (!(out.error <= kDelegationTol)) {
    detail::fail(out, "exact power moved by " + detail::fmt(out.error) + " under the reduction");
  }
  return out;
}

inline CheckOutcome check_delta_delegation(const CheckInstance& c) {
  CheckOutcome out;
  const auto [reduced, spec] = delegation_reduction(c.p, c.k.value(), c.d);
  const double constant = delta_delegation_constant(c.p, c.f, c.k.value(), c.d);
  for (double eps : kDeltaEpsilons) {
    const Vector a = power_eps(c.p, c.f, eps).power.values;
    const Vector b = power_eps(reduced, c.f, eps).power.values;
    const double dev = (a - b).lpNorm<Eigen::Infinity>();
    const double bound = constant * eps;
    out.error = std::max(out.error, dev / bound);
    if (!(dev <= bound)) {
      detail::fail(out, "epsilon " + detail::fmt(eps) + ": deviation " + detail::fmt(dev) +
                            " exceeds C*eps = " + detail::fmt(bound));
    }
  }
  return out;
}

/// max_i |V^eps_i - V_i| along the epsilon ladder.
inline std::vector<double> limit_deviations(const DelegationMatrix& p, const WeightSource& f) {
  const Vector exact = power_exact(p, f).power.values;
  std::vector<double> devs;
  for (double eps : kLimitLadder) {
    devs.push_back((power_eps(p, f, eps).power.values - exact).lpNorm<Eigen::Infinity>());
  }
  return devs;
}

inline CheckOutcome check_limit(const CheckInstance& c) {
  CheckOutcome out;
  const auto devs = limit_deviations(c.p, c.f);
  out.error = devs.back();
  for (std::size_t s = 1; s < devs.size(); ++s) {
    if (!(devs[s] < devs[s - 1] || devs[s] <= kLimitFloor)) {
      detail::fail(out, "deviation did not shrink from epsilon " + detail::fmt(kLimitLadder[s - 1]) +
                            " (" + detail::fmt(devs[s - 1]) + ") to " + detail::fmt(kLimitLadder[s]) +
                            " (" + detail::fmt(devs[s]) + ")");
    }
  }
  if (!(devs.back() < kLimitFinal)) {
    detail::fail(out, "deviation at the smallest epsilon is " + detail::fmt(devs.back()));
  }
  return out;
}

inline CheckOutcome check_game_vertex(const CheckInstance& c) {
  CheckOutcome out;
  const std::size_t i = c.agent.value();
  const Vector w = c.prefs.value().row(i);
  const double eps = c.epsilon.value();
  const auto space = StrategySpace::full(c.p.n());
  const BestResponse br = best_response(c.p, i, w, eps, space);
  const GridResult grid = grid_best_response(c.p, i, w, eps, kGridStep);
  out.error = grid.value - br.value;
  if (!(br.value >= grid.value - kVertexSlack)) {
    detail::fail(out, "grid point beats every vertex by " + detail::fmt(grid.value - br.value));
  }
  if (!(grid.value <= br.value + kGridDominance)) {
    detail::fail(out, "grid value exceeds the vertex optimum by " +
                          detail::fmt(grid.value - br.value));
  }
  const double regret = br.value - utility(c.p, i, w, eps);
  if (regret < kRegretFloor) detail::fail(out, "negative regret " + detail::fmt(regret));
  return out;
}

inline CheckOutcome check_instance(const CheckInstance& c) {
  require_suite(c.suite);
  if (c.suite == "conservation") return check_conservation(c);
  if (c.suite == "consistency") return check_consistency(c);
  if (c.suite == "generalization") return check_generalization(c);
  if (c.suite == "delegation") return check_delegation(c);
  if (c.suite == "delta-delegation") return check_delta_delegation(c);
  if (c.suite == "limit") return check_limit(c);
  return check_game_vertex(c);
}

// ---------------------------------------------------------------------------
// Generators

inline CheckInstance make_instance(std::string_view suite, std::size_t n_max, std::uint64_t seed,
                                   std::uint64_t trial) {
  require_suite(suite);
  gen::Rng rng = gen::trial_rng(seed, trial);
  CheckInstance c;
  c.suite = std::string(suite);
  c.seed = seed;
  c.trial = trial;
  if (suite == "conservation" || suite == "consistency") {
    const std::size_t n = detail::pick_n(rng, 1, n_max);
    c.p = (n >= 2 && trial % 3 == 0) ? gen::random_cyclic_matrix(rng, n) : gen::random_matrix(rng, n);
    c.f = gen::random_source(rng, n, suite == "conservation" && trial % 2 == 1);
  } else if (suite == "generalization") {
    const std::size_t n = detail::pick_n(rng, 1, n_max);
    c.p = gen::random_class_b(rng, n);
    c.f = default_source(n);
  } else if (suite == "delegation" || suite == "delta-delegation") {
    const std::size_t n = detail::pick_n(rng, 3, n_max);
    auto inst = gen::random_reduction_instance(rng, n);
    c.p = std::move(inst.p);
    c.k = inst.k;
    c.d = std::move(inst.d);
    c.f = gen::random_source(rng, n);
  } else if (suite == "limit") {
    const std::size_t n = detail::pick_n(rng, 2, n_max);
    c.p = (trial % 2 == 0) ? gen::random_cyclic_matrix(rng, n) : gen::random_matrix(rng, n);
    c.f = default_source(n);
  } else {  // game-vertex
    const std::size_t n = detail::pick_n(rng, 1, std::min<std::size_t>(n_max, 4));
    c.p = gen::random_matrix(rng, n);
    c.f = default_source(n);
    c.prefs = gen::random_preferences(rng, n);
    c.agent = gen::uniform_index(rng, 0, n - 1);
    c.epsilon = std::array<double, 3>{0.05, 0.1, 0.3}[gen::uniform_index(rng, 0, 2)];
  }
  return c;
}

/// Runs `opt.trials` independent trials, fanned out over `opt.threads`
/// workers. Results do not depend on the thread count.
inline CheckReport run_suite(std::string_view suite, const SuiteOptions& opt) {
  require_suite(suite);
  std::vector<CheckOutcome> outcomes(opt.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= opt.trials) return;
      try {
        outcomes[t] = check_instance(make_instance(suite, opt.n_max, opt.seed, t));
      } catch (const Error& e) {
        outcomes[t] = CheckOutcome{false, std::numeric_limits<double>::infinity(), e.what()};
      }
    }
  };
  const unsigned threads = std::max(1u, opt.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  CheckReport rep;
  rep.suite = std::string(suite);
  rep.trials = opt.trials;
  rep.seed = opt.seed;
  for (std::size_t t = 0; t < opt.trials; ++t) {
    rep.worst = std::max(rep.worst, outcomes[t].error);
    if (!outcomes[t].pass) {
      if (rep.failures == 0) {
        rep.first_failure = make_instance(suite, opt.n_max, opt.seed, t);
        rep.failure_detail = outcomes[t].detail;
      }
      ++rep.failures;
    }
  }
  return rep;
}

}  // namespace liquid::checks
