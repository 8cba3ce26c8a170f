#pragma once

// The delegation game: each agent picks its profile to maximize a
// preference-weighted account of where its own vote is consumed under the
// penalized measure.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "liquid/delegation.hpp"
#include "liquid/measures.hpp"

namespace liquid {

/// Row i: agent i's satisfaction per unit of its vote consumed by each of
/// the n agents, then by the loss agent. Entries may be negative.
struct PreferenceProfile {
  Matrix w;

  std::size_t n() const { return static_cast<std::size_t>(w.rows()); }
  Vector row(std::size_t i) const { return w.row(static_cast<Eigen::Index>(i)).transpose(); }
};

inline void require_preferences(const PreferenceProfile& prefs, std::size_t n) {
  if (prefs.n() != n || static_cast<std::size_t>(prefs.w.cols()) != n + 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "preferences must be " + std::to_string(n) + "x" + std::to_string(n + 1));
  }
  if (!prefs.w.allFinite()) {
    throw Error(ErrorCode::InvalidInstance, "preferences contain non-finite entries");
  }
}

/// Allowed delegation targets per agent.
class StrategySpace {
 public:
  static StrategySpace full(std::size_t n) {
    AgentSet all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return StrategySpace(std::vector<AgentSet>(n, all));
  }

  static StrategySpace restricted(std::vector<AgentSet> neighborhoods) {
    const std::size_t n = neighborhoods.size();
    for (std::size_t i = 0; i < n; ++i) {
      neighborhoods[i] = normalized_set(std::move(neighborhoods[i]));
      if (neighborhoods[i].empty()) {
        throw Error(ErrorCode::EmptyNeighborhood, agent_label(i) + " has no allowed targets", i);
      }
      if (neighborhoods[i].back() >= n) {
        throw Error(ErrorCode::DimensionMismatch,
                    agent_label(i) + " lists target " + agent_label(neighborhoods[i].back()) +
                        " outside 1.." + std::to_string(n),
                    i);
      }
    }
    return StrategySpace(std::move(neighborhoods));
  }

  std::size_t n() const { return allowed_.size(); }
  const AgentSet& allowed(std::size_t i) const { return allowed_.at(i); }

  bool admits(const DelegationMatrix& p, std::size_t i) const {
    const auto& nb = allowed(i);
    for (std::size_t j = 0; j < p.n(); ++j) {
      if (p.share(i, j) > 0.0 && !std::binary_search(nb.begin(), nb.end(), j)) return false;
    }
    return true;
  }

 private:
  explicit StrategySpace(std::vector<AgentSet> a) : allowed_(std::move(a)) {}
  std::vector<AgentSet> allowed_;
};

/// U_i = w_i . V^eps(P, delta_i): where agent i's own unit of vote ends up.
inline double utility(const DelegationMatrix& p, std::size_t agent, const Vector& w_i,
                      double epsilon) {
  require_epsilon(epsilon);
  if (static_cast<std::size_t>(w_i.size()) != p.n() + 1) {
    throw Error(ErrorCode::DimensionMismatch, "preference row must have n+1 entries");
  }
  const auto r = power_eps(p, unit_source(p.n(), agent), epsilon);
  return w_i.dot(r.power.values);
}

struct BestResponse {
  std::size_t agent = 0;
  AgentSet argmax_vertices;  ///< targets whose point-mass profile is optimal
  double value = 0.0;
};

/// Relative tolerance under which two vertex utilities count as tied.
inline constexpr double kTieTolerance = 1e-10;

/// Utility is monotone along every segment of the agent's own simplex, so the
/// optimum is attained at a vertex and the convex hull of the optimal
/// vertices is the whole best-response set. Evaluates each allowed vertex.
/// Column `agent` of `profile` is ignored.
inline BestResponse best_response(const DelegationMatrix& profile, std::size_t agent,
                                  const Vector& w_i, double epsilon,
                                  const StrategySpace& space) {
  require_epsilon(epsilon);
  const std::size_t n = profile.n();
  if (agent >= n) throw Error(ErrorCode::DimensionMismatch, agent_label(agent) + " is out of range");
  const AgentSet& nb = space.allowed(agent);
  if (nb.empty()) {
    throw Error(ErrorCode::EmptyNeighborhood, agent_label(agent) + " has no allowed targets", agent);
  }
  std::vector<double> values;
  values.reserve(nb.size());
  for (auto j : nb) {
    const auto trial = profile.with_profile(agent, DelegationProfile::vertex(n, j, agent));
    values.push_back(utility(trial, agent, w_i, epsilon));
  }
  const double best = *std::max_element(values.begin(), values.end());
  const double slack = kTieTolerance * std::max(1.0, std::abs(best));
  BestResponse br;
  br.agent = agent;
  br.value = best;
  for (std::size_t t = 0; t < nb.size(); ++t) {
    if (values[t] >= best - slack) br.argmax_vertices.push_back(nb[t]);
  }
  return br;
}

struct RegretReport {
  Vector regrets;  ///< best-response value minus current utility, per agent
  double max_regret = 0.0;

  bool is_epsilon_nash(double tol) const { return max_regret <= tol; }
};

inline constexpr double kDefaultRegretTolerance = 1e-6;

inline RegretReport verify_equilibrium(const DelegationMatrix& p, const PreferenceProfile& prefs,
                                       double epsilon, const StrategySpace& space) {
  require_epsilon(epsilon);
  require_preferences(prefs, p.n());
  RegretReport rep;
  rep.regrets = Vector::Zero(static_cast<Eigen::Index>(p.n()));
  rep.max_regret = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.n(); ++i) {
    if (!space.admits(p, i)) {
      throw Error(ErrorCode::PreconditionViolated,
                  agent_label(i) + " delegates outside its allowed neighborhood", i);
    }
    const Vector w = prefs.row(i);
    const double current = utility(p, i, w, epsilon);
    const double best = best_response(p, i, w, epsilon, space).value;
    rep.regrets(static_cast<Eigen::Index>(i)) = best - current;
    rep.max_regret = std::max(rep.max_regret, best - current);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Best-response dynamics

enum class DynamicsStatus { Converged, CycleDetected, MaxIters };

constexpr std::string_view to_string(DynamicsStatus s) {
  switch (s) {
    case DynamicsStatus::Converged: return "Converged";
    case DynamicsStatus::CycleDetected: return "CycleDetected";
    case DynamicsStatus::MaxIters: return "MaxIters";
  }
  return "Unknown";
}

struct TrajectoryStep {
  std::size_t round = 0;
  std::size_t agent = 0;
  std::size_t target = 0;  ///< the vertex the agent switched to
  double max_regret = 0.0; ///< of the whole profile right after the switch
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  std::vector<std::size_t> order;  ///< update order used in every round
  DynamicsStatus status = DynamicsStatus::MaxIters;
  std::size_t rounds = 0;
  DelegationMatrix final_profile = DelegationMatrix::identity(1);
  RegretReport final_regrets;
};

/// Sequential best responses with inertia: agents move in a fixed
/// seed-shuffled order and only switch when the best vertex beats their
/// current utility by more than `tol`, taking the lowest-index optimal
/// vertex. A round without switches ends the run as Converged; a repeated
/// end-of-round profile as CycleDetected; otherwise MaxIters after
/// `max_rounds` rounds.
inline Trajectory br_dynamics(const DelegationMatrix& p0, const PreferenceProfile& prefs,
                              double epsilon, const StrategySpace& space, std::size_t max_rounds,
                              double tol, std::uint64_t seed) {
  require_epsilon(epsilon);
  const std::size_t n = p0.n();
  require_preferences(prefs, n);
  if (space.n() != n) throw Error(ErrorCode::DimensionMismatch, "strategy space size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (!space.admits(p0, i)) {
      throw Error(ErrorCode::PreconditionViolated,
                  agent_label(i) + " starts outside its allowed neighborhood", i);
    }
  }

  Trajectory traj;
  traj.order.resize(n);
  std::iota(traj.order.begin(), traj.order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(traj.order.begin(), traj.order.end(), rng);

  auto key = [](const DelegationMatrix& p) {
    const Matrix& m = p.matrix();
    return std::vector<double>(m.data(), m.data() + m.size());
  };
  std::set<std::vector<double>> seen{key(p0)};

  DelegationMatrix current = p0;
  traj.status = DynamicsStatus::MaxIters;
  for (std::size_t round = 1; round <= max_rounds; ++round) {
    traj.rounds = round;
    bool switched = false;
    for (auto i : traj.order) {
      const Vector w = prefs.row(i);
      const BestResponse br = best_response(current, i, w, epsilon, space);
      const double now = utility(current, i, w, epsilon);
      if (br.value > now + tol) {
        const std::size_t target = br.argmax_vertices.front();
        current = current.with_profile(i, DelegationProfile::vertex(n, target, i));
        switched = true;
        traj.steps.push_back({round, i, target,
                              verify_equilibrium(current, prefs, epsilon, space).max_regret});
      }
    }
    if (!switched) {
      traj.status = DynamicsStatus::Converged;
      break;
    }
    if (!seen.insert(key(current)).second) {
      traj.status = DynamicsStatus::CycleDetected;
      break;
    }
  }
  traj.final_regrets = verify_equilibrium(current, prefs, epsilon, space);
  traj.final_profile = std::move(current);
  return traj;
}

}  // namespace liquid
