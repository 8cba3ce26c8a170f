#pragma once

// Voting-power measures over a delegation matrix.
//
//   power_eps       penalized measure: one solve on the augmented system
//   power_exact     exact measure, restricted solve on the agents that reach
//                   a self-retainer
//   power_series    exact measure as a truncated Neumann series
//   classic_power   classic liquid-democracy tally (diagonal in {0,1})
//   standard_generalization, mixed_strategy_power
//                   the two naive extensions, kept as counterexamples

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "liquid/delegation.hpp"
#include "liquid/linalg.hpp"

namespace liquid {

enum class Method { Epsilon, ExactRestricted, Series, Classic, StandardGeneralization, MixedStrategy };

constexpr std::string_view to_string(Method m) {
  switch (m) {
    case Method::Epsilon: return "epsilon";
    case Method::ExactRestricted: return "exact";
    case Method::Series: return "series";
    case Method::Classic: return "classic";
    case Method::StandardGeneralization: return "standard";
    case Method::MixedStrategy: return "mixed-strategy";
  }
  return "unknown";
}

struct MeasureResult {
  PowerVector power;
  Method method = Method::ExactRestricted;
  double epsilon = 0.0;      ///< only for Method::Epsilon
  std::size_t k_used = 0;    ///< series terms / iterations, where applicable
  bool converged = true;
  double residual = 0.0;     ///< solver residual or last series increment
};

namespace detail {

inline PowerVector with_loss_by_conservation(Vector agents, double total) {
  const auto n = agents.size();
  Vector v(n + 1);
  v.head(n) = agents;
  v(n) = total - agents.sum();
  return PowerVector{std::move(v)};
}

inline Matrix restrict(const Matrix& m, const AgentSet& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix out(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) {
      out(r, c) = m(static_cast<Eigen::Index>(idx[r]), static_cast<Eigen::Index>(idx[c]));
    }
  }
  return out;
}

}  // namespace detail

/// Penalized measure. Solves (I - Pt_eps) u = f on the augmented system,
/// where Pt_eps is the augmented matrix with its diagonal removed, and reads
/// power off as the consumption rate (1 - eps) P_ii u_i; the loss entry is
/// u_{n+1}.
inline MeasureResult power_eps(const DelegationMatrix& p, const WeightSource& f, double epsilon) {
  require_epsilon(epsilon);
  require_source_length(f, p.n());
  const auto aug = augment(p, epsilon);
  const auto n = static_cast<Eigen::Index>(p.n());

  Matrix a = -aug.entries;
  a.diagonal().setOnes();
  const SolveResult s = solve_refined(a, f);
  if (!(s.residual <= residual_budget(f))) {
    throw Error(ErrorCode::SolverFailure,
                "penalized system residual " + std::to_string(s.residual) + " at epsilon " +
                    std::to_string(epsilon));
  }
  Vector v(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = aug.entries(i, i) * s.x(i);
  v(n) = s.x(n);

  MeasureResult out;
  out.power = PowerVector{std::move(v)};
  out.method = Method::Epsilon;
  out.epsilon = epsilon;
  out.residual = s.residual;
  return out;
}

inline MeasureResult power_eps(const DelegationMatrix& p, double epsilon) {
  return power_eps(p, default_source(p.n()), epsilon);
}

/// Exact measure (the epsilon -> 0 limit) without touching the badly
/// conditioned penalized system:
///   1. classify agents, keep N1 and N2;
///   2. restrict the off-diagonal part of P and the source to them;
///   3. solve (I - Pt_r) u_r = f_r;
///   4. V_i = P_ii u_i on the kept agents, 0 elsewhere, loss by conservation.
inline MeasureResult power_exact(const DelegationMatrix& p, const WeightSource& f) {
  require_source_length(f, p.n());
  const std::size_t n = p.n();
  const AgentPartition part = partition_agents(p);
  const AgentSet live = part.live();

  Vector agents = Vector::Zero(static_cast<Eigen::Index>(n));
  double residual = 0.0;
  if (!live.empty()) {
    const Matrix pt_r = detail::restrict(p.off_diagonal(), live);
    Vector f_r(static_cast<Eigen::Index>(live.size()));
    for (std::size_t r = 0; r < live.size(); ++r) {
      f_r(static_cast<Eigen::Index>(r)) = f(static_cast<Eigen::Index>(live[r]));
    }
    const Matrix a = Matrix::Identity(pt_r.rows(), pt_r.cols()) - pt_r;
    const SolveResult s = solve_refined(a, f_r);
    if (!(s.residual <= residual_budget(f_r))) {
      throw Error(ErrorCode::SolverFailure,
                  "restricted system residual " + std::to_string(s.residual) +
                      "; the agent classification is inconsistent");
    }
    residual = s.residual;
    for (std::size_t r = 0; r < live.size(); ++r) {
      agents(static_cast<Eigen::Index>(live[r])) =
          p.self_share(live[r]) * s.x(static_cast<Eigen::Index>(r));
    }
  }

  MeasureResult out;
  out.power = detail::with_loss_by_conservation(std::move(agents), f.sum());
  out.method = Method::ExactRestricted;
  out.residual = residual;
  return out;
}

inline MeasureResult power_exact(const DelegationMatrix& p) {
  return power_exact(p, default_source(p.n()));
}

/// Exact measure as lim_k (sum_{l<=k} Pt^l f) .* diag(P), with Pt the
/// off-diagonal part of P. Stops once every self-retainer's entry moves by
/// less than `tol` between successive partial sums; the loss entry is filled
/// in by conservation. `f` has one entry per agent.
inline MeasureResult power_series(const DelegationMatrix& p, const Vector& f, double tol,
                                  std::size_t k_max) {
  if (!(tol > 0.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "series tolerance must be positive");
  }
  if (k_max < 1) throw Error(ErrorCode::ParameterOutOfRange, "k_max must be at least 1");
  if (static_cast<std::size_t>(f.size()) != p.n()) {
    throw Error(ErrorCode::DimensionMismatch,
                "series source has length " + std::to_string(f.size()) + ", expected n = " +
                    std::to_string(p.n()));
  }
  const Matrix pt = p.off_diagonal();
  const Vector diag = p.matrix().diagonal();

  Vector term = f;
  Vector partial = f;
  Vector masked = partial.cwiseProduct(diag);
  double change = std::numeric_limits<double>::infinity();
  std::size_t k = 0;
  while (k < k_max) {
    ++k;
    term = pt * term;
    partial += term;
    Vector next = partial.cwiseProduct(diag);
    change = (next - masked).lpNorm<Eigen::Infinity>();
    masked = std::move(next);
    if (change < tol) break;
  }
  if (!(change < tol)) {
    throw Error(ErrorCode::NoConvergence,
                "series still moving by " + std::to_string(change) + " after " +
                    std::to_string(k_max) + " terms");
  }
  MeasureResult out;
  out.power = detail::with_loss_by_conservation(std::move(masked), f.sum());
  out.method = Method::Series;
  out.k_used = k;
  out.residual = change;
  return out;
}

// ---------------------------------------------------------------------------
// Classic tally and the naive generalizations

inline bool in_class_b(const DelegationMatrix& p) {
  for (std::size_t i = 0; i < p.n(); ++i) {
    const double d = p.self_share(i);
    if (!(d <= tol::kSelfRetention || std::abs(d - 1.0) <= tol::kSelfRetention)) return false;
  }
  return true;
}

/// Classic tally lim_k (P^k 1) .* diag(P) for matrices whose diagonal is
/// 0/1. Starts from P^(2n) and keeps squaring until the candidates' entries
/// settle; entries of agents trapped in cycles are masked to zero.
inline Vector classic_power(const DelegationMatrix& p) {
  if (!in_class_b(p)) {
    for (std::size_t i = 0; i < p.n(); ++i) {
      const double d = p.self_share(i);
      if (!(d <= tol::kSelfRetention || std::abs(d - 1.0) <= tol::kSelfRetention)) {
        throw Error(ErrorCode::NotInClassB,
                    agent_label(i) + " retains " + std::to_string(d) +
                        "; the classic tally needs every self-share in {0, 1}",
                    i);
      }
    }
  }
  const std::size_t n = p.n();
  const Vector diag = p.matrix().diagonal();
  const Vector ones = Vector::Ones(static_cast<Eigen::Index>(n));

  Matrix power = Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < 2 * n; ++k) power = p.matrix() * power;
  Vector masked = (power * ones).cwiseProduct(diag);

  // Fractional off-diagonal shares leave geometric transients behind 2n
  // steps; squaring drives them out quickly.
  constexpr int kMaxSquarings = 64;
  for (int s = 0; s < kMaxSquarings; ++s) {
    power = power * power;
    Vector next = (power * ones).cwiseProduct(diag);
    const double change = (next - masked).lpNorm<Eigen::Infinity>();
    masked = std::move(next);
    if (change <= 1e-15 * std::max(1.0, masked.lpNorm<Eigen::Infinity>())) break;
  }
  return masked;
}

struct StandardGeneralizationResult {
  Vector values;  ///< one entry per agent
  std::size_t k_used = 0;
  bool converged = false;
};

/// The naive extension of the classic tally to arbitrary P:
/// (P^k 1) .* diag(P), iterated up to k_max. The limit need not exist for
/// periodic chains, so non-convergence is reported rather than thrown.
inline StandardGeneralizationResult standard_generalization(const DelegationMatrix& p,
                                                            std::size_t k_max, double tol) {
  const Vector diag = p.matrix().diagonal();
  Vector mass = Vector::Ones(static_cast<Eigen::Index>(p.n()));
  Vector masked = mass.cwiseProduct(diag);
  StandardGeneralizationResult out;
  for (std::size_t k = 1; k <= k_max; ++k) {
    mass = p.matrix() * mass;
    Vector next = mass.cwiseProduct(diag);
    const double change = (next - masked).lpNorm<Eigen::Infinity>();
    masked = std::move(next);
    out.k_used = k;
    if (k > 1 && change < tol) {
      out.converged = true;
      break;
    }
  }
  out.values = std::move(masked);
  return out;
}

// ---------------------------------------------------------------------------
// Mixed-strategy expectation of the classic tally

inline constexpr std::uint64_t kMaxPureOutcomes = 10'000'000;

/// Targets with positive share, per agent.
inline std::vector<std::vector<std::size_t>> supports(const DelegationMatrix& p) {
  std::vector<std::vector<std::size_t>> out(p.n());
  for (std::size_t i = 0; i < p.n(); ++i) {
    for (std::size_t j = 0; j < p.n(); ++j) {
      if (p.share(i, j) > 0.0) out[i].push_back(j);
    }
  }
  return out;
}

inline std::uint64_t count_pure_outcomes(const std::vector<std::vector<std::size_t>>& supp) {
  std::uint64_t total = 1;
  for (const auto& s : supp) {
    total *= s.size();
    if (total > kMaxPureOutcomes) {
      throw Error(ErrorCode::SupportTooLarge,
                  "more than " + std::to_string(kMaxPureOutcomes) + " pure delegation outcomes");
    }
  }
  return total;
}

/// Classic tally of a pure delegation: every agent's vote follows the
/// pointer chain to a candidate, or is lost if the chain closes on itself.
inline Vector tally_pure(const std::vector<std::size_t>& target) {
  const std::size_t n = target.size();
  Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
  // 0 unresolved, 1 on current walk, 2 resolved
  std::vector<char> state(n, 0);
  constexpr std::size_t kLost = static_cast<std::size_t>(-1);
  std::vector<std::size_t> sink(n, kLost);
  std::vector<std::size_t> walk;
  for (std::size_t start = 0; start < n; ++start) {
    walk.clear();
    std::size_t cur = start;
    while (state[cur] == 0 && target[cur] != cur) {
      state[cur] = 1;
      walk.push_back(cur);
      cur = target[cur];
    }
    std::size_t result;
    if (target[cur] == cur) {
      result = cur;
    } else if (state[cur] == 2) {
      result = sink[cur];
    } else {
      result = kLost;  // walked back onto itself
    }
    if (target[cur] == cur) {
      sink[cur] = cur;
      state[cur] = 2;
    }
    for (auto w : walk) {
      sink[w] = result;
      state[w] = 2;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (sink[i] != kLost) v(static_cast<Eigen::Index>(sink[i])) += 1.0;
  }
  return v;
}

/// Expectation of the classic tally when every agent independently picks a
/// single proxy with the probabilities in its profile. Outcomes are visited in
/// lexicographic order of the choice vector (last agent varies fastest) and
/// each probability is the product of shares taken in agent order.
inline Vector mixed_strategy_power(const DelegationMatrix& p) {
  const std::size_t n = p.n();
  const auto supp = supports(p);
  count_pure_outcomes(supp);

  Vector total = Vector::Zero(static_cast<Eigen::Index>(n));
  std::vector<std::size_t> pick(n, 0);
  std::vector<std::size_t> target(n);
  while (true) {
    double prob = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      target[i] = supp[i][pick[i]];
      prob *= p.share(i, target[i]);
    }
    total += prob * tally_pure(target);

    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++pick[pos] < supp[pos].size()) break;
      pick[pos] = 0;
      if (pos == 0) return total;
    }
  }
}

}  // namespace liquid
