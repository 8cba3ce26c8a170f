#pragma once

// Delegation equivalence: an agent k that hands everything to a set D of
// non-retaining proxies can instead copy their (back-flow corrected) profiles
// without changing the exact power distribution.

#include <cstddef>
#include <string>
#include <utility>

#include "liquid/delegation.hpp"

namespace liquid {

struct ReductionSpec {
  std::size_t k = 0;  ///< the replicating agent
  AgentSet d;         ///< proxies k delegates to
  DelegationProfile x_star_k;
  double denominator = 1.0;  ///< 1 - sum_{i in D} x_ki x_ik
};

/// Minimum accepted value of 1 - sum_{i in D} x_ki x_ik.
inline constexpr double kMinReductionDenominator = 1e-12;

namespace detail {

inline void precondition(bool ok, const std::string& clause) {
  if (!ok) throw Error(ErrorCode::PreconditionViolated, clause);
}

/// Checks every hypothesis of the reduction and returns 1 - sum x_ki x_ik.
inline double checked_reduction_denominator(const DelegationMatrix& p, std::size_t k,
                                            const AgentSet& d) {
  const std::size_t n = p.n();
  precondition(!d.empty(), "proxy set D is empty");
  precondition(k < n, agent_label(k) + " is out of range");
  std::vector<bool> in_d(n, false);
  for (auto i : d) {
    precondition(i < n, "proxy " + agent_label(i) + " is out of range");
    precondition(i != k, "proxy set D contains the replicating " + agent_label(k));
    precondition(!retains_self(p, i), "proxy " + agent_label(i) + " retains part of its vote");
    in_d[i] = true;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const bool positive = p.share(k, j) > 0.0;
    if (in_d[j]) {
      precondition(positive, agent_label(k) + " hands nothing to proxy " + agent_label(j));
    } else {
      precondition(!positive, agent_label(k) + " hands a share to " + agent_label(j) +
                                  ", which is not in D");
    }
  }
  const AgentPartition part = partition_agents(p);
  precondition(part.block_of[k] != Block::N3,
               agent_label(k) + " is caught in a delegation cycle");

  double back = 0.0;
  for (auto i : d) back += p.share(k, i) * p.share(i, k);
  const double denom = 1.0 - back;
  if (!(denom > kMinReductionDenominator)) {
    throw Error(ErrorCode::DegenerateDenominator,
                "1 - sum x_ki x_ik = " + std::to_string(denom) + " for " + agent_label(k), k);
  }
  return denom;
}

}  // namespace detail

/// Replaces x_k with sum_{i in D} x_ki x*_i / (1 - sum_{i in D} x_ki x_ik),
/// where x*_i is x_i with its share to k removed.
inline std::pair<DelegationMatrix, ReductionSpec> delegation_reduction(const DelegationMatrix& p,
                                                                       std::size_t k,
                                                                       const AgentSet& d_in) {
  const AgentSet d = normalized_set(d_in);
  const double denom = detail::checked_reduction_denominator(p, k, d);
  const auto n = static_cast<Eigen::Index>(p.n());
  const auto ki = static_cast<Eigen::Index>(k);

  Vector x = Vector::Zero(n);
  for (auto i : d) {
    Vector xi = p.profile_weights(i);
    xi(ki) = 0.0;
    x += p.share(k, i) * xi;
  }
  x /= denom;
  DelegationProfile xk = validate_profile(x, k);
  DelegationMatrix reduced = p.with_profile(k, xk);
  return {std::move(reduced), ReductionSpec{k, d, std::move(xk), denom}};
}

/// (n+1) * sum(f) / (1 - sum_{j in D} x_kj x_jk): bounds how far the
/// penalized measure may move, per unit of epsilon, under the reduction.
inline double delta_delegation_constant(const DelegationMatrix& p, const WeightSource& f,
                                        std::size_t k, const AgentSet& d_in) {
  require_source_length(f, p.n());
  const AgentSet d = normalized_set(d_in);
  const double denom = detail::checked_reduction_denominator(p, k, d);
  return static_cast<double>(p.n() + 1) * f.sum() / denom;
}

}  // namespace liquid
