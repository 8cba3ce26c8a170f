#pragma once

// Delegation profiles, the column-stochastic delegation matrix, and the
// graph classification used by the exact measure.
//
// Orientation: P(i, j) is the share agent j hands to agent i, so column j is
// agent j's profile. A particle sitting at j jumps to i at rate P(i, j).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "liquid/error.hpp"

namespace liquid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sorted, duplicate-free list of zero-based agent indices.
using AgentSet = std::vector<std::size_t>;

namespace tol {
/// Negative shares down to this are treated as round-off and clamped.
inline constexpr double kShareSlack = 1e-12;
/// Allowed deviation of a profile sum from 1.
inline constexpr double kProfileSum = 1e-9;
/// Self-retention at or below this counts as zero for N1 membership.
inline constexpr double kSelfRetention = 1e-12;
}  // namespace tol

inline std::string agent_label(std::size_t agent) {
  return "agent " + std::to_string(agent + 1);
}

class DelegationProfile {
 public:
  const Vector& weights() const { return weights_; }
  std::size_t owner() const { return owner_; }
  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
  double operator[](std::size_t j) const { return weights_(static_cast<Eigen::Index>(j)); }

  /// Point mass on `target`.
  static DelegationProfile vertex(std::size_t n, std::size_t target, std::size_t owner) {
    Vector w = Vector::Zero(static_cast<Eigen::Index>(n));
    w(static_cast<Eigen::Index>(target)) = 1.0;
    return DelegationProfile(std::move(w), owner);
  }

 private:
  DelegationProfile(Vector w, std::size_t owner) : weights_(std::move(w)), owner_(owner) {}

  friend DelegationProfile validate_profile(std::span<const double>, std::size_t);

  Vector weights_;
  std::size_t owner_ = 0;
};

/// Clamps round-off negatives, checks the sum and renormalizes to exactly 1.
inline DelegationProfile validate_profile(std::span<const double> raw, std::size_t owner = 0) {
  if (raw.empty()) {
    throw Error(ErrorCode::EmptyProfile, agent_label(owner) + ": profile has no entries", owner);
  }
  Vector w(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double x = raw[j];
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::NotNormalized,
                  agent_label(owner) + ": share to " + agent_label(j) + " is not finite", owner);
    }
    if (x < -tol::kShareSlack) {
      throw Error(ErrorCode::NegativeShare,
                  agent_label(owner) + ": negative share " + std::to_string(x) + " to " +
                      agent_label(j),
                  owner);
    }
    w(static_cast<Eigen::Index>(j)) = std::max(x, 0.0);
  }
  const double sum = w.sum();
  if (std::abs(sum - 1.0) > tol::kProfileSum) {
    throw Error(ErrorCode::NotNormalized,
                agent_label(owner) + ": profile shares sum to " + std::to_string(sum) +
                    " (expected 1)",
                owner);
  }
  // Leave already-normalized input alone so normalization is idempotent.
  const double ulps = 4.0 * static_cast<double>(raw.size() + 1) * std::numeric_limits<double>::epsilon();
  if (std::abs(sum - 1.0) > ulps) w /= sum;
  return DelegationProfile(std::move(w), owner);
}

inline DelegationProfile validate_profile(const Vector& raw, std::size_t owner = 0) {
  return validate_profile(std::span<const double>(raw.data(), static_cast<std::size_t>(raw.size())),
                          owner);
}

class DelegationMatrix {
 public:
  /// Validates every column as the profile of the agent with that index.
  static DelegationMatrix from_columns(const Matrix& m) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "delegation matrix must be square and non-empty, got " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      Vector col = m.col(j);
      out.col(j) = validate_profile(col, static_cast<std::size_t>(j)).weights();
    }
    return DelegationMatrix(std::move(out));
  }

  /// Row i is agent i's profile (the agent-major layout used by instance files).
  static DelegationMatrix from_rows(const Matrix& rows) {
    return from_columns(rows.transpose());
  }

  static DelegationMatrix identity(std::size_t n) {
    return DelegationMatrix(Matrix::Identity(static_cast<Eigen::Index>(n),
                                             static_cast<Eigen::Index>(n)));
  }

  std::size_t n() const { return static_cast<std::size_t>(p_.rows()); }
  const Matrix& matrix() const { return p_; }

  /// Share that agent `from` assigns to agent `to`.
  double share(std::size_t from, std::size_t to) const {
    return p_(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from));
  }
  double self_share(std::size_t i) const { return share(i, i); }

  Vector profile_weights(std::size_t agent) const {
    return p_.col(static_cast<Eigen::Index>(agent));
  }

  /// Copy with agent's column replaced. The profile must have length n.
  DelegationMatrix with_profile(std::size_t agent, const DelegationProfile& x) const {
    if (x.size() != n()) {
      throw Error(ErrorCode::DimensionMismatch,
                  agent_label(agent) + ": profile length " + std::to_string(x.size()) +
                      " does not match n = " + std::to_string(n()),
                  agent);
    }
    if (agent >= n()) {
      throw Error(ErrorCode::DimensionMismatch, agent_label(agent) + " is out of range");
    }
    Matrix m = p_;
    m.col(static_cast<Eigen::Index>(agent)) = x.weights();
    return DelegationMatrix(std::move(m));
  }

  /// P with its diagonal removed.
  Matrix off_diagonal() const {
    Matrix m = p_;
    m.diagonal().setZero();
    return m;
  }

  bool operator==(const DelegationMatrix& other) const { return p_ == other.p_; }

 private:
  explicit DelegationMatrix(Matrix m) : p_(std::move(m)) {}

  friend DelegationMatrix assemble_matrix(std::span<const DelegationProfile>);

  Matrix p_;
};

/// Places each profile at its owner's column.
inline DelegationMatrix assemble_matrix(std::span<const DelegationProfile> profiles) {
  const std::size_t n = profiles.size();
  if (n == 0) {
    throw Error(ErrorCode::DimensionMismatch, "no profiles given");
  }
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<bool> seen(n, false);
  for (const auto& x : profiles) {
    if (x.size() != n) {
      throw Error(ErrorCode::DimensionMismatch,
                  agent_label(x.owner()) + ": profile length " + std::to_string(x.size()) +
                      ", expected " + std::to_string(n),
                  x.owner());
    }
    if (x.owner() >= n) {
      throw Error(ErrorCode::DimensionMismatch,
                  agent_label(x.owner()) + " is outside 1.." + std::to_string(n), x.owner());
    }
    if (seen[x.owner()]) {
      throw Error(ErrorCode::DuplicateOwner,
                  agent_label(x.owner()) + " has more than one profile", x.owner());
    }
    seen[x.owner()] = true;
    m.col(static_cast<Eigen::Index>(x.owner())) = x.weights();
  }
  return DelegationMatrix(std::move(m));
}

// ---------------------------------------------------------------------------
// Graph classification

enum class Block { N1, N2, N3 };

struct AgentPartition {
  AgentSet n1;  ///< self-retainers
  AgentSet n2;  ///< reach N1 along a delegation path
  AgentSet n3;  ///< everything else: cycles and agents that only feed them
  std::vector<Block> block_of;

  /// N1 followed by N2, in index order within each block.
  AgentSet live() const {
    AgentSet out;
    out.reserve(n1.size() + n2.size());
    std::merge(n1.begin(), n1.end(), n2.begin(), n2.end(), std::back_inserter(out));
    return out;
  }
};

inline bool retains_self(const DelegationMatrix& p, std::size_t i) {
  return p.self_share(i) > tol::kSelfRetention;
}

/// Out-neighbours of every agent: i -> k iff agent i hands k a positive share.
inline std::vector<std::vector<std::size_t>> delegation_graph(const DelegationMatrix& p) {
  const std::size_t n = p.n();
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i && p.share(i, k) > 0.0) out[i].push_back(k);
    }
  }
  return out;
}

inline AgentPartition partition_agents(const DelegationMatrix& p) {
  const std::size_t n = p.n();
  AgentPartition part;
  part.block_of.assign(n, Block::N3);

  // Reverse BFS from N1: j reaches N1 if it hands a positive share to a
  // member already known to reach it.
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (retains_self(p, i)) {
      part.block_of[i] = Block::N1;
      queue.push_back(i);
    }
  }
  std::vector<bool> reached(n, false);
  for (auto i : queue) reached[i] = true;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t target = queue[head];
    for (std::size_t src = 0; src < n; ++src) {
      if (!reached[src] && src != target && p.share(src, target) > 0.0) {
        reached[src] = true;
        part.block_of[src] = Block::N2;
        queue.push_back(src);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    switch (part.block_of[i]) {
      case Block::N1: part.n1.push_back(i); break;
      case Block::N2: part.n2.push_back(i); break;
      case Block::N3: part.n3.push_back(i); break;
    }
  }
  return part;
}

inline AgentSet normalized_set(AgentSet c) {
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

/// No member keeps anything and no member hands anything outside the set.
inline bool is_delegation_cycle(const DelegationMatrix& p, const AgentSet& c_in) {
  if (c_in.empty()) throw Error(ErrorCode::EmptySet, "candidate cycle is empty");
  const AgentSet c = normalized_set(c_in);
  const std::size_t n = p.n();
  std::vector<bool> member(n, false);
  for (auto i : c) {
    if (i >= n) throw Error(ErrorCode::DimensionMismatch, agent_label(i) + " is out of range", i);
    member[i] = true;
  }
  for (auto i : c) {
    if (retains_self(p, i)) return false;
    for (std::size_t j = 0; j < n; ++j) {
      if (!member[j] && p.share(i, j) != 0.0) return false;
    }
  }
  return true;
}

/// Strongly connected components of the delegation graph (iterative Tarjan).
/// Components come out in reverse topological order: sinks first.
inline std::vector<AgentSet> strongly_connected_components(
    const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<AgentSet> comps;
  std::size_t counter = 0;

  struct Frame {
    std::size_t v;
    std::size_t next;
  };
  std::vector<Frame> call;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& fr = call.back();
      if (fr.next < adj[fr.v].size()) {
        const std::size_t w = adj[fr.v][fr.next++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[fr.v] = std::min(low[fr.v], index[w]);
        }
        continue;
      }
      const std::size_t v = fr.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        AgentSet comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
    }
  }
  return comps;
}

/// Closed strongly connected classes in which nobody retains anything.
/// Each one is an irreducible delegation cycle; together with the agents
/// that can only flow into them they make up N3.
inline std::vector<AgentSet> delegation_cycles(const DelegationMatrix& p) {
  const auto adj = delegation_graph(p);
  const auto comps = strongly_connected_components(adj);
  std::vector<std::size_t> comp_of(p.n());
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (auto v : comps[c]) comp_of[v] = c;
  }
  std::vector<AgentSet> cycles;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    bool closed = true;
    bool keeps = false;
    for (auto v : comps[c]) {
      if (retains_self(p, v)) keeps = true;
      for (auto w : adj[v]) {
        if (comp_of[w] != c) closed = false;
      }
    }
    if (closed && !keeps) cycles.push_back(comps[c]);
  }
  std::sort(cycles.begin(), cycles.end());
  return cycles;
}

// ---------------------------------------------------------------------------
// Epsilon augmentation

struct AugmentedMatrix {
  Matrix entries;  ///< (n+1)x(n+1); last index is the absorbing loss agent
  double epsilon = 0.0;

  std::size_t n() const { return static_cast<std::size_t>(entries.rows()) - 1; }
};

inline void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::EpsilonOutOfRange,
                "epsilon must lie in (0, 1), got " + std::to_string(epsilon));
  }
}

inline AugmentedMatrix augment(const DelegationMatrix& p, double epsilon) {
  require_epsilon(epsilon);
  const auto n = static_cast<Eigen::Index>(p.n());
  AugmentedMatrix a;
  a.epsilon = epsilon;
  a.entries = Matrix::Zero(n + 1, n + 1);
  a.entries.topLeftCorner(n, n) = (1.0 - epsilon) * p.matrix();
  a.entries.row(n).head(n).setConstant(epsilon);
  a.entries(n, n) = 1.0;
  return a;
}

// ---------------------------------------------------------------------------
// Weight sources and power vectors

/// Inherent voting weight per agent plus the loss slot: length n+1.
using WeightSource = Vector;

/// (1, ..., 1, 0): one vote per agent, nothing injected at the loss agent.
inline WeightSource default_source(std::size_t n) {
  WeightSource f = WeightSource::Ones(static_cast<Eigen::Index>(n + 1));
  f(static_cast<Eigen::Index>(n)) = 0.0;
  return f;
}

/// Standard basis source: only `agent` injects one unit.
inline WeightSource unit_source(std::size_t n, std::size_t agent) {
  WeightSource f = WeightSource::Zero(static_cast<Eigen::Index>(n + 1));
  f(static_cast<Eigen::Index>(agent)) = 1.0;
  return f;
}

inline void require_source_length(const WeightSource& f, std::size_t n) {
  if (static_cast<std::size_t>(f.size()) != n + 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "weight source has length " + std::to_string(f.size()) + ", expected n+1 = " +
                    std::to_string(n + 1));
  }
}

/// Admissible but uninterpreted sources: negative weights or weight
/// injected directly at the loss agent.
inline std::vector<std::string> source_warnings(const WeightSource& f) {
  std::vector<std::string> out;
  const auto last = f.size() - 1;
  for (Eigen::Index i = 0; i < last; ++i) {
    if (f(i) < 0.0) {
      out.push_back(agent_label(static_cast<std::size_t>(i)) + " has negative inherent weight");
    }
  }
  if (last >= 0 && f(last) != 0.0) out.push_back("loss entry of the source is nonzero");
  return out;
}

struct PowerVector {
  Vector values;  ///< n agents followed by the loss entry

  std::size_t n() const { return static_cast<std::size_t>(values.size()) - 1; }
  double operator[](std::size_t i) const { return values(static_cast<Eigen::Index>(i)); }
  double loss() const { return values(values.size() - 1); }
  double total() const { return values.sum(); }
};

}  // namespace liquid
