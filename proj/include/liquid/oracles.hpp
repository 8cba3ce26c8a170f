#pragma once

// Independent references used to cross-check the measures and the game:
// a particle simulation of the penalized delegation process, brute-force grid
// search over a player's simplex, and exhaustive enumeration of pure
// delegation outcomes.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "liquid/delegation.hpp"
#include "liquid/game.hpp"
#include "liquid/measures.hpp"

namespace liquid {

struct ParticleEstimate {
  Vector rates;           ///< mean consumption rate per agent, loss agent last
  Vector standard_error;  ///< batch-means standard error of each rate
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
};

struct ParticleOptions {
  double dt = 0.01;
  double t_max = 2000.0;
  std::uint64_t seed = 1;
  std::size_t batches = 50;
};

/// Discrete-time particle system on the augmented chain. Per step of length
/// dt, agent i receives a particle with probability dt * f_i; every particle
/// at j triggers an event with probability dt and then jumps to i != j with
/// probability P^eps_ij, is consumed by j with probability P^eps_jj, or
/// leaks to the loss agent with probability eps. Consumption is averaged over
/// the second half of the horizon.
inline ParticleEstimate particle_estimate(const DelegationMatrix& p, const WeightSource& f,
                                          double epsilon, const ParticleOptions& opt) {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::ParameterOutOfRange, why); };
  if (!(epsilon > 0.0 && epsilon < 1.0)) bad("epsilon must lie in (0, 1)");
  if (!(opt.dt > 0.0 && opt.dt <= 0.01)) bad("dt must lie in (0, 0.01]");
  if (!(opt.t_max > 0.0)) bad("t_max must be positive");
  if (opt.batches < 2) bad("need at least two batches");
  require_source_length(f, p.n());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (f(i) < 0.0) bad("weight source must be nonnegative");
    if (f(i) * opt.dt > 1.0) bad("dt * f_i exceeds 1 for " + agent_label(static_cast<std::size_t>(i)));
  }
  const auto steps = static_cast<std::uint64_t>(std::llround(opt.t_max / opt.dt));
  const std::uint64_t burn = steps / 2;
  const std::uint64_t window = steps - burn;
  if (window < opt.batches) bad("horizon too short for the requested batches");

  const std::size_t n = p.n();
  const std::size_t loss = n;
  const Matrix pe = augment(p, epsilon).entries;

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::discrete_distribution<std::size_t>> jump;
  jump.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vector col = pe.col(static_cast<Eigen::Index>(j));
    jump.emplace_back(col.data(), col.data() + col.size());
  }

  std::vector<std::uint64_t> occupancy(n, 0);
  std::vector<std::int64_t> delta(n, 0);
  std::vector<std::vector<double>> batch_counts(opt.batches, std::vector<double>(n + 1, 0.0));

  for (std::uint64_t s = 0; s < steps; ++s) {
    const bool record = s >= burn;
    const std::size_t batch =
        record ? static_cast<std::size_t>((s - burn) * opt.batches / window) : 0;
    auto consume = [&](std::size_t who) {
      if (record) batch_counts[batch][who] += 1.0;
    };

    std::fill(delta.begin(), delta.end(), 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (occupancy[j] == 0) continue;
      std::binomial_distribution<std::uint64_t> events(occupancy[j], opt.dt);
      const std::uint64_t m = events(rng);
      for (std::uint64_t e = 0; e < m; ++e) {
        const std::size_t dest = jump[j](rng);
        --delta[j];
        if (dest == j || dest == loss) {
          consume(dest);
        } else {
          ++delta[dest];
        }
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      occupancy[j] = static_cast<std::uint64_t>(static_cast<std::int64_t>(occupancy[j]) + delta[j]);
    }
    for (std::size_t i = 0; i <= n; ++i) {
      const double pr = opt.dt * f(static_cast<Eigen::Index>(i));
      if (pr > 0.0 && unif(rng) < pr) {
        if (i == loss) {
          consume(loss);
        } else {
          ++occupancy[i];
        }
      }
    }
  }

  ParticleEstimate est;
  est.steps = steps;
  est.seed = opt.seed;
  est.rates = Vector::Zero(static_cast<Eigen::Index>(n + 1));
  est.standard_error = Vector::Zero(static_cast<Eigen::Index>(n + 1));
  const auto nb = static_cast<double>(opt.batches);
  for (std::size_t i = 0; i <= n; ++i) {
    std::vector<double> rate(opt.batches);
    for (std::size_t b = 0; b < opt.batches; ++b) {
      const std::uint64_t lo = (b * window + opt.batches - 1) / opt.batches;
      const std::uint64_t hi = ((b + 1) * window + opt.batches - 1) / opt.batches;
      rate[b] = batch_counts[b][i] / (static_cast<double>(hi - lo) * opt.dt);
    }
    double total = 0.0;
    for (std::size_t b = 0; b < opt.batches; ++b) total += batch_counts[b][i];
    const double mean = total / (static_cast<double>(window) * opt.dt);
    double ss = 0.0;
    for (double r : rate) ss += (r - mean) * (r - mean);
    est.rates(static_cast<Eigen::Index>(i)) = mean;
    est.standard_error(static_cast<Eigen::Index>(i)) = std::sqrt(ss / (nb - 1.0) / nb);
  }
  return est;
}

// ---------------------------------------------------------------------------

struct GridResult {
  Vector profile;  ///< best grid point
  double value = 0.0;
  std::size_t points = 0;
};

inline constexpr std::size_t kMaxGridAgents = 5;

/// Evaluates the agent's utility at every point of its simplex whose
/// coordinates are multiples of `step` and returns the best one.
inline GridResult grid_best_response(const DelegationMatrix& profile, std::size_t agent,
                                     const Vector& w_i, double epsilon, double step) {
  require_epsilon(epsilon);
  const std::size_t n = profile.n();
  if (n > kMaxGridAgents) {
    throw Error(ErrorCode::GridTooLarge,
                "grid search is limited to n <= " + std::to_string(kMaxGridAgents));
  }
  const double inv = 1.0 / step;
  const auto m = static_cast<int>(std::lround(inv));
  if (!(step > 0.0) || m < 1 || std::abs(m * step - 1.0) > 1e-9) {
    throw Error(ErrorCode::ParameterOutOfRange, "grid step must divide 1");
  }
  if (m > 20) throw Error(ErrorCode::GridTooLarge, "grid step finer than 0.05");

  GridResult best;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<int> units(n, 0);
  auto visit = [&]() {
    Vector x(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) x(static_cast<Eigen::Index>(j)) = units[j] * step;
    x /= x.sum();
    const auto trial = profile.with_profile(agent, validate_profile(x, agent));
    const double u = utility(trial, agent, w_i, epsilon);
    ++best.points;
    if (u > best.value) {
      best.value = u;
      best.profile = x;
    }
  };
  // compositions of m into n nonnegative parts
  auto rec = [&](auto& self, std::size_t pos, int left) -> void {
    if (pos + 1 == n) {
      units[pos] = left;
      visit();
      return;
    }
    for (int u = left; u >= 0; --u) {
      units[pos] = u;
      self(self, pos + 1, left - u);
    }
  };
  rec(rec, 0, m);
  return best;
}

// ---------------------------------------------------------------------------

struct PureOutcome {
  std::vector<std::size_t> targets;  ///< chosen proxy per agent
  DelegationMatrix matrix = DelegationMatrix::identity(1);
  double probability = 0.0;
};

/// Every pure delegation in the product of the agents' supports, with its
/// probability under independent sampling from the profiles. Order:
/// lexicographic in the choice vector, last agent fastest.
inline std::vector<PureOutcome> enumerate_pure_support(const DelegationMatrix& p) {
  const std::size_t n = p.n();
  const auto supp = supports(p);
  const std::uint64_t count = count_pure_outcomes(supp);

  std::vector<PureOutcome> out;
  out.reserve(count);
  std::vector<std::size_t> pick(n, 0);
  for (std::uint64_t c = 0; c < count; ++c) {
    std::uint64_t rest = c;
    for (std::size_t pos = n; pos-- > 0;) {
      pick[pos] = static_cast<std::size_t>(rest % supp[pos].size());
      rest /= supp[pos].size();
    }
    PureOutcome o;
    o.targets.resize(n);
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    o.probability = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      o.targets[i] = supp[i][pick[i]];
      o.probability *= p.share(i, o.targets[i]);
      a(static_cast<Eigen::Index>(o.targets[i]), static_cast<Eigen::Index>(i)) = 1.0;
    }
    o.matrix = DelegationMatrix::from_columns(a);
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace liquid
