#pragma once

// Command-line front end. `run` is the whole program minus main(), so tests
// drive it directly.
//
//   liquid power FILE [--exact | --epsilon E | --series [--tol T --kmax K]]
//                     [--measure v|classic|standard|ms]
//   liquid game dynamics|verify|best-response FILE [--agent I] [--max-iters N]
//                     [--tol T] [--seed S]
//   liquid check SUITE [--n N] [--trials T] [--seed S] [--threads K]
//                     [--replay FILE] [--save-failure FILE]
//   liquid oracle particles|grid|enumerate FILE [...]
//
// Output is one JSON document, or a plain table with --format plain.
// Exit codes: 0 ok, 2 invalid input, 3 numerical failure, 4 check failed.

#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "liquid/checks.hpp"
#include "liquid/delegation.hpp"
#include "liquid/game.hpp"
#include "liquid/instance.hpp"
#include "liquid/measures.hpp"
#include "liquid/oracles.hpp"

namespace liquid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitCheckFailed = 4;

namespace detail {

inline Json vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Json matrix_rows(const DelegationMatrix& p) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < p.n(); ++i) rows.push_back(vec(p.profile_weights(i)));
  return rows;
}

inline Json one_based(const AgentSet& s) {
  Json a = Json::array();
  for (auto i : s) a.push_back(i + 1);
  return a;
}

inline std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

inline std::string row(const Json& a) {
  std::string s;
  for (const auto& x : a) {
    if (!s.empty()) s += " ";
    s += x.is_number() ? num(x.get<double>()) : x.dump();
  }
  return s;
}

/// Plain fallback: one "key: value" line per top-level field.
inline void print_plain(const Json& doc, std::ostream& out) {
  for (const auto& [key, value] : doc.items()) {
    out << std::left << std::setw(16) << key << " ";
    if (value.is_array() && !value.empty() && value[0].is_array()) {
      out << "\n";
      for (const auto& r : value) out << "  " << row(r) << "\n";
      continue;
    }
    if (value.is_array()) {
      out << row(value);
    } else if (value.is_number_float()) {
      out << num(value.get<double>());
    } else if (value.is_string()) {
      out << value.get<std::string>();
    } else {
      out << value.dump();
    }
    out << "\n";
  }
}

inline Json power_doc(const std::string& measure, const std::string& method, const Vector& values,
                      double sum_f) {
  Json doc;
  doc["command"] = "power";
  doc["measure"] = measure;
  doc["method"] = method;
  doc["n"] = values.size() - 1;
  doc["power"] = vec(values);
  doc["loss"] = values(values.size() - 1);
  doc["sum_v"] = values.sum();
  doc["sum_f"] = sum_f;
  return doc;
}

inline Vector with_loss(const Vector& agents, double total) {
  Vector v(agents.size() + 1);
  v.head(agents.size()) = agents;
  v(agents.size()) = total - agents.sum();
  return v;
}

}  // namespace detail

struct PowerArgs {
  std::string file;
  bool exact = false;
  std::optional<double> epsilon;
  bool series = false;
  double tol = 1e-12;
  std::size_t kmax = 100000;
  std::string measure = "v";
};

inline Json cmd_power(const PowerArgs& a) {
  const Instance inst = load_instance(a.file);
  const std::size_t n = inst.n();
  const int modes = (a.exact ? 1 : 0) + (a.epsilon ? 1 : 0) + (a.series ? 1 : 0);
  if (modes > 1) {
    throw Error(ErrorCode::ParameterOutOfRange, "choose one of --exact, --epsilon, --series");
  }

  if (a.measure == "v") {
    const WeightSource f = inst.source();
    MeasureResult r;
    if (a.epsilon) {
      r = power_eps(inst.p, f, *a.epsilon);
    } else if (a.series) {
      r = power_series(inst.p, f.head(static_cast<Eigen::Index>(n)), a.tol, a.kmax);
      r.power.values(static_cast<Eigen::Index>(n)) += f(static_cast<Eigen::Index>(n));
    } else {
      r = power_exact(inst.p, f);
    }
    Json doc = detail::power_doc("v", std::string(to_string(r.method)), r.power.values, f.sum());
    if (a.epsilon) doc["epsilon"] = *a.epsilon;
    doc["residual"] = r.residual;
    doc["k_used"] = r.k_used;
    doc["converged"] = r.converged;
    return doc;
  }
  // The remaining measures are defined for unit inherent weights only.
  const double sum_f = static_cast<double>(n);
  if (a.measure == "classic") {
    return detail::power_doc("classic", "classic", detail::with_loss(classic_power(inst.p), sum_f),
                             sum_f);
  }
  if (a.measure == "ms") {
    return detail::power_doc("ms", "mixed-strategy",
                             detail::with_loss(mixed_strategy_power(inst.p), sum_f), sum_f);
  }
  if (a.measure == "standard") {
    const auto r = standard_generalization(inst.p, a.kmax, a.tol);
    // Not conservative: the loss entry is whatever the tally fails to place.
    Json doc = detail::power_doc("standard", "standard", detail::with_loss(r.values, sum_f), sum_f);
    doc["k_used"] = r.k_used;
    doc["converged"] = r.converged;
    return doc;
  }
  throw Error(ErrorCode::ParameterOutOfRange, "unknown measure '" + a.measure + "'");
}

struct GameArgs {
  std::string action;
  std::string file;
  std::optional<std::size_t> agent;  ///< 1-based, as typed
  std::size_t max_iters = 100;
  double tol = kDefaultRegretTolerance;
  std::uint64_t seed = 1;
};

inline Json regret_json(const RegretReport& r, double tol) {
  Json j;
  j["regrets"] = detail::vec(r.regrets);
  j["max_regret"] = r.max_regret;
  j["tol"] = tol;
  j["is_epsilon_nash"] = r.is_epsilon_nash(tol);
  return j;
}

inline Json cmd_game(const GameArgs& a) {
  const Instance inst = load_instance(a.file);
  if (!inst.prefs) throw Error(ErrorCode::InvalidInstance, "game commands need 'preferences'");
  if (!inst.epsilon) throw Error(ErrorCode::InvalidInstance, "game commands need 'epsilon'");
  const double eps = *inst.epsilon;
  const StrategySpace space = inst.space();

  Json doc;
  doc["command"] = "game " + a.action;
  doc["epsilon"] = eps;
  if (a.action == "dynamics") {
    const Trajectory t = br_dynamics(inst.p, *inst.prefs, eps, space, a.max_iters, a.tol, a.seed);
    doc["seed"] = a.seed;
    doc["status"] = std::string(to_string(t.status));
    doc["rounds"] = t.rounds;
    doc["switches"] = t.steps.size();
    Json order = Json::array();
    for (auto i : t.order) order.push_back(i + 1);
    doc["order"] = std::move(order);
    Json steps = Json::array();
    for (const auto& s : t.steps) {
      steps.push_back({{"round", s.round}, {"agent", s.agent + 1}, {"target", s.target + 1},
                       {"max_regret", s.max_regret}});
    }
    doc["steps"] = std::move(steps);
    doc["final_profile"] = detail::matrix_rows(t.final_profile);
    doc["final_regrets"] = detail::vec(t.final_regrets.regrets);
    doc["max_regret"] = t.final_regrets.max_regret;
    doc["is_epsilon_nash"] = t.final_regrets.is_epsilon_nash(kDefaultRegretTolerance);
    return doc;
  }
  if (a.action == "verify") {
    const RegretReport r = verify_equilibrium(inst.p, *inst.prefs, eps, space);
    const Json report = regret_json(r, a.tol);
    for (const auto& [k, v] : report.items()) doc[k] = v;
    return doc;
  }
  if (a.action == "best-response") {
    if (!a.agent) throw Error(ErrorCode::ParameterOutOfRange, "best-response needs --agent");
    if (*a.agent < 1 || *a.agent > inst.n()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "--agent " + std::to_string(*a.agent) + " is outside 1.." + std::to_string(inst.n()));
    }
    const std::size_t i = *a.agent - 1;
    const BestResponse br = best_response(inst.p, i, inst.prefs->row(i), eps, space);
    doc["agent"] = i + 1;
    doc["argmax_vertices"] = detail::one_based(br.argmax_vertices);
    doc["value"] = br.value;
    doc["current"] = utility(inst.p, i, inst.prefs->row(i), eps);
    return doc;
  }
  throw Error(ErrorCode::ParameterOutOfRange, "unknown game action '" + a.action + "'");
}

struct CheckArgs {
  std::string suite;
  checks::SuiteOptions opt;
  std::string replay;
  std::string save_failure;
};

/// Returns the report document and whether the suite passed.
inline std::pair<Json, bool> cmd_check(const CheckArgs& a) {
  Json doc;
  doc["command"] = "check";
  if (!a.replay.empty()) {
    const checks::CheckInstance c = to_check(load_instance(a.replay));
    const checks::CheckOutcome o = checks::check_instance(c);
    doc["suite"] = c.suite;
    doc["replay"] = a.replay;
    doc["seed"] = c.seed;
    doc["trial"] = c.trial;
    doc["pass"] = o.pass;
    doc["error"] = o.error;
    if (!o.pass) doc["detail"] = o.detail;
    return {doc, o.pass};
  }
  checks::require_suite(a.suite);
  const checks::CheckReport rep = checks::run_suite(a.suite, a.opt);
  doc["suite"] = rep.suite;
  doc["seed"] = rep.seed;
  doc["n_max"] = a.opt.n_max;
  doc["trials"] = rep.trials;
  doc["failures"] = rep.failures;
  doc["worst"] = rep.worst;
  doc["pass"] = rep.passed();
  if (rep.first_failure) {
    const std::string path =
        a.save_failure.empty() ? "failure-" + rep.suite + ".json" : a.save_failure;
    save_instance(from_check(*rep.first_failure), path);
    doc["first_failure_trial"] = rep.first_failure->trial;
    doc["detail"] = rep.failure_detail;
    doc["failure_file"] = path;
  }
  return {doc, rep.passed()};
}

struct OracleArgs {
  std::string action;
  std::string file;
  std::optional<double> epsilon;
  ParticleOptions particles;
  std::optional<std::size_t> agent;
  double step = 0.05;
};

inline Json cmd_oracle(const OracleArgs& a) {
  const Instance inst = load_instance(a.file);
  Json doc;
  doc["command"] = "oracle " + a.action;
  if (a.action == "particles") {
    const auto eps = a.epsilon ? a.epsilon : inst.epsilon;
    if (!eps) throw Error(ErrorCode::ParameterOutOfRange, "particles need --epsilon or 'epsilon'");
    const WeightSource f = inst.source();
    const ParticleEstimate est = particle_estimate(inst.p, f, *eps, a.particles);
    doc["epsilon"] = *eps;
    doc["seed"] = est.seed;
    doc["steps"] = est.steps;
    doc["rates"] = detail::vec(est.rates);
    doc["standard_error"] = detail::vec(est.standard_error);
    doc["reference"] = detail::vec(power_eps(inst.p, f, *eps).power.values);
    doc["sum_v"] = est.rates.sum();
    doc["sum_f"] = f.sum();
    return doc;
  }
  if (a.action == "grid") {
    if (!inst.prefs) throw Error(ErrorCode::InvalidInstance, "grid search needs 'preferences'");
    const auto eps = a.epsilon ? a.epsilon : inst.epsilon;
    if (!eps) throw Error(ErrorCode::ParameterOutOfRange, "grid search needs --epsilon or 'epsilon'");
    if (!a.agent || *a.agent < 1 || *a.agent > inst.n()) {
      throw Error(ErrorCode::ParameterOutOfRange, "grid search needs --agent in 1.." + std::to_string(inst.n()));
    }
    const std::size_t i = *a.agent - 1;
    const GridResult g = grid_best_response(inst.p, i, inst.prefs->row(i), *eps, a.step);
    doc["agent"] = i + 1;
    doc["step"] = a.step;
    doc["points"] = g.points;
    doc["profile"] = detail::vec(g.profile);
    doc["value"] = g.value;
    return doc;
  }
  if (a.action == "enumerate") {
    const auto outcomes = enumerate_pure_support(inst.p);
    Json list = Json::array();
    double total = 0.0;
    for (const auto& o : outcomes) {
      Json t = Json::array();
      for (auto x : o.targets) t.push_back(x + 1);
      list.push_back({{"targets", std::move(t)}, {"probability", o.probability}});
      total += o.probability;
    }
    doc["count"] = outcomes.size();
    doc["outcomes"] = std::move(list);
    doc["sum_p"] = total;
    return doc;
  }
  throw Error(ErrorCode::ParameterOutOfRange, "unknown oracle '" + a.action + "'");
}

// ---------------------------------------------------------------------------

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractional liquid-democracy power measures and delegation games", "liquid"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "json";
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"json", "plain"}))
      ->capture_default_str();

  PowerArgs pa;
  auto* power = app.add_subcommand("power", "Voting power of an instance");
  power->add_option("file", pa.file, "Instance file")->required();
  auto* exact = power->add_flag("--exact", pa.exact, "Exact measure (default)");
  auto* eps = power->add_option("--epsilon", pa.epsilon, "Penalized measure with this epsilon");
  auto* series = power->add_flag("--series", pa.series, "Exact measure by truncated series");
  exact->excludes(eps)->excludes(series);
  eps->excludes(series);
  power->add_option("--tol", pa.tol, "Series / iteration tolerance")->capture_default_str();
  power->add_option("--kmax", pa.kmax, "Series / iteration cap")->capture_default_str();
  power->add_option("--measure", pa.measure, "v, classic, standard or ms")
      ->check(CLI::IsMember({"v", "classic", "standard", "ms"}))
      ->capture_default_str();

  GameArgs ga;
  auto* game = app.add_subcommand("game", "Delegation game on an instance");
  game->add_option("action", ga.action, "dynamics, verify or best-response")
      ->required()
      ->check(CLI::IsMember({"dynamics", "verify", "best-response"}));
  game->add_option("file", ga.file, "Instance file")->required();
  game->add_option("--agent", ga.agent, "Responding agent (1-based)");
  game->add_option("--max-iters", ga.max_iters, "Round cap for dynamics")->capture_default_str();
  game->add_option("--tol", ga.tol, "Improvement / regret tolerance")->capture_default_str();
  game->add_option("--seed", ga.seed, "Seed for the update order")->capture_default_str();

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "Randomized property suite");
  check->add_option("suite", ca.suite, "Suite name");
  check->add_option("--n", ca.opt.n_max, "Largest instance size")->capture_default_str();
  check->add_option("--trials", ca.opt.trials, "Number of instances")->capture_default_str();
  check->add_option("--seed", ca.opt.seed, "Seed")->capture_default_str();
  check->add_option("--threads", ca.opt.threads, "Worker threads")->capture_default_str();
  check->add_option("--replay", ca.replay, "Re-run a saved failing instance");
  check->add_option("--save-failure", ca.save_failure, "Where to write the first failing instance");

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle", "Independent reference computations");
  oracle->add_option("action", oa.action, "particles, grid or enumerate")
      ->required()
      ->check(CLI::IsMember({"particles", "grid", "enumerate"}));
  oracle->add_option("file", oa.file, "Instance file")->required();
  oracle->add_option("--epsilon", oa.epsilon, "Penalty");
  oracle->add_option("--dt", oa.particles.dt, "Particle time step")->capture_default_str();
  oracle->add_option("--t-max", oa.particles.t_max, "Particle horizon")->capture_default_str();
  oracle->add_option("--seed", oa.particles.seed, "Particle seed")->capture_default_str();
  oracle->add_option("--agent", oa.agent, "Agent for grid search (1-based)");
  oracle->add_option("--step", oa.step, "Grid step")->capture_default_str();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  auto emit = [&](const Json& doc) {
    if (format == "plain") {
      detail::print_plain(doc, out);
    } else {
      out << doc.dump(2) << "\n";
    }
  };

  try {
    if (power->parsed()) {
      emit(cmd_power(pa));
    } else if (game->parsed()) {
      emit(cmd_game(ga));
    } else if (check->parsed()) {
      if (ca.suite.empty() && ca.replay.empty()) {
        throw Error(ErrorCode::UnknownSuite, "name a suite or pass --replay");
      }
      auto [doc, ok] = cmd_check(ca);
      emit(doc);
      if (!ok) return kExitCheckFailed;
    } else {
      emit(cmd_oracle(oa));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_numerical(e.code()) ? kExitNumerical : kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace liquid::cli
