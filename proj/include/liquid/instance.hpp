#pragma once

// JSON instance files.
//
//   {
//     "n": 3,
//     "profiles": [[0, 1, 0], [0, 1, 0], [0, 0.5, 0.5]],   // row i = agent i's profile
//     "f": [1, 1, 1, 0],                                   // optional, n+1 entries
//     "preferences": [[...n+1...], ...],                   // optional, n rows
//     "epsilon": 0.1,                                      // optional
//     "neighborhoods": [[1, 2], [2], [2, 3]],              // optional, 1-based
//     "replay": {"suite": "delegation", "k": 1, "D": [2], "agent": 1,
//                "seed": 7, "trial": 3}                    // optional, 1-based
//   }
//
// Profiles are stored agent-major (rows); the engine works with columns.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "liquid/checks.hpp"
#include "liquid/delegation.hpp"
#include "liquid/game.hpp"

namespace liquid {

using Json = nlohmann::ordered_json;

struct ReplayInfo {
  std::string suite;
  std::optional<std::size_t> k;
  AgentSet d;
  std::optional<std::size_t> agent;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
};

struct Instance {
  DelegationMatrix p = DelegationMatrix::identity(1);
  std::optional<WeightSource> f;
  std::optional<PreferenceProfile> prefs;
  std::optional<double> epsilon;
  std::optional<std::vector<AgentSet>> neighborhoods;
  std::optional<ReplayInfo> replay;

  std::size_t n() const { return p.n(); }
  WeightSource source() const { return f ? *f : default_source(n()); }
  StrategySpace space() const {
    return neighborhoods ? StrategySpace::restricted(*neighborhoods) : StrategySpace::full(n());
  }
};

namespace detail {

[[noreturn]] inline void bad_instance(const std::string& why) {
  throw Error(ErrorCode::InvalidInstance, why);
}

inline double number(const Json& j, const std::string& where) {
  if (!j.is_number()) bad_instance(where + " must be a number");
  return j.get<double>();
}

inline std::vector<double> numbers(const Json& j, std::size_t len, const std::string& where) {
  if (!j.is_array()) bad_instance(where + " must be an array");
  if (j.size() != len) {
    bad_instance(where + " must have " + std::to_string(len) + " entries, got " +
                 std::to_string(j.size()));
  }
  std::vector<double> out;
  out.reserve(len);
  for (std::size_t i = 0; i < len; ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::size_t one_based(const Json& j, std::size_t n, const std::string& where) {
  if (!j.is_number_integer()) bad_instance(where + " must be an integer agent index");
  const auto v = j.get<std::int64_t>();
  if (v < 1 || static_cast<std::uint64_t>(v) > n) {
    bad_instance(where + " = " + std::to_string(v) + " is outside 1.." + std::to_string(n));
  }
  return static_cast<std::size_t>(v - 1);
}

inline AgentSet index_set(const Json& j, std::size_t n, const std::string& where) {
  if (!j.is_array()) bad_instance(where + " must be an array of agent indices");
  AgentSet out;
  for (std::size_t t = 0; t < j.size(); ++t) out.push_back(one_based(j[t], n, where));
  return out;
}

inline Json one_based_set(const AgentSet& s) {
  Json a = Json::array();
  for (auto i : s) a.push_back(i + 1);
  return a;
}

}  // namespace detail

inline Instance parse_instance(const Json& doc) {
  using detail::bad_instance;
  if (!doc.is_object()) bad_instance("instance must be a JSON object");
  if (!doc.contains("n") || !doc["n"].is_number_integer() || doc["n"].get<std::int64_t>() < 1) {
    bad_instance("field 'n' must be a positive integer");
  }
  const auto n = static_cast<std::size_t>(doc["n"].get<std::int64_t>());
  if (!doc.contains("profiles") || !doc["profiles"].is_array()) {
    bad_instance("field 'profiles' must be an array of n rows");
  }
  const Json& rows = doc["profiles"];
  if (rows.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "'profiles' has " + std::to_string(rows.size()) + " rows for n = " + std::to_string(n));
  }
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Json& row = rows[i];
    if (!row.is_array() || row.size() != n) {
      throw Error(ErrorCode::DimensionMismatch,
                  agent_label(i) + ": profile must have " + std::to_string(n) + " entries", i);
    }
    for (std::size_t j = 0; j < n; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          detail::number(row[j], agent_label(i) + " profile entry " + std::to_string(j + 1));
    }
  }

  Instance inst;
  inst.p = DelegationMatrix::from_rows(m);

  if (doc.contains("f")) {
    const auto v = detail::numbers(doc["f"], n + 1, "'f'");
    inst.f = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  if (doc.contains("preferences")) {
    const Json& w = doc["preferences"];
    if (!w.is_array() || w.size() != n) bad_instance("'preferences' must have n rows");
    PreferenceProfile prefs;
    prefs.w.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = detail::numbers(w[i], n + 1, "'preferences' row " + std::to_string(i + 1));
      for (std::size_t j = 0; j <= n; ++j) {
        prefs.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[j];
      }
    }
    require_preferences(prefs, n);
    inst.prefs = std::move(prefs);
  }
  if (doc.contains("epsilon")) {
    const double eps = detail::number(doc["epsilon"], "'epsilon'");
    require_epsilon(eps);
    inst.epsilon = eps;
  }
  if (doc.contains("neighborhoods")) {
    const Json& nb = doc["neighborhoods"];
    if (!nb.is_array() || nb.size() != n) bad_instance("'neighborhoods' must have n entries");
    std::vector<AgentSet> sets;
    for (std::size_t i = 0; i < n; ++i) {
      sets.push_back(detail::index_set(nb[i], n, "neighborhood of " + agent_label(i)));
    }
    StrategySpace::restricted(sets);  // validates
    for (auto& s : sets) s = normalized_set(std::move(s));
    inst.neighborhoods = std::move(sets);
  }
  if (doc.contains("replay")) {
    const Json& r = doc["replay"];
    if (!r.is_object() || !r.contains("suite") || !r["suite"].is_string()) {
      bad_instance("'replay' must be an object with a 'suite' name");
    }
    ReplayInfo info;
    info.suite = r["suite"].get<std::string>();
    if (r.contains("k")) info.k = detail::one_based(r["k"], n, "replay 'k'");
    if (r.contains("D")) info.d = normalized_set(detail::index_set(r["D"], n, "replay 'D'"));
    if (r.contains("agent")) info.agent = detail::one_based(r["agent"], n, "replay 'agent'");
    if (r.contains("seed")) info.seed = r["seed"].get<std::uint64_t>();
    if (r.contains("trial")) info.trial = r["trial"].get<std::uint64_t>();
    inst.replay = std::move(info);
  }
  return inst;
}

inline Instance parse_instance(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    detail::bad_instance(std::string("malformed JSON: ") + e.what());
  }
  return parse_instance(doc);
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::bad_instance("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

inline Json to_json(const Instance& inst) {
  const std::size_t n = inst.n();
  Json doc;
  doc["n"] = n;
  Json rows = Json::array();
  for (std::size_t i = 0; i < n; ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < n; ++j) row.push_back(inst.p.share(i, j));
    rows.push_back(std::move(row));
  }
  doc["profiles"] = std::move(rows);
  if (inst.f) doc["f"] = std::vector<double>(inst.f->data(), inst.f->data() + inst.f->size());
  if (inst.prefs) {
    Json w = Json::array();
    for (std::size_t i = 0; i < n; ++i) {
      const Vector r = inst.prefs->row(i);
      w.push_back(std::vector<double>(r.data(), r.data() + r.size()));
    }
    doc["preferences"] = std::move(w);
  }
  if (inst.epsilon) doc["epsilon"] = *inst.epsilon;
  if (inst.neighborhoods) {
    Json nb = Json::array();
    for (const auto& s : *inst.neighborhoods) nb.push_back(detail::one_based_set(s));
    doc["neighborhoods"] = std::move(nb);
  }
  if (inst.replay) {
    const ReplayInfo& r = *inst.replay;
    Json j;
    j["suite"] = r.suite;
    if (r.k) j["k"] = *r.k + 1;
    if (!r.d.empty()) j["D"] = detail::one_based_set(r.d);
    if (r.agent) j["agent"] = *r.agent + 1;
    j["seed"] = r.seed;
    j["trial"] = r.trial;
    doc["replay"] = std::move(j);
  }
  return doc;
}

inline std::string serialize_instance(const Instance& inst) { return to_json(inst).dump(2) + "\n"; }

inline void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) detail::bad_instance("cannot write '" + path + "'");
  out << serialize_instance(inst);
}

// ---------------------------------------------------------------------------
// Check-suite instances

inline Instance from_check(const checks::CheckInstance& c) {
  Instance inst;
  inst.p = c.p;
  inst.f = c.f;
  inst.prefs = c.prefs;
  inst.epsilon = c.epsilon;
  inst.replay = ReplayInfo{c.suite, c.k, c.d, c.agent, c.seed, c.trial};
  return inst;
}

inline checks::CheckInstance to_check(const Instance& inst) {
  if (!inst.replay) detail::bad_instance("instance has no 'replay' section");
  const ReplayInfo& r = *inst.replay;
  checks::require_suite(r.suite);
  checks::CheckInstance c;
  c.suite = r.suite;
  c.p = inst.p;
  c.f = inst.source();
  c.k = r.k;
  c.d = r.d;
  c.agent = r.agent;
  c.prefs = inst.prefs;
  c.epsilon = inst.epsilon;
  c.seed = r.seed;
  c.trial = r.trial;
  const bool delegation = c.suite == "delegation" || c.suite == "delta-delegation";
  if (delegation && (!c.k || c.d.empty())) detail::bad_instance("replay needs 'k' and 'D'");
  if (c.suite == "game-vertex" && (!c.agent || !c.prefs || !c.epsilon)) {
    detail::bad_instance("game-vertex replay needs 'agent', 'preferences' and 'epsilon'");
  }
  return c;
}

}  // namespace liquid
