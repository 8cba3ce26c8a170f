#include <gtest/gtest.h>

#include <filesystem>

#include "liquid/instance.hpp"
#include "liquid/random_instances.hpp"

using namespace liquid;

namespace {

std::string fixture(const std::string& name) { return std::string(LIQUID_DATA_DIR) + "/" + name; }

void expect_same(const Instance& a, const Instance& b) {
  EXPECT_EQ(a.p.matrix(), b.p.matrix());
  EXPECT_EQ(a.f.has_value(), b.f.has_value());
  if (a.f && b.f) EXPECT_EQ(*a.f, *b.f);
  EXPECT_EQ(a.prefs.has_value(), b.prefs.has_value());
  if (a.prefs && b.prefs) EXPECT_EQ(a.prefs->w, b.prefs->w);
  EXPECT_EQ(a.epsilon, b.epsilon);
  EXPECT_EQ(a.neighborhoods, b.neighborhoods);
}

ErrorCode load_error(const std::string& text) {
  try {
    parse_instance(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for " << text;
  return ErrorCode::EmptySet;
}

}  // namespace

TEST(Instance, RowsBecomeColumns) {
  const auto inst = load_instance(fixture("two_agent.json"));
  EXPECT_DOUBLE_EQ(inst.p.matrix()(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(inst.p.matrix()(0, 1), 0.0);
  EXPECT_EQ(inst.source(), default_source(2));
}

TEST(Instance, FixturesRoundTrip) {
  for (const auto& entry : std::filesystem::directory_iterator(LIQUID_DATA_DIR)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("malformed", 0) == 0) continue;
    const Instance a = load_instance(entry.path().string());
    const std::string text = serialize_instance(a);
    const Instance b = parse_instance(text);
    expect_same(a, b);
    EXPECT_EQ(serialize_instance(b), text) << name;
  }
}

TEST(Instance, RandomRoundTripIsBitExact) {
  for (std::uint64_t t = 0; t < 100; ++t) {
    auto rng = gen::trial_rng(61, t);
    const std::size_t n = gen::uniform_index(rng, 1, 9);
    Instance a;
    a.p = gen::random_matrix(rng, n);
    a.f = gen::random_source(rng, n, true);
    a.prefs = gen::random_preferences(rng, n);
    a.epsilon = gen::uniform(rng, 0.01, 0.9);
    const Instance b = parse_instance(serialize_instance(a));
    expect_same(a, b);
  }
}

TEST(Instance, NeighborhoodsAndReplayAreOneBased) {
  const auto inst = load_instance(fixture("restricted_game.json"));
  ASSERT_TRUE(inst.neighborhoods.has_value());
  EXPECT_EQ((*inst.neighborhoods)[0], (AgentSet{0, 1}));
  const auto text = R"({"n": 3, "profiles": [[0,1,0],[0,1,0],[0,0,1]],
    "replay": {"suite": "delegation", "k": 1, "D": [2], "seed": 4, "trial": 2}})";
  const auto c = to_check(parse_instance(std::string(text)));
  EXPECT_EQ(c.k, 0u);
  EXPECT_EQ(c.d, AgentSet{1});
  EXPECT_EQ(c.trial, 2u);
}

TEST(Instance, CheckInstanceRoundTrip) {
  for (auto s : checks::kSuites) {
    const auto c = checks::make_instance(s, 6, 3, 1);
    const auto back = to_check(parse_instance(serialize_instance(from_check(c))));
    EXPECT_EQ(back.p, c.p);
    EXPECT_EQ(back.f, c.f);
    EXPECT_EQ(back.k, c.k);
    EXPECT_EQ(back.d, c.d);
    EXPECT_EQ(back.agent, c.agent);
    EXPECT_EQ(back.epsilon, c.epsilon);
    EXPECT_EQ(checks::check_instance(back).pass, checks::check_instance(c).pass);
  }
}

TEST(Instance, Malformed) {
  try {
    load_instance(fixture("malformed_column_sum.json"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotNormalized);
    EXPECT_EQ(e.agent(), 1u);
    EXPECT_NE(std::string(e.what()).find("agent 2"), std::string::npos);
  }
  EXPECT_EQ(load_error("{"), ErrorCode::InvalidInstance);
  EXPECT_EQ(load_error(R"({"profiles": [[1]]})"), ErrorCode::InvalidInstance);
  EXPECT_EQ(load_error(R"({"n": 2, "profiles": [[1, 0]]})"), ErrorCode::DimensionMismatch);
  EXPECT_EQ(load_error(R"({"n": 1, "profiles": [[1]], "f": [1]})"), ErrorCode::InvalidInstance);
  EXPECT_EQ(load_error(R"({"n": 1, "profiles": [[1]], "epsilon": 0})"), ErrorCode::EpsilonOutOfRange);
  EXPECT_EQ(load_error(R"({"n": 2, "profiles": [[1, 0], [0, 1]], "neighborhoods": [[1], []]})"),
            ErrorCode::EmptyNeighborhood);
  EXPECT_EQ(load_error(R"({"n": 2, "profiles": [[1, 0], [0, 1]], "neighborhoods": [[1], [3]]})"),
            ErrorCode::InvalidInstance);
  EXPECT_THROW(load_instance("/nonexistent/instance.json"), Error);
}
