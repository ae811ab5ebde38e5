#include "dlom/session.hpp"

#include <numeric>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace dlom {
namespace {

using S = SessionState;

struct MemoryStore {
  std::vector<ModelRecord> models;

  std::vector<ModelRecord> list_models() const { return models; }
  std::string add_model(const ModelRecord& r) {
    if (contains(r.id)) throw Error(ErrorKind::kConflict, "duplicate " + r.id);
    models.push_back(r);
    return r.id;
  }
  bool contains(std::string_view id) const {
    return std::any_of(models.begin(), models.end(),
                       [&](const ModelRecord& m) { return m.id == id; });
  }
};

static_assert(ModelStore<MemoryStore>);

event::SubmitCriteria medical() {
  return {query::parse_query(testing::kMedicalQuery)};
}

DssSession queried(MemoryStore& store) {
  DssSession s;
  s.id = "s1";
  s = advance_session(s, medical(), store);
  return advance_session(s, event::RunQuery{}, store);
}

TEST(SessionTest, HappyPathToChoose) {
  MemoryStore store{testing::acceptance_fixture()};
  DssSession s;
  s.id = "s1";
  s = advance_session(s, medical(), store);
  EXPECT_EQ(s.state, S::kCriteriaCollected);
  s = advance_session(s, event::RunQuery{}, store);
  EXPECT_EQ(s.state, S::kQueried);
  EXPECT_EQ(s.candidates, (std::vector<std::string>{"med-a", "med-b", "med-c"}));
  s = advance_session(s, event::SubmitComparisons{testing::example_comparisons()}, store);
  EXPECT_EQ(s.state, S::kElicited);
  ASSERT_TRUE(s.weights.has_value());
  EXPECT_NEAR(std::accumulate(s.weights->values().begin(), s.weights->values().end(), 0.0), 1.0, 1e-12);
  EXPECT_TRUE(s.ranking.empty());
  s = advance_session(s, event::Rank{}, store);
  EXPECT_EQ(s.state, S::kRanked);
  ASSERT_EQ(s.ranking.size(), 3u);
  EXPECT_EQ(s.ranking[0].id, "med-a");

  std::size_t before = store.models.size();
  s = advance_session(s, event::Choose{s.ranking[0].id}, store);
  EXPECT_EQ(s.state, S::kClosed);
  EXPECT_EQ(s.outcome, (SessionOutcome{OutcomeKind::kChosen, "med-a"}));
  EXPECT_EQ(store.models.size(), before);
}

TEST(SessionTest, ChooseInCreatedIsProtocolError) {
  MemoryStore store;
  DssSession s;
  try {
    advance_session(s, event::Choose{"x"}, store);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kProtocol);
    EXPECT_EQ(e.detail()["state"], "Created");
    EXPECT_EQ(e.detail()["event"], "choose");
  }
}

TEST(SessionTest, ChooseUnrankedIdIsInvalid) {
  MemoryStore store{testing::acceptance_fixture()};
  DssSession s = queried(store);
  s = advance_session(s, event::SubmitComparisons{{}}, store);
  s = advance_session(s, event::Rank{}, store);
  try {
    advance_session(s, event::Choose{"retail-a"}, store);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
}

TEST(SessionTest, SingleCandidateSkipsElicitation) {
  MemoryStore store{testing::acceptance_fixture()};
  DssSession s;
  s = advance_session(s, event::SubmitCriteria{query::parse_query(
                             R"(SELECT * WHERE { device.name = "Jetson Nano" })")},
                      store);
  s = advance_session(s, event::RunQuery{}, store);
  EXPECT_EQ(s.state, S::kRanked);
  ASSERT_EQ(s.ranking.size(), 1u);
  EXPECT_EQ(s.ranking[0].id, "retail-a");
  EXPECT_EQ(s.weights->values(), ObjectiveWeights::uniform().values());
}

TEST(SessionTest, NoCandidatesAllowsOnlyBuildNewOrAbandon) {
  MemoryStore store{testing::acceptance_fixture()};
  DssSession s;
  s.id = "empty";
  s = advance_session(s, event::SubmitCriteria{query::parse_query(
                             R"(SELECT * WHERE { model.total_cost < 1 })")},
                      store);
  s = advance_session(s, event::RunQuery{}, store);
  EXPECT_EQ(s.state, S::kQueried);
  EXPECT_THROW(advance_session(s, event::SubmitComparisons{{}}, store), Error);
  EXPECT_THROW(advance_session(s, event::Rank{}, store), Error);
  EXPECT_THROW(advance_session(s, event::Choose{"med-a"}, store), Error);
  EXPECT_EQ(advance_session(s, event::Abandon{}, store).outcome->kind, OutcomeKind::kAbandoned);

  DssSession built = advance_session(s, event::BuildNew{}, store);
  EXPECT_EQ(built.state, S::kClosed);
  EXPECT_EQ(built.outcome, (SessionOutcome{OutcomeKind::kSynthesized, "synth-empty"}));
  ASSERT_TRUE(store.contains("synth-empty"));
  EXPECT_EQ(store.models.back().provenance, Provenance::kSynthesized);

  // A second draft from an identically named session gets a fresh id.
  DssSession again = advance_session(s, event::BuildNew{2}, store);
  EXPECT_EQ(again.outcome->model_id, "synth-empty-2");
}

TEST(SessionTest, ClosedAcceptsNothing) {
  MemoryStore store;
  DssSession s = advance_session(DssSession{}, event::Abandon{}, store);
  EXPECT_THROW(advance_session(s, event::Abandon{}, store), Error);
  EXPECT_THROW(advance_session(s, medical(), store), Error);
}

TEST(SessionTest, InvalidCriteriaAreRejected) {
  MemoryStore store;
  query::Query q{{{"model.nope", query::Op::kEq, std::string("x")}}};
  EXPECT_THROW(advance_session(DssSession{}, event::SubmitCriteria{q}, store), Error);
}

TEST(SessionTest, JsonView) {
  MemoryStore store{testing::acceptance_fixture()};
  Json j = session_to_json(queried(store));
  EXPECT_EQ(j["state"], "Queried");
  EXPECT_EQ(j["candidates"].size(), 3u);
  EXPECT_TRUE(j["weights"].is_null());
  EXPECT_TRUE(j["outcome"].is_null());
}

// Reference transition table, written independently of advance_session.
struct Expected {
  bool legal;
  S next;
};

Expected reference(S st, std::size_t event_index, std::size_t candidates, bool choose_ranked) {
  if (st == S::kClosed) return {false, st};
  switch (event_index) {
    case 0:  // submit_criteria
      return {st == S::kCreated || st == S::kCriteriaCollected, S::kCriteriaCollected};
    case 1:  // run_query
      return {st == S::kCriteriaCollected, candidates == 1 ? S::kRanked : S::kQueried};
    case 2:  // submit_comparisons
      return {(st == S::kQueried && candidates > 0) || st == S::kElicited, S::kElicited};
    case 3:  // rank
      return {st == S::kElicited, S::kRanked};
    case 4:  // choose
      return {st == S::kRanked && choose_ranked, S::kClosed};
    case 5:  // build_new
      return {st == S::kQueried || st == S::kElicited || st == S::kRanked, S::kClosed};
    default:  // abandon
      return {true, S::kClosed};
  }
}

TEST(SessionTest, RandomEventSequencesFollowTheReferenceMachine) {
  testing::RecordGenerator gen(606);
  const std::vector<std::string> queries = {
      std::string(testing::kMedicalQuery),
      R"(SELECT * WHERE { device.name = "Jetson Nano" })",
      R"(SELECT * WHERE { model.total_cost < 1 })",
      "SELECT * WHERE { }"};
  for (int run = 0; run < 500; ++run) {
    MemoryStore store{testing::acceptance_fixture()};
    DssSession s;
    s.id = "r" + std::to_string(run);
    for (int step = 0; step < 12; ++step) {
      std::size_t k = static_cast<std::size_t>(gen.integer(0, 6));
      SessionEvent e;
      switch (k) {
        case 0: e = event::SubmitCriteria{query::parse_query(gen.pick(queries))}; break;
        case 1: e = event::RunQuery{}; break;
        case 2: e = event::SubmitComparisons{testing::example_comparisons()}; break;
        case 3: e = event::Rank{}; break;
        case 4: {
          std::string id = !s.ranking.empty() && gen.coin()
                               ? s.ranking[static_cast<std::size_t>(
                                             gen.integer(0, static_cast<std::int64_t>(s.ranking.size()) - 1))]
                                     .id
                               : "retail-a";
          e = event::Choose{id};
          break;
        }
        case 5: e = event::BuildNew{static_cast<int>(gen.integer(0, 7))}; break;
        default: e = event::Abandon{}; break;
      }
      ASSERT_EQ(e.index(), k);

      bool choose_ranked = false;
      if (const auto* c = std::get_if<event::Choose>(&e))
        choose_ranked = std::any_of(s.ranking.begin(), s.ranking.end(),
                                    [&](const RankedModel& r) { return r.id == c->model_id; });
      std::size_t candidates = s.candidates.size();
      if (k == 1)
        candidates = query::evaluate(s.criteria, store.list_models()).size();
      Expected want = reference(s.state, k, candidates, choose_ranked);

      DssSession before = s;
      try {
        s = advance_session(s, e, store);
        ASSERT_TRUE(want.legal) << state_name(before.state) << " + " << event_name(e);
        ASSERT_EQ(s.state, want.next);
      } catch (const Error& err) {
        ASSERT_FALSE(want.legal) << err.what();
        ASSERT_EQ(s.state, before.state);
      }

      // Structural invariants.
      if (s.state == S::kElicited || s.state == S::kRanked) ASSERT_TRUE(s.weights.has_value());
      if (s.state == S::kRanked) ASSERT_EQ(s.ranking.size(), s.candidates.size());
      if (s.state < S::kRanked) ASSERT_TRUE(s.ranking.empty());
      ASSERT_EQ(s.outcome.has_value(), s.state == S::kClosed);
      if (s.outcome && s.outcome->kind == OutcomeKind::kSynthesized)
        ASSERT_TRUE(store.contains(s.outcome->model_id));
    }
  }
}

}  // namespace
}  // namespace dlom
