#pragma once

// Decision-support session: criteria -> query -> elicitation -> ranking ->
// choose an existing model or build a new one.
//
//   Created --submit_criteria--> CriteriaCollected --run_query--> Queried
//   Queried --submit_comparisons--> Elicited --rank--> Ranked
//   Ranked --choose | build_new--> Closed
//   Queried | Elicited --build_new--> Closed
//   any open state --abandon--> Closed
//
// run_query with exactly one candidate goes straight to Ranked under uniform
// weights. With zero candidates only build_new and abandon are accepted.

#include <concepts>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "dlom/decision.hpp"
#include "dlom/error.hpp"
#include "dlom/query.hpp"
#include "dlom/schema.hpp"
#include "dlom/synthesis.hpp"

namespace dlom {

enum class SessionState { kCreated, kCriteriaCollected, kQueried, kElicited, kRanked, kClosed };

inline std::string_view state_name(SessionState s) {
  switch (s) {
    case SessionState::kCreated: return "Created";
    case SessionState::kCriteriaCollected: return "CriteriaCollected";
    case SessionState::kQueried: return "Queried";
    case SessionState::kElicited: return "Elicited";
    case SessionState::kRanked: return "Ranked";
    case SessionState::kClosed: return "Closed";
  }
  return "?";
}

enum class OutcomeKind { kChosen, kSynthesized, kAbandoned };

inline std::string_view outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::kChosen: return "chosen";
    case OutcomeKind::kSynthesized: return "synthesized";
    case OutcomeKind::kAbandoned: return "abandoned";
  }
  return "?";
}

struct SessionOutcome {
  OutcomeKind kind = OutcomeKind::kAbandoned;
  std::string model_id;  // empty when abandoned

  friend bool operator==(const SessionOutcome&, const SessionOutcome&) = default;
};

struct DssSession {
  std::string id;
  SessionState state = SessionState::kCreated;
  query::Query criteria;
  std::vector<std::string> candidates;
  std::optional<ObjectiveWeights> weights;
  std::vector<PairwiseComparison> comparisons;
  std::vector<RankedModel> ranking;
  std::optional<SessionOutcome> outcome;
};

namespace event {

struct SubmitCriteria {
  query::Query criteria;
};
struct RunQuery {};
struct SubmitComparisons {
  std::vector<PairwiseComparison> comparisons;
};
struct Rank {};
struct Choose {
  std::string model_id;
};
struct BuildNew {
  std::optional<int> max_methods;
};
struct Abandon {};

}  // namespace event

using SessionEvent = std::variant<event::SubmitCriteria, event::RunQuery,
                                  event::SubmitComparisons, event::Rank, event::Choose,
                                  event::BuildNew, event::Abandon>;

inline std::string_view event_name(const SessionEvent& e) {
  static constexpr std::string_view kNames[] = {
      "submit_criteria", "run_query", "submit_comparisons", "rank", "choose", "build_new",
      "abandon"};
  return kNames[e.index()];
}

// Anything the session can read candidates from and persist drafts into.
template <typename S>
concept ModelStore = requires(S& s, const ModelRecord& r, std::string_view id) {
  { s.list_models() } -> std::convertible_to<std::vector<ModelRecord>>;
  { s.add_model(r) } -> std::convertible_to<std::string>;
  { s.contains(id) } -> std::convertible_to<bool>;
};

namespace detail {

[[noreturn]] inline void protocol_error(const DssSession& s, const SessionEvent& e) {
  throw Error(ErrorKind::kProtocol,
              "event '" + std::string(event_name(e)) + "' is not allowed in state " +
                  std::string(state_name(s.state)),
              Json{{"state", state_name(s.state)}, {"event", event_name(e)}});
}

template <ModelStore Store>
std::vector<ModelRecord> candidate_records(const DssSession& s, Store& store) {
  std::set<std::string> wanted(s.candidates.begin(), s.candidates.end());
  std::vector<ModelRecord> out;
  for (ModelRecord& m : store.list_models())
    if (wanted.contains(m.id)) out.push_back(std::move(m));
  return out;
}

template <ModelStore Store>
void rank_into(DssSession& s, Store& store) {
  std::vector<ModelRecord> models = candidate_records(s, store);
  s.ranking = rank_models(s.weights.value_or(ObjectiveWeights::uniform()), models);
  s.state = SessionState::kRanked;
}

template <ModelStore Store>
std::string unique_draft_id(const DssSession& s, Store& store) {
  std::string base = "synth-" + s.id;
  std::string id = base;
  for (int n = 2; store.contains(id); ++n) id = base + "-" + std::to_string(n);
  return id;
}

}  // namespace detail

// Applies one event. Throws kProtocol for events illegal in the current
// state; the input session is never modified.
template <ModelStore Store>
DssSession advance_session(DssSession s, const SessionEvent& e, Store& store) {
  const SessionState st = s.state;
  if (st == SessionState::kClosed) detail::protocol_error(s, e);

  if (std::holds_alternative<event::Abandon>(e)) {
    s.state = SessionState::kClosed;
    s.outcome = SessionOutcome{OutcomeKind::kAbandoned, {}};
    return s;
  }

  if (const auto* ev = std::get_if<event::SubmitCriteria>(&e)) {
    if (st != SessionState::kCreated && st != SessionState::kCriteriaCollected)
      detail::protocol_error(s, e);
    for (const query::Condition& c : ev->criteria.conditions) query::check_condition(c);
    s.criteria = ev->criteria;
    s.state = SessionState::kCriteriaCollected;
    return s;
  }

  if (std::holds_alternative<event::RunQuery>(e)) {
    if (st != SessionState::kCriteriaCollected) detail::protocol_error(s, e);
    std::vector<ModelRecord> all = store.list_models();
    s.candidates.clear();
    for (const ModelRecord& m : query::evaluate(s.criteria, all)) s.candidates.push_back(m.id);
    s.state = SessionState::kQueried;
    if (s.candidates.size() == 1) {
      s.weights = ObjectiveWeights::uniform();
      detail::rank_into(s, store);
    }
    return s;
  }

  if (const auto* ev = std::get_if<event::SubmitComparisons>(&e)) {
    bool queried_with_choice = st == SessionState::kQueried && !s.candidates.empty();
    if (!queried_with_choice && st != SessionState::kElicited) detail::protocol_error(s, e);
    s.comparisons = ev->comparisons;
    s.weights = derive_weights(ev->comparisons);
    s.state = SessionState::kElicited;
    return s;
  }

  if (std::holds_alternative<event::Rank>(e)) {
    if (st != SessionState::kElicited) detail::protocol_error(s, e);
    detail::rank_into(s, store);
    return s;
  }

  if (const auto* ev = std::get_if<event::Choose>(&e)) {
    if (st != SessionState::kRanked) detail::protocol_error(s, e);
    bool ranked = std::any_of(s.ranking.begin(), s.ranking.end(),
                              [&](const RankedModel& r) { return r.id == ev->model_id; });
    if (!ranked)
      throw Error(ErrorKind::kInvalidInput,
                  "model '" + ev->model_id + "' is not among the ranked candidates",
                  Json{{"model_id", ev->model_id}});
    s.state = SessionState::kClosed;
    s.outcome = SessionOutcome{OutcomeKind::kChosen, ev->model_id};
    return s;
  }

  if (const auto* ev = std::get_if<event::BuildNew>(&e)) {
    if (st != SessionState::kQueried && st != SessionState::kElicited &&
        st != SessionState::kRanked)
      detail::protocol_error(s, e);
    ObjectiveWeights w = s.weights.value_or(ObjectiveWeights::uniform());
    SynthesisResult result = synthesize(w, ev->max_methods);
    ModelRecord draft = draft_model(result, s.criteria, w, detail::unique_draft_id(s, store));
    std::string stored = store.add_model(draft);
    s.state = SessionState::kClosed;
    s.outcome = SessionOutcome{OutcomeKind::kSynthesized, stored};
    return s;
  }

  detail::protocol_error(s, e);
}

inline Json session_to_json(const DssSession& s) {
  Json ranking = Json::array();
  for (const RankedModel& r : s.ranking) ranking.push_back(ranked_to_json(r));
  Json comparisons = Json::array();
  for (const PairwiseComparison& c : s.comparisons) comparisons.push_back(comparison_to_json(c));
  Json out{{"id", s.id},
           {"state", state_name(s.state)},
           {"criteria", query::print_query(s.criteria)},
           {"candidates", s.candidates},
           {"weights", s.weights ? weights_to_json(*s.weights) : Json(nullptr)},
           {"comparisons", comparisons},
           {"ranking", ranking}};
  if (s.outcome)
    out["outcome"] = Json{{"kind", outcome_name(s.outcome->kind)},
                          {"model_id", s.outcome->model_id}};
  else
    out["outcome"] = nullptr;
  return out;
}

}  // namespace dlom
