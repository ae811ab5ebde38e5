#pragma once

// Candidate optimization plans from the method/objective effect matrix.
//
// Each method raises (+1), lowers (-1) or leaves unchanged (0) each
// objective. Effects of a method set are summed, and the set maximizing the
// weighted net effect is found by exhaustive search over all 2^7 subsets.

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dlom/error.hpp"
#include "dlom/query.hpp"
#include "dlom/record_json.hpp"
#include "dlom/schema.hpp"

namespace dlom {

using EffectVector = std::array<int, kNumObjectives>;

// Rows in OptimizationMethod order, columns in Objective order
// (Performance, Reliability, Security, Cost, Latency, Complexity). Cost,
// Latency and Complexity columns record reductions, which raise those
// (reverse-scaled) scores; Security holds the privacy effect.
using EffectMatrix = std::array<EffectVector, kNumEffectMethods>;

inline constexpr EffectMatrix kEffectMatrix = {{
    // Prf Rel Sec Cst Lat Cmp
    {+1, +1, 0, +1, -1, +1},   // Pruning
    {-1, +1, 0, +1, -1, +1},   // KnowledgeDistillation
    {-1, -1, 0, +1, +1, +1},   // Quantization
    {+1, +1, +1, -1, -1, -1},  // FogComputing
    {+1, +1, +1, -1, -1, -1},  // ShieldedExecution
    {-1, -1, 0, +1, +1, +1},   // TensorDecomposition
    {+1, +1, 0, -1, +1, -1},   // HardwareOptimization
}};

inline int effect(OptimizationMethod m, Objective o) {
  if (m == OptimizationMethod::kFineTuning)
    throw Error(ErrorKind::kUnsupportedMethod, "FineTuning has no effect-matrix row");
  return kEffectMatrix[static_cast<std::size_t>(m)][index(o)];
}

// Column headers of the shipped CSV, mapped onto objectives.
inline constexpr std::array<std::pair<std::string_view, Objective>, kNumObjectives>
    kEffectCsvColumns = {{{"performance", Objective::kPerformance},
                          {"latency_reduction", Objective::kLatency},
                          {"cost_reduction", Objective::kCost},
                          {"complexity_reduction", Objective::kComplexity},
                          {"reliability", Objective::kReliability},
                          {"privacy", Objective::kSecurity}}};

// Reads the effect-matrix CSV: header `method,<six columns>` followed by
// seven rows of +1/-1/0. Columns may appear in any order.
inline EffectMatrix load_effect_matrix(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back())))
        cell.pop_back();
      while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.front())))
        cell.erase(cell.begin());
      cells.push_back(cell);
    }
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kInvalidInput, "effect CSV is empty");
  std::vector<std::string> header = split(line);
  if (header.size() != kNumObjectives + 1 || !detail::iequals(header[0], "method"))
    throw Error(ErrorKind::kInvalidInput, "effect CSV header must be method + 6 columns");
  std::array<Objective, kNumObjectives> column_objective{};
  for (std::size_t c = 1; c < header.size(); ++c) {
    auto it = std::find_if(kEffectCsvColumns.begin(), kEffectCsvColumns.end(),
                           [&](const auto& p) { return detail::iequals(p.first, header[c]); });
    if (it == kEffectCsvColumns.end())
      throw Error(ErrorKind::kInvalidInput, "unknown effect CSV column '" + header[c] + "'");
    column_objective[c - 1] = it->second;
  }

  EffectMatrix m{};
  std::set<OptimizationMethod> seen;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> cells = split(line);
    if (cells.size() != kNumObjectives + 1)
      throw Error(ErrorKind::kInvalidInput, "effect CSV row must have 7 cells: " + line);
    auto method = parse_method(cells[0]);
    if (!method || *method == OptimizationMethod::kFineTuning || !seen.insert(*method).second)
      throw Error(ErrorKind::kInvalidInput, "bad or repeated method '" + cells[0] + "'");
    for (std::size_t c = 1; c < cells.size(); ++c) {
      int v = 0;
      if (cells[c] == "+1" || cells[c] == "1" || cells[c] == "+") v = 1;
      else if (cells[c] == "-1" || cells[c] == "-") v = -1;
      else if (cells[c] == "0") v = 0;
      else throw Error(ErrorKind::kInvalidInput, "bad effect cell '" + cells[c] + "'");
      m[static_cast<std::size_t>(*method)][index(column_objective[c - 1])] = v;
    }
  }
  if (seen.size() != kNumEffectMethods)
    throw Error(ErrorKind::kInvalidInput, "effect CSV must list all seven methods");
  return m;
}

inline Json effect_matrix_to_json(const EffectMatrix& m = kEffectMatrix) {
  Json out = Json::array();
  for (std::size_t r = 0; r < kNumEffectMethods; ++r) {
    Json effects = Json::object();
    for (Objective o : kAllObjectives) effects[std::string(objective_name(o))] = m[r][index(o)];
    out.push_back(Json{{"method", method_name(static_cast<OptimizationMethod>(r))},
                       {"effects", effects}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prediction and search
// ---------------------------------------------------------------------------

inline EffectVector predict_effect(const std::set<OptimizationMethod>& methods) {
  EffectVector net{};
  for (OptimizationMethod m : methods)
    for (Objective o : kAllObjectives) net[index(o)] += effect(m, o);
  return net;
}

inline double weighted_effect(const ObjectiveWeights& w, const EffectVector& net) {
  double s = 0.0;
  for (Objective o : kAllObjectives) s += w[o] * net[index(o)];
  return s;
}

struct SynthesisResult {
  std::set<OptimizationMethod> methods;
  EffectVector net_effect{};
  double weighted_score = 0.0;
};

namespace detail {

inline std::vector<std::string_view> sorted_names(const std::set<OptimizationMethod>& s) {
  std::vector<std::string_view> names;
  for (OptimizationMethod m : s) names.push_back(method_name(m));
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace detail

// Best method subset for `weights`, with at most `max_methods` members.
// Ties (within 1e-12) prefer fewer methods, then the lexicographically
// smaller sorted list of method names.
inline SynthesisResult synthesize(const ObjectiveWeights& weights,
                                  std::optional<int> max_methods = std::nullopt) {
  if (max_methods && (*max_methods < 0 || *max_methods > static_cast<int>(kNumEffectMethods)))
    throw Error(ErrorKind::kInvalidInput, "max_methods must be in [0, 7]");
  constexpr double kTieTolerance = 1e-12;
  const unsigned limit = max_methods ? static_cast<unsigned>(*max_methods) : kNumEffectMethods;

  std::optional<SynthesisResult> best;
  for (unsigned mask = 0; mask < (1u << kNumEffectMethods); ++mask) {
    if (static_cast<unsigned>(std::popcount(mask)) > limit) continue;
    SynthesisResult cand;
    for (std::size_t i = 0; i < kNumEffectMethods; ++i)
      if (mask & (1u << i)) cand.methods.insert(static_cast<OptimizationMethod>(i));
    cand.net_effect = predict_effect(cand.methods);
    cand.weighted_score = weighted_effect(weights, cand.net_effect);

    bool take = false;
    if (!best || cand.weighted_score > best->weighted_score + kTieTolerance) {
      take = true;
    } else if (std::abs(cand.weighted_score - best->weighted_score) <= kTieTolerance) {
      if (cand.methods.size() != best->methods.size())
        take = cand.methods.size() < best->methods.size();
      else
        take = detail::sorted_names(cand.methods) < detail::sorted_names(best->methods);
    }
    if (take) best = std::move(cand);
  }
  return *best;
}

inline Json synthesis_to_json(const SynthesisResult& r) {
  Json methods = Json::array();
  for (OptimizationMethod m : r.methods) methods.push_back(method_name(m));
  Json net = Json::object();
  for (Objective o : kAllObjectives) net[std::string(objective_name(o))] = r.net_effect[index(o)];
  return Json{{"methods", methods}, {"net_effect", net}, {"weighted_score", r.weighted_score}};
}

// ---------------------------------------------------------------------------
// Drafting
// ---------------------------------------------------------------------------

inline constexpr std::string_view kUnspecified = "unspecified";

namespace detail {

inline int current_year() {
  using namespace std::chrono;
  year_month_day ymd{floor<days>(system_clock::now())};
  return static_cast<int>(ymd.year());
}

// Value a draft should take to satisfy `c` on an integer axis, if `c` is a
// lower bound or equality.
inline std::optional<std::int64_t> integer_floor(const query::Condition& c) {
  const double* v = std::get_if<double>(&c.literal);
  if (!v) return std::nullopt;
  switch (c.op) {
    case query::Op::kEq:
    case query::Op::kGe: return static_cast<std::int64_t>(std::ceil(*v));
    case query::Op::kGt: return static_cast<std::int64_t>(std::floor(*v)) + 1;
    default: return std::nullopt;
  }
}

// Value for an upper bound or equality on a money axis.
inline std::optional<Money> money_ceiling(const query::Condition& c) {
  const double* v = std::get_if<double>(&c.literal);
  if (!v) return std::nullopt;
  switch (c.op) {
    case query::Op::kEq:
    case query::Op::kLe: return Money::from_dollars(*v);
    case query::Op::kLt: return Money::from_cents(static_cast<std::int64_t>(std::ceil(*v * 100.0)) - 1);
    default: return std::nullopt;
  }
}

inline std::optional<std::string> string_equality(const query::Condition& c) {
  const std::string* s = std::get_if<std::string>(&c.literal);
  if (!s || c.op != query::Op::kEq) return std::nullopt;
  return *s;
}

}  // namespace detail

// A synthesized ModelRecord carrying the chosen methods. Bounded criteria
// are pinned at their bounds (a budget ceiling becomes the total cost, a
// device-count floor the device count); equality criteria are copied.
// Performance stays empty and ratings sit at 3.0 until measured.
inline ModelRecord draft_model(const SynthesisResult& result, const query::Query& criteria,
                               const ObjectiveWeights& weights, std::string id = "draft") {
  ModelRecord r;
  r.id = std::move(id);
  r.created_year = detail::current_year();
  r.rating = ObjectiveScores::filled(3.0);
  r.application_area = std::string(kUnspecified);
  r.purpose = std::string(kUnspecified);
  r.total_cost = Money::from_cents(0);
  r.num_iot_devices = 1;
  r.provenance = Provenance::kSynthesized;
  r.optimization.methods = result.methods;
  r.cloud.shielded_execution = result.methods.contains(OptimizationMethod::kShieldedExecution);
  r.dln.name = std::string(kUnspecified);
  r.dln.training_dataset = std::string(kUnspecified);
  r.device.name = std::string(kUnspecified);
  r.device.memory_mb = 1;

  for (const query::Condition& c : criteria.conditions) {
    const std::string& f = c.field_path;
    if (f == "model.application_area") {
      if (auto s = detail::string_equality(c)) r.application_area = *s;
    } else if (f == "model.purpose") {
      if (auto s = detail::string_equality(c)) r.purpose = *s;
    } else if (f == "model.total_cost") {
      if (auto m = detail::money_ceiling(c); m && m->cents() >= 0) r.total_cost = *m;
    } else if (f == "model.num_iot_devices") {
      if (auto n = detail::integer_floor(c); n && *n >= 1) r.num_iot_devices = *n;
    } else if (f == "dln.name") {
      if (auto s = detail::string_equality(c)) r.dln.name = *s;
    } else if (f == "dln.training_dataset") {
      if (auto s = detail::string_equality(c)) r.dln.training_dataset = *s;
    } else if (f == "dln.num_layers") {
      if (auto n = detail::integer_floor(c); n && *n >= 1) r.dln.num_layers = *n;
    } else if (f == "device.name") {
      if (auto s = detail::string_equality(c)) r.device.name = *s;
    } else if (f == "device.memory_mb") {
      if (auto n = detail::integer_floor(c); n && *n >= 1) r.device.memory_mb = *n;
    } else if (f == "device.price") {
      if (auto m = detail::money_ceiling(c); m && m->cents() >= 0) r.device.price = *m;
    } else if (f == "cloud.host_address") {
      if (auto s = detail::string_equality(c)) r.cloud.host_address = *s;
    }
  }

  std::ostringstream notes;
  notes << "synthesized from the method effect matrix; weighted net effect "
        << detail::format_double(result.weighted_score) << " under weights "
        << weights_to_fixed_text(weights);
  r.optimization.algorithm_notes = notes.str();
  return r;
}

}  // namespace dlom
