#pragma once

// Objective weights from pairwise preference elicitation, the weighted
// overall score, and model ranking.
//
// Weights: each comparison "a over b with intensity r" is an edge asserting
// log(w_a) - log(w_b) = log(r). The log-weights are the least-squares
// solution of those equations, pinned to zero mean inside each connected
// component of the comparison graph; objectives never compared stay at
// log-weight 0. The exponentiated vector is normalized to sum 1. On a
// complete, consistent comparison set this reproduces the generating
// weights exactly (and coincides with the geometric-mean method).

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dlom/error.hpp"
#include "dlom/record_json.hpp"
#include "dlom/schema.hpp"

namespace dlom {

enum class Intensity { kEqual, kWeak, kStronger, kAbsolute };

inline constexpr double ratio(Intensity i) {
  switch (i) {
    case Intensity::kEqual: return 1.0;
    case Intensity::kWeak: return 3.0;
    case Intensity::kStronger: return 5.0;
    case Intensity::kAbsolute: return 9.0;
  }
  return 1.0;
}

inline std::string_view intensity_name(Intensity i) {
  switch (i) {
    case Intensity::kEqual: return "Equal";
    case Intensity::kWeak: return "Weak";
    case Intensity::kStronger: return "Stronger";
    case Intensity::kAbsolute: return "Absolute";
  }
  return "Equal";
}

inline std::optional<Intensity> parse_intensity(std::string_view s) {
  for (Intensity i : {Intensity::kEqual, Intensity::kWeak, Intensity::kStronger,
                      Intensity::kAbsolute})
    if (detail::iequals(s, intensity_name(i))) return i;
  return std::nullopt;
}

struct PairwiseComparison {
  Objective more_important;
  Objective less_important;
  Intensity intensity = Intensity::kEqual;

  friend bool operator==(const PairwiseComparison&, const PairwiseComparison&) = default;
};

// ---------------------------------------------------------------------------
// Weight derivation
// ---------------------------------------------------------------------------

struct Elicitation {
  ObjectiveWeights weights;
  // Root-mean-square residual of the log-ratio equations. Zero for a
  // consistent comparison set; informational only.
  double log_residual_rms = 0.0;
  std::size_t comparisons_used = 0;
};

namespace detail {

// Solves A x = b in place by Gaussian elimination with partial pivoting.
template <std::size_t N>
std::array<double, N> solve_dense(std::array<std::array<double, N>, N> a,
                                  std::array<double, N> b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::array<double, N> x{};
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace detail

// A judgment "w_more / w_less = ratio" with an arbitrary positive ratio.
struct RatioJudgment {
  Objective more_important;
  Objective less_important;
  double ratio = 1.0;
};

inline Elicitation elicit_ratios(std::span<const RatioJudgment> judgments) {
  constexpr std::size_t n = kNumObjectives;

  // Last judgment on an unordered pair wins.
  std::map<std::pair<std::size_t, std::size_t>, RatioJudgment> by_pair;
  for (const RatioJudgment& c : judgments) {
    std::size_t a = index(c.more_important);
    std::size_t b = index(c.less_important);
    if (a == b)
      throw Error(ErrorKind::kInvalidInput,
                  "comparison must involve two distinct objectives");
    if (!(c.ratio > 0.0) || !std::isfinite(c.ratio))
      throw Error(ErrorKind::kInvalidInput, "comparison ratio must be positive and finite");
    by_pair[{std::min(a, b), std::max(a, b)}] = c;
  }

  struct Edge {
    std::size_t more;
    std::size_t less;
    double log_ratio;
  };
  std::vector<Edge> edges;
  for (const auto& [pair, c] : by_pair)
    edges.push_back({index(c.more_important), index(c.less_important), std::log(c.ratio)});

  // Connected components.
  std::array<std::size_t, n> comp{};
  for (std::size_t i = 0; i < n; ++i) comp[i] = i;
  auto root = [&](std::size_t i) {
    while (comp[i] != i) i = comp[i] = comp[comp[i]];
    return i;
  };
  for (const Edge& e : edges) comp[root(e.more)] = root(e.less);

  // Normal equations L x = rhs of the edge system.
  std::array<std::array<double, n>, n> laplacian{};
  std::array<double, n> rhs{};
  for (const Edge& e : edges) {
    laplacian[e.more][e.more] += 1.0;
    laplacian[e.less][e.less] += 1.0;
    laplacian[e.more][e.less] -= 1.0;
    laplacian[e.less][e.more] -= 1.0;
    rhs[e.more] += e.log_ratio;
    rhs[e.less] -= e.log_ratio;
  }

  std::array<double, n> log_w{};
  std::array<bool, n> done{};
  for (std::size_t start = 0; start < n; ++start) {
    if (done[start]) continue;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (root(i) == root(start)) members.push_back(i);
    for (std::size_t i : members) done[i] = true;
    std::size_t m = members.size();
    if (m == 1) continue;

    // L is singular on the all-ones direction; adding J/m pins the
    // component's log-weights to zero mean without changing the solution.
    std::array<std::array<double, n>, n> a{};
    std::array<double, n> b{};
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c)
        a[r][c] = laplacian[members[r]][members[c]] + 1.0 / static_cast<double>(m);
      b[r] = rhs[members[r]];
    }
    std::array<double, n> x = detail::solve_dense<n>(a, b, m);
    for (std::size_t r = 0; r < m; ++r) log_w[members[r]] = x[r];
  }

  std::array<double, n> raw{};
  for (std::size_t i = 0; i < n; ++i) raw[i] = std::exp(log_w[i]);

  Elicitation out;
  out.weights = ObjectiveWeights::normalize(raw);
  out.comparisons_used = edges.size();
  if (!edges.empty()) {
    double ss = 0.0;
    for (const Edge& e : edges) {
      double r = log_w[e.more] - log_w[e.less] - e.log_ratio;
      ss += r * r;
    }
    out.log_residual_rms = std::sqrt(ss / static_cast<double>(edges.size()));
  }
  return out;
}

inline Elicitation elicit(std::span<const PairwiseComparison> comparisons) {
  std::vector<RatioJudgment> judgments;
  judgments.reserve(comparisons.size());
  for (const PairwiseComparison& c : comparisons)
    judgments.push_back({c.more_important, c.less_important, ratio(c.intensity)});
  return elicit_ratios(judgments);
}

inline ObjectiveWeights derive_weights(std::span<const PairwiseComparison> comparisons) {
  return elicit(comparisons).weights;
}

// ---------------------------------------------------------------------------
// Scoring and ranking
// ---------------------------------------------------------------------------

// w_Prf*Prf + w_Rel*Rel + w_Sec*Sec + w_Cst*Cst + w_Lat*Lat + w_Cmp*Cmp
inline double overall_score(const ObjectiveWeights& weights, const ObjectiveScores& scores) {
  double total = 0.0;
  for (Objective o : kAllObjectives) total += weights[o] * scores[o];
  return total;
}

struct RankedModel {
  std::string id;
  double score = 0.0;
  // weight * score per objective; sums to `score`.
  std::array<double, kNumObjectives> contributions{};

  friend bool operator==(const RankedModel&, const RankedModel&) = default;
};

// Descending by overall score; ties go to the higher rating aggregate, then
// the newer model, then the lexicographically smaller id.
inline std::vector<RankedModel> rank_models(const ObjectiveWeights& weights,
                                            std::span<const ModelRecord> models) {
  struct Row {
    RankedModel ranked;
    double aggregate;
    int year;
  };
  std::vector<Row> rows;
  rows.reserve(models.size());
  for (const ModelRecord& m : models) {
    Row row{{m.id, overall_score(weights, m.rating), {}}, m.rating_aggregate(), m.created_year};
    for (Objective o : kAllObjectives)
      row.ranked.contributions[index(o)] = weights[o] * m.rating[o];
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.ranked.score != b.ranked.score) return a.ranked.score > b.ranked.score;
    if (a.aggregate != b.aggregate) return a.aggregate > b.aggregate;
    if (a.year != b.year) return a.year > b.year;
    return a.ranked.id < b.ranked.id;
  });
  std::vector<RankedModel> out;
  out.reserve(rows.size());
  for (Row& r : rows) out.push_back(std::move(r.ranked));
  return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

// {"more": "Performance", "less": "Cost", "intensity": "Absolute"}
inline PairwiseComparison comparison_from_json(const Json& j) {
  auto text = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
      throw Error(ErrorKind::kInvalidInput,
                  std::string("comparison needs a string '") + key + "'");
    return it->get<std::string>();
  };
  if (!j.is_object()) throw Error(ErrorKind::kInvalidInput, "comparison must be an object");
  auto more = parse_objective(text("more"));
  auto less = parse_objective(text("less"));
  auto intensity = parse_intensity(text("intensity"));
  if (!more || !less)
    throw Error(ErrorKind::kInvalidInput, "unknown objective in comparison " + j.dump());
  if (!intensity)
    throw Error(ErrorKind::kInvalidInput, "unknown intensity in comparison " + j.dump());
  if (*more == *less)
    throw Error(ErrorKind::kInvalidInput,
                "comparison must involve two distinct objectives: " + j.dump());
  return {*more, *less, *intensity};
}

inline std::vector<PairwiseComparison> comparisons_from_json(const Json& j) {
  if (!j.is_array())
    throw Error(ErrorKind::kInvalidInput, "comparisons must be a JSON array");
  std::vector<PairwiseComparison> out;
  for (const Json& c : j) out.push_back(comparison_from_json(c));
  return out;
}

inline Json comparison_to_json(const PairwiseComparison& c) {
  return Json{{"more", objective_name(c.more_important)},
              {"less", objective_name(c.less_important)},
              {"intensity", intensity_name(c.intensity)}};
}

inline Json ranked_to_json(const RankedModel& r) {
  Json contributions = Json::object();
  for (Objective o : kAllObjectives)
    contributions[std::string(objective_name(o))] = r.contributions[index(o)];
  return Json{{"id", r.id}, {"score", r.score}, {"contributions", contributions}};
}

}  // namespace dlom
