#pragma once

// Domain types for stored optimization models: the six schema classes
// (model, cloud configuration, end device, main DLN, optimization,
// performance), their validation, and raw-metric to 1..5 score mapping.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlom/error.hpp"

namespace dlom {

namespace detail {

inline bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

// Vector index order for scores and weights everywhere.
enum class Objective : std::size_t {
  kPerformance = 0,
  kReliability,
  kSecurity,
  kCost,
  kLatency,
  kComplexity,
};

inline constexpr std::size_t kNumObjectives = 6;

inline constexpr std::array<Objective, kNumObjectives> kAllObjectives = {
    Objective::kPerformance, Objective::kReliability, Objective::kSecurity,
    Objective::kCost,        Objective::kLatency,     Objective::kComplexity};

inline constexpr std::size_t index(Objective o) {
  return static_cast<std::size_t>(o);
}

inline std::string_view objective_name(Objective o) {
  static constexpr std::array<std::string_view, kNumObjectives> kNames = {
      "Performance", "Reliability", "Security", "Cost", "Latency", "Complexity"};
  return kNames[index(o)];
}

// snake_case key used in record serialization and query paths.
inline std::string objective_key(Objective o) {
  return detail::lower(objective_name(o));
}

inline std::optional<Objective> parse_objective(std::string_view name) {
  for (Objective o : kAllObjectives)
    if (detail::iequals(name, objective_name(o))) return o;
  return std::nullopt;
}

// Six per-objective values. Scores on all axes are oriented so that larger
// is better; reverse-scaled raw measures are inverted before storage.
template <typename Tag>
class ObjectiveVector {
 public:
  constexpr ObjectiveVector() = default;
  constexpr explicit ObjectiveVector(std::array<double, kNumObjectives> values)
      : values_(values) {}

  static constexpr ObjectiveVector filled(double v) {
    ObjectiveVector out;
    out.values_.fill(v);
    return out;
  }

  constexpr double& operator[](Objective o) { return values_[index(o)]; }
  constexpr double operator[](Objective o) const { return values_[index(o)]; }

  constexpr const std::array<double, kNumObjectives>& values() const {
    return values_;
  }
  double sum() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
  }

  friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;

 private:
  std::array<double, kNumObjectives> values_{};
};

struct ScoresTag {};
using ObjectiveScores = ObjectiveVector<ScoresTag>;

inline constexpr double kMinScore = 1.0;
inline constexpr double kMaxScore = 5.0;

// Non-negative weights summing to one. Construct through normalize().
class ObjectiveWeights {
 public:
  ObjectiveWeights() { values_.fill(1.0 / kNumObjectives); }

  static ObjectiveWeights uniform() { return ObjectiveWeights(); }

  // Scales `raw` to unit sum. Rejects negative, non-finite or all-zero input.
  static ObjectiveWeights normalize(const std::array<double, kNumObjectives>& raw) {
    double total = 0.0;
    for (double v : raw) {
      if (!std::isfinite(v) || v < 0.0)
        throw Error(ErrorKind::kInvalidInput,
                    "weights must be finite and non-negative");
      total += v;
    }
    if (total <= 0.0)
      throw Error(ErrorKind::kInvalidInput, "weights must not all be zero");
    ObjectiveWeights w;
    for (std::size_t i = 0; i < kNumObjectives; ++i) w.values_[i] = raw[i] / total;
    return w;
  }

  static ObjectiveWeights only(Objective o) {
    std::array<double, kNumObjectives> raw{};
    raw[index(o)] = 1.0;
    return normalize(raw);
  }

  double operator[](Objective o) const { return values_[index(o)]; }
  const std::array<double, kNumObjectives>& values() const { return values_; }

  friend bool operator==(const ObjectiveWeights&, const ObjectiveWeights&) = default;

 private:
  std::array<double, kNumObjectives> values_{};
};

// ---------------------------------------------------------------------------
// Money
// ---------------------------------------------------------------------------

// USD amount held in whole cents.
class Money {
 public:
  constexpr Money() = default;
  static constexpr Money from_cents(std::int64_t cents) { return Money(cents); }
  static Money from_dollars(double dollars) {
    if (!std::isfinite(dollars))
      throw Error(ErrorKind::kInvalidInput, "money amount must be finite");
    return Money(static_cast<std::int64_t>(std::llround(dollars * 100.0)));
  }

  // Accepts "12315", "12315.5", "12315.00", "-3.10", optional leading '$'
  // and thousands separators.
  static Money parse(std::string_view text) {
    std::string digits;
    for (char c : text) {
      if (c == '$' || c == ',' || std::isspace(static_cast<unsigned char>(c))) continue;
      digits.push_back(c);
    }
    bool negative = false;
    std::size_t pos = 0;
    if (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) {
      negative = digits[0] == '-';
      pos = 1;
    }
    std::int64_t whole = 0;
    std::int64_t frac = 0;
    int frac_digits = 0;
    bool seen_digit = false;
    bool in_frac = false;
    for (; pos < digits.size(); ++pos) {
      char c = digits[pos];
      if (c == '.' && !in_frac) {
        in_frac = true;
        continue;
      }
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw Error(ErrorKind::kInvalidInput,
                    "malformed money amount '" + std::string(text) + "'");
      seen_digit = true;
      if (in_frac) {
        if (frac_digits == 2) {
          throw Error(ErrorKind::kInvalidInput,
                      "money amount has more than 2 fraction digits: '" +
                          std::string(text) + "'");
        }
        frac = frac * 10 + (c - '0');
        ++frac_digits;
      } else {
        whole = whole * 10 + (c - '0');
      }
    }
    if (!seen_digit)
      throw Error(ErrorKind::kInvalidInput,
                  "malformed money amount '" + std::string(text) + "'");
    if (frac_digits == 1) frac *= 10;
    std::int64_t cents = whole * 100 + frac;
    return Money(negative ? -cents : cents);
  }

  constexpr std::int64_t cents() const { return cents_; }
  constexpr double dollars() const { return static_cast<double>(cents_) / 100.0; }

  // Decimal with exactly two fraction digits, e.g. "785.12".
  std::string to_string() const {
    std::int64_t abs = cents_ < 0 ? -cents_ : cents_;
    std::string out = (cents_ < 0 ? "-" : "") + std::to_string(abs / 100) + ".";
    std::int64_t frac = abs % 100;
    if (frac < 10) out.push_back('0');
    out += std::to_string(frac);
    return out;
  }

  friend constexpr auto operator<=>(const Money&, const Money&) = default;

 private:
  constexpr explicit Money(std::int64_t cents) : cents_(cents) {}
  std::int64_t cents_ = 0;
};

// ---------------------------------------------------------------------------
// Schema classes
// ---------------------------------------------------------------------------

struct CloudConfig {
  std::string host_address;
  double response_time_ms = 0.0;
  bool shielded_execution = false;
  std::vector<std::string> security_protocols;
  std::string cost_plan;
  std::string backup_address;

  friend bool operator==(const CloudConfig&, const CloudConfig&) = default;
};

struct EndDeviceSpec {
  std::string name;
  std::string cpu;
  std::string gpu;
  std::int64_t memory_mb = 0;
  double camera_mp = 0.0;
  std::string dl_framework;
  Money price;

  friend bool operator==(const EndDeviceSpec&, const EndDeviceSpec&) = default;
};

struct MainDln {
  std::string name;
  std::string training_dataset;
  std::map<std::string, std::string> hyperparameters;
  std::string activation_fn;
  std::string loss_fn;
  std::int64_t num_layers = 1;
  std::int64_t num_inputs = 1;
  std::int64_t num_outputs = 1;

  friend bool operator==(const MainDln&, const MainDln&) = default;
};

// The first seven members are the rows of the effect matrix. FineTuning is
// storable metadata only.
enum class OptimizationMethod {
  kPruning = 0,
  kKnowledgeDistillation,
  kQuantization,
  kFogComputing,
  kShieldedExecution,
  kTensorDecomposition,
  kHardwareOptimization,
  kFineTuning,
};

inline constexpr std::size_t kNumEffectMethods = 7;

inline constexpr std::array<OptimizationMethod, 8> kAllMethods = {
    OptimizationMethod::kPruning,
    OptimizationMethod::kKnowledgeDistillation,
    OptimizationMethod::kQuantization,
    OptimizationMethod::kFogComputing,
    OptimizationMethod::kShieldedExecution,
    OptimizationMethod::kTensorDecomposition,
    OptimizationMethod::kHardwareOptimization,
    OptimizationMethod::kFineTuning};

inline std::string_view method_name(OptimizationMethod m) {
  static constexpr std::array<std::string_view, 8> kNames = {
      "Pruning",           "KnowledgeDistillation", "Quantization",
      "FogComputing",      "ShieldedExecution",     "TensorDecomposition",
      "HardwareOptimization", "FineTuning"};
  return kNames[static_cast<std::size_t>(m)];
}

inline std::optional<OptimizationMethod> parse_method(std::string_view name) {
  for (OptimizationMethod m : kAllMethods)
    if (detail::iequals(name, method_name(m))) return m;
  return std::nullopt;
}

struct OptimizationPlan {
  std::set<OptimizationMethod> methods;
  std::string algorithm_notes;

  friend bool operator==(const OptimizationPlan&, const OptimizationPlan&) = default;
};

struct PerformanceReport {
  double system_latency_ms = 0.0;
  double inference_latency_ms = 0.0;
  double accuracy_pct = 0.0;
  double stability_pct = 0.0;
  double avg_power_w = 0.0;
  double throughput_per_s = 0.0;
  double runtime_memory_mb = 0.0;

  friend bool operator==(const PerformanceReport&, const PerformanceReport&) = default;
};

enum class Provenance { kIngested, kSynthesized };

inline std::string_view provenance_name(Provenance p) {
  return p == Provenance::kIngested ? "ingested" : "synthesized";
}

inline std::optional<Provenance> parse_provenance(std::string_view s) {
  if (detail::iequals(s, "ingested")) return Provenance::kIngested;
  if (detail::iequals(s, "synthesized")) return Provenance::kSynthesized;
  return std::nullopt;
}

struct ModelRecord {
  std::string id;
  int created_year = 0;
  ObjectiveScores rating = ObjectiveScores::filled(3.0);
  std::string application_area;
  std::string purpose;
  Money total_cost;
  std::int64_t num_iot_devices = 1;
  CloudConfig cloud;
  EndDeviceSpec device;
  MainDln dln;
  OptimizationPlan optimization;
  std::optional<PerformanceReport> performance;
  Provenance provenance = Provenance::kIngested;

  // Unweighted mean of the six ratings; derived, never stored separately.
  double rating_aggregate() const { return rating.sum() / kNumObjectives; }

  friend bool operator==(const ModelRecord&, const ModelRecord&) = default;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
  std::string field;
  std::string rule;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view rule) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.rule == rule; });
  }
};

inline ValidationResult validate_model(const ModelRecord& r) {
  ValidationResult result;
  auto require = [&](bool ok, std::string field, std::string rule) {
    if (!ok) result.violations.push_back({std::move(field), std::move(rule)});
  };
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  auto pct = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 100.0; };

  require(!r.id.empty(), "id", "id non-empty");
  for (Objective o : kAllObjectives) {
    double v = r.rating[o];
    require(std::isfinite(v) && v >= kMinScore && v <= kMaxScore,
            "rating." + objective_key(o), "rating in [1,5]");
  }
  require(r.num_iot_devices >= 1, "num_iot_devices", "num_iot_devices ≥ 1");
  require(r.total_cost.cents() >= 0, "total_cost", "total_cost ≥ 0");

  require(finite_nonneg(r.cloud.response_time_ms), "cloud.response_time_ms",
          "response_time_ms ≥ 0");

  require(r.device.memory_mb > 0, "device.memory_mb", "memory_mb > 0");
  require(finite_nonneg(r.device.camera_mp), "device.camera_mp", "camera_mp ≥ 0");
  require(r.device.price.cents() >= 0, "device.price", "price ≥ 0");

  require(r.dln.num_layers >= 1, "dln.num_layers", "num_layers ≥ 1");
  require(r.dln.num_inputs >= 1, "dln.num_inputs", "num_inputs ≥ 1");
  require(r.dln.num_outputs >= 1, "dln.num_outputs", "num_outputs ≥ 1");

  if (r.performance) {
    const PerformanceReport& p = *r.performance;
    require(finite_nonneg(p.system_latency_ms), "performance.system_latency_ms",
            "system_latency_ms ≥ 0");
    require(finite_nonneg(p.inference_latency_ms),
            "performance.inference_latency_ms", "inference_latency_ms ≥ 0");
    require(pct(p.accuracy_pct), "performance.accuracy_pct", "accuracy_pct in [0,100]");
    require(pct(p.stability_pct), "performance.stability_pct",
            "stability_pct in [0,100]");
    require(finite_nonneg(p.avg_power_w), "performance.avg_power_w", "avg_power_w ≥ 0");
    require(finite_nonneg(p.throughput_per_s), "performance.throughput_per_s",
            "throughput_per_s ≥ 0");
    require(finite_nonneg(p.runtime_memory_mb), "performance.runtime_memory_mb",
            "runtime_memory_mb ≥ 0");
    require(!(p.inference_latency_ms > p.system_latency_ms),
            "performance.inference_latency_ms", "inference ≤ system latency");
  }
  return result;
}

// ---------------------------------------------------------------------------
// Score suggestion
// ---------------------------------------------------------------------------

enum class Direction { kForward, kReverse };

// Maps a raw measurement onto the 1..5 scale relative to a population range.
// Forward axes score the population maximum 5, reverse axes the minimum.
inline double normalize_metric(double value, double population_min,
                               double population_max, Direction direction) {
  if (!(population_min <= population_max))
    throw Error(ErrorKind::kInvalidPopulation,
                "population_min must not exceed population_max");
  if (population_min == population_max) return 3.0;
  double t = (value - population_min) / (population_max - population_min);
  double score = direction == Direction::kForward ? 1.0 + 4.0 * t : 5.0 - 4.0 * t;
  return std::clamp(score, kMinScore, kMaxScore);
}

namespace detail {

template <typename Extract>
double score_axis(const ModelRecord& record, std::span<const ModelRecord> population,
                  Extract extract, Direction direction) {
  std::optional<double> self = extract(record);
  if (!self) return 3.0;
  double lo = *self;
  double hi = *self;
  for (const ModelRecord& m : population) {
    if (auto v = extract(m)) {
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
  }
  return normalize_metric(*self, lo, hi, direction);
}

}  // namespace detail

// Default ratings derived from raw metrics. Users normally supply ratings;
// these are starting points. Models without a performance report get the
// midpoint on performance-derived axes.
inline ObjectiveScores suggest_scores(const ModelRecord& record,
                                      std::span<const ModelRecord> population) {
  if (population.empty())
    throw Error(ErrorKind::kInvalidPopulation, "population must not be empty");

  using Opt = std::optional<double>;
  ObjectiveScores s;
  s[Objective::kPerformance] = detail::score_axis(
      record, population,
      [](const ModelRecord& m) -> Opt {
        return m.performance ? Opt(m.performance->accuracy_pct) : std::nullopt;
      },
      Direction::kForward);
  s[Objective::kReliability] = detail::score_axis(
      record, population,
      [](const ModelRecord& m) -> Opt {
        return m.performance ? Opt(m.performance->stability_pct) : std::nullopt;
      },
      Direction::kForward);
  s[Objective::kSecurity] = detail::score_axis(
      record, population,
      [](const ModelRecord& m) -> Opt {
        return (m.cloud.shielded_execution ? 1.0 : 0.0) +
               static_cast<double>(m.cloud.security_protocols.size());
      },
      Direction::kForward);
  s[Objective::kCost] = detail::score_axis(
      record, population,
      [](const ModelRecord& m) -> Opt {
        return m.total_cost.dollars() /
               static_cast<double>(std::max<std::int64_t>(1, m.num_iot_devices));
      },
      Direction::kReverse);
  s[Objective::kLatency] = detail::score_axis(
      record, population,
      [](const ModelRecord& m) -> Opt {
        return m.performance ? Opt(m.performance->system_latency_ms) : std::nullopt;
      },
      Direction::kReverse);
  s[Objective::kComplexity] = detail::score_axis(
      record, population,
      [](const ModelRecord& m) -> Opt {
        return static_cast<double>(m.optimization.methods.size());
      },
      Direction::kReverse);
  return s;
}

}  // namespace dlom
