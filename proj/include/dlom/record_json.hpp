#pragma once

// Canonical JSON form of ModelRecord and its parts. Field names follow the
// C++ member names; money travels as a decimal string with two fraction
// digits.

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>

#include <json.hpp>

#include "dlom/error.hpp"
#include "dlom/schema.hpp"

namespace dlom {

using Json = nlohmann::ordered_json;

namespace detail {

inline const Json& require_field(const Json& obj, std::string_view context,
                                 const char* key) {
  if (!obj.is_object())
    throw Error(ErrorKind::kInvalidInput, std::string(context) + " must be an object");
  auto it = obj.find(key);
  if (it == obj.end())
    throw Error(ErrorKind::kInvalidInput,
                "missing field '" + std::string(context) + "." + key + "'",
                Json{{"field", std::string(context) + "." + key}});
  return *it;
}

template <typename T>
T get_as(const Json& obj, std::string_view context, const char* key) {
  const Json& v = require_field(obj, context, key);
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw Error(ErrorKind::kInvalidInput, "");
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_integer()) throw Error(ErrorKind::kInvalidInput, "");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw Error(ErrorKind::kInvalidInput, "");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw Error(ErrorKind::kInvalidInput, "");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw Error(ErrorKind::kInvalidInput,
                "field '" + std::string(context) + "." + key + "' has the wrong type",
                Json{{"field", std::string(context) + "." + key}});
  }
}

inline Money get_money(const Json& obj, std::string_view context, const char* key) {
  const Json& v = require_field(obj, context, key);
  if (v.is_string()) return Money::parse(v.get<std::string>());
  if (v.is_number()) return Money::from_dollars(v.get<double>());
  throw Error(ErrorKind::kInvalidInput,
              "field '" + std::string(context) + "." + key + "' must be money");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

inline Json scores_to_json(const ObjectiveScores& s) {
  Json j = Json::object();
  for (Objective o : kAllObjectives) j[objective_key(o)] = s[o];
  return j;
}

inline Json cloud_to_json(const CloudConfig& c) {
  return Json{{"host_address", c.host_address},
              {"response_time_ms", c.response_time_ms},
              {"shielded_execution", c.shielded_execution},
              {"security_protocols", c.security_protocols},
              {"cost_plan", c.cost_plan},
              {"backup_address", c.backup_address}};
}

inline Json device_to_json(const EndDeviceSpec& d) {
  return Json{{"name", d.name},
              {"cpu", d.cpu},
              {"gpu", d.gpu},
              {"memory_mb", d.memory_mb},
              {"camera_mp", d.camera_mp},
              {"dl_framework", d.dl_framework},
              {"price", d.price.to_string()}};
}

inline Json dln_to_json(const MainDln& d) {
  Json hp = Json::object();
  for (const auto& [k, v] : d.hyperparameters) hp[k] = v;
  return Json{{"name", d.name},
              {"training_dataset", d.training_dataset},
              {"hyperparameters", hp},
              {"activation_fn", d.activation_fn},
              {"loss_fn", d.loss_fn},
              {"num_layers", d.num_layers},
              {"num_inputs", d.num_inputs},
              {"num_outputs", d.num_outputs}};
}

inline Json optimization_to_json(const OptimizationPlan& p) {
  Json methods = Json::array();
  for (OptimizationMethod m : p.methods) methods.push_back(method_name(m));
  return Json{{"methods", methods}, {"algorithm_notes", p.algorithm_notes}};
}

inline Json performance_to_json(const PerformanceReport& p) {
  return Json{{"system_latency_ms", p.system_latency_ms},
              {"inference_latency_ms", p.inference_latency_ms},
              {"accuracy_pct", p.accuracy_pct},
              {"stability_pct", p.stability_pct},
              {"avg_power_w", p.avg_power_w},
              {"throughput_per_s", p.throughput_per_s},
              {"runtime_memory_mb", p.runtime_memory_mb}};
}

inline Json record_to_json(const ModelRecord& r) {
  Json j;
  j["id"] = r.id;
  j["created_year"] = r.created_year;
  j["rating"] = scores_to_json(r.rating);
  j["rating_aggregate"] = r.rating_aggregate();
  j["application_area"] = r.application_area;
  j["purpose"] = r.purpose;
  j["total_cost"] = r.total_cost.to_string();
  j["num_iot_devices"] = r.num_iot_devices;
  j["cloud"] = cloud_to_json(r.cloud);
  j["device"] = device_to_json(r.device);
  j["dln"] = dln_to_json(r.dln);
  j["optimization"] = optimization_to_json(r.optimization);
  j["performance"] = r.performance ? performance_to_json(*r.performance) : Json(nullptr);
  j["provenance"] = provenance_name(r.provenance);
  return j;
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

inline ObjectiveScores scores_from_json(const Json& j, std::string_view context = "rating") {
  ObjectiveScores s;
  for (Objective o : kAllObjectives) {
    std::string key = objective_key(o);
    s[o] = detail::get_as<double>(j, context, key.c_str());
  }
  return s;
}

inline CloudConfig cloud_from_json(const Json& j) {
  constexpr std::string_view ctx = "cloud";
  CloudConfig c;
  c.host_address = detail::get_as<std::string>(j, ctx, "host_address");
  c.response_time_ms = detail::get_as<double>(j, ctx, "response_time_ms");
  c.shielded_execution = detail::get_as<bool>(j, ctx, "shielded_execution");
  const Json& protocols = detail::require_field(j, ctx, "security_protocols");
  if (!protocols.is_array())
    throw Error(ErrorKind::kInvalidInput, "cloud.security_protocols must be an array");
  for (const Json& p : protocols) {
    if (!p.is_string())
      throw Error(ErrorKind::kInvalidInput, "cloud.security_protocols must hold strings");
    c.security_protocols.push_back(p.get<std::string>());
  }
  c.cost_plan = detail::get_as<std::string>(j, ctx, "cost_plan");
  c.backup_address = detail::get_as<std::string>(j, ctx, "backup_address");
  return c;
}

inline EndDeviceSpec device_from_json(const Json& j) {
  constexpr std::string_view ctx = "device";
  EndDeviceSpec d;
  d.name = detail::get_as<std::string>(j, ctx, "name");
  d.cpu = detail::get_as<std::string>(j, ctx, "cpu");
  d.gpu = detail::get_as<std::string>(j, ctx, "gpu");
  d.memory_mb = detail::get_as<std::int64_t>(j, ctx, "memory_mb");
  d.camera_mp = detail::get_as<double>(j, ctx, "camera_mp");
  d.dl_framework = detail::get_as<std::string>(j, ctx, "dl_framework");
  d.price = detail::get_money(j, ctx, "price");
  return d;
}

inline MainDln dln_from_json(const Json& j) {
  constexpr std::string_view ctx = "dln";
  MainDln d;
  d.name = detail::get_as<std::string>(j, ctx, "name");
  d.training_dataset = detail::get_as<std::string>(j, ctx, "training_dataset");
  const Json& hp = detail::require_field(j, ctx, "hyperparameters");
  if (!hp.is_object())
    throw Error(ErrorKind::kInvalidInput, "dln.hyperparameters must be an object");
  for (const auto& [k, v] : hp.items()) {
    if (!v.is_string())
      throw Error(ErrorKind::kInvalidInput,
                  "dln.hyperparameters." + k + " must be a string");
    d.hyperparameters[k] = v.get<std::string>();
  }
  d.activation_fn = detail::get_as<std::string>(j, ctx, "activation_fn");
  d.loss_fn = detail::get_as<std::string>(j, ctx, "loss_fn");
  d.num_layers = detail::get_as<std::int64_t>(j, ctx, "num_layers");
  d.num_inputs = detail::get_as<std::int64_t>(j, ctx, "num_inputs");
  d.num_outputs = detail::get_as<std::int64_t>(j, ctx, "num_outputs");
  return d;
}

inline OptimizationPlan optimization_from_json(const Json& j) {
  constexpr std::string_view ctx = "optimization";
  OptimizationPlan p;
  const Json& methods = detail::require_field(j, ctx, "methods");
  if (!methods.is_array())
    throw Error(ErrorKind::kInvalidInput, "optimization.methods must be an array");
  for (const Json& m : methods) {
    auto parsed = m.is_string() ? parse_method(m.get<std::string>()) : std::nullopt;
    if (!parsed)
      throw Error(ErrorKind::kInvalidInput,
                  "unknown optimization method " + m.dump());
    if (!p.methods.insert(*parsed).second)
      throw Error(ErrorKind::kInvalidInput,
                  "duplicate optimization method " + m.dump());
  }
  p.algorithm_notes = detail::get_as<std::string>(j, ctx, "algorithm_notes");
  return p;
}

inline PerformanceReport performance_from_json(const Json& j) {
  constexpr std::string_view ctx = "performance";
  PerformanceReport p;
  p.system_latency_ms = detail::get_as<double>(j, ctx, "system_latency_ms");
  p.inference_latency_ms = detail::get_as<double>(j, ctx, "inference_latency_ms");
  p.accuracy_pct = detail::get_as<double>(j, ctx, "accuracy_pct");
  p.stability_pct = detail::get_as<double>(j, ctx, "stability_pct");
  p.avg_power_w = detail::get_as<double>(j, ctx, "avg_power_w");
  p.throughput_per_s = detail::get_as<double>(j, ctx, "throughput_per_s");
  p.runtime_memory_mb = detail::get_as<double>(j, ctx, "runtime_memory_mb");
  return p;
}

inline std::optional<PerformanceReport> optional_performance_from_json(const Json& j) {
  auto it = j.find("performance");
  if (it == j.end() || it->is_null()) return std::nullopt;
  return performance_from_json(*it);
}

inline Provenance provenance_from_json(const Json& j) {
  auto it = j.find("provenance");
  if (it == j.end()) return Provenance::kIngested;
  auto p = it->is_string() ? parse_provenance(it->get<std::string>()) : std::nullopt;
  if (!p) throw Error(ErrorKind::kInvalidInput, "unknown provenance " + it->dump());
  return *p;
}

// Model-class fields shared between the canonical record and the
// model_performance store row.
inline void model_fields_from_json(const Json& j, ModelRecord& r) {
  constexpr std::string_view ctx = "model";
  r.id = detail::get_as<std::string>(j, ctx, "id");
  r.created_year = detail::get_as<int>(j, ctx, "created_year");
  r.rating = scores_from_json(detail::require_field(j, ctx, "rating"));
  r.application_area = detail::get_as<std::string>(j, ctx, "application_area");
  r.purpose = detail::get_as<std::string>(j, ctx, "purpose");
  r.total_cost = detail::get_money(j, ctx, "total_cost");
  r.num_iot_devices = detail::get_as<std::int64_t>(j, ctx, "num_iot_devices");
  r.optimization = optimization_from_json(detail::require_field(j, ctx, "optimization"));
  r.performance = optional_performance_from_json(j);
  r.provenance = provenance_from_json(j);

  // rating_aggregate is derived; a stored value must agree with the ratings.
  if (auto it = j.find("rating_aggregate"); it != j.end()) {
    if (!it->is_number() || std::abs(it->get<double>() - r.rating_aggregate()) > 1e-9)
      throw Error(ErrorKind::kInvalidInput,
                  "rating_aggregate does not equal the mean of the ratings",
                  Json{{"field", "rating_aggregate"}});
  }
}

inline ModelRecord record_from_json(const Json& j) {
  if (!j.is_object())
    throw Error(ErrorKind::kInvalidInput, "model record must be a JSON object");
  ModelRecord r;
  model_fields_from_json(j, r);
  r.cloud = cloud_from_json(detail::require_field(j, "model", "cloud"));
  r.device = device_from_json(detail::require_field(j, "model", "device"));
  r.dln = dln_from_json(detail::require_field(j, "model", "dln"));
  return r;
}

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

// {"Performance": 0.409091, ...}. Values are rounded to six decimals.
inline Json weights_to_json(const ObjectiveWeights& w) {
  Json j = Json::object();
  for (Objective o : kAllObjectives)
    j[std::string(objective_name(o))] = std::round(w[o] * 1e6) / 1e6;
  return j;
}

// Same object as weights_to_json but with fixed six-decimal text, e.g.
// {"Performance":0.166667,...}.
inline std::string weights_to_fixed_text(const ObjectiveWeights& w) {
  std::string out = "{";
  for (Objective o : kAllObjectives) {
    if (o != Objective::kPerformance) out += ",";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", w[o]);
    out += "\"" + std::string(objective_name(o)) + "\":" + buf;
  }
  out += "}";
  return out;
}

// Accepts an object keyed by objective name (case-insensitive). Missing
// objectives weigh zero. The result is normalized.
inline ObjectiveWeights weights_from_json(const Json& j) {
  if (!j.is_object())
    throw Error(ErrorKind::kInvalidInput, "weights must be a JSON object");
  std::array<double, kNumObjectives> raw{};
  for (const auto& [key, value] : j.items()) {
    auto o = parse_objective(key);
    if (!o) throw Error(ErrorKind::kInvalidInput, "unknown objective '" + key + "'");
    if (!value.is_number())
      throw Error(ErrorKind::kInvalidInput, "weight for '" + key + "' must be a number");
    raw[index(*o)] = value.get<double>();
  }
  return ObjectiveWeights::normalize(raw);
}

}  // namespace dlom
