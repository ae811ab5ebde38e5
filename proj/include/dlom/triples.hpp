#pragma once

// Knowledge-graph view of a ModelRecord: one triple per scalar field,
// one per element of set-valued fields.

#include <algorithm>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "dlom/schema.hpp"

namespace dlom {

inline constexpr std::string_view kNamespacePrefix = "dlom:";
inline constexpr std::string_view kExpandedPrefix = "urn:dlom:";

struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;

  friend bool operator==(const Triple&, const Triple&) = default;
};

namespace detail {

class TripleBuilder {
 public:
  explicit TripleBuilder(const std::string& id)
      : subject_(std::string(kNamespacePrefix) + "model/" + id) {}

  void add(std::string_view cls, std::string_view field, std::string object) {
    out_.push_back({subject_,
                    std::string(kNamespacePrefix) + std::string(cls) + "/" +
                        std::string(field),
                    std::move(object)});
  }
  void add(std::string_view cls, std::string_view field, double v) {
    add(cls, field, format_double(v));
  }
  void add(std::string_view cls, std::string_view field, std::int64_t v) {
    add(cls, field, std::to_string(v));
  }
  void add(std::string_view cls, std::string_view field, bool v) {
    add(cls, field, std::string(v ? "true" : "false"));
  }

  std::vector<Triple> finish() && {
    std::sort(out_.begin(), out_.end(), [](const Triple& a, const Triple& b) {
      return std::tie(a.predicate, a.object) < std::tie(b.predicate, b.object);
    });
    return std::move(out_);
  }

 private:
  std::string subject_;
  std::vector<Triple> out_;
};

}  // namespace detail

inline std::vector<Triple> record_triples(const ModelRecord& r) {
  detail::TripleBuilder b(r.id);

  b.add("model", "id", r.id);
  b.add("model", "created_year", static_cast<std::int64_t>(r.created_year));
  b.add("model", "rating_aggregate", r.rating_aggregate());
  b.add("model", "application_area", r.application_area);
  b.add("model", "purpose", r.purpose);
  b.add("model", "total_cost", r.total_cost.to_string());
  b.add("model", "num_iot_devices", r.num_iot_devices);
  b.add("model", "provenance", std::string(provenance_name(r.provenance)));
  for (Objective o : kAllObjectives) b.add("rating", objective_key(o), r.rating[o]);

  b.add("cloud", "host_address", r.cloud.host_address);
  b.add("cloud", "response_time_ms", r.cloud.response_time_ms);
  b.add("cloud", "shielded_execution", r.cloud.shielded_execution);
  for (const std::string& p : r.cloud.security_protocols)
    b.add("cloud", "security_protocols", p);
  b.add("cloud", "cost_plan", r.cloud.cost_plan);
  b.add("cloud", "backup_address", r.cloud.backup_address);

  b.add("device", "name", r.device.name);
  b.add("device", "cpu", r.device.cpu);
  b.add("device", "gpu", r.device.gpu);
  b.add("device", "memory_mb", r.device.memory_mb);
  b.add("device", "camera_mp", r.device.camera_mp);
  b.add("device", "dl_framework", r.device.dl_framework);
  b.add("device", "price", r.device.price.to_string());

  b.add("dln", "name", r.dln.name);
  b.add("dln", "training_dataset", r.dln.training_dataset);
  for (const auto& [k, v] : r.dln.hyperparameters) b.add("dln", "hyperparameters", k + "=" + v);
  b.add("dln", "activation_fn", r.dln.activation_fn);
  b.add("dln", "loss_fn", r.dln.loss_fn);
  b.add("dln", "num_layers", r.dln.num_layers);
  b.add("dln", "num_inputs", r.dln.num_inputs);
  b.add("dln", "num_outputs", r.dln.num_outputs);

  for (OptimizationMethod m : r.optimization.methods)
    b.add("optimization", "methods", std::string(method_name(m)));
  b.add("optimization", "algorithm_notes", r.optimization.algorithm_notes);

  if (r.performance) {
    const PerformanceReport& p = *r.performance;
    b.add("performance", "system_latency_ms", p.system_latency_ms);
    b.add("performance", "inference_latency_ms", p.inference_latency_ms);
    b.add("performance", "accuracy_pct", p.accuracy_pct);
    b.add("performance", "stability_pct", p.stability_pct);
    b.add("performance", "avg_power_w", p.avg_power_w);
    b.add("performance", "throughput_per_s", p.throughput_per_s);
    b.add("performance", "runtime_memory_mb", p.runtime_memory_mb);
  }
  return std::move(b).finish();
}

inline std::string expand_prefix(std::string_view iri) {
  if (iri.starts_with(kNamespacePrefix))
    return std::string(kExpandedPrefix) + std::string(iri.substr(kNamespacePrefix.size()));
  return std::string(iri);
}

inline std::string escape_literal(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// `<urn:dlom:model/m1> <urn:dlom:model/application_area> "Medical" .`
inline std::string to_ntriples(const std::vector<Triple>& triples) {
  std::string out;
  for (const Triple& t : triples) {
    out += "<" + expand_prefix(t.subject) + "> <" + expand_prefix(t.predicate) + "> \"" +
           escape_literal(t.object) + "\" .\n";
  }
  return out;
}

}  // namespace dlom
