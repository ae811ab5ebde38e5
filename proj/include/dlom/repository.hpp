#pragma once

// File-backed model repository. A ModelRecord is split across four
// JSON-lines stores under the repository root:
//
//   dln_params.jsonl         main DLN class
//   client_config.jsonl      end device specification
//   server_config.jsonl      cloud configuration
//   model_performance.jsonl  model metadata, rating, optimization, performance
//
// Each line is one JSON object whose first member is "id". The stores are
// loaded into memory on open; every mutation rewrites all four files via
// temp-file + rename while holding the exclusive lock, so readers never see
// a partially applied write.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dlom/error.hpp"
#include "dlom/record_json.hpp"
#include "dlom/schema.hpp"
#include "dlom/triples.hpp"

namespace dlom {

struct RepositoryLayout {
  std::filesystem::path root_path;

  std::filesystem::path dln_params() const { return root_path / "dln_params.jsonl"; }
  std::filesystem::path client_config() const { return root_path / "client_config.jsonl"; }
  std::filesystem::path server_config() const { return root_path / "server_config.jsonl"; }
  std::filesystem::path model_performance() const {
    return root_path / "model_performance.jsonl";
  }
  std::vector<std::filesystem::path> stores() const {
    return {dln_params(), client_config(), server_config(), model_performance()};
  }
};

namespace detail {

inline Json with_id_first(const std::string& id, const Json& body) {
  Json row;
  row["id"] = id;
  for (const auto& [k, v] : body.items()) row[k] = v;
  return row;
}

inline Json model_performance_row(const ModelRecord& r) {
  Json full = record_to_json(r);
  Json row;
  for (const char* key :
       {"id", "created_year", "rating", "rating_aggregate", "application_area", "purpose",
        "total_cost", "num_iot_devices", "optimization", "performance", "provenance"}) {
    row[key] = full[key];
  }
  return row;
}

using StoreRows = std::vector<std::pair<std::string, Json>>;

inline StoreRows read_store(const std::filesystem::path& path) {
  StoreRows rows;
  if (!std::filesystem::exists(path)) return rows;
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json row;
    try {
      row = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::kIo, path.filename().string() + ":" + std::to_string(line_no) +
                                      ": " + e.what());
    }
    auto it = row.find("id");
    if (!row.is_object() || it == row.end() || !it->is_string())
      throw Error(ErrorKind::kIo, path.filename().string() + ":" + std::to_string(line_no) +
                                      ": row has no string id");
    std::string id = it->get<std::string>();
    if (!seen.insert(id).second)
      throw Error(ErrorKind::kIo,
                  path.filename().string() + ": duplicate id '" + id + "'");
    rows.emplace_back(std::move(id), std::move(row));
  }
  return rows;
}

inline void write_store_atomically(const std::filesystem::path& path,
                                   const std::vector<Json>& rows) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    for (const Json& row : rows) out << row.dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorKind::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace detail

class Repository {
 public:
  // Opens (creating if needed) the repository at `root` and loads all four
  // stores. Throws kIo when the stores are unreadable or inconsistent.
  explicit Repository(std::filesystem::path root) : layout_{std::move(root)} {
    std::error_code ec;
    std::filesystem::create_directories(layout_.root_path, ec);
    if (ec || !std::filesystem::is_directory(layout_.root_path))
      throw Error(ErrorKind::kIo, "cannot open repository root " +
                                      layout_.root_path.string());
    models_ = load();
  }

  Repository(const Repository&) = delete;
  Repository& operator=(const Repository&) = delete;

  const RepositoryLayout& layout() const { return layout_; }

  std::string add_model(const ModelRecord& record) {
    check_valid(record);
    std::unique_lock lock(mu_);
    if (find(record.id) != models_.end())
      throw Error(ErrorKind::kConflict, "model '" + record.id + "' already exists",
                  Json{{"id", record.id}});
    std::vector<ModelRecord> next = models_;
    next.push_back(record);
    commit(std::move(next));
    return record.id;
  }

  // Replaces an existing record with the same id.
  void replace_model(const ModelRecord& record) {
    check_valid(record);
    std::unique_lock lock(mu_);
    auto it = find(record.id);
    if (it == models_.end()) throw not_found(record.id);
    std::vector<ModelRecord> next = models_;
    next[static_cast<std::size_t>(it - models_.begin())] = record;
    commit(std::move(next));
  }

  ModelRecord get_model(std::string_view id) const {
    std::shared_lock lock(mu_);
    auto it = find(id);
    if (it == models_.end()) throw not_found(id);
    return *it;
  }

  bool contains(std::string_view id) const {
    std::shared_lock lock(mu_);
    return find(id) != models_.end();
  }

  // Insertion order.
  std::vector<ModelRecord> list_models() const {
    std::shared_lock lock(mu_);
    return models_;
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return models_.size();
  }

  ModelRecord remove_model(std::string_view id) {
    std::unique_lock lock(mu_);
    auto it = find(id);
    if (it == models_.end()) throw not_found(id);
    ModelRecord removed = *it;
    std::vector<ModelRecord> next;
    next.reserve(models_.size() - 1);
    for (const ModelRecord& m : models_)
      if (m.id != id) next.push_back(m);
    commit(std::move(next));
    return removed;
  }

  std::vector<Triple> export_triples(std::string_view id) const {
    return record_triples(get_model(id));
  }

  // Re-reads the stores from disk, discarding the in-memory view.
  void reload() {
    std::unique_lock lock(mu_);
    models_ = load();
  }

 private:
  static Error not_found(std::string_view id) {
    return Error(ErrorKind::kNotFound, "no model with id '" + std::string(id) + "'",
                 Json{{"id", std::string(id)}});
  }

  static void check_valid(const ModelRecord& record) {
    ValidationResult v = validate_model(record);
    if (v.ok()) return;
    Json detail = Json::array();
    for (const Violation& x : v.violations)
      detail.push_back(Json{{"field", x.field}, {"rule", x.rule}});
    throw Error(ErrorKind::kValidation, "model '" + record.id + "' failed validation",
                Json{{"violations", detail}});
  }

  std::vector<ModelRecord>::const_iterator find(std::string_view id) const {
    return std::find_if(models_.begin(), models_.end(),
                        [&](const ModelRecord& m) { return m.id == id; });
  }

  void commit(std::vector<ModelRecord> next) {
    std::vector<Json> dln, client, server, perf;
    for (const ModelRecord& r : next) {
      dln.push_back(detail::with_id_first(r.id, dln_to_json(r.dln)));
      client.push_back(detail::with_id_first(r.id, device_to_json(r.device)));
      server.push_back(detail::with_id_first(r.id, cloud_to_json(r.cloud)));
      perf.push_back(detail::model_performance_row(r));
    }
    detail::write_store_atomically(layout_.dln_params(), dln);
    detail::write_store_atomically(layout_.client_config(), client);
    detail::write_store_atomically(layout_.server_config(), server);
    detail::write_store_atomically(layout_.model_performance(), perf);
    models_ = std::move(next);
  }

  std::vector<ModelRecord> load() const {
    auto index = [](detail::StoreRows rows) {
      std::map<std::string, Json> out;
      for (auto& [id, row] : rows) out.emplace(id, std::move(row));
      return out;
    };
    detail::StoreRows perf = detail::read_store(layout_.model_performance());
    auto dln = index(detail::read_store(layout_.dln_params()));
    auto client = index(detail::read_store(layout_.client_config()));
    auto server = index(detail::read_store(layout_.server_config()));

    if (dln.size() != perf.size() || client.size() != perf.size() ||
        server.size() != perf.size())
      throw Error(ErrorKind::kIo, "repository stores disagree on the set of model ids");

    std::vector<ModelRecord> models;
    models.reserve(perf.size());
    for (const auto& [id, row] : perf) {
      auto d = dln.find(id);
      auto c = client.find(id);
      auto s = server.find(id);
      if (d == dln.end() || c == client.end() || s == server.end())
        throw Error(ErrorKind::kIo,
                    "model '" + id + "' is missing from one of the repository stores");
      try {
        ModelRecord r;
        model_fields_from_json(row, r);
        r.dln = dln_from_json(d->second);
        r.device = device_from_json(c->second);
        r.cloud = cloud_from_json(s->second);
        models.push_back(std::move(r));
      } catch (const Error& e) {
        throw Error(ErrorKind::kIo, "corrupt row for model '" + id + "': " + e.what());
      }
    }
    return models;
  }

  RepositoryLayout layout_;
  mutable std::shared_mutex mu_;
  std::vector<ModelRecord> models_;
};

}  // namespace dlom
