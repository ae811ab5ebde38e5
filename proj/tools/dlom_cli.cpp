// dlom: command-line front end for the model repository, query language,
// preference elicitation, ranking and plan synthesis.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dlom/dlom.hpp"
#include "dlom/service.hpp"

namespace {

using dlom::Json;

struct Globals {
  std::string repo;
  bool pretty = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dlom::Error(dlom::ErrorKind::kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw dlom::Error(dlom::ErrorKind::kInvalidInput,
                      "malformed JSON in " + origin + ": " + e.what());
  }
}

// Inline JSON when the argument starts with '{' or '[', otherwise a path.
Json json_arg(const std::string& arg) {
  auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '['))
    return parse_json_text(arg, "argument");
  return parse_json_text(read_file(arg), arg);
}

void emit(const Globals& g, const Json& j) {
  std::cout << (g.pretty ? j.dump(2) : j.dump()) << '\n';
}

int cmd_ingest(const Globals& g, const std::string& file, const std::string& model_id) {
  dlom::Repository repo(g.repo);
  std::string ext = dlom::detail::lower(std::filesystem::path(file).extension().string());
  if (ext == ".xml") {
    if (model_id.empty())
      throw dlom::Error(dlom::ErrorKind::kInvalidInput,
                        "XML device fragments need --model-id to attach to");
    dlom::DeviceXmlResult parsed = dlom::parse_device_xml(read_file(file));
    dlom::ModelRecord record = repo.get_model(model_id);
    record.device = parsed.device;
    repo.replace_model(record);
    emit(g, Json{{"model_id", model_id},
                 {"device", dlom::device_to_json(parsed.device)},
                 {"warnings", parsed.warnings}});
    return 0;
  }
  Json doc = parse_json_text(read_file(file), file);
  Json added = Json::array();
  auto add_one = [&](const Json& j) { added.push_back(repo.add_model(dlom::record_from_json(j))); };
  if (doc.is_array())
    for (const Json& j : doc) add_one(j);
  else
    add_one(doc);
  emit(g, Json{{"added", added}});
  return 0;
}

int cmd_query(const Globals& g, const std::string& text) {
  dlom::Repository repo(g.repo);
  dlom::query::Query q = dlom::query::parse_query(text);
  Json out = Json::array();
  for (const dlom::ModelRecord& m : dlom::query::evaluate(q, repo.list_models()))
    out.push_back(dlom::record_to_json(m));
  emit(g, out);
  return 0;
}

int cmd_rank(const Globals& g, const std::string& weights_arg, const std::string& query_text) {
  dlom::Repository repo(g.repo);
  dlom::ObjectiveWeights w = dlom::weights_from_json(json_arg(weights_arg));
  dlom::query::Query q =
      query_text.empty() ? dlom::query::Query{} : dlom::query::parse_query(query_text);
  Json out = Json::array();
  for (const dlom::RankedModel& r :
       dlom::rank_models(w, dlom::query::evaluate(q, repo.list_models())))
    out.push_back(dlom::ranked_to_json(r));
  emit(g, out);
  return 0;
}

int cmd_elicit(const std::string& file) {
  auto comparisons = dlom::comparisons_from_json(json_arg(file));
  std::cout << dlom::weights_to_fixed_text(dlom::derive_weights(comparisons)) << '\n';
  return 0;
}

int cmd_synthesize(const Globals& g, const std::string& weights_arg,
                   std::optional<int> max_methods) {
  dlom::ObjectiveWeights w = dlom::weights_from_json(json_arg(weights_arg));
  emit(g, dlom::synthesis_to_json(dlom::synthesize(w, max_methods)));
  return 0;
}

int cmd_export_triples(const Globals& g, const std::string& id) {
  dlom::Repository repo(g.repo);
  std::cout << dlom::to_ntriples(repo.export_triples(id));
  return 0;
}

int cmd_serve(const Globals& g, int port, const std::string& host, bool read_only) {
  // Block termination signals before the server spawns worker threads so
  // they are delivered to sigwait below.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  dlom::ServiceConfig config;
  config.host = host;
  config.port = port;
  config.repository_root = g.repo;
  config.read_only = read_only;
  dlom::Service service(config);
  service.start();
  std::cerr << "dlom: serving " << g.repo << " on http://" << host << ":" << service.port()
            << dlom::kApiBase << (read_only ? " (read-only)" : "") << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  service.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dlom - DL-on-IoT optimization model management"};
  app.require_subcommand(1);

  Globals g;
  const char* env_repo = std::getenv("DLOM_REPO");
  g.repo = env_repo ? env_repo : "dlom-repo";
  app.add_option("--repo", g.repo, "Repository root (default: $DLOM_REPO or ./dlom-repo)");
  app.add_flag("--pretty", g.pretty, "Indent JSON output");

  std::string ingest_file, ingest_model_id;
  auto* ingest = app.add_subcommand("ingest", "Add models (JSON) or attach a device spec (XML)");
  ingest->add_option("file", ingest_file, "Model JSON (object or array) or device XML")
      ->required();
  ingest->add_option("--model-id", ingest_model_id, "Model receiving an XML device spec");

  std::string query_text;
  auto* query = app.add_subcommand("query", "Print models matching a query");
  query->add_option("text", query_text, "e.g. 'SELECT * WHERE { model.num_iot_devices >= 10 }'")
      ->required();

  std::string rank_weights, rank_query;
  auto* rank = app.add_subcommand("rank", "Rank models by weighted overall score");
  rank->add_option("--weights", rank_weights, "Weights JSON object or file")->required();
  rank->add_option("--query", rank_query, "Restrict ranking to matching models");

  std::string elicit_file;
  auto* elicit = app.add_subcommand("elicit", "Derive weights from pairwise comparisons");
  elicit->add_option("--comparisons", elicit_file, "JSON array of {more, less, intensity}")
      ->required();

  std::string synth_weights;
  std::optional<int> synth_max;
  auto* synth = app.add_subcommand("synthesize", "Best optimization-method set for weights");
  synth->add_option("--weights", synth_weights, "Weights JSON object or file")->required();
  synth->add_option("--max-methods", synth_max, "Upper bound on the number of methods")
      ->check(CLI::Range(0, 7));

  int serve_port = 8080;
  std::string serve_host = "127.0.0.1";
  bool serve_read_only = false;
  auto* serve = app.add_subcommand("serve", "Run the HTTP/JSON service");
  serve->add_option("--port", serve_port, "Listen port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", serve_host, "Listen address");
  serve->add_flag("--read-only", serve_read_only, "Disable mutating endpoints");

  std::string triples_id;
  auto* triples = app.add_subcommand("export-triples", "Print a model as N-Triples");
  triples->add_option("id", triples_id, "Model id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(g, ingest_file, ingest_model_id);
    if (*query) return cmd_query(g, query_text);
    if (*rank) return cmd_rank(g, rank_weights, rank_query);
    if (*elicit) return cmd_elicit(elicit_file);
    if (*synth) return cmd_synthesize(g, synth_weights, synth_max);
    if (*serve) return cmd_serve(g, serve_port, serve_host, serve_read_only);
    if (*triples) return cmd_export_triples(g, triples_id);
  } catch (const dlom::Error& e) {
    std::cerr << "dlom: " << to_string(e.kind()) << ": " << e.what() << '\n';
    if (!e.detail().is_null()) std::cerr << e.detail().dump() << '\n';
    return 1;
  }
  return 2;
}
