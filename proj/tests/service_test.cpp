#include "dlom/service.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "service_harness.hpp"
#include "test_support.hpp"

namespace dlom {
namespace {

using testing::acceptance_fixture;
using testing::ServiceHarness;

Json medical_query_body() { return Json{{"query", testing::kMedicalQuery}}; }

Json example_comparisons_json() {
  Json out = Json::array();
  for (const PairwiseComparison& c : testing::example_comparisons())
    out.push_back(comparison_to_json(c));
  return out;
}

std::string store_digest(const std::filesystem::path& root) {
  std::string all;
  for (const auto& p : RepositoryLayout{root}.stores()) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    all += p.filename().string() + ":" + ss.str() + "\n";
  }
  return std::to_string(std::hash<std::string>{}(all)) + "/" + std::to_string(all.size());
}

void expect_api_error(const ServiceHarness::Reply& r, int status, const std::string& code) {
  EXPECT_EQ(r.status, status) << r.raw;
  ASSERT_TRUE(r.body.is_object()) << r.raw;
  EXPECT_EQ(r.body["code"], code) << r.raw;
  EXPECT_TRUE(r.body["message"].is_string());
}

TEST(ServiceTest, EmptyRepositoryListsNothing) {
  ServiceHarness h;
  auto r = h.get("/models");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body, Json::array());
}

TEST(ServiceTest, ModelCrud) {
  ServiceHarness h;
  Json rec = record_to_json(testing::fig8b_model());
  auto created = h.post("/models", rec);
  EXPECT_EQ(created.status, 201);
  EXPECT_EQ(created.body, rec);
  EXPECT_EQ(h.get("/models/abc-skin-cancer").body, rec);
  expect_api_error(h.post("/models", rec), 409, "conflict");

  Json bad = rec;
  bad["id"] = "bad";
  bad["num_iot_devices"] = 0;
  auto rejected = h.post("/models", bad);
  expect_api_error(rejected, 400, "bad_request");
  EXPECT_EQ(rejected.body["detail"]["violations"][0]["rule"], "num_iot_devices ≥ 1");

  auto triples = h.get("/models/abc-skin-cancer/triples");
  EXPECT_EQ(triples.status, 200);
  EXPECT_NE(triples.raw.find("<urn:dlom:model/application_area> \"Medical\" ."), std::string::npos);

  EXPECT_EQ(h.del("/models/abc-skin-cancer").status, 200);
  expect_api_error(h.get("/models/abc-skin-cancer"), 404, "not_found");
  expect_api_error(h.del("/models/abc-skin-cancer"), 404, "not_found");
}

TEST(ServiceTest, MalformedBodiesAreBadRequests) {
  ServiceHarness h;
  auto r = h.client().Post("/api/v1/models", "{not json", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(Json::parse(r->body)["code"], "bad_request");
  expect_api_error(h.post("/query", Json{{"q", 1}}), 400, "bad_request");
  auto syntax = h.post("/query", Json{{"query", "SELECT * WHERE {"}});
  expect_api_error(syntax, 400, "bad_request");
  EXPECT_EQ(syntax.body["detail"]["kind"], "syntax");
  EXPECT_TRUE(syntax.body["detail"].contains("line"));
}

TEST(ServiceTest, UnknownRouteIsApiError) {
  ServiceHarness h;
  expect_api_error(h.get("/nothing-here"), 404, "not_found");
}

TEST(ServiceTest, MedicalQueryReturnsThree) {
  ServiceHarness h(acceptance_fixture());
  auto r = h.post("/query", medical_query_body());
  ASSERT_EQ(r.status, 200) << r.raw;
  ASSERT_EQ(r.body["models"].size(), 3u);
  EXPECT_EQ(r.body["models"][0]["id"], "med-a");
  EXPECT_EQ(r.body["canonical"],
            R"(SELECT * WHERE { model.application_area = "Medical" ; model.num_iot_devices >= 10 ; model.total_cost <= 14000 })");
}

TEST(ServiceTest, EffectsEndpoint) {
  ServiceHarness h;
  auto r = h.get("/effects");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body, effect_matrix_to_json());
}

TEST(ServiceTest, ChooseInCreatedIsProtocolError) {
  ServiceHarness h;
  auto s = h.post("/sessions");
  ASSERT_EQ(s.status, 201);
  std::string id = s.body["id"];
  auto r = h.post("/sessions/" + id + "/choose", Json{{"model_id", "x"}});
  expect_api_error(r, 409, "protocol_error");
  EXPECT_EQ(r.body["detail"]["state"], "Created");
  EXPECT_NE(r.body["message"].get<std::string>().find("Created"), std::string::npos);
  expect_api_error(h.get("/sessions/nope"), 404, "not_found");
}

TEST(ServiceTest, FullSessionToRankingAndChoose) {
  ServiceHarness h(acceptance_fixture());
  std::string id = h.post("/sessions").body["id"];
  std::string base = "/sessions/" + id;
  EXPECT_EQ(h.post(base + "/criteria", medical_query_body()).body["state"], "CriteriaCollected");
  auto q = h.post(base + "/run-query");
  EXPECT_EQ(q.body["state"], "Queried");
  EXPECT_EQ(q.body["candidates"].size(), 3u);
  expect_api_error(h.get(base + "/ranking"), 409, "protocol_error");
  auto e = h.post(base + "/comparisons", example_comparisons_json());
  ASSERT_EQ(e.status, 200) << e.raw;
  EXPECT_EQ(e.body["state"], "Elicited");

  auto r = h.get(base + "/ranking");
  ASSERT_EQ(r.status, 200) << r.raw;
  EXPECT_EQ(r.body["state"], "Ranked");
  ASSERT_EQ(r.body["ranking"].size(), 3u);
  EXPECT_EQ(r.body["ranking"][0]["id"], "med-a");
  EXPECT_EQ(r.body["ranking"][0]["contributions"].size(), 6u);
  double w_sum = 0;
  for (const auto& [k, v] : r.body["weights"].items()) w_sum += v.get<double>();
  EXPECT_NEAR(w_sum, 1.0, 1e-5);
  const Json& card = r.body["top_model"];
  ASSERT_EQ(card.size(), 16u);
  for (const auto& [k, v] : card.items()) EXPECT_FALSE(v.is_null()) << k;
  EXPECT_EQ(h.get(base + "/ranking").body, r.body);

  std::string before = store_digest(h.root());
  auto chosen = h.post(base + "/choose", Json{{"model_id", "med-a"}});
  EXPECT_EQ(chosen.status, 200);
  EXPECT_EQ(chosen.body["state"], "Closed");
  EXPECT_EQ(chosen.body["outcome"]["kind"], "chosen");
  EXPECT_EQ(store_digest(h.root()), before);
  expect_api_error(h.post(base + "/abandon"), 409, "protocol_error");
}

TEST(ServiceTest, BuildNewPersistsDraft) {
  ServiceHarness h(acceptance_fixture());
  std::string base = "/sessions/" + h.post("/sessions").body["id"].get<std::string>();
  h.post(base + "/criteria", medical_query_body());
  h.post(base + "/run-query");
  auto built = h.post(base + "/build-new", Json{{"max_methods", 2}});
  ASSERT_EQ(built.status, 201) << built.raw;
  EXPECT_EQ(built.body["session"]["state"], "Closed");
  EXPECT_EQ(built.body["model"]["provenance"], "synthesized");
  EXPECT_LE(built.body["model"]["optimization"]["methods"].size(), 2u);
  std::string draft_id = built.body["model"]["id"];
  EXPECT_EQ(h.get("/models/" + draft_id).status, 200);
  EXPECT_EQ(h.get("/models").body.size(), 7u);
  expect_api_error(h.post(base + "/build-new"), 409, "protocol_error");
}

TEST(ServiceTest, ReadOnlyRejectsMutations) {
  ServiceHarness h(acceptance_fixture(), /*read_only=*/true);
  expect_api_error(h.post("/models", record_to_json(testing::fig8b_model())), 400, "bad_request");
  expect_api_error(h.del("/models/med-a"), 400, "bad_request");
  EXPECT_EQ(h.get("/models").body.size(), 6u);
  EXPECT_EQ(h.post("/query", medical_query_body()).status, 200);
}

TEST(ServiceTest, ConcurrentPostsOfSameIdHaveOneWinner) {
  ServiceHarness h;
  std::string body = record_to_json(testing::fig8b_model()).dump();
  std::atomic<int> created{0}, conflicts{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      httplib::Client c("127.0.0.1", h.service().port());
      auto r = c.Post("/api/v1/models", body, "application/json");
      if (r && r->status == 201) ++created;
      if (r && r->status == 409) ++conflicts;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(created.load(), 1);
  EXPECT_EQ(conflicts.load(), 7);
}

TEST(ServiceTest, GetRequestsDoNotTouchStores) {
  ServiceHarness h(acceptance_fixture());
  std::string before = store_digest(h.root());
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      httplib::Client c("127.0.0.1", h.service().port());
      for (int i = 0; i < 25; ++i) {
        c.Get("/api/v1/models");
        c.Get("/api/v1/models/med-a");
        c.Get("/api/v1/models/med-b/triples");
        c.Get("/api/v1/effects");
        c.Post("/api/v1/query", medical_query_body().dump(), "application/json");
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(store_digest(h.root()), before);
}

TEST(ServiceTest, PortInUseFailsToStart) {
  ServiceHarness h;
  testing::TempDir dir;
  ServiceConfig config;
  config.port = h.service().port();
  config.repository_root = dir.path();
  Service second(config);
  try {
    second.start();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(ServiceTest, CardHasSixteenFields) {
  Json card = model_card_json(testing::fig8b_model());
  EXPECT_EQ(card.size(), 16u);
  EXPECT_EQ(card["total_cost"], "12315.00");
  EXPECT_EQ(card["cost_per_device"], "785.12");
  EXPECT_EQ(card["num_iot_devices"], 6);
  EXPECT_EQ(card["dln"], "RESNet-50");
  EXPECT_EQ(card["accuracy_pct"], 94.356);
  EXPECT_EQ(card["optimization_methods"], Json::parse(R"(["Pruning","Quantization"])"));
}

}  // namespace
}  // namespace dlom
