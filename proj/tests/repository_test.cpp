#include "dlom/repository.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "dlom/device_xml.hpp"
#include "dlom/triples.hpp"
#include "test_support.hpp"

namespace dlom {
namespace {

using testing::fig8b_model;
using testing::TempDir;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kIo;
}

TEST(RepositoryTest, AddThenGetIsIdentity) {
  TempDir dir;
  Repository repo(dir.path());
  EXPECT_EQ(repo.add_model(fig8b_model()), "abc-skin-cancer");
  EXPECT_EQ(repo.get_model("abc-skin-cancer"), fig8b_model());
}

TEST(RepositoryTest, DuplicateIdIsConflict) {
  TempDir dir;
  Repository repo(dir.path());
  repo.add_model(fig8b_model());
  EXPECT_EQ(kind_of([&] { repo.add_model(fig8b_model()); }), ErrorKind::kConflict);
  EXPECT_EQ(repo.size(), 1u);
}

TEST(RepositoryTest, InvalidRecordLeavesStoresUntouched) {
  TempDir dir;
  Repository repo(dir.path());
  repo.add_model(fig8b_model());
  std::vector<std::string> before;
  for (const auto& p : repo.layout().stores()) before.push_back(slurp(p));

  ModelRecord bad = fig8b_model();
  bad.id = "bad";
  bad.num_iot_devices = 0;
  try {
    repo.add_model(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
    EXPECT_EQ(e.detail()["violations"][0]["rule"], "num_iot_devices ≥ 1");
  }
  std::vector<std::string> after;
  for (const auto& p : repo.layout().stores()) after.push_back(slurp(p));
  EXPECT_EQ(before, after);
  EXPECT_FALSE(repo.contains("bad"));
}

TEST(RepositoryTest, ListRemoveAndNotFound) {
  TempDir dir;
  Repository repo(dir.path());
  EXPECT_TRUE(repo.list_models().empty());
  for (const char* id : {"a", "b", "c"}) {
    ModelRecord m = fig8b_model();
    m.id = id;
    repo.add_model(m);
  }
  EXPECT_EQ(repo.remove_model("b").id, "b");
  std::vector<ModelRecord> left = repo.list_models();
  ASSERT_EQ(left.size(), 2u);
  EXPECT_EQ(left[0].id, "a");
  EXPECT_EQ(left[1].id, "c");
  EXPECT_EQ(kind_of([&] { repo.get_model("b"); }), ErrorKind::kNotFound);
  EXPECT_EQ(kind_of([&] { repo.remove_model("b"); }), ErrorKind::kNotFound);
}

TEST(RepositoryTest, StoreFilesSplitTheRecord) {
  TempDir dir;
  {
    Repository repo(dir.path());
    repo.add_model(fig8b_model());
  }
  for (const char* name : {"dln_params.jsonl", "client_config.jsonl", "server_config.jsonl",
                           "model_performance.jsonl"}) {
    std::string text = slurp(dir.path() / name);
    EXPECT_TRUE(text.starts_with(R"({"id":"abc-skin-cancer")")) << name << ": " << text;
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1) << name;
  }
  EXPECT_NE(slurp(dir.path() / "dln_params.jsonl").find("RESNet-50"), std::string::npos);
  EXPECT_NE(slurp(dir.path() / "client_config.jsonl").find("785.12"), std::string::npos);
  EXPECT_NE(slurp(dir.path() / "server_config.jsonl").find("Google TPU"), std::string::npos);
  std::string perf = slurp(dir.path() / "model_performance.jsonl");
  EXPECT_NE(perf.find("94.356"), std::string::npos);
  EXPECT_EQ(perf.find("RESNet-50"), std::string::npos);

  Repository reopened(dir.path());
  EXPECT_EQ(reopened.get_model("abc-skin-cancer"), fig8b_model());
}

TEST(RepositoryTest, MissingRowInOneStoreIsDetected) {
  TempDir dir;
  {
    Repository repo(dir.path());
    repo.add_model(fig8b_model());
  }
  std::ofstream(dir.path() / "server_config.jsonl", std::ios::trunc);
  EXPECT_EQ(kind_of([&] { Repository r(dir.path()); }), ErrorKind::kIo);
}

TEST(RepositoryTest, ReplaceKeepsPosition) {
  TempDir dir;
  Repository repo(dir.path());
  ModelRecord a = fig8b_model();
  a.id = "a";
  ModelRecord b = fig8b_model();
  b.id = "b";
  repo.add_model(a);
  repo.add_model(b);
  a.device.name = "Jetson Nano";
  repo.replace_model(a);
  EXPECT_EQ(repo.list_models()[0].device.name, "Jetson Nano");
  EXPECT_EQ(repo.list_models()[1].id, "b");
  ModelRecord ghost = fig8b_model();
  ghost.id = "ghost";
  EXPECT_EQ(kind_of([&] { repo.replace_model(ghost); }), ErrorKind::kNotFound);
}

TEST(RepositoryTest, RandomRecordsSurviveReload) {
  TempDir dir;
  testing::RecordGenerator gen(99);
  std::vector<ModelRecord> expected;
  {
    Repository repo(dir.path());
    for (int i = 0; i < 100; ++i) {
      expected.push_back(gen.record("m" + std::to_string(i)));
      repo.add_model(expected.back());
    }
  }
  Repository reopened(dir.path());
  for (const ModelRecord& m : expected) EXPECT_EQ(reopened.get_model(m.id), m);
  EXPECT_EQ(reopened.list_models(), expected);
}

// Every id appears exactly once in every store.
void expect_referential_integrity(const RepositoryLayout& layout,
                                  const std::set<std::string>& ids) {
  for (const auto& path : layout.stores()) {
    std::multiset<std::string> seen;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) seen.insert(Json::parse(line)["id"].get<std::string>());
    EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()), ids) << path;
    EXPECT_EQ(seen.size(), ids.size()) << path;
  }
}

TEST(RepositoryTest, IntegrityUnderRandomAddRemove) {
  TempDir dir;
  Repository repo(dir.path());
  testing::RecordGenerator gen(5);
  std::map<std::string, ModelRecord> model;
  for (int step = 0; step < 300; ++step) {
    std::string id = "id" + std::to_string(gen.integer(0, 30));
    if (gen.coin()) {
      bool fresh = !model.contains(id);
      ModelRecord r = gen.record(id);
      if (fresh) {
        repo.add_model(r);
        model[id] = r;
      } else {
        EXPECT_EQ(kind_of([&] { repo.add_model(r); }), ErrorKind::kConflict);
      }
    } else if (model.contains(id)) {
      EXPECT_EQ(repo.remove_model(id), model[id]);
      model.erase(id);
    } else {
      EXPECT_EQ(kind_of([&] { repo.remove_model(id); }), ErrorKind::kNotFound);
    }
  }
  std::set<std::string> ids;
  for (const auto& [id, r] : model) ids.insert(id);
  expect_referential_integrity(repo.layout(), ids);
  Repository reopened(dir.path());
  EXPECT_EQ(reopened.size(), model.size());
  for (const auto& [id, r] : model) EXPECT_EQ(reopened.get_model(id), r);
}

TEST(RepositoryTest, ConcurrentAddsOfSameIdHaveOneWinner) {
  TempDir dir;
  Repository repo(dir.path());
  std::atomic<int> ok{0}, conflicts{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      try {
        repo.add_model(fig8b_model());
        ++ok;
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kConflict) ++conflicts;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 1);
  EXPECT_EQ(conflicts.load(), 7);
}

// ---------------------------------------------------------------------------
// Triples
// ---------------------------------------------------------------------------

TEST(TriplesTest, ScalarFieldMapping) {
  TempDir dir;
  Repository repo(dir.path());
  ModelRecord m = fig8b_model();
  m.id = "m1";
  repo.add_model(m);
  std::vector<Triple> t = repo.export_triples("m1");
  Triple expected{"dlom:model/m1", "dlom:model/application_area", "Medical"};
  EXPECT_NE(std::find(t.begin(), t.end(), expected), t.end());
}

TEST(TriplesTest, SetValuedFieldsExpand) {
  std::vector<Triple> t = record_triples(fig8b_model());
  auto count = [&](std::string_view predicate) {
    return std::count_if(t.begin(), t.end(),
                         [&](const Triple& x) { return x.predicate == predicate; });
  };
  EXPECT_EQ(count("dlom:cloud/security_protocols"), 2);
  EXPECT_EQ(count("dlom:optimization/methods"), 2);
  EXPECT_EQ(count("dlom:dln/hyperparameters"), 2);
}

TEST(TriplesTest, CountMatchesFieldCount) {
  // Scalars: model 8 (id, created_year, rating_aggregate, application_area,
  // purpose, total_cost, num_iot_devices, provenance) + rating 6 + cloud 5 +
  // device 7 + dln 7 + optimization 1 + performance 7 = 41.
  // Set expansions: 2 protocols + 2 hyperparameters + 2 methods = 6.
  std::vector<Triple> t = record_triples(fig8b_model());
  EXPECT_EQ(t.size(), 47u);
  for (const Triple& x : t) EXPECT_TRUE(x.subject.starts_with("dlom:model/"));

  ModelRecord draft = fig8b_model();
  draft.performance.reset();
  EXPECT_EQ(record_triples(draft).size(), 40u);
}

TEST(TriplesTest, DeterministicAndSorted) {
  std::vector<Triple> a = record_triples(fig8b_model());
  std::vector<Triple> b = record_triples(fig8b_model());
  EXPECT_EQ(a, b);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end(), [](const Triple& x, const Triple& y) {
    return std::tie(x.predicate, x.object) < std::tie(y.predicate, y.object);
  }));
}

TEST(TriplesTest, NTriplesRendering) {
  std::vector<Triple> t{{"dlom:model/m1", "dlom:model/purpose", "say \"hi\"\\"}};
  EXPECT_EQ(to_ntriples(t),
            "<urn:dlom:model/m1> <urn:dlom:model/purpose> \"say \\\"hi\\\"\\\\\" .\n");
}

TEST(TriplesTest, UnknownIdIsNotFound) {
  TempDir dir;
  Repository repo(dir.path());
  EXPECT_EQ(kind_of([&] { repo.export_triples("nope"); }), ErrorKind::kNotFound);
}

// ---------------------------------------------------------------------------
// Device XML
// ---------------------------------------------------------------------------

constexpr std::string_view kDeviceFragment =
    "<End_devices_Specs> <Name>Raspberry pi 3</Name> <price>70</price> <DLFramework> "
    "MobileNet V3</DLFramework> <Memory>8 GB</Memory> <Camera>16 MP </Camera><CPU> </CPU> "
    "</End_devices_Specs>";

TEST(DeviceXmlTest, VerbatimFragment) {
  DeviceXmlResult r = parse_device_xml(kDeviceFragment);
  EXPECT_EQ(r.device.name, "Raspberry pi 3");
  EXPECT_EQ(r.device.price, Money::from_cents(7000));
  EXPECT_EQ(r.device.dl_framework, "MobileNet V3");
  EXPECT_EQ(r.device.memory_mb, 8192);
  EXPECT_EQ(r.device.camera_mp, 16.0);
  EXPECT_EQ(r.device.cpu, "");
  EXPECT_TRUE(r.warnings.empty());
}

TEST(DeviceXmlTest, EmptyElementWarnsForEveryTag) {
  DeviceXmlResult r = parse_device_xml("<End_devices_Specs></End_devices_Specs>");
  EXPECT_EQ(r.device, EndDeviceSpec{});
  EXPECT_EQ(r.warnings.size(), 6u);
}

TEST(DeviceXmlTest, UnclosedTagNamesTheTag) {
  try {
    parse_device_xml("<End_devices_Specs><Name>Pi</End_devices_Specs>");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSyntax);
    EXPECT_NE(std::string(e.what()).find("<Name>"), std::string::npos) << e.what();
    EXPECT_TRUE(e.detail().contains("line"));
  }
  try {
    parse_device_xml("<End_devices_Specs><Name>Pi</Name>");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("<End_devices_Specs>"), std::string::npos);
  }
}

TEST(DeviceXmlTest, UnknownTagsAndUnitsAreWarnings) {
  DeviceXmlResult r = parse_device_xml(
      "<?xml version=\"1.0\"?><End_devices_Specs><Name>Coral &amp; Co</Name><price>$129.99</price>"
      "<DLFramework>TFLite</DLFramework><Memory>4 bananas</Memory><Camera>5</Camera>"
      "<CPU>ARM</CPU><GPU>Edge TPU</GPU><Color>blue</Color></End_devices_Specs>");
  EXPECT_EQ(r.device.name, "Coral & Co");
  EXPECT_EQ(r.device.price.to_string(), "129.99");
  EXPECT_EQ(r.device.gpu, "Edge TPU");
  EXPECT_EQ(r.device.camera_mp, 5.0);
  EXPECT_EQ(r.device.memory_mb, 0);
  ASSERT_EQ(r.warnings.size(), 2u);
  EXPECT_NE(r.warnings[0].find("4 bananas"), std::string::npos);
  EXPECT_NE(r.warnings[1].find("Color"), std::string::npos);
}

TEST(DeviceXmlTest, WrongRootIsRejected) {
  EXPECT_THROW(parse_device_xml("<Device></Device>"), Error);
  EXPECT_THROW(parse_device_xml(""), Error);
}

}  // namespace
}  // namespace dlom
