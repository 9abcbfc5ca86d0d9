#include <doctest.h>

#include <future>
#include <thread>

#include <httplib.h>

#include "concore/service.hpp"
#include "support.hpp"

using namespace concore;
using nlohmann::json;

namespace {

struct ServiceRig {
  std::shared_ptr<Engine> engine;
  std::unique_ptr<Service> service;

  explicit ServiceRig(std::shared_ptr<ModelBackend> backend) {
    engine = std::make_shared<Engine>(testing::shipped_interpreter(), std::move(backend),
                                      std::make_shared<ConceptStore>(), std::make_shared<IdSource>(42));
    service = std::make_unique<Service>(engine, std::make_shared<LogicalClock>(default_epoch()), EngineConfig{});
  }

  std::string open(const json& config = json::object()) {
    const auto r = service->dispatch("POST", "/sessions", json{{"user_id", "dog-owner"}, {"config", config}}.dump());
    REQUIRE(r.status == 201);
    return r.json()["session_id"].get<std::string>();
  }

  HttpResult turn(const std::string& sid, const std::string& instruction) {
    return service->dispatch("POST", "/sessions/" + sid + "/turns", json{{"instruction", instruction}}.dump());
  }
};

std::shared_ptr<ModelBackend> dog_mock() {
  const auto sc = testing::shipped_scenario("appendix_3_2");
  return std::make_shared<MockBackend>(testing::shipped_templates().with_overrides(sc.mock_templates));
}

}  // namespace

TEST_SUITE("service_api") {
  TEST_CASE("create session") {
    ServiceRig rig(dog_mock());
    const auto ok = rig.service->dispatch("POST", "/sessions", R"({"user_id": "u"})");
    CHECK(ok.status == 201);
    CHECK(ok.json()["session_id"].is_string());
    CHECK(rig.service->dispatch("POST", "/sessions", R"({"user_id": "u", "config": {"theta": 1.5}})").status == 400);
    CHECK(rig.service->dispatch("POST", "/sessions", R"({})").status == 400);
    CHECK(rig.service->dispatch("POST", "/sessions", R"({"user_id": ""})").status == 400);
    CHECK(rig.service->dispatch("POST", "/sessions", "{not json").status == 400);
    CHECK(rig.service->dispatch("POST", "/sessions",
                                R"({"user_id": "u", "config": {"packet_budget": 100, "summary_budget": 200}})")
              .status == 400);
    CHECK(rig.service->dispatch("GET", "/sessions", "").status == 405);
  }

  TEST_CASE("turns") {
    ServiceRig rig(dog_mock());
    const auto sid = rig.open();
    CHECK(rig.turn(sid, "What are some good dog breeds for small children?").status == 200);
    const auto r = rig.turn(sid, "We live in an apartment, and shedding is a concern.");
    REQUIRE(r.status == 200);
    const auto body = r.json();
    CHECK(body["turn_index"] == 2);
    CHECK(body["operator_id"] == "HIGHLIGHT_CONSTRAINTS");
    CHECK(body["topic_decision"]["kind"] == "continue");
    CHECK(body["concept_after"]["constraints"] == json::parse(R"([["housing","apartment-friendly"],["coat","low shedding"]])"));
    CHECK(body["packet"]["token_count"].get<int>() > 0);
    CHECK(body["failed"] == false);

    CHECK(rig.turn(sid, "").status == 400);
    CHECK(rig.turn(sid, "   ").status == 400);
    CHECK(rig.service->dispatch("POST", "/sessions/" + sid + "/turns", R"({"text": "x"})").status == 400);
    CHECK(rig.turn("missing", "hello").status == 404);
    CHECK(rig.service->dispatch("GET", "/nowhere", "").status == 404);
  }

  TEST_CASE("state document follows topic switches and reactivation") {
    ServiceRig rig(dog_mock());
    const auto sid = rig.open();
    const auto fresh = rig.service->dispatch("GET", "/sessions/" + sid + "/state", "").json();
    CHECK(fresh["active_concept"].is_null());
    CHECK(fresh["dormant_concepts"].empty());

    rig.turn(sid, "What are some good dog breeds for small children?");
    rig.turn(sid, "We live in an apartment, and shedding is a concern.");
    rig.turn(sid, "Compare those two.");
    const auto dog_id = rig.service->inspect(sid).json()["active_concept"]["concept_id"].get<std::string>();
    rig.turn(sid, "Switching gears—can you explain quantum entanglement?");

    const auto switched = rig.service->dispatch("GET", "/sessions/" + sid + "/state", "").json();
    REQUIRE(switched["dormant_concepts"].size() == 1);
    CHECK(switched["dormant_concepts"][0]["concept_id"] == dog_id);
    CHECK(switched["dormant_concepts"][0]["status"] == "dormant");
    const auto physics_id = switched["active_concept"]["concept_id"].get<std::string>();
    CHECK(physics_id != dog_id);
    CHECK(switched["active_concept"]["task_summary"].get<std::string>().find("quantum") != std::string::npos);

    const auto back = rig.service->dispatch("POST", "/sessions/" + sid + "/reactivate/" + dog_id, "");
    REQUIRE(back.status == 200);
    const auto doc = back.json();
    CHECK(doc["active_concept"]["concept_id"] == dog_id);
    CHECK(doc["active_concept"]["status"] == "active");
    REQUIRE(doc["dormant_concepts"].size() == 1);
    CHECK(doc["dormant_concepts"][0]["concept_id"] == physics_id);
    CHECK(doc["active_concept"].dump().find("Poodle, Miniature Schnauzer") != std::string::npos);
    CHECK(rig.service->inspect(sid).body == back.body);

    CHECK(rig.service->dispatch("POST", "/sessions/" + sid + "/reactivate/nope", "").status == 404);
  }

  TEST_CASE("stats endpoint") {
    ServiceRig rig(dog_mock());
    const auto sid = rig.open(json{{"shadow_baseline", true}});
    rig.turn(sid, "Explain photosynthesis.");
    rig.turn(sid, "How does light matter?");
    const auto stats = rig.service->dispatch("GET", "/sessions/" + sid + "/stats", "").json();
    CHECK(stats["rows"].size() == 2);
    CHECK(stats["shadow_baseline"] == true);

    CHECK(rig.service->dispatch("GET", "/sessions/" + sid + "/stats?source=table1", "").status == 404);
    rig.service->set_reference_replay(testing::shipped_scenario("table1_replay").per_turn);
    const auto ref = rig.service->dispatch("GET", "/sessions/" + sid + "/stats?source=table1", "");
    REQUIRE(ref.status == 200);
    CHECK(ref.json()["rows"][9]["cumulative_savings_pct"].get<double>() == doctest::Approx(42.2));
    CHECK(rig.service->dispatch("GET", "/sessions/" + sid + "/stats?source=bogus", "").status == 400);
  }

  TEST_CASE("operators endpoint") {
    ServiceRig rig(dog_mock());
    const auto r = rig.service->dispatch("GET", "/operators", "");
    REQUIRE(r.status == 200);
    CHECK(r.json()["operators"].size() == 40);
  }

  TEST_CASE("backend failure maps to 502 with the failed turn") {
    ServiceRig rig(std::make_shared<testing::FailingBackend>());
    const auto sid = rig.open();
    const auto r = rig.turn(sid, "We live in an apartment, and shedding is a concern.");
    CHECK(r.status == 502);
    const auto body = r.json();
    CHECK(body["failed"] == true);
    CHECK(body["error"].get<std::string>().find("upstream unavailable") != std::string::npos);
    CHECK(rig.service->inspect(sid).json()["turn_counter"] == 1);
  }

  TEST_CASE("concurrent turn on one session gets 409") {
    auto gate = std::make_shared<testing::GateBackend>(std::make_shared<MockBackend>(testing::shipped_templates()));
    ServiceRig rig(gate);
    const auto sid = rig.open();
    auto first = std::async(std::launch::async, [&] { return rig.turn(sid, "Explain photosynthesis."); });
    gate->wait_entered();
    CHECK(rig.turn(sid, "And respiration?").status == 409);
    CHECK(rig.service->dispatch("POST", "/sessions/" + sid + "/reactivate/x", "").status == 409);
    CHECK(rig.service->inspect(sid).status == 200);  // readers are not blocked
    gate->release();
    CHECK(first.get().status == 200);
    CHECK(rig.turn(sid, "And respiration?").status == 200);
  }

  TEST_CASE("inspect equals the turn response's concept") {
    ServiceRig rig(dog_mock());
    const auto sid = rig.open();
    const auto r = rig.turn(sid, "What are some good dog breeds for small children?").json();
    CHECK(rig.service->inspect(sid).json()["active_concept"] == r["concept_after"]);
  }

  TEST_CASE("HTTP round trip") {
    ServiceRig rig(dog_mock());
    httplib::Server server;
    bind_routes(server, *rig.service);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto created = client.Post("/sessions", R"({"user_id": "web"})", "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    const auto sid = json::parse(created->body)["session_id"].get<std::string>();
    auto turn = client.Post("/sessions/" + sid + "/turns", R"({"instruction": "Explain photosynthesis."})",
                            "application/json");
    REQUIRE(turn);
    CHECK(turn->status == 200);
    CHECK(json::parse(turn->body)["operator_id"] == "EXPLAIN");
    auto state = client.Get("/sessions/" + sid + "/state");
    REQUIRE(state);
    CHECK(json::parse(state->body)["turn_counter"] == 1);
    rig.service->set_reference_replay(testing::shipped_scenario("table1_replay").per_turn);
    auto ref = client.Get("/sessions/" + sid + "/stats?source=table1");
    REQUIRE(ref);
    CHECK(ref->status == 200);
    auto missing = client.Get("/sessions/nope/state");
    REQUIRE(missing);
    CHECK(missing->status == 404);

    server.stop();
    th.join();
  }
}
