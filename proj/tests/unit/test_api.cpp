#include "remi/service/config.hpp"
#include "remi/service/http.hpp"

#include "support/api_client.hpp"
#include "support/engine_fixture.hpp"
#include "support/pdf_inspector.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>

#include <thread>

using namespace remi;
using remi::testing::ApiClient;
using remi::testing::RunningService;
using remi::testing::TempDir;

namespace {

service::ServiceConfig config_for(const TempDir& dir) {
    service::ServiceConfig c;
    c.data_dir = dir.path() / "data";
    c.providers = providers::parse_providers_config(json::object());
    return c;
}

const json kPingyao = {{"display_name", "Mei"},
                       {"gender", "female"},
                       {"age_band", "66-70"},
                       {"hometown", "Pingyao, Shanxi"},
                       {"relocation", "2 years"}};

const json kHarbin = {{"display_name", "Jun"},
                      {"gender", "male"},
                      {"age_band", "72-76"},
                      {"hometown", {{"name", "Harbin"}, {"province", "Heilongjiang"}}},
                      {"relocation", 150}};

struct User {
    std::string id;
    ApiClient api;
};

User create_user(const RunningService& svc, const json& profile = kPingyao) {
    auto anon = svc.client();
    auto r = anon.post("/profiles", profile);
    REQUIRE(r.status == 201);
    auto j = r.json_body();
    return {j["profile"]["user_id"].get<std::string>(), svc.client(j["token"].get<std::string>())};
}

json wait_for_job(ApiClient& api, const std::string& job_id) {
    for (int i = 0; i < 500; ++i) {
        auto j = api.get("/jobs/" + job_id).json_body();
        auto status = j["status"].get<std::string>();
        if (status == "done" || status == "failed") return j;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    FAIL("job did not finish");
    return {};
}

std::string error_code(const testing::ApiResponse& r) { return r.json_body()["error"]["code"].get<std::string>(); }

}  // namespace

TEST_CASE("health reports the providers mode") {
    TempDir dir;
    RunningService svc(config_for(dir));
    auto r = svc.client().get("/health");
    CHECK(r.status == 200);
    CHECK(r.json_body() == json{{"status", "ok"}, {"providers_mode", "mock"}});
}

TEST_CASE("profile creation issues a token and validates input") {
    TempDir dir;
    RunningService svc(config_for(dir));
    auto anon = svc.client();

    auto ok = anon.post("/profiles", kPingyao);
    REQUIRE(ok.status == 201);
    auto body = ok.json_body();
    CHECK(body["profile"]["hometown"]["province"] == "Shanxi");
    CHECK(body["token"].get<std::string>().rfind("tok_", 0) == 0);

    auto bad = anon.post("/profiles", {{"gender", "female"}, {"age_band", "old"}, {"hometown", ""}});
    CHECK(bad.status == 422);
    CHECK(error_code(bad) == "validation_error");
    std::set<std::string> fields;
    auto bad_body = bad.json_body();
    for (const auto& f : bad_body["error"]["fields"]) fields.insert(f["field"].get<std::string>());
    CHECK(fields.count("age_band") == 1);
    CHECK(fields.count("hometown") == 1);

    auto malformed = anon.post_raw("/profiles", "{\"gender\": ", "application/json");
    CHECK(malformed.status == 400);
    CHECK(malformed.json_body()["error"]["fields"][0]["field"] == "body");
    CHECK(malformed.json_body()["error"]["fields"][0]["code"] == "malformed_json");

    auto array_body = anon.post_raw("/profiles", "[1,2]", "application/json");
    CHECK(array_body.status == 400);

    auto no_route = anon.get("/nowhere");
    CHECK(no_route.status == 404);
    CHECK(error_code(no_route) == "not_found");
}

TEST_CASE("requests need a valid token and stay within the caller's data") {
    TempDir dir;
    RunningService svc(config_for(dir));
    auto a = create_user(svc);
    auto b = create_user(svc, kHarbin);

    CHECK(svc.client().get("/sessions").status == 401);
    CHECK(svc.client("tok_forged").get("/sessions").status == 401);
    CHECK(svc.client("../../etc").get("/sessions").status == 401);

    auto session = a.api.post("/sessions", {{"mode", "in_town"}}).json_body();
    auto sid = session["session_id"].get<std::string>();
    CHECK(a.api.get("/sessions/" + sid).status == 200);
    CHECK(b.api.get("/sessions/" + sid).status == 403);
    CHECK(b.api.turn(sid, {{"text", "hello"}}).status == 403);
    CHECK(b.api.post("/sessions/" + sid + "/generation").status == 403);
    CHECK(b.api.get("/profiles/" + a.id).status == 403);
    CHECK(b.api.get("/profiles/" + a.id + "/storybook").status == 403);
    CHECK(b.api.get("/profiles/" + a.id + "/storybook/export").status == 403);
    CHECK(b.api.post("/profiles/" + a.id + "/storybook/entries", {{"material_id", "mat_x"}}).status == 403);
    CHECK(b.api.get("/profiles/" + b.id + "/storybook").status == 200);
    CHECK(b.api.get("/sessions").json_body().empty());
    CHECK(a.api.get("/sessions").json_body().size() == 1);
}

TEST_CASE("turn on an unknown or closed session") {
    TempDir dir;
    RunningService svc(config_for(dir));
    auto a = create_user(svc);
    auto unknown = a.api.turn("ses_missing", {{"text", "hello"}});
    CHECK(unknown.status == 404);
    CHECK(unknown.done["error"]["code"] == "not_found");

    auto sid = a.api.post("/sessions", {{"mode", "out_of_town"}}).json_body()["session_id"].get<std::string>();
    CHECK(a.api.turn(sid, json::object()).status == 422);
    CHECK(a.api.post("/sessions", {{"mode", "sideways"}}).status == 422);
    CHECK(a.api.post("/sessions/" + sid + "/close").status == 200);
    CHECK(a.api.turn(sid, {{"text", "hello"}}).status == 409);
    CHECK(a.api.post("/sessions/" + sid + "/generation").status == 409);
}

TEST_CASE("knowledge ingest and retrieval") {
    TempDir dir;
    RunningService svc(config_for(dir));
    auto a = create_user(svc);
    json docs = json::array();
    for (const auto& d : testing::kb50_documents()) docs.push_back(d);
    auto r = a.api.post("/profiles/" + a.id + "/knowledge", {{"documents", docs}});
    REQUIRE(r.status == 200);
    auto facts = r.json_body()["facts"];
    CHECK(facts.size() > 10);

    auto q = a.api.get("/profiles/" + a.id + "/knowledge?q=temple%20fair&k=3").json_body();
    REQUIRE(q["facts"].size() <= 3);
    REQUIRE(!q["facts"].empty());
    auto top = q["facts"][0]["text"].get<std::string>();
    CHECK((top.find("emple") != std::string::npos || top.find("fair") != std::string::npos));

    CHECK(a.api.post("/profiles/" + a.id + "/knowledge", {{"documents", json::array()}}).status == 422);
    CHECK(a.api.post("/profiles/" + a.id + "/knowledge", {{"titles", {"Pingyao"}}}).status == 412);
    CHECK(a.api.get("/profiles/" + a.id + "/knowledge?q=x&k=lots").status == 422);
}

TEST_CASE("turns stream as NDJSON and the offer arrives after the threshold") {
    TempDir dir;
    RunningService svc(config_for(dir));
    providers::MockChatScript script;
    script.replies = {"How lovely. Tell me more about the river.", "What did she cook?", "That sounds wonderful."};
    script.chunk_size = 6;
    svc.service->providers().mocks->chat->set_script(script);
    auto a = create_user(svc);
    auto sid = a.api.post("/sessions", {{"mode", "in_town"}}).json_body()["session_id"].get<std::string>();

    auto t1 = a.api.turn(sid, {{"text", "I grew up near a river"}});
    CHECK(t1.status == 200);
    CHECK(t1.deltas.size() > 1);
    CHECK(t1.text() == script.replies[0]);
    CHECK(t1.done["done"] == true);
    CHECK(t1.done["turn_index"] == 1);
    CHECK(t1.done["user_turn_index"] == 0);
    CHECK_FALSE(t1.done.contains("offer"));

    auto t2 = a.api.turn(sid, {{"text", "my grandmother took me there"}});
    CHECK_FALSE(t2.done.contains("offer"));
    auto t3 = a.api.turn(sid, {{"text", "we went to the temple fair every spring festival"}});
    REQUIRE(t3.done.contains("offer"));
    CHECK(t3.done["offer"]["turn_index"] == 6);
    CHECK(t3.done["readiness_score"].get<double>() >= 1.0);

    auto session = a.api.get("/sessions/" + sid).json_body();
    CHECK(session["transcript"].size() == 7);
    CHECK(session["transcript"][6]["kind"] == "generation_offer");
    CHECK(session["transcript"][5]["text"] == script.replies[2]);
}

TEST_CASE("a held stream does not block other requests and can be cancelled") {
    TempDir dir;
    RunningService svc(config_for(dir));
    providers::MockChatScript holding;
    holding.replies = {"The bridge over the river was where we sat every evening."};
    holding.chunk_size = 8;
    holding.hold_after_chunks = 2;
    svc.service->providers().mocks->chat->set_script(holding);
    auto a = create_user(svc);
    auto b = create_user(svc, kHarbin);
    auto sid = a.api.post("/sessions", {{"mode", "in_town"}}).json_body()["session_id"].get<std::string>();

    testing::StreamedTurn held;
    std::thread streaming([&] {
        auto client = svc.client(a.api.token());
        held = client.turn(sid, {{"text", "Tell me about the bridge"}});
    });
    // Wait until the reply is underway.
    for (int i = 0; i < 500; ++i) {
        if (svc.service->providers().mocks->chat->request_count() > 0) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    auto started = std::chrono::steady_clock::now();
    CHECK(b.api.get("/health").status == 200);
    CHECK(b.api.post("/sessions", {{"mode", "out_of_town"}}).status == 201);
    CHECK(std::chrono::steady_clock::now() - started < std::chrono::seconds(2));

    CHECK(a.api.post("/sessions/" + sid + "/cancel").status == 200);
    streaming.join();
    CHECK(held.status == 200);
    CHECK(held.done["error"] == "cancelled");
    CHECK(held.text() == holding.replies[0].substr(0, 16));
    auto transcript = a.api.get("/sessions/" + sid).json_body()["transcript"];
    REQUIRE(transcript.size() == 2);
    CHECK(transcript[1]["text"] == held.text());
    CHECK(transcript[1]["error"] == "cancelled");
}

TEST_CASE("generation, editing and storybook over the API") {
    TempDir dir;
    RunningService svc(config_for(dir));
    auto a = create_user(svc);
    auto sid = a.api.post("/sessions", {{"mode", "in_town"}}).json_body()["session_id"].get<std::string>();
    CHECK(a.api.post("/sessions/" + sid + "/generation").status == 412);
    a.api.turn(sid, {{"text", "We flew kites on the city wall with my brother Zhang Wei"}});

    auto queued = a.api.post("/sessions/" + sid + "/generation");
    REQUIRE(queued.status == 202);
    auto job_id = queued.json_body()["job_id"].get<std::string>();
    auto job = wait_for_job(a.api, job_id);
    REQUIRE(job["status"] == "done");
    auto mid = job["material_id"].get<std::string>();
    svc.service->wait_for_jobs();
    CHECK(a.api.get("/sessions/" + sid).json_body()["status"] == "active");
    CHECK(a.api.get("/sessions/" + sid).json_body()["material_ids"] == json::array({mid}));

    auto material = a.api.get("/materials/" + mid).json_body();
    auto ref = material["image_candidates"][0]["image_ref"].get<std::string>();
    int w = material["image_candidates"][0]["width"];
    int h = material["image_candidates"][0]["height"];

    // Saving before any selection is a precondition failure.
    CHECK(a.api.post("/profiles/" + a.id + "/storybook/entries", {{"material_id", mid}}).status == 412);

    json outside = {{"image_ref", ref}, {"polygon", {{-5, 0}, {10, 0}, {10, 10}}}};
    auto rejected = a.api.post("/materials/" + mid + "/edits",
                               {{"candidate_ref", ref}, {"mask", outside}, {"instruction", "add a kite"}});
    CHECK(rejected.status == 422);

    json mask = {{"image_ref", ref}, {"polygon", {{10, 10}, {w / 2, 10}, {w / 2, h / 2}, {10, h / 2}}}};
    auto edited = a.api.post("/materials/" + mid + "/edits",
                             {{"candidate_ref", ref}, {"mask", mask}, {"instruction", "add a red kite"}});
    REQUIRE(edited.status == 201);
    CHECK(edited.json_body()["candidate"]["provenance"] == "edited");
    CHECK(edited.json_body()["candidate"]["parent"] == ref);

    auto redrawn = a.api.post("/materials/" + mid + "/redraws", {{"feedback", "make it dusk"}});
    REQUIRE(redrawn.status == 201);
    CHECK(redrawn.json_body()["material"]["image_candidates"].size() == 3);

    CHECK(a.api.post("/materials/" + mid + "/selection", {{"index", 7}}).status == 422);
    auto selected = a.api.post("/materials/" + mid + "/selection", {{"index", 1}});
    REQUIRE(selected.status == 200);
    CHECK(selected.json_body()["selected_image"] == 1);
    auto edited_ref = selected.json_body()["image_candidates"][1]["image_ref"].get<std::string>();

    CHECK(a.api.put("/materials/" + mid + "/narrative", {{"body", "  "}}).status == 422);
    auto narrative = a.api.put("/materials/" + mid + "/narrative", {{"body", "We flew kites on the wall."}});
    REQUIRE(narrative.status == 200);
    CHECK(narrative.json_body()["user_edited"] == true);

    auto image = a.api.get("/media/" + edited_ref);
    CHECK(image.status == 200);
    CHECK(image.content_type == "image/png");

    auto saved = a.api.post("/profiles/" + a.id + "/storybook/entries", {{"material_id", mid}, {"caption", "Kites"}});
    REQUIRE(saved.status == 201);
    auto entry = saved.json_body();
    CHECK(entry["image_ref"] == edited_ref);
    CHECK(entry["position"] == 0);
    auto second = a.api.post("/profiles/" + a.id + "/storybook/entries", {{"material_id", mid}}).json_body();

    auto patched = a.api.patch("/profiles/" + a.id + "/storybook/entries/" + entry["entry_id"].get<std::string>(),
                               {{"caption", "Kites on the wall"}});
    CHECK(patched.json_body()["caption"] == "Kites on the wall");
    CHECK(patched.json_body()["narrative"] == "We flew kites on the wall.");
    auto moved = a.api.put("/profiles/" + a.id + "/storybook/entries/" + second["entry_id"].get<std::string>() +
                               "/position",
                           {{"position", 0}});
    CHECK(moved.json_body()["entries"][0]["entry_id"] == second["entry_id"]);
    CHECK(a.api.put("/profiles/" + a.id + "/storybook/entries/" + second["entry_id"].get<std::string>() +
                        "/position",
                    {{"position", -1}})
              .status == 422);
    auto removed = a.api.del("/profiles/" + a.id + "/storybook/entries/" + second["entry_id"].get<std::string>());
    CHECK(removed.json_body()["entries"].size() == 1);
    CHECK(removed.json_body()["entries"][0]["position"] == 0);

    auto pdf = a.api.get("/profiles/" + a.id + "/storybook/export");
    REQUIRE(pdf.status == 200);
    CHECK(pdf.content_type == "application/pdf");
    CHECK(pdf.disposition.find("storybook-" + a.id + "-") != std::string::npos);
    auto parsed = test::inspect_pdf(pdf.body);
    REQUIRE(parsed.pages.size() == 2);
    CHECK(parsed.pages[1].image_hashes == std::vector<std::string>{edited_ref});
    CHECK(a.api.get("/profiles/" + a.id + "/storybook/export?ordering=sideways").status == 422);
}

TEST_CASE("empty storybook export is a precondition failure") {
    TempDir dir;
    RunningService svc(config_for(dir));
    auto a = create_user(svc);
    auto r = a.api.get("/profiles/" + a.id + "/storybook/export");
    CHECK(r.status == 412);
    CHECK(error_code(r) == "precondition_failed");
    CHECK(a.api.get("/profiles/" + a.id + "/storybook").json_body()["entries"].empty());
}

TEST_CASE("media upload, speech and audio turns") {
    TempDir dir;
    RunningService svc(config_for(dir));
    auto a = create_user(svc);
    auto synth = a.api.post("/speech/syntheses", {{"text", "I remember the river"}, {"voice", "warm"}});
    REQUIRE(synth.status == 201);
    auto audio_ref = synth.json_body()["audio_ref"].get<std::string>();
    CHECK(synth.json_body()["mime"] == "audio/wav");

    auto text = a.api.post("/speech/transcriptions", {{"audio_ref", audio_ref}});
    REQUIRE(text.status == 200);
    CHECK(text.json_body()["text"] == "I remember the river");

    auto uploaded = a.api.post_raw("/media", a.api.get("/media/" + audio_ref).body, "audio/wav");
    REQUIRE(uploaded.status == 201);
    CHECK(uploaded.json_body()["ref"] == audio_ref);
    CHECK(a.api.post_raw("/media", "", "application/octet-stream").status == 422);
    CHECK(a.api.get("/media/" + std::string(64, 'a')).status == 404);
    CHECK(svc.client().get("/media/" + audio_ref).status == 401);

    auto sid = a.api.post("/sessions", {{"mode", "out_of_town"}}).json_body()["session_id"].get<std::string>();
    auto turn = a.api.turn(sid, {{"audio_ref", audio_ref}});
    CHECK(turn.status == 200);
    auto transcript = a.api.get("/sessions/" + sid).json_body()["transcript"];
    CHECK(transcript[0]["text"] == "I remember the river");
    CHECK(transcript[0]["audio_ref"] == audio_ref);
}

TEST_CASE("state survives a restart") {
    TempDir dir;
    std::string token, uid, sid;
    json book;
    {
        RunningService svc(config_for(dir));
        auto a = create_user(svc);
        token = a.api.token();
        uid = a.id;
        sid = a.api.post("/sessions", {{"mode", "in_town"}}).json_body()["session_id"].get<std::string>();
        a.api.turn(sid, {{"text", "I grew up near a river"}});
        book = a.api.get("/sessions/" + sid).json_body();
    }
    RunningService again(config_for(dir));
    auto api = again.client(token);
    CHECK(api.get("/profiles/" + uid).status == 200);
    CHECK(api.get("/sessions/" + sid).json_body() == book);
}

TEST_CASE("binding a busy port fails with a clear message") {
    TempDir dir;
    RunningService svc(config_for(dir));
    service::Service other(config_for(dir), {.resume_jobs = false});
    service::HttpServer second(other);
    try {
        second.bind("127.0.0.1", svc.port);
        FAIL("expected bind failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::io);
        CHECK(std::string(e.what()).find(std::to_string(svc.port)) != std::string::npos);
    }
}

TEST_CASE("config file and environment overrides") {
    TempDir dir;
    auto path = dir / "remi.json";
    write_file_atomic(path, json{{"data_dir", "state"},
                                 {"port", 9001},
                                 {"workers", 3},
                                 {"conversation", {{"entity_threshold", 4}, {"context_turns", 10}}},
                                 {"generation", {{"embellishment_budget", 0}}},
                                 {"providers", {{"mode", "mock"}, {"chat", {{"timeout_ms", 500}}}}}}
                                .dump());
    auto c = service::load_config(path);
    CHECK(c.data_dir == dir.path() / "state");
    CHECK(c.port == 9001);
    CHECK(c.workers == 3);
    CHECK(c.conversation.readiness.entity_threshold == 4);
    CHECK(c.conversation.readiness.turn_threshold == 5);
    CHECK(c.conversation.context_turns == 10);
    CHECK(c.generation.embellishment_budget == 0);
    CHECK(c.providers.bindings.at("chat").timeout == std::chrono::milliseconds(500));

    std::map<std::string, std::string> env{{"REMI_PORT", "7070"}, {"REMI_DATA_DIR", "/tmp/elsewhere"}};
    service::apply_env(c, [&](const std::string& k) -> std::optional<std::string> {
        auto it = env.find(k);
        return it == env.end() ? std::nullopt : std::optional(it->second);
    });
    CHECK(c.port == 7070);
    CHECK(c.data_dir == "/tmp/elsewhere");

    env = {{"REMI_PROVIDERS_MODE", "live"}};
    auto lookup = [&](const std::string& k) -> std::optional<std::string> {
        auto it = env.find(k);
        return it == env.end() ? std::nullopt : std::optional(it->second);
    };
    try {
        service::apply_env(c, lookup);
        FAIL("live mode without endpoints must be rejected");
    } catch (const Error& e) {
        CHECK(e.fields().size() == 5);
    }
    env = {{"REMI_PORT", "eighty"}};
    c.providers.mode = "mock";
    CHECK_THROWS_AS(service::apply_env(c, lookup), Error);

    try {
        service::parse_config(json{{"port", -1}, {"workers", 0}, {"conversation", {{"k", "six"}}}});
        FAIL("expected validation errors");
    } catch (const Error& e) {
        std::set<std::string> fields;
        for (const auto& f : e.fields()) fields.insert(f.field);
        CHECK(fields == std::set<std::string>{"port", "workers", "conversation.k"});
    }
    CHECK_THROWS_AS(service::load_config(dir / "missing.json"), Error);
}
