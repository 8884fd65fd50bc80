#include "remi/conversation/engine.hpp"

#include "support/engine_fixture.hpp"

#include <doctest.h>

#include <condition_variable>
#include <random>
#include <thread>

using namespace remi;
using namespace remi::conversation;
using remi::testing::EngineFixture;

namespace {

std::string joined(const std::vector<std::string>& chunks) {
    std::string out;
    for (const auto& c : chunks) out += c;
    return out;
}

int count_offers(const Session& s) {
    return static_cast<int>(std::count_if(s.transcript.begin(), s.transcript.end(),
                                          [](const Turn& t) { return t.kind == TurnKind::generation_offer; }));
}

}  // namespace

TEST_CASE("readiness score and threshold") {
    ReadinessConfig cfg;
    ReadinessState st;
    CHECK(readiness_score(st, cfg) == 0.0);
    CHECK_FALSE(readiness_reached(st, cfg));
    record_user_turn(st, {"river", "temple"});
    CHECK(st.user_turn_count == 1);
    CHECK(st.entity_count() == 2);
    CHECK(readiness_score(st, cfg) == doctest::Approx(2.0 / 3));
    CHECK_FALSE(readiness_reached(st, cfg));
    record_user_turn(st, {"river"});
    CHECK(st.entity_count() == 2);
    record_user_turn(st, {"grandmother"});
    CHECK(readiness_reached(st, cfg));
    CHECK(readiness_score(st, cfg) == doctest::Approx(1.0));

    ReadinessState turns_only;
    for (int i = 0; i < 4; ++i) record_user_turn(turns_only, {});
    CHECK_FALSE(readiness_reached(turns_only, cfg));
    record_user_turn(turns_only, {});
    CHECK(readiness_reached(turns_only, cfg));

    ReadinessConfig strict{10, 100};
    CHECK_FALSE(readiness_reached(st, strict));
}

TEST_CASE("start and look up sessions") {
    EngineFixture fx;
    auto in = fx.engine.start_session("usr_pingyao", PersonaMode::in_town);
    CHECK(in.mode == PersonaMode::in_town);
    CHECK(in.transcript.empty());
    CHECK(in.status == SessionStatus::active);
    CHECK(in.readiness == ReadinessState{});
    auto out = fx.engine.start_session("usr_pingyao", PersonaMode::out_of_town);
    CHECK(out.mode == PersonaMode::out_of_town);
    CHECK(fx.engine.get_session(in.session_id) == in);
    CHECK(fx.engine.list_sessions("usr_pingyao").size() == 2);
    CHECK(fx.engine.list_sessions("usr_harbin").empty());
    CHECK(fx.engine.list_sessions().size() == 2);
    try {
        fx.engine.start_session("usr_nobody", PersonaMode::in_town);
        FAIL("expected not found");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::not_found);
    }
    CHECK_THROWS_AS(fx.engine.get_session("ses_missing"), Error);
}

TEST_CASE("first turn counts entities") {
    EngineFixture fx;
    auto s = fx.engine.start_session("usr_pingyao", PersonaMode::in_town);
    auto r = fx.engine.submit_user_turn(s.session_id, {"I grew up near a river and a temple"});
    auto after = fx.engine.get_session(s.session_id);
    CHECK(after.readiness.entity_count() >= 2);
    CHECK(after.readiness.user_turn_count == 1);
    CHECK(r.user_turn.turn_index == 0);
    CHECK(r.assistant_turn.turn_index == 1);
    CHECK_FALSE(r.assistant_turn.error.has_value());
    CHECK(after.transcript.size() == 2);
    CHECK(after.transcript[0].speaker == Speaker::user);
    CHECK(after.transcript[1].speaker == Speaker::assistant);
}

TEST_CASE("echo mock reply is persisted verbatim and matches the streamed chunks") {
    EngineFixture fx;
    providers::MockChatScript script;
    script.echo = true;
    script.chunk_size = 5;
    fx.chat.set_script(script);
    auto s = fx.engine.start_session("usr_pingyao", PersonaMode::out_of_town);
    std::vector<std::string> chunks;
    auto r = fx.engine.submit_user_turn(s.session_id, {"We flew kites on the city wall."},
                                        [&](std::string_view c) { chunks.emplace_back(c); });
    CHECK(chunks.size() > 1);
    CHECK(r.assistant_turn.text == "We flew kites on the city wall.");
    CHECK(joined(chunks) == r.assistant_turn.text);
    CHECK(fx.engine.get_session(s.session_id).transcript[1].text == r.assistant_turn.text);
}

TEST_CASE("closed session rejects turns and leaves the transcript alone") {
    EngineFixture fx;
    auto s = fx.engine.start_session("usr_pingyao", PersonaMode::in_town);
    fx.engine.submit_user_turn(s.session_id, {"Hello"});
    fx.engine.close_session(s.session_id);
    auto before = fx.engine.get_session(s.session_id);
    try {
        fx.engine.submit_user_turn(s.session_id, {"Another"});
        FAIL("expected conflict");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::conflict);
    }
    CHECK(fx.engine.get_session(s.session_id) == before);
}

TEST_CASE("empty and oversized turns are rejected") {
    EngineFixture fx;
    auto s = fx.engine.start_session("usr_pingyao", PersonaMode::in_town);
    CHECK_THROWS_AS(fx.engine.submit_user_turn(s.session_id, {"   "}), Error);
    CHECK_THROWS_AS(fx.engine.submit_user_turn(s.session_id, {std::string(5000, 'a')}), Error);
    CHECK(fx.engine.get_session(s.session_id).transcript.empty());
    CHECK_THROWS_AS(fx.engine.submit_user_turn("ses_missing", {"Hi"}), Error);
}

TEST_CASE("provider failure mid-stream keeps partial text with an error marker") {
    EngineFixture fx;
    providers::MockChatScript script;
    script.replies = {"The temple fair had lanterns everywhere and the smell of roasted chestnuts."};
    script.chunk_size = 10;
    script.fail_after_chunks = 2;
    fx.chat.set_script(script);
    auto s = fx.engine.start_session("usr_pingyao", PersonaMode::in_town);
    std::vector<std::string> chunks;
    auto r = fx.engine.submit_user_turn(s.session_id, {"Tell me about the fair"},
                                        [&](std::string_view c) { chunks.emplace_back(c); });
    CHECK(chunks.size() == 2);
    CHECK(r.assistant_turn.text == joined(chunks));
    CHECK(r.assistant_turn.text == script.replies[0].substr(0, r.assistant_turn.text.size()));
    REQUIRE(r.assistant_turn.error.has_value());
    CHECK(*r.assistant_turn.error == "provider_error: server_error");
    auto after = fx.engine.get_session(s.session_id);
    CHECK(after.status == SessionStatus::active);
    CHECK(after.transcript.back().error == r.assistant_turn.error);
}

TEST_CASE("timeouts before the first chunk are retried once") {
    EngineFixture fx;
    providers::MockChatScript script;
    script.fail_after_chunks = 0;
    script.fail_kind = providers::FailureKind::timeout;
    fx.chat.set_script(script);
    auto s = fx.engine.start_session("usr_pingyao", PersonaMode::in_town);
    auto r = fx.engine.submit_user_turn(s.session_id, {"Hello"});
    CHECK(fx.chat.request_count() == 2);
    CHECK(r.assistant_turn.error == std::optional<std::string>("provider_error: timeout"));

    // Client errors are not retried.
    script.fail_kind = providers::FailureKind::client_error;
    fx.chat.set_script(script);
    fx.engine.submit_user_turn(s.session_id, {"Hello again"});
    CHECK(fx.chat.request_count() == 3);
}

TEST_CASE("generation offer follows the reply once the threshold is reached") {
    EngineFixture fx;
    auto s = fx.engine.start_session("usr_pingyao", PersonaMode::in_town);
    auto r1 = fx.engine.submit_user_turn(s.session_id, {"I grew up near a river"});
    auto r2 = fx.engine.submit_user_turn(s.session_id, {"my grandmother took me there"});
    CHECK_FALSE(r1.offer_turn.has_value());
    CHECK_FALSE(r2.offer_turn.has_value());
    auto r3 = fx.engine.submit_user_turn(s.session_id, {"we went to the temple fair every spring festival"});
    REQUIRE(r3.offer_turn.has_value());
    CHECK(r3.offer_turn->kind == TurnKind::generation_offer);
    CHECK(r3.offer_turn->turn_index == r3.assistant_turn.turn_index + 1);
    CHECK(r3.offer_turn->text.find("river") != std::string::npos);
    CHECK(r3.readiness_score >= 1.0);

    for (int i = 0; i < 6; ++i) {
        auto r = fx.engine.submit_user_turn(s.session_id, {"We also visited the market and the old street " + std::to_string(i)});
        CHECK_FALSE(r.offer_turn.has_value());
    }
    auto after = fx.engine.get_session(s.session_id);
    CHECK(after.readiness.offered);
    CHECK(count_offers(after) == 1);
}

TEST_CASE("the offer waits for a successful reply") {
    EngineFixture fx;
    providers::MockChatScript failing;
    failing.fail_after_chunks = 0;
    fx.chat.set_script(failing);
    auto s = fx.engine.start_session("usr_pingyao", PersonaMode::in_town);
    auto r = fx.engine.submit_user_turn(s.session_id, {"The river, the temple and my grandmother."});
    CHECK(r.assistant_turn.error.has_value());
    CHECK_FALSE(r.offer_turn.has_value());
    fx.chat.set_script({});
    r = fx.engine.submit_user_turn(s.session_id, {"Yes."});
    CHECK(r.offer_turn.has_value());
}

TEST_CASE("readiness score never decreases over random transcripts") {
    EngineFixture fx;
    std::mt19937 rng(7);
    const std::vector<std::string> pieces{"river", "grandmother", "Temple Fair", "the weather", "noodles", "a kite",
                                          "school", "nothing much", "Zhang Wei", "the market", "yes", "I see"};
    for (int t = 0; t < 20; ++t) {
        auto s = fx.engine.start_session("usr_pingyao", t % 2 ? PersonaMode::in_town : PersonaMode::out_of_town);
        double last = 0.0;
        int turns = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < turns; ++i) {
            std::string text = "I remember " + pieces[rng() % pieces.size()] + " and " + pieces[rng() % pieces.size()];
            auto r = fx.engine.submit_user_turn(s.session_id, {text});
            CHECK(r.readiness_score >= last);
            last = r.readiness_score;
        }
        CHECK(count_offers(fx.engine.get_session(s.session_id)) <= 1);
    }
}

TEST_CASE("a new turn mid-stream cancels the running reply") {
    EngineFixture fx;
    providers::MockChatScript holding;
    holding.replies = {"Let me tell you about the old bridge over the river where we used to sit."};
    holding.chunk_size = 8;
    holding.hold_after_chunks = 2;
    fx.chat.set_script(holding);
    auto s = fx.engine.start_session("usr_pingyao", PersonaMode::in_town);

    std::mutex m;
    std::condition_variable cv;
    std::vector<std::string> first_chunks;
    TurnResult first;
    std::thread t([&] {
        first = fx.engine.submit_user_turn(s.session_id, {"What about the bridge?"}, [&](std::string_view c) {
            std::lock_guard lock(m);
            first_chunks.emplace_back(c);
            cv.notify_all();
        });
    });
    {
        std::unique_lock lock(m);
        REQUIRE(cv.wait_for(lock, std::chrono::seconds(5), [&] { return first_chunks.size() == 2; }));
    }
    fx.chat.set_script({});
    auto second = fx.engine.submit_user_turn(s.session_id, {"Actually, tell me about the market."});
    t.join();

    REQUIRE(first.assistant_turn.error.has_value());
    CHECK(*first.assistant_turn.error == "cancelled");
    CHECK(first.assistant_turn.text == joined(first_chunks));
    CHECK_FALSE(second.assistant_turn.error.has_value());

    auto after = fx.engine.get_session(s.session_id);
    REQUIRE(after.transcript.size() == 4);
    CHECK(after.transcript[0].text == "What about the bridge?");
    CHECK(after.transcript[1].error == std::optional<std::string>("cancelled"));
    CHECK(after.transcript[2].text == "Actually, tell me about the market.");
    CHECK(after.transcript[3].speaker == Speaker::assistant);
    for (std::size_t i = 0; i < after.transcript.size(); ++i)
        CHECK(after.transcript[i].turn_index == static_cast<std::int64_t>(i));
}

TEST_CASE("explicit cancel and a disconnected client both end the stream") {
    EngineFixture fx;
    providers::MockChatScript script;
    script.replies = {"one two three four five six seven eight nine ten"};
    script.chunk_size = 4;
    fx.chat.set_script(script);
    auto s = fx.engine.start_session("usr_pingyao", PersonaMode::in_town);
    int delivered = 0;
    auto r = fx.engine.submit_user_turn(s.session_id, {"Count"}, [&](std::string_view) {
        if (++delivered == 3) throw std::runtime_error("client went away");
    });
    CHECK(r.assistant_turn.error == std::optional<std::string>("cancelled"));
    CHECK(r.assistant_turn.text == script.replies[0].substr(0, 8));

    fx.engine.cancel_stream(s.session_id);  // nothing running: no effect
    auto ok = fx.engine.submit_user_turn(s.session_id, {"Again"});
    CHECK_FALSE(ok.assistant_turn.error.has_value());
}

TEST_CASE("context window keeps the last turns and a rolling summary") {
    ConversationConfig cfg;
    cfg.context_turns = 6;
    EngineFixture fx(cfg);
    auto s = fx.engine.start_session("usr_pingyao", PersonaMode::in_town);
    for (int i = 0; i < 2; ++i) fx.engine.submit_user_turn(s.session_id, {"Turn " + std::to_string(i)});
    CHECK(fx.engine.get_session(s.session_id).summary.empty());
    for (int i = 2; i < 8; ++i) fx.engine.submit_user_turn(s.session_id, {"Turn " + std::to_string(i)});
    auto after = fx.engine.get_session(s.session_id);
    CHECK_FALSE(after.summary.empty());
    CHECK(after.summary.find("truncated") != std::string::npos);
    CHECK(after.summarized_through == static_cast<std::int64_t>(after.transcript.size()) - 6);

    auto req = fx.engine.context_request(after);
    CHECK(req.messages.size() <= 6);
    CHECK(req.system_prompt.find(after.summary) != std::string::npos);
    CHECK(req.messages.back().content == after.transcript.back().text);

    // The provider saw at most the window plus the summary on every call.
    for (const auto& r : fx.chat.requests())
        if (r.purpose == providers::ChatPurpose::conversation) CHECK(r.messages.size() <= 6);
}

TEST_CASE("in_town prompt includes knowledge base facts, out_of_town does not") {
    EngineFixture fx;
    fx.knowledge.ingest(remi::testing::pingyao_profile(), remi::testing::kb50_documents());
    auto in = fx.engine.start_session("usr_pingyao", PersonaMode::in_town);
    auto out = fx.engine.start_session("usr_pingyao", PersonaMode::out_of_town);
    auto kb = fx.knowledge.get("usr_pingyao");
    auto in_prompt = fx.engine.system_prompt(in.session_id);
    auto out_prompt = fx.engine.system_prompt(out.session_id);
    int in_facts = 0;
    for (const auto& f : kb.facts) {
        in_facts += in_prompt.find(f.text) != std::string::npos;
        CHECK(out_prompt.find(f.text) == std::string::npos);
    }
    CHECK(in_facts == 6);
    CHECK(in_prompt.find("Pingyao, Shanxi") != std::string::npos);

    // Mentioned entities pull matching facts into the next prompt.
    fx.engine.submit_user_turn(in.session_id, {"I loved the Rishengchang bank building."});
    auto updated = fx.engine.system_prompt(in.session_id);
    CHECK(updated.find("Rishengchang") != std::string::npos);
}

TEST_CASE("voice turns are transcribed") {
    EngineFixture fx;
    providers::MockSynthesizeProvider tts;
    auto wav = tts.synthesize("My grandmother sang by the river.", providers::resolve_voice("").profile);
    auto ref = fx.media.put(wav);
    auto s = fx.engine.start_session("usr_pingyao", PersonaMode::in_town);
    auto r = fx.engine.submit_user_turn(s.session_id, {"", ref});
    CHECK(r.user_turn.text == "My grandmother sang by the river.");
    CHECK(r.user_turn.audio_ref == std::optional<std::string>(ref));
    CHECK_THROWS_AS(fx.engine.submit_user_turn(s.session_id, {"", std::string(64, 'a')}), Error);
}

TEST_CASE("request_generation preconditions and single-job rule") {
    EngineFixture fx;
    auto s = fx.engine.start_session("usr_pingyao", PersonaMode::in_town);
    int enqueued = 0;
    auto enqueue = [&](const Session& snap) {
        ++enqueued;
        CHECK(snap.session_id == s.session_id);
        return "job_" + std::to_string(enqueued);
    };
    try {
        fx.engine.request_generation(s.session_id, enqueue);
        FAIL("expected precondition");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::precondition);
    }
    for (auto t : {"I grew up near a river", "my grandmother took me there", "we went to the temple fair"})
        fx.engine.submit_user_turn(s.session_id, {t});

    // A failing enqueue leaves the session untouched.
    CHECK_THROWS(fx.engine.request_generation(s.session_id, [](const Session&) -> std::string {
        throw Error(ErrorCode::io, "disk full");
    }));
    CHECK(fx.engine.get_session(s.session_id).status == SessionStatus::active);

    std::vector<Turn> snapshot;
    auto job = fx.engine.request_generation(s.session_id, [&](const Session& snap) {
        snapshot = snap.transcript;
        return std::string("job_a");
    });
    CHECK(job == "job_a");
    CHECK(fx.engine.get_session(s.session_id).status == SessionStatus::generating);
    try {
        fx.engine.request_generation(s.session_id, enqueue);
        FAIL("expected conflict");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::conflict);
    }

    // Turns continue during generation without touching the snapshot.
    fx.engine.submit_user_turn(s.session_id, {"and the lanterns"});
    CHECK(fx.engine.get_session(s.session_id).transcript.size() > snapshot.size());
    CHECK_THROWS_AS(fx.engine.close_session(s.session_id), Error);

    fx.engine.finish_generation(s.session_id, std::string("mat_1"));
    auto after = fx.engine.get_session(s.session_id);
    CHECK(after.status == SessionStatus::active);
    CHECK(after.material_ids == std::vector<std::string>{"mat_1"});
    fx.engine.finish_generation(s.session_id, std::nullopt);
    CHECK(fx.engine.get_session(s.session_id).material_ids.size() == 1);
}

TEST_CASE("sessions proceed in parallel") {
    EngineFixture fx;
    providers::MockChatScript slow;
    slow.chunk_delay = std::chrono::milliseconds(20);
    slow.chunk_size = 16;
    fx.chat.set_script(slow);
    std::vector<std::string> ids;
    for (int i = 0; i < 4; ++i) ids.push_back(fx.engine.start_session("usr_pingyao", PersonaMode::in_town).session_id);
    std::vector<std::thread> threads;
    for (const auto& id : ids)
        threads.emplace_back([&, id] {
            for (int k = 0; k < 3; ++k) fx.engine.submit_user_turn(id, {"Tell me more " + std::to_string(k)});
        });
    for (auto& t : threads) t.join();
    for (const auto& id : ids) {
        auto s = fx.engine.get_session(id);
        CHECK(s.transcript.size() >= 6);
        for (const auto& t : s.transcript) CHECK_FALSE(t.error.has_value());
    }
}
