#include "remi/core/clock.hpp"
#include "remi/core/json.hpp"
#include "remi/core/profile.hpp"
#include "remi/core/store.hpp"

#include "support/temp_dir.hpp"

#include <doctest.h>

#include <thread>

using namespace remi;
using namespace std::chrono_literals;

namespace {

Timestamp at_ms(std::int64_t ms) { return Timestamp(std::chrono::milliseconds(ms)); }

bool has_code(const std::vector<FieldError>& errs, std::string_view code) {
    for (const auto& e : errs)
        if (e.code == code) return true;
    return false;
}

template <typename T>
void check_round_trip(const T& value) {
    json j = value;
    T back = json::parse(j.dump()).get<T>();
    CHECK(back == value);
}

}  // namespace

TEST_CASE("timestamps format and parse in UTC with milliseconds") {
    Timestamp t = at_ms(1714552200123);  // 2024-05-01T08:30:00.123Z
    CHECK(format_timestamp(t) == "2024-05-01T08:30:00.123Z");
    CHECK(parse_timestamp("2024-05-01T08:30:00.123Z") == t);
    CHECK(format_date(t) == "2024-05-01");
    CHECK(year_of(t) == 2024);
    CHECK_THROWS_AS(parse_timestamp("yesterday"), Error);
}

TEST_CASE("manual clock and id generator") {
    ManualClock clock(at_ms(0));
    clock.advance(1500ms);
    CHECK(clock.now() == at_ms(1500));
    RandomIdGenerator ids;
    auto a = ids.next("ses");
    auto b = ids.next("ses");
    CHECK(a != b);
    CHECK(a.rfind("ses_", 0) == 0);
    CHECK(a.size() == 4 + 16);
    CHECK(is_safe_id(a));
}

TEST_CASE("validate_profile: typical and boundary inputs") {
    SUBCASE("table row with months") {
        auto r = validate_profile(json{{"gender", "Female"}, {"age_band", "66-70"}, {"hometown", "Shanxi"},
                                       {"relocation", "24 months"}});
        REQUIRE(r.ok());
        CHECK(r.profile->gender == Gender::female);
        CHECK(r.profile->age_band == AgeBand{66, 70});
        CHECK(r.profile->hometown.name == "Shanxi");
        CHECK(r.profile->hometown.province == std::optional<std::string>("Shanxi"));
        CHECK(r.profile->relocation_months == 24);
        CHECK_FALSE(r.profile->below_age_threshold);
    }
    SUBCASE("empty gender and zero duration") {
        auto r = validate_profile(
            json{{"gender", ""}, {"age_band", "62-62"}, {"hometown", "Anhui"}, {"relocation", "0"}});
        REQUIRE(r.ok());
        CHECK(r.profile->gender == Gender::unspecified);
        CHECK(r.profile->age_band == AgeBand{62, 62});
        CHECK(r.profile->relocation_months == 0);
        CHECK(r.warnings.empty());
    }
    SUBCASE("years convert to months") {
        auto r = validate_profile(json{{"age_band", 70}, {"hometown", "Pingyao, Shanxi"}, {"relocation", "2 years"}});
        REQUIRE(r.ok());
        CHECK(r.profile->relocation_months == 24);
        CHECK(r.profile->hometown.province == std::optional<std::string>("Shanxi"));
    }
    SUBCASE("empty hometown rejected") {
        auto r = validate_profile(json{{"age_band", "66-70"}, {"hometown", ""}, {"relocation", 3}});
        CHECK_FALSE(r.ok());
        CHECK_FALSE(r.profile);
        REQUIRE(r.errors.size() == 1);
        CHECK(r.errors[0].code == "hometown_empty");
    }
    SUBCASE("every failing field is reported") {
        auto r = validate_profile(json{{"age_band", "old"}, {"hometown", "  "}, {"relocation", -5}});
        CHECK(has_code(r.errors, "age_band_invalid"));
        CHECK(has_code(r.errors, "hometown_empty"));
        CHECK(has_code(r.errors, "relocation_negative"));
        CHECK(r.errors.size() == 3);
    }
    SUBCASE("unknown gender normalizes with a warning") {
        auto r = validate_profile(json{{"gender", "robot"}, {"age_band", "66-70"}, {"hometown", "Anhui"}});
        REQUIRE(r.ok());
        CHECK(r.profile->gender == Gender::unspecified);
        CHECK(has_code(r.warnings, "gender_unrecognized"));
    }
    SUBCASE("younger testers are flagged, not rejected") {
        auto r = validate_profile(json{{"age_band", "40-45"}, {"hometown", "Hunan"}});
        REQUIRE(r.ok());
        CHECK(r.profile->below_age_threshold);
        CHECK_FALSE(r.warnings.empty());
    }
}

TEST_CASE("serialization round trip for every core type") {
    UserProfile p{"usr_1", "Mei", Gender::female, {66, 70}, {"Pingyao", "Shanxi"}, 24, "en", false};
    check_round_trip(p);
    Fact f{"f-doc-000000", FactCategory::landmark, "Pingyao is a walled ancient city.", {"doc", 0}, {"pingyao", "city"}};
    check_round_trip(f);
    check_round_trip(KnowledgeBase{"usr_1", {f}, {"doc"}});

    Turn t1{0, Speaker::user, "hello", std::nullopt, at_ms(1000), TurnKind::message, std::nullopt};
    Turn t2{1, Speaker::assistant, "hi", std::string("aud"), at_ms(2000), TurnKind::generation_offer,
            std::string("cancelled")};
    Session s{"ses_1", "usr_1", PersonaMode::out_of_town, {t1, t2}, SessionStatus::generating,
              {{"river"}, 1, true}, 0.5, "older talk", 0, {"mat_1"}, at_ms(5)};
    check_round_trip(s);

    ImagePrompt ip{"a river", "a girl", LifeStage::childhood, EraHint{1960, 1969, "1960s"}, {f},
                   {"balanced"}, {"no text"}, std::string("more trees"), "v1"};
    check_round_trip(ip);
    check_round_trip(ImagePrompt{});
    TextPrompt tp;
    tp.source_details = {"caught fish"};
    check_round_trip(tp);

    ImageCandidate c{"ab", 512, 512, Provenance::edited, std::string("cd"), ip, std::string("brighter")};
    MemoryMaterial m{"mat_1", "ses_1", "usr_1", {c}, std::size_t{0}, {"story", true}, at_ms(9)};
    check_round_trip(m);
    check_round_trip(MaskRegion{"ab", {{{0, 0}, {3, 0}, {0, 3}}}, {{1, 2, 3}}});

    GenerationJob job{"job_1", "ses_1", "usr_1", {t1}, ip, tp, JobStatus::failed, std::string("timeout"),
                      std::string("slow"), std::nullopt, at_ms(3)};
    check_round_trip(job);
    StorybookEntry e{"ent_1", "mat_1", "ab", "story", "caption", at_ms(4), 0};
    check_round_trip(LifeStorybook{"usr_1", {e}});
}

TEST_CASE("wire encodings use snake_case and documented shapes") {
    UserProfile p{"usr_1", "", Gender::male, {66, 70}, {"Anhui", std::nullopt}, 3, "en", false};
    json j = p;
    CHECK(j["age_band"] == json::array({66, 70}));
    CHECK(j["relocation_duration"] == 3);
    CHECK(j["hometown"]["province"].is_null());
    Session s;
    s.mode = PersonaMode::in_town;
    json js = s;
    CHECK(js["mode"] == "in_town");
    CHECK(js["mode_label"] == "Guided Reminiscence");
    CHECK(display_label(PersonaMode::out_of_town) == "Free Reminiscence");
    CHECK_THROWS_AS(decode<Session>(json{{"mode", "sideways"}}, "session"), Error);
}

TEST_CASE("category priority order") {
    CHECK(category_priority(FactCategory::landmark) < category_priority(FactCategory::geography));
    CHECK(category_priority(FactCategory::geography) < category_priority(FactCategory::cultural_custom));
    CHECK(category_priority(FactCategory::cultural_custom) < category_priority(FactCategory::era_event));
    CHECK(category_priority(FactCategory::era_event) < category_priority(FactCategory::other));
}

TEST_CASE("document store persists across instances") {
    testing::TempDir dir;
    {
        DocumentStore<UserProfile> store(dir.path());
        UserProfile p;
        p.user_id = "usr_a";
        p.hometown.name = "Anhui";
        store.put("usr_a", p);
        CHECK_THROWS_AS(store.put("../escape", p), Error);
    }
    DocumentStore<UserProfile> reopened(dir.path());
    REQUIRE(reopened.get("usr_a"));
    CHECK(reopened.get("usr_a")->hometown.name == "Anhui");
    CHECK(reopened.remove("usr_a"));
    CHECK_FALSE(DocumentStore<UserProfile>(dir.path()).contains("usr_a"));
}

TEST_CASE("keyed mutex serializes per key") {
    KeyedMutex km;
    int counter = 0;
    std::vector<std::thread> threads;
    for (int i = 0; i < 4; ++i)
        threads.emplace_back([&] {
            for (int k = 0; k < 1000; ++k) {
                auto lock = km.lock("same");
                ++counter;
            }
        });
    for (auto& t : threads) t.join();
    CHECK(counter == 4000);
}
