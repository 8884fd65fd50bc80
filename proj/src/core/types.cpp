#include "remi/core/types.hpp"

#include "remi/core/error.hpp"

#include <array>
#include <utility>

namespace remi {

namespace {

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
    for (const auto& [e, name] : table)
        if (e == v) return name;
    return "unknown";
}

template <typename E, std::size_t N>
E value_of(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s,
           std::string_view what) {
    for (const auto& [e, name] : table)
        if (name == s) return e;
    throw Error(ErrorCode::validation, "unknown " + std::string(what) + ": '" + std::string(s) + "'");
}

constexpr std::array kGenders{
    std::pair{Gender::female, std::string_view("female")},
    std::pair{Gender::male, std::string_view("male")},
    std::pair{Gender::unspecified, std::string_view("unspecified")},
};

constexpr std::array kCategories{
    std::pair{FactCategory::landmark, std::string_view("landmark")},
    std::pair{FactCategory::geography, std::string_view("geography")},
    std::pair{FactCategory::cultural_custom, std::string_view("cultural_custom")},
    std::pair{FactCategory::era_event, std::string_view("era_event")},
    std::pair{FactCategory::other, std::string_view("other")},
};

constexpr std::array kModes{
    std::pair{PersonaMode::in_town, std::string_view("in_town")},
    std::pair{PersonaMode::out_of_town, std::string_view("out_of_town")},
};

constexpr std::array kSpeakers{
    std::pair{Speaker::user, std::string_view("user")},
    std::pair{Speaker::assistant, std::string_view("assistant")},
};

constexpr std::array kTurnKinds{
    std::pair{TurnKind::message, std::string_view("message")},
    std::pair{TurnKind::generation_offer, std::string_view("generation_offer")},
};

constexpr std::array kSessionStatuses{
    std::pair{SessionStatus::active, std::string_view("active")},
    std::pair{SessionStatus::generating, std::string_view("generating")},
    std::pair{SessionStatus::closed, std::string_view("closed")},
};

constexpr std::array kStages{
    std::pair{LifeStage::childhood, std::string_view("childhood")},
    std::pair{LifeStage::school, std::string_view("school")},
    std::pair{LifeStage::adulthood, std::string_view("adulthood")},
};

constexpr std::array kProvenances{
    std::pair{Provenance::generated, std::string_view("generated")},
    std::pair{Provenance::edited, std::string_view("edited")},
    std::pair{Provenance::redrawn, std::string_view("redrawn")},
};

constexpr std::array kJobStatuses{
    std::pair{JobStatus::queued, std::string_view("queued")},
    std::pair{JobStatus::running, std::string_view("running")},
    std::pair{JobStatus::done, std::string_view("done")},
    std::pair{JobStatus::failed, std::string_view("failed")},
};

}  // namespace

std::string_view to_string(Gender v) { return name_of(kGenders, v); }
std::string_view to_string(FactCategory v) { return name_of(kCategories, v); }
std::string_view to_string(PersonaMode v) { return name_of(kModes, v); }
std::string_view to_string(Speaker v) { return name_of(kSpeakers, v); }
std::string_view to_string(TurnKind v) { return name_of(kTurnKinds, v); }
std::string_view to_string(SessionStatus v) { return name_of(kSessionStatuses, v); }
std::string_view to_string(LifeStage v) { return name_of(kStages, v); }
std::string_view to_string(Provenance v) { return name_of(kProvenances, v); }
std::string_view to_string(JobStatus v) { return name_of(kJobStatuses, v); }

PersonaMode parse_persona_mode(std::string_view s) { return value_of(kModes, s, "mode"); }
FactCategory parse_fact_category(std::string_view s) { return value_of(kCategories, s, "category"); }

// Internal helpers for json.cpp.
Gender parse_gender_name(std::string_view s) { return value_of(kGenders, s, "gender"); }
Speaker parse_speaker(std::string_view s) { return value_of(kSpeakers, s, "speaker"); }
TurnKind parse_turn_kind(std::string_view s) { return value_of(kTurnKinds, s, "turn kind"); }
SessionStatus parse_session_status(std::string_view s) {
    return value_of(kSessionStatuses, s, "session status");
}
LifeStage parse_life_stage(std::string_view s) { return value_of(kStages, s, "life stage"); }
Provenance parse_provenance(std::string_view s) { return value_of(kProvenances, s, "provenance"); }
JobStatus parse_job_status(std::string_view s) { return value_of(kJobStatuses, s, "job status"); }

std::string_view display_label(PersonaMode mode) {
    return mode == PersonaMode::in_town ? "Guided Reminiscence" : "Free Reminiscence";
}

int category_priority(FactCategory c) {
    switch (c) {
        case FactCategory::landmark: return 0;
        case FactCategory::geography: return 1;
        case FactCategory::cultural_custom: return 2;
        case FactCategory::era_event: return 3;
        case FactCategory::other: return 4;
    }
    return 5;
}

}  // namespace remi
