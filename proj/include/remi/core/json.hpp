#pragma once

// Canonical JSON encodings (snake_case field names). These encodings are
// both the HTTP wire format and the on-disk persistence format.

#include "remi/core/error.hpp"
#include "remi/core/types.hpp"

#include <json.hpp>

namespace remi {

using json = nlohmann::json;

void to_json(json& j, Gender v);
void from_json(const json& j, Gender& v);
void to_json(json& j, FactCategory v);
void from_json(const json& j, FactCategory& v);
void to_json(json& j, PersonaMode v);
void from_json(const json& j, PersonaMode& v);
void to_json(json& j, Speaker v);
void from_json(const json& j, Speaker& v);
void to_json(json& j, TurnKind v);
void from_json(const json& j, TurnKind& v);
void to_json(json& j, SessionStatus v);
void from_json(const json& j, SessionStatus& v);
void to_json(json& j, LifeStage v);
void from_json(const json& j, LifeStage& v);
void to_json(json& j, Provenance v);
void from_json(const json& j, Provenance& v);
void to_json(json& j, JobStatus v);
void from_json(const json& j, JobStatus& v);

#define REMI_DECLARE_JSON(Type)             \
    void to_json(json& j, const Type& v);   \
    void from_json(const json& j, Type& v);

REMI_DECLARE_JSON(AgeBand)
REMI_DECLARE_JSON(Hometown)
REMI_DECLARE_JSON(UserProfile)
REMI_DECLARE_JSON(SourceRef)
REMI_DECLARE_JSON(Fact)
REMI_DECLARE_JSON(KnowledgeBase)
REMI_DECLARE_JSON(Turn)
REMI_DECLARE_JSON(ReadinessState)
REMI_DECLARE_JSON(Session)
REMI_DECLARE_JSON(EraHint)
REMI_DECLARE_JSON(ImagePrompt)
REMI_DECLARE_JSON(TextPrompt)
REMI_DECLARE_JSON(ImageCandidate)
REMI_DECLARE_JSON(Point)
REMI_DECLARE_JSON(RowSpan)
REMI_DECLARE_JSON(MaskRegion)
REMI_DECLARE_JSON(NarrativeText)
REMI_DECLARE_JSON(MemoryMaterial)
REMI_DECLARE_JSON(GenerationJob)
REMI_DECLARE_JSON(StorybookEntry)
REMI_DECLARE_JSON(LifeStorybook)

#undef REMI_DECLARE_JSON

// Throws Error(validation) with the offending path instead of a raw
// nlohmann exception.
template <typename T>
T decode(const json& j, std::string_view what) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::validation, std::string("malformed ") + std::string(what) + ": " + e.what());
    }
}

}  // namespace remi

// Timestamp is a std::chrono type, so ADL cannot find converters in remi.
template <>
struct nlohmann::adl_serializer<remi::Timestamp> {
    static void to_json(json& j, const remi::Timestamp& v) { j = remi::format_timestamp(v); }
    static void from_json(const json& j, remi::Timestamp& v) { v = remi::parse_timestamp(j.get<std::string>()); }
};
