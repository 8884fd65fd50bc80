#pragma once

// Shared data model. Value types are plain aggregates with defaulted
// equality; mutation happens only through the module stores.

#include "remi/core/clock.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace remi {

// ---------------------------------------------------------------------------
// Profile
// ---------------------------------------------------------------------------

enum class Gender { female, male, unspecified };

struct AgeBand {
    int lower = 0;
    int upper = 0;

    int midpoint() const { return (lower + upper) / 2; }
    bool operator==(const AgeBand&) const = default;
};

struct Hometown {
    std::string name;                     // free text as entered
    std::optional<std::string> province;  // normalized tag when recognized

    bool operator==(const Hometown&) const = default;
};

struct UserProfile {
    std::string user_id;
    std::string display_name;
    Gender gender = Gender::unspecified;
    AgeBand age_band;
    Hometown hometown;
    int relocation_months = 0;
    std::string locale = "en";
    bool below_age_threshold = false;  // lower bound < 60; warning only

    bool operator==(const UserProfile&) const = default;
};

// ---------------------------------------------------------------------------
// Knowledge
// ---------------------------------------------------------------------------

enum class FactCategory { landmark, geography, cultural_custom, era_event, other };

struct SourceRef {
    std::string doc_id;
    std::size_t offset = 0;

    bool operator==(const SourceRef&) const = default;
};

struct Fact {
    std::string fact_id;
    FactCategory category = FactCategory::other;
    std::string text;
    SourceRef source_ref;
    std::vector<std::string> keywords;

    bool operator==(const Fact&) const = default;
};

struct KnowledgeBase {
    std::string user_id;
    std::vector<Fact> facts;
    std::vector<std::string> ingested_sources;  // oldest first

    bool operator==(const KnowledgeBase&) const = default;
};

// ---------------------------------------------------------------------------
// Conversation
// ---------------------------------------------------------------------------

enum class PersonaMode { in_town, out_of_town };

enum class Speaker { user, assistant };

enum class TurnKind { message, generation_offer };

struct Turn {
    std::int64_t turn_index = 0;
    Speaker speaker = Speaker::user;
    std::string text;
    std::optional<std::string> audio_ref;
    Timestamp timestamp{};
    TurnKind kind = TurnKind::message;
    // Set when the assistant reply was cut short ("cancelled", "provider_error: ...").
    std::optional<std::string> error;

    bool operator==(const Turn&) const = default;
};

enum class SessionStatus { active, generating, closed };

struct ReadinessState {
    std::vector<std::string> entities;  // distinct, first-mention order
    int user_turn_count = 0;
    bool offered = false;

    int entity_count() const { return static_cast<int>(entities.size()); }
    bool operator==(const ReadinessState&) const = default;
};

struct Session {
    std::string session_id;
    std::string user_id;
    PersonaMode mode = PersonaMode::in_town;
    std::vector<Turn> transcript;
    SessionStatus status = SessionStatus::active;
    ReadinessState readiness;
    double readiness_score = 0.0;
    // Rolling summary of turns [0, summarized_through).
    std::string summary;
    std::int64_t summarized_through = 0;
    std::vector<std::string> material_ids;
    Timestamp created_at{};

    bool operator==(const Session&) const = default;
};

// ---------------------------------------------------------------------------
// Prompts
// ---------------------------------------------------------------------------

enum class LifeStage { childhood, school, adulthood };

struct EraHint {
    int decade_start = 0;
    int decade_end = 0;  // inclusive
    std::string label;   // "1960s"

    bool operator==(const EraHint&) const = default;
};

struct ImagePrompt {
    std::string scene_summary;
    std::string subject;  // who appears in the scene, from the profile
    std::optional<LifeStage> life_stage;
    std::optional<EraHint> era_hint;
    std::vector<Fact> setting_facts;
    std::vector<std::string> composition_rules;
    std::vector<std::string> negative_clauses;
    std::optional<std::string> feedback;  // user feedback carried into a redraw
    std::string template_version;

    bool operator==(const ImagePrompt&) const = default;
};

struct TextPrompt {
    std::string voice = "first-person";
    std::string tone = "elegant, reflective";
    std::string background;
    std::vector<std::string> source_details;
    int embellishment_budget = 3;
    std::string template_version;

    bool operator==(const TextPrompt&) const = default;
};

// ---------------------------------------------------------------------------
// Materials
// ---------------------------------------------------------------------------

enum class Provenance { generated, edited, redrawn };

struct ImageCandidate {
    std::string image_ref;  // content hash of the stored PNG
    int width = 0;
    int height = 0;
    Provenance provenance = Provenance::generated;
    std::optional<std::string> parent;
    ImagePrompt prompt_used;
    std::optional<std::string> instruction;  // edit instruction, edited candidates only

    bool operator==(const ImageCandidate&) const = default;
};

struct Point {
    int x = 0;
    int y = 0;

    bool operator==(const Point&) const = default;
};

// Half-open run [x, x + length) on row y.
struct RowSpan {
    int y = 0;
    int x = 0;
    int length = 0;

    bool operator==(const RowSpan&) const = default;
};

struct MaskRegion {
    std::string image_ref;
    std::vector<std::vector<Point>> polygons;  // closed rings, 0-based pixel coords
    std::vector<RowSpan> spans;

    bool operator==(const MaskRegion&) const = default;
};

struct NarrativeText {
    std::string body;
    bool user_edited = false;

    bool operator==(const NarrativeText&) const = default;
};

struct MemoryMaterial {
    std::string material_id;
    std::string session_id;
    std::string user_id;
    std::vector<ImageCandidate> image_candidates;
    std::optional<std::size_t> selected_image;
    NarrativeText narrative;
    Timestamp created_at{};

    bool operator==(const MemoryMaterial&) const = default;
};

enum class JobStatus { queued, running, done, failed };

struct GenerationJob {
    std::string job_id;
    std::string session_id;
    std::string user_id;
    std::vector<Turn> transcript_snapshot;
    std::optional<ImagePrompt> image_prompt;
    std::optional<TextPrompt> text_prompt;
    JobStatus status = JobStatus::queued;
    std::optional<std::string> error_cause;  // "timeout", "provider_error", ...
    std::optional<std::string> error_message;
    std::optional<std::string> material_id;
    Timestamp created_at{};

    bool operator==(const GenerationJob&) const = default;
};

// ---------------------------------------------------------------------------
// Storybook
// ---------------------------------------------------------------------------

struct StorybookEntry {
    std::string entry_id;
    std::string material_id;
    std::string image_ref;
    std::string narrative;
    std::string caption;
    Timestamp created_at{};
    std::size_t position = 0;

    bool operator==(const StorybookEntry&) const = default;
};

struct LifeStorybook {
    std::string user_id;
    std::vector<StorybookEntry> entries;  // sorted by position

    bool operator==(const LifeStorybook&) const = default;
};

// ---------------------------------------------------------------------------
// Enum names (wire form) and display labels
// ---------------------------------------------------------------------------

std::string_view to_string(Gender v);
std::string_view to_string(FactCategory v);
std::string_view to_string(PersonaMode v);
std::string_view to_string(Speaker v);
std::string_view to_string(TurnKind v);
std::string_view to_string(SessionStatus v);
std::string_view to_string(LifeStage v);
std::string_view to_string(Provenance v);
std::string_view to_string(JobStatus v);

// Parsers throw Error(validation) on unknown names.
PersonaMode parse_persona_mode(std::string_view s);
FactCategory parse_fact_category(std::string_view s);

// "Guided Reminiscence" / "Free Reminiscence".
std::string_view display_label(PersonaMode mode);

// Lower rank sorts first: landmark > geography > cultural_custom > era_event > other.
int category_priority(FactCategory c);

inline constexpr int kSeniorAgeThreshold = 60;

}  // namespace remi
