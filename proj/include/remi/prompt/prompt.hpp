#pragma once

// Prompt organizer: versioned templates plus the structured specs that are
// rendered into system, image and narrative prompts.

#include "remi/core/types.hpp"
#include "remi/providers/provider.hpp"
#include "remi/text/entities.hpp"
#include "remi/text/template.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace remi::prompt {

inline constexpr std::array<std::string_view, 5> kThemes{"childhood", "family", "school life", "festivals", "events"};

inline constexpr std::string_view kInTownPersona = "peer from the user's hometown";
inline constexpr std::string_view kOutOfTownPersona = "peer from elsewhere, curious listener";
inline constexpr std::string_view kListenerMarker = "Your main role is to listen.";

struct Guardrail {
    std::string id;
    std::string text;
};

// Templates of one version directory (resources/prompts/v1). Line-list
// resources (guardrails, composition rules, negative clauses) skip blank,
// "#" and "##!" lines.
class PromptLibrary {
public:
    static PromptLibrary load(const std::filesystem::path& dir);

    const text::Template& get(std::string_view name) const;
    bool has(std::string_view name) const;
    const std::string& version() const { return version_; }
    const std::vector<Guardrail>& guardrails() const { return guardrails_; }
    const std::vector<std::string>& composition_rules() const { return composition_rules_; }
    const std::vector<std::string>& negative_clauses() const { return negative_clauses_; }

private:
    std::string version_;
    std::map<std::string, text::Template, std::less<>> templates_;
    std::vector<Guardrail> guardrails_;
    std::vector<std::string> composition_rules_;
    std::vector<std::string> negative_clauses_;
};

// ---------------------------------------------------------------------------
// Eras and life stages
// ---------------------------------------------------------------------------

// Typical age at each stage: childhood 10, school 15, adulthood 30.
int stage_age(LifeStage stage);

// Decade the user lived through at `stage`, from the age-band midpoint.
EraHint era_for(const AgeBand& age, LifeStage stage, int current_year);

// Stage cue with the most mentions across user turns; ties go to the cue
// mentioned first. Empty when no cue appears.
std::optional<LifeStage> detect_life_stage(const std::vector<Turn>& turns, const text::Lexicon& lexicon);

// ---------------------------------------------------------------------------
// System prompt
// ---------------------------------------------------------------------------

struct SystemPromptSpec {
    PersonaMode mode = PersonaMode::in_town;
    std::string persona;
    text::Slots profile_slots;  // name, gender, age_band, hometown, province, relocation, era
    std::vector<Fact> facts;    // always empty for out_of_town
    std::vector<std::string> themes;
    std::vector<Guardrail> guardrails;
    std::string template_version;
};

// `facts` are the already retrieved facts; they are dropped for out_of_town.
SystemPromptSpec build_system_prompt_spec(PersonaMode mode, const UserProfile& profile, std::vector<Fact> facts,
                                          const PromptLibrary& library, int current_year);
std::string render_system_prompt(const SystemPromptSpec& spec, const PromptLibrary& library);

// Retrieval query for in_town sessions: hometown words plus the entities
// the session has surfaced so far.
std::vector<std::string> system_prompt_query(const UserProfile& profile, const ReadinessState& readiness);

std::string assemble_system_prompt(PersonaMode mode, const UserProfile& profile, const KnowledgeBase& kb,
                                   const ReadinessState& readiness, const PromptLibrary& library, std::size_t k,
                                   int current_year);

// Profile display helpers shared with the offer and narrative prompts.
std::string describe_age_band(const AgeBand& age);
std::string describe_relocation(int months);
std::string describe_gender(Gender gender);

// ---------------------------------------------------------------------------
// Generation prompts
// ---------------------------------------------------------------------------

struct GenerationContext {
    const PromptLibrary& library;
    const text::Lexicon& lexicon;
    int current_year = 2024;
    std::size_t k = 6;
};

// User-turn entities of a transcript, distinct, first-mention order.
std::vector<std::string> transcript_entities(const std::vector<Turn>& turns, const text::EntityDetector& detector);

// Who appears in the picture, e.g. "a young girl"; empty without a stage.
std::string scene_subject(Gender gender, std::optional<LifeStage> stage);

// Needs at least one user turn. The scene summary comes from a distillation
// call to `chat`; setting facts are those matching at least one entity.
ImagePrompt build_image_prompt(const std::vector<Turn>& snapshot, const UserProfile& profile,
                               const KnowledgeBase& kb, providers::ChatProvider& chat,
                               const providers::RetryPolicy& retry, const GenerationContext& ctx);

std::string render_image_prompt(const ImagePrompt& prompt, const UserProfile& profile, const PromptLibrary& library);

// Clauses of user turns that carry at least one entity, verbatim apart from
// a stripped leading subject pronoun ("we caught fish in the river after
// school" gives "caught fish in the river" and "after school").
std::vector<std::string> extract_source_details(const std::vector<Turn>& turns, const text::EntityDetector& detector);

TextPrompt build_text_prompt(const std::vector<Turn>& snapshot, const UserProfile& profile, int embellishment_budget,
                             const GenerationContext& ctx);

std::string render_text_prompt(const TextPrompt& prompt, const UserProfile& profile, const PromptLibrary& library);

// Chat request that turns a text prompt into a narrative.
providers::ChatRequest narrative_request(const TextPrompt& prompt, const UserProfile& profile,
                                         const PromptLibrary& library);

// ---------------------------------------------------------------------------
// Conversation helpers
// ---------------------------------------------------------------------------

std::string render_offer(const std::vector<std::string>& entities, const PromptLibrary& library);
std::string render_summary_instruction(const std::string& previous_summary, const PromptLibrary& library);
std::string with_summary(const std::string& system_prompt, const std::string& summary, const PromptLibrary& library);

// "a", "a and b", "a, b and c"
std::string join_natural(const std::vector<std::string>& items);

}  // namespace remi::prompt
