#include "remi/core/json.hpp"

namespace remi {

Gender parse_gender_name(std::string_view s);
Speaker parse_speaker(std::string_view s);
TurnKind parse_turn_kind(std::string_view s);
SessionStatus parse_session_status(std::string_view s);
LifeStage parse_life_stage(std::string_view s);
Provenance parse_provenance(std::string_view s);
JobStatus parse_job_status(std::string_view s);

namespace {

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
    if (v)
        j[key] = *v;
    else
        j[key] = nullptr;
}

template <typename T>
void get_opt(const json& j, const char* key, std::optional<T>& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        out.reset();
    else
        out = it->get<T>();
}

template <typename T>
void get_or(const json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it != j.end() && !it->is_null()) out = it->get<T>();
}

}  // namespace


#define REMI_ENUM_JSON(Type, parse)                                             \
    void to_json(json& j, Type v) { j = std::string(to_string(v)); }           \
    void from_json(const json& j, Type& v) { v = parse(j.get<std::string>()); }

REMI_ENUM_JSON(Gender, parse_gender_name)
REMI_ENUM_JSON(FactCategory, parse_fact_category)
REMI_ENUM_JSON(PersonaMode, parse_persona_mode)
REMI_ENUM_JSON(Speaker, parse_speaker)
REMI_ENUM_JSON(TurnKind, parse_turn_kind)
REMI_ENUM_JSON(SessionStatus, parse_session_status)
REMI_ENUM_JSON(LifeStage, parse_life_stage)
REMI_ENUM_JSON(Provenance, parse_provenance)
REMI_ENUM_JSON(JobStatus, parse_job_status)

#undef REMI_ENUM_JSON

void to_json(json& j, const AgeBand& v) { j = json::array({v.lower, v.upper}); }
void from_json(const json& j, AgeBand& v) {
    v.lower = j.at(0).get<int>();
    v.upper = j.at(1).get<int>();
}

void to_json(json& j, const Hometown& v) {
    j = json{{"name", v.name}};
    put_opt(j, "province", v.province);
}
void from_json(const json& j, Hometown& v) {
    j.at("name").get_to(v.name);
    get_opt(j, "province", v.province);
}

void to_json(json& j, const UserProfile& v) {
    j = json{{"user_id", v.user_id},
             {"display_name", v.display_name},
             {"gender", v.gender},
             {"age_band", v.age_band},
             {"hometown", v.hometown},
             {"relocation_duration", v.relocation_months},
             {"locale", v.locale},
             {"below_age_threshold", v.below_age_threshold}};
}
void from_json(const json& j, UserProfile& v) {
    j.at("user_id").get_to(v.user_id);
    get_or(j, "display_name", v.display_name);
    j.at("gender").get_to(v.gender);
    j.at("age_band").get_to(v.age_band);
    j.at("hometown").get_to(v.hometown);
    j.at("relocation_duration").get_to(v.relocation_months);
    get_or(j, "locale", v.locale);
    get_or(j, "below_age_threshold", v.below_age_threshold);
}

void to_json(json& j, const SourceRef& v) { j = json{{"doc_id", v.doc_id}, {"offset", v.offset}}; }
void from_json(const json& j, SourceRef& v) {
    j.at("doc_id").get_to(v.doc_id);
    j.at("offset").get_to(v.offset);
}

void to_json(json& j, const Fact& v) {
    j = json{{"fact_id", v.fact_id},
             {"category", v.category},
             {"text", v.text},
             {"source_ref", v.source_ref},
             {"keywords", v.keywords}};
}
void from_json(const json& j, Fact& v) {
    j.at("fact_id").get_to(v.fact_id);
    j.at("category").get_to(v.category);
    j.at("text").get_to(v.text);
    j.at("source_ref").get_to(v.source_ref);
    j.at("keywords").get_to(v.keywords);
}

void to_json(json& j, const KnowledgeBase& v) {
    j = json{{"user_id", v.user_id}, {"facts", v.facts}, {"ingested_sources", v.ingested_sources}};
}
void from_json(const json& j, KnowledgeBase& v) {
    j.at("user_id").get_to(v.user_id);
    j.at("facts").get_to(v.facts);
    j.at("ingested_sources").get_to(v.ingested_sources);
}

void to_json(json& j, const Turn& v) {
    j = json{{"turn_index", v.turn_index},
             {"speaker", v.speaker},
             {"text", v.text},
             {"timestamp", v.timestamp},
             {"kind", v.kind}};
    put_opt(j, "audio_ref", v.audio_ref);
    put_opt(j, "error", v.error);
}
void from_json(const json& j, Turn& v) {
    j.at("turn_index").get_to(v.turn_index);
    j.at("speaker").get_to(v.speaker);
    j.at("text").get_to(v.text);
    j.at("timestamp").get_to(v.timestamp);
    get_or(j, "kind", v.kind);
    get_opt(j, "audio_ref", v.audio_ref);
    get_opt(j, "error", v.error);
}

void to_json(json& j, const ReadinessState& v) {
    j = json{{"entities", v.entities},
             {"entity_count", v.entity_count()},
             {"user_turn_count", v.user_turn_count},
             {"offered", v.offered}};
}
void from_json(const json& j, ReadinessState& v) {
    j.at("entities").get_to(v.entities);
    j.at("user_turn_count").get_to(v.user_turn_count);
    j.at("offered").get_to(v.offered);
}

void to_json(json& j, const Session& v) {
    j = json{{"session_id", v.session_id},
             {"user_id", v.user_id},
             {"mode", v.mode},
             {"mode_label", std::string(display_label(v.mode))},
             {"transcript", v.transcript},
             {"status", v.status},
             {"readiness", v.readiness},
             {"readiness_score", v.readiness_score},
             {"summary", v.summary},
             {"summarized_through", v.summarized_through},
             {"material_ids", v.material_ids},
             {"created_at", v.created_at}};
}
void from_json(const json& j, Session& v) {
    j.at("session_id").get_to(v.session_id);
    j.at("user_id").get_to(v.user_id);
    j.at("mode").get_to(v.mode);
    j.at("transcript").get_to(v.transcript);
    j.at("status").get_to(v.status);
    j.at("readiness").get_to(v.readiness);
    j.at("readiness_score").get_to(v.readiness_score);
    get_or(j, "summary", v.summary);
    get_or(j, "summarized_through", v.summarized_through);
    get_or(j, "material_ids", v.material_ids);
    j.at("created_at").get_to(v.created_at);
}

void to_json(json& j, const EraHint& v) {
    j = json{{"decade_start", v.decade_start}, {"decade_end", v.decade_end}, {"label", v.label}};
}
void from_json(const json& j, EraHint& v) {
    j.at("decade_start").get_to(v.decade_start);
    j.at("decade_end").get_to(v.decade_end);
    j.at("label").get_to(v.label);
}

void to_json(json& j, const ImagePrompt& v) {
    j = json{{"scene_summary", v.scene_summary},
             {"subject", v.subject},
             {"setting_facts", v.setting_facts},
             {"composition_rules", v.composition_rules},
             {"negative_clauses", v.negative_clauses},
             {"template_version", v.template_version}};
    put_opt(j, "life_stage", v.life_stage);
    put_opt(j, "era_hint", v.era_hint);
    put_opt(j, "feedback", v.feedback);
}
void from_json(const json& j, ImagePrompt& v) {
    j.at("scene_summary").get_to(v.scene_summary);
    get_or(j, "subject", v.subject);
    get_or(j, "setting_facts", v.setting_facts);
    get_or(j, "composition_rules", v.composition_rules);
    get_or(j, "negative_clauses", v.negative_clauses);
    get_or(j, "template_version", v.template_version);
    get_opt(j, "life_stage", v.life_stage);
    get_opt(j, "era_hint", v.era_hint);
    get_opt(j, "feedback", v.feedback);
}

void to_json(json& j, const TextPrompt& v) {
    j = json{{"voice", v.voice},
             {"tone", v.tone},
             {"background", v.background},
             {"source_details", v.source_details},
             {"embellishment_budget", v.embellishment_budget},
             {"template_version", v.template_version}};
}
void from_json(const json& j, TextPrompt& v) {
    get_or(j, "voice", v.voice);
    get_or(j, "tone", v.tone);
    get_or(j, "background", v.background);
    j.at("source_details").get_to(v.source_details);
    j.at("embellishment_budget").get_to(v.embellishment_budget);
    get_or(j, "template_version", v.template_version);
}

void to_json(json& j, const ImageCandidate& v) {
    j = json{{"image_ref", v.image_ref},
             {"width", v.width},
             {"height", v.height},
             {"provenance", v.provenance},
             {"prompt_used", v.prompt_used}};
    put_opt(j, "parent", v.parent);
    put_opt(j, "instruction", v.instruction);
}
void from_json(const json& j, ImageCandidate& v) {
    j.at("image_ref").get_to(v.image_ref);
    j.at("width").get_to(v.width);
    j.at("height").get_to(v.height);
    j.at("provenance").get_to(v.provenance);
    j.at("prompt_used").get_to(v.prompt_used);
    get_opt(j, "parent", v.parent);
    get_opt(j, "instruction", v.instruction);
}

void to_json(json& j, const Point& v) { j = json::array({v.x, v.y}); }
void from_json(const json& j, Point& v) {
    if (!j.is_array() || j.size() != 2)
        throw Error(ErrorCode::validation, "polygon vertex must be an [x, y] pair");
    v.x = j.at(0).get<int>();
    v.y = j.at(1).get<int>();
}

void to_json(json& j, const RowSpan& v) { j = json{{"y", v.y}, {"x", v.x}, {"length", v.length}}; }
void from_json(const json& j, RowSpan& v) {
    j.at("y").get_to(v.y);
    j.at("x").get_to(v.x);
    j.at("length").get_to(v.length);
}

void to_json(json& j, const MaskRegion& v) {
    j = json{{"image_ref", v.image_ref}, {"polygons", v.polygons}, {"spans", v.spans}};
}
void from_json(const json& j, MaskRegion& v) {
    get_or(j, "image_ref", v.image_ref);
    get_or(j, "polygons", v.polygons);
    // A single ring may be sent as "polygon".
    if (auto it = j.find("polygon"); it != j.end() && !it->is_null())
        v.polygons.push_back(it->get<std::vector<Point>>());
    get_or(j, "spans", v.spans);
}

void to_json(json& j, const NarrativeText& v) {
    j = json{{"body", v.body}, {"user_edited", v.user_edited}};
}
void from_json(const json& j, NarrativeText& v) {
    j.at("body").get_to(v.body);
    get_or(j, "user_edited", v.user_edited);
}

void to_json(json& j, const MemoryMaterial& v) {
    j = json{{"material_id", v.material_id},
             {"session_id", v.session_id},
             {"user_id", v.user_id},
             {"image_candidates", v.image_candidates},
             {"narrative", v.narrative},
             {"created_at", v.created_at}};
    put_opt(j, "selected_image", v.selected_image);
}
void from_json(const json& j, MemoryMaterial& v) {
    j.at("material_id").get_to(v.material_id);
    j.at("session_id").get_to(v.session_id);
    j.at("user_id").get_to(v.user_id);
    j.at("image_candidates").get_to(v.image_candidates);
    j.at("narrative").get_to(v.narrative);
    j.at("created_at").get_to(v.created_at);
    get_opt(j, "selected_image", v.selected_image);
}

void to_json(json& j, const GenerationJob& v) {
    j = json{{"job_id", v.job_id},
             {"session_id", v.session_id},
             {"user_id", v.user_id},
             {"transcript_snapshot", v.transcript_snapshot},
             {"status", v.status},
             {"created_at", v.created_at}};
    put_opt(j, "image_prompt", v.image_prompt);
    put_opt(j, "text_prompt", v.text_prompt);
    put_opt(j, "error_cause", v.error_cause);
    put_opt(j, "error_message", v.error_message);
    put_opt(j, "material_id", v.material_id);
}
void from_json(const json& j, GenerationJob& v) {
    j.at("job_id").get_to(v.job_id);
    j.at("session_id").get_to(v.session_id);
    j.at("user_id").get_to(v.user_id);
    j.at("transcript_snapshot").get_to(v.transcript_snapshot);
    j.at("status").get_to(v.status);
    j.at("created_at").get_to(v.created_at);
    get_opt(j, "image_prompt", v.image_prompt);
    get_opt(j, "text_prompt", v.text_prompt);
    get_opt(j, "error_cause", v.error_cause);
    get_opt(j, "error_message", v.error_message);
    get_opt(j, "material_id", v.material_id);
}

void to_json(json& j, const StorybookEntry& v) {
    j = json{{"entry_id", v.entry_id},
             {"material_id", v.material_id},
             {"image_ref", v.image_ref},
             {"narrative", v.narrative},
             {"caption", v.caption},
             {"created_at", v.created_at},
             {"position", v.position}};
}
void from_json(const json& j, StorybookEntry& v) {
    j.at("entry_id").get_to(v.entry_id);
    j.at("material_id").get_to(v.material_id);
    j.at("image_ref").get_to(v.image_ref);
    j.at("narrative").get_to(v.narrative);
    j.at("caption").get_to(v.caption);
    j.at("created_at").get_to(v.created_at);
    j.at("position").get_to(v.position);
}

void to_json(json& j, const LifeStorybook& v) {
    j = json{{"user_id", v.user_id}, {"entries", v.entries}};
}
void from_json(const json& j, LifeStorybook& v) {
    j.at("user_id").get_to(v.user_id);
    j.at("entries").get_to(v.entries);
}

}  // namespace remi
