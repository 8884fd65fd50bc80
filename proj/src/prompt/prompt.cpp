#include "remi/prompt/prompt.hpp"

#include "remi/core/error.hpp"
#include "remi/core/store.hpp"
#include "remi/knowledge/knowledge.hpp"
#include "remi/text/tokenize.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace remi::prompt {

namespace {

constexpr std::array<std::string_view, 8> kRequiredTemplates{
    "in_town_system", "out_of_town_system", "image_prompt",     "text_prompt",
    "scene_distillation", "summary",        "generation_offer", "conversation_context"};

std::vector<std::string> content_lines(const std::string& source) {
    std::vector<std::string> out;
    std::istringstream in(source);
    std::string line;
    while (std::getline(in, line)) {
        auto t = text::collapse_whitespace(line);
        if (t.empty() || t.front() == '#') continue;
        out.push_back(std::move(t));
    }
    return out;
}

std::string bullet_list(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += '\n';
        out += "- " + item;
    }
    return out;
}

std::string joined(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += sep;
        out += item;
    }
    return out;
}

std::string display_name(const UserProfile& profile) {
    return profile.display_name.empty() ? std::string("the user") : profile.display_name;
}

bool has_user_turn(const std::vector<Turn>& turns) {
    return std::any_of(turns.begin(), turns.end(), [](const Turn& t) {
        return t.speaker == Speaker::user && t.kind == TurnKind::message;
    });
}

std::string trim_terminal(std::string s) {
    s = text::collapse_whitespace(s);
    while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == ' ')) s.pop_back();
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Library
// ---------------------------------------------------------------------------

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    PromptLibrary lib;
    for (auto name : kRequiredTemplates) {
        auto path = dir / (std::string(name) + ".txt");
        if (!std::filesystem::exists(path)) throw Error(ErrorCode::io, "missing prompt template " + path.string());
        lib.templates_.emplace(std::string(name), text::Template::parse(read_file(path), std::string(name)));
    }
    // Optional extra templates are picked up too.
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        auto stem = entry.path().stem().string();
        if (entry.path().extension() != ".txt" || lib.templates_.count(stem)) continue;
        if (stem == "guardrails" || stem == "composition_rules" || stem == "negative_clauses") continue;
        lib.templates_.emplace(stem, text::Template::parse(read_file(entry.path()), stem));
    }

    lib.version_ = lib.get("in_town_system").header("version");
    if (lib.version_.empty()) lib.version_ = dir.filename().string();

    for (const auto& line : content_lines(read_file(dir / "guardrails.txt"))) {
        auto colon = line.find(':');
        if (colon == std::string::npos) throw Error(ErrorCode::validation, "guardrail line without id: " + line);
        lib.guardrails_.push_back({text::collapse_whitespace(line.substr(0, colon)),
                                   text::collapse_whitespace(line.substr(colon + 1))});
    }
    for (std::string_view required : {"gentle_tone", "distress_avoidance"}) {
        if (std::none_of(lib.guardrails_.begin(), lib.guardrails_.end(),
                         [&](const Guardrail& g) { return g.id == required; }))
            throw Error(ErrorCode::validation, "guardrails missing " + std::string(required));
    }
    lib.composition_rules_ = content_lines(read_file(dir / "composition_rules.txt"));
    lib.negative_clauses_ = content_lines(read_file(dir / "negative_clauses.txt"));
    return lib;
}

const text::Template& PromptLibrary::get(std::string_view name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw Error(ErrorCode::not_found, "prompt template " + std::string(name) + " not found");
    return it->second;
}

bool PromptLibrary::has(std::string_view name) const { return templates_.find(name) != templates_.end(); }

// ---------------------------------------------------------------------------
// Eras and stages
// ---------------------------------------------------------------------------

int stage_age(LifeStage stage) {
    switch (stage) {
        case LifeStage::childhood: return 10;
        case LifeStage::school: return 15;
        case LifeStage::adulthood: return 30;
    }
    return 10;
}

EraHint era_for(const AgeBand& age, LifeStage stage, int current_year) {
    int year = current_year - age.midpoint() + stage_age(stage);
    int decade = year >= 0 ? year / 10 * 10 : -((-year + 9) / 10 * 10);
    return {decade, decade + 9, std::to_string(decade) + "s"};
}

std::optional<LifeStage> detect_life_stage(const std::vector<Turn>& turns, const text::Lexicon& lexicon) {
    struct Tally {
        int count = 0;
        std::size_t first = 0;  // global mention order
    };
    std::map<LifeStage, Tally> tally;
    std::size_t order = 0;
    for (const auto& turn : turns) {
        if (turn.speaker != Speaker::user || turn.kind != TurnKind::message) continue;
        for (const auto& m : text::scan_lexicon(lexicon, turn.text, text::is_stage_category)) {
            std::string_view cat = m.category;
            cat.remove_prefix(std::string_view("stage:").size());
            LifeStage stage;
            if (cat == "childhood") stage = LifeStage::childhood;
            else if (cat == "school") stage = LifeStage::school;
            else if (cat == "adulthood") stage = LifeStage::adulthood;
            else continue;
            auto [it, inserted] = tally.try_emplace(stage, Tally{0, order});
            ++it->second.count;
            ++order;
        }
    }
    std::optional<LifeStage> best;
    Tally best_tally;
    for (const auto& [stage, t] : tally) {
        if (!best || t.count > best_tally.count || (t.count == best_tally.count && t.first < best_tally.first)) {
            best = stage;
            best_tally = t;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// System prompt
// ---------------------------------------------------------------------------

std::string describe_age_band(const AgeBand& age) {
    if (age.lower == age.upper) return std::to_string(age.lower);
    return std::to_string(age.lower) + "-" + std::to_string(age.upper);
}

std::string describe_relocation(int months) {
    if (months <= 0) return "less than a month";
    auto plural = [](int n, const char* unit) { return std::to_string(n) + " " + unit + (n == 1 ? "" : "s"); };
    if (months < 12) return plural(months, "month");
    if (months % 12 == 0) return plural(months / 12, "year");
    return plural(months / 12, "year") + " and " + plural(months % 12, "month");
}

std::string describe_gender(Gender gender) {
    switch (gender) {
        case Gender::female: return "female";
        case Gender::male: return "male";
        case Gender::unspecified: return "not stated";
    }
    return "not stated";
}

SystemPromptSpec build_system_prompt_spec(PersonaMode mode, const UserProfile& profile, std::vector<Fact> facts,
                                          const PromptLibrary& library, int current_year) {
    SystemPromptSpec spec;
    spec.mode = mode;
    spec.persona = std::string(mode == PersonaMode::in_town ? kInTownPersona : kOutOfTownPersona);
    spec.template_version = library.version();

    std::string province;
    if (profile.hometown.province &&
        text::to_lower(profile.hometown.name).find(text::to_lower(*profile.hometown.province)) == std::string::npos)
        province = *profile.hometown.province;
    spec.profile_slots = {
        {"name", display_name(profile)},
        {"gender", describe_gender(profile.gender)},
        {"age_band", describe_age_band(profile.age_band)},
        {"hometown", profile.hometown.name},
        {"province", province},
        {"relocation", describe_relocation(profile.relocation_months)},
        {"era", era_for(profile.age_band, LifeStage::childhood, current_year).label},
    };
    if (mode == PersonaMode::in_town) spec.facts = std::move(facts);
    spec.themes.assign(kThemes.begin(), kThemes.end());
    spec.guardrails = library.guardrails();
    return spec;
}

std::string render_system_prompt(const SystemPromptSpec& spec, const PromptLibrary& library) {
    text::Slots slots = spec.profile_slots;
    slots["persona"] = spec.persona;
    slots["listener_marker"] = std::string(kListenerMarker);
    slots["themes"] = bullet_list(spec.themes);
    std::vector<std::string> rails;
    for (const auto& g : spec.guardrails) rails.push_back(g.text);
    slots["guardrails"] = bullet_list(rails);
    std::vector<std::string> facts;
    for (const auto& f : spec.facts) facts.push_back(f.text);
    slots["facts"] = bullet_list(facts);
    auto name = spec.mode == PersonaMode::in_town ? "in_town_system" : "out_of_town_system";
    return library.get(name).render(slots);
}

std::vector<std::string> system_prompt_query(const UserProfile& profile, const ReadinessState& readiness) {
    std::vector<std::string> query{profile.hometown.name};
    if (profile.hometown.province) query.push_back(*profile.hometown.province);
    query.insert(query.end(), readiness.entities.begin(), readiness.entities.end());
    return query;
}

std::string assemble_system_prompt(PersonaMode mode, const UserProfile& profile, const KnowledgeBase& kb,
                                   const ReadinessState& readiness, const PromptLibrary& library, std::size_t k,
                                   int current_year) {
    std::vector<Fact> facts;
    if (mode == PersonaMode::in_town) facts = knowledge::retrieve(kb, system_prompt_query(profile, readiness), k);
    return render_system_prompt(build_system_prompt_spec(mode, profile, std::move(facts), library, current_year),
                                library);
}

// ---------------------------------------------------------------------------
// Image prompt
// ---------------------------------------------------------------------------

std::vector<std::string> transcript_entities(const std::vector<Turn>& turns, const text::EntityDetector& detector) {
    std::vector<std::string> out;
    for (const auto& turn : turns) {
        if (turn.speaker != Speaker::user || turn.kind != TurnKind::message) continue;
        for (auto& term : detector.distinct(turn.text))
            if (std::find(out.begin(), out.end(), term) == out.end()) out.push_back(std::move(term));
    }
    return out;
}

std::string scene_subject(Gender gender, std::optional<LifeStage> stage) {
    if (!stage) return {};
    const char* const table[3][3] = {
        {"a young girl", "a young boy", "a young child"},
        {"a schoolgirl", "a schoolboy", "a schoolchild"},
        {"a young woman", "a young man", "a young adult"},
    };
    int g = gender == Gender::female ? 0 : gender == Gender::male ? 1 : 2;
    return table[static_cast<int>(*stage)][g];
}

ImagePrompt build_image_prompt(const std::vector<Turn>& snapshot, const UserProfile& profile,
                               const KnowledgeBase& kb, providers::ChatProvider& chat,
                               const providers::RetryPolicy& retry, const GenerationContext& ctx) {
    if (!has_user_turn(snapshot)) throw Error(ErrorCode::precondition, "transcript has no user turns");
    text::EntityDetector detector(ctx.lexicon, profile.locale);
    auto entities = transcript_entities(snapshot, detector);

    ImagePrompt prompt;
    prompt.life_stage = detect_life_stage(snapshot, ctx.lexicon);
    if (prompt.life_stage) prompt.era_hint = era_for(profile.age_band, *prompt.life_stage, ctx.current_year);
    prompt.subject = scene_subject(profile.gender, prompt.life_stage);

    providers::ChatRequest req;
    req.purpose = providers::ChatPurpose::distillation;
    req.stream = false;
    req.system_prompt = ctx.library.get("scene_distillation").render({{"entities", joined(entities, ", ")}});
    for (const auto& turn : snapshot) {
        if (turn.kind != TurnKind::message || turn.text.empty()) continue;
        req.messages.push_back({turn.speaker == Speaker::user ? "user" : "assistant", turn.text});
    }
    req.hints = entities;
    prompt.scene_summary = trim_terminal(providers::with_retry(retry, [&] { return chat.complete(req); }));
    if (prompt.scene_summary.empty()) {
        for (auto it = snapshot.rbegin(); it != snapshot.rend(); ++it)
            if (it->speaker == Speaker::user && it->kind == TurnKind::message) {
                prompt.scene_summary = trim_terminal(it->text);
                break;
            }
    }

    if (!entities.empty()) prompt.setting_facts = knowledge::retrieve(kb, entities, ctx.k, 1);
    prompt.composition_rules = ctx.library.composition_rules();
    prompt.negative_clauses = ctx.library.negative_clauses();
    prompt.template_version = ctx.library.version();
    return prompt;
}

std::string render_image_prompt(const ImagePrompt& prompt, const UserProfile& profile, const PromptLibrary& library) {
    std::vector<std::string> facts;
    for (const auto& f : prompt.setting_facts) facts.push_back(f.text);
    return library.get("image_prompt")
        .render({
            {"scene", trim_terminal(prompt.scene_summary)},
            {"subject", prompt.subject},
            {"era", prompt.era_hint ? prompt.era_hint->label : std::string()},
            {"place", profile.hometown.name},
            {"facts", bullet_list(facts)},
            {"feedback", prompt.feedback.value_or("")},
            {"composition", joined(prompt.composition_rules, "; ")},
            {"negative", joined(prompt.negative_clauses, "; ")},
        });
}

// ---------------------------------------------------------------------------
// Text prompt
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string, std::less<>> kCoordinators{"and", "but", "so", "then"};
const std::set<std::string, std::less<>> kSubordinators{"after", "before", "when", "while", "because", "until"};
const std::set<std::string, std::less<>> kSubjectPronouns{"i", "we", "he", "she", "they", "you", "it", "i'd", "we'd"};

}  // namespace

std::vector<std::string> extract_source_details(const std::vector<Turn>& turns, const text::EntityDetector& detector) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& turn : turns) {
        if (turn.speaker != Speaker::user || turn.kind != TurnKind::message) continue;
        const std::string& src = turn.text;
        auto tokens = text::tokenize(src);
        auto mentions = detector.mentions(src);

        std::vector<std::pair<std::size_t, std::size_t>> clauses;  // token index [first, last)
        std::size_t start = 0;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            auto word = text::to_lower(tokens[i].text);
            bool coordinator = kCoordinators.count(word) > 0;
            bool boundary = coordinator || kSubordinators.count(word) > 0 ||
                            (i > 0 && (tokens[i].sentence_start || !tokens[i].joined_to_previous));
            if (!boundary) continue;
            if (i > start) clauses.emplace_back(start, i);
            start = coordinator ? i + 1 : i;
        }
        if (start < tokens.size()) clauses.emplace_back(start, tokens.size());

        for (auto [first, last] : clauses) {
            while (first < last && kSubjectPronouns.count(text::to_lower(tokens[first].text))) ++first;
            if (first >= last) continue;
            std::size_t begin = tokens[first].begin, end = tokens[last - 1].end;
            std::string clause = src.substr(begin, end - begin);
            bool long_enough = text::is_ascii(clause) ? last - first >= 2 : clause.size() >= 6;
            bool has_entity = std::any_of(mentions.begin(), mentions.end(), [&](const text::EntityMention& m) {
                return m.begin >= begin && m.end <= end;
            });
            if (!long_enough || !has_entity) continue;
            if (seen.insert(text::to_lower(clause)).second) out.push_back(std::move(clause));
        }
    }
    return out;
}

TextPrompt build_text_prompt(const std::vector<Turn>& snapshot, const UserProfile& profile, int embellishment_budget,
                             const GenerationContext& ctx) {
    if (!has_user_turn(snapshot)) throw Error(ErrorCode::precondition, "transcript has no user turns");
    if (embellishment_budget < 0)
        throw Error(ErrorCode::validation, "invalid embellishment budget",
                    {{"embellishment_budget", "out_of_range", "must be zero or more"}});
    text::EntityDetector detector(ctx.lexicon, profile.locale);
    TextPrompt prompt;
    prompt.source_details = extract_source_details(snapshot, detector);
    if (prompt.source_details.empty()) {
        // No entity-bearing clause; keep the user's own words as the one detail.
        for (auto it = snapshot.rbegin(); it != snapshot.rend(); ++it)
            if (it->speaker == Speaker::user && it->kind == TurnKind::message && !trim_terminal(it->text).empty()) {
                prompt.source_details.push_back(trim_terminal(it->text));
                break;
            }
    }
    prompt.background = "Hometown: " + profile.hometown.name + ".";
    if (auto stage = detect_life_stage(snapshot, ctx.lexicon))
        prompt.background += " Era: the " + era_for(profile.age_band, *stage, ctx.current_year).label + ".";
    prompt.embellishment_budget = embellishment_budget;
    prompt.template_version = ctx.library.version();
    return prompt;
}

std::string render_text_prompt(const TextPrompt& prompt, const UserProfile& profile, const PromptLibrary& library) {
    return library.get("text_prompt")
        .render({
            {"voice", prompt.voice},
            {"tone", prompt.tone},
            {"name", display_name(profile)},
            {"background", prompt.background},
            {"details", bullet_list(prompt.source_details)},
            {"budget", prompt.embellishment_budget > 0 ? std::to_string(prompt.embellishment_budget) : ""},
        });
}

providers::ChatRequest narrative_request(const TextPrompt& prompt, const UserProfile& profile,
                                         const PromptLibrary& library) {
    providers::ChatRequest req;
    req.purpose = providers::ChatPurpose::narrative;
    req.stream = false;
    req.system_prompt = render_text_prompt(prompt, profile, library);
    req.messages.push_back({"user", "Please write the narrative now."});
    req.hints = prompt.source_details;
    return req;
}

// ---------------------------------------------------------------------------
// Conversation helpers
// ---------------------------------------------------------------------------

std::string join_natural(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += i + 1 == items.size() ? " and " : ", ";
        out += items[i];
    }
    return out;
}

std::string render_offer(const std::vector<std::string>& entities, const PromptLibrary& library) {
    std::vector<std::string> top(entities.begin(), entities.begin() + std::min<std::size_t>(entities.size(), 3));
    std::string highlights = top.empty() ? std::string("your memories") : "the " + join_natural(top);
    return text::collapse_whitespace(library.get("generation_offer").render({{"highlights", highlights}}));
}

std::string render_summary_instruction(const std::string& previous_summary, const PromptLibrary& library) {
    return library.get("summary").render({{"previous", previous_summary}});
}

std::string with_summary(const std::string& system_prompt, const std::string& summary, const PromptLibrary& library) {
    if (summary.empty()) return system_prompt;
    return library.get("conversation_context").render({{"system_prompt", system_prompt}, {"summary", summary}});
}

}  // namespace remi::prompt
