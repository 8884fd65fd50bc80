#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace remi::text {

// Term dictionary loaded from a resource file with one "category<TAB>term"
// entry per line ('#' starts a comment). Terms are stored normalized.
//
// Entity categories: place, person, event, object.
// Life-stage cue categories: stage:childhood, stage:school, stage:adulthood.
class Lexicon {
public:
    static Lexicon load(const std::filesystem::path& file);
    static Lexicon parse(std::string_view source);

    void add(std::string category, std::string_view term);

    // Categories of a normalized (space-joined) term; a term may carry
    // several ("school" is both a place and a school-stage cue).
    const std::vector<std::string>& categories_of(std::string_view normalized_term) const;
    const std::vector<std::string>& terms_in(std::string_view category) const;
    std::size_t max_term_tokens() const { return max_tokens_; }
    // Non-ASCII terms, matched by substring (CJK text is not space-delimited).
    const std::vector<std::pair<std::string, std::string>>& substring_terms() const { return substring_terms_; }

private:
    std::map<std::string, std::vector<std::string>, std::less<>> categories_by_term_;
    std::map<std::string, std::vector<std::string>, std::less<>> terms_by_category_;
    std::vector<std::pair<std::string, std::string>> substring_terms_;  // term, category
    std::size_t max_tokens_ = 1;
};

struct EntityMention {
    std::string term;      // normalized, e.g. "temple fair"
    std::string category;  // place | person | event | object | name
    std::size_t begin = 0;  // byte span in the source text
    std::size_t end = 0;
};

// Longest-match dictionary scan restricted to categories accepted by
// `accept`. Returns one mention per match, category set to the first
// accepted category of the term.
std::vector<EntityMention> scan_lexicon(const Lexicon& lexicon, std::string_view text,
                                        bool (*accept)(std::string_view category));

bool is_entity_category(std::string_view category);
bool is_stage_category(std::string_view category);

// Deterministic noun/keyword heuristic: longest dictionary match over
// normalized tokens, plus runs of capitalized tokens as proper names for
// Latin-script locales.
class EntityDetector {
public:
    EntityDetector(const Lexicon& lexicon, std::string locale);

    // All mentions in text order (repeats included).
    std::vector<EntityMention> mentions(std::string_view text) const;
    // Distinct terms, first-mention order.
    std::vector<std::string> distinct(std::string_view text) const;

    const Lexicon& lexicon() const { return lexicon_; }

private:
    const Lexicon& lexicon_;
    bool detect_capitalized_;
};

// Lexicons keyed by language ("en", "zh"), loaded from <dir>/<lang>.txt.
class LexiconSet {
public:
    static LexiconSet load(const std::filesystem::path& dir);
    void add(std::string language, Lexicon lexicon);
    // Language part of the locale ("zh-CN" -> zh), falling back to "en".
    const Lexicon& for_locale(std::string_view locale) const;

private:
    std::map<std::string, Lexicon, std::less<>> by_language_;
};

}  // namespace remi::text
