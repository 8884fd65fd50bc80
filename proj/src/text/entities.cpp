#include "remi/text/entities.hpp"

#include "remi/core/error.hpp"
#include "remi/core/store.hpp"
#include "remi/text/tokenize.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace remi::text {

namespace {

const std::vector<std::string> kNoStrings;

std::string normalize_phrase(std::string_view phrase) {
    std::string out;
    for (const auto& tok : tokenize(phrase)) {
        if (!out.empty()) out += ' ';
        out += normalize_term(tok.text);
    }
    return out;
}

bool is_capitalized(const Token& t) {
    unsigned char c = static_cast<unsigned char>(t.text[0]);
    return c < 0x80 && std::isupper(c);
}

// Function words that open sentences or follow pronoun patterns and should
// never start a proper-name run.
bool blocks_name(std::string_view normalized) {
    return is_stopword(normalized) || normalized == "i'm" || normalized == "i've" || normalized == "i'll";
}

}  // namespace

bool is_entity_category(std::string_view c) {
    return c == "place" || c == "person" || c == "event" || c == "object";
}

bool is_stage_category(std::string_view c) { return c.rfind("stage:", 0) == 0; }

Lexicon Lexicon::load(const std::filesystem::path& file) { return parse(read_file(file)); }

Lexicon Lexicon::parse(std::string_view source) {
    Lexicon lex;
    std::istringstream in{std::string(source)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        auto tab = line.find('\t');
        std::string stripped = collapse_whitespace(line);
        if (stripped.empty()) continue;
        if (tab == std::string::npos)
            throw Error(ErrorCode::validation, "lexicon line " + std::to_string(lineno) + ": expected category<TAB>term");
        lex.add(collapse_whitespace(line.substr(0, tab)), collapse_whitespace(line.substr(tab + 1)));
    }
    return lex;
}

void Lexicon::add(std::string category, std::string_view term) {
    if (!is_ascii(term)) {
        substring_terms_.emplace_back(std::string(term), category);
        // Longest first so overlapping CJK terms prefer the longer one.
        std::stable_sort(substring_terms_.begin(), substring_terms_.end(),
                         [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
    }
    std::string norm = is_ascii(term) ? normalize_phrase(term) : std::string(term);
    if (norm.empty()) return;
    auto& cats = categories_by_term_[norm];
    if (std::find(cats.begin(), cats.end(), category) == cats.end()) cats.push_back(category);
    auto& terms = terms_by_category_[category];
    if (std::find(terms.begin(), terms.end(), norm) == terms.end()) terms.push_back(norm);
    max_tokens_ = std::max<std::size_t>(max_tokens_, std::count(norm.begin(), norm.end(), ' ') + 1);
}

const std::vector<std::string>& Lexicon::categories_of(std::string_view normalized_term) const {
    auto it = categories_by_term_.find(normalized_term);
    return it == categories_by_term_.end() ? kNoStrings : it->second;
}

const std::vector<std::string>& Lexicon::terms_in(std::string_view category) const {
    auto it = terms_by_category_.find(category);
    return it == terms_by_category_.end() ? kNoStrings : it->second;
}

namespace {

// Longest match starting at token i among accepted categories.
bool match_at(const Lexicon& lexicon, const std::vector<Token>& tokens, std::size_t i,
              bool (*accept)(std::string_view), EntityMention& out, std::size_t& consumed) {
    std::size_t max_len = std::min(lexicon.max_term_tokens(), tokens.size() - i);
    for (std::size_t len = max_len; len >= 1; --len) {
        bool contiguous = true;
        for (std::size_t k = i + 1; k < i + len; ++k)
            if (!tokens[k].joined_to_previous) contiguous = false;
        if (!contiguous) continue;
        std::string term;
        for (std::size_t k = i; k < i + len; ++k) {
            if (k > i) term += ' ';
            term += normalize_term(tokens[k].text);
        }
        for (const auto& cat : lexicon.categories_of(term)) {
            if (!accept(cat)) continue;
            out = {term, cat, tokens[i].begin, tokens[i + len - 1].end};
            consumed = len;
            return true;
        }
    }
    return false;
}

void add_substring_matches(const Lexicon& lexicon, std::string_view text, bool (*accept)(std::string_view),
                           std::vector<EntityMention>& mentions) {
    std::vector<EntityMention> found;
    for (const auto& [term, cat] : lexicon.substring_terms()) {
        if (!accept(cat)) continue;
        for (auto pos = text.find(term); pos != std::string_view::npos; pos = text.find(term, pos + term.size())) {
            EntityMention m{term, cat, pos, pos + term.size()};
            bool overlaps = std::any_of(found.begin(), found.end(),
                                        [&](const EntityMention& o) { return m.begin < o.end && o.begin < m.end; });
            if (!overlaps) found.push_back(m);
        }
    }
    mentions.insert(mentions.end(), found.begin(), found.end());
    std::stable_sort(mentions.begin(), mentions.end(),
                     [](const EntityMention& a, const EntityMention& b) { return a.begin < b.begin; });
}

}  // namespace

std::vector<EntityMention> scan_lexicon(const Lexicon& lexicon, std::string_view text,
                                        bool (*accept)(std::string_view category)) {
    std::vector<EntityMention> out;
    auto tokens = tokenize(text);
    for (std::size_t i = 0; i < tokens.size();) {
        EntityMention m;
        std::size_t consumed = 0;
        if (is_ascii(tokens[i].text) && match_at(lexicon, tokens, i, accept, m, consumed)) {
            out.push_back(std::move(m));
            i += consumed;
        } else {
            ++i;
        }
    }
    add_substring_matches(lexicon, text, accept, out);
    return out;
}

EntityDetector::EntityDetector(const Lexicon& lexicon, std::string locale) : lexicon_(lexicon) {
    // Capitalization carries no signal in CJK scripts.
    std::string lang = to_lower(locale.substr(0, locale.find('-')));
    detect_capitalized_ = !(lang == "zh" || lang == "ja" || lang == "ko");
}

std::vector<EntityMention> EntityDetector::mentions(std::string_view text) const {
    std::vector<EntityMention> out;
    auto tokens = tokenize(text);
    for (std::size_t i = 0; i < tokens.size();) {
        if (detect_capitalized_ && is_capitalized(tokens[i])) {
            std::size_t j = i;
            while (j + 1 < tokens.size() && tokens[j + 1].joined_to_previous && is_capitalized(tokens[j + 1])) ++j;
            std::size_t start = i;
            while (start <= j && blocks_name(normalize_term(tokens[start].text))) ++start;
            std::size_t run = start <= j ? j - start + 1 : 0;
            // A lone capitalized word at sentence start is just sentence case.
            bool sentence_case_only = run == 1 && start == i && tokens[i].sentence_start;
            if (run >= 1 && !sentence_case_only) {
                std::string term;
                for (std::size_t k = start; k <= j; ++k) {
                    if (k > start) term += ' ';
                    term += to_lower(tokens[k].text);
                }
                std::string category = "name";
                std::string normalized;
                for (std::size_t k = start; k <= j; ++k) {
                    if (k > start) normalized += ' ';
                    normalized += normalize_term(tokens[k].text);
                }
                for (const auto& cat : lexicon_.categories_of(normalized)) {
                    if (is_entity_category(cat)) {
                        category = cat;
                        term = normalized;
                        break;
                    }
                }
                out.push_back({term, category, tokens[start].begin, tokens[j].end});
                i = j + 1;
                continue;
            }
        }
        EntityMention m;
        std::size_t consumed = 0;
        if (is_ascii(tokens[i].text) && match_at(lexicon_, tokens, i, is_entity_category, m, consumed)) {
            out.push_back(std::move(m));
            i += consumed;
        } else {
            ++i;
        }
    }
    add_substring_matches(lexicon_, text, is_entity_category, out);
    return out;
}

std::vector<std::string> EntityDetector::distinct(std::string_view text) const {
    std::vector<std::string> out;
    for (auto& m : mentions(text))
        if (std::find(out.begin(), out.end(), m.term) == out.end()) out.push_back(std::move(m.term));
    return out;
}

LexiconSet LexiconSet::load(const std::filesystem::path& dir) {
    LexiconSet set;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            set.add(entry.path().stem().string(), Lexicon::load(entry.path()));
    if (ec) throw Error(ErrorCode::io, "cannot read lexicon directory " + dir.string());
    if (set.by_language_.empty()) throw Error(ErrorCode::io, "no lexicons in " + dir.string());
    return set;
}

void LexiconSet::add(std::string language, Lexicon lexicon) {
    by_language_.insert_or_assign(to_lower(language), std::move(lexicon));
}

const Lexicon& LexiconSet::for_locale(std::string_view locale) const {
    auto lang = to_lower(locale.substr(0, locale.find_first_of("-_")));
    if (auto it = by_language_.find(lang); it != by_language_.end()) return it->second;
    if (auto it = by_language_.find("en"); it != by_language_.end()) return it->second;
    if (by_language_.empty()) throw Error(ErrorCode::io, "empty lexicon set");
    return by_language_.begin()->second;
}

}  // namespace remi::text
