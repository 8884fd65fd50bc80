#include "remi/knowledge/knowledge.hpp"

#include "remi/text/tokenize.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>

namespace remi::knowledge {

void to_json(json& j, const Document& d) {
    j = json{{"doc_id", d.doc_id}, {"title", d.title}, {"plain_text", d.plain_text}};
}

void from_json(const json& j, Document& d) {
    d.doc_id = j.at("doc_id").get<std::string>();
    d.title = j.value("title", std::string());
    d.plain_text = j.at("plain_text").get<std::string>();
}

namespace {

bool accept_any(std::string_view) { return true; }

bool is_year(std::string_view tok) {
    if (tok.size() != 4 || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return false;
    int y = std::stoi(std::string(tok));
    return y >= 1000 && y <= 2099;
}

std::string truncate_at_word(const std::string& text, std::size_t max_chars) {
    if (text.size() <= max_chars) return text;
    auto cut = text.rfind(' ', max_chars);
    if (cut == std::string::npos || cut == 0) {
        cut = max_chars;
        // Do not split a UTF-8 sequence.
        while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
    }
    return text.substr(0, cut);
}

std::vector<std::string> hometown_terms(const Hometown& h) {
    auto terms = text::keywords(h.name);
    if (h.province)
        for (auto& t : text::keywords(*h.province))
            if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(t);
    return terms;
}

bool names_hometown(std::string_view sentence, const std::vector<std::string>& sentence_keywords,
                    const Hometown& h, const std::vector<std::string>& terms) {
    for (const auto& t : terms) {
        if (text::is_ascii(t)) {
            if (std::find(sentence_keywords.begin(), sentence_keywords.end(), t) != sentence_keywords.end())
                return true;
        } else if (sentence.find(t) != std::string_view::npos) {
            return true;
        }
    }
    return !text::is_ascii(h.name) && !h.name.empty() && sentence.find(h.name) != std::string_view::npos;
}

std::string fact_id_for(const std::string& doc_id, std::size_t offset) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06zu", offset);
    return "f-" + doc_id + "-" + buf;
}

}  // namespace

FactExtractor::FactExtractor(text::Lexicon triggers, KnowledgeLimits limits)
    : triggers_(std::move(triggers)), limits_(limits) {}

FactExtractor FactExtractor::load(const std::filesystem::path& resource_dir, KnowledgeLimits limits) {
    return FactExtractor(text::Lexicon::load(resource_dir / "knowledge" / "triggers.txt"), limits);
}

FactCategory FactExtractor::categorize(std::string_view sentence) const {
    std::array<int, 5> hits{};
    for (const auto& m : text::scan_lexicon(triggers_, sentence, accept_any))
        ++hits[static_cast<std::size_t>(category_priority(parse_fact_category(m.category)))];
    for (const auto& tok : text::tokenize(sentence))
        if (is_year(tok.text)) ++hits[static_cast<std::size_t>(category_priority(FactCategory::era_event))];
    constexpr std::array<FactCategory, 5> by_priority{FactCategory::landmark, FactCategory::geography,
                                                     FactCategory::cultural_custom, FactCategory::era_event,
                                                     FactCategory::other};
    std::size_t best = 4;
    int best_hits = 0;
    for (std::size_t i = 0; i < 4; ++i)
        if (hits[i] > best_hits) {
            best = i;
            best_hits = hits[i];
        }
    return by_priority[best];
}

std::vector<Fact> FactExtractor::extract(const Document& doc, const Hometown& hometown) const {
    std::vector<Fact> facts;
    auto terms = hometown_terms(hometown);
    for (const auto& s : text::split_sentences(doc.plain_text)) {
        std::string sentence = text::collapse_whitespace(s.text);
        if (sentence.empty()) continue;
        auto kw = text::keywords(sentence);
        FactCategory category = categorize(sentence);
        bool has_trigger = category != FactCategory::other;
        if (!has_trigger && !names_hometown(sentence, kw, hometown, terms)) continue;

        Fact f;
        f.text = truncate_at_word(sentence, limits_.max_fact_chars);
        f.fact_id = fact_id_for(doc.doc_id, s.offset);
        f.category = category;
        f.source_ref = {doc.doc_id, s.offset};
        f.keywords = text::keywords(f.text);
        // Non-ASCII text has no word boundaries; add matched trigger terms.
        if (!text::is_ascii(f.text))
            for (const auto& m : text::scan_lexicon(triggers_, f.text, accept_any))
                if (std::find(f.keywords.begin(), f.keywords.end(), m.term) == f.keywords.end())
                    f.keywords.push_back(m.term);
        facts.push_back(std::move(f));
    }
    return facts;
}

std::vector<std::string> query_keywords(const std::vector<std::string>& query_terms) {
    std::vector<std::string> out;
    for (const auto& term : query_terms) {
        auto kws = text::keywords(term);
        if (kws.empty() && !text::is_ascii(term)) kws.push_back(term);
        for (auto& k : kws)
            if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(std::move(k));
    }
    return out;
}

int score_fact(const Fact& fact, const std::vector<std::string>& query_kw) {
    int score = 0;
    for (const auto& q : query_kw)
        if (std::find(fact.keywords.begin(), fact.keywords.end(), q) != fact.keywords.end()) ++score;
    return score;
}

std::vector<Fact> retrieve(const KnowledgeBase& kb, const std::vector<std::string>& query_terms, std::size_t k,
                           int min_score) {
    if (k == 0 || kb.facts.empty()) return {};
    auto kw = query_keywords(query_terms);
    std::vector<std::pair<int, const Fact*>> scored;
    for (const auto& f : kb.facts) {
        int s = score_fact(f, kw);
        if (s >= min_score) scored.emplace_back(s, &f);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        int pa = category_priority(a.second->category), pb = category_priority(b.second->category);
        if (pa != pb) return pa < pb;
        return a.second->fact_id < b.second->fact_id;
    });
    std::vector<Fact> out;
    for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(*scored[i].second);
    return out;
}

KnowledgeStore::KnowledgeStore(std::filesystem::path dir, FactExtractor extractor, KnowledgeLimits limits)
    : store_(std::move(dir)), extractor_(std::move(extractor)), limits_(limits) {}

KnowledgeBase KnowledgeStore::get(const std::string& user_id) const {
    if (auto kb = store_.get(user_id)) return *kb;
    return KnowledgeBase{user_id, {}, {}};
}

KnowledgeBase KnowledgeStore::ingest(const UserProfile& profile, const std::vector<Document>& documents) {
    std::vector<FieldError> errors;
    for (std::size_t i = 0; i < documents.size(); ++i) {
        const auto& d = documents[i];
        std::string field = "documents[" + std::to_string(i) + "]";
        if (d.doc_id.empty() || d.doc_id.size() > 128)
            errors.push_back({field + ".doc_id", "doc_id_invalid", "doc_id must be 1-128 characters"});
    }
    if (!errors.empty()) throw Error(ErrorCode::validation, "invalid documents", std::move(errors));

    auto lock = locks_.lock(profile.user_id);
    KnowledgeBase kb = get(profile.user_id);
    if (documents.empty()) return kb;

    for (const auto& doc : documents) {
        auto& facts = kb.facts;
        facts.erase(std::remove_if(facts.begin(), facts.end(),
                                   [&](const Fact& f) { return f.source_ref.doc_id == doc.doc_id; }),
                    facts.end());
        auto& sources = kb.ingested_sources;
        sources.erase(std::remove(sources.begin(), sources.end(), doc.doc_id), sources.end());
        sources.push_back(doc.doc_id);
        for (auto& f : extractor_.extract(doc, profile.hometown)) facts.push_back(std::move(f));
    }

    while (kb.facts.size() > limits_.max_facts && kb.ingested_sources.size() > 1) {
        std::string oldest = kb.ingested_sources.front();
        kb.ingested_sources.erase(kb.ingested_sources.begin());
        kb.facts.erase(std::remove_if(kb.facts.begin(), kb.facts.end(),
                                      [&](const Fact& f) { return f.source_ref.doc_id == oldest; }),
                       kb.facts.end());
    }
    if (kb.facts.size() > limits_.max_facts) kb.facts.resize(limits_.max_facts);

    store_.put(profile.user_id, kb);
    return kb;
}

std::vector<Fact> KnowledgeStore::retrieve_facts(const std::string& user_id,
                                                 const std::vector<std::string>& query_terms, std::size_t k,
                                                 int min_score) const {
    return retrieve(get(user_id), query_terms, k, min_score);
}

}  // namespace remi::knowledge
