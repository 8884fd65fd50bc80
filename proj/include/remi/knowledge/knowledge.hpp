#pragma once

#include "remi/core/json.hpp"
#include "remi/core/store.hpp"
#include "remi/core/types.hpp"
#include "remi/text/entities.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace remi::knowledge {

struct Document {
    std::string doc_id;
    std::string title;
    std::string plain_text;

    bool operator==(const Document&) const = default;
};

void to_json(json& j, const Document& d);
void from_json(const json& j, Document& d);

struct KnowledgeLimits {
    std::size_t max_fact_chars = 500;
    std::size_t max_facts = 1000;
};

// Sentence-level fact segmentation. A sentence becomes a fact when it names
// the hometown (any word of the hometown text or its province) or contains a
// trigger term; its category is the trigger category with the most hits,
// ties going to the higher-priority category, and `other` with no hits.
class FactExtractor {
public:
    explicit FactExtractor(text::Lexicon triggers, KnowledgeLimits limits = {});
    static FactExtractor load(const std::filesystem::path& resource_dir, KnowledgeLimits limits = {});

    std::vector<Fact> extract(const Document& doc, const Hometown& hometown) const;
    FactCategory categorize(std::string_view sentence) const;

private:
    text::Lexicon triggers_;
    KnowledgeLimits limits_;
};

// Deterministic keyword-overlap retrieval.
//
// Each query term is normalized to its keywords ("Temple fairs" -> temple,
// fair); a fact scores the number of distinct query keywords found in its
// keyword list. Results are ordered by score desc, category priority, then
// fact_id, and cut to k. Facts scoring below min_score are dropped.
std::vector<Fact> retrieve(const KnowledgeBase& kb, const std::vector<std::string>& query_terms, std::size_t k,
                           int min_score = 0);
int score_fact(const Fact& fact, const std::vector<std::string>& query_keywords);
std::vector<std::string> query_keywords(const std::vector<std::string>& query_terms);

// One KB document per user. Ingests serialize per user; reads are shared.
class KnowledgeStore {
public:
    KnowledgeStore(std::filesystem::path dir, FactExtractor extractor, KnowledgeLimits limits = {});

    // Re-ingesting a doc_id replaces its facts and marks it newest. When the
    // fact cap is exceeded, whole documents are evicted oldest first.
    KnowledgeBase ingest(const UserProfile& profile, const std::vector<Document>& documents);
    KnowledgeBase get(const std::string& user_id) const;  // empty KB when none
    std::vector<Fact> retrieve_facts(const std::string& user_id, const std::vector<std::string>& query_terms,
                                     std::size_t k, int min_score = 0) const;

private:
    DocumentStore<KnowledgeBase> store_;
    FactExtractor extractor_;
    KnowledgeLimits limits_;
    KeyedMutex locks_;
};

}  // namespace remi::knowledge
