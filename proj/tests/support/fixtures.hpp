#pragma once

#include "remi/core/json.hpp"
#include "remi/core/store.hpp"
#include "remi/knowledge/knowledge.hpp"

#include <string>
#include <vector>

namespace remi::testing {

inline std::string fixture_path(const std::string& name) { return std::string(REMI_TEST_DATA_DIR) + "/fixtures/" + name; }

inline std::vector<knowledge::Document> kb50_documents() {
    return json::parse(read_file(fixture_path("kb50_documents.json"))).get<std::vector<knowledge::Document>>();
}

inline UserProfile pingyao_profile(const std::string& user_id = "usr_pingyao") {
    UserProfile p;
    p.user_id = user_id;
    p.display_name = "Mei";
    p.gender = Gender::female;
    p.age_band = {66, 70};
    p.hometown = {"Pingyao, Shanxi", std::string("Shanxi")};
    p.relocation_months = 24;
    return p;
}

inline UserProfile harbin_profile(const std::string& user_id = "usr_harbin") {
    UserProfile p;
    p.user_id = user_id;
    p.display_name = "Jun";
    p.gender = Gender::male;
    p.age_band = {72, 76};
    p.hometown = {"Harbin", std::string("Heilongjiang")};
    p.relocation_months = 150;
    return p;
}

// No display name, unstated gender, hometown without a province tag.
inline UserProfile xian_profile(const std::string& user_id = "usr_xian") {
    UserProfile p;
    p.user_id = user_id;
    p.gender = Gender::unspecified;
    p.age_band = {60, 60};
    p.hometown = {"Xi'an", std::nullopt};
    p.relocation_months = 5;
    return p;
}

// The first six facts extracted from the fixture corpus for the Pingyao profile.
inline KnowledgeBase six_fact_kb(const std::string& user_id) {
    auto extractor = knowledge::FactExtractor::load(REMI_RESOURCE_DIR);
    KnowledgeBase kb;
    kb.user_id = user_id;
    for (const auto& doc : kb50_documents()) {
        for (auto& f : extractor.extract(doc, pingyao_profile().hometown)) {
            if (kb.facts.size() == 6) break;
            kb.facts.push_back(std::move(f));
        }
        kb.ingested_sources.push_back(doc.doc_id);
        if (kb.facts.size() == 6) break;
    }
    return kb;
}

}  // namespace remi::testing
