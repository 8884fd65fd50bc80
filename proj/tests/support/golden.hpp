#pragma once

#include "remi/core/store.hpp"
#include "remi/prompt/prompt.hpp"

#include "support/fixtures.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

namespace remi::testing {

struct GoldenCase {
    std::string name;  // file stem under tests/golden/system_prompts
    std::string rendered;
    std::vector<Fact> facts;  // facts of the KB the prompt was built from
    PersonaMode mode = PersonaMode::in_town;
};

inline constexpr int kGoldenYear = 2024;

inline const prompt::PromptLibrary& prompt_library() {
    static const prompt::PromptLibrary lib =
        prompt::PromptLibrary::load(std::filesystem::path(REMI_RESOURCE_DIR) / "prompts" / "v1");
    return lib;
}

// 3 profiles x 2 modes x {empty KB, 6-fact KB}.
inline std::vector<GoldenCase> golden_system_prompt_cases() {
    std::vector<GoldenCase> out;
    for (const auto& profile : {pingyao_profile(), harbin_profile(), xian_profile()}) {
        for (auto mode : {PersonaMode::in_town, PersonaMode::out_of_town}) {
            for (bool with_facts : {false, true}) {
                KnowledgeBase kb;
                kb.user_id = profile.user_id;
                if (with_facts) kb = six_fact_kb(profile.user_id);
                GoldenCase c;
                c.name = profile.user_id.substr(4) + "_" + std::string(to_string(mode)) + (with_facts ? "_kb6" : "_kb0");
                c.rendered = prompt::assemble_system_prompt(mode, profile, kb, {}, prompt_library(), 6, kGoldenYear);
                c.facts = kb.facts;
                c.mode = mode;
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

inline std::filesystem::path golden_dir() {
    return std::filesystem::path(REMI_TEST_DATA_DIR) / "golden" / "system_prompts";
}

inline bool updating_golden() {
    const char* v = std::getenv("REMI_UPDATE_GOLDEN");
    return v && *v && std::string(v) != "0";
}

// Compares against the stored golden file; REMI_UPDATE_GOLDEN=1 rewrites it.
inline bool matches_golden(const GoldenCase& c, std::string* expected = nullptr) {
    auto path = golden_dir() / (c.name + ".txt");
    if (updating_golden()) {
        std::filesystem::create_directories(path.parent_path());
        write_file_atomic(path, c.rendered);
    }
    if (!std::filesystem::exists(path)) return false;
    auto stored = read_file(path);
    if (expected) *expected = stored;
    return stored == c.rendered;
}

}  // namespace remi::testing
