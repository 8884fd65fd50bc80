#pragma once

#include "remi/conversation/engine.hpp"
#include "remi/generation/generator.hpp"
#include "remi/service/config.hpp"
#include "remi/storybook/storybook.hpp"

#include <memory>
#include <optional>
#include <string>

namespace remi::service {

// Placeholder bearer token bound to one user; not a real credential.
struct AccessToken {
    std::string token;
    std::string user_id;
    Timestamp created_at{};

    bool operator==(const AccessToken&) const = default;
};
void to_json(json& j, const AccessToken& v);
void from_json(const json& j, AccessToken& v);

struct CreatedProfile {
    UserProfile profile;
    std::string token;
    std::vector<FieldError> warnings;
};

// Test hooks; production uses the system clock, random ids and the
// providers named in the config.
struct ServiceOptions {
    std::shared_ptr<const Clock> clock;
    std::shared_ptr<IdGenerator> ids;
    std::optional<providers::ProviderRegistry> providers;
    bool resume_jobs = true;
};

// Everything behind the HTTP API: stores under data_dir, the pipeline
// modules and the job runner. Handlers hold no state of their own, so a
// new Service over the same data_dir continues where the last one stopped.
class Service {
public:
    explicit Service(ServiceConfig config, ServiceOptions options = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    const ServiceConfig& config() const { return config_; }
    const std::string& providers_mode() const { return registry_.mode; }

    CreatedProfile create_profile(const json& raw);
    UserProfile get_profile(const std::string& user_id) const;
    std::vector<UserProfile> list_profiles() const;
    // Throws unauthorized for unknown tokens.
    std::string authenticate(std::string_view token) const;
    std::string issue_token(const std::string& user_id);

    KnowledgeBase ingest_documents(const std::string& user_id, const std::vector<knowledge::Document>& docs);
    // Fetches encyclopedia pages by title first; precondition when no
    // encyclopedia is configured.
    KnowledgeBase ingest_titles(const std::string& user_id, const std::vector<std::string>& titles);
    KnowledgeBase knowledge_base(const std::string& user_id) const;

    // Ownership-checked lookups: not_found when missing, forbidden when the
    // resource belongs to someone else.
    Session session_for(const std::string& user_id, const std::string& session_id) const;
    GenerationJob job_for(const std::string& user_id, const std::string& job_id) const;
    MemoryMaterial material_for(const std::string& user_id, const std::string& material_id) const;

    GenerationJob request_generation(const std::string& user_id, const std::string& session_id);
    // Blocks until no generation job is queued or running.
    void wait_for_jobs();

    conversation::ConversationEngine& engine() { return *engine_; }
    generation::MaterialGenerator& generator() { return *generator_; }
    storybook::StorybookArchive& storybook() { return *storybook_; }
    media::MediaStore& media() { return *media_; }
    providers::ProviderRegistry& providers() { return registry_; }
    const Clock& clock() const { return *clock_; }

private:
    void run(const std::string& job_id);
    void resume();

    ServiceConfig config_;
    std::shared_ptr<const Clock> clock_;
    std::shared_ptr<IdGenerator> ids_;
    providers::ProviderRegistry registry_;
    prompt::PromptLibrary prompts_;
    text::LexiconSet lexicons_;

    std::unique_ptr<DocumentStore<UserProfile>> profiles_;
    std::unique_ptr<DocumentStore<AccessToken>> tokens_;
    std::unique_ptr<DocumentStore<Session>> sessions_;
    std::unique_ptr<DocumentStore<GenerationJob>> jobs_;
    std::unique_ptr<DocumentStore<MemoryMaterial>> materials_;
    std::unique_ptr<DocumentStore<LifeStorybook>> books_;
    std::unique_ptr<knowledge::KnowledgeStore> knowledge_;
    std::unique_ptr<media::MediaStore> media_;

    std::unique_ptr<conversation::ConversationEngine> engine_;
    std::unique_ptr<generation::MaterialGenerator> generator_;
    std::unique_ptr<storybook::StorybookArchive> storybook_;
    std::unique_ptr<generation::JobRunner> runner_;  // last: stopped first
};

}  // namespace remi::service
