#include "remi/service/service.hpp"

#include "remi/core/log.hpp"
#include "remi/core/profile.hpp"

#include <algorithm>

namespace remi::service {

void to_json(json& j, const AccessToken& v) {
    j = json{{"token", v.token}, {"user_id", v.user_id}, {"created_at", v.created_at}};
}

void from_json(const json& j, AccessToken& v) {
    v.token = j.at("token").get<std::string>();
    v.user_id = j.at("user_id").get<std::string>();
    v.created_at = j.at("created_at").get<Timestamp>();
}

namespace {

std::filesystem::path sub(const ServiceConfig& c, const char* name) { return c.data_dir / name; }

template <typename T>
std::unique_ptr<DocumentStore<T>> open_store(const ServiceConfig& c, const char* name) {
    return std::make_unique<DocumentStore<T>>(sub(c, name));
}

}  // namespace

Service::Service(ServiceConfig config, ServiceOptions options)
    : config_(std::move(config)),
      clock_(options.clock ? options.clock : std::make_shared<SystemClock>()),
      ids_(options.ids ? options.ids : std::make_shared<RandomIdGenerator>()),
      registry_(options.providers ? std::move(*options.providers)
                                  : providers::ProviderRegistry::from_config(config_.providers, config_.resource_dir)),
      prompts_(prompt::PromptLibrary::load(config_.resource_dir / "prompts" / "v1")),
      lexicons_(text::LexiconSet::load(config_.resource_dir / "lexicon")) {
    std::filesystem::create_directories(config_.data_dir);
    profiles_ = open_store<UserProfile>(config_, "profiles");
    tokens_ = open_store<AccessToken>(config_, "tokens");
    sessions_ = open_store<Session>(config_, "sessions");
    jobs_ = open_store<GenerationJob>(config_, "jobs");
    materials_ = open_store<MemoryMaterial>(config_, "materials");
    books_ = open_store<LifeStorybook>(config_, "storybooks");
    knowledge_ = std::make_unique<knowledge::KnowledgeStore>(
        sub(config_, "knowledge"), knowledge::FactExtractor::load(config_.resource_dir, config_.knowledge),
        config_.knowledge);
    media_ = std::make_unique<media::MediaStore>(sub(config_, "media"));

    engine_ = std::make_unique<conversation::ConversationEngine>(
        conversation::ConversationDeps{*profiles_, *sessions_, *knowledge_, prompts_, lexicons_, *registry_.chat,
                                       *clock_, *ids_, registry_.transcribe.get(), media_.get()},
        config_.conversation);
    generator_ = std::make_unique<generation::MaterialGenerator>(
        generation::GenerationDeps{*jobs_, *materials_, *profiles_, *knowledge_, *media_, prompts_, lexicons_,
                                   registry_, *clock_, *ids_},
        config_.generation);
    storybook_ = std::make_unique<storybook::StorybookArchive>(
        storybook::StorybookDeps{*books_, *materials_, *profiles_, *media_, *clock_, *ids_});
    runner_ = std::make_unique<generation::JobRunner>(config_.workers, [this](const std::string& id) { run(id); });

    if (options.resume_jobs) resume();
}

Service::~Service() {
    if (runner_) runner_->stop();
}

void Service::run(const std::string& job_id) {
    auto job = generator_->run_job(job_id);
    if (job.status == JobStatus::failed)
        log::warn("jobs", job_id + " failed: " + job.error_cause.value_or("") + " " + job.error_message.value_or(""));
    engine_->finish_generation(job.session_id, job.material_id);
}

void Service::resume() {
    auto pending = generator_->unfinished_jobs();
    for (const auto& job : pending) {
        log::info("jobs", "resuming " + job.job_id);
        runner_->submit(job.job_id);
    }
    // A session left generating whose job already finished missed its
    // finish_generation call; settle it from the job record.
    for (const auto& s : sessions_->all()) {
        if (s.status != SessionStatus::generating) continue;
        std::optional<GenerationJob> latest;
        bool running = false;
        for (const auto& j : jobs_->all()) {
            if (j.session_id != s.session_id) continue;
            if (j.status == JobStatus::queued || j.status == JobStatus::running) running = true;
            if (!latest || j.created_at >= latest->created_at) latest = j;
        }
        if (running) continue;
        engine_->finish_generation(s.session_id, latest ? latest->material_id : std::nullopt);
    }
}

CreatedProfile Service::create_profile(const json& raw) {
    auto v = validate_profile(raw);
    if (!v.ok()) throw Error(ErrorCode::validation, "invalid profile", v.errors);
    CreatedProfile out;
    out.profile = *v.profile;
    out.profile.user_id = ids_->next("usr");
    out.warnings = v.warnings;
    profiles_->put(out.profile.user_id, out.profile);
    out.token = issue_token(out.profile.user_id);
    return out;
}

UserProfile Service::get_profile(const std::string& user_id) const {
    auto p = profiles_->get(user_id);
    if (!p) throw_not_found("user " + user_id);
    return *p;
}

std::vector<UserProfile> Service::list_profiles() const { return profiles_->all(); }

std::string Service::issue_token(const std::string& user_id) {
    get_profile(user_id);
    AccessToken t{ids_->next("tok"), user_id, clock_->now()};
    tokens_->put(t.token, t);
    return t.token;
}

std::string Service::authenticate(std::string_view token) const {
    if (token.empty() || !is_safe_id(token)) throw Error(ErrorCode::unauthorized, "missing or malformed token");
    auto t = tokens_->get(std::string(token));
    if (!t) throw Error(ErrorCode::unauthorized, "unknown token");
    return t->user_id;
}

KnowledgeBase Service::ingest_documents(const std::string& user_id, const std::vector<knowledge::Document>& docs) {
    return knowledge_->ingest(get_profile(user_id), docs);
}

KnowledgeBase Service::ingest_titles(const std::string& user_id, const std::vector<std::string>& titles) {
    if (!config_.encyclopedia) throw Error(ErrorCode::precondition, "no encyclopedia source is configured");
    auto profile = get_profile(user_id);
    knowledge::EncyclopediaClient client(*config_.encyclopedia);
    std::vector<knowledge::Document> docs;
    for (const auto& t : titles) docs.push_back(client.fetch(t));
    return knowledge_->ingest(profile, docs);
}

KnowledgeBase Service::knowledge_base(const std::string& user_id) const {
    get_profile(user_id);
    return knowledge_->get(user_id);
}

Session Service::session_for(const std::string& user_id, const std::string& session_id) const {
    auto s = engine_->get_session(session_id);
    if (s.user_id != user_id) throw Error(ErrorCode::forbidden, "session belongs to another user");
    return s;
}

GenerationJob Service::job_for(const std::string& user_id, const std::string& job_id) const {
    auto j = generator_->get_job(job_id);
    if (j.user_id != user_id) throw Error(ErrorCode::forbidden, "job belongs to another user");
    return j;
}

MemoryMaterial Service::material_for(const std::string& user_id, const std::string& material_id) const {
    auto m = generator_->get_material(material_id);
    if (m.user_id != user_id) throw Error(ErrorCode::forbidden, "material belongs to another user");
    return m;
}

GenerationJob Service::request_generation(const std::string& user_id, const std::string& session_id) {
    session_for(user_id, session_id);
    GenerationJob job;
    engine_->request_generation(session_id, [&](const Session& snapshot) {
        job = generator_->create_job(snapshot);
        return job.job_id;
    });
    runner_->submit(job.job_id);
    return job;
}

void Service::wait_for_jobs() { runner_->wait_idle(); }

}  // namespace remi::service
