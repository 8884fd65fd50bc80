#pragma once

#include "remi/core/clock.hpp"
#include "remi/core/store.hpp"
#include "remi/core/types.hpp"
#include "remi/knowledge/knowledge.hpp"
#include "remi/media/media_store.hpp"
#include "remi/prompt/prompt.hpp"
#include "remi/providers/registry.hpp"

#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace remi::generation {

struct GenerationConfig {
    int image_width = 512;
    int image_height = 512;
    int embellishment_budget = 3;
    std::size_t k = 6;
};

struct GenerationDeps {
    DocumentStore<GenerationJob>& jobs;
    DocumentStore<MemoryMaterial>& materials;
    DocumentStore<UserProfile>& profiles;
    knowledge::KnowledgeStore& knowledge;
    media::MediaStore& media;
    const prompt::PromptLibrary& prompts;
    const text::LexiconSet& lexicons;
    providers::ProviderRegistry& providers;
    const Clock& clock;
    IdGenerator& ids;
};

struct RedrawRequest {
    std::optional<ImagePrompt> prompt;     // replaces the parent's prompt when set
    std::optional<std::string> feedback;   // carried into the prompt as a requested change
};

struct SpeechResult {
    std::string audio;     // encoded bytes
    std::string audio_ref; // stored in the media store
    std::string mime;
    std::string voice;
    std::optional<std::string> warning;
};

// Job execution plus the append-only material operations.
class MaterialGenerator {
public:
    MaterialGenerator(GenerationDeps deps, GenerationConfig config = {});

    // Persists a queued job bound to the session as it stands now.
    GenerationJob create_job(const Session& snapshot);
    GenerationJob get_job(const std::string& job_id) const;
    // Jobs left queued or running, oldest first (resumed after a restart).
    std::vector<GenerationJob> unfinished_jobs() const;

    // Runs a job to done or failed. Image and narrative are produced as a
    // unit: on any failure no material is stored. Re-running a job whose
    // material already exists just marks it done.
    GenerationJob run_job(const std::string& job_id);

    MemoryMaterial get_material(const std::string& material_id) const;

    ImageCandidate edit_image(const std::string& material_id, const std::string& candidate_ref,
                              const MaskRegion& mask, const std::string& instruction);
    ImageCandidate redraw_image(const std::string& material_id, const RedrawRequest& request);
    MemoryMaterial select_candidate(const std::string& material_id, std::int64_t index);
    NarrativeText edit_narrative(const std::string& material_id, const std::string& body);

    std::string transcribe(std::string_view audio, const std::string& locale);
    SpeechResult synthesize(const std::string& text, std::string_view voice);

    // Material id reserved for a job, so a resumed job never duplicates output.
    static std::string material_id_for(const std::string& job_id);

private:
    UserProfile profile(const std::string& user_id) const;
    MemoryMaterial load_material(const std::string& material_id) const;

    GenerationDeps deps_;
    GenerationConfig config_;
    KeyedMutex material_locks_;
    KeyedMutex job_locks_;
};

// Failure cause recorded on a job: "timeout", "unavailable", "provider_error",
// "bad_response", or the error code wire name ("precondition_failed", ...)
// for service-side failures.
std::string failure_cause(const std::exception& e);

// Bounded worker pool. Jobs run in submission order on up to `workers`
// threads.
class JobRunner {
public:
    using Task = std::function<void(const std::string& job_id)>;

    JobRunner(std::size_t workers, Task task);
    ~JobRunner();
    JobRunner(const JobRunner&) = delete;
    JobRunner& operator=(const JobRunner&) = delete;

    void submit(const std::string& job_id);
    // Blocks until the queue is empty and no job is running.
    void wait_idle();
    // Finishes running jobs, drops the queue (queued jobs stay queued on disk).
    void stop();

    std::size_t workers() const { return threads_.size(); }
    std::size_t peak_concurrency() const;

private:
    void loop();

    Task task_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable idle_cv_;
    std::deque<std::string> queue_;
    std::size_t running_ = 0;
    std::size_t peak_ = 0;
    bool stopping_ = false;
    std::vector<std::thread> threads_;
};

}  // namespace remi::generation
