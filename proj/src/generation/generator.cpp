#include "remi/generation/generator.hpp"

#include "remi/core/error.hpp"
#include "remi/core/log.hpp"
#include "remi/media/mask.hpp"
#include "remi/text/tokenize.hpp"

#include <algorithm>
#include <cctype>

namespace remi::generation {

namespace {

Error provider_failure(const std::string& what, const providers::ProviderError& e) {
    return Error(ErrorCode::provider, what + " failed (" + std::string(providers::to_string(e.kind())) + "): " + e.what());
}

}  // namespace

std::string failure_cause(const std::exception& e) {
    if (auto* p = dynamic_cast<const providers::ProviderError*>(&e)) {
        switch (p->kind()) {
            case providers::FailureKind::timeout: return "timeout";
            case providers::FailureKind::unavailable: return "unavailable";
            case providers::FailureKind::bad_response: return "bad_response";
            case providers::FailureKind::client_error:
            case providers::FailureKind::server_error: return "provider_error";
        }
    }
    if (auto* r = dynamic_cast<const Error*>(&e)) return to_string(r->code());
    return "internal";
}

MaterialGenerator::MaterialGenerator(GenerationDeps deps, GenerationConfig config) : deps_(deps), config_(config) {
    if (config_.image_width <= 0 || config_.image_height <= 0)
        throw Error(ErrorCode::validation, "image size must be positive");
    if (config_.embellishment_budget < 0) throw Error(ErrorCode::validation, "embellishment budget must be >= 0");
}

std::string MaterialGenerator::material_id_for(const std::string& job_id) {
    auto us = job_id.find('_');
    return "mat_" + (us == std::string::npos ? job_id : job_id.substr(us + 1));
}

UserProfile MaterialGenerator::profile(const std::string& user_id) const {
    auto p = deps_.profiles.get(user_id);
    if (!p) throw_not_found("user " + user_id);
    return *p;
}

MemoryMaterial MaterialGenerator::load_material(const std::string& material_id) const {
    auto m = deps_.materials.get(material_id);
    if (!m) throw_not_found("material " + material_id);
    return *m;
}

GenerationJob MaterialGenerator::create_job(const Session& snapshot) {
    GenerationJob job;
    job.job_id = deps_.ids.next("job");
    job.session_id = snapshot.session_id;
    job.user_id = snapshot.user_id;
    job.transcript_snapshot = snapshot.transcript;
    job.status = JobStatus::queued;
    job.created_at = deps_.clock.now();
    deps_.jobs.put(job.job_id, job);
    return job;
}

GenerationJob MaterialGenerator::get_job(const std::string& job_id) const {
    auto j = deps_.jobs.get(job_id);
    if (!j) throw_not_found("job " + job_id);
    return *j;
}

std::vector<GenerationJob> MaterialGenerator::unfinished_jobs() const {
    std::vector<GenerationJob> out;
    for (auto& j : deps_.jobs.all())
        if (j.status == JobStatus::queued || j.status == JobStatus::running) out.push_back(std::move(j));
    std::sort(out.begin(), out.end(), [](const GenerationJob& a, const GenerationJob& b) {
        if (a.created_at != b.created_at) return a.created_at < b.created_at;
        return a.job_id < b.job_id;
    });
    return out;
}

GenerationJob MaterialGenerator::run_job(const std::string& job_id) {
    auto lock = job_locks_.lock(job_id);
    GenerationJob job = get_job(job_id);
    if (job.status == JobStatus::done || job.status == JobStatus::failed) return job;

    std::string material_id = material_id_for(job.job_id);
    if (deps_.materials.contains(material_id)) {
        job.status = JobStatus::done;
        job.material_id = material_id;
        deps_.jobs.put(job.job_id, job);
        return job;
    }
    job.status = JobStatus::running;
    deps_.jobs.put(job.job_id, job);

    try {
        auto user = profile(job.user_id);
        const auto& lexicon = deps_.lexicons.for_locale(user.locale);
        prompt::GenerationContext ctx{deps_.prompts, lexicon, year_of(deps_.clock.now()), config_.k};
        auto kb = deps_.knowledge.get(job.user_id);

        auto image_prompt = prompt::build_image_prompt(job.transcript_snapshot, user, kb, *deps_.providers.chat,
                                                       deps_.providers.retry("chat"), ctx);
        auto text_prompt = prompt::build_text_prompt(job.transcript_snapshot, user, config_.embellishment_budget, ctx);
        job.image_prompt = image_prompt;
        job.text_prompt = text_prompt;

        auto rendered = prompt::render_image_prompt(image_prompt, user, deps_.prompts);
        auto image = providers::with_retry(deps_.providers.retry("image_gen"), [&] {
            return deps_.providers.image_gen->generate(rendered, config_.image_width, config_.image_height);
        });
        if (image.empty()) throw providers::ProviderError(providers::FailureKind::bad_response, "empty image");

        auto request = prompt::narrative_request(text_prompt, user, deps_.prompts);
        auto narrative = providers::with_retry(deps_.providers.retry("chat"),
                                               [&] { return deps_.providers.chat->complete(request); });
        narrative = text::collapse_whitespace(narrative);
        if (narrative.empty()) throw providers::ProviderError(providers::FailureKind::bad_response, "empty narrative");

        // Only now, with both parts in hand, does anything become visible.
        MemoryMaterial m;
        m.material_id = material_id;
        m.session_id = job.session_id;
        m.user_id = job.user_id;
        ImageCandidate c;
        c.image_ref = deps_.media.put_image(image);
        c.width = image.width();
        c.height = image.height();
        c.provenance = Provenance::generated;
        c.prompt_used = image_prompt;
        m.image_candidates.push_back(std::move(c));
        m.narrative = {narrative, false};
        m.created_at = deps_.clock.now();
        deps_.materials.put(m.material_id, m);

        job.status = JobStatus::done;
        job.material_id = material_id;
        job.error_cause.reset();
        job.error_message.reset();
    } catch (const std::exception& e) {
        job.status = JobStatus::failed;
        job.error_cause = failure_cause(e);
        job.error_message = e.what();
        log::warn("generation", "job " + job.job_id + " failed: " + e.what());
    }
    deps_.jobs.put(job.job_id, job);
    return job;
}

MemoryMaterial MaterialGenerator::get_material(const std::string& material_id) const {
    return load_material(material_id);
}

ImageCandidate MaterialGenerator::edit_image(const std::string& material_id, const std::string& candidate_ref,
                                             const MaskRegion& mask, const std::string& instruction) {
    auto lock = material_locks_.lock(material_id);
    auto m = load_material(material_id);
    auto parent = std::find_if(m.image_candidates.begin(), m.image_candidates.end(),
                               [&](const ImageCandidate& c) { return c.image_ref == candidate_ref; });
    if (parent == m.image_candidates.end()) throw_not_found("candidate " + candidate_ref);
    if (!mask.image_ref.empty() && mask.image_ref != candidate_ref)
        throw Error(ErrorCode::validation, "mask belongs to a different image",
                    {{"mask.image_ref", "mismatch", "must equal the edited candidate"}});
    auto raster = media::rasterize_mask(mask, parent->width, parent->height);  // validates bounds
    auto source = deps_.media.load_image(candidate_ref);

    media::Image edited;
    try {
        edited = providers::with_retry(deps_.providers.retry("image_edit"),
                                       [&] { return deps_.providers.image_edit->edit(source, raster, instruction); });
    } catch (const providers::ProviderError& e) {
        throw provider_failure("image edit", e);
    }
    if (edited.width() != source.width() || edited.height() != source.height())
        throw Error(ErrorCode::provider, "image edit returned a different size");
    // Pixels outside the mask always come from the parent.
    for (int y = 0; y < source.height(); ++y)
        for (int x = 0; x < source.width(); ++x)
            if (!raster[static_cast<std::size_t>(y) * source.width() + x]) edited.set(x, y, source.at(x, y));

    ImageCandidate c;
    c.image_ref = deps_.media.put_image(edited);
    c.width = edited.width();
    c.height = edited.height();
    c.provenance = Provenance::edited;
    c.parent = candidate_ref;
    c.prompt_used = parent->prompt_used;
    c.instruction = instruction;
    m.image_candidates.push_back(c);
    deps_.materials.put(material_id, m);
    return c;
}

ImageCandidate MaterialGenerator::redraw_image(const std::string& material_id, const RedrawRequest& request) {
    auto lock = material_locks_.lock(material_id);
    auto m = load_material(material_id);
    if (m.image_candidates.empty()) throw Error(ErrorCode::precondition, "material has no image to redraw");
    const auto& parent = m.selected_image ? m.image_candidates.at(*m.selected_image) : m.image_candidates.back();

    ImagePrompt p = request.prompt ? *request.prompt : parent.prompt_used;
    if (request.feedback) {
        auto fb = text::collapse_whitespace(*request.feedback);
        if (fb.empty()) p.feedback.reset();
        else p.feedback = fb;
    }
    if (p.negative_clauses.empty()) p.negative_clauses = deps_.prompts.negative_clauses();
    if (p.composition_rules.empty()) p.composition_rules = deps_.prompts.composition_rules();
    if (p.template_version.empty()) p.template_version = deps_.prompts.version();
    if (text::collapse_whitespace(p.scene_summary).empty())
        throw Error(ErrorCode::validation, "image prompt needs a scene",
                    {{"prompt.scene_summary", "required", "must not be empty"}});

    auto rendered = prompt::render_image_prompt(p, profile(m.user_id), deps_.prompts);
    media::Image image;
    try {
        image = providers::with_retry(deps_.providers.retry("image_gen"), [&] {
            return deps_.providers.image_gen->generate(rendered, parent.width, parent.height);
        });
    } catch (const providers::ProviderError& e) {
        throw provider_failure("image generation", e);
    }
    if (image.empty()) throw Error(ErrorCode::provider, "image generation returned an empty image");

    ImageCandidate c;
    c.image_ref = deps_.media.put_image(image);
    c.width = image.width();
    c.height = image.height();
    c.provenance = Provenance::redrawn;
    c.parent = parent.image_ref;
    c.prompt_used = p;
    m.image_candidates.push_back(c);
    deps_.materials.put(material_id, m);
    return c;
}

MemoryMaterial MaterialGenerator::select_candidate(const std::string& material_id, std::int64_t index) {
    auto lock = material_locks_.lock(material_id);
    auto m = load_material(material_id);
    if (index < 0 || static_cast<std::size_t>(index) >= m.image_candidates.size())
        throw Error(ErrorCode::validation, "candidate index out of range",
                    {{"index", "out_of_range",
                      "must be in [0, " + std::to_string(m.image_candidates.size()) + ")"}});
    m.selected_image = static_cast<std::size_t>(index);
    deps_.materials.put(material_id, m);
    return m;
}

NarrativeText MaterialGenerator::edit_narrative(const std::string& material_id, const std::string& body) {
    auto lock = material_locks_.lock(material_id);
    auto m = load_material(material_id);
    bool blank = std::all_of(body.begin(), body.end(), [](unsigned char ch) { return std::isspace(ch); });
    if (blank) throw Error(ErrorCode::validation, "narrative must not be empty", {{"body", "required", "must not be empty"}});
    m.narrative.body = body;
    m.narrative.user_edited = true;
    deps_.materials.put(material_id, m);
    return m.narrative;
}

std::string MaterialGenerator::transcribe(std::string_view audio, const std::string& locale) {
    if (audio.empty()) throw Error(ErrorCode::validation, "empty audio", {{"audio", "required", "must not be empty"}});
    try {
        return providers::with_retry(deps_.providers.retry("transcribe"),
                                     [&] { return deps_.providers.transcribe->transcribe(audio, locale); });
    } catch (const providers::ProviderError& e) {
        throw provider_failure("transcription", e);
    }
}

SpeechResult MaterialGenerator::synthesize(const std::string& text, std::string_view voice) {
    if (text::collapse_whitespace(text).empty())
        throw Error(ErrorCode::validation, "nothing to synthesize", {{"text", "required", "must not be empty"}});
    auto resolved = providers::resolve_voice(voice);
    SpeechResult out;
    try {
        out.audio = providers::with_retry(deps_.providers.retry("synthesize"), [&] {
            return deps_.providers.synthesize->synthesize(text, resolved.profile);
        });
    } catch (const providers::ProviderError& e) {
        throw provider_failure("speech synthesis", e);
    }
    out.audio_ref = deps_.media.put(out.audio);
    out.mime = media::sniff_mime(out.audio);
    out.voice = resolved.profile.id;
    out.warning = resolved.warning;
    return out;
}

// ---------------------------------------------------------------------------
// JobRunner
// ---------------------------------------------------------------------------

JobRunner::JobRunner(std::size_t workers, Task task) : task_(std::move(task)) {
    if (workers == 0) workers = 1;
    for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this] { loop(); });
}

JobRunner::~JobRunner() { stop(); }

void JobRunner::submit(const std::string& job_id) {
    {
        std::lock_guard lock(mutex_);
        if (stopping_) return;
        queue_.push_back(job_id);
    }
    cv_.notify_one();
}

void JobRunner::wait_idle() {
    std::unique_lock lock(mutex_);
    idle_cv_.wait(lock, [&] { return (queue_.empty() || stopping_) && running_ == 0; });
}

void JobRunner::stop() {
    {
        std::lock_guard lock(mutex_);
        if (stopping_ && threads_.empty()) return;
        stopping_ = true;
        queue_.clear();
    }
    cv_.notify_all();
    for (auto& t : threads_)
        if (t.joinable()) t.join();
    threads_.clear();
    idle_cv_.notify_all();
}

std::size_t JobRunner::peak_concurrency() const {
    std::lock_guard lock(mutex_);
    return peak_;
}

void JobRunner::loop() {
    for (;;) {
        std::string job_id;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (stopping_) return;
            job_id = std::move(queue_.front());
            queue_.pop_front();
            ++running_;
            peak_ = std::max(peak_, running_);
        }
        try {
            task_(job_id);
        } catch (const std::exception& e) {
            log::error("jobs", "job " + job_id + " escaped with: " + e.what());
        }
        {
            std::lock_guard lock(mutex_);
            --running_;
        }
        idle_cv_.notify_all();
    }
}

}  // namespace remi::generation
